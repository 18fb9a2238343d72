"""Referential-integrity and domain checks over the nine written tables.

Everything is read back from disk, so a clean report also shows the files
are self-sufficient.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from wikikg.graph import schema as S
from wikikg.normalize.identifiers import DEFAULT_SCHEMES
from wikikg.tsv import read_header, read_tsv

_CHUNK = 1 << 16


@dataclass
class IntegrityReport:
    row_counts: dict = field(default_factory=dict)
    violations: Counter = field(default_factory=Counter)
    examples: list = field(default_factory=list)

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    @property
    def ok(self) -> bool:
        return self.total_violations == 0

    def flag(self, kind: str, detail: str = "", n: int = 1) -> None:
        if n <= 0:
            return
        self.violations[kind] += n
        if len(self.examples) < 20:
            self.examples.append(f"{kind}: {detail}" if detail else kind)

    def as_dict(self) -> dict:
        out = {f"rows.{k}": v for k, v in sorted(self.row_counts.items())}
        out.update({f"violations.{k}": v for k, v in sorted(self.violations.items())})
        out["violations.total"] = self.total_violations
        return out

    def render(self) -> str:
        lines = [f"{k} = {v}" for k, v in self.as_dict().items()]
        lines += [f"example = {e}" for e in self.examples]
        return "\n".join(lines) + "\n"


class _IdSet:
    """Sorted id array with batched membership tests."""

    def __init__(self, ids):
        self.ids = np.unique(np.asarray(ids, dtype=np.int64))

    def missing(self, values) -> int:
        q = np.asarray(values, dtype=np.int64)
        if not len(q):
            return 0
        if not len(self.ids):
            return len(q)
        pos = np.minimum(np.searchsorted(self.ids, q), len(self.ids) - 1)
        return int((self.ids[pos] != q).sum())


def _rows(path: str, width: int, report: IntegrityReport, table: str) -> Iterator[list]:
    for i, row in enumerate(read_tsv(path), 2):
        if len(row) != width:
            report.flag(f"{table}.malformed_row", f"line {i}")
            continue
        yield row


def _int(value: str) -> Optional[int]:
    try:
        return int(value)
    except ValueError:
        return None


def _check_key_column(report, table, keys: list, label: str) -> np.ndarray:
    arr = np.asarray(keys, dtype=np.int64)
    if len(arr) and np.any(arr[1:] <= arr[:-1]):
        order = np.sort(arr)
        report.flag(f"{table}.duplicate_{label}", n=int((order[1:] == order[:-1]).sum()))
        report.flag(f"{table}.unsorted", n=int(np.any(arr[1:] < arr[:-1])))
    if len(arr) and arr.min() <= 0:
        report.flag(f"{table}.nonpositive_{label}", n=int((arr <= 0).sum()))
    return arr


def _check_edges(path, table, columns, targets: list, report: IntegrityReport,
                 extra=None) -> int:
    """FK-check integer edge columns against their id sets; detect duplicate/unsorted rows."""
    width = len(columns)
    n = 0
    buffers = [[] for _ in targets]
    last = None

    def flush():
        for (col, ids, label), buf in zip(targets, buffers):
            report.flag(f"{table}.orphan_{label}", n=ids.missing(buf))
            buf.clear()

    for row in _rows(path, width, report, table):
        n += 1
        key = []
        bad = False
        for (col, _, _), buf in zip(targets, buffers):
            v = _int(row[col])
            if v is None:
                report.flag(f"{table}.non_integer", f"{row!r}")
                bad = True
                break
            buf.append(v)
            key.append(v)
        if bad:
            continue
        if extra is not None:
            extra(row, report)
        key = tuple(key)
        if last is not None:
            if key == last:
                report.flag(f"{table}.duplicate_edge", repr(key))
            elif key < last:
                report.flag(f"{table}.unsorted", repr(key))
        last = key
        if len(buffers[0]) >= _CHUNK:
            flush()
    flush()
    return n


def verify_integrity(graph_dir: str, schemes=DEFAULT_SCHEMES) -> IntegrityReport:
    """Check keys, foreign keys and flag domains of all nine tables."""
    report = IntegrityReport()
    paths = {t: os.path.join(graph_dir, f) for t, f in S.TABLE_FILES.items()}
    expected = {
        "page": S.PAGE_COLUMNS,
        "category": S.CATEGORY_COLUMNS,
        "page_property": S.PAGE_PROPERTY_COLUMNS,
        "pub": S.pub_columns(schemes),
        "url": S.URL_COLUMNS,
        "page_category": S.PAGE_CATEGORY_COLUMNS,
        "page_link": S.PAGE_LINK_COLUMNS,
        "page_pub": S.PAGE_PUB_COLUMNS,
        "page_url": S.PAGE_URL_COLUMNS,
    }
    present = {}
    for table, path in paths.items():
        if not os.path.exists(path):
            report.flag("missing_file", S.TABLE_FILES[table])
            continue
        if tuple(read_header(path)) != tuple(expected[table]):
            report.flag(f"{table}.bad_header")
            continue
        present[table] = path

    # -- base tables
    page_ids: list = []
    if "page" in present:
        for row in _rows(present["page"], len(S.PAGE_COLUMNS), report, "page"):
            pid = _int(row[0])
            nums = [_int(row[i]) for i in (1, 7, 9, 10, 11, 12)]
            if pid is None or any(v is None for v in nums):
                report.flag("page.non_integer", row[0])
                continue
            page_ids.append(pid)
            if row[3] not in ("0", "1") or row[4] not in ("0", "1"):
                report.flag("page.bad_flag", row[0])
            length, edits, editors, views, refs = nums[1:]
            if min(length, edits, editors, views, refs) < 0:
                report.flag("page.negative_count", row[0])
            if editors > edits:
                report.flag("page.editors_exceed_edits", row[0])
            if row[8] and edits < 1:
                report.flag("page.created_without_edits", row[0])
            if not row[2]:
                report.flag("page.empty_title", row[0])
        _check_key_column(report, "page", page_ids, "page_id")
        report.row_counts["page"] = len(page_ids)
    pages = _IdSet(page_ids)
    del page_ids

    cat_ids: list = []
    if "category" in present:
        for row in _rows(present["category"], len(S.CATEGORY_COLUMNS), report, "category"):
            cid = _int(row[0])
            counts = [_int(v) for v in row[2:5]]
            if cid is None or any(v is None for v in counts):
                report.flag("category.non_integer", row[0])
                continue
            cat_ids.append(cid)
            if min(counts) < 0:
                report.flag("category.negative_count", row[0])
            if row[5] not in ("0", "1"):
                report.flag("category.bad_flag", row[0])
        _check_key_column(report, "category", cat_ids, "category_id")
        report.row_counts["category"] = len(cat_ids)
    categories = _IdSet(cat_ids)

    url_ids: list = []
    if "url" in present:
        last_url = None
        for row in _rows(present["url"], len(S.URL_COLUMNS), report, "url"):
            uid = _int(row[0])
            if uid is None:
                report.flag("url.non_integer", row[0])
                continue
            url_ids.append(uid)
            if last_url is not None and row[1] <= last_url:
                report.flag("url.duplicate_or_unsorted_url", row[1])
            last_url = row[1]
            if row[1].startswith(("http://", "https://")):
                report.flag("url.scheme_not_stripped", row[1])
            if not row[2]:
                report.flag("url.empty_domain", row[1])
        arr = _check_key_column(report, "url", url_ids, "url_id")
        if len(arr) and not np.array_equal(arr, np.arange(1, len(arr) + 1)):
            report.flag("url.ids_not_dense")
        report.row_counts["url"] = len(url_ids)
    urls = _IdSet(url_ids)
    del url_ids

    pub_ids: list = []
    if "pub" in present:
        width = len(expected["pub"])
        last_key = None
        for row in _rows(present["pub"], width, report, "pub"):
            pid = _int(row[0])
            if pid is None:
                report.flag("pub.non_integer", row[0])
                continue
            pub_ids.append(pid)
            if last_key is not None and row[1] <= last_key:
                report.flag("pub.duplicate_or_unsorted_key", row[1])
            last_key = row[1]
            if not any(row[2:]):
                report.flag("pub.no_identifier", row[0])
        arr = _check_key_column(report, "pub", pub_ids, "pub_id")
        if len(arr) and not np.array_equal(arr, np.arange(1, len(arr) + 1)):
            report.flag("pub.ids_not_dense")
        report.row_counts["pub"] = len(pub_ids)
    pubs = _IdSet(pub_ids)
    del pub_ids

    # -- edge tables
    if "page_property" in present:
        n = 0
        buf: list = []
        last = None
        for row in _rows(present["page_property"], 3, report, "page_property"):
            n += 1
            pid = _int(row[0])
            if pid is None:
                report.flag("page_property.non_integer", row[0])
                continue
            buf.append(pid)
            key = (pid, row[1])
            if last is not None and key <= last:
                report.flag("page_property.duplicate_or_unsorted_key", repr(key))
            last = key
            if len(buf) >= _CHUNK:
                report.flag("page_property.orphan_page_id", n=pages.missing(buf))
                buf = []
        report.flag("page_property.orphan_page_id", n=pages.missing(buf))
        report.row_counts["page_property"] = n

    def link_type(row, rep):
        if row[2] not in S.LINK_TYPES:
            rep.flag("page_category.bad_link_type", row[2])

    def ref_flag(row, rep):
        if row[2] not in ("0", "1"):
            rep.flag("page_url.bad_flag", row[2])

    edge_specs = {
        "page_category": ([(0, pages, "page_id"), (1, categories, "category_id")], link_type),
        "page_link": ([(0, pages, "from_page_id"), (1, pages, "to_page_id")], None),
        "page_pub": ([(0, pages, "page_id"), (1, pubs, "pub_id")], None),
        "page_url": ([(0, pages, "page_id"), (1, urls, "url_id")], ref_flag),
    }
    for table, (targets, extra) in edge_specs.items():
        if table in present:
            report.row_counts[table] = _check_edges(
                present[table], table, expected[table], targets, report, extra
            )
    return report
