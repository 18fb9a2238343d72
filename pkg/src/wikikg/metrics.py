"""The twelve per-article metrics, recomputed from the written graph files.

Scope is every non-redirect page in the article namespace. Nothing here
touches intermediate build state: the nine tables are enough.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass
from datetime import date, datetime
from typing import Iterator, NamedTuple, Optional

import numpy as np

from wikikg.errors import CreatedAfterAsOf, MissingGraph
from wikikg.graph import schema as S
from wikikg.graph.titles import PageIndex, title_key
from wikikg.ingest.records import parse_mw_timestamp
from wikikg.tsv import TsvWriter, read_int_table, read_tsv

METRIC_NAMES = (
    "editors", "edits", "linked", "links", "age", "length", "talkers", "talks",
    "views", "references", "pub_referenced", "urls",
)
METRICS_COLUMNS = ("page_id",) + METRIC_NAMES
METRICS_FILE = "metrics.tsv"
DAYS_PER_YEAR = 365.25


class ArticleMetrics(NamedTuple):
    page_id: int
    editors: int
    edits: int
    linked: int
    links: int
    age: float
    length: int
    talkers: int
    talks: int
    views: int
    references: int
    pub_referenced: int
    urls: int


@dataclass(frozen=True)
class MetricWindow:
    views_start: date
    views_end: date
    as_of: date

    def __post_init__(self):
        if not self.views_start <= self.views_end <= self.as_of:
            raise ValueError("expected views_start <= views_end <= as_of")


def compute_age(created: datetime, as_of: date) -> float:
    """Whole days from creation to ``as_of`` in years of 365.25 days, 2 decimals."""
    if isinstance(as_of, datetime):
        as_of = as_of.date()
    created_day = created.date() if isinstance(created, datetime) else created
    days = (as_of - created_day).days
    if days < 0:
        raise CreatedAfterAsOf(f"created {created_day} is after {as_of}")
    return round(days / DAYS_PER_YEAR, 2)


def talk_base_title(title: str) -> str:
    """The subject title an archived talk subpage belongs to (``X/Archive_3`` -> ``X``)."""
    head, sep, tail = title.rpartition("/")
    if sep and tail.replace(" ", "_").lower().startswith("archive"):
        return head
    return title


def pair_talk_page(article, page_index: PageIndex) -> Optional[int]:
    """Id of the talk page paired with a subject-namespace page, if it exists."""
    if article.namespace % 2:
        raise ValueError("talk pages pair with subject namespaces (even numbers) only")
    return page_index.get(article.namespace + 1, article.title)


class _Pages:
    """The page table as aligned arrays, ids sorted."""

    def __init__(self, path: str):
        cols = {c: i for i, c in enumerate(S.PAGE_COLUMNS)}
        ids, ns, redirect, length, edits, editors, views, refs = ([] for _ in range(8))
        created: list = []
        self.subject_titles: dict[str, int] = {}  # title key -> row index, ns 0
        self.talk_rows: list[tuple[int, str]] = []  # (row index, title), ns 1
        for i, row in enumerate(read_tsv(path)):
            ids.append(int(row[0]))
            n = int(row[cols["namespace"]])
            ns.append(n)
            redirect.append(row[cols["is_redirect"]] == "1")
            length.append(int(row[cols["length"]]))
            edits.append(int(row[cols["edits"]]))
            editors.append(int(row[cols["editors"]]))
            views.append(int(row[cols["views"]]))
            refs.append(int(row[cols["references"]]))
            created.append(row[cols["created"]])
            if n == 0:
                self.subject_titles[title_key(row[cols["title"]])] = i
            elif n == 1:
                self.talk_rows.append((i, row[cols["title"]]))
        self.ids = np.array(ids, dtype=np.int64)
        if np.any(self.ids[1:] <= self.ids[:-1]):
            raise ValueError(f"{path}: page ids are not strictly ascending")
        self.ns = np.array(ns, dtype=np.int64)
        self.redirect = np.array(redirect, dtype=bool)
        self.length = np.array(length, dtype=np.int64)
        self.edits = np.array(edits, dtype=np.int64)
        self.editors = np.array(editors, dtype=np.int64)
        self.views = np.array(views, dtype=np.int64)
        self.refs = np.array(refs, dtype=np.int64)
        self.created = created
        self.scope = (self.ns == 0) & ~self.redirect

    def rows_of(self, page_ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if not len(self.ids):
            return np.zeros(len(page_ids), np.int64), np.zeros(len(page_ids), bool)
        pos = np.minimum(np.searchsorted(self.ids, page_ids), len(self.ids) - 1)
        return pos, self.ids[pos] == page_ids


def _degree(pages: _Pages, path: str, ncols: int, both_in_scope: bool) -> tuple[np.ndarray, np.ndarray]:
    """Per-row counts of column 0 (out) and column 1 (in) over an integer edge table."""
    n = len(pages.ids)
    out = np.zeros(n, dtype=np.int64)
    inn = np.zeros(n, dtype=np.int64)
    for block in read_int_table(path, ncols):
        src, ok_src = pages.rows_of(block[:, 0])
        if both_in_scope:
            dst, ok_dst = pages.rows_of(block[:, 1])
            keep = ok_src & ok_dst
            keep &= pages.scope[src] & pages.scope[dst]
            inn += np.bincount(dst[keep], minlength=n)
        else:
            keep = ok_src
        out += np.bincount(src[keep], minlength=n)
    return out, inn


def compute_article_metrics(graph_dir: str, window: MetricWindow, report: Optional[Counter] = None,
                            include_talk_archives: bool = False) -> Iterator[ArticleMetrics]:
    """Yield metrics for every in-scope article in ascending page_id order."""
    report = Counter() if report is None else report
    paths = {t: os.path.join(graph_dir, f) for t, f in S.TABLE_FILES.items()}
    missing = [f for f in paths.values() if not os.path.exists(f)]
    if missing:
        raise MissingGraph(f"graph files missing: {', '.join(sorted(missing))}")

    pages = _Pages(paths["page"])
    n = len(pages.ids)
    links, linked = _degree(pages, paths["page_link"], 2, True)
    urls, _ = _degree(pages, paths["page_url"], 3, False)
    pubs, _ = _degree(pages, paths["page_pub"], 2, False)

    talks = np.zeros(n, dtype=np.int64)
    talkers = np.zeros(n, dtype=np.int64)
    for i, title in pages.talk_rows:
        key = title_key(title)
        subject = pages.subject_titles.get(key)
        if subject is None and include_talk_archives:
            base = title_key(talk_base_title(title))
            if base != key:
                subject = pages.subject_titles.get(base)
                if subject is not None:
                    # distinct editors across pages are unknown here: an upper bound
                    report["metrics.talk_archives_folded"] += 1
        if subject is None:
            continue
        talks[subject] += pages.edits[i]
        talkers[subject] += pages.editors[i]

    for i in np.flatnonzero(pages.scope).tolist():
        age = 0.0
        stamp = pages.created[i]
        if not stamp:
            report["metrics.no_creation_date"] += 1
        else:
            try:
                age = compute_age(parse_mw_timestamp(stamp), window.as_of)
            except CreatedAfterAsOf:
                report["metrics.created_after_as_of"] += 1
        report["metrics.articles"] += 1
        yield ArticleMetrics(
            int(pages.ids[i]), int(pages.editors[i]), int(pages.edits[i]), int(linked[i]),
            int(links[i]), age, int(pages.length[i]), int(talkers[i]), int(talks[i]),
            int(pages.views[i]), int(pages.refs[i]), int(pubs[i]), int(urls[i]),
        )
    report["metrics.links_total"] += int(links[pages.scope].sum())
    report["metrics.linked_total"] += int(linked[pages.scope].sum())


def write_metrics(rows, path: str) -> int:
    with TsvWriter(path, METRICS_COLUMNS) as w:
        return w.write_all(rows)


def read_metrics(path: str) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Page ids and one float array per metric from a metrics file."""
    ids = []
    values = [[] for _ in METRIC_NAMES]
    for row in read_tsv(path):
        ids.append(int(row[0]))
        for col, v in zip(values, row[1:]):
            col.append(float(v))
    return (np.array(ids, dtype=np.int64),
            {name: np.array(col, dtype=np.float64) for name, col in zip(METRIC_NAMES, values)})
