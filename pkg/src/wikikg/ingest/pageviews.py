"""Pageview analytics files: delimited text, one line per page (and agent) per day."""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from datetime import date
from typing import BinaryIO, Iterable, Iterator, Optional

from wikikg.ingest.namespaces import split_namespace
from wikikg.ingest.records import PageViewRecord
from wikikg.ingest.stats import ParseStats


@dataclass(frozen=True)
class PageviewColumns:
    """Zero-based column positions. ``None`` means the file lacks the column.

    Without a ``date`` column every line takes the file's date (see
    :func:`date_from_filename`); without a ``namespace`` column the namespace
    is split off the title prefix.
    """

    wiki: int = 0
    title: int = 1
    page_id: Optional[int] = 2
    agent: Optional[int] = 3
    total: int = 4
    date: Optional[int] = None
    namespace: Optional[int] = None
    delimiter: str = "\t"


_FILE_DATE = re.compile(r"(20\d{2})-?(\d{2})-?(\d{2})")


def date_from_filename(name: str) -> Optional[date]:
    m = _FILE_DATE.search(name.rsplit("/", 1)[-1])
    if not m:
        return None
    return date(int(m.group(1)), int(m.group(2)), int(m.group(3)))


def _parse_date(text: str) -> date:
    text = text.strip()
    if len(text) == 8 and text.isdigit():
        return date(int(text[:4]), int(text[4:6]), int(text[6:]))
    return date.fromisoformat(text[:10])


def parse_pageviews(
    stream: BinaryIO,
    columns: PageviewColumns,
    window: tuple[date, date],
    wiki: str = "en.wikipedia",
    agents: Optional[set] = None,
    file_date: Optional[date] = None,
    stats: Optional[ParseStats] = None,
) -> Iterator[PageViewRecord]:
    """Yield view records for ``wiki`` whose date falls in the closed ``window``.

    ``agents=None`` keeps every agent type. Malformed lines are skipped and
    counted in ``stats``; :class:`~wikikg.errors.TooManyMalformed` is raised at
    the end if they exceed the tolerance.
    """
    if stats is None:
        stats = ParseStats("pageviews")
    start, end = window
    needed = max(
        c for c in (columns.wiki, columns.title, columns.page_id, columns.agent,
                    columns.total, columns.date, columns.namespace) if c is not None
    )
    delim = columns.delimiter
    for line_no, raw in enumerate(stream, 1):
        line = raw.decode("utf-8", "replace").rstrip("\r\n")
        if not line:
            continue
        stats.lines += 1
        fields = line.split(delim)
        if len(fields) <= needed:
            stats.bad(line_no, f"{len(fields)} fields")
            continue
        try:
            if columns.date is not None:
                day = _parse_date(fields[columns.date])
            elif file_date is not None:
                day = file_date
            else:
                raise ValueError("no date column and no file date")
            count = int(fields[columns.total])
            if count < 0:
                raise ValueError("negative count")
            pid_text = fields[columns.page_id].strip() if columns.page_id is not None else ""
            page_id = int(pid_text) if pid_text and pid_text.lower() not in ("null", "-") else 0
            if page_id < 0:
                raise ValueError("negative page id")
            if columns.namespace is not None:
                namespace = int(fields[columns.namespace])
                title = fields[columns.title].replace(" ", "_")
            else:
                namespace, title = split_namespace(fields[columns.title])
        except ValueError as exc:
            stats.bad(line_no, str(exc))
            continue
        if not title:
            stats.bad(line_no, "empty title")
            continue
        if fields[columns.wiki] != wiki or not (start <= day <= end):
            stats.filtered += 1
            continue
        if agents is not None and columns.agent is not None and fields[columns.agent] not in agents:
            stats.filtered += 1
            continue
        stats.emitted += 1
        yield PageViewRecord(page_id, title, namespace, day, count)
    stats.check()


def view_key(record: PageViewRecord):
    """page_id when the source has one, else ``(namespace, title)``."""
    if record.page_id:
        return record.page_id
    return (record.namespace, record.title)


def aggregate_views(records: Iterable[PageViewRecord]) -> dict:
    """Total views per page key over all records (any order)."""
    totals: dict = defaultdict(int)
    for rec in records:
        totals[view_key(rec)] += rec.count
    return dict(totals)


def merge_view_totals(*parts: dict) -> dict:
    out: dict = defaultdict(int)
    for part in parts:
        for k, v in part.items():
            out[k] += v
    return dict(out)
