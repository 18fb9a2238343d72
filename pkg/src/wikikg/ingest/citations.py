"""Reader for the pre-extracted citations dataset (one row per reference)."""

from __future__ import annotations

import csv
import io
import re
import sys
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator, Optional

from wikikg.ingest.records import CitationRecord
from wikikg.ingest.stats import ParseStats

csv.field_size_limit(min(sys.maxsize, 2**31 - 1))


@dataclass
class CitationColumns:
    """Binds dataset columns (by header name) to :class:`CitationRecord` fields.

    ``identifiers`` maps a column to the identifier scheme it holds.
    ``id_list`` names a column in the ``{DOI=..., ISBN=...}`` notation used by
    the published Wikipedia citations dataset; both may be used together.
    """

    page_title: str = "page_title"
    page_id: Optional[str] = None
    urls: list = field(default_factory=lambda: ["URL"])
    identifiers: dict = field(default_factory=dict)
    id_list: Optional[str] = "ID_list"
    resource_type: Optional[str] = "type_of_citation"
    format: str = "tsv"  # tsv | csv | parquet


_ID_ITEM = re.compile(r"([A-Za-z][A-Za-z0-9_]*)\s*=\s*(.*?)\s*(?=,\s*[A-Za-z][A-Za-z0-9_]*\s*=|$)", re.S)


def parse_id_list(text: str) -> list[tuple[str, str]]:
    """``"{DOI=10.1/x, ISBN=123}"`` -> ``[("doi", "10.1/x"), ("isbn", "123")]``."""
    text = text.strip()
    if not text or text.lower() in ("none", "null", "nan", "{}"):
        return []
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    else:
        raise ValueError(f"id list not braced: {text[:40]!r}")
    return [(k.lower(), v) for k, v in _ID_ITEM.findall(text) if v]


def _rows_from_delimited(stream: BinaryIO, delimiter: str, quoting) -> Iterator[dict]:
    text = io.TextIOWrapper(stream, encoding="utf-8", errors="replace", newline="")
    reader = csv.reader(text, delimiter=delimiter, quoting=quoting)
    header = next(reader, None)
    if header is None:
        return
    width = len(header)
    for row in reader:
        if len(row) != width:
            yield None  # malformed marker
        else:
            yield dict(zip(header, row))


def _rows_from_parquet(stream: BinaryIO) -> Iterator[dict]:
    import pyarrow.parquet as pq

    table = pq.ParquetFile(stream)
    for batch in table.iter_batches():
        for row in batch.to_pylist():
            yield {k: "" if v is None else str(v) for k, v in row.items()}


def parse_citations(
    stream: BinaryIO,
    columns: CitationColumns,
    stats: Optional[ParseStats] = None,
) -> Iterator[CitationRecord]:
    """Yield one :class:`CitationRecord` per reference row.

    Rows carrying neither identifiers nor URLs are still yielded; deciding
    what to do with them is left to the caller.
    """
    if stats is None:
        stats = ParseStats("citations")
    if columns.format == "parquet":
        rows = _rows_from_parquet(stream)
    elif columns.format == "csv":
        rows = _rows_from_delimited(stream, ",", csv.QUOTE_MINIMAL)
    else:
        rows = _rows_from_delimited(stream, "\t", csv.QUOTE_NONE)

    bound = {columns.page_title, columns.page_id, columns.id_list, columns.resource_type}
    bound.update(columns.urls)
    bound.update(columns.identifiers)
    for line_no, row in enumerate(rows, 2):
        stats.lines += 1
        if row is None:
            stats.bad(line_no, "field count differs from header")
            continue
        try:
            title = row.get(columns.page_title, "").strip().replace(" ", "_")
            page_id = 0
            if columns.page_id:
                pid = row.get(columns.page_id, "").strip()
                page_id = int(pid) if pid else 0
            if not title and not page_id:
                raise ValueError("no source page")
            ids = []
            if columns.id_list and row.get(columns.id_list):
                ids.extend(parse_id_list(row[columns.id_list]))
            for col, scheme in columns.identifiers.items():
                value = (row.get(col) or "").strip()
                if value:
                    ids.append((scheme.lower(), value))
        except ValueError as exc:
            stats.bad(line_no, str(exc))
            continue
        urls = [row[c].strip() for c in columns.urls if (row.get(c) or "").strip()]
        rtype = row.get(columns.resource_type, "") if columns.resource_type else ""
        extra = {k: v for k, v in row.items() if k not in bound and v not in ("", None)}
        stats.emitted += 1
        yield CitationRecord(page_id, title, ids, urls, rtype, extra)
    stats.check()
