"""Streaming parsers for the offline inputs: SQL dumps, revision history,
pageview files and the citations dataset."""

from wikikg.ingest.citations import CitationColumns, parse_citations
from wikikg.ingest.compression import open_input
from wikikg.ingest.pageviews import PageviewColumns, aggregate_views, parse_pageviews
from wikikg.ingest.revisions import (
    RevisionAccumulator,
    aggregate_revisions,
    iter_page_aggregates,
    parse_revision_history,
)
from wikikg.ingest.sqldump import format_insert, parse_sql_dump

__all__ = [
    "CitationColumns",
    "PageviewColumns",
    "RevisionAccumulator",
    "aggregate_revisions",
    "aggregate_views",
    "format_insert",
    "iter_page_aggregates",
    "open_input",
    "parse_citations",
    "parse_pageviews",
    "parse_revision_history",
    "parse_sql_dump",
]
