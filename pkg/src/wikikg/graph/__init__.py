"""Knowledge-graph construction: joins, surrogate ids and integrity checks."""

from wikikg.graph.build import (
    BuildOptions,
    GraphInputs,
    PageCatalog,
    PageRecord,
    build_category_tables,
    build_graph,
    build_page_links,
    build_page_table,
    build_pub_tables,
    build_url_tables,
)
from wikikg.graph.integrity import IntegrityReport, verify_integrity
from wikikg.graph.titles import PageIndex, resolve_title, title_key

__all__ = [
    "BuildOptions", "GraphInputs", "PageCatalog", "PageRecord", "build_category_tables",
    "build_graph", "build_page_links", "build_page_table", "build_pub_tables",
    "build_url_tables", "IntegrityReport", "verify_integrity", "PageIndex",
    "resolve_title", "title_key",
]
