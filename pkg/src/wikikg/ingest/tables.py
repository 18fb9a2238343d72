"""Column layouts of the MediaWiki tables we read, and typed row adapters.

The default layouts are those of the 2021 English Wikipedia dumps. Adapters
pick columns by name, so a dump with reordered or extra columns only needs a
different schema, not different code.
"""

from __future__ import annotations

from typing import BinaryIO, Iterator, Sequence

from wikikg.ingest.records import (
    CategoryLinkRow,
    ExternalLinkRow,
    PageLinkRow,
    PagePropRow,
    RawCategoryRow,
    RawPageRow,
    RedirectRow,
    parse_mw_timestamp,
)
from wikikg.ingest.sqldump import ANY, INT, STR, parse_sql_dump

Schema = Sequence[tuple[str, str]]

PAGE_SCHEMA: Schema = (
    ("page_id", INT),
    ("page_namespace", INT),
    ("page_title", STR),
    ("page_restrictions", STR),
    ("page_is_redirect", INT),
    ("page_is_new", INT),
    ("page_random", ANY),
    ("page_touched", STR),
    ("page_links_updated", STR),
    ("page_latest", INT),
    ("page_len", INT),
    ("page_content_model", STR),
    ("page_lang", STR),
)

CATEGORY_SCHEMA: Schema = (
    ("cat_id", INT),
    ("cat_title", STR),
    ("cat_pages", INT),
    ("cat_subcats", INT),
    ("cat_files", INT),
)

CATEGORYLINKS_SCHEMA: Schema = (
    ("cl_from", INT),
    ("cl_to", STR),
    ("cl_sortkey", ANY),
    ("cl_timestamp", ANY),
    ("cl_sortkey_prefix", ANY),
    ("cl_collation", ANY),
    ("cl_type", STR),
)

PAGE_PROPS_SCHEMA: Schema = (
    ("pp_page", INT),
    ("pp_propname", STR),
    ("pp_value", STR),
    ("pp_sortkey", ANY),
)

PAGELINKS_SCHEMA: Schema = (
    ("pl_from", INT),
    ("pl_namespace", INT),
    ("pl_title", STR),
    ("pl_from_namespace", INT),
)

EXTERNALLINKS_SCHEMA: Schema = (
    ("el_id", INT),
    ("el_from", INT),
    ("el_to", STR),
    ("el_index", ANY),
    ("el_index_60", ANY),
)

REDIRECT_SCHEMA: Schema = (
    ("rd_from", INT),
    ("rd_namespace", INT),
    ("rd_title", STR),
    ("rd_interwiki", ANY),
    ("rd_fragment", ANY),
)

DEFAULT_SCHEMAS = {
    "page": PAGE_SCHEMA,
    "category": CATEGORY_SCHEMA,
    "categorylinks": CATEGORYLINKS_SCHEMA,
    "page_props": PAGE_PROPS_SCHEMA,
    "pagelinks": PAGELINKS_SCHEMA,
    "externallinks": EXTERNALLINKS_SCHEMA,
    "redirect": REDIRECT_SCHEMA,
}


def _picker(schema: Schema, *names: str):
    index = {name: i for i, (name, _) in enumerate(schema)}
    missing = [n for n in names if n not in index]
    if missing:
        raise ValueError(f"schema lacks columns {missing}")
    return [index[n] for n in names]


def read_pages(stream: BinaryIO, schema: Schema = PAGE_SCHEMA) -> Iterator[RawPageRow]:
    ix = _picker(
        schema,
        "page_id", "page_namespace", "page_title", "page_restrictions",
        "page_is_redirect", "page_is_new", "page_touched", "page_len",
    )
    for row in parse_sql_dump(stream, schema, table="page"):
        pid, ns, title, restr, redirect, new, touched, length = (row[i] for i in ix)
        yield RawPageRow(
            page_id=pid,
            namespace=ns,
            title=title,
            is_redirect=bool(redirect),
            is_new=bool(new),
            restrictions=restr or "",
            touched=parse_mw_timestamp(touched),
            length_bytes=length or 0,
        )


def read_categories(stream: BinaryIO, schema: Schema = CATEGORY_SCHEMA) -> Iterator[RawCategoryRow]:
    ix = _picker(schema, "cat_id", "cat_title", "cat_pages", "cat_subcats", "cat_files")
    for row in parse_sql_dump(stream, schema, table="category"):
        cid, title, pages, subcats, files = (row[i] for i in ix)
        yield RawCategoryRow(cid, title, max(pages or 0, 0), max(subcats or 0, 0), max(files or 0, 0))


def read_categorylinks(
    stream: BinaryIO, schema: Schema = CATEGORYLINKS_SCHEMA
) -> Iterator[CategoryLinkRow]:
    ix = _picker(schema, "cl_from", "cl_to", "cl_type")
    for row in parse_sql_dump(stream, schema, table="categorylinks"):
        yield CategoryLinkRow(*(row[i] for i in ix))


def read_page_props(stream: BinaryIO, schema: Schema = PAGE_PROPS_SCHEMA) -> Iterator[PagePropRow]:
    ix = _picker(schema, "pp_page", "pp_propname", "pp_value")
    for row in parse_sql_dump(stream, schema, table="page_props"):
        pid, name, value = (row[i] for i in ix)
        yield PagePropRow(pid, name, value or "")


def read_pagelinks(stream: BinaryIO, schema: Schema = PAGELINKS_SCHEMA) -> Iterator[PageLinkRow]:
    ix = _picker(schema, "pl_from", "pl_namespace", "pl_title")
    for row in parse_sql_dump(stream, schema, table="pagelinks"):
        yield PageLinkRow(*(row[i] for i in ix))


def read_externallinks(
    stream: BinaryIO, schema: Schema = EXTERNALLINKS_SCHEMA
) -> Iterator[ExternalLinkRow]:
    ix = _picker(schema, "el_from", "el_to")
    for row in parse_sql_dump(stream, schema, table="externallinks"):
        yield ExternalLinkRow(*(row[i] for i in ix))


def read_redirects(stream: BinaryIO, schema: Schema = REDIRECT_SCHEMA) -> Iterator[RedirectRow]:
    ix = _picker(schema, "rd_from", "rd_namespace", "rd_title", "rd_interwiki")
    for row in parse_sql_dump(stream, schema, table="redirect"):
        pid, ns, title, interwiki = (row[i] for i in ix)
        if interwiki:
            continue
        yield RedirectRow(pid, ns, title)
