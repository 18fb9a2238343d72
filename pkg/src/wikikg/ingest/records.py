"""Typed rows produced by the ingest parsers."""

from __future__ import annotations

from datetime import date, datetime, timezone
from enum import Enum
from typing import NamedTuple, Optional

MEDIAWIKI_EPOCH = datetime(2001, 1, 15, tzinfo=timezone.utc)


class RawPageRow(NamedTuple):
    page_id: int
    namespace: int
    title: str
    is_redirect: bool
    is_new: bool
    restrictions: str
    touched: Optional[datetime]
    length_bytes: int


class RawCategoryRow(NamedTuple):
    category_id: int
    title: str
    pages: int
    subcats: int
    files: int


class CategoryLinkRow(NamedTuple):
    from_page_id: int
    to_category_title: str
    link_type: str  # page | subcat | file


class PagePropRow(NamedTuple):
    page_id: int
    prop_name: str
    prop_value: str


class PageLinkRow(NamedTuple):
    from_page_id: int
    to_namespace: int
    to_title: str


class ExternalLinkRow(NamedTuple):
    from_page_id: int
    raw_url: str


class RedirectRow(NamedTuple):
    from_page_id: int
    to_namespace: int
    to_title: str


class ContributorKind(str, Enum):
    REGISTERED = "registered"
    ANONYMOUS = "anonymous"
    DELETED = "deleted"


class ContributorIdentity(NamedTuple):
    kind: ContributorKind
    key: str


DELETED_CONTRIBUTOR = ContributorIdentity(ContributorKind.DELETED, "<deleted>")


class RevisionEvent(NamedTuple):
    page_id: int
    namespace: int
    title: str
    timestamp: datetime
    contributor: ContributorIdentity


class RevisionAggregate(NamedTuple):
    page_id: int
    edits: int
    editors: int
    created: datetime


class PageViewRecord(NamedTuple):
    page_id: int  # 0 when the source has none
    title: str
    namespace: int
    date: date
    count: int


class CitationRecord(NamedTuple):
    source_page_id: int  # 0 when the source only carries a title
    source_page_title: str
    raw_identifiers: list  # of (scheme, value)
    raw_urls: list
    resource_type: str
    citation_fields: dict


def parse_mw_timestamp(value) -> Optional[datetime]:
    """Parse either the 14-digit SQL form or the ISO 8601 XML form."""
    if value is None:
        return None
    if isinstance(value, bytes):
        value = value.decode("ascii", "replace")
    value = value.strip()
    if not value:
        return None
    if len(value) == 14 and value.isdigit():
        return datetime.strptime(value, "%Y%m%d%H%M%S").replace(tzinfo=timezone.utc)
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(value: Optional[datetime]) -> str:
    if value is None:
        return ""
    return value.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
