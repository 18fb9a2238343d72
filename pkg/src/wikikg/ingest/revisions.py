"""Revision-history XML (stub-meta-history) reader and per-page aggregation."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime
from typing import BinaryIO, Iterable, Iterator

from wikikg.errors import XmlStructure
from wikikg.ingest.records import (
    DELETED_CONTRIBUTOR,
    ContributorIdentity,
    ContributorKind,
    RevisionAggregate,
    RevisionEvent,
    parse_mw_timestamp,
)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _contributor(elem) -> ContributorIdentity:
    if elem is None or elem.get("deleted") is not None:
        return DELETED_CONTRIBUTOR
    user_id = username = ip = None
    for child in elem:
        name = _local(child.tag)
        text = (child.text or "").strip()
        if name == "id":
            user_id = text
        elif name == "username":
            username = text
        elif name == "ip":
            ip = text
    if user_id and user_id != "0":
        return ContributorIdentity(ContributorKind.REGISTERED, user_id)
    if username:
        # imported edits sometimes carry a name but no id
        return ContributorIdentity(ContributorKind.REGISTERED, "name:" + username)
    if ip:
        return ContributorIdentity(ContributorKind.ANONYMOUS, ip)
    return DELETED_CONTRIBUTOR


def _strip_prefix(title: str, namespace: int) -> str:
    title = title.replace(" ", "_")
    if namespace != 0 and ":" in title:
        return title.split(":", 1)[1]
    return title


def parse_revision_history(stream: BinaryIO) -> Iterator[RevisionEvent]:
    """Yield one event per ``<revision>`` in document order.

    Elements are discarded as soon as they are consumed, so memory does not
    grow with the file. Titles are returned in underscore form without the
    namespace prefix.
    """
    root = None
    page_no = 0
    rev_no = 0
    page_id = namespace = title = None
    in_revision = False
    depth_path: list[str] = []
    for event, elem in ET.iterparse(stream, events=("start", "end")):
        name = _local(elem.tag)
        if event == "start":
            depth_path.append(name)
            if root is None:
                root = elem
            elif name == "page":
                page_no += 1
                rev_no = 0
                page_id = namespace = title = None
            elif name == "revision":
                rev_no += 1
                in_revision = True
            continue

        depth_path.pop()
        if name == "page":
            page_id = None
            root.clear()
        elif name == "revision":
            in_revision = False
            where = f"/mediawiki/page[{page_no}]/revision[{rev_no}]"
            if page_id is None:
                raise XmlStructure("revision without page id", where)
            ts = None
            contributor_elem = None
            for child in elem:
                cname = _local(child.tag)
                if cname == "timestamp":
                    ts = child.text
                elif cname == "contributor":
                    contributor_elem = child
            if not ts or not ts.strip():
                raise XmlStructure("revision without timestamp", where)
            try:
                timestamp = parse_mw_timestamp(ts)
            except ValueError:
                raise XmlStructure(f"bad timestamp {ts!r}", where) from None
            yield RevisionEvent(
                page_id=page_id,
                namespace=namespace if namespace is not None else 0,
                title=_strip_prefix(title or "", namespace or 0),
                timestamp=timestamp,
                contributor=_contributor(contributor_elem),
            )
            elem.clear()
        elif not in_revision and len(depth_path) == 2 and depth_path[-1] == "page":
            text = (elem.text or "").strip()
            if name == "id":
                try:
                    page_id = int(text)
                except ValueError:
                    raise XmlStructure(f"bad page id {text!r}", f"/mediawiki/page[{page_no}]/id") from None
            elif name == "ns":
                namespace = int(text)
            elif name == "title":
                title = elem.text or ""


@dataclass
class _PageState:
    edits: int = 0
    editors: set = field(default_factory=set)
    created: datetime | None = None


class RevisionAccumulator:
    """Mergeable per-page counter behind :func:`aggregate_revisions`.

    Editor identities are kept as sets until :meth:`finish`, so two partial
    accumulators can be merged without double counting.
    """

    def __init__(self):
        self.pages: dict[int, _PageState] = {}

    def add(self, event: RevisionEvent) -> None:
        state = self.pages.get(event.page_id)
        if state is None:
            state = self.pages[event.page_id] = _PageState()
        state.edits += 1
        state.editors.add(event.contributor)
        if state.created is None or event.timestamp < state.created:
            state.created = event.timestamp

    def update(self, events: Iterable[RevisionEvent]) -> "RevisionAccumulator":
        for ev in events:
            self.add(ev)
        return self

    def merge(self, other: "RevisionAccumulator") -> "RevisionAccumulator":
        for page_id, theirs in other.pages.items():
            mine = self.pages.get(page_id)
            if mine is None:
                self.pages[page_id] = _PageState(theirs.edits, set(theirs.editors), theirs.created)
                continue
            mine.edits += theirs.edits
            mine.editors |= theirs.editors
            if theirs.created < mine.created:
                mine.created = theirs.created
        return self

    def finish(self) -> dict[int, RevisionAggregate]:
        return {
            pid: RevisionAggregate(pid, s.edits, len(s.editors), s.created)
            for pid, s in self.pages.items()
        }


def aggregate_revisions(events: Iterable[RevisionEvent]) -> dict[int, RevisionAggregate]:
    """Edits, distinct editors and creation time per page; any input order."""
    return RevisionAccumulator().update(events).finish()


def merge_aggregates(*parts: RevisionAccumulator) -> dict[int, RevisionAggregate]:
    acc = RevisionAccumulator()
    for part in parts:
        acc.merge(part)
    return acc.finish()


def iter_page_aggregates(events: Iterable[RevisionEvent]) -> Iterator[RevisionAggregate]:
    """Streaming variant for dump order, where a page's revisions are contiguous.

    Holds one page's editor set at a time. If a page id reappears after
    another page, the two runs are emitted separately; callers that cannot
    rule that out should use :func:`aggregate_revisions`.
    """
    current = None
    edits = 0
    editors: set = set()
    created = None
    for ev in events:
        if ev.page_id != current:
            if current is not None:
                yield RevisionAggregate(current, edits, len(editors), created)
            current = ev.page_id
            edits = 0
            editors = set()
            created = ev.timestamp
        edits += 1
        editors.add(ev.contributor)
        if ev.timestamp < created:
            created = ev.timestamp
    if current is not None:
        yield RevisionAggregate(current, edits, len(editors), created)
