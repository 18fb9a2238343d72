"""Title matching with MediaWiki semantics.

Spaces and underscores are the same character and the first character is
case-insensitive (stored upper-cased); the rest of the title is
case-sensitive.
"""

from __future__ import annotations

from typing import Iterable, Optional


def title_key(title: str) -> str:
    t = title.replace(" ", "_").strip("_")
    if not t:
        return t
    first = t[0].upper()
    if len(first) != 1:  # e.g. "ß".upper() == "SS"; MediaWiki keeps such letters
        first = t[0]
    return first + t[1:]


class PageIndex:
    """In-memory ``(namespace, title)`` -> page_id lookup for small tables and tests.

    Bulk resolution in the graph build uses a sort-merge join instead.
    """

    def __init__(self, pages: Iterable = ()):
        self._ids: dict[tuple[int, str], int] = {}
        self.redirects: set[int] = set()
        for p in pages:
            self.add(p.page_id, p.namespace, p.title, getattr(p, "is_redirect", False))

    def add(self, page_id: int, namespace: int, title: str, is_redirect: bool = False) -> None:
        self._ids[(namespace, title_key(title))] = page_id
        if is_redirect:
            self.redirects.add(page_id)

    def __len__(self):
        return len(self._ids)

    def get(self, namespace: int, title: str) -> Optional[int]:
        return self._ids.get((namespace, title_key(title)))


def resolve_title(namespace: int, title: str, page_index: PageIndex) -> Optional[int]:
    """Exact lookup; ``None`` for red links and vanished pages. Redirects are not followed."""
    return page_index.get(namespace, title)
