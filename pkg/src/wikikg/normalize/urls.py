"""Canonical form for external links.

The canonical URL has no scheme and no trailing slash, a lower-cased
authority, and path/query/fragment left as written. Web-archive captures are
replaced by the URL they captured, then the per-domain rule (if any) runs.
"""

from __future__ import annotations

import re
from typing import NamedTuple, Optional, Sequence
from urllib.parse import quote

from wikikg.errors import UnparseableUrl
from wikikg.normalize.rules import EMPTY_RULES, RuleSet, split_host

MAX_ARCHIVE_DEPTH = 3

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:/{1,3}")
_LINE_BREAKS = re.compile(r"[\r\n\u2028\u2029\x85]")
_WHITESPACE = re.compile(r"\s")

_TS = r"(?:\d{1,14}\*?|\*)[a-z_]*"
ARCHIVE_PATTERNS: Sequence["re.Pattern[str]"] = tuple(
    re.compile(p, re.I | re.S)
    for p in (
        rf"^(?:web\.|wayback\.|www\.)?archive\.org/web/{_TS}/(.+)$",
        r"^archive\.(?:today|is|ph|li|fo|md|vn)/(?:\d{4}[\d.\-]*|newest|oldest)/(.+)$",
        rf"^wayback\.archive-it\.org/(?:all|\d+)/{_TS}/(.+)$",
        rf"^webarchive\.loc\.gov/(?:all/)?{_TS}/(.+)$",
        rf"^webarchive\.nationalarchives\.gov\.uk/(?:ukgwa/)?{_TS}/(.+)$",
        rf"^(?:www\.)?webarchive\.org\.uk/wayback/archive/{_TS}/(.+)$",
        rf"^arquivo\.pt/wayback/{_TS}/(.+)$",
    )
)

_HOST = re.compile(r"^(\[[0-9A-Fa-f:.]+\]|[^\s/?#@:\[\]]+)(?::\d+)?$")


class CanonicalUrl(NamedTuple):
    url: str
    domain: str


def strip_scheme(url: str) -> str:
    url = _SCHEME.sub("", url, count=1)
    if url.startswith("//"):
        url = url[2:]
    return url


def _looks_like_url(text: str) -> bool:
    if _SCHEME.match(text) or text.startswith("//"):
        return True
    authority, _ = split_host(text)
    return "." in authority


def unarchive_url(url: str, patterns: Sequence = ARCHIVE_PATTERNS,
                  max_depth: int = MAX_ARCHIVE_DEPTH) -> str:
    """Return the original URL embedded in a web-archive capture URL.

    ``url`` must already be scheme-less. Nested captures are unwrapped up to
    ``max_depth`` levels; anything not recognised is returned unchanged.
    """
    current = url
    result = url
    for _ in range(max_depth):
        for pat in patterns:
            m = pat.match(current)
            if m and _looks_like_url(m.group(1)):
                result = m.group(1)
                current = strip_scheme(result)
                break
        else:
            break
    return result


def _clean(raw) -> str:
    if isinstance(raw, (bytes, bytearray)):
        raw = bytes(raw).decode("utf-8", "replace")
    elif not isinstance(raw, str):
        raise UnparseableUrl(f"not text: {type(raw).__name__}")
    text = _LINE_BREAKS.sub("", raw.strip())
    if _WHITESPACE.search(text):
        text = _WHITESPACE.sub(lambda m: quote(m.group(0), safe=""), text)
    return text


def _host_of(authority: str) -> str:
    host = authority.rsplit("@", 1)[-1]
    if host.startswith("["):
        return host.split("]", 1)[0] + "]"
    return host.split(":", 1)[0]


def _trim(url: str) -> str:
    """Drop trailing slashes and an empty query or fragment marker."""
    while True:
        out = url.rstrip("/")
        for mark in "#?":
            if out.endswith(mark) and out.count(mark) == 1:
                out = out[:-1]
        if out == url:
            return out
        url = out


def _canonical_form(text: str) -> tuple[str, str]:
    """Lower-case the authority, drop trailing slashes; returns (url, host)."""
    authority, rest = split_host(text)
    authority = authority.lower()
    if not _HOST.match(authority.rsplit("@", 1)[-1]):
        raise UnparseableUrl(f"no recognisable authority in {text[:80]!r}")
    host = _host_of(authority)
    if not (host.startswith("[") or "." in host.strip(".") or host == "localhost"):
        raise UnparseableUrl(f"no recognisable authority in {text[:80]!r}")
    return _trim(authority + rest), host


def normalize_url(raw, rules: Optional[RuleSet] = None) -> CanonicalUrl:
    """Canonicalise one external link.

    Raises :class:`~wikikg.errors.UnparseableUrl` when no host can be found;
    callers route such records to a reject file.
    """
    rules = EMPTY_RULES if rules is None else rules
    text = strip_scheme(_clean(raw))
    if not text:
        raise UnparseableUrl("empty URL")
    url, host = _canonical_form(text)
    # Unwrap until stable so that the result is a fixed point. Every unwrap
    # strictly shortens the string, so this terminates.
    while True:
        inner = unarchive_url(url)
        if inner == url:
            break
        try:
            inner_url, inner_host = _canonical_form(strip_scheme(_clean(inner)))
        except UnparseableUrl:
            break  # keep the capture URL rather than losing the link
        if inner_url == url:
            break
        url, host = inner_url, inner_host
    rule = rules.match(host)
    if rule is not None:
        url = _trim(rule.apply(url))
    return CanonicalUrl(url, host)


def apply_domain_rules(url: CanonicalUrl, rules: RuleSet) -> CanonicalUrl:
    """Apply the longest-suffix matching rule; unmatched URLs pass through."""
    rule = rules.match(url.domain)
    if rule is None:
        return url
    return CanonicalUrl(_trim(rule.apply(url.url)), url.domain)
