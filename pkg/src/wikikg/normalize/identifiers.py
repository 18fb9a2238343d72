"""Publication identifier normalisation and identifier-set identity keys."""

from __future__ import annotations

import logging
import re
from typing import Iterable, NamedTuple

from wikikg.errors import (
    EmptyIdentifierSet,
    InvalidDoi,
    InvalidIdentifier,
    InvalidIsbn,
    UnknownScheme,
)

log = logging.getLogger(__name__)

# Twenty common citation-template identifier schemes.
DEFAULT_SCHEMES = (
    "doi", "isbn", "pmid", "pmc", "arxiv", "bibcode", "issn", "oclc", "jstor", "mr",
    "zbl", "ssrn", "hdl", "lccn", "olid", "osti", "rfc", "s2cid", "citeseerx", "asin",
)

# How each non-doi/isbn scheme folds case. Absent = case-sensitive.
def _pmc(text: str) -> str:
    """``123``, ``pmc123`` and ``PMC123`` are one id, written ``PMC123``."""
    digits = text[3:] if text[:3].lower() == "pmc" else text
    return "PMC" + digits.strip() if digits.strip() else ""


_FOLD = {
    "pmid": str.lower,
    "pmc": _pmc,
    "arxiv": str.lower,
    "issn": str.upper,
    "oclc": str.lower,
    "jstor": str.lower,
    "mr": str.lower,
    "zbl": str.lower,
    "ssrn": str.lower,
    "lccn": str.lower,
    "olid": str.upper,
    "osti": str.lower,
    "rfc": str.lower,
    "s2cid": str.lower,
    "citeseerx": str.lower,
    "asin": str.upper,
}

KEY_SEPARATOR = "\x1f"  # ASCII unit separator


class IdentifierPair(NamedTuple):
    scheme: str
    value: str

    def __str__(self):
        return f"{self.scheme}:{self.value}"


_DOI_PREFIX = re.compile(
    r"^(?:(?:https?://)?(?:(?:dx|www)\.)?doi\.org/|doi\s*:\s*|doi\s+)", re.I
)
_DOI = re.compile(r"^10\.[0-9]+(?:\.[0-9]+)*/\S+$")
_DOI_TRAILING = ".,;)"


def _strip_trailing(doi: str) -> str:
    while doi and doi[-1] in _DOI_TRAILING:
        # a closing parenthesis that balances an opening one is part of the DOI
        if doi[-1] == ")" and doi.count("(") >= doi.count(")"):
            break
        doi = doi[:-1].rstrip()
    return doi


def normalize_doi(raw: str) -> IdentifierPair:
    text = raw.strip() if isinstance(raw, str) else ""
    prev = None
    while text != prev:  # prefixes can be stacked, e.g. "doi: https://doi.org/..."
        prev = text
        text = _DOI_PREFIX.sub("", text, count=1).strip()
    text = _strip_trailing(text).lower()
    if not _DOI.match(text):
        raise InvalidDoi(f"not a DOI: {raw!r}")
    return IdentifierPair("doi", text)


def isbn13_check_digit(first12: str) -> int:
    total = sum(int(d) * (3 if i % 2 else 1) for i, d in enumerate(first12))
    return (10 - total % 10) % 10


def isbn10_is_valid(isbn: str) -> bool:
    if len(isbn) != 10 or not isbn.isascii() or not isbn[:9].isdigit() or not (isbn[9].isdigit() or isbn[9] == "X"):
        return False
    total = sum((10 - i) * int(d) for i, d in enumerate(isbn[:9]))
    total += 10 if isbn[9] == "X" else int(isbn[9])
    return total % 11 == 0


def isbn10_to_13(isbn10: str) -> str:
    first12 = "978" + isbn10[:9]
    return first12 + str(isbn13_check_digit(first12))


_ISBN_PREFIX = re.compile(r"^\s*ISBN(?:-?1[03])?\s*:?\s*", re.I)
_ISBN_NOISE = re.compile(r"[\s\-‐‑‒–—.]")


def normalize_isbn(raw: str) -> IdentifierPair:
    if not isinstance(raw, str):
        raise InvalidIsbn(f"not text: {raw!r}")
    text = _ISBN_NOISE.sub("", _ISBN_PREFIX.sub("", raw)).upper()
    if len(text) == 10:
        if not isbn10_is_valid(text):
            raise InvalidIsbn(f"bad ISBN-10: {raw!r}")
        return IdentifierPair("isbn", isbn10_to_13(text))
    if len(text) == 13 and text.isdigit() and text.isascii():
        if isbn13_check_digit(text[:12]) != int(text[12]):
            raise InvalidIsbn(f"bad ISBN-13 check digit: {raw!r}")
        return IdentifierPair("isbn", text)
    raise InvalidIsbn(f"bad ISBN length: {raw!r}")


def normalize_identifier(scheme: str, value: str, vocabulary: Iterable[str] = DEFAULT_SCHEMES) -> IdentifierPair:
    """Normalise one ``(scheme, value)`` pair.

    DOIs and ISBNs get full correction and validation; every other scheme is
    trimmed and case-folded where the scheme is case-insensitive.
    """
    if not isinstance(scheme, str) or not isinstance(value, str):
        raise InvalidIdentifier("scheme and value must be text")
    scheme = scheme.strip().lower()
    if scheme not in vocabulary:
        raise UnknownScheme(scheme)
    if scheme == "doi":
        return normalize_doi(value)
    if scheme == "isbn":
        return normalize_isbn(value)
    text = value.strip()
    fold = _FOLD.get(scheme)
    if fold is not None:
        text = fold(text)
    if not text:
        raise InvalidIdentifier(f"empty {scheme}")
    if KEY_SEPARATOR in text:
        raise InvalidIdentifier(f"{scheme} value contains the key separator")
    return IdentifierPair(scheme, text)


def normalize_identifiers(pairs, vocabulary=DEFAULT_SCHEMES, counters: dict | None = None) -> list[IdentifierPair]:
    """Normalise many pairs, dropping (and counting) those that fail."""
    out = []
    for scheme, value in pairs:
        try:
            out.append(normalize_identifier(scheme, value, vocabulary))
        except UnknownScheme:
            if counters is not None:
                counters["identifiers.unknown_scheme"] = counters.get("identifiers.unknown_scheme", 0) + 1
        except InvalidIdentifier as exc:
            log.debug("dropping identifier: %s", exc)
            if counters is not None:
                key = f"identifiers.invalid_{scheme.strip().lower() if isinstance(scheme, str) else '?'}"
                counters[key] = counters.get(key, 0) + 1
    return out


def pub_identity_key(ids: Iterable) -> str:
    """Identity of a publication: its exact set of normalised identifiers.

    Order and duplicates in ``ids`` do not matter. A book chapter citing both
    its own DOI and the book's ISBN is therefore distinct from the book.
    """
    parts = sorted({f"{scheme}:{value}" for scheme, value in ids})
    if not parts:
        raise EmptyIdentifierSet("reference has no valid identifiers")
    return KEY_SEPARATOR.join(parts)


def split_identity_key(key: str) -> list[IdentifierPair]:
    return [IdentifierPair(*part.split(":", 1)) for part in key.split(KEY_SEPARATOR)]
