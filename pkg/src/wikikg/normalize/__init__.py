"""Deterministic canonicalisation of external URLs and publication identifiers."""

from wikikg.normalize.identifiers import (
    DEFAULT_SCHEMES,
    IdentifierPair,
    normalize_doi,
    normalize_identifier,
    normalize_isbn,
    pub_identity_key,
)
from wikikg.normalize.rules import DomainRule, RuleSet
from wikikg.normalize.urls import CanonicalUrl, apply_domain_rules, normalize_url, unarchive_url

__all__ = [
    "DEFAULT_SCHEMES",
    "CanonicalUrl",
    "DomainRule",
    "IdentifierPair",
    "RuleSet",
    "apply_domain_rules",
    "normalize_doi",
    "normalize_identifier",
    "normalize_isbn",
    "normalize_url",
    "pub_identity_key",
    "unarchive_url",
]
