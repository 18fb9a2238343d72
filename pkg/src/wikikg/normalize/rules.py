"""Per-domain URL corrections loaded from a plain-text rule file.

One rule per line: ``<domain> <kind> [args]``. Blank lines and ``#`` comments
are ignored. Kinds:

``keep-params a,b``
    keep only the listed query parameters (in their original order) and drop
    the fragment;
``strip-fragment``
    drop everything from ``#``;
``path-template REGEX REPLACEMENT``
    if REGEX fully matches the part after the host, rewrite it with
    REPLACEMENT (``re.sub`` syntax);
``identity``
    placeholder, leaves the URL unchanged.

A rule for ``example.org`` also covers ``www.example.org`` and any other
subdomain; when several rules match, the longest domain wins.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Optional

from wikikg.errors import RuleFileError

KINDS = ("keep-params", "strip-fragment", "path-template", "identity")


def split_host(url: str) -> tuple[str, str]:
    """Split a scheme-less URL into ``(authority, remainder)``."""
    for i, c in enumerate(url):
        if c in "/?#":
            return url[:i], url[i:]
    return url, ""


@dataclass(frozen=True)
class DomainRule:
    domain: str
    kind: str
    args: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RuleFileError(f"unknown rule kind {self.kind!r} for {self.domain}")
        if self.kind == "keep-params" and len(self.args) != 1:
            raise RuleFileError(f"{self.domain}: keep-params takes one comma-separated list")
        if self.kind == "path-template":
            if len(self.args) != 2:
                raise RuleFileError(f"{self.domain}: path-template takes REGEX REPLACEMENT")
            try:
                re.compile(self.args[0])
            except re.error as exc:
                raise RuleFileError(f"{self.domain}: bad regex: {exc}") from None

    @property
    def keep(self) -> frozenset:
        return frozenset(p for p in self.args[0].split(",") if p)

    def _rewrite(self, url: str) -> str:
        if self.kind == "identity":
            return url
        if self.kind == "strip-fragment":
            return url.split("#", 1)[0]
        authority, rest = split_host(url)
        if self.kind == "keep-params":
            rest = rest.split("#", 1)[0]
            path, _, query = rest.partition("?")
            keep = self.keep
            params = [p for p in query.split("&") if p and p.split("=", 1)[0] in keep]
            return authority + path + ("?" + "&".join(params) if params else "")
        pattern, replacement = self.args
        if re.fullmatch(pattern, rest):
            return authority + re.sub(pattern, replacement, rest, count=1)
        return url

    def apply(self, url: str) -> str:
        out = self._rewrite(url)
        if self.kind == "path-template" and out != url and self._rewrite(out) != out:
            raise RuleFileError(f"{self.domain}: path-template is not idempotent on {url!r}")
        return out


class RuleSet:
    """Read-only domain -> rule table with longest-suffix lookup."""

    def __init__(self, rules: Iterable[DomainRule] = (), version: str = ""):
        self.rules: dict[str, DomainRule] = {}
        self.version = version
        for rule in rules:
            if rule.domain in self.rules:
                raise RuleFileError(f"duplicate rule for {rule.domain}")
            self.rules[rule.domain] = rule

    def __len__(self):
        return len(self.rules)

    def match(self, host: str) -> Optional[DomainRule]:
        host = host.lower()
        labels = host.split(".")
        for i in range(len(labels)):
            rule = self.rules.get(".".join(labels[i:]))
            if rule is not None:
                return rule
        return None

    @classmethod
    def parse(cls, text: str) -> "RuleSet":
        rules = []
        version = ""
        for line_no, line in enumerate(text.splitlines(), 1):
            stripped = line.strip()
            if stripped.startswith("# version:"):
                version = stripped.split(":", 1)[1].strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) < 2:
                raise RuleFileError(f"line {line_no}: expected '<domain> <kind> [args]'")
            try:
                rules.append(DomainRule(parts[0].lower(), parts[1], tuple(parts[2:])))
            except RuleFileError as exc:
                raise RuleFileError(f"line {line_no}: {exc}") from None
        return cls(rules, version)

    @classmethod
    def load(cls, path) -> "RuleSet":
        with open(os.fspath(path), encoding="utf-8") as fh:
            return cls.parse(fh.read())

    @classmethod
    def default(cls) -> "RuleSet":
        text = resources.files("wikikg.normalize").joinpath("data/domain_rules.txt").read_text("utf-8")
        return cls.parse(text)


EMPTY_RULES = RuleSet()
