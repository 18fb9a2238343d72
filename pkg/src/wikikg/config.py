"""Pipeline configuration: a sectioned key-value file plus command-line overrides.

Every key has a unique name across sections, and ``--key-name`` on the
command line overrides it. Relative paths resolve against the config file's
directory (or the working directory for command-line values).
"""

from __future__ import annotations

import configparser
import glob
import os
from dataclasses import dataclass
from datetime import date
from typing import Any, Callable, Optional

from wikikg.errors import ConfigError
from wikikg.ingest.citations import CitationColumns
from wikikg.ingest.pageviews import PageviewColumns
from wikikg.metrics import METRIC_NAMES, MetricWindow
from wikikg.normalize.identifiers import DEFAULT_SCHEMES


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _words(text: str) -> list[str]:
    return str(text).replace(",", " ").split()


def _ints(text: str) -> list[int]:
    return [int(w) for w in _words(text)]


def _opt_int(text: str) -> Optional[int]:
    return int(text) if str(text).strip() else None


def _size(text: str) -> int:
    t = str(text).strip().upper().removesuffix("B").removesuffix("I")
    mult = {"K": 1024, "M": 1024**2, "G": 1024**3, "T": 1024**4}
    if t and t[-1] in mult:
        return int(float(t[:-1]) * mult[t[-1]])
    return int(t)


def _delimiter(text: str) -> str:
    return {"tab": "\t", "\\t": "\t", "space": " ", "comma": ","}.get(str(text).strip().lower(), text)


@dataclass(frozen=True)
class Key:
    section: str
    name: str
    default: str
    parse: Callable[[str], Any] = str
    kind: str = "value"  # value | path | paths | flag
    help: str = ""


KEYS = [
    # inputs
    Key("inputs", "page", "", kind="path", help="page table SQL dump"),
    Key("inputs", "category", "", kind="path", help="category table SQL dump"),
    Key("inputs", "categorylinks", "", kind="path", help="categorylinks table SQL dump"),
    Key("inputs", "page_props", "", kind="path", help="page_props table SQL dump"),
    Key("inputs", "pagelinks", "", kind="path", help="pagelinks table SQL dump"),
    Key("inputs", "externallinks", "", kind="path", help="externallinks table SQL dump"),
    Key("inputs", "redirect", "", kind="path", help="redirect table SQL dump (for --resolve-redirects)"),
    Key("inputs", "revisions", "", kind="paths", help="stub-meta-history shards (globs allowed)"),
    Key("inputs", "pageviews", "", kind="paths", help="pageview files (globs allowed)"),
    Key("inputs", "citations", "", kind="paths", help="citations dataset files"),
    Key("inputs", "assessments", "", kind="path", help="quality assessments TSV"),
    Key("inputs", "exclusions", "", kind="path", help="titles left out of rankings"),
    Key("inputs", "domain_rules", "", kind="path", help="domain rule file (default: bundled)"),
    # run
    Key("run", "out", "out", kind="path", help="output directory"),
    Key("run", "wiki", "en.wikipedia", help="wiki code in pageview files"),
    Key("run", "as_of", "2021-07-01", date.fromisoformat, help="dump date for ages"),
    Key("run", "views_start", "2021-04-01", date.fromisoformat, help="first day of the views window"),
    Key("run", "views_end", "2021-06-30", date.fromisoformat, help="last day of the views window"),
    Key("run", "scope_namespaces", "0", _ints, help="namespaces kept as link targets"),
    Key("run", "schemes", " ".join(DEFAULT_SCHEMES), _words, help="identifier vocabulary"),
    Key("run", "memory_ceiling", "2G", _size, help="memory budget for sorts, bytes (K/M/G suffixes)"),
    Key("run", "threads", "1", int, help="cap on worker processes"),
    Key("run", "malformed_tolerance", "0.01", float, help="share of malformed lines tolerated"),
    Key("run", "resolve_redirects", "false", _bool, kind="flag", help="follow one redirect hop for link targets"),
    Key("run", "include_talk_archives", "false", _bool, kind="flag", help="fold Talk:X/Archive_N into X's talk metrics"),
    Key("run", "agents", "", _words, help="pageview agent types kept (empty: all)"),
    # pageview file layout
    Key("pageviews", "pv_wiki_column", "0", int),
    Key("pageviews", "pv_title_column", "1", int),
    Key("pageviews", "pv_page_id_column", "2", _opt_int),
    Key("pageviews", "pv_agent_column", "3", _opt_int),
    Key("pageviews", "pv_total_column", "4", int),
    Key("pageviews", "pv_date_column", "", _opt_int),
    Key("pageviews", "pv_namespace_column", "", _opt_int),
    Key("pageviews", "pv_delimiter", "tab", _delimiter),
    # citations dataset layout
    Key("citations", "cit_format", "tsv"),
    Key("citations", "cit_page_title", "page_title"),
    Key("citations", "cit_page_id", ""),
    Key("citations", "cit_urls", "URL", _words),
    Key("citations", "cit_id_list", "ID_list"),
    Key("citations", "cit_resource_type", "type_of_citation"),
    Key("citations", "cit_identifiers", "", _words, help="COLUMN=scheme pairs"),
    # analysis
    Key("analysis", "top_n", "20", int),
    Key("analysis", "top_metrics", "views talks pub_referenced", _words),
    Key("analysis", "correlation_metrics", " ".join(METRIC_NAMES), _words),
]
KEYS_BY_NAME = {k.name: k for k in KEYS}
INPUT_PATH_KEYS = [k.name for k in KEYS if k.section == "inputs"]


class PipelineConfig:
    """Resolved configuration values, accessible as attributes."""

    def __init__(self, values: dict, source: Optional[str] = None):
        self._values = values
        self.source = source

    def __getattr__(self, name):
        try:
            return self._values[name]
        except KeyError:
            raise AttributeError(name) from None

    def as_dict(self) -> dict:
        return dict(self._values)

    @property
    def window(self) -> MetricWindow:
        return MetricWindow(self.views_start, self.views_end, self.as_of)

    @property
    def pageview_columns(self) -> PageviewColumns:
        return PageviewColumns(
            wiki=self.pv_wiki_column, title=self.pv_title_column, page_id=self.pv_page_id_column,
            agent=self.pv_agent_column, total=self.pv_total_column, date=self.pv_date_column,
            namespace=self.pv_namespace_column, delimiter=self.pv_delimiter,
        )

    @property
    def citation_columns(self) -> CitationColumns:
        idents = {}
        for pair in self.cit_identifiers:
            col, _, scheme = pair.partition("=")
            if not scheme:
                raise ConfigError(f"cit_identifiers entry {pair!r} is not COLUMN=scheme")
            idents[col] = scheme
        return CitationColumns(
            page_title=self.cit_page_title, page_id=self.cit_page_id or None,
            urls=list(self.cit_urls), identifiers=idents, id_list=self.cit_id_list or None,
            resource_type=self.cit_resource_type or None, format=self.cit_format,
        )

    def input_paths(self) -> dict[str, list[str]]:
        """Every configured input file, by key."""
        out = {}
        for name in INPUT_PATH_KEYS:
            v = self._values[name]
            if not v:
                continue
            out[name] = list(v) if isinstance(v, list) else [v]
        return out

    def validate(self, required=()) -> None:
        problems = []
        for name in required:
            if not self._values.get(name):
                problems.append(f"missing required input '{name}'")
        for name, paths in self.input_paths().items():
            for p in paths:
                if not os.path.exists(p):
                    problems.append(f"{name}: no such file {p}")
        if not self.views_start <= self.views_end <= self.as_of:
            problems.append("expected views_start <= views_end <= as_of")
        if self.cit_format not in ("tsv", "csv", "parquet"):
            problems.append(f"cit_format must be tsv, csv or parquet, not {self.cit_format!r}")
        unknown = set(self.top_metrics + self.correlation_metrics) - set(METRIC_NAMES)
        if unknown:
            problems.append(f"unknown metrics: {', '.join(sorted(unknown))}")
        if self.threads < 1:
            problems.append("threads must be at least 1")
        if problems:
            raise ConfigError("; ".join(problems))


def _resolve_path(value: str, base: str) -> str:
    return value if os.path.isabs(value) else os.path.normpath(os.path.join(base, value))


def _expand(value: str, base: str) -> list[str]:
    out = []
    for word in str(value).split():
        path = _resolve_path(word, base)
        matches = sorted(glob.glob(path)) if glob.has_magic(path) else [path]
        out.extend(matches or [path])
    return out


def _convert(key: Key, raw: str, base: str):
    if key.kind == "path":
        return _resolve_path(raw.strip(), base) if raw.strip() else ""
    if key.kind == "paths":
        return _expand(raw, base)
    try:
        return key.parse(raw)
    except ValueError as exc:
        raise ConfigError(f"{key.section}.{key.name}: {exc}") from None


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> PipelineConfig:
    """Read ``path`` (if given), apply ``overrides`` (name -> raw string), resolve values."""
    raw = {k.name: (k.default, os.getcwd()) for k in KEYS}
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        parser.read(path, encoding="utf-8")
        base = os.path.dirname(os.path.abspath(path))
        for section in parser.sections():
            for name, value in parser.items(section):
                key = KEYS_BY_NAME.get(name)
                if key is None or key.section != section:
                    raise ConfigError(f"unknown key [{section}] {name}")
                raw[name] = (value, base)
    for name, value in (overrides or {}).items():
        if value is None:
            continue
        if name not in KEYS_BY_NAME:
            raise ConfigError(f"unknown key {name}")
        raw[name] = (str(value), os.getcwd())
    values = {name: _convert(KEYS_BY_NAME[name], v, base) for name, (v, base) in raw.items()}
    return PipelineConfig(values, path)
