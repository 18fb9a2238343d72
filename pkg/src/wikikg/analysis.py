"""Case-study statistics over the article metrics.

Quality classes with multi-membership, per-class means, box-plot summaries,
Spearman correlations and top-N rankings. Statistics always use the full
data; outlier trimming is a plotting concern only.
"""

from __future__ import annotations

import math
from collections import Counter
from enum import Enum
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from wikikg.errors import DegenerateVector, UnknownClassLabel
from wikikg.graph.titles import title_key
from wikikg.metrics import METRIC_NAMES
from wikikg.tsv import TsvWriter, read_tsv

ALL_ARTICLES = "All articles"


class QualityClass(str, Enum):
    FeaturedArticle = "FA"
    FeaturedList = "FL"
    A = "A"
    GoodArticle = "GA"
    B = "B"
    C = "C"
    List = "List"
    Start = "Start"
    Stub = "Stub"


# column order of the per-class table, best to worst
CLASS_ORDER = tuple(QualityClass)


class Importance(str, Enum):
    Top = "Top"
    High = "High"
    Mid = "Mid"
    Low = "Low"
    Unknown = "Unknown"


def _squash(label: str) -> str:
    return "".join(ch for ch in label.lower() if ch.isalnum())


_CLASS_LABELS = {_squash(c.value): c for c in QualityClass}
_CLASS_LABELS.update({_squash(c.name): c for c in QualityClass})
_CLASS_LABELS.update({
    "featured": QualityClass.FeaturedArticle,
    "good": QualityClass.GoodArticle,
    "aclass": QualityClass.A,
    "bclass": QualityClass.B,
    "cclass": QualityClass.C,
    "startclass": QualityClass.Start,
    "stubclass": QualityClass.Stub,
    "listclass": QualityClass.List,
    "faclass": QualityClass.FeaturedArticle,
    "flclass": QualityClass.FeaturedList,
    "gaclass": QualityClass.GoodArticle,
})


def parse_quality_class(label) -> QualityClass:
    if isinstance(label, QualityClass):
        return label
    found = _CLASS_LABELS.get(_squash(str(label)))
    if found is None:
        raise UnknownClassLabel(f"unknown quality class {label!r}")
    return found


def parse_importance(label) -> Importance:
    key = _squash(str(label)).removesuffix("importance")
    for imp in Importance:
        if imp.value.lower() == key:
            return imp
    return Importance.Unknown


class QualityAssessment(NamedTuple):
    page_id: int
    wikiproject: str
    quality: object  # QualityClass or a raw label
    importance: object = Importance.Unknown


def read_assessments(path: str) -> Iterable[QualityAssessment]:
    """Rows of ``page_id, project, class, importance`` (header required)."""
    for row in read_tsv(path):
        if not row or row == [""]:
            continue
        page_id, project, quality = int(row[0]), row[1], row[2]
        importance = row[3] if len(row) > 3 else "Unknown"
        yield QualityAssessment(page_id, project, quality, importance)


def read_exclusions(path: str) -> set[str]:
    """One title per line; blank lines and ``#`` comments ignored."""
    with open(path, encoding="utf-8") as fh:
        return {title_key(line.strip()) for line in fh
                if line.strip() and not line.lstrip().startswith("#")}


def assign_quality_classes(assessments: Iterable[QualityAssessment],
                           report: Optional[Counter] = None) -> dict[int, set]:
    """Every class any project gave a page; a page can sit in several classes."""
    report = Counter() if report is None else report
    classes: dict[int, set] = {}
    for a in assessments:
        try:
            q = parse_quality_class(a.quality)
        except UnknownClassLabel:
            report["assessments.unknown_class"] += 1
            continue
        classes.setdefault(a.page_id, set()).add(q)
        report["assessments.rows"] += 1
    return classes


class ClassMeans(NamedTuple):
    columns: tuple  # "All articles" then class labels present
    n: dict         # column -> article count
    means: dict     # metric -> {column -> mean}


def aggregate_by_class(page_ids: np.ndarray, metrics: dict, class_map: dict,
                       report: Optional[Counter] = None) -> ClassMeans:
    """Mean of each metric over all articles and over each class population."""
    report = Counter() if report is None else report
    index = {int(p): i for i, p in enumerate(page_ids.tolist())}
    members: dict = {c: [] for c in CLASS_ORDER}
    for pid, qs in class_map.items():
        i = index.get(pid)
        if i is None:
            report["assessments.page_out_of_scope"] += 1
            continue
        for q in qs:
            members[q].append(i)
    columns = [ALL_ARTICLES] + [c.value for c in CLASS_ORDER if members[c]]
    rows = {ALL_ARTICLES: np.arange(len(page_ids))}
    rows.update({c.value: np.array(sorted(members[c]), dtype=np.int64) for c in CLASS_ORDER if members[c]})
    n = {col: int(len(rows[col])) for col in columns}
    means = {}
    for name in METRIC_NAMES:
        values = metrics[name]
        means[name] = {col: (float(values[rows[col]].mean()) if n[col] else math.nan) for col in columns}
    return ClassMeans(tuple(columns), n, means)


class SummaryStats(NamedTuple):
    metric: str
    n: int
    mean: float
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    minimum: float
    maximum: float


def describe(metric: str, values) -> SummaryStats:
    v = np.asarray(values, dtype=np.float64)
    if not len(v):
        raise ValueError(f"no values for {metric}")
    q1, med, q3 = (float(q) for q in np.quantile(v, [0.25, 0.5, 0.75], method="linear"))
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    return SummaryStats(metric, int(len(v)), float(v.mean()), q1, med, q3,
                        float(inside.min()), float(inside.max()), float(v.min()), float(v.max()))


def describe_metrics(metrics: dict, selected: Sequence[str] = METRIC_NAMES) -> list[SummaryStats]:
    return [describe(m, metrics[m]) for m in selected]


# -- Spearman -----------------------------------------------------------------

def rankdata(values) -> np.ndarray:
    """1-based ranks with ties sharing the average (mid) rank."""
    v = np.asarray(values)
    n = len(v)
    order = np.argsort(v, kind="stable")
    sorted_v = v[order]
    boundaries = np.flatnonzero(np.concatenate(([True], sorted_v[1:] != sorted_v[:-1], [True])))
    starts, ends = boundaries[:-1], boundaries[1:]
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat((starts + ends + 1) / 2.0, ends - starts)
    return ranks


class _Ranked(NamedTuple):
    ranks: np.ndarray
    tied: bool
    constant: bool


def _rank(values) -> _Ranked:
    r = rankdata(values)
    distinct = len(np.unique(r))
    return _Ranked(r, distinct < len(r), distinct <= 1)


# sum of squared rank differences stays below 2**63 up to here
_EXACT_LIMIT = 2_000_000


def _rho(a: _Ranked, b: _Ranked) -> float:
    n = len(a.ranks)
    if not a.tied and not b.tied and n < _EXACT_LIMIT:
        # integer ranks: one exact rational, rounded once
        d = (a.ranks - b.ranks).astype(np.int64)
        denom = n * (n * n - 1)
        return (denom - 6 * int((d * d).sum())) / denom
    x = a.ranks - a.ranks.mean()
    y = b.ranks - b.ranks.mean()
    rho = float((x * y).sum()) / math.sqrt(float((x * x).sum()) * float((y * y).sum()))
    return max(-1.0, min(1.0, rho))


def spearman(x, y) -> float:
    """Spearman's rho: Pearson correlation of mid-ranks."""
    if len(x) != len(y):
        raise ValueError("vectors differ in length")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    a, b = _rank(x), _rank(y)
    if a.constant or b.constant:
        raise DegenerateVector("constant vector has no rank correlation")
    return _rho(a, b)


class CorrelationMatrix(NamedTuple):
    names: tuple
    values: np.ndarray  # NaN marks undefined cells


def spearman_matrix(metrics: dict, selected: Sequence[str] = METRIC_NAMES) -> CorrelationMatrix:
    names = tuple(selected)
    ranked = {m: _rank(metrics[m]) for m in names}
    k = len(names)
    out = np.full((k, k), np.nan)
    for i in range(k):
        for j in range(i, k):
            a, b = ranked[names[i]], ranked[names[j]]
            if a.constant or b.constant or len(a.ranks) < 2:
                continue
            rho = 1.0 if i == j else _rho(a, b)
            out[i, j] = out[j, i] = rho
    return CorrelationMatrix(names, out)


# -- rankings -------------------------------------------------------------------

class RankedArticle(NamedTuple):
    rank: int
    page_id: int
    title: str
    value: float


def rank_top_n(page_ids: np.ndarray, metrics: dict, key: str, n: int,
               exclusions: Iterable[str] = (), titles: Optional[dict] = None) -> list[RankedArticle]:
    """Top ``n`` articles by ``key``; ties go to the lower page_id; excluded titles never count."""
    if key not in metrics:
        raise KeyError(f"unknown metric {key!r}")
    titles = titles or {}
    excluded = {title_key(t) for t in exclusions}
    values = np.asarray(metrics[key], dtype=np.float64)
    order = np.lexsort((page_ids, -values))
    out: list[RankedArticle] = []
    for i in order.tolist():
        if len(out) >= n:
            break
        pid = int(page_ids[i])
        title = titles.get(pid, "")
        if excluded and title_key(title) in excluded:
            continue
        out.append(RankedArticle(len(out) + 1, pid, title, float(values[i])))
    return out


# -- outputs --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return "NA" if x is None or math.isnan(x) else f"{x:.2f}"


def write_class_means(cm: ClassMeans, path: str) -> None:
    with TsvWriter(path, ("metric",) + cm.columns) as w:
        w.write(["articles"] + [cm.n[c] for c in cm.columns])
        for name in METRIC_NAMES:
            w.write([name] + [_fmt(cm.means[name][c]) for c in cm.columns])


SUMMARY_COLUMNS = ("metric", "n", "mean", "q1", "median", "q3", "whisker_low", "whisker_high",
                   "min", "max")


def write_summary_stats(stats: Sequence[SummaryStats], path: str) -> None:
    with TsvWriter(path, SUMMARY_COLUMNS) as w:
        for s in stats:
            w.write([s.metric, s.n] + [_fmt(v) for v in s[2:]])


def write_correlations(cm: CorrelationMatrix, path: str) -> None:
    with TsvWriter(path, ("metric",) + cm.names) as w:
        for name, row in zip(cm.names, cm.values):
            w.write([name] + ["NA" if math.isnan(v) else f"{v:.4f}" for v in row])


def write_ranking(ranking: Sequence[RankedArticle], key: str, path: str) -> None:
    with TsvWriter(path, ("rank", "page_id", "title", key)) as w:
        for r in ranking:
            w.write([r.rank, r.page_id, r.title, _fmt(r.value)])


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    line = lambda cells: "  ".join(str(c).rjust(w) if i else str(c).ljust(w)
                                   for i, (c, w) in enumerate(zip(cells, widths)))
    return [line(header), line(["-" * w for w in widths])] + [line(r) for r in rows]


def render_report(cm: ClassMeans, stats: Sequence[SummaryStats], corr: CorrelationMatrix,
                  rankings: dict) -> str:
    out = ["Average article metrics by quality class", ""]
    rows = [["articles"] + [str(cm.n[c]) for c in cm.columns]]
    rows += [[m] + [_fmt(cm.means[m][c]) for c in cm.columns] for m in METRIC_NAMES]
    out += _table(["metric", *cm.columns], rows)
    out += ["", "Distribution of the metrics", ""]
    out += _table(list(SUMMARY_COLUMNS), [[s.metric, str(s.n)] + [_fmt(v) for v in s[2:]] for s in stats])
    out += ["", "Spearman correlations", ""]
    out += _table(["", *corr.names], [[name] + ["NA" if math.isnan(v) else f"{v:.2f}" for v in row]
                                      for name, row in zip(corr.names, corr.values)])
    for key, ranking in rankings.items():
        out += ["", f"Top {len(ranking)} articles by {key}", ""]
        out += _table(["rank", "page_id", "title", key],
                      [[str(r.rank), str(r.page_id), r.title, _fmt(r.value)] for r in ranking])
    return "\n".join(out) + "\n"
