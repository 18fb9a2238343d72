"""Stage sequencing, checkpoints and run reports behind the command line.

Each stage has a key: a hash over the content of its inputs and the settings
that shape its output. The manifest in the output directory records the key
and the hash of every file a stage wrote, so a rerun skips a stage whose key
and outputs are unchanged. Work happens under ``staging/``; finished graph
files are moved into place only after they pass the integrity check.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from itertools import chain
from typing import Callable, Iterable, Iterator, Optional

import wikikg
from wikikg import analysis as A
from wikikg.config import PipelineConfig
from wikikg.errors import IntegrityViolationsPresent, MissingGraph, MissingMetrics
from wikikg.graph import schema as S
from wikikg.graph.build import BuildOptions, GraphInputs, build_graph
from wikikg.graph.integrity import verify_integrity
from wikikg.ingest import tables
from wikikg.ingest.citations import parse_citations
from wikikg.ingest.compression import open_input
from wikikg.ingest.pageviews import aggregate_views, date_from_filename, merge_view_totals, parse_pageviews
from wikikg.ingest.records import RevisionAggregate, format_timestamp, parse_mw_timestamp
from wikikg.ingest.revisions import iter_page_aggregates, parse_revision_history
from wikikg.ingest.stats import ParseStats
from wikikg.metrics import METRICS_FILE, compute_article_metrics, read_metrics, write_metrics
from wikikg.normalize.rules import RuleSet
from wikikg.tsv import TsvWriter, read_tsv

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
METRICS_REPORT = "metrics_report.txt"
ANALYSIS_REPORT = "report.txt"
REVISION_COLUMNS = ("page_id", "edits", "editors", "created")
VIEW_COLUMNS = ("page_id", "namespace", "title", "views")


# -- hashing and manifest ---------------------------------------------------------

def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def stage_key(**parts) -> str:
    blob = json.dumps({"version": wikikg.__version__, **parts}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Manifest:
    def __init__(self, out_dir: str):
        self.path = os.path.join(out_dir, MANIFEST)
        self.out_dir = out_dir
        self.stages: dict = {}
        if os.path.exists(self.path):
            with open(self.path, encoding="utf-8") as fh:
                self.stages = json.load(fh)

    def current(self, stage: str, key: str) -> bool:
        entry = self.stages.get(stage)
        if not entry or entry.get("key") != key:
            return False
        for rel, digest in entry.get("outputs", {}).items():
            path = os.path.join(self.out_dir, rel)
            if not os.path.exists(path) or file_sha256(path) != digest:
                return False
        return True

    def counters(self, stage: str) -> dict:
        return dict(self.stages.get(stage, {}).get("counters", {}))

    def record(self, stage: str, key: str, outputs: Iterable[str], counters: Optional[dict] = None) -> None:
        self.stages[stage] = {
            "key": key,
            "outputs": {os.path.relpath(p, self.out_dir): file_sha256(p) for p in sorted(outputs)},
            "counters": dict(sorted((counters or {}).items())),
        }
        self.save()

    def forget(self, *stages: str) -> None:
        for s in stages:
            self.stages.pop(s, None)
        self.save()

    def save(self) -> None:
        os.makedirs(self.out_dir, exist_ok=True)
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.stages, fh, indent=1, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, self.path)


class Layout:
    def __init__(self, out_dir: str):
        self.out = out_dir
        self.graph = os.path.join(out_dir, "graph")
        self.staging = os.path.join(out_dir, "staging")
        self.metrics = os.path.join(out_dir, METRICS_FILE)
        self.metrics_report = os.path.join(out_dir, METRICS_REPORT)
        self.analysis = os.path.join(out_dir, "analysis")

    def graph_files(self) -> list[str]:
        return [os.path.join(self.graph, f) for f in S.TABLE_FILES.values()]


class InputHashes:
    """Content hashes of inputs, cached by (size, mtime) to spare rereading huge dumps."""

    def __init__(self, cache_path: str):
        self.cache_path = cache_path
        self.cache: dict = {}
        if os.path.exists(cache_path):
            with open(cache_path, encoding="utf-8") as fh:
                self.cache = json.load(fh)

    def __call__(self, path: str) -> str:
        st = os.stat(path)
        stamp = [st.st_size, st.st_mtime_ns]
        hit = self.cache.get(path)
        if hit and hit[0] == stamp:
            return hit[1]
        digest = file_sha256(path)
        self.cache[path] = [stamp, digest]
        return digest

    def save(self) -> None:
        os.makedirs(os.path.dirname(self.cache_path), exist_ok=True)
        with open(self.cache_path, "w", encoding="utf-8") as fh:
            json.dump(self.cache, fh, sort_keys=True)


# -- reports ---------------------------------------------------------------------------

def reconcile(counters: dict) -> dict[str, bool]:
    """Conservation checks over the build counters."""
    c = Counter(counters)
    checks = {
        "page_link": c["page_link.rows_in"] == (
            c["page_link.edges"] + c["page_link.dropped_missing_source"]
            + c["page_link.dropped_out_of_scope"] + c["page_link.dropped_unresolved"]
            + c["page_link.deduplicated"]),
        "page_category": c["page_category.rows_in"] == (
            c["page_category.edges"] + c["page_category.dropped_missing_page"]
            + c["page_category.dropped_unresolved"] + c["page_category.dropped_bad_type"]
            + c["page_category.deduplicated"]),
        "page_property": c["page_property.rows_in"] == (
            c["page_property.rows"] + c["page_property.dropped_missing_page"]
            + c["page_property.duplicate_key"]),
        "references": c["references.rows_in"] == (
            c["references.resolved"] + c["references.dropped_unresolved"]),
        "page": c["page.rows_in"] == c["page.rows"],
    }
    return checks


def render_report(counters: dict, checks: Optional[dict] = None) -> str:
    lines = [f"{k} = {v}" for k, v in sorted(counters.items())]
    for name, ok in sorted((checks or {}).items()):
        lines.append(f"reconcile.{name} = {'ok' if ok else 'MISMATCH'}")
    return "\n".join(lines) + "\n"


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- ingest helpers ------------------------------------------------------------------

def _read_sql(reader: Callable, path: str) -> Iterator:
    if not path:
        return
    with open_input(path) as fh:
        yield from reader(fh)


def _aggregate_shard(path: str, dest: str) -> int:
    rows = 0
    with open_input(path) as fh, TsvWriter(dest, REVISION_COLUMNS) as w:
        for agg in iter_page_aggregates(parse_revision_history(fh)):
            w.write((agg.page_id, agg.edits, agg.editors, format_timestamp(agg.created)))
            rows += 1
    return rows


def _read_revision_file(path: str) -> Iterator[RevisionAggregate]:
    for pid, edits, editors, created in read_tsv(path):
        yield RevisionAggregate(int(pid), int(edits), int(editors), parse_mw_timestamp(created))


def _read_views_file(path: str) -> dict:
    totals = {}
    for pid, ns, title, views in read_tsv(path):
        key = int(pid) if pid else (int(ns), title)
        totals[key] = int(views)
    return totals


def _citation_stream(cfg: PipelineConfig, stats: ParseStats) -> Iterator:
    columns = cfg.citation_columns
    for path in cfg.citations:
        with open_input(path) as fh:
            yield from parse_citations(fh, columns, stats)


# -- stages ------------------------------------------------------------------------------

class Pipeline:
    def __init__(self, cfg: PipelineConfig, force: bool = False):
        self.cfg = cfg
        self.force = force
        self.layout = Layout(cfg.out)
        self.manifest = Manifest(cfg.out)
        self.hashes = InputHashes(os.path.join(self.layout.staging, "input_hashes.json"))
        self.ran: list[str] = []
        self.skipped: list[str] = []

    def _skip(self, stage: str, key: str) -> bool:
        if not self.force and self.manifest.current(stage, key):
            self.skipped.append(stage)
            log.info("stage %s is current", stage)
            return True
        self.ran.append(stage)
        log.info("running stage %s", stage)
        return False

    # revisions: one aggregate file per shard
    def stage_revisions(self) -> list[str]:
        shards = self.cfg.revisions
        os.makedirs(os.path.join(self.layout.staging, "revisions"), exist_ok=True)
        digests = [self.hashes(p) for p in shards]
        dests = [os.path.join(self.layout.staging, "revisions", f"{d[:20]}.tsv") for d in digests]
        key = stage_key(stage="revisions", shards=digests)
        if self._skip("revisions", key):
            return dests
        todo = [(p, d) for p, d in zip(shards, dests)]
        if self.cfg.threads > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=self.cfg.threads) as pool:
                counts = list(pool.map(_aggregate_shard, *zip(*todo)))
        else:
            counts = [_aggregate_shard(p, d) for p, d in todo]
        self.manifest.record("revisions", key, dests,
                             {"revisions.shards": len(shards), "revisions.pages": sum(counts)})
        return dests

    def stage_pageviews(self) -> str:
        cfg = self.cfg
        dest = os.path.join(self.layout.staging, "views.tsv")
        key = stage_key(stage="pageviews", files=[self.hashes(p) for p in cfg.pageviews],
                        names=[os.path.basename(p) for p in cfg.pageviews],
                        window=[cfg.views_start, cfg.views_end], wiki=cfg.wiki, agents=cfg.agents,
                        columns=repr(cfg.pageview_columns), tolerance=cfg.malformed_tolerance)
        if self._skip("pageviews", key):
            return dest
        parts = []
        counters: Counter = Counter()
        for path in cfg.pageviews:
            stats = ParseStats(os.path.basename(path), tolerance=cfg.malformed_tolerance)
            with open_input(path) as fh:
                parts.append(aggregate_views(parse_pageviews(
                    fh, cfg.pageview_columns, (cfg.views_start, cfg.views_end), wiki=cfg.wiki,
                    agents=set(cfg.agents) or None, file_date=date_from_filename(path), stats=stats)))
            counters.update(stats.as_dict("pageviews"))
        totals = merge_view_totals(*parts)
        id_keys = sorted(k for k in totals if isinstance(k, int))
        title_keys = sorted(k for k in totals if not isinstance(k, int))
        with TsvWriter(dest, VIEW_COLUMNS) as w:
            for k in id_keys:
                w.write((k, "", "", totals[k]))
            for ns, title in title_keys:
                w.write(("", ns, title, totals[(ns, title)]))
        counters["pageviews.keys"] = len(totals)
        self.manifest.record("pageviews", key, [dest], counters)
        return dest

    def stage_graph(self, revision_files: list[str], views_file: str) -> dict:
        cfg = self.cfg
        lay = self.layout
        sql = {name: getattr(cfg, name) for name in
               ("page", "category", "categorylinks", "page_props", "pagelinks", "externallinks", "redirect")}
        key = stage_key(
            stage="graph",
            sql={k: self.hashes(v) for k, v in sql.items() if v},
            citations=[self.hashes(p) for p in cfg.citations],
            revisions=[file_sha256(p) for p in revision_files],
            views=file_sha256(views_file),
            scope=sorted(cfg.scope_namespaces), resolve_redirects=cfg.resolve_redirects,
            schemes=cfg.schemes, rules=self.hashes(cfg.domain_rules) if cfg.domain_rules else "bundled",
            citation_columns=repr(cfg.citation_columns), tolerance=cfg.malformed_tolerance,
        )
        outputs = lay.graph_files() + [os.path.join(lay.graph, f) for f in (S.REPORT_FILE, S.REJECTED_URLS_FILE)]
        if self._skip("graph", key):
            return self.manifest.counters("graph")
        self.manifest.forget("graph", "metrics", "analysis")
        work = os.path.join(lay.staging, "graph")
        shutil.rmtree(work, ignore_errors=True)
        os.makedirs(work)
        rules = RuleSet.load(cfg.domain_rules) if cfg.domain_rules else RuleSet.default()
        options = BuildOptions(
            scope_namespaces=frozenset(cfg.scope_namespaces), resolve_redirects=cfg.resolve_redirects,
            memory_ceiling=cfg.memory_ceiling, tmpdir=lay.staging, schemes=tuple(cfg.schemes), rules=rules,
        )
        cit_stats = ParseStats("citations", tolerance=cfg.malformed_tolerance)
        inputs = GraphInputs(
            pages=_read_sql(tables.read_pages, sql["page"]),
            revisions=chain.from_iterable(_read_revision_file(p) for p in revision_files),
            views=_read_views_file(views_file),
            categories=_read_sql(tables.read_categories, sql["category"]),
            categorylinks=_read_sql(tables.read_categorylinks, sql["categorylinks"]),
            page_props=_read_sql(tables.read_page_props, sql["page_props"]),
            pagelinks=_read_sql(tables.read_pagelinks, sql["pagelinks"]),
            externallinks=_read_sql(tables.read_externallinks, sql["externallinks"]),
            citations=_citation_stream(cfg, cit_stats),
            redirects=_read_sql(tables.read_redirects, sql["redirect"]),
        )
        counters = build_graph(inputs, work, options)
        counters.update(cit_stats.as_dict("citations"))
        integrity = verify_integrity(work, options.schemes)
        counters.update(integrity.as_dict())
        for stage in ("revisions", "pageviews"):
            counters.update(self.manifest.counters(stage))
        counters = dict(sorted(counters.items()))
        _write_text(os.path.join(work, S.REPORT_FILE), render_report(counters, reconcile(counters)))
        if not integrity.ok:
            raise IntegrityViolationsPresent(
                f"{integrity.total_violations} integrity violations; partial graph kept in {work}\n"
                + integrity.render())
        shutil.rmtree(lay.graph, ignore_errors=True)
        os.replace(work, lay.graph)
        self.manifest.record("graph", key, outputs, counters)
        return counters

    def build(self) -> dict:
        self.cfg.validate(required=("page",))
        revision_files = self.stage_revisions()
        views_file = self.stage_pageviews()
        counters = self.stage_graph(revision_files, views_file)
        self.hashes.save()
        return counters

    def _require_graph(self) -> None:
        missing = [p for p in self.layout.graph_files() if not os.path.exists(p)]
        if missing:
            raise MissingGraph(f"no knowledge graph under {self.layout.graph}; run build first")

    def metrics(self) -> dict:
        cfg = self.cfg
        lay = self.layout
        self._require_graph()
        key = stage_key(stage="metrics", graph=[file_sha256(p) for p in lay.graph_files()],
                        as_of=cfg.as_of, talk_archives=cfg.include_talk_archives)
        if self._skip("metrics", key):
            return self.manifest.counters("metrics")
        integrity = verify_integrity(lay.graph, tuple(cfg.schemes))
        if not integrity.ok:
            raise IntegrityViolationsPresent(
                f"graph has {integrity.total_violations} integrity violations\n" + integrity.render())
        counters: Counter = Counter()
        tmp = lay.metrics + ".tmp"
        write_metrics(compute_article_metrics(lay.graph, cfg.window, counters,
                                              include_talk_archives=cfg.include_talk_archives), tmp)
        os.replace(tmp, lay.metrics)
        counters = dict(sorted(counters.items()))
        checks = {"handshake": counters.get("metrics.links_total", 0) == counters.get("metrics.linked_total", 0)}
        _write_text(lay.metrics_report, render_report(counters, checks))
        self.manifest.forget("analysis")
        self.manifest.record("metrics", key, [lay.metrics, lay.metrics_report], counters)
        return counters

    def analyze(self, assessments: Optional[str] = None, exclusions: Optional[str] = None) -> dict:
        cfg = self.cfg
        lay = self.layout
        assessments = assessments if assessments is not None else cfg.assessments
        exclusions = exclusions if exclusions is not None else cfg.exclusions
        if not os.path.exists(lay.metrics):
            raise MissingMetrics(f"{lay.metrics} not found; run metrics first")
        self._require_graph()
        key = stage_key(
            stage="analysis", metrics=file_sha256(lay.metrics),
            pages=file_sha256(os.path.join(lay.graph, S.TABLE_FILES["page"])),
            assessments=file_sha256(assessments) if assessments else "",
            exclusions=file_sha256(exclusions) if exclusions else "",
            top_n=cfg.top_n, top=cfg.top_metrics, corr=cfg.correlation_metrics,
        )
        if self._skip("analysis", key):
            return self.manifest.counters("analysis")
        counters: Counter = Counter()
        ids, values = read_metrics(lay.metrics)
        class_map = A.assign_quality_classes(A.read_assessments(assessments), counters) if assessments else {}
        excluded = A.read_exclusions(exclusions) if exclusions else set()
        scope = set(ids.tolist())
        titles = {int(r[0]): r[2] for r in read_tsv(os.path.join(lay.graph, S.TABLE_FILES["page"]))
                  if int(r[0]) in scope}

        os.makedirs(lay.analysis, exist_ok=True)
        outputs = []

        def out(name):
            outputs.append(os.path.join(lay.analysis, name))
            return outputs[-1]

        means = A.aggregate_by_class(ids, values, class_map, counters)
        A.write_class_means(means, out("class_means.tsv"))
        stats = A.describe_metrics(values) if len(ids) else []
        A.write_summary_stats(stats, out("summary_stats.tsv"))
        corr = A.spearman_matrix(values, cfg.correlation_metrics)
        A.write_correlations(corr, out("correlations.tsv"))
        rankings = {}
        for metric in cfg.top_metrics:
            rankings[metric] = A.rank_top_n(ids, values, metric, cfg.top_n, excluded, titles)
            A.write_ranking(rankings[metric], metric, out(f"top_{metric}.tsv"))
        _write_text(out(ANALYSIS_REPORT), A.render_report(means, stats, corr, rankings))
        counters["analysis.articles"] = len(ids)
        counters["analysis.rated_articles"] = sum(1 for p in class_map if p in scope)
        counters = dict(sorted(counters.items()))
        self.manifest.record("analysis", key, outputs, counters)
        return counters

    def verify(self):
        self._require_graph()
        return verify_integrity(self.layout.graph, tuple(self.cfg.schemes))

    def report(self) -> str:
        lay = self.layout
        parts = []
        for title, path in (("build", os.path.join(lay.graph, S.REPORT_FILE)),
                            ("metrics", lay.metrics_report),
                            ("analysis", os.path.join(lay.analysis, ANALYSIS_REPORT))):
            if os.path.exists(path):
                with open(path, encoding="utf-8") as fh:
                    parts.append(f"[{title}]\n{fh.read()}")
        if not parts:
            raise MissingGraph(f"nothing has been run under {lay.out}")
        return "\n".join(parts)
