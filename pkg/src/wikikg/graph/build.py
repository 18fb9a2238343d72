"""Joins parsed dump streams into the nine-table knowledge graph.

Page-scale state (ids, namespaces, counters) lives in numpy arrays aligned
with the sorted page ids; everything edge-scale goes through
:class:`~wikikg.graph.extsort.ExternalSorter` so that memory stays under the
configured ceiling regardless of input size. Every output table is written
in a fixed sort order and surrogate ids are assigned in lexicographic key
order, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import logging
import os
import tempfile
from array import array
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from itertools import islice
from typing import Callable, Iterable, Iterator, NamedTuple, Optional

import numpy as np

from wikikg.errors import DuplicatePageId, UnparseableUrl
from wikikg.graph import schema as S
from wikikg.graph.extsort import (
    ExternalSorter,
    SortedFile,
    SpillFile,
    dedup_sorted,
    merge_join,
    records_for_budget,
)
from wikikg.graph.titles import title_key
from wikikg.ingest.records import (
    CitationRecord,
    RawPageRow,
    RevisionAggregate,
    format_timestamp,
)
from wikikg.normalize.identifiers import (
    DEFAULT_SCHEMES,
    normalize_identifiers,
    pub_identity_key,
    split_identity_key,
)
from wikikg.normalize.rules import RuleSet
from wikikg.normalize.urls import normalize_url
from wikikg.tsv import TsvWriter

log = logging.getLogger(__name__)

NO_TIME = np.iinfo(np.int64).min
BATCH = 65536


@dataclass
class BuildOptions:
    scope_namespaces: frozenset = frozenset({0})
    resolve_redirects: bool = False
    memory_ceiling: int = 2 * 1024**3
    tmpdir: Optional[str] = None
    schemes: tuple = DEFAULT_SCHEMES
    rules: RuleSet = field(default_factory=RuleSet.default)

    @property
    def max_records(self) -> int:
        return records_for_budget(self.memory_ceiling)


class PageRecord(NamedTuple):
    page_id: int
    namespace: int
    title: str
    is_redirect: bool
    is_new: bool
    restrictions: str
    touched: str
    length_bytes: int
    created: Optional[datetime]
    edits: int
    editors: int
    views: int
    references: int = 0

    def row(self) -> tuple:
        return (
            self.page_id, self.namespace, self.title, self.is_redirect, self.is_new,
            self.restrictions, self.touched, self.length_bytes,
            format_timestamp(self.created), self.edits, self.editors, self.views,
            self.references,
        )


def _batched(iterable, n=BATCH):
    it = iter(iterable)
    while True:
        chunk = list(islice(it, n))
        if not chunk:
            return
        yield chunk


def _to_epoch(dt: Optional[datetime]) -> int:
    if dt is None:
        return int(NO_TIME)
    return int(dt.timestamp())


def _from_epoch(value) -> Optional[datetime]:
    value = int(value)
    if value == NO_TIME:
        return None
    return datetime.fromtimestamp(value, tz=timezone.utc)


class PageCatalog:
    """The page table in join-friendly form.

    ``ids`` is sorted; every other array is aligned with it. ``titles`` is a
    re-scannable stream of ``(namespace, title_key, page_id)`` in key order.
    """

    def __init__(self, workdir: str, max_records: int):
        self.workdir = workdir
        self.max_records = max_records
        self.ids = np.zeros(0, dtype=np.int64)
        self.namespaces = np.zeros(0, dtype=np.int32)
        self.is_redirect = np.zeros(0, dtype=bool)
        self.edits = np.zeros(0, dtype=np.int64)
        self.editors = np.zeros(0, dtype=np.int64)
        self.created = np.zeros(0, dtype=np.int64)
        self.views = np.zeros(0, dtype=np.int64)
        self.references = np.zeros(0, dtype=np.int64)
        self.rows: Optional[SortedFile] = None
        self.titles: Optional[SortedFile] = None
        self.category_pages: dict[str, int] = {}

    @classmethod
    def from_pages(cls, pages: Iterable[RawPageRow], workdir: str, max_records: int) -> "PageCatalog":
        cat = cls(workdir, max_records)
        sorter = ExternalSorter(max_records, workdir)
        for p in pages:
            sorter.add((
                p.page_id, p.namespace, p.title, bool(p.is_redirect), bool(p.is_new),
                p.restrictions or "", format_timestamp(p.touched), p.length_bytes,
            ))
        ids, nss, redirects = array("q"), array("i"), array("b")
        title_sorter = ExternalSorter(max_records, workdir)
        category_pages = {}

        def checked():
            last = None
            for row in sorter:
                if row[0] == last:
                    raise DuplicatePageId(f"page_id {row[0]} appears more than once")
                last = row[0]
                ids.append(row[0])
                nss.append(row[1])
                redirects.append(row[3])
                key = title_key(row[2])
                title_sorter.add((row[1], key, row[0]))
                if row[1] == 14:
                    category_pages[key] = row[0]
                yield row

        cat.rows = SortedFile(checked(), workdir, "pages")
        cat.titles = SortedFile(title_sorter, workdir, "titles")
        n = len(ids)
        cat.ids = np.frombuffer(ids, dtype=np.int64).copy() if n else np.zeros(0, np.int64)
        cat.namespaces = np.frombuffer(nss, dtype=np.int32).copy() if n else np.zeros(0, np.int32)
        cat.is_redirect = np.frombuffer(redirects, dtype=np.int8).astype(bool) if n else np.zeros(0, bool)
        cat.edits = np.zeros(n, dtype=np.int64)
        cat.editors = np.zeros(n, dtype=np.int64)
        cat.created = np.full(n, NO_TIME, dtype=np.int64)
        cat.views = np.zeros(n, dtype=np.int64)
        cat.references = np.zeros(n, dtype=np.int64)
        cat.category_pages = category_pages
        return cat

    def __len__(self):
        return len(self.ids)

    def positions(self, page_ids) -> tuple[np.ndarray, np.ndarray]:
        """Index of each id in ``ids`` and a mask of which ids exist."""
        q = np.asarray(page_ids, dtype=np.int64)
        if len(self.ids) == 0:
            return np.zeros(len(q), dtype=np.int64), np.zeros(len(q), dtype=bool)
        pos = np.searchsorted(self.ids, q)
        pos_c = np.minimum(pos, len(self.ids) - 1)
        return pos_c, self.ids[pos_c] == q

    def contains(self, page_ids) -> np.ndarray:
        return self.positions(page_ids)[1]

    def known(self, rows: Iterable, get_id: Callable) -> Iterator[tuple]:
        """Yield ``(row, position or -1)`` in input order, in numpy-sized batches."""
        for chunk in _batched(rows):
            pos, ok = self.positions([get_id(r) for r in chunk])
            for r, p, k in zip(chunk, pos.tolist(), ok.tolist()):
                yield r, (p if k else -1)

    def in_scope_articles(self, namespaces=frozenset({0})) -> np.ndarray:
        mask = np.isin(self.namespaces, list(namespaces)) & ~self.is_redirect
        return mask

    def close(self):
        for f in (self.rows, self.titles):
            if f is not None:
                f.remove()


def _resolve_by_title(items: Iterable, catalog: PageCatalog, max_records: int, workdir: str,
                      on_unmatched: Callable) -> Iterator[tuple]:
    """Sort-merge join ``(namespace, key, payload)`` items with the title table.

    Yields ``(page_id, payload)``, in title order and input order within a title.
    """
    sorter = ExternalSorter(max_records, workdir)
    # the sequence number keeps the natural tuple order away from the payload
    sorter.extend((ns, key, seq, payload) for seq, (ns, key, payload) in enumerate(items))
    for item, page in merge_join(sorter, catalog.titles, lambda t: (t[0], t[1]),
                                 lambda t: (t[0], t[1]), on_unmatched):
        yield page[2], item[3]


# -- page table ---------------------------------------------------------------

def apply_revisions(catalog: PageCatalog, aggregates: Iterable[RevisionAggregate], report: Counter) -> None:
    seen = np.zeros(len(catalog), dtype=bool)
    for agg, pos in catalog.known(aggregates, lambda a: a.page_id):
        if pos < 0:
            report["revisions.unknown_page"] += 1
            continue
        created = _to_epoch(agg.created)
        if seen[pos]:
            # shards are expected to be page-disjoint; a repeat is merged conservatively
            report["revisions.duplicate_page"] += 1
            catalog.edits[pos] += agg.edits
            catalog.editors[pos] = min(catalog.editors[pos] + agg.editors, catalog.edits[pos])
            catalog.created[pos] = min(catalog.created[pos], created)
            continue
        seen[pos] = True
        catalog.edits[pos] = agg.edits
        catalog.editors[pos] = agg.editors
        catalog.created[pos] = created
    report["pages.without_revisions"] += int((~seen).sum())


def apply_views(catalog: PageCatalog, totals: dict, report: Counter) -> None:
    """Add view totals keyed by page_id or by ``(namespace, title)``."""
    by_id = [(k, v) for k, v in totals.items() if isinstance(k, int)]
    by_title: dict = {}
    for k, v in totals.items():
        if not isinstance(k, int):
            tk = (k[0], title_key(k[1]))
            by_title[tk] = by_title.get(tk, 0) + v
    for (pid, total), pos in catalog.known(by_id, lambda kv: kv[0]):
        if pos < 0:
            report["views.unknown_page_id"] += 1
        else:
            catalog.views[pos] += total
    if by_title:
        matched = 0
        for ns, key, pid in catalog.titles:
            total = by_title.get((ns, key))
            if total is not None:
                pos = int(np.searchsorted(catalog.ids, pid))
                catalog.views[pos] += total
                matched += 1
        report["views.unknown_title"] += len(by_title) - matched


def iter_page_records(catalog: PageCatalog) -> Iterator[PageRecord]:
    for i, row in enumerate(catalog.rows):
        yield PageRecord(
            *row,
            created=_from_epoch(catalog.created[i]),
            edits=int(catalog.edits[i]),
            editors=int(catalog.editors[i]),
            views=int(catalog.views[i]),
            references=int(catalog.references[i]),
        )


def build_page_table(pages: Iterable[RawPageRow], rev_aggs, view_totals: dict,
                     references: Optional[dict] = None, options: Optional[BuildOptions] = None,
                     report: Optional[Counter] = None) -> Iterator[PageRecord]:
    """Left-join revision aggregates and view totals onto the pages, by page_id.

    ``rev_aggs`` may be a mapping or an iterable of aggregates. Pages without
    revisions get ``created=None`` and zero counts; pages without views get 0.
    """
    options = options or BuildOptions()
    report = Counter() if report is None else report
    with tempfile.TemporaryDirectory(prefix="pages-", dir=options.tmpdir) as work:
        catalog = PageCatalog.from_pages(pages, work, options.max_records)
        aggs = rev_aggs.values() if isinstance(rev_aggs, dict) else rev_aggs
        apply_revisions(catalog, aggs, report)
        apply_views(catalog, view_totals or {}, report)
        if references:
            for (pid, n), pos in catalog.known(list(references.items()), lambda kv: kv[0]):
                if pos >= 0:
                    catalog.references[pos] += n
        yield from iter_page_records(catalog)


# -- page links ---------------------------------------------------------------

def _redirect_targets(redirect_rows, catalog: PageCatalog, options: BuildOptions, workdir: str,
                      report: Counter) -> dict[int, int]:
    items = ((r.to_namespace, title_key(r.to_title), r.from_page_id) for r in redirect_rows)
    unresolved = [0]

    def miss(_):
        unresolved[0] += 1

    targets = dict((src, dst) for dst, src in _resolve_by_title(items, catalog, options.max_records, workdir, miss))
    report["redirects.resolved"] += len(targets)
    report["redirects.unresolved"] += unresolved[0]
    return targets


def build_page_links(pagelink_rows: Iterable, catalog: PageCatalog, options: BuildOptions,
                     report: Counter, workdir: str, redirect_rows: Iterable = ()) -> Iterator[tuple]:
    """Resolve link targets to page ids and deduplicate.

    Yields ``(from_page_id, to_page_id)`` sorted. Counters reconcile as
    ``rows_in = edges + dropped_unresolved + dropped_missing_source +
    dropped_out_of_scope + deduplicated``.
    """
    scope = options.scope_namespaces
    redirects = {}
    if options.resolve_redirects:
        redirects = _redirect_targets(redirect_rows, catalog, options, workdir, report)

    def candidates():
        for row, pos in catalog.known(pagelink_rows, lambda r: r.from_page_id):
            report["page_link.rows_in"] += 1
            if pos < 0:
                report["page_link.dropped_missing_source"] += 1
            elif row.to_namespace not in scope:
                report["page_link.dropped_out_of_scope"] += 1
            else:
                yield (row.to_namespace, title_key(row.to_title), row.from_page_id)

    def unresolved(_):
        report["page_link.dropped_unresolved"] += 1

    edges = ExternalSorter(options.max_records, workdir)
    for to_id, from_id in _resolve_by_title(candidates(), catalog, options.max_records, workdir, unresolved):
        if redirects:
            hop = redirects.get(to_id)
            if hop is not None:
                report["page_link.redirects_followed"] += 1
                to_id = hop
        edges.add((from_id, to_id))
    dup = [0]
    for edge in dedup_sorted(edges, dup):
        if edge[0] == edge[1]:
            report["page_link.self_links"] += 1
        report["page_link.edges"] += 1
        yield edge
    report["page_link.deduplicated"] += dup[0]


# -- categories ---------------------------------------------------------------

def build_category_tables(category_rows: Iterable, categorylink_rows: Iterable, pageprop_rows: Iterable,
                          catalog: PageCatalog, options: BuildOptions, report: Counter,
                          workdir: str, out_dir: str) -> None:
    """Write category.tsv, page_category.tsv and page_property.tsv.

    A category is hidden iff its category page carries the ``hiddencat``
    property. Category links whose title is not in the category table are
    dropped and counted.
    """
    props = ExternalSorter(options.max_records, workdir)
    hidden_pages = set()
    for row, pos in catalog.known(pageprop_rows, lambda r: r.page_id):
        report["page_property.rows_in"] += 1
        if pos < 0:
            report["page_property.dropped_missing_page"] += 1
            continue
        if row.prop_name == "hiddencat":
            hidden_pages.add(row.page_id)
        props.add((row.page_id, row.prop_name, row.prop_value))
    with TsvWriter(os.path.join(out_dir, S.TABLE_FILES["page_property"]), S.PAGE_PROPERTY_COLUMNS) as w:
        last = None
        for pid, name, value in props:
            if (pid, name) == last:
                report["page_property.duplicate_key"] += 1
                continue
            last = (pid, name)
            w.write((pid, name, value))
    report["page_property.rows"] += w.rows

    categories = {}
    seen_ids = set()
    for c in category_rows:
        key = title_key(c.title)
        if key in categories or c.category_id in seen_ids:
            report["category.duplicate"] += 1
            continue
        categories[key] = c
        seen_ids.add(c.category_id)
    with TsvWriter(os.path.join(out_dir, S.TABLE_FILES["category"]), S.CATEGORY_COLUMNS) as w:
        for c in sorted(categories.values(), key=lambda c: c.category_id):
            page_id = catalog.category_pages.get(title_key(c.title))
            hidden = page_id is not None and page_id in hidden_pages
            report["category.hidden"] += hidden
            w.write((c.category_id, c.title, c.pages, c.subcats, c.files, hidden))

    links = ExternalSorter(options.max_records, workdir)
    for row, pos in catalog.known(categorylink_rows, lambda r: r.from_page_id):
        report["page_category.rows_in"] += 1
        if pos < 0:
            report["page_category.dropped_missing_page"] += 1
            continue
        cat = categories.get(title_key(row.to_category_title))
        if cat is None:
            report["page_category.dropped_unresolved"] += 1
            continue
        if row.link_type not in S.LINK_TYPES:
            report["page_category.dropped_bad_type"] += 1
            continue
        links.add((row.from_page_id, cat.category_id, row.link_type))
    dup = [0]
    with TsvWriter(os.path.join(out_dir, S.TABLE_FILES["page_category"]), S.PAGE_CATEGORY_COLUMNS) as w:
        w.write_all(dedup_sorted(links, dup))
    report["page_category.edges"] += w.rows
    report["page_category.deduplicated"] += dup[0]


# -- references ---------------------------------------------------------------

class ResolvedReference(NamedTuple):
    page_id: int
    urls: tuple  # of (url, domain)
    pub_key: Optional[str]


class RejectLog:
    """Tab-separated log of links that could not be canonicalised."""

    def __init__(self, path: Optional[str]):
        self._writer = TsvWriter(path, S.REJECTED_URL_COLUMNS) if path else None
        if self._writer:
            self._writer.__enter__()
        self.count = 0

    def add(self, source: str, page_id, raw: str, reason: str) -> None:
        self.count += 1
        if self._writer:
            self._writer.write((source, page_id, raw, reason))

    def close(self):
        if self._writer:
            self._writer.__exit__(None, None, None)
            self._writer = None


def _url_normalizer(rules: RuleSet):
    @lru_cache(maxsize=200_000)
    def norm(raw: str):
        try:
            return normalize_url(raw, rules)
        except UnparseableUrl as exc:
            return exc
    return norm


def resolve_references(records: Iterable[CitationRecord], catalog: PageCatalog, options: BuildOptions,
                       report: Counter, workdir: str, rejects: RejectLog) -> SortedFile:
    """Normalise every citation row and attach it to a page.

    Rows carrying a page id known to the page table use it; the rest are
    matched by title in the article namespace. Each resolved row adds one to
    its page's ``references`` count. The result is persisted for the url and
    publication passes.
    """
    norm = _url_normalizer(options.rules)
    counters: dict = {}

    def prepared():
        for rec in records:
            report["references.rows_in"] += 1
            urls = []
            for raw in rec.raw_urls:
                canon = norm(raw)
                if isinstance(canon, UnparseableUrl):
                    rejects.add("citation", rec.source_page_id or rec.source_page_title, raw, str(canon))
                    report["references.rejected_urls"] += 1
                else:
                    urls.append((canon.url, canon.domain))
            pairs = normalize_identifiers(rec.raw_identifiers, options.schemes, counters)
            key = pub_identity_key(pairs) if pairs else None
            if rec.raw_identifiers and key is None:
                report["references.no_valid_identifier"] += 1
            yield rec.source_page_id, rec.source_page_title, tuple(sorted(set(urls))), key

    direct = SpillFile(workdir, "references-direct")

    def by_title():
        for item, pos in catalog.known(prepared(), lambda t: t[0]):
            pid, title, urls, key = item
            if pos >= 0:
                direct.add(ResolvedReference(pid, urls, key))
            else:
                yield (0, title_key(title), (urls, key))

    def unresolved(_):
        report["references.dropped_unresolved"] += 1

    def all_resolved():
        # the title join drains by_title() before yielding, so ``direct`` is complete here
        for pid, (urls, key) in _resolve_by_title(by_title(), catalog, options.max_records, workdir, unresolved):
            yield ResolvedReference(pid, urls, key)
        yield from direct

    resolved = SortedFile(all_resolved(), workdir, "references")
    direct.remove()
    for k, v in counters.items():
        report[k] += v
    counts: Counter = Counter()
    for ref in resolved:
        counts[ref.page_id] += 1
    for (pid, n), pos in catalog.known(sorted(counts.items()), lambda kv: kv[0]):
        catalog.references[pos] += n
    report["references.resolved"] += resolved.count
    return resolved


# -- urls -----------------------------------------------------------------------

def build_url_tables(externallink_rows: Iterable, references: Iterable[ResolvedReference],
                     catalog: PageCatalog, options: BuildOptions, report: Counter,
                     workdir: str, out_dir: str, rejects: RejectLog) -> None:
    """Write url.tsv and page_url.tsv from dump links and reference links.

    Both sources go through the same normaliser. ``in_reference`` is true
    when the (page, url) pair occurs among the references.
    """
    norm = _url_normalizer(options.rules)
    pairs = ExternalSorter(options.max_records, workdir)
    for row, pos in catalog.known(externallink_rows, lambda r: r.from_page_id):
        report["externallinks.rows_in"] += 1
        if pos < 0:
            report["externallinks.dropped_missing_page"] += 1
            continue
        canon = norm(row.raw_url)
        if isinstance(canon, UnparseableUrl):
            rejects.add("externallinks", row.from_page_id, row.raw_url, str(canon))
            report["externallinks.rejected_urls"] += 1
            continue
        pairs.add((canon.url, canon.domain, row.from_page_id, False))
    for ref in references:
        for url, domain in ref.urls:
            pairs.add((url, domain, ref.page_id, True))

    edges = ExternalSorter(options.max_records, workdir)
    with TsvWriter(os.path.join(out_dir, S.TABLE_FILES["url"]), S.URL_COLUMNS) as w:
        url_id = 0
        last = None
        for url, domain, pid, flag in pairs:
            if url != last:
                url_id += 1
                last = url
                w.write((url_id, url, domain))
            edges.add((pid, url_id, flag))
    report["url.rows"] += url_id

    with TsvWriter(os.path.join(out_dir, S.TABLE_FILES["page_url"]), S.PAGE_URL_COLUMNS) as w:
        current = None
        flag_any = False
        for pid, uid, flag in edges:
            if (pid, uid) != current:
                if current is not None:
                    w.write((current[0], current[1], flag_any))
                current = (pid, uid)
                flag_any = flag
            else:
                report["page_url.deduplicated"] += 1
                flag_any = flag_any or flag
        if current is not None:
            w.write((current[0], current[1], flag_any))
    report["page_url.edges"] += w.rows


# -- publications ---------------------------------------------------------------

def pub_scheme_columns(key: str, schemes=DEFAULT_SCHEMES, report: Optional[Counter] = None) -> list:
    """One value per scheme; when a scheme repeats, the longer value wins."""
    values: dict[str, str] = {}
    for scheme, value in split_identity_key(key):
        old = values.get(scheme)
        if old is None:
            values[scheme] = value
            continue
        if report is not None:
            report["pub.scheme_conflicts"] += 1
        log.debug("publication %r has several %s values", key, scheme)
        if (len(value), value) > (len(old), old):
            values[scheme] = value
    return [values.get(s, "") for s in schemes]


def build_pub_tables(references: Iterable[ResolvedReference], options: BuildOptions, report: Counter,
                     workdir: str, out_dir: str) -> None:
    """Write pub.tsv (one row per distinct identifier set) and page_pub.tsv."""
    cited = ExternalSorter(options.max_records, workdir)
    for ref in references:
        if ref.pub_key is not None:
            cited.add((ref.pub_key, ref.page_id))
    edges = ExternalSorter(options.max_records, workdir)
    with TsvWriter(os.path.join(out_dir, S.TABLE_FILES["pub"]), S.pub_columns(options.schemes)) as w:
        pub_id = 0
        last = None
        for key, pid in cited:
            if key != last:
                pub_id += 1
                last = key
                w.write([pub_id, key] + pub_scheme_columns(key, options.schemes, report))
            edges.add((pid, pub_id))
    report["pub.rows"] += pub_id
    dup = [0]
    with TsvWriter(os.path.join(out_dir, S.TABLE_FILES["page_pub"]), S.PAGE_PUB_COLUMNS) as w:
        w.write_all(dedup_sorted(edges, dup))
    report["page_pub.edges"] += w.rows
    report["page_pub.deduplicated"] += dup[0]


# -- whole graph ------------------------------------------------------------------

@dataclass
class GraphInputs:
    pages: Iterable
    revisions: Iterable = ()
    views: dict = field(default_factory=dict)
    categories: Iterable = ()
    categorylinks: Iterable = ()
    page_props: Iterable = ()
    pagelinks: Iterable = ()
    externallinks: Iterable = ()
    citations: Iterable = ()
    redirects: Iterable = ()


def build_graph(inputs: GraphInputs, out_dir: str, options: Optional[BuildOptions] = None,
                report: Optional[Counter] = None) -> Counter:
    """Build all nine tables into ``out_dir``; returns the counters."""
    options = options or BuildOptions()
    report = Counter() if report is None else report
    os.makedirs(out_dir, exist_ok=True)
    rejects = RejectLog(os.path.join(out_dir, S.REJECTED_URLS_FILE))
    with tempfile.TemporaryDirectory(prefix="wikikg-", dir=options.tmpdir) as work:
        catalog = PageCatalog.from_pages(inputs.pages, work, options.max_records)
        report["page.rows_in"] += len(catalog)
        apply_revisions(catalog, inputs.revisions, report)
        apply_views(catalog, inputs.views, report)

        with TsvWriter(os.path.join(out_dir, S.TABLE_FILES["page_link"]), S.PAGE_LINK_COLUMNS) as w:
            w.write_all(build_page_links(inputs.pagelinks, catalog, options, report, work, inputs.redirects))

        build_category_tables(inputs.categories, inputs.categorylinks, inputs.page_props,
                              catalog, options, report, work, out_dir)

        refs = resolve_references(inputs.citations, catalog, options, report, work, rejects)
        build_url_tables(inputs.externallinks, refs, catalog, options, report, work, out_dir, rejects)
        build_pub_tables(refs, options, report, work, out_dir)
        refs.remove()

        with TsvWriter(os.path.join(out_dir, S.TABLE_FILES["page"]), S.PAGE_COLUMNS) as w:
            for rec in iter_page_records(catalog):
                w.write(rec.row())
        report["page.rows"] += w.rows
        catalog.close()
    rejects.close()
    report["rejected_urls"] += rejects.count
    return report
