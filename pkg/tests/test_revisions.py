import io
import json
import math
import os
import random
import subprocess
import sys
import time
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from wikikg.errors import XmlStructure
from wikikg.ingest.records import (
    DELETED_CONTRIBUTOR,
    ContributorIdentity,
    ContributorKind,
    RevisionEvent,
)
from wikikg.ingest.revisions import (
    RevisionAccumulator,
    aggregate_revisions,
    iter_page_aggregates,
    merge_aggregates,
    parse_revision_history,
)

NS = 'xmlns="http://www.mediawiki.org/xml/export-0.10/"'


def history(*pages):
    body = "".join(pages)
    return io.BytesIO(f"<mediawiki {NS}><siteinfo><sitename>W</sitename></siteinfo>{body}</mediawiki>".encode())


def page(pid, title, revisions, ns=0):
    return f"<page><title>{title}</title><ns>{ns}</ns><id>{pid}</id>{''.join(revisions)}</page>"


def rev(ts, contributor):
    return f"<revision><id>1</id><timestamp>{ts}</timestamp>{contributor}<comment>c</comment></revision>"


def user(uid, name="U"):
    return f"<contributor><username>{name}</username><id>{uid}</id></contributor>"


def ip(addr):
    return f"<contributor><ip>{addr}</ip></contributor>"


DELETED = '<contributor deleted="deleted" />'


def test_two_pages_three_revisions_each():
    events = list(parse_revision_history(history(
        page(1, "Soil", [rev(f"2010-01-0{i}T00:00:00Z", user(i)) for i in (1, 2, 3)]),
        page(2, "Talk:Soil", [rev(f"2011-01-0{i}T00:00:00Z", ip("10.0.0.1")) for i in (1, 2, 3)], ns=1),
    )))
    assert len(events) == 6
    assert [e.page_id for e in events] == [1, 1, 1, 2, 2, 2]
    assert events[3].namespace == 1 and events[3].title == "Soil"
    assert events[0].timestamp == datetime(2010, 1, 1, tzinfo=timezone.utc)
    assert events[3].contributor == ContributorIdentity(ContributorKind.ANONYMOUS, "10.0.0.1")


def test_deleted_contributor():
    (ev,) = parse_revision_history(history(page(3, "X", [rev("2012-05-05T05:05:05Z", DELETED)])))
    assert ev.contributor.kind is ContributorKind.DELETED


def test_page_without_revisions_yields_nothing():
    assert list(parse_revision_history(history(page(4, "Empty", [])))) == []


def test_unknown_elements_are_ignored():
    extra = "<restrictions>edit=sysop</restrictions><redirect title='Y' /><frobnicate>1</frobnicate>"
    text = page(5, "X", [rev("2012-05-05T05:05:05Z", user(9))]).replace("<id>5</id>", "<id>5</id>" + extra)
    (ev,) = parse_revision_history(history(text))
    assert ev.page_id == 5


def test_missing_timestamp_names_the_element():
    bad = page(6, "X", ["<revision><id>1</id>" + user(1) + "</revision>"])
    with pytest.raises(XmlStructure) as err:
        list(parse_revision_history(history(bad)))
    assert "/mediawiki/page[1]/revision[1]" in str(err.value)


def test_missing_page_id():
    bad = f"<page><title>X</title><ns>0</ns>{rev('2012-05-05T05:05:05Z', user(1))}</page>"
    with pytest.raises(XmlStructure):
        list(parse_revision_history(history(bad)))


def test_revision_ids_do_not_overwrite_page_id():
    (ev,) = parse_revision_history(history(page(77, "X", [rev("2012-05-05T05:05:05Z", user(1))])))
    assert ev.page_id == 77


# -- aggregation ------------------------------------------------------------------

T0 = datetime(2001, 1, 15, tzinfo=timezone.utc)


def event(pid, who, day):
    return RevisionEvent(pid, 0, f"P{pid}", T0 + timedelta(days=day),
                         ContributorIdentity(ContributorKind.REGISTERED, who))


def test_five_events_three_editors():
    evs = [event(7, c, i) for i, c in enumerate("AABAC")]
    agg = aggregate_revisions(evs)[7]
    assert (agg.edits, agg.editors, agg.created) == (5, 3, T0)


def test_single_event():
    agg = aggregate_revisions([event(1, "A", 3)])[1]
    assert (agg.edits, agg.editors, agg.created) == (1, 1, T0 + timedelta(days=3))


def test_deleted_sentinel_counts_once_per_page():
    evs = [RevisionEvent(p, 0, "X", T0, DELETED_CONTRIBUTOR) for p in (1, 1, 1, 2)]
    aggs = aggregate_revisions(evs)
    assert aggs[1].editors == 1 and aggs[2].editors == 1


def brute_force(events):
    pages = {}
    for e in events:
        pages.setdefault(e.page_id, []).append(e)
    return {p: (len(es), len({e.contributor for e in es}), min(e.timestamp for e in es))
            for p, es in pages.items()}


def random_events(rng, n):
    n_pages = rng.randint(1, max(1, n // 3))
    n_people = rng.randint(1, max(1, n // 2))
    kinds = list(ContributorKind)
    out = []
    for _ in range(n):
        kind = rng.choice(kinds)
        who = DELETED_CONTRIBUTOR if kind is ContributorKind.DELETED else \
            ContributorIdentity(kind, str(rng.randrange(n_people)))
        out.append(RevisionEvent(rng.randrange(1, n_pages + 1), 0, "t",
                                 T0 + timedelta(seconds=rng.randrange(10**9)), who))
    return out


def test_thousand_random_fixtures_match_brute_force():
    rng = random.Random(2021)
    start = time.perf_counter()
    for _ in range(1000):
        n = int(math.exp(rng.uniform(0, math.log(10_000))))  # log-uniform in [1, 10000]
        events = random_events(rng, n)
        got = {p: (a.edits, a.editors, a.created) for p, a in aggregate_revisions(events).items()}
        assert got == brute_force(events)
        assert all(1 <= a[1] <= a[0] for a in got.values())
    assert time.perf_counter() - start < 30


def test_merge_equals_whole_on_random_splits():
    rng = random.Random(7)
    for _ in range(100):
        events = random_events(rng, rng.randint(1, 2000))
        cut = rng.randrange(len(events) + 1)
        rng.shuffle(events)
        a = RevisionAccumulator().update(events[:cut])
        b = RevisionAccumulator().update(events[cut:])
        assert merge_aggregates(a, b) == aggregate_revisions(events)


def test_streaming_variant_on_dump_order():
    rng = random.Random(3)
    events = sorted(random_events(rng, 500), key=lambda e: e.page_id)
    assert {a.page_id: a for a in iter_page_aggregates(events)} == aggregate_revisions(events)


@given(st.lists(st.tuples(st.integers(1, 5), st.sampled_from("ABCD"), st.integers(0, 10**5)), max_size=60))
def test_permutation_invariance(rows):
    events = [event(p, w, d) for p, w, d in rows]
    assert aggregate_revisions(events) == aggregate_revisions(list(reversed(events)))


# -- streaming bound --------------------------------------------------------------

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["sql", "xml"])
def test_hundred_megabyte_parse_stays_small(tmp_path, kind):
    path = tmp_path / f"big.{kind}"
    helper = [sys.executable, "-m", "tests.support.stream_memory"]
    subprocess.run(helper + [f"write-{kind}", str(path), "100"], cwd=ROOT, check=True)
    assert path.stat().st_size >= 100 * 1024 * 1024
    out = subprocess.run(helper + [f"parse-{kind}", str(path)], cwd=ROOT, check=True,
                         capture_output=True, text=True).stdout
    result = json.loads(out)
    assert result["records"] > 0
    # a fixed 64 MB ceiling for a 100 MB input: memory does not follow file size
    assert result["peak_rss"] < 64 * 1024 * 1024
    assert result["peak_rss"] - result["baseline_rss"] < 16 * 1024 * 1024
