import math
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wikikg.analysis import (
    ALL_ARTICLES,
    QualityAssessment,
    QualityClass,
    aggregate_by_class,
    assign_quality_classes,
    describe,
    rank_top_n,
    rankdata,
    spearman,
    spearman_matrix,
)
from wikikg.errors import DegenerateVector
from wikikg.metrics import METRIC_NAMES


# -- brute-force oracle: explicit mid-ranks, then Pearson from first principles ------

def oracle_ranks(v):
    ranks = []
    for x in v:
        below = sum(1 for y in v if y < x)
        equal = sum(1 for y in v if y == x)
        ranks.append(below + (equal + 1) / 2)
    return ranks


def oracle_spearman(x, y):
    rx, ry = oracle_ranks(x), oracle_ranks(y)
    mx, my = sum(rx) / len(rx), sum(ry) / len(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    return cov / math.sqrt(vx * vy)


def test_worked_example_is_exactly_point_eight():
    assert spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == 0.8


def test_identity_and_reversal():
    x = [3.5, -1, 10, 7, 0.25]
    assert spearman(x, x) == 1.0
    assert spearman(x, [-v for v in x]) == -1.0


def test_rankdata_mid_ranks():
    assert rankdata([10, 20, 20, 5]).tolist() == [2.0, 3.5, 3.5, 1.0]


def test_thousand_tied_vectors_match_oracle():
    rng = random.Random(6)
    checked = 0
    while checked < 1000:
        n = rng.randint(2, 100)
        hi = rng.choice([2, 5, 20, 1000])
        x = [rng.randint(0, hi) for _ in range(n)]
        y = [rng.randint(0, hi) for _ in range(n)]
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        assert abs(spearman(x, y) - oracle_spearman(x, y)) <= 1e-12
        checked += 1


def test_degenerate_and_bad_input():
    with pytest.raises(DegenerateVector):
        spearman([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        spearman([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        spearman([1], [1])


ints = st.lists(st.integers(-50, 50), min_size=2, max_size=60)


@settings(max_examples=300)
@given(st.data())
def test_monotone_invariance_and_symmetry(data):
    x = data.draw(ints)
    y = data.draw(st.lists(st.integers(-50, 50), min_size=len(x), max_size=len(x)))
    if len(set(x)) < 2 or len(set(y)) < 2:
        return
    rho = spearman(x, y)
    assert abs(rho) <= 1 + 1e-12
    assert spearman(y, x) == rho
    fx = [math.exp(v / 10) for v in x]
    fy = [v ** 3 + 7 * v for v in y]
    assert abs(spearman(fx, fy) - rho) <= 1e-12
    assert abs(spearman(x, [-v for v in y]) + rho) <= 1e-12


def random_metrics(rng, n):
    return {m: np.array([rng.randint(0, 9) for _ in range(n)], dtype=np.float64) for m in METRIC_NAMES}


def test_matrix_symmetric_with_unit_diagonal():
    rng = random.Random(1)
    metrics = random_metrics(rng, 40)
    cm = spearman_matrix(metrics)
    assert np.array_equal(cm.values, cm.values.T)
    assert np.all(np.diag(cm.values) == 1.0)
    assert cm.values[0, 3] == spearman(metrics[METRIC_NAMES[0]], metrics[METRIC_NAMES[3]])


def test_constant_metric_gives_undefined_cells():
    rng = random.Random(2)
    metrics = random_metrics(rng, 30)
    metrics["talks"] = np.zeros(30)
    cm = spearman_matrix(metrics)
    t = cm.names.index("talks")
    assert np.all(np.isnan(cm.values[t])) and np.all(np.isnan(cm.values[:, t]))
    assert not np.isnan(cm.values[0, 1])


# -- quality classes ----------------------------------------------------------------

def test_an_article_rated_b_and_c_counts_in_both():
    report = Counter()
    classes = assign_quality_classes([QualityAssessment(7, "Geology", "B", "High"),
                                      QualityAssessment(7, "Soil", "C-Class", "Low"),
                                      QualityAssessment(8, "Soil", "Frobnicated", "Low")], report)
    assert classes == {7: {QualityClass.B, QualityClass.C}}
    assert report["assessments.unknown_class"] == 1
    ids = np.array([7, 9])
    metrics = {m: np.array([4.0, 10.0]) for m in METRIC_NAMES}
    cm = aggregate_by_class(ids, metrics, classes)
    assert cm.columns == (ALL_ARTICLES, "B", "C")
    assert cm.n == {ALL_ARTICLES: 2, "B": 1, "C": 1}
    assert cm.means["edits"] == {ALL_ARTICLES: 7.0, "B": 4.0, "C": 4.0}


def test_featured_mean():
    ids = np.array([1, 2, 3])
    metrics = {m: np.zeros(3) for m in METRIC_NAMES}
    metrics["edits"] = np.array([10.0, 20.0, 99.0])
    cm = aggregate_by_class(ids, metrics, {1: {QualityClass.FeaturedArticle}, 2: {QualityClass.FeaturedArticle}})
    assert cm.means["edits"]["FA"] == 15.0
    assert cm.n["FA"] == 2 and cm.n[ALL_ARTICLES] == 3


def test_no_assessments_leaves_only_all_articles():
    ids = np.array([1, 2])
    cm = aggregate_by_class(ids, {m: np.ones(2) for m in METRIC_NAMES}, {})
    assert cm.columns == (ALL_ARTICLES,)


@given(st.dictionaries(st.integers(1, 30), st.sets(st.sampled_from(list(QualityClass)), min_size=1, max_size=3),
                       max_size=30))
def test_class_sizes_conserve_rated_articles(class_map):
    ids = np.arange(1, 31)
    cm = aggregate_by_class(ids, {m: np.ones(30) for m in METRIC_NAMES}, class_map)
    total = sum(cm.n[c] for c in cm.columns if c != ALL_ARTICLES)
    assert total >= len(class_map)
    assert (total == len(class_map)) == all(len(v) == 1 for v in class_map.values())


# -- descriptive statistics -----------------------------------------------------------

def test_describe_symmetric_case():
    s = describe("x", [1, 2, 3, 4, 5])
    assert (s.q1, s.median, s.q3, s.mean) == (2.0, 3.0, 4.0, 3.0)
    assert (s.whisker_low, s.whisker_high) == (1.0, 5.0)


def test_describe_single_value_and_outlier():
    s = describe("x", [7])
    assert s.q1 == s.median == s.q3 == s.minimum == s.maximum == 7.0
    s = describe("x", [1, 2, 3, 4, 100])
    assert s.whisker_high == 4.0 and s.maximum == 100.0 and s.mean == 22.0


# -- rankings -----------------------------------------------------------------------

def test_exclusion_is_applied_before_taking_n():
    ids = np.array([1, 2, 3])
    titles = {1: "Main_Page", 2: "A", 3: "B"}
    metrics = {"views": np.array([100.0, 50.0, 40.0])}
    top = rank_top_n(ids, metrics, "views", 2, exclusions={"Main Page"}, titles=titles)
    assert [(r.rank, r.title) for r in top] == [(1, "A"), (2, "B")]


def test_ties_go_to_the_lower_page_id():
    ids = np.array([9, 4, 6])
    top = rank_top_n(ids, {"edits": np.array([5.0, 5.0, 1.0])}, "edits", 3)
    assert [r.page_id for r in top] == [4, 9, 6]


def test_excluding_everything_gives_an_empty_ranking():
    ids = np.array([1])
    assert rank_top_n(ids, {"views": np.array([3.0])}, "views", 5, {"X"}, {1: "X"}) == []
    with pytest.raises(KeyError):
        rank_top_n(ids, {"views": np.array([3.0])}, "nope", 5)


@given(st.lists(st.integers(0, 5), min_size=1, max_size=40), st.integers(1, 10), st.randoms())
def test_ranking_is_deterministic_under_reordering(values, n, rnd):
    ids = np.arange(1, len(values) + 1)
    perm = list(range(len(values)))
    rnd.shuffle(perm)
    a = rank_top_n(ids, {"v": np.array(values, float)}, "v", n)
    b = rank_top_n(ids[perm], {"v": np.array(values, float)[perm]}, "v", n)
    assert a == b
