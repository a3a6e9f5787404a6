"""Edge construction: heights, classification, walks, matching, depth one."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hag.analytics import depth_one_expected
from hag.edges import (
    CLASS_AGREEMENT,
    CLASS_CONFLICT,
    CLASS_INADMISSIBLE,
    CLASS_LOOP,
    classify_pair,
    classify_pairs,
    depth_one_generate,
    generate_half_edges,
    generate_walk_mode,
    height_distribution,
    match_half_edges,
    random_walk,
    sample_heights,
)


# ---------------------------------------------------------------------------
# height distribution
# ---------------------------------------------------------------------------


def test_height_distribution_shape_and_mass():
    q = height_distribution(0.82, 4)
    assert q.shape == (5,)
    assert q[0] == 0.0
    assert q[1] == pytest.approx(0.82)
    np.testing.assert_allclose(q[2:], (1 - 0.82) / 3)
    assert q.sum() == pytest.approx(1.0, rel=1e-12)


def test_height_distribution_depth_one():
    np.testing.assert_allclose(height_distribution(0.3, 1), [0.0, 1.0])


@given(st.floats(min_value=0.0, max_value=1.0), st.integers(min_value=1, max_value=9))
def test_height_distribution_is_distribution(q1, depth):
    q = height_distribution(q1, depth)
    assert len(q) == depth + 1
    assert (q >= 0).all()
    assert q.sum() == pytest.approx(1.0, rel=1e-9)


def test_height_distribution_rejects_bad_q1():
    with pytest.raises(ValueError):
        height_distribution(1.5, 3)
    with pytest.raises(ValueError):
        height_distribution(-0.1, 3)


def test_sample_heights_frequencies():
    q = height_distribution(0.6, 3)
    rng = np.random.default_rng(123)
    draws = sample_heights(q, rng, 200_000)
    assert draws.min() >= 1 and draws.max() <= 3
    freq = np.bincount(draws, minlength=4)[1:] / len(draws)
    np.testing.assert_allclose(freq, q[1:], atol=0.01)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def test_classification_cases():
    colors = np.array([0, 0, 1, 1])
    wild = np.array([False, True, False, True])
    assert classify_pair(2, 2, colors, wild) == "loop"
    assert classify_pair(0, 1, colors, wild) == "agreement"
    assert classify_pair(2, 3, colors, wild) == "agreement"
    assert classify_pair(1, 2, colors, wild) == "conflict"  # 1 is wild
    assert classify_pair(0, 3, colors, wild) == "conflict"  # 3 is wild
    assert classify_pair(0, 2, colors, wild) == "inadmissible"  # neither wild


@given(st.data())
def test_classify_pairs_exclusive_and_exhaustive(data):
    n = data.draw(st.integers(min_value=2, max_value=40))
    size = data.draw(st.integers(min_value=1, max_value=200))
    seed = data.draw(st.integers(min_value=0, max_value=2**31))
    rng = np.random.default_rng(seed)
    colors = rng.integers(0, 5, size=n)
    wild = rng.random(n) < 0.3
    x = rng.integers(0, n, size=size)
    y = rng.integers(0, n, size=size)
    codes = classify_pairs(x, y, colors, wild)
    assert codes.shape == (size,)
    assert set(np.unique(codes)) <= {
        CLASS_LOOP,
        CLASS_AGREEMENT,
        CLASS_CONFLICT,
        CLASS_INADMISSIBLE,
    }
    # each pair lands in exactly one class, matching the scalar rule
    for i in range(size):
        name = classify_pair(int(x[i]), int(y[i]), colors, wild)
        got = {0: "loop", 1: "agreement", 2: "conflict", 3: "inadmissible"}[int(codes[i])]
        assert got == name


# ---------------------------------------------------------------------------
# walk mode
# ---------------------------------------------------------------------------


def test_walk_tallies_are_exhaustive(small_instance):
    tree, colors, attrs, marks = small_instance
    q = height_distribution(0.5, tree.depth)
    graph = generate_walk_mode(
        tree, colors.leaf_colors, marks, attrs, q, np.random.default_rng(42)
    )
    t = graph.tallies
    assert t.attempts == t.loops + t.agreement_multi + t.conflict_multi + t.inadmissible
    assert graph.agreement.multi_edge_count == t.agreement_multi
    assert graph.conflict.multi_edge_count == t.conflict_multi
    assert graph.n_vertices == tree.n_leaves


def test_walk_decoupling_counts(small_instance):
    tree, colors, attrs, marks = small_instance
    q = height_distribution(0.4, tree.depth)
    graph, dec = generate_walk_mode(
        tree,
        colors.leaf_colors,
        marks,
        attrs,
        q,
        np.random.default_rng(7),
        return_decoupling=True,
    )
    assert dec.shape == (tree.depth,)
    assert dec.sum() == graph.tallies.attempts - graph.tallies.loops


def test_random_walk_stays_in_subtree(small_instance):
    tree, _, _, marks = small_instance
    rng = np.random.default_rng(3)
    anc = tree.ancestor_table()
    for start in range(int(tree.level_sizes[1])):
        leaf = random_walk(tree, marks, 1, start, rng)
        assert anc[1][leaf] == start


def test_no_conflicts_between_siblings(small_instance):
    # The last switch level has rate 0, so sibling leaves share a color and
    # a conflict edge can never join two leaves of the same parent.
    tree, colors, attrs, marks = small_instance
    q = height_distribution(0.5, tree.depth)
    parent = tree.parent[tree.depth]
    for seed in range(5):
        graph = generate_walk_mode(
            tree, colors.leaf_colors, marks, attrs, q, np.random.default_rng(seed)
        )
        if graph.conflict.n_edges:
            assert (parent[graph.conflict.u] != parent[graph.conflict.v]).all()
    half = generate_half_edges(tree, attrs.marks, q, np.random.default_rng(11))
    graph = match_half_edges(half, colors.leaf_colors, attrs.wild, 12)
    if graph.conflict.n_edges:
        assert (parent[graph.conflict.u] != parent[graph.conflict.v]).all()


def test_subgraph_edges_are_canonical(small_instance):
    tree, colors, attrs, marks = small_instance
    q = height_distribution(0.5, tree.depth)
    graph = generate_walk_mode(
        tree, colors.leaf_colors, marks, attrs, q, np.random.default_rng(1)
    )
    for sub in (graph.agreement, graph.conflict):
        if sub.n_edges == 0:
            continue
        assert (sub.u < sub.v).all()  # no self-loops, canonical order
        keys = sub.u.astype(np.int64) * tree.n_leaves + sub.v
        assert (np.diff(keys) > 0).all()  # strictly sorted = deduplicated
        assert (sub.w >= 1).all()


# ---------------------------------------------------------------------------
# match mode
# ---------------------------------------------------------------------------


def test_half_edge_counts_poisson_mean(small_instance):
    tree, _, attrs, marks = small_instance
    q = height_distribution(0.7, tree.depth)
    totals = []
    for seed in range(300):
        half = generate_half_edges(tree, attrs.marks, q, np.random.default_rng(seed))
        totals.append(half.total)
    mean = np.mean(totals)
    se = np.std(totals, ddof=1) / math.sqrt(len(totals))
    assert abs(mean - marks.root) <= 3 * se


def test_half_edge_links_are_ancestors(small_instance):
    tree, _, attrs, _ = small_instance
    q = height_distribution(0.5, tree.depth)
    half = generate_half_edges(tree, attrs.marks, q, np.random.default_rng(2))
    anc = tree.ancestor_table()
    for j in range(tree.depth):
        np.testing.assert_array_equal(half.links[j], anc[j][half.leaves[j]])


def test_match_determinism_and_seed_sensitivity(small_instance):
    tree, colors, attrs, _ = small_instance
    q = height_distribution(0.5, tree.depth)
    half = generate_half_edges(tree, attrs.marks, q, np.random.default_rng(5))
    g1 = match_half_edges(half, colors.leaf_colors, attrs.wild, 77)
    g2 = match_half_edges(half, colors.leaf_colors, attrs.wild, 77)
    np.testing.assert_array_equal(g1.agreement.u, g2.agreement.u)
    np.testing.assert_array_equal(g1.agreement.v, g2.agreement.v)
    np.testing.assert_array_equal(g1.agreement.w, g2.agreement.w)
    assert g1.tallies.to_dict() == g2.tallies.to_dict()
    g3 = match_half_edges(half, colors.leaf_colors, attrs.wild, 78)
    assert g1.tallies.to_dict() != g3.tallies.to_dict() or not np.array_equal(
        g1.agreement.u, g3.agreement.u
    )


def test_match_accounting(small_instance):
    tree, colors, attrs, _ = small_instance
    q = height_distribution(0.5, tree.depth)
    half = generate_half_edges(tree, attrs.marks, q, np.random.default_rng(6))
    graph = match_half_edges(half, colors.leaf_colors, attrs.wild, 9)
    t = graph.tallies
    assert t.half_edges == half.total
    assert 2 * t.attempts + t.unmatched == t.half_edges
    assert t.attempts == t.loops + t.agreement_multi + t.conflict_multi + t.inadmissible
    # at most one leftover per link node
    n_links = sum(len(np.unique(half.links[j])) for j in range(tree.depth))
    assert t.unmatched <= n_links


def test_match_pairs_only_within_links(small_instance):
    # Every matched pair must share the link node's subtree: both endpoints
    # have the same ancestor at some depth j < D.
    tree, colors, attrs, _ = small_instance
    q = height_distribution(0.5, tree.depth)
    half = generate_half_edges(tree, attrs.marks, q, np.random.default_rng(8))
    graph = match_half_edges(half, colors.leaf_colors, attrs.wild, 10)
    anc = tree.ancestor_table()
    for sub in (graph.agreement, graph.conflict):
        if sub.n_edges == 0:
            continue
        shares = np.zeros(sub.n_edges, dtype=bool)
        for j in range(tree.depth):
            shares |= anc[j][sub.u] == anc[j][sub.v]
        assert shares.all()


def test_walk_and_match_agree_on_shared_instance(small_instance):
    # Same latent tree, colors, and marks: the two constructions must
    # produce the same per-class attempt fractions, up to matching's odd
    # leftovers (which only shrink the attempt count) and Monte Carlo noise.
    tree, colors, attrs, marks = small_instance
    q = height_distribution(0.5, tree.depth)
    reps = 400
    frac_w = np.zeros((reps, 3))
    frac_m = np.zeros((reps, 3))
    for i in range(reps):
        gw = generate_walk_mode(
            tree, colors.leaf_colors, marks, attrs, q, np.random.default_rng(1000 + i)
        )
        tw = gw.tallies
        if tw.attempts:
            frac_w[i] = (
                np.array([tw.agreement_multi, tw.conflict_multi, tw.loops]) / tw.attempts
            )
        half = generate_half_edges(tree, attrs.marks, q, np.random.default_rng(5000 + i))
        gm = match_half_edges(half, colors.leaf_colors, attrs.wild, 9000 + i)
        tm = gm.tallies
        if tm.attempts:
            frac_m[i] = (
                np.array([tm.agreement_multi, tm.conflict_multi, tm.loops]) / tm.attempts
            )
    for k, name in enumerate(("agreement", "conflict", "loop")):
        mw, mm = frac_w[:, k].mean(), frac_m[:, k].mean()
        se = math.sqrt(
            frac_w[:, k].var(ddof=1) / reps + frac_m[:, k].var(ddof=1) / reps
        )
        assert abs(mw - mm) <= 3 * se + 0.01, (name, mw, mm, se)


# ---------------------------------------------------------------------------
# depth-one model
# ---------------------------------------------------------------------------


def test_depth_one_result_shapes():
    rng = np.random.default_rng(0)
    sim = depth_one_generate(25, 0.8, 14.0, 3.6 * 14.0**2, 0.1, 0.08, rng, reps=50)
    for arr in (sim.m_e, sim.m_a, sim.m_c, sim.loops, sim.inadmissible):
        assert arr.shape == (50,)
    means = sim.means()
    assert set(means) == {"m_e", "m_a", "m_c", "loops", "inadmissible"}


def test_depth_one_accounting():
    rng = np.random.default_rng(1)
    sim = depth_one_generate(25, 0.8, 14.0, 3.6 * 14.0**2, 0.1, 0.08, rng, reps=200)
    # per replication: edges = agreement + conflict + inadmissible
    np.testing.assert_array_equal(sim.m_e, sim.m_a + sim.m_c + sim.inadmissible)


def test_depth_one_zero_switch_rate_means_all_agreement():
    rng = np.random.default_rng(2)
    sim = depth_one_generate(25, 0.8, 14.0, 100.0, 0.0, 0.5, rng, reps=100)
    np.testing.assert_array_equal(sim.m_c, np.zeros(100))
    np.testing.assert_array_equal(sim.inadmissible, np.zeros(100))
    np.testing.assert_array_equal(sim.m_a, sim.m_e)


def test_depth_one_means_track_closed_forms():
    n, alpha, nu, eta2, rho, omega = 25, 0.8, 14.0, 3.6 * 14.0**2, 0.1, 0.08
    rng = np.random.default_rng(33)
    reps = 3000
    sim = depth_one_generate(n, alpha, nu, eta2, rho, omega, rng, reps=reps)
    m_e, m_a, m_c, _ = depth_one_expected(n, alpha, nu, eta2, rho, omega)
    for arr, want in ((sim.m_e, m_e), (sim.m_a, m_a), (sim.m_c, m_c)):
        se = arr.std(ddof=1) / math.sqrt(reps)
        assert abs(arr.mean() - want) <= 4 * se, (want, arr.mean(), se)
