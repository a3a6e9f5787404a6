"""Graph measurement: clustering, components, stick-breaking, frequencies."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hag.diagnostics import (
    GATED_STATS,
    average_local_clustering,
    compare_to_targets,
    component_size_fit,
    connected_component_sizes,
    frequency_bands,
    label_frequencies,
    local_clustering,
    measure_graph_stats,
    stick_breaking_delta,
    stick_breaking_expected,
    stick_breaking_sample,
)
from hag.edges import EdgeTallies, LabelledMultigraph, Subgraph
from hag.errors import InfeasibleError
from hag.fitting import TargetStats
from hag.params import HagParams
from hag.pipeline import generate_graph


def _random_subgraph(n: int, n_edges: int, seed: int) -> Subgraph:
    rng = np.random.default_rng(seed)
    pairs = set()
    while len(pairs) < n_edges:
        a, b = rng.integers(0, n, size=2)
        if a != b:
            pairs.add((min(int(a), int(b)), max(int(a), int(b))))
    arr = np.array(sorted(pairs), dtype=np.int64)
    return Subgraph(
        n_vertices=n, u=arr[:, 0], v=arr[:, 1], w=np.ones(len(arr), dtype=np.int64)
    )


def _brute_lcc(sub: Subgraph, vertex: int) -> float:
    nbrs = set(sub.v[sub.u == vertex]) | set(sub.u[sub.v == vertex])
    k = len(nbrs)
    if k < 2:
        return 0.0
    edges = set(zip(sub.u.tolist(), sub.v.tolist()))
    hits = sum(
        1
        for a, b in itertools.combinations(sorted(nbrs), 2)
        if (a, b) in edges
    )
    return hits / (k * (k - 1) / 2)


def test_local_clustering_matches_brute_force():
    for seed in range(5):
        sub = _random_subgraph(40, 120, seed)
        got = local_clustering(sub, np.arange(40))
        want = np.array([_brute_lcc(sub, x) for x in range(40)])
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_local_clustering_triangle_plus_pendant():
    # triangle 0-1-2 plus pendant edge 2-3: lcc = (1, 1, 1/3, 0)
    sub = Subgraph(
        n_vertices=4,
        u=np.array([0, 0, 1, 2]),
        v=np.array([1, 2, 2, 3]),
        w=np.ones(4, dtype=np.int64),
    )
    np.testing.assert_allclose(
        local_clustering(sub, np.arange(4)), [1.0, 1.0, 1 / 3, 0.0]
    )
    assert average_local_clustering(sub) == pytest.approx((1 + 1 + 1 / 3 + 0) / 4)


def test_average_local_clustering_empty():
    sub = Subgraph(
        n_vertices=5,
        u=np.empty(0, dtype=np.int64),
        v=np.empty(0, dtype=np.int64),
        w=np.empty(0, dtype=np.int64),
    )
    assert average_local_clustering(sub) == 0.0


@pytest.fixture(scope="module")
def generated_graph():
    # ~1.7e4-vertex graph from the fitted operating point at depth 3
    params = HagParams(
        mu=26.0,
        depth=3,
        theta=3.62,
        q1=0.82,
        mu_o=3.7933779710790367,
        sigma_o=0.4951229194724743,
        omega=0.043,
    )
    return generate_graph(params, master_seed=1).graph


def test_sampled_alcc_converges_to_exact(generated_graph):
    exact = average_local_clustering(generated_graph.agreement)
    sampled = average_local_clustering(
        generated_graph.agreement,
        sample_size=100_000,
        rng=np.random.default_rng(0),
    )
    assert abs(sampled - exact) <= 0.01


def test_measure_graph_stats_on_generated(generated_graph):
    stats = measure_graph_stats(generated_graph)
    assert 0 < stats.vertices <= generated_graph.n_vertices
    assert stats.labels > 1
    assert stats.mean_agreement_degree == pytest.approx(
        2.0 * generated_graph.agreement.n_edges / stats.vertices
    )
    assert not stats.alcc_sampled
    t = stats.as_targets()
    assert isinstance(t, TargetStats)
    dev = compare_to_targets(stats, t)
    for key in GATED_STATS:
        assert dev[key] == pytest.approx(0.0, abs=1e-12)


def test_measure_graph_stats_hand_graph():
    # 6 vertices; agreement: triangle 0-1-2 and edge 3-4; conflict: 2-3;
    # vertex 5 is isolated and must not count as active.
    agree = Subgraph(
        n_vertices=6,
        u=np.array([0, 0, 1, 3]),
        v=np.array([1, 2, 2, 4]),
        w=np.ones(4, dtype=np.int64),
    )
    conflict = Subgraph(
        n_vertices=6,
        u=np.array([2]),
        v=np.array([3]),
        w=np.array([1], dtype=np.int64),
    )
    colors = np.array([0, 0, 0, 1, 1, 2])
    wild = np.array([False, False, False, True, False, False])
    graph = LabelledMultigraph(
        n_vertices=6,
        colors=colors,
        wild=wild,
        agreement=agree,
        conflict=conflict,
        tallies=EdgeTallies(),
    )
    stats = measure_graph_stats(graph)
    assert stats.vertices == 5
    assert stats.labels == 2  # colors 0 and 1 among active vertices
    assert stats.mean_agreement_degree == pytest.approx(2 * 4 / 5)
    assert stats.mean_conflict_degree == pytest.approx(2 * 1 / 5)
    # lcc: 1, 1, 1 for the triangle, 0 for 3, 4 (degree < 2); only
    # agreement-degree >= 1 vertices enter the mean
    assert stats.alcc == pytest.approx(3 / 5)
    labels, counts = label_frequencies(graph)
    np.testing.assert_array_equal(labels, [0, 1])
    np.testing.assert_array_equal(counts, [3, 2])


def test_connected_component_sizes_partition(generated_graph):
    sizes = connected_component_sizes(generated_graph.agreement)
    assert sizes.sum() == len(generated_graph.agreement.vertices())
    assert (np.diff(sizes) <= 0).all()


def test_connected_component_sizes_edge_order_invariant():
    sub = _random_subgraph(200, 300, 3)
    sizes = connected_component_sizes(sub)
    rng = np.random.default_rng(0)
    perm = rng.permutation(sub.n_edges)
    shuffled = Subgraph(
        n_vertices=200, u=sub.u[perm], v=sub.v[perm], w=sub.w[perm]
    )
    np.testing.assert_array_equal(sizes, connected_component_sizes(shuffled))
    # sizes partition the touched vertex set
    assert sizes.sum() == len(sub.vertices())


def test_connected_component_sizes_hand_case():
    # components {0,1,2} and {4,5}
    sub = Subgraph(
        n_vertices=6,
        u=np.array([0, 1, 4]),
        v=np.array([1, 2, 5]),
        w=np.ones(3, dtype=np.int64),
    )
    np.testing.assert_array_equal(connected_component_sizes(sub), [3, 2])


def test_stick_breaking_delta_frozen():
    assert stick_breaking_delta(0.5, 1) == pytest.approx(1.0, rel=1e-12)
    assert stick_breaking_delta(0.75, 1) == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert stick_breaking_delta(0.7626953125, 5) == pytest.approx(3.0, rel=1e-12)


def test_stick_breaking_expected_frozen():
    _, top1 = stick_breaking_expected(1.0, 1)
    assert top1 == pytest.approx(0.5, rel=1e-12)
    _, top2 = stick_breaking_expected(1.0, 2)
    assert top2 == pytest.approx(0.75, rel=1e-12)
    means, top5 = stick_breaking_expected(3.0, 5)
    assert top5 == pytest.approx(0.7626953125, rel=1e-12)
    assert means.sum() == pytest.approx(top5, rel=1e-12)
    assert (np.diff(means) < 0).all()


@given(st.floats(min_value=0.05, max_value=0.95), st.integers(min_value=1, max_value=10))
def test_stick_breaking_delta_inverts_expected(p, m):
    delta = stick_breaking_delta(p, m)
    _, top = stick_breaking_expected(delta, m)
    assert top == pytest.approx(p, rel=1e-9)


def test_stick_breaking_sampler_matches_expectation():
    rng = np.random.default_rng(5)
    n = 10_000
    for delta, m in ((1.0, 1), (1.0, 2), (3.0, 5)):
        _, expect = stick_breaking_expected(delta, m)
        tops = np.array([stick_breaking_sample(delta, m, rng).sum() for _ in range(n)])
        se = tops.std(ddof=1) / math.sqrt(n)
        assert abs(tops.mean() - expect) <= 3 * se, (delta, m)


def test_stick_breaking_sample_is_descending_and_submass():
    rng = np.random.default_rng(8)
    s = stick_breaking_sample(2.0, 6, rng)
    assert (np.diff(s) <= 0).all()
    assert 0 < s.sum() < 1.0


def test_component_size_fit(generated_graph):
    fit = component_size_fit(generated_graph.agreement, m=3)
    assert fit.m == 3
    assert 0 < fit.top_share <= 1
    assert fit.delta > 0
    _, top = stick_breaking_expected(fit.delta, 3)
    assert top == pytest.approx(fit.top_share, rel=1e-9)
    d = fit.to_dict()
    assert d["m"] == 3


def test_component_size_fit_needs_enough_components():
    sub = Subgraph(
        n_vertices=4,
        u=np.array([0, 2]),
        v=np.array([1, 3]),
        w=np.ones(2, dtype=np.int64),
    )
    with pytest.raises(InfeasibleError):
        component_size_fit(sub, m=2)
    fit = component_size_fit(sub, m=1)
    assert fit.top_share == pytest.approx(0.5)


def test_frequency_bands_structure():
    counts = np.array([1000, 900, 800, 20, 18, 15, 2, 1, 1])
    bands = frequency_bands(counts, n_bands=3)
    assert len(bands) == 3
    assert sum(b["size"] for b in bands) == len(counts)
    assert bands[0]["max"] == 1000
    assert bands[0]["min"] >= bands[1]["max"]
    assert frequency_bands(np.array([]), 3) == []
