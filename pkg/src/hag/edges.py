"""Edge generation: paired random walks, half-edge matching, and classification.

Two constructions of the same multigraph law:

* **walk mode** — draw Poisson(F_root/2) attempts; each attempt picks a
  height s, a start node at depth D-s proportional to aggregated mark, and
  drops two independent mark-weighted random walks to leaves.  Exact but
  quadratic in bookkeeping; used as the small-scale oracle.
* **match mode** — every leaf x posts Poisson(q_s * F_x) half-edges at its
  height-s ancestor; half-edges at a common link node are shuffled and paired
  consecutively, one round only.  Equivalent to walk mode by Poisson thinning
  up to the odd-count loss of about one unpaired half-edge per link node, and
  fast enough for 1e8-edge builds.

Each realized pair (x, y) lands in exactly one class: loop (x = y),
agreement (same color), conflict (different colors, at least one endpoint
wild), or inadmissible (different colors, both tame; discarded but tallied).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .marks import LeafAttributes, NodeMarks
from .rng import shuffle_keys
from .tree import LatentTree

CLASS_LOOP = 0
CLASS_AGREEMENT = 1
CLASS_CONFLICT = 2
CLASS_INADMISSIBLE = 3
CLASS_NAMES = ("loop", "agreement", "conflict", "inadmissible")


def height_distribution(q1: float, depth: int) -> np.ndarray:
    """Height probabilities as an array of length D+1 with ``q[0] = 0``.

    Canonical one-parameter family: an atom q1 at height 1 and the remaining
    mass uniform over heights 2..D.  For depth 1 the only height is 1.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if not 0.0 <= q1 <= 1.0:
        raise ValueError(f"q1 must lie in [0, 1], got {q1}")
    q = np.zeros(depth + 1, dtype=np.float64)
    if depth == 1:
        q[1] = 1.0
        return q
    q[1] = q1
    q[2:] = (1.0 - q1) / (depth - 1)
    return q


def sample_heights(q: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` heights from the categorical law ``q`` (values 1..D)."""
    cum = np.cumsum(np.asarray(q, dtype=np.float64))
    s = np.searchsorted(cum, rng.random(size) * cum[-1], side="right")
    return np.minimum(s, len(q) - 1).astype(np.int64)


def sample_height(q: np.ndarray, rng: np.random.Generator) -> int:
    """Draw a single height from ``q``."""
    return int(sample_heights(q, rng, 1)[0])


def classify_pairs(x: np.ndarray, y: np.ndarray, colors: np.ndarray, wild: np.ndarray) -> np.ndarray:
    """Vectorized classification of endpoint pairs into the four classes."""
    loop = x == y
    agree = (colors[x] == colors[y]) & ~loop
    conflict = ~loop & ~agree & (wild[x] | wild[y])
    codes = np.full(len(x), CLASS_INADMISSIBLE, dtype=np.int8)
    codes[loop] = CLASS_LOOP
    codes[agree] = CLASS_AGREEMENT
    codes[conflict] = CLASS_CONFLICT
    return codes


def classify_pair(x: int, y: int, colors: np.ndarray, wild: np.ndarray) -> str:
    """Class name of a single pair: loop, agreement, conflict, or inadmissible."""
    code = classify_pairs(np.array([x]), np.array([y]), colors, wild)[0]
    return CLASS_NAMES[code]


@dataclass
class EdgeTallies:
    """Bookkeeping of one generation run.

    ``attempts`` counts examined endpoint pairs (walk attempts, or matched
    pairs in match mode) and always equals loops + agreement_multi +
    conflict_multi + inadmissible.  ``half_edges``/``unmatched`` are match
    mode extras: posted records and leftovers of odd link-node groups.
    """

    attempts: int = 0
    loops: int = 0
    agreement_multi: int = 0
    conflict_multi: int = 0
    inadmissible: int = 0
    half_edges: int = 0
    unmatched: int = 0

    def to_dict(self) -> dict:
        return {
            "attempts": self.attempts,
            "loops": self.loops,
            "agreement_multi": self.agreement_multi,
            "conflict_multi": self.conflict_multi,
            "inadmissible": self.inadmissible,
            "half_edges": self.half_edges,
            "unmatched": self.unmatched,
        }


@dataclass
class Subgraph:
    """Weighted simple-edge view of one kind of edges over the leaf vertex set.

    Edges are stored deduplicated with ``u < v`` and integer multiplicities
    ``w``; ``n_vertices`` is the full leaf count, not just touched vertices.
    """

    n_vertices: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.u)

    @property
    def multi_edge_count(self) -> int:
        return int(self.w.sum()) if len(self.w) else 0

    def vertices(self) -> np.ndarray:
        """Sorted ids of vertices incident to at least one edge."""
        return np.unique(np.concatenate([self.u, self.v])) if len(self.u) else np.empty(0, np.int64)

    def degrees(self) -> np.ndarray:
        """Distinct-neighbor degree of every vertex (length n_vertices)."""
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        if len(self.u):
            deg += np.bincount(self.u, minlength=self.n_vertices)
            deg += np.bincount(self.v, minlength=self.n_vertices)
        return deg


@dataclass
class LabelledMultigraph:
    """Generated graph: vertex attributes, both edge kinds, and run tallies."""

    n_vertices: int
    colors: np.ndarray
    wild: np.ndarray
    agreement: Subgraph
    conflict: Subgraph
    tallies: EdgeTallies = field(default_factory=EdgeTallies)


def split_graphs(g: LabelledMultigraph) -> tuple[Subgraph, Subgraph]:
    """The (agreement, conflict) edge-induced subgraphs of a generated graph.

    Weights are preserved; the two vertex sets may overlap (a vertex with one
    edge of each kind belongs to both).
    """
    return g.agreement, g.conflict


def _dedupe_edges(u: np.ndarray, v: np.ndarray, n_vertices: int) -> Subgraph:
    """Collapse endpoint pairs to canonical weighted edges (u < v)."""
    if len(u) == 0:
        e = np.empty(0, dtype=np.int64)
        return Subgraph(n_vertices, e, e.copy(), e.copy())
    lo = np.minimum(u, v).astype(np.int64)
    hi = np.maximum(u, v).astype(np.int64)
    keys, w = np.unique(lo * np.int64(n_vertices) + hi, return_counts=True)
    return Subgraph(n_vertices, keys // n_vertices, keys % n_vertices, w)


def _build_graph(
    pair_u: np.ndarray,
    pair_v: np.ndarray,
    codes: np.ndarray,
    colors: np.ndarray,
    wild: np.ndarray,
    tallies: EdgeTallies,
) -> LabelledMultigraph:
    n = len(colors)
    agree = codes == CLASS_AGREEMENT
    conflict = codes == CLASS_CONFLICT
    tallies.loops += int(np.count_nonzero(codes == CLASS_LOOP))
    tallies.agreement_multi += int(np.count_nonzero(agree))
    tallies.conflict_multi += int(np.count_nonzero(conflict))
    tallies.inadmissible += int(np.count_nonzero(codes == CLASS_INADMISSIBLE))
    return LabelledMultigraph(
        n_vertices=n,
        colors=colors,
        wild=wild,
        agreement=_dedupe_edges(pair_u[agree], pair_v[agree], n),
        conflict=_dedupe_edges(pair_u[conflict], pair_v[conflict], n),
        tallies=tallies,
    )


# ---------------------------------------------------------------------------
# walk mode
# ---------------------------------------------------------------------------


def _level_cumsums(marks: NodeMarks) -> list[np.ndarray]:
    """Per-level cumulative mark arrays with a leading 0 (for weighted lookup)."""
    return [np.concatenate(([0.0], np.cumsum(lvl))) for lvl in marks.levels]


def _step_down(
    tree: LatentTree,
    cums: list[np.ndarray],
    d: int,
    nodes: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Advance walkers from level d to level d+1, weighted by child marks."""
    cs = tree.child_start[d][nodes]
    cnt = tree.offspring[d][nodes]
    cum = cums[d + 1]
    lo = cum[cs]
    t = lo + rng.random(len(nodes)) * (cum[cs + cnt] - lo)
    idx = np.searchsorted(cum, t, side="right") - 1
    return np.clip(idx, cs, cs + cnt - 1)


def random_walk(
    tree: LatentTree,
    marks: NodeMarks,
    depth: int,
    node: int,
    rng: np.random.Generator,
) -> int:
    """Walk from ``node`` at level ``depth`` down to a leaf; leaves absorb.

    Each step picks a child with probability F_child/F_node, so the terminal
    law over the leaves below the start node is F_x/F_node.
    """
    cums = _level_cumsums(marks)
    pos = np.array([node], dtype=np.int64)
    for d in range(depth, tree.depth):
        pos = _step_down(tree, cums, d, pos, rng)
    return int(pos[0])


def _sample_start_nodes(
    cums: list[np.ndarray], level: int, k: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample k start nodes at a level, proportional to aggregated marks."""
    cum = cums[level]
    idx = np.searchsorted(cum, rng.random(k) * cum[-1], side="right") - 1
    return np.clip(idx, 0, len(cum) - 2)


def generate_walk_mode(
    tree: LatentTree,
    colors: np.ndarray,
    marks: NodeMarks,
    attrs: LeafAttributes,
    q: np.ndarray,
    rng: np.random.Generator,
    height_rng: np.random.Generator | None = None,
    return_decoupling: bool = False,
):
    """Generate the multigraph by paired random walks (small-scale oracle path).

    Draws Poisson(F_root/2) attempts; for each, a height s ~ q, a start node
    at level D-s proportional to F_v, and two independent walks down to
    leaves.  ``height_rng`` (defaults to ``rng``) supplies the attempt count
    and heights so they can come from a separate named stream.

    With ``return_decoupling=True`` additionally returns the per-height
    first-decoupling tally: an array ``dec`` of length D whose entry t counts
    attempts whose walks first landed on distinct nodes at height t (loops
    never decouple and are excluded).
    """
    if height_rng is None:
        height_rng = rng
    depth = tree.depth
    cums = _level_cumsums(marks)
    n_attempts = int(height_rng.poisson(marks.root / 2.0))
    heights = sample_heights(q, height_rng, n_attempts)
    xs = np.empty(n_attempts, dtype=np.int64)
    ys = np.empty(n_attempts, dtype=np.int64)
    dec_height = np.full(n_attempts, -1, dtype=np.int64)
    for s in range(1, depth + 1):
        sel = np.flatnonzero(heights == s)
        if len(sel) == 0:
            continue
        level = depth - s
        x = _sample_start_nodes(cums, level, len(sel), rng)
        y = x.copy()
        undecided = np.ones(len(sel), dtype=bool)
        dec = np.full(len(sel), -1, dtype=np.int64)
        for d in range(level, depth):
            x = _step_down(tree, cums, d, x, rng)
            y = _step_down(tree, cums, d, y, rng)
            split = undecided & (x != y)
            dec[split] = depth - (d + 1)
            undecided &= ~split
        xs[sel] = x
        ys[sel] = y
        dec_height[sel] = dec
    codes = classify_pairs(xs, ys, colors, attrs.wild)
    tallies = EdgeTallies(attempts=n_attempts)
    graph = _build_graph(xs, ys, codes, colors, attrs.wild, tallies)
    if return_decoupling:
        non_loop = dec_height >= 0
        dec_counts = np.bincount(dec_height[non_loop], minlength=depth)[:depth]
        return graph, dec_counts
    return graph


# ---------------------------------------------------------------------------
# match mode
# ---------------------------------------------------------------------------


@dataclass
class HalfEdges:
    """Half-edge records grouped by link-node depth.

    ``links[j]`` / ``leaves[j]`` hold the records whose link node sits at
    depth j (height s = D - j); link ids are positions within level j.
    Records are stored in canonical leaf order, so ``links[j]`` is
    non-decreasing (leaves under one ancestor are contiguous).
    """

    depth: int
    links: list[np.ndarray]
    leaves: list[np.ndarray]

    @property
    def total(self) -> int:
        return int(sum(len(a) for a in self.leaves))


def generate_half_edges(
    tree: LatentTree,
    leaf_marks: np.ndarray,
    q: np.ndarray,
    rng: np.random.Generator,
) -> HalfEdges:
    """Post Poisson(q_s * F_x) half-edges per leaf x and height s.

    Each record is (ancestor of x at height s, x), stored by link depth
    j = D - s.  The total record count has mean F_root since the q_s sum
    to one.
    """
    depth = tree.depth
    n = tree.n_leaves
    anc = tree.ancestor_table()
    id_dtype = np.int32 if n < 2**31 else np.int64
    links: list[np.ndarray] = [np.empty(0, dtype=id_dtype) for _ in range(depth)]
    leaves: list[np.ndarray] = [np.empty(0, dtype=id_dtype) for _ in range(depth)]
    leaf_ids = np.arange(n, dtype=id_dtype)
    for s in range(1, depth + 1):
        lam = q[s] * np.asarray(leaf_marks, dtype=np.float64)
        counts = rng.poisson(lam)
        j = depth - s
        leaves[j] = np.repeat(leaf_ids, counts)
        links[j] = anc[j].astype(id_dtype)[leaves[j]]
    return HalfEdges(depth=depth, links=links, leaves=leaves)


def match_half_edges(
    half_edges: HalfEdges,
    colors: np.ndarray,
    wild: np.ndarray,
    rng_or_seed,
) -> LabelledMultigraph:
    """Pair half-edges at each link node by a uniform shuffle, one round only.

    Within every link node's group the records are shuffled and consecutive
    entries paired; the shuffle is realized by sorting on stateless per-record
    hash keys (see :func:`hag.rng.shuffle_keys`), so the outcome is
    independent of record order.  A pair with equal leaf ids is a failed,
    loop-like match; an odd group leaves one record unmatched and tallied.
    Unmatched and failed records are never retried.

    ``rng_or_seed`` may be a ``numpy.random.Generator`` (one uint64 is drawn
    from it) or an integer stage seed.
    """
    if isinstance(rng_or_seed, np.random.Generator):
        stage_seed = int(rng_or_seed.integers(0, 2**64, dtype=np.uint64))
    else:
        stage_seed = int(rng_or_seed)
    depth = half_edges.depth
    tallies = EdgeTallies(half_edges=half_edges.total)
    all_u: list[np.ndarray] = []
    all_v: list[np.ndarray] = []
    for j in range(depth):
        links = half_edges.links[j]
        leaves = half_edges.leaves[j]
        m = len(links)
        if m == 0:
            continue
        s = depth - j
        # Non-decreasing link ids make group runs contiguous.
        change = np.flatnonzero(links[1:] != links[:-1]) + 1
        run_start = np.concatenate(([0], change))
        run_len = np.diff(np.concatenate((run_start, [m])))
        counter = np.arange(m, dtype=np.int64) - np.repeat(run_start, run_len)
        keys = shuffle_keys(stage_seed, s, links, counter)
        order = np.lexsort((keys, links))
        shuffled = leaves[order]
        # Runs occupy the same index ranges after the within-group sort.
        pairs = run_len // 2
        tallies.unmatched += int(np.count_nonzero(run_len % 2))
        tallies.attempts += int(pairs.sum())
        valid = counter < np.repeat(2 * pairs, run_len)
        kept = shuffled[valid]
        all_u.append(kept[0::2].astype(np.int64))
        all_v.append(kept[1::2].astype(np.int64))
    if all_u:
        u = np.concatenate(all_u)
        v = np.concatenate(all_v)
    else:
        u = np.empty(0, dtype=np.int64)
        v = np.empty(0, dtype=np.int64)
    codes = classify_pairs(u, v, colors, wild)
    return _build_graph(u, v, codes, colors, wild, tallies)


# ---------------------------------------------------------------------------
# depth-one model
# ---------------------------------------------------------------------------


@dataclass
class DepthOneResult:
    """Per-replication tallies of the depth-one generator."""

    m_e: np.ndarray
    m_a: np.ndarray
    m_c: np.ndarray
    loops: np.ndarray
    inadmissible: np.ndarray

    def means(self) -> dict:
        return {
            "m_e": float(self.m_e.mean()),
            "m_a": float(self.m_a.mean()),
            "m_c": float(self.m_c.mean()),
            "loops": float(self.loops.mean()),
            "inadmissible": float(self.inadmissible.mean()),
        }


def depth_one_generate(
    n: int,
    alpha: float,
    nu: float,
    eta2: float,
    rho: float,
    omega: float,
    rng: np.random.Generator,
    reps: int = 1,
) -> DepthOneResult:
    """Simulate the depth-one model: n leaves under one root, sampled pairs.

    Per replication: each leaf draws a mark (mean nu, variance eta2), adopts
    the root's color unless a Bernoulli(rho) switch gives it a fresh unique
    color, and is wild with probability omega.  The pair count is
    Binomial(round(sum F), alpha/2); each pair picks two leaves independently
    with replacement, proportional to mark, and is classified like any other
    attempt.

    Marks use the two-point law on {0, nu + eta2/nu} matching (nu, eta2) —
    the positive law with these moments and minimal third moment — so the
    simulated tallies track the second-order closed forms of
    :func:`hag.analytics.depth_one_expected` as closely as any moment-matched
    choice can.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 leaves, got {n}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    c = nu + eta2 / nu
    p_hi = nu * nu / (nu * nu + eta2)
    marks = np.where(rng.random((reps, n)) < p_hi, c, 0.0)
    fresh = rng.random((reps, n)) < rho
    colors = np.where(fresh, np.arange(1, n + 1, dtype=np.int64)[None, :], 0)
    wild = rng.random((reps, n)) < omega
    mass = marks.sum(axis=1)
    n_pairs = rng.binomial(np.rint(mass).astype(np.int64), alpha / 2.0)
    total = int(n_pairs.sum())
    rep_of = np.repeat(np.arange(reps, dtype=np.int64), n_pairs)
    cum = np.cumsum(marks.ravel())
    offsets = np.concatenate(([0.0], cum[n - 1 :: n][:-1]))

    def draw_endpoints() -> np.ndarray:
        t = offsets[rep_of] + rng.random(total) * mass[rep_of]
        return np.searchsorted(cum, t, side="left") - rep_of * n

    x = draw_endpoints()
    y = draw_endpoints()
    loop = x == y
    cx = colors[rep_of, x]
    cy = colors[rep_of, y]
    agree = (cx == cy) & ~loop
    conflict = ~loop & ~agree & (wild[rep_of, x] | wild[rep_of, y])
    inadm = ~loop & ~agree & ~conflict

    def tally(mask: np.ndarray) -> np.ndarray:
        return np.bincount(rep_of[mask], minlength=reps).astype(np.float64)

    loops_n = tally(loop)
    return DepthOneResult(
        m_e=n_pairs.astype(np.float64) - loops_n,
        m_a=tally(agree),
        m_c=tally(conflict),
        loops=loops_n,
        inadmissible=tally(inadm),
    )
