"""Latent Galton-Watson tree: sampling, color inheritance, and label-count formulas.

The tree is stored depth-stratified: one contiguous block of nodes per depth,
numbered breadth-first (root = global id 0).  Within a level, the children of
consecutive parents occupy consecutive positions, so every per-level operation
is a flat array pass and the leaves below any internal node form a contiguous
id range — a property the edge generator leans on heavily.

Offspring counts are 1 + Poisson(mu - 1), so every non-leaf node has at least
one child and all leaves sit at depth exactly D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MemoryBudgetError

#: Default ceiling on the expected node count of a sampled tree.
DEFAULT_NODE_BUDGET = 2 * 10**8


def expected_node_count(mu: float, depth: int) -> float:
    """Expected total node count (mu**(D+1) - 1)/(mu - 1) of the latent tree."""
    return (mu ** (depth + 1) - 1.0) / (mu - 1.0)


@dataclass
class LatentTree:
    """Depth-stratified rooted tree with contiguous per-level node blocks.

    Attributes
    ----------
    depth:
        Tree depth D; leaves are level D.
    level_sizes:
        int64 array of shape (D+1,): number of nodes per level.
    offspring:
        For each level d < D, an int64 array of per-node child counts.
    child_start:
        For each level d < D, the exclusive cumulative sum of ``offspring[d]``:
        children of node i at level d are positions
        ``child_start[d][i] : child_start[d][i] + offspring[d][i]`` of level d+1.
    parent:
        For each level d >= 1, an int32/int64 array mapping a node's position
        to its parent's position in level d-1.  ``parent[0]`` is ``[-1]``.
    """

    depth: int
    level_sizes: np.ndarray
    offspring: list[np.ndarray]
    child_start: list[np.ndarray]
    parent: list[np.ndarray]

    @property
    def n_leaves(self) -> int:
        return int(self.level_sizes[self.depth])

    @property
    def n_nodes(self) -> int:
        return int(self.level_sizes.sum())

    @property
    def level_offsets(self) -> np.ndarray:
        """Global-id offset of each level: level d occupies [off[d], off[d+1])."""
        return np.concatenate(([0], np.cumsum(self.level_sizes)))

    def ancestor_table(self) -> list[np.ndarray]:
        """Per-depth ancestor map for leaves.

        Returns a list ``anc`` of length D+1 where ``anc[d][x]`` is the
        position within level d of the depth-d ancestor of leaf x
        (``anc[D]`` is the identity).
        """
        anc = [np.empty(0)] * (self.depth + 1)
        anc[self.depth] = np.arange(self.n_leaves, dtype=np.int64)
        for d in range(self.depth - 1, -1, -1):
            anc[d] = self.parent[d + 1][anc[d + 1]]
        return anc


def sample_tree(
    mu: float,
    depth: int,
    rng: np.random.Generator,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> LatentTree:
    """Sample a depth-D tree with i.i.d. 1 + Poisson(mu - 1) offspring counts.

    Refuses to start when the expected node count exceeds ``node_budget``,
    reporting the computed expectation, so an over-ambitious configuration
    fails fast instead of exhausting memory mid-build.
    """
    if not mu > 1.0:
        raise ValueError(f"mu must exceed 1, got {mu}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    expected = expected_node_count(mu, depth)
    if expected > node_budget:
        raise MemoryBudgetError(
            f"expected node count {expected:.3g} exceeds the node budget {node_budget:.3g}; "
            "lower depth/mu or raise the budget"
        )
    sizes = np.zeros(depth + 1, dtype=np.int64)
    sizes[0] = 1
    offspring: list[np.ndarray] = []
    child_start: list[np.ndarray] = []
    parent: list[np.ndarray] = [np.array([-1], dtype=np.int64)]
    for d in range(depth):
        counts = 1 + rng.poisson(mu - 1.0, size=int(sizes[d])).astype(np.int64)
        starts = np.concatenate(([0], np.cumsum(counts[:-1])))
        sizes[d + 1] = counts.sum()
        offspring.append(counts)
        child_start.append(starts)
        parent.append(np.repeat(np.arange(sizes[d], dtype=np.int64), counts))
    return LatentTree(depth=depth, level_sizes=sizes, offspring=offspring,
                      child_start=child_start, parent=parent)


def color_switch_rates(mu: float, depth: int, theta: float) -> np.ndarray:
    """Depth-dependent color switch rates rho_1..rho_D (array of length D).

    ``rates[i]`` is the switch rate at depth i+1.  The closed form makes
    rho_1 = 1 identically (every child of the root starts a fresh color) and
    rho_D = 0 (leaves always inherit), with rates strictly decreasing in
    between for theta > 1.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if not mu > 1.0:
        raise ValueError(f"mu must exceed 1, got {mu}")
    if not theta > 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    rates = np.zeros(depth, dtype=np.float64)
    for d in range(1, depth):
        rates[d - 1] = theta * (mu - 1.0) / ((theta - 1.0) * (mu - 1.0) + mu**d - 1.0)
    # rho_D = 0 stays from initialization (leaves inherit their parent's color).
    if depth == 1:
        rates[0] = 0.0
    else:
        rates[0] = 1.0  # exact; the formula reduces algebraically to 1 at d=1
    return rates


@dataclass
class ColorAssignment:
    """Per-level color ids (dense integers in creation order) for one tree."""

    colors: list[np.ndarray]
    n_colors: int
    rates: np.ndarray = field(repr=False, default=None)

    @property
    def leaf_colors(self) -> np.ndarray:
        return self.colors[-1]


def assign_colors(tree: LatentTree, rates: np.ndarray, rng: np.random.Generator) -> ColorAssignment:
    """Assign colors top-down by depth-dependent Bernoulli inheritance.

    The root is color 0.  Each level-d node starts a fresh color with
    probability ``rates[d-1]`` and otherwise inherits its parent's color.
    Fresh colors get consecutive ids in breadth-first creation order (depth,
    then node index), so the assignment is reproducible given the stream.
    """
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape != (tree.depth,):
        raise ValueError(f"rates must have length D={tree.depth}, got shape {rates.shape}")
    colors: list[np.ndarray] = [np.zeros(1, dtype=np.int64)]
    next_color = 1
    for d in range(1, tree.depth + 1):
        inherited = colors[d - 1][tree.parent[d]]
        rho = rates[d - 1]
        if rho <= 0.0:
            colors.append(inherited)
            continue
        fresh = rng.random(int(tree.level_sizes[d])) < rho
        ids = next_color - 1 + np.cumsum(fresh)
        colors.append(np.where(fresh, ids, inherited))
        next_color += int(fresh.sum())
    return ColorAssignment(colors=colors, n_colors=next_color, rates=rates)


def expected_label_count(mu: float, depth: int, theta: float) -> float:
    """Closed-form expected number of distinct colors in the tree.

    Equals 1 (the root's color) plus the expected number of fresh-color
    events over depths 1..D-1; leaves never innovate.  For theta*(mu-1) > 1
    the value is bounded above by 1 + theta*(mu-1)*(D-1).
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if not mu > 1.0:
        raise ValueError(f"mu must exceed 1, got {mu}")
    if not theta > 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    total = 1.0
    for d in range(1, depth):
        total += theta * (mu - 1.0) / (1.0 + (theta * mu - theta - mu) * mu ** (-d))
    return total


def expected_color_leaf_count(d: int, rates: np.ndarray, mu: float, depth: int) -> float:
    """Expected number of leaves carrying one color born at depth d.

    nu_d = mu**(D-d) * prod_{t=d+1..D} (1 - rho_t); in particular nu_D = 1.
    Summing mu**d * rho_d * nu_d over all depths recovers the expected leaf
    count mu**D because rho_1 = 1 routes every leaf's color to depth >= 1.
    """
    if not 1 <= d <= depth:
        raise ValueError(f"d must lie in 1..{depth}, got {d}")
    rates = np.asarray(rates, dtype=np.float64)
    surv = math.prod(1.0 - rates[t - 1] for t in range(d + 1, depth + 1))
    return mu ** (depth - d) * surv
