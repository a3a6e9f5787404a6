"""hag — hidden-ancestor generation of sparse assortatively labelled multigraphs.

A latent Galton-Watson tree carries colors (labels) that refresh on the way
down and lognormal leaf marks that aggregate on the way up; edges arise from
mark-weighted paired random walks, or equivalently half-edge matching, and
split into an agreement graph (same label) and a conflict graph (different
labels, at least one wild endpoint).  The package fits the generator's
parameters from six observable statistics, generates at scale, predicts the
observables in closed form, and measures them back from realized graphs.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .analytics import (
    AnalyticProfile,
    analytic_profile,
    branching_moments,
    collision_mean,
    color_coeffs,
    corollary_edge_counts,
    decoupling_profile,
    degree_and_clustering,
    depth_one_expected,
    expected_edge_counts,
    h_matrix,
)
from .diagnostics import (
    ComponentFit,
    GraphStats,
    average_local_clustering,
    compare_to_targets,
    component_size_fit,
    connected_component_sizes,
    frequency_bands,
    label_frequencies,
    measure_graph_stats,
    stick_breaking_delta,
    stick_breaking_expected,
    stick_breaking_sample,
)
from .edges import (
    DepthOneResult,
    EdgeTallies,
    HalfEdges,
    LabelledMultigraph,
    Subgraph,
    classify_pair,
    classify_pairs,
    depth_one_generate,
    generate_half_edges,
    generate_walk_mode,
    height_distribution,
    match_half_edges,
    random_walk,
    sample_height,
    sample_heights,
    split_graphs,
)
from .errors import (
    HagError,
    InfeasibleError,
    InputError,
    MemoryBudgetError,
    MonotonicityError,
    RegimeWarning,
)
from .fitting import (
    FitCurve,
    FittedParams,
    MleStats,
    TargetStats,
    choose_depth,
    constrained_mle,
    cube_root_derive,
    fit_omega,
    fit_pipeline,
    fit_q1_nu,
    fit_theta,
    scaled_label_count,
)
from .marks import (
    LeafAttributes,
    NodeMarks,
    aggregate_marks,
    lognormal_from_moments,
    lognormal_moments,
    sample_leaf_attributes,
)
from .params import HagParams
from .pipeline import GenerationResult, generate_graph, profile_for_params
from .rng import ENGINE, STREAMS, shuffle_keys, splitmix64, stream_seed, substream
from .tree import (
    ColorAssignment,
    LatentTree,
    assign_colors,
    color_switch_rates,
    expected_color_leaf_count,
    expected_label_count,
    expected_node_count,
    sample_tree,
)

__all__ = [name for name in dir() if not name.startswith("_")]
