"""Shared fixtures and hypothesis configuration for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hag.marks import aggregate_marks, sample_leaf_attributes
from hag.tree import assign_colors, color_switch_rates, sample_tree

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def small_instance():
    """One fixed mu=3, depth=3 instance: tree, colors, leaf attributes, marks.

    Deliberately session-scoped and seed-pinned so tests that compare
    different edge constructions share identical latent state.
    """
    rng = np.random.default_rng(101)
    tree = sample_tree(3.0, 3, rng)
    rates = color_switch_rates(3.0, 3, 2.0)
    colors = assign_colors(tree, rates, np.random.default_rng(102))
    attrs = sample_leaf_attributes(tree.n_leaves, 1.5, 0.5, 0.2, 0.0, np.random.default_rng(103))
    marks = aggregate_marks(tree, attrs.marks)
    return tree, colors, attrs, marks
