"""Exception hierarchy and warning categories for the hidden-ancestor-graph engine.

Two failure families matter to callers: a target that has no solution in the
model family (infeasible, CLI exit code 1) and malformed input (CLI exit
code 2).  Everything else is a plain ``ValueError`` from argument checking.
"""

from __future__ import annotations


class HagError(Exception):
    """Base class for package-specific errors."""


class InfeasibleError(HagError):
    """The requested targets or parameters admit no solution (exit code 1)."""


class MemoryBudgetError(InfeasibleError):
    """Expected latent-tree size exceeds the configured node budget."""


class MonotonicityError(HagError):
    """An empirical monotonicity assumption of a fitting search was violated.

    The nested one-dimensional searches rely on monotone responses (label
    count in theta, agreement multi-degree in nu, sibling proportion in q1).
    These are checked during bracketing and scanning; a violation aborts the
    search with a diagnostic rather than returning a silently wrong root.
    """


class InputError(HagError):
    """Malformed input file or inconsistent configuration (exit code 2)."""


class RegimeWarning(UserWarning):
    """Analytic quantities left their intended regime (e.g. negative Gamma_t).

    Values are reported as computed, never clamped; this warning flags that
    the closed-form approximations are being used outside the parameter
    region where their error terms are small.
    """
