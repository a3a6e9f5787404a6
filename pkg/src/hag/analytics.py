"""Closed-form expectations for the hidden-ancestor-graph model.

Central object: a pair of random walks dropped from a common start node at
height s decouples (first lands on distinct children) at some height t < s.
The matrix ``h[s, t]`` scales the expected number of start-height-s walk
pairs still coupled at height t; differencing over t and mixing over the
height distribution gives the first-decoupling profile Gamma_t, from which
all edge-count, degree, and clustering estimates follow, together with the
color-agreement coefficients A_t and conflict coefficients C_t.

Index conventions used throughout the package:

* ``q`` is an array of length D+1 with ``q[0] = 0``; ``q[s]`` is the
  probability of height s for s = 1..D.
* ``rates`` has length D; ``rates[i]`` is the color switch rate at depth i+1.
* ``gamma``, ``a_coeff``, ``c_coeff`` have length D, indexed by t = 0..D-1.

All functions are pure: same inputs give bit-identical outputs.  Sums feeding
tight identity checks use exact (`math.fsum`) accumulation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RegimeWarning


@dataclass(frozen=True)
class BranchingMoments:
    """Per-generation moments of the branching process, t = 0..D.

    ``mean[t]`` = mu**t, ``var[t]`` = zeta1sq*(mu**t - 1)*mu**(t-1)/(mu - 1),
    and ``recip[t]`` approximates E[1/xi_t] by the two-term expansion
    mu**-t + mu**-t-1 (exact value delta_0 = 1 at t = 0).  The expansion
    error is O(mu**(-t-2)), which the consumers' tolerances absorb.
    """

    mu: float
    zeta1sq: float
    depth: int
    mean: np.ndarray
    var: np.ndarray
    recip: np.ndarray


def branching_moments(mu: float, zeta1sq: float, depth: int) -> BranchingMoments:
    """Mean, variance, and reciprocal-mean profile of generation sizes."""
    if not mu > 1.0:
        raise ValueError(f"mu must exceed 1, got {mu}")
    t = np.arange(depth + 1, dtype=np.float64)
    mean = mu**t
    var = zeta1sq * (mu**t - 1.0) * mu ** (t - 1.0) / (mu - 1.0)
    recip = mu**-t + mu ** -(t + 1.0)
    recip[0] = 1.0
    var[0] = 0.0
    return BranchingMoments(mu=mu, zeta1sq=zeta1sq, depth=depth, mean=mean, var=var, recip=recip)


def h_matrix(nu: float, eta2: float, mu: float, zeta1sq: float, depth: int) -> np.ndarray:
    """Coupled-walk-pair scaling matrix h[s, t] for 0 <= t <= s <= D.

    h[s, t] = (nu*mu**(t-s) + (1 - delta_{s-t})*(a + b*(mu**t - 1))*mu**(-s))/2
    with a = eta2/nu and b = nu*zeta1sq/(mu*(mu - 1)); the diagonal is
    exactly nu/2 because delta_0 = 1.  Entries above the diagonal are unused
    and left at 0.  A non-monotone row (h[s, t+1] < h[s, t]) indicates the
    parameters left the regime where the approximation is trustworthy and
    raises a :class:`RegimeWarning`.
    """
    if not nu > 0.0:
        raise ValueError(f"nu must be positive, got {nu}")
    moments = branching_moments(mu, zeta1sq, depth)
    a = eta2 / nu
    b = nu * zeta1sq / (mu * (mu - 1.0))
    h = np.zeros((depth + 1, depth + 1), dtype=np.float64)
    for s in range(depth + 1):
        for t in range(s + 1):
            h[s, t] = 0.5 * (
                nu * mu ** (t - s)
                + (1.0 - moments.recip[s - t]) * (a + b * (mu**t - 1.0)) * mu ** (-s)
            )
    rows_bad = [s for s in range(1, depth + 1) if np.any(np.diff(h[s, : s + 1]) < -1e-12 * nu)]
    if rows_bad:
        warnings.warn(
            f"h matrix rows {rows_bad} are not monotone in t; "
            "analytic estimates are outside their trusted regime",
            RegimeWarning,
            stacklevel=2,
        )
    return h


def decoupling_profile(h: np.ndarray, q: np.ndarray) -> np.ndarray:
    """First-decoupling profile Gamma_t = sum_{s>t} q_s*(h[s,t+1] - h[s,t]).

    mu**D * Gamma_t estimates the expected number of walk pairs that first
    decouple at height t.  Negative entries (possible outside the fitted
    regime) are flagged with a :class:`RegimeWarning` and reported as
    computed, never clamped.
    """
    depth = h.shape[0] - 1
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (depth + 1,):
        raise ValueError(f"q must have length D+1={depth + 1}, got shape {q.shape}")
    gamma = np.zeros(depth, dtype=np.float64)
    for t in range(depth):
        gamma[t] = math.fsum(q[s] * (h[s, t + 1] - h[s, t]) for s in range(t + 1, depth + 1))
    if np.any(gamma < 0.0):
        warnings.warn(
            f"negative decoupling weights Gamma at t={np.flatnonzero(gamma < 0).tolist()}; "
            "parameters are outside the approximation's regime",
            RegimeWarning,
            stacklevel=2,
        )
    return gamma


def color_coeffs(rates: np.ndarray, omega: float, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Agreement and conflict coefficients (A_t, C_t) for t = 0..D-1.

    A_t = prod_{d=D-t..D} (1 - rho_d)**2 is the probability that both walk
    branches keep matching colors below a decoupling at height t; C_t =
    (1 - A_t)*omega*(2 - omega) adds the requirement that at least one
    endpoint is wild.  With rho_D = 0, A_0 = 1 and C_0 = 0: sibling edges
    always agree.
    """
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape != (depth,):
        raise ValueError(f"rates must have length D={depth}, got shape {rates.shape}")
    if not 0.0 <= omega <= 1.0:
        raise ValueError(f"omega must lie in [0, 1], got {omega}")
    keep_sq = (1.0 - rates) ** 2
    a = np.ones(depth, dtype=np.float64)
    a[0] = keep_sq[depth - 1]
    for t in range(1, depth):
        a[t] = a[t - 1] * keep_sq[depth - t - 1]
    c = (1.0 - a) * omega * (2.0 - omega)
    return a, c


def expected_edge_counts(
    gamma: np.ndarray,
    a_coeff: np.ndarray,
    c_coeff: np.ndarray,
    mu: float,
    depth: int,
    nu: float,
    eta2: float,
    q: np.ndarray,
    moments: BranchingMoments,
    omega: float,
) -> tuple[float, float, float, float]:
    """Expected multi-edge counts (M_A, M_C, M_L, M_inadmissible).

    M_A = mu**D * Gamma.A and M_C = mu**D * Gamma.C count agreement and
    conflict multi-edges; the loop count is
    M_L = sum_s (q_s*mu**(D-s)/2) * (nu + (1 - delta_s)*eta2/nu), and the
    inadmissible remainder mu**D * sum_t Gamma_t*(1-A_t)*(1-omega*(2-omega))
    completes the attempt budget: the four terms sum to nu*mu**D/2 exactly.
    """
    scale = mu**depth
    m_a = scale * math.fsum(gamma * a_coeff)
    m_c = scale * math.fsum(gamma * c_coeff)
    m_l = math.fsum(
        q[s] * mu ** (depth - s) / 2.0 * (nu + (1.0 - moments.recip[s]) * eta2 / nu)
        for s in range(1, depth + 1)
    )
    m_inadm = scale * math.fsum(gamma * (1.0 - a_coeff) * (1.0 - omega * (2.0 - omega)))
    return m_a, m_c, m_l, m_inadm


def corollary_edge_counts(
    nu: float,
    mu: float,
    depth: int,
    q: np.ndarray,
    a_coeff: np.ndarray,
    c_coeff: np.ndarray,
) -> tuple[float, float]:
    """Exact (M_A, M_C) for the zero-variance case (deterministic tree, constant marks).

    M_A = (nu*mu**D*(mu-1)/2) * sum_s q_s*mu**(-s) * sum_{t<s} A_t*mu**t and
    the same form with C_t for M_C.  When eta2 = zeta1sq = 0 the general
    estimates of :func:`expected_edge_counts` collapse to these values to
    ~1e-12 relative, which the test suite pins.
    """
    front = nu * mu**depth * (mu - 1.0) / 2.0
    m_a = front * math.fsum(
        q[s] * mu ** (-s) * math.fsum(a_coeff[t] * mu**t for t in range(s))
        for s in range(1, depth + 1)
    )
    m_c = front * math.fsum(
        q[s] * mu ** (-s) * math.fsum(c_coeff[t] * mu**t for t in range(s))
        for s in range(1, depth + 1)
    )
    return m_a, m_c


def degree_and_clustering(
    gamma: np.ndarray,
    a_coeff: np.ndarray,
    c_coeff: np.ndarray,
    mu: float,
) -> tuple[float, float, float, float, float, float, float]:
    """Degree and clustering predictions derived from the decoupling profile.

    Returns ``(d_a_multi, d_c_multi, pi1_multi, d_sib, d_a, pi1, alcc)``:

    * ``d_a_multi`` = 2*Gamma.A and ``d_c_multi`` = 2*Gamma.C, the mean
      vertex multi-degrees in the agreement and conflict graphs;
    * ``pi1_multi`` = Gamma_0*A_0/Gamma.A, the proportion of agreement
      multi-edges that join siblings;
    * ``d_sib`` = (mu-1)*(1 - exp(-pi1_multi*d_a_multi/(mu-1))), the mean
      number of distinct sibling neighbors;
    * ``d_a`` = (1 - pi1_multi)*d_a_multi + d_sib, the distinct-neighbor
      agreement degree (non-sibling multi-edges rarely repeat, sibling ones
      collide per the Poisson approximation);
    * ``pi1`` = d_sib/d_a and ``alcc`` = pi1**2*(1 - exp(-pi1_multi*
      d_a_multi/(mu-1))), the sibling-driven clustering approximation.
    """
    ga = math.fsum(gamma * a_coeff)
    gc = math.fsum(gamma * c_coeff)
    d_a_multi = 2.0 * ga
    d_c_multi = 2.0 * gc
    if ga <= 0.0:
        return d_a_multi, d_c_multi, 0.0, 0.0, 0.0, 0.0, 0.0
    pi1_multi = gamma[0] * a_coeff[0] / ga
    fill = 1.0 - math.exp(-pi1_multi * d_a_multi / (mu - 1.0))
    d_sib = (mu - 1.0) * fill
    d_a = (1.0 - pi1_multi) * d_a_multi + d_sib
    pi1 = d_sib / d_a if d_a > 0.0 else 0.0
    alcc = pi1 * pi1 * fill
    return d_a_multi, d_c_multi, pi1_multi, d_sib, d_a, pi1, alcc


@dataclass(frozen=True)
class AnalyticProfile:
    """All closed-form quantities for one parameter set, computed once."""

    mu: float
    depth: int
    nu: float
    eta2: float
    zeta1sq: float
    omega: float
    q: np.ndarray
    rates: np.ndarray
    moments: BranchingMoments
    h: np.ndarray
    gamma: np.ndarray
    a_coeff: np.ndarray
    c_coeff: np.ndarray
    m_agree: float
    m_conflict: float
    m_loop: float
    m_inadmissible: float
    d_a_multi: float
    d_c_multi: float
    pi1_multi: float
    d_sib: float
    d_a: float
    pi1: float
    alcc: float

    @property
    def attempt_budget(self) -> float:
        """The exact total expected pair count nu*mu**D/2."""
        return self.nu * self.mu**self.depth / 2.0

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "depth": self.depth,
            "nu": self.nu,
            "eta2": self.eta2,
            "zeta1sq": self.zeta1sq,
            "omega": self.omega,
            "q": self.q.tolist(),
            "rates": self.rates.tolist(),
            "h": self.h.tolist(),
            "gamma": self.gamma.tolist(),
            "a_coeff": self.a_coeff.tolist(),
            "c_coeff": self.c_coeff.tolist(),
            "m_agree": self.m_agree,
            "m_conflict": self.m_conflict,
            "m_loop": self.m_loop,
            "m_inadmissible": self.m_inadmissible,
            "attempt_budget": self.attempt_budget,
            "d_a_multi": self.d_a_multi,
            "d_c_multi": self.d_c_multi,
            "pi1_multi": self.pi1_multi,
            "d_sib": self.d_sib,
            "d_a": self.d_a,
            "pi1": self.pi1,
            "alcc": self.alcc,
        }


def analytic_profile(
    mu: float,
    depth: int,
    nu: float,
    eta2: float,
    q: np.ndarray,
    rates: np.ndarray,
    omega: float,
    zeta1sq: float | None = None,
) -> AnalyticProfile:
    """Assemble the full analytic profile for one parameter set.

    ``zeta1sq`` defaults to mu - 1, the offspring variance of the
    1 + Poisson(mu - 1) law the generator uses.
    """
    if zeta1sq is None:
        zeta1sq = mu - 1.0
    q = np.asarray(q, dtype=np.float64)
    rates = np.asarray(rates, dtype=np.float64)
    moments = branching_moments(mu, zeta1sq, depth)
    h = h_matrix(nu, eta2, mu, zeta1sq, depth)
    gamma = decoupling_profile(h, q)
    a_coeff, c_coeff = color_coeffs(rates, omega, depth)
    m_a, m_c, m_l, m_i = expected_edge_counts(
        gamma, a_coeff, c_coeff, mu, depth, nu, eta2, q, moments, omega
    )
    d_a_multi, d_c_multi, pi1_multi, d_sib, d_a, pi1, alcc = degree_and_clustering(
        gamma, a_coeff, c_coeff, mu
    )
    return AnalyticProfile(
        mu=mu, depth=depth, nu=nu, eta2=eta2, zeta1sq=zeta1sq, omega=omega,
        q=q, rates=rates, moments=moments, h=h, gamma=gamma,
        a_coeff=a_coeff, c_coeff=c_coeff,
        m_agree=m_a, m_conflict=m_c, m_loop=m_l, m_inadmissible=m_i,
        d_a_multi=d_a_multi, d_c_multi=d_c_multi, pi1_multi=pi1_multi,
        d_sib=d_sib, d_a=d_a, pi1=pi1, alcc=alcc,
    )


def collision_mean(nu_vec, eta2_vec, alpha: float, n: int | None = None) -> float:
    """Second-order estimate of the expected collision count in weighted sampling.

    Setting: n items with independent random weights Y_i (mean nu_i,
    variance eta2_i); pairs of items are drawn with replacement proportional
    to weight, with an expected (alpha/2)*sum(Y) draws.  The expected number
    of draws that pick the same item twice is

        (alpha/2) * ((zeta2 + Lam)/lam - (2/lam**2)*sum(nu_j*eta2_j)
                     + zeta2*Lam/lam**3) + O(n**-2)

    with lam = sum(nu_i), Lam = sum(nu_i**2), zeta2 = sum(eta2_i).  For
    deterministic weights (eta2_i = 0) the value (alpha/2)*Lam/lam is exact.
    Scalars are broadcast to length ``n``.
    """
    nu_vec = np.atleast_1d(np.asarray(nu_vec, dtype=np.float64))
    eta2_vec = np.atleast_1d(np.asarray(eta2_vec, dtype=np.float64))
    if n is not None:
        nu_vec = np.broadcast_to(nu_vec, (n,))
        eta2_vec = np.broadcast_to(eta2_vec, (n,))
    try:
        nu_vec, eta2_vec = np.broadcast_arrays(nu_vec, eta2_vec)
    except ValueError as exc:
        raise ValueError("nu_vec and eta2_vec must have compatible shapes") from exc
    if nu_vec.size < 2:
        raise ValueError(f"need at least 2 items, got {nu_vec.size}")
    if np.any(nu_vec <= 0.0):
        raise ValueError("all mean weights must be positive")
    lam = math.fsum(nu_vec)
    big_lam = math.fsum(nu_vec * nu_vec)
    zeta2 = math.fsum(eta2_vec)
    cross = math.fsum(nu_vec * eta2_vec)
    return (alpha / 2.0) * ((zeta2 + big_lam) / lam - 2.0 * cross / lam**2 + zeta2 * big_lam / lam**3)


def depth_one_expected(
    n: int, alpha: float, nu: float, eta2: float, rho: float, omega: float
) -> tuple[float, float, float, float]:
    """Closed-form depth-one tallies (M_E, M_A, M_C, expected loops).

    For the one-level model (n leaves under a single root, independent color
    switches at rate rho, wild flags at rate omega, marks with mean nu and
    variance eta2, and Binomial(sum F, alpha/2) endpoint-pair draws):

        M_E    = alpha*nu*(n-1)/2 * (1 - eta2/(n*nu**2))      non-loop pairs
        M_A    = (1 - rho)**2 * M_E                            agreement
        M_C    = rho*(2 - rho)*omega*(2 - omega) * M_E         conflict
        loops  = (alpha/2) * (nu + (eta2/nu)*(1 - 1/n))

    all up to O(n**-2).  M_E + loops equals the mean attempt count
    alpha*n*nu/2 exactly.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 leaves, got {n}")
    m_e = alpha * nu * (n - 1) / 2.0 * (1.0 - eta2 / (n * nu * nu))
    m_a = (1.0 - rho) ** 2 * m_e
    m_c = rho * (2.0 - rho) * omega * (2.0 - omega) * m_e
    loops = alpha / 2.0 * (nu + eta2 / nu * (1.0 - 1.0 / n))
    return m_e, m_a, m_c, loops
