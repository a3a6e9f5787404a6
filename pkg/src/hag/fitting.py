"""Parameter recovery from observable graph statistics.

Given six observables — vertex count, label count K, mean agreement degree,
mean conflict degree, average local clustering, and the degree variance —
the fit proceeds in closed stages:

1. cube-root inversion of the sibling-saturation relations turns the simple
   agreement degree and clustering into the multigraph targets
   (mu, d_A', pi_1'),
2. the leaf budget fixes the depth D,
3. theta is solved from the expected-label-count curve (monotone bisection),
4. (q1, nu) are solved jointly: for each q1 on a descending grid, nu is
   chosen so the multigraph agreement degree 2 Gamma.A matches d_A'; the
   grid stops where the height-one share crosses its target from above and
   the crossing is interpolated,
5. omega is solved from the conflict degree in closed form.

When a stage is infeasible at depth D the pipeline retries at D+1 (theta is
refit) up to three increments before giving up.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .analytics import color_coeffs, decoupling_profile, h_matrix
from .edges import height_distribution
from .errors import InfeasibleError, MonotonicityError, RegimeWarning
from .marks import lognormal_from_moments
from .params import HagParams
from .tree import color_switch_rates, expected_label_count

Q1_GRID_STEP = 0.005
MAX_DEPTH_RETRIES = 3


@dataclass(frozen=True)
class TargetStats:
    """Observable statistics the fit matches."""

    vertices: float
    labels: float
    mean_agreement_degree: float
    mean_conflict_degree: float
    alcc: float
    degree_variance: float

    def validate(self) -> None:
        if self.vertices < 2:
            raise InfeasibleError(f"need at least 2 vertices, got {self.vertices}")
        if self.labels <= 1:
            raise InfeasibleError(f"label count must exceed 1, got {self.labels}")
        if self.mean_agreement_degree <= 0:
            raise InfeasibleError(
                f"mean agreement degree must be positive, got {self.mean_agreement_degree}"
            )
        if self.mean_conflict_degree < 0:
            raise InfeasibleError(
                f"mean conflict degree must be non-negative, got {self.mean_conflict_degree}"
            )
        if not 0.0 < self.alcc < 1.0:
            raise InfeasibleError(f"clustering must lie in (0, 1), got {self.alcc}")
        if self.degree_variance < 0:
            raise InfeasibleError(
                f"degree variance must be non-negative, got {self.degree_variance}"
            )

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertices,
            "labels": self.labels,
            "mean_agreement_degree": self.mean_agreement_degree,
            "mean_conflict_degree": self.mean_conflict_degree,
            "alcc": self.alcc,
            "degree_variance": self.degree_variance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TargetStats":
        try:
            return cls(
                vertices=float(d["vertices"]),
                labels=float(d["labels"]),
                mean_agreement_degree=float(d["mean_agreement_degree"]),
                mean_conflict_degree=float(d["mean_conflict_degree"]),
                alcc=float(d["alcc"]),
                degree_variance=float(d["degree_variance"]),
            )
        except KeyError as exc:
            raise KeyError(f"target statistics missing field {exc}") from exc


@dataclass(frozen=True)
class FittedParams:
    """Fit output: generator parameters plus the intermediate targets."""

    mu: float
    depth: int
    theta: float
    q1: float
    nu: float
    eta2: float
    mu_o: float
    sigma_o: float
    omega: float
    beta: float
    d_a_prime: float
    pi1_prime: float
    scale: float
    budget: float
    depth_retries: int

    def hag_params(self) -> HagParams:
        return HagParams(
            mu=self.mu,
            depth=self.depth,
            theta=self.theta,
            q1=self.q1,
            mu_o=self.mu_o,
            sigma_o=self.sigma_o,
            omega=self.omega,
            beta=self.beta,
        )

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "depth": self.depth,
            "theta": self.theta,
            "q1": self.q1,
            "nu": self.nu,
            "eta2": self.eta2,
            "mu_o": self.mu_o,
            "sigma_o": self.sigma_o,
            "omega": self.omega,
            "beta": self.beta,
            "d_a_prime": self.d_a_prime,
            "pi1_prime": self.pi1_prime,
            "scale": self.scale,
            "budget": self.budget,
            "depth_retries": self.depth_retries,
        }


@dataclass
class FitCurve:
    """The (q1, nu, pi1') rows visited by the joint q1-nu scan."""

    q1: np.ndarray
    nu: np.ndarray
    pi1_prime: np.ndarray
    crossing_q1: float = float("nan")
    crossing_nu: float = float("nan")

    def to_frame(self):
        import pandas as pd

        return pd.DataFrame(
            {"q1": self.q1, "nu": self.nu, "pi1_prime": self.pi1_prime}
        )


def cube_root_derive(d_a: float, kappa: float) -> tuple[float, float, float]:
    """Invert the sibling-saturation relations.

    Under saturation the simple agreement degree d_A, the clustering kappa,
    and the multigraph quantities obey pi_1 = kappa^{1/3},
    d_S = (mu-1)(1 - exp(-pi_1' d_A'/(mu-1))), and
    d_A = (1-pi_1') d_A' + d_S.  Solving with mu = 1 + d_A gives closed
    forms for the multigraph degree d_A' and the height-one share target
    pi_1'.  Returns (mu, d_A', pi_1' target).
    """
    if d_a <= 0:
        raise InfeasibleError(f"mean agreement degree must be positive, got {d_a}")
    if not 0.0 < kappa < 1.0:
        raise InfeasibleError(f"clustering must lie in (0, 1), got {kappa}")
    r = kappa ** (1.0 / 3.0)
    log1r = math.log(1.0 - r)
    mu = 1.0 + d_a
    d_a_prime = d_a * ((1.0 - r) - log1r)
    pi1_prime = 1.0 / (1.0 - (1.0 - r) / log1r)
    return mu, d_a_prime, pi1_prime


def choose_depth(budget: float, mu: float) -> int:
    """Largest depth whose expected leaf count mu^D stays within the budget.

    A 0.5% slack absorbs rounding of reported budgets (a budget quoted as a
    fraction of a vertex count often sits a fraction of a percent under the
    exact power it denotes).  Depths below 3 are rejected: the fit needs at
    least two interior levels.
    """
    if budget <= 1.0:
        raise InfeasibleError(f"leaf budget must exceed 1, got {budget}")
    if mu <= 1.0:
        raise InfeasibleError(f"mean offspring must exceed 1, got {mu}")
    depth = int(math.floor(math.log(1.005 * budget) / math.log(mu)))
    if depth < 3:
        raise InfeasibleError(
            f"leaf budget {budget} supports depth {depth} < 3 at mu = {mu}; "
            "increase the budget or lower the degree"
        )
    return depth


def fit_theta(mu: float, depth: int, target_labels: float, rel_tol: float = 1e-12) -> float:
    """Solve expected_label_count(mu, depth, theta) = target_labels for theta.

    The label curve is strictly increasing in theta, from 1 + mu (as theta
    tends to 0; the first level always refreshes) to the total interior node
    count; targets outside that open range are infeasible.  Solved by
    bracketed bisection.
    """
    lo_limit = 1.0 + mu
    hi_limit = 1.0 + (mu**depth - mu) / (mu - 1.0) if depth >= 2 else 1.0
    if not lo_limit < target_labels < hi_limit:
        raise InfeasibleError(
            f"label target {target_labels} outside the attainable range "
            f"({lo_limit}, {hi_limit}) at mu = {mu}, depth = {depth}"
        )

    def curve(theta: float) -> float:
        return expected_label_count(mu, depth, theta)

    lo = (target_labels - 1.0) / ((depth - 1) * (mu - 1.0))
    for _ in range(64):
        if curve(lo) <= target_labels:
            break
        lo /= 2.0
    else:
        raise MonotonicityError("could not bracket theta from below")
    hi = max(2.0 * lo, 1.0)
    for _ in range(64):
        if curve(hi) >= target_labels:
            break
        hi *= 2.0
    else:
        raise MonotonicityError("could not bracket theta from above")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if curve(mid) < target_labels:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _agreement_degree(
    nu: float,
    eta2: float,
    mu: float,
    depth: int,
    q: np.ndarray,
    a_coeff: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Multigraph agreement degree 2 Gamma.A and the profile at this nu.

    Negative Gamma_t entries (possible far outside the fitted regime while
    the bisection brackets) are floored at 0 here — inside the search only;
    reported analytics never clamp.
    """
    h = h_matrix(nu, eta2, mu, mu - 1.0, depth)
    gamma = np.maximum(decoupling_profile(h, q), 0.0)
    return 2.0 * float(np.dot(gamma, a_coeff)), gamma


def _solve_nu(
    eta2: float,
    mu: float,
    depth: int,
    q: np.ndarray,
    a_coeff: np.ndarray,
    d_a_prime: float,
    rel_tol: float = 1e-10,
) -> tuple[float, np.ndarray]:
    """Solve 2 Gamma.A = d_A' for nu by bracketed bisection.

    The attempt budget caps the agreement degree at nu (2 Gamma.A < nu), so
    nu = d_A' always starts below the target and doubling finds the upper
    bracket.
    """
    lo = d_a_prime
    g_lo, _ = _agreement_degree(lo, eta2, mu, depth, q, a_coeff)
    if g_lo >= d_a_prime:
        raise MonotonicityError(
            "agreement degree at nu = d_A' should sit below d_A'"
        )
    hi = 2.0 * lo
    for _ in range(64):
        g_hi, _ = _agreement_degree(hi, eta2, mu, depth, q, a_coeff)
        if g_hi >= d_a_prime:
            break
        hi *= 2.0
    else:
        raise MonotonicityError("could not bracket nu from above")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        g_mid, _ = _agreement_degree(mid, eta2, mu, depth, q, a_coeff)
        if g_mid < d_a_prime:
            lo = mid
        else:
            hi = mid
    nu = 0.5 * (lo + hi)
    _, gamma = _agreement_degree(nu, eta2, mu, depth, q, a_coeff)
    return nu, gamma


@dataclass
class Q1NuFit:
    """Result of the joint (q1, nu) stage."""

    q1: float
    nu: float
    gamma: np.ndarray
    a_coeff: np.ndarray
    curve: FitCurve = field(repr=False)


def fit_q1_nu(
    mu: float,
    depth: int,
    theta: float,
    eta2: float,
    d_a_prime: float,
    pi1_prime_target: float,
    full_curve: bool = False,
) -> Q1NuFit:
    """Jointly solve for (q1, nu) on a descending q1 grid.

    For each q1 in 1.0, 0.995, ..., nu is solved so the multigraph agreement
    degree matches d_A'; the height-one share pi_1' = 2 Gamma_0 A_0 / d_A'
    starts at exactly 1 (at q1 = 1) and decreases along the grid.  The scan
    stops at the first grid point at or below the target and interpolates
    the crossing linearly; nu is then re-solved at the interpolated q1.

    With ``full_curve=True`` the scan continues over the whole grid (for
    curve exports) instead of stopping at the crossing.
    """
    if not 0.0 < pi1_prime_target < 1.0:
        raise InfeasibleError(
            f"height-one share target must lie in (0, 1), got {pi1_prime_target}"
        )
    rates = color_switch_rates(mu, depth, theta)
    a_coeff, _ = color_coeffs(rates, 0.0, depth)
    grid_q1: list[float] = []
    grid_nu: list[float] = []
    grid_pi: list[float] = []
    crossing = -1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        for k in range(int(round(1.0 / Q1_GRID_STEP))):
            q1 = 1.0 - k * Q1_GRID_STEP
            q = height_distribution(q1, depth)
            nu, gamma = _solve_nu(eta2, mu, depth, q, a_coeff, d_a_prime)
            pi = 2.0 * gamma[0] * a_coeff[0] / d_a_prime
            if grid_pi and pi > grid_pi[-1] + 1e-9:
                raise MonotonicityError(
                    f"height-one share rose from {grid_pi[-1]} to {pi} at q1 = {q1}"
                )
            grid_q1.append(q1)
            grid_nu.append(nu)
            grid_pi.append(pi)
            if pi <= pi1_prime_target and crossing < 0:
                crossing = k
                if not full_curve:
                    break
        if crossing <= 0:
            if crossing == 0:
                raise MonotonicityError(
                    "height-one share started at or below its target at q1 = 1"
                )
            raise InfeasibleError(
                f"height-one share stayed above {pi1_prime_target} over the whole "
                f"q1 grid at depth {depth}; a deeper tree is needed"
            )
        frac = (grid_pi[crossing - 1] - pi1_prime_target) / (
            grid_pi[crossing - 1] - grid_pi[crossing]
        )
        q1_star = grid_q1[crossing - 1] + frac * (
            grid_q1[crossing] - grid_q1[crossing - 1]
        )
        q_star = height_distribution(q1_star, depth)
        nu_star, gamma_star = _solve_nu(eta2, mu, depth, q_star, a_coeff, d_a_prime)
    curve = FitCurve(
        q1=np.array(grid_q1),
        nu=np.array(grid_nu),
        pi1_prime=np.array(grid_pi),
        crossing_q1=q1_star,
        crossing_nu=nu_star,
    )
    return Q1NuFit(q1=q1_star, nu=nu_star, gamma=gamma_star, a_coeff=a_coeff, curve=curve)


def fit_omega(d_c: float, gamma: np.ndarray, a_coeff: np.ndarray) -> float:
    """Solve the conflict degree 2 Gamma.(1-A) omega(2-omega) = d_C for omega.

    The decoupled mass 2 Gamma.(1-A) bounds the attainable conflict degree;
    targets at or above it are infeasible (a deeper tree decouples more).
    """
    if d_c == 0.0:
        return 0.0
    decoupled = 2.0 * float(np.dot(gamma, 1.0 - a_coeff))
    if decoupled <= 0.0:
        raise InfeasibleError("no decoupled mass available for conflict edges")
    z = d_c / decoupled
    if z >= 1.0:
        raise InfeasibleError(
            f"conflict degree {d_c} needs omega(2-omega) = {z} >= 1; "
            "increase the depth to decouple more mass"
        )
    omega = 1.0 - math.sqrt(1.0 - z)
    if omega >= 1.0:
        raise InfeasibleError(f"conflict degree {d_c} requires omega >= 1")
    return omega


@dataclass(frozen=True)
class MleStats:
    """Constrained lognormal fit of a log-degree sample."""

    ybar: float
    sigma2: float
    phi: float
    tau: float
    nu: float
    eta2: float
    eta2_simplistic: float

    def to_dict(self) -> dict:
        return {
            "ybar": self.ybar,
            "sigma2": self.sigma2,
            "phi": self.phi,
            "tau": self.tau,
            "nu": self.nu,
            "eta2": self.eta2,
            "eta2_simplistic": self.eta2_simplistic,
        }


def constrained_mle(log_degrees: np.ndarray) -> MleStats:
    """Lognormal MLE constrained to reproduce the arithmetic mean degree.

    Let ybar and sigma2 be the sample mean and (biased) variance of the log
    degrees and phi the log of the arithmetic mean degree.  Maximizing the
    lognormal likelihood subject to mean e^phi concentrates to the profile
    objective -log(tau) - (sigma2 + (ybar - phi + tau/2)^2)/tau in the log
    variance tau, whose unique stationary point is

        tau = 2 (sqrt(1 + sigma2 + (phi - ybar)^2) - 1).

    The implied variance e^{2 phi} (e^tau - 1) is the preferred estimate;
    the unconstrained plug-in e^{2 ybar + sigma2} (e^{sigma2} - 1) is kept
    for comparison (it understates heavy upper tails).
    """
    y = np.asarray(log_degrees, dtype=np.float64)
    if y.size < 1:
        raise ValueError("need at least one log-degree")
    ybar = float(y.mean())
    sigma2 = float(y.var())
    phi = float(logsumexp(y) - math.log(y.size))
    gap2 = sigma2 + (phi - ybar) ** 2
    tau = 2.0 * (math.sqrt(1.0 + gap2) - 1.0)
    nu = math.exp(phi)
    eta2 = math.exp(2.0 * phi) * math.expm1(tau)
    eta2_simple = math.exp(2.0 * ybar + sigma2) * math.expm1(sigma2)
    return MleStats(
        ybar=ybar,
        sigma2=sigma2,
        phi=phi,
        tau=tau,
        nu=nu,
        eta2=eta2,
        eta2_simplistic=eta2_simple,
    )


def scaled_label_count(labels: float, vertices: float, scale: float) -> float:
    """Label count rescaled to a smaller vertex budget.

    Labels grow logarithmically with size, so a simulation at scale c of an
    n-vertex target should carry K log(c n)/log(n) labels.
    """
    if vertices <= 1:
        raise InfeasibleError(f"vertex count must exceed 1, got {vertices}")
    if scale * vertices <= 1:
        raise InfeasibleError(
            f"scaled vertex count {scale * vertices} must exceed 1"
        )
    return labels * math.log(scale * vertices) / math.log(vertices)


def fit_pipeline(
    targets: TargetStats,
    scale: float = 1.0,
    beta: float = 0.0,
    rescale_labels: bool = False,
) -> tuple[FittedParams, FitCurve]:
    """Run the full fit and return the parameters plus the q1 scan curve.

    ``scale`` shrinks the leaf budget to scale * vertices (the parameters
    then describe a proportionally smaller graph); ``rescale_labels``
    additionally shrinks the label target logarithmically.  If the (q1, nu)
    or omega stage is infeasible at the chosen depth, the depth is bumped
    and theta refit, up to three increments.
    """
    targets.validate()
    if scale <= 0:
        raise InfeasibleError(f"scale must be positive, got {scale}")
    budget = scale * targets.vertices
    label_target = targets.labels
    if rescale_labels and scale != 1.0:
        label_target = scaled_label_count(targets.labels, targets.vertices, scale)
    mu, d_a_prime, pi1_prime_target = cube_root_derive(
        targets.mean_agreement_degree, targets.alcc
    )
    depth = choose_depth(budget, mu)
    eta2 = targets.degree_variance
    failures: list[str] = []
    for retry in range(MAX_DEPTH_RETRIES + 1):
        d = depth + retry
        theta = fit_theta(mu, d, label_target)
        try:
            q1nu = fit_q1_nu(mu, d, theta, eta2, d_a_prime, pi1_prime_target)
            omega = fit_omega(
                targets.mean_conflict_degree, q1nu.gamma, q1nu.a_coeff
            )
        except InfeasibleError as exc:
            failures.append(f"depth {d}: {exc}")
            continue
        mu_o, sigma_o = lognormal_from_moments(q1nu.nu, eta2)
        fitted = FittedParams(
            mu=mu,
            depth=d,
            theta=theta,
            q1=q1nu.q1,
            nu=q1nu.nu,
            eta2=eta2,
            mu_o=mu_o,
            sigma_o=sigma_o,
            omega=omega,
            beta=beta,
            d_a_prime=d_a_prime,
            pi1_prime=pi1_prime_target,
            scale=scale,
            budget=budget,
            depth_retries=retry,
        )
        return fitted, q1nu.curve
    raise InfeasibleError(
        "fit infeasible up to depth "
        f"{depth + MAX_DEPTH_RETRIES}: " + "; ".join(failures)
    )
