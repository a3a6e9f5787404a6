"""Closed-form expectations: moments, h-matrix, edge counts, degrees."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hag.analytics import (
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
from hag.edges import height_distribution
from hag.errors import RegimeWarning
from hag.tree import color_switch_rates


def test_branching_moments_frozen_at_26():
    m = branching_moments(26.0, 25.0, 4)
    np.testing.assert_allclose(m.mean, [1, 26, 676, 17576, 456976], rtol=1e-12)
    np.testing.assert_allclose(
        m.var, [0.0, 25.0, 17550.0, 11880700.0, 8031792600.0], rtol=1e-12
    )
    # generation-size variance telescopes: var[t+1] = mu^2 var[t] + zeta1^2 mu^t
    for t in range(4):
        assert m.var[t + 1] == pytest.approx(
            26.0**2 * m.var[t] + 25.0 * 26.0**t, rel=1e-12
        )
    assert m.recip[0] == 1.0
    assert m.recip[1] == pytest.approx(0.03994082840236687, rel=1e-14)
    assert m.recip[1] == pytest.approx(1 / 26 + 1 / 26**2, rel=1e-14)


def test_reciprocal_expansion_error_order():
    # Closed form for the first generation: xi_1 = 1 + Poisson(mu - 1), so
    # E[1/xi_1] = (1 - exp(-(mu-1)))/(mu-1).  The two-term expansion
    # mu^-1 + mu^-2 misses it by O(mu^-3) with constant ~1.
    for mu in (6.0, 12.0, 26.0):
        exact = (1.0 - math.exp(-(mu - 1.0))) / (mu - 1.0)
        m = branching_moments(mu, mu - 1.0, 1)
        assert abs(m.recip[1] - exact) <= 1.5 * mu**-3


def test_reciprocal_expansion_second_generation():
    # Exact E[1/xi_2] at mu = 26 via a truncated double Poisson sum
    # (numerically converged to ~1e-15): the expansion error is within
    # the promised O(mu^-4) order.
    exact = 0.0015408443078211756
    m = branching_moments(26.0, 25.0, 2)
    assert abs(m.recip[2] - exact) <= 4.0 * 26.0**-4


def test_h_matrix_diagonal_is_half_nu():
    for nu, eta2, mu in ((1.0, 0.0, 3.0), (50.0, 700.0, 26.0), (5.0, 12.0, 4.0)):
        h = h_matrix(nu, eta2, mu, mu - 1.0, 4)
        for s in range(1, 5):
            assert h[s, s] == nu / 2.0


def test_h_matrix_frozen_value():
    h = h_matrix(50.0, 700.0, 26.0, 25.0, 4)
    assert h[1, 0] == pytest.approx(1.2200159308147474, rel=1e-14)
    # independent recomputation of one interior cell from the definition,
    # including the (1 - delta_{s-t}) reciprocal-expansion correction
    nu, eta2, mu, z1 = 50.0, 700.0, 26.0, 25.0
    a = eta2 / nu
    b = nu * z1 / (mu * (mu - 1.0))
    s, t = 3, 1
    delta = mu ** -(s - t) + mu ** -(s - t + 1)
    by_hand = 0.5 * (
        nu * mu ** (t - s) + (1.0 - delta) * (a + b * (mu**t - 1.0)) * mu**-s
    )
    assert h[s, t] == pytest.approx(by_hand, rel=1e-14)


def test_h_matrix_rows_monotone_in_normal_regime():
    h = h_matrix(50.0, 700.0, 26.0, 25.0, 4)
    for s in range(1, 5):
        row = h[s, : s + 1]
        assert (np.diff(row) > 0).all()


def test_h_matrix_warns_when_row_inverts():
    # Huge mark dispersion at tiny mean pushes h[s, s-1] above nu/2.
    with pytest.warns(RegimeWarning):
        h_matrix(1.0, 100.0, 3.0, 2.0, 2)


def test_decoupling_profile_hand_sum():
    h = h_matrix(50.0, 700.0, 26.0, 25.0, 4)
    q = height_distribution(0.82, 4)
    gamma = decoupling_profile(h, q)
    assert gamma.shape == (4,)
    for t in range(4):
        by_hand = math.fsum(
            q[s] * (h[s, t + 1] - h[s, t]) for s in range(t + 1, 5)
        )
        assert gamma[t] == pytest.approx(by_hand, rel=1e-12)
    # q sums to one and each row of h telescopes to nu/2 - h[s, 0]
    assert gamma.sum() == pytest.approx(
        math.fsum(q[s] * (h[s, s] - h[s, 0]) for s in range(1, 5)), rel=1e-12
    )


def test_decoupling_profile_frozen_uniform_heights():
    # mu=3, depth=3, constant marks nu=1 (eta2=0), q uniform on heights 1..3
    q = np.array([0.0, 1 / 3, 1 / 3, 1 / 3])
    h = h_matrix(1.0, 0.0, 3.0, 2.0, 3)
    gamma = decoupling_profile(h, q)
    np.testing.assert_allclose(
        27 * gamma,
        [4.613168724279835, 3.9670781893004112, 2.753086419753086],
        rtol=1e-12,
    )


def test_decoupling_profile_warns_on_negative():
    with pytest.warns(RegimeWarning):
        h = h_matrix(1.0, 100.0, 3.0, 2.0, 2)
    q = height_distribution(0.5, 2)
    with pytest.warns(RegimeWarning, match="negative"):
        gamma = decoupling_profile(h, q)
    # reported analytics never clamp: the negative value is preserved
    assert gamma.min() < 0


def test_color_coeffs_products():
    depth = 4
    rates = color_switch_rates(26.0, depth, 3.62)
    omega = 0.043
    a, c = color_coeffs(rates, omega, depth)
    # a[t] multiplies agreement: the survival product over the last t+1
    # switch levels (depths D-t..D); rho_D = 0 makes a[0] = 1.
    assert a[0] == 1.0
    for t in range(depth):
        prod = 1.0
        for d in range(depth - t, depth + 1):
            prod *= (1.0 - rates[d - 1]) ** 2
        assert a[t] == pytest.approx(prod, rel=1e-12)
        assert c[t] == pytest.approx((1.0 - a[t]) * omega * (2.0 - omega), rel=1e-12)
    # rho_1 = 1 kills agreement across the root: a[depth-1] = 0
    assert a[depth - 1] == 0.0


@given(
    st.floats(min_value=1.5, max_value=30.0),
    st.integers(min_value=2, max_value=6),
    st.floats(min_value=0.2, max_value=20.0),
    st.floats(min_value=0.5, max_value=100.0),
    st.floats(min_value=0.0, max_value=2000.0),
    st.floats(min_value=0.0, max_value=0.9),
    st.floats(min_value=0.05, max_value=1.0),
)
def test_budget_identity_exact(mu, depth, theta, nu, eta2, omega, q1):
    # Loops + agreement + conflict + inadmissible exhaust the attempt
    # budget nu mu^D / 2 exactly, for any parameter combination.
    q = height_distribution(q1, depth)
    rates = color_switch_rates(mu, depth, theta)
    with np.errstate(all="ignore"):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            profile = analytic_profile(mu, depth, nu, eta2, q, rates, omega)
    total = (
        profile.m_agree + profile.m_conflict + profile.m_loop + profile.m_inadmissible
    )
    assert total == pytest.approx(profile.attempt_budget, rel=1e-12)


def test_corollary_matches_general_forms_when_dispersion_free():
    # With eta2 = 0 and zeta1^2 = 0 the general expectations collapse to
    # the exact closed forms of the deterministic-tree corollary.
    mu, depth, theta, omega, q1 = 4.0, 4, 2.5, 0.1, 0.6
    nu = 3.0
    q = height_distribution(q1, depth)
    rates = color_switch_rates(mu, depth, theta)
    a_coeff, c_coeff = color_coeffs(rates, omega, depth)
    profile = analytic_profile(mu, depth, nu, 0.0, q, rates, omega, zeta1sq=0.0)
    m_a, m_c = corollary_edge_counts(nu, mu, depth, q, a_coeff, c_coeff)
    assert profile.m_agree == pytest.approx(m_a, rel=1e-12)
    assert profile.m_conflict == pytest.approx(m_c, rel=1e-12)


def test_loop_count_uniform_heights_frozen():
    # M_L = sum_s q_s mu^{D-s} nu / 2 for constant marks: 13/6 at mu=3, D=3.
    q = np.array([0.0, 1 / 3, 1 / 3, 1 / 3])
    rates = color_switch_rates(3.0, 3, 2.0)
    profile = analytic_profile(3.0, 3, 1.0, 0.0, q, rates, 0.1)
    assert profile.m_loop == pytest.approx(13.0 / 6.0, rel=1e-12)


def test_degree_and_clustering_round_trip_with_cube_root():
    # The saturation map and its cube-root inverse agree on the fitted point.
    from hag.fitting import cube_root_derive

    profile_mu = 26.0
    rates = color_switch_rates(profile_mu, 4, 3.6247700755041596)
    q = height_distribution(0.8239214279683361, 4)
    profile = analytic_profile(profile_mu, 4, 50.19680221501149, 700.0, q, rates, 0.043)
    mu_back, d_a_prime_back, pi1_prime_back = cube_root_derive(
        profile.d_a, profile.alcc
    )
    assert mu_back == pytest.approx(1.0 + profile.d_a, rel=1e-12)
    assert d_a_prime_back == pytest.approx(profile.d_a_multi, rel=1e-5)
    assert pi1_prime_back == pytest.approx(profile.pi1_multi, rel=1e-5)


def test_profile_is_pure():
    q = height_distribution(0.82, 4)
    rates = color_switch_rates(26.0, 4, 3.62)
    p1 = analytic_profile(26.0, 4, 50.0, 700.0, q, rates, 0.043)
    p2 = analytic_profile(26.0, 4, 50.0, 700.0, q, rates, 0.043)
    assert p1.m_agree == p2.m_agree
    assert p1.alcc == p2.alcc
    np.testing.assert_array_equal(p1.h, p2.h)
    np.testing.assert_array_equal(p1.gamma, p2.gamma)
    # inputs are not mutated
    np.testing.assert_array_equal(q, height_distribution(0.82, 4))


def test_collision_mean_fixed_weights_closed_form():
    # Fixed weights: expected same-endpoint draws are (alpha/2) sum w^2 / sum w.
    w = np.arange(1.0, 6.0)
    alpha = 0.6
    expect = (alpha / 2.0) * float((w**2).sum() / w.sum())
    assert expect == pytest.approx(1.1, rel=1e-12)
    assert collision_mean(w, np.zeros_like(w), alpha) == pytest.approx(expect, rel=1e-12)
    # scalar eta2 broadcasts over a weight vector
    assert collision_mean(w, 0.0, alpha) == pytest.approx(expect, rel=1e-12)


def test_collision_mean_equal_moments_simplification():
    # Equal per-leaf moments reduce to (alpha/2)(nu + eta2/nu (1 - 1/n)).
    n, nu, eta2, alpha = 50, 3.0, 5.0, 0.4
    expect = (alpha / 2.0) * (nu + (eta2 / nu) * (1.0 - 1.0 / n))
    got = collision_mean(np.full(n, nu), np.full(n, eta2), alpha, n=n)
    assert got == pytest.approx(expect, rel=1e-9)


def test_collision_mean_lognormal_limit():
    # Log-normal marks: the large-n limit is (alpha/2) exp(mu + 3 sigma^2 / 2).
    mu_o, sigma_o, alpha = 0.5, 0.8, 0.6
    nu = math.exp(mu_o + sigma_o**2 / 2)
    eta2 = nu**2 * math.expm1(sigma_o**2)
    limit = (alpha / 2.0) * math.exp(mu_o + 1.5 * sigma_o**2)
    big_n = collision_mean(np.full(10**6, nu), np.full(10**6, eta2), alpha, n=10**6)
    assert big_n == pytest.approx(limit, rel=1e-3)


def test_depth_one_expected_frozen():
    m_e, m_a, m_c, loops = depth_one_expected(25, 0.8, 14.0, 3.6 * 14.0**2, 0.1, 0.08)
    assert m_e == pytest.approx(115.0464, rel=1e-12)
    assert m_a == pytest.approx(93.18758400000002, rel=1e-12)
    assert m_c == pytest.approx(3.3575141376, rel=1e-12)
    assert loops == pytest.approx(24.9536, rel=1e-12)
    # structural relations between the components
    rho, omega = 0.1, 0.08
    assert m_a == pytest.approx((1 - rho) ** 2 * m_e, rel=1e-12)
    assert m_c == pytest.approx(rho * (2 - rho) * omega * (2 - omega) * m_e, rel=1e-12)


@given(
    st.integers(min_value=3, max_value=200),
    st.floats(min_value=0.05, max_value=1.0),
    st.floats(min_value=0.5, max_value=50.0),
    st.floats(min_value=0.0, max_value=2000.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_depth_one_expected_relations(n, alpha, nu, eta2, rho, omega):
    m_e, m_a, m_c, loops = depth_one_expected(n, alpha, nu, eta2, rho, omega)
    # exact structural relations between the components, any parameters
    assert m_a == pytest.approx((1 - rho) ** 2 * m_e, rel=1e-12, abs=1e-12)
    assert m_c == pytest.approx(
        rho * (2 - rho) * omega * (2 - omega) * m_e, rel=1e-12, abs=1e-12
    )
    assert loops >= 0
    if eta2 <= n * nu**2:  # the dispersion regime where the formula applies
        assert m_e >= -1e-12
        assert m_a <= m_e + 1e-12
