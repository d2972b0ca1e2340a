import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from colligative.rates import (
    ISING_2D_JC,
    BoundaryCondition,
    DomainError,
    ModelParams,
    ThermoPoint,
    convex_cells,
    convexity_profile,
    e_profile,
    g,
    onsager_mstar,
    q_joint,
    q_reduced,
    surface_rate,
    t_minimum_location,
    t_ratio,
    theta_star,
    upsilon,
)
from oracles import golden_min, mp_g

P = ModelParams()
GAPPED = ModelParams(m_star=0.98, kappa=4.0)

params_st = st.builds(
    ModelParams,
    d=st.integers(2, 4),
    m_star=st.floats(0.2, 0.99),
    w1=st.floats(0.2, 5.0),
    kappa=st.floats(0.1, 8.0),
)
bc_st = st.sampled_from(list(BoundaryCondition))


# ---------------------------------------------------------------- g


def test_g_trivial_values():
    assert g(P, -1.0) == 0.0
    assert g(P, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_g_against_high_precision():
    assert g(P, 0.8) == pytest.approx(0.934701664001166, abs=1e-13)
    assert g(P, 0.8, 1) == pytest.approx(0.337387219166386, abs=1e-13)
    for m in (-0.9, -0.3, 0.0, 0.55):
        for order in (0, 1, 2):
            assert g(P, m, order) == pytest.approx(float(mp_g(1.0, m, order)), rel=1e-12, abs=1e-14)


def test_g_domain():
    with pytest.raises(DomainError):
        g(P, 1.01)
    with pytest.raises(ValueError):
        g(P, 0.0, order=3)


@given(params_st, st.floats(-0.999, 0.999))
def test_g_strictly_concave_and_derivatives_match_differences(p, m):
    h = 1e-5
    g1, g2 = g(p, m, 1), g(p, m, 2)
    assert g2 < 0.0
    assert g2 == pytest.approx(-g1 * g1, rel=1e-14)
    if abs(m) < 1 - 2 * h:
        fd1 = (g(p, m + h) - g(p, m - h)) / (2 * h)
        fd2 = (g(p, m + h, 1) - g(p, m - h, 1)) / (2 * h)
        assert fd1 == pytest.approx(g1, rel=1e-6)
        assert fd2 == pytest.approx(g2, rel=1e-6)


# ---------------------------------------------------------------- upsilon / theta*


def test_upsilon_examples():
    assert upsilon(0.0, 0.5) == 0.0
    assert upsilon(0.0, 1.0) == pytest.approx(-math.log(2.0))
    assert upsilon(0.5, 0.75) == pytest.approx(0.0, abs=1e-15)


def test_upsilon_domain():
    with pytest.raises(DomainError):
        upsilon(0.0, 1.2)
    with pytest.raises(DomainError):
        upsilon(-1.0, 0.5)
    assert upsilon(-1.0, 0.0) == pytest.approx(0.0)  # 0 log 0


def test_theta_star_examples():
    assert theta_star(P, 1.0) == 1.0
    assert theta_star(P, -1.0) == 0.0
    assert theta_star(P, 0.0) == pytest.approx(math.e / (math.e + 1.0), abs=1e-15)


def test_theta_star_matches_numeric_minimization_on_grid():
    ms = np.linspace(-0.95, 0.95, 50)
    f = lambda th: -P.kappa * th - np.asarray(upsilon(ms, th))  # noqa: E731
    th, _ = golden_min(f, np.zeros_like(ms), np.ones_like(ms), 1e-12)
    assert np.max(np.abs(th - theta_star(P, ms))) < 1e-8


@given(params_st, bc_st, st.floats(-1, 1), st.floats(0, 5), st.floats(0, 1))
def test_q_joint_is_bounded_below_by_q_reduced(p, bc, u, xi, theta):
    m = u * p.m_star
    pt = ThermoPoint(0.3, xi)
    assert q_joint(p, bc, pt, m, theta) >= q_reduced(p, bc, pt, m) - 1e-12


@given(params_st, bc_st, st.floats(-1, 1), st.floats(-3, 3), st.floats(0, 5))
def test_plugging_theta_star_reproduces_q_reduced(p, bc, u, b, xi):
    m = u * p.m_star
    pt = ThermoPoint(b, xi)
    assert q_joint(p, bc, pt, m, theta_star(p, m)) == pytest.approx(q_reduced(p, bc, pt, m), abs=1e-12)


def test_q_joint_examples():
    pt = ThermoPoint(0.0, 0.0)
    assert q_joint(P, "plus", pt, 0.8, 0.37) == 0.0
    assert q_joint(P, "plus", pt, -0.8, 0.0) == pytest.approx(1.0)
    pt = ThermoPoint(0.0, 1.0)
    th, v = golden_min(lambda t: np.asarray(q_joint(P, "plus", pt, 0.0, t)), 0.0, 1.0)
    assert float(th) == pytest.approx(0.7310585786300049, abs=1e-8)
    assert float(v) == pytest.approx(math.sqrt(0.5) - math.log((1 + math.e) / 2), abs=1e-12)


# ---------------------------------------------------------------- surface rate, Q, E


def test_surface_rate_examples():
    assert surface_rate(P, "plus", 0.8) == 0.0
    assert surface_rate(P, "plus", -0.8) == pytest.approx(1.0)
    assert surface_rate(P, "plus", 0.0) == pytest.approx(0.7071067811865476)
    assert surface_rate(P, "minus", -0.8) == 0.0
    assert surface_rate(P, "minus", 0.8) == pytest.approx(1.0)


def test_surface_rate_signed_infinity_at_vanishing_droplet():
    assert surface_rate(P, "plus", 0.8, 1) == -math.inf
    assert surface_rate(P, "minus", -0.8, 1) == math.inf
    assert surface_rate(P, "plus", 0.8, 2) == -math.inf
    with pytest.raises(DomainError):
        surface_rate(P, "plus", 0.81)


@given(params_st, st.floats(-0.98, 0.98))
def test_surface_rate_symmetry_and_concavity(p, u):
    m = u * p.m_star
    assert surface_rate(p, "plus", m) == pytest.approx(surface_rate(p, "minus", -m), rel=1e-14)
    assert surface_rate(p, "plus", m, 2) < 0.0
    h = 1e-5 * p.m_star
    fd = (surface_rate(p, "plus", m + h) - surface_rate(p, "plus", m - h)) / (2 * h)
    assert fd == pytest.approx(surface_rate(p, "plus", m, 1), rel=1e-5)


def test_q_reduced_examples():
    assert q_reduced(P, "plus", ThermoPoint(0, 0), 0.8) == 0.0
    assert q_reduced(P, "minus", ThermoPoint(1, 0), -0.8) == pytest.approx(0.8)
    assert q_reduced(P, "plus", ThermoPoint(0, 2), 0.0) == pytest.approx(-0.533122232730008, abs=1e-13)


def test_e_profile_examples():
    assert e_profile(P, "plus", 0.0, 0.8) == 0.0
    assert e_profile(P, "plus", 2.0, 0.0) == pytest.approx(-0.533122232730008, abs=1e-13)
    for bc in BoundaryCondition:
        for xi in (0.0, 0.5, 3.0):
            assert e_profile(P, bc, xi, -0.8, "tilted") == 0.0
            assert e_profile(P, bc, xi, 0.8, "tilted") == 0.0
    with pytest.raises(ValueError):
        e_profile(P, "plus", 1.0, 0.0, variant="bent")


@given(params_st, bc_st, st.floats(0, 10))
def test_tilted_profile_anchors_vanish(p, bc, xi):
    vals = e_profile(p, bc, xi, np.array([-p.m_star, p.m_star]), "tilted")
    assert np.all(np.abs(vals) <= 1e-12)


@given(params_st, bc_st, st.floats(-0.99, 0.99), st.floats(0, 5), st.floats(0.01, 2))
def test_tilted_profile_decreases_in_xi(p, bc, u, xi, dxi):
    m = u * p.m_star
    assert e_profile(p, bc, xi + dxi, m, "tilted") < e_profile(p, bc, xi, m, "tilted")


@given(params_st, bc_st, st.floats(-0.95, 0.95), st.floats(0, 5))
def test_e_profile_derivatives_match_differences(p, bc, u, xi):
    m = u * p.m_star
    h = 1e-6 * p.m_star
    for variant in ("raw", "tilted"):
        fd1 = (e_profile(p, bc, xi, m + h, variant) - e_profile(p, bc, xi, m - h, variant)) / (2 * h)
        assert fd1 == pytest.approx(e_profile(p, bc, xi, m, variant, 1), rel=1e-5, abs=1e-7)
        fd2 = (e_profile(p, bc, xi, m + h, variant, 1) - e_profile(p, bc, xi, m - h, variant, 1)) / (2 * h)
        assert fd2 == pytest.approx(e_profile(p, bc, xi, m, variant, 2), rel=1e-5, abs=1e-6)


# ---------------------------------------------------------------- T and convexity


@given(params_st, bc_st, st.floats(-0.99, 0.99))
def test_t_ratio_is_the_curvature_ratio(p, bc, u):
    m = u * p.m_star
    t = t_ratio(p, bc, m)
    assert t > 0.0
    assert t == pytest.approx(surface_rate(p, bc, m, 2) / g(p, m, 2), rel=1e-12)
    # convexity of E exactly where T < xi
    assert (e_profile(p, bc, 0.9 * t, m, order=2) < 0.0) and (e_profile(p, bc, 1.1 * t, m, order=2) > 0.0)


def test_t_ratio_infinite_at_vanishing_droplet():
    assert t_ratio(P, "plus", 0.8) == math.inf
    assert t_ratio(P, "minus", -0.8) == math.inf


def test_convexity_profile_plus_single_crossing_at_zero():
    xi = t_ratio(P, "plus", 0.0)
    roots = convexity_profile(P, "plus", xi)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(0.0, abs=1e-12)


def test_convexity_profile_minus_two_crossings():
    m_t = t_minimum_location(GAPPED)
    grid = np.linspace(-0.97, 0.98, 20001)
    tg = t_ratio(GAPPED, "minus", grid)
    assert abs(grid[np.argmin(tg)] - m_t) < 1e-3
    xi = t_ratio(GAPPED, "minus", m_t) * 1.01
    roots = convexity_profile(GAPPED, "minus", xi)
    assert len(roots) == 2
    assert roots[0] < m_t < roots[1]
    for r in roots:
        assert t_ratio(GAPPED, "minus", r) == pytest.approx(xi, rel=1e-10)


@given(params_st, bc_st, st.floats(0.01, 20))
def test_convex_cells_agree_with_sign_of_second_derivative(p, bc, xi):
    cells = convex_cells(p, bc, xi)
    grid = np.linspace(-p.m_star, p.m_star, 401)[1:-1]
    e2 = np.asarray(e_profile(p, bc, xi, grid, order=2))
    inside = np.zeros_like(grid, dtype=bool)
    for lo, hi in cells:
        inside |= (grid > lo + 1e-9) & (grid < hi - 1e-9)
        edge = (grid > lo - 1e-9) & (grid < hi + 1e-9)
        assert np.all(e2[inside & edge] > 0.0)
    border = np.zeros_like(inside)
    for x in [c for cell in cells for c in cell]:
        border |= np.abs(grid - x) < 1e-9
    assert np.all(e2[~inside & ~border] <= 1e-12)
    expected = 1 if bc is BoundaryCondition.PLUS else 2
    assert len(convexity_profile(p, bc, xi)) <= expected


# ---------------------------------------------------------------- params


def test_model_params_validation():
    for bad in (dict(d=1), dict(m_star=1.0), dict(m_star=0.0), dict(w1=0.0), dict(kappa=0.0)):
        with pytest.raises(DomainError):
            ModelParams(**bad)
    with pytest.raises(DomainError):
        ThermoPoint(0.0, -1.0)
    with pytest.raises(DomainError):
        ThermoPoint(math.inf, 1.0)
    assert BoundaryCondition.parse("Minus") is BoundaryCondition.MINUS
    with pytest.raises(ValueError):
        BoundaryCondition.parse("sideways")


def test_onsager_helper():
    assert onsager_mstar(0.3) == 0.0
    assert onsager_mstar(ISING_2D_JC) == 0.0
    assert onsager_mstar(0.6) == pytest.approx(0.9736086, abs=1e-6)
