import numpy as np
import pytest

from colligative.curves import b1_plus, b2_plus, curve_point, thresholds_minus, xi_t_plus
from colligative.diagram import (
    GridSpec,
    Regime,
    classify,
    curve_branches,
    droplet_fraction,
    raster,
    write_csv,
    write_figure,
    write_svg,
)
from colligative.rates import DomainError, ModelParams, ThermoPoint

P = ModelParams()
GAPPED = ModelParams(m_star=0.98, kappa=4.0)


def test_classify_liquid_above_b1():
    lab = classify(P, "plus", ThermoPoint(b1_plus(P, 2.0) + 0.1, 2.0))
    assert lab.regime is Regime.LIQUID
    assert lab.droplet_fraction == 0.0


def test_classify_ice_and_band():
    assert classify(P, "plus", ThermoPoint(b2_plus(P, 2.0) - 0.1, 2.0)).regime is Regime.ICE
    mid = 0.5 * (b1_plus(P, 3.0) + b2_plus(P, 3.0))
    lab = classify(P, "plus", ThermoPoint(mid, 3.0))
    assert lab.regime is Regime.PHASE_SEPARATION
    assert 0.0 < lab.droplet_fraction < 1.0


def test_no_phase_separation_below_threshold():
    xt = xi_t_plus(P)
    for xi in np.linspace(0.0, xt, 9):
        for b in np.linspace(-3, 1, 41):
            assert classify(P, "plus", ThermoPoint(float(b), float(xi))).regime in (Regime.LIQUID, Regime.ICE)


def test_boundary_labels_within_tolerance():
    b1 = b1_plus(P, 2.0)
    assert classify(P, "plus", ThermoPoint(b1 + 1e-4, 2.0), tol=1e-3).regime is Regime.BOUNDARY_UPPER
    b2 = b2_plus(P, 2.0)
    assert classify(P, "plus", ThermoPoint(b2 - 1e-4, 2.0), tol=1e-3).regime is Regime.BOUNDARY_LOWER


def test_gapped_minus_fraction_jumps_across_lower_curve():
    th = thresholds_minus(GAPPED)
    xi = 0.5 * (th.xi_t + th.xi_u)
    b2 = curve_point(GAPPED, "minus", xi).b_lower
    below = classify(GAPPED, "minus", ThermoPoint(b2 - 1e-6, xi))
    above = classify(GAPPED, "minus", ThermoPoint(b2 + 1e-6, xi))
    assert below.regime is Regime.ICE and below.droplet_fraction == 0.0
    assert above.regime is Regime.PHASE_SEPARATION and above.droplet_fraction > 0.05


def test_triple_point_label():
    th = thresholds_minus(GAPPED)
    b = curve_point(GAPPED, "minus", th.xi_t).b_upper
    lab = classify(GAPPED, "minus", ThermoPoint(b, th.xi_t), tol=1e-9)
    assert lab.regime is Regime.TRIPLE_POINT
    assert lab.droplet_fraction == pytest.approx(droplet_fraction(GAPPED, "minus", th.m0))


def test_all_liquid_small_grid():
    r = raster(P, "plus", GridSpec(0.1, 0.5, 2.0, 3.0, 2, 2))
    assert all(c.regime is Regime.LIQUID for row in r.cells for c in row)


def test_grid_validation():
    with pytest.raises(DomainError):
        GridSpec(n_xi=0)
    with pytest.raises(DomainError):
        GridSpec(xi_min=2.0, xi_max=1.0)


def _column(r, i):
    return [r.cells[j][i] for j in range(r.grid.n_b)]


@pytest.fixture(scope="module")
def plus_raster():
    return raster(P, "plus", GridSpec(0.0, 5.0, -3.5, 0.0, 40, 160))


@pytest.fixture(scope="module")
def gapped_raster():
    return raster(GAPPED, "minus", GridSpec(0.0, 0.6, -0.5, 0.8, 40, 160))


def test_band_ordering_and_no_direct_liquid_to_ice(plus_raster):
    r = plus_raster
    xt = xi_t_plus(P)
    for i, xi in enumerate(r.grid.xi_centers()):
        seq = [c.regime for c in _column(r, i) if c.regime in (Regime.ICE, Regime.PHASE_SEPARATION, Regime.LIQUID)]
        order = {Regime.ICE: 0, Regime.PHASE_SEPARATION: 1, Regime.LIQUID: 2}
        assert [order[s] for s in seq] == sorted(order[s] for s in seq)
        if xi > 1.5 * xt:
            assert Regime.PHASE_SEPARATION in seq
            assert seq[-1] is Regime.LIQUID
            if b2_plus(P, xi) > r.grid.b_min + r.grid.d_b:
                assert seq[0] is Regime.ICE


def test_fraction_monotone_with_jump_at_upper_curve(plus_raster):
    r = plus_raster
    for i, xi in enumerate(r.grid.xi_centers()):
        if xi < 2 * xi_t_plus(P):
            continue
        fr = np.array([c.droplet_fraction for c in _column(r, i)])
        assert np.all(np.diff(fr) <= 1e-12)  # fraction falls as b rises
        steps = np.abs(np.diff(fr))
        med = np.median(steps[steps > 0])
        big = np.flatnonzero(steps > 10 * med)
        assert len(big) >= 1
        b_big = r.grid.b_centers()[big[-1]]
        assert abs(b_big - b1_plus(P, xi)) < 2 * r.grid.d_b


def test_gapped_raster_has_two_jumps_in_gap_region(gapped_raster):
    r = gapped_raster
    th = thresholds_minus(GAPPED)
    checked = 0
    for i, xi in enumerate(r.grid.xi_centers()):
        if not th.xi_t + 0.02 < xi < th.xi_u - 0.02:
            continue
        fr = np.array([c.droplet_fraction for c in _column(r, i)])
        assert np.all(np.diff(fr) >= -1e-12)
        steps = np.diff(fr)
        med = np.median(steps[steps > 0])
        assert np.count_nonzero(steps > 10 * med) >= 2
        checked += 1
    assert checked > 0


@pytest.mark.parametrize("fixture", ["plus_raster", "gapped_raster"])
def test_phase_separation_cells_lie_inside_band(fixture, request):
    r = request.getfixturevalue(fixture)
    for i, xi in enumerate(r.grid.xi_centers()):
        c = curve_point(r.params, r.bc, float(xi))
        for j, b in enumerate(r.grid.b_centers()):
            if r.cells[j][i].regime is Regime.PHASE_SEPARATION:
                assert c.b_lower - r.grid.d_b <= b <= c.b_upper + r.grid.d_b


def test_csv_is_deterministic(tmp_path):
    grid = GridSpec(0.0, 4.0, -3.0, 1.0, 12, 10)
    a = write_csv(raster(P, "minus", grid), tmp_path / "a.csv", "# x\n").read_bytes()
    b = write_csv(raster(P, "minus", grid), tmp_path / "b.csv", "# x\n").read_bytes()
    assert a == b
    lines = a.decode().splitlines()
    assert lines[1] == "xi,b,regime,droplet_fraction"
    assert len(lines) == 2 + 120
    assert {ln.split(",")[2] for ln in lines[2:]} <= {r.value for r in Regime}


def test_write_errors_name_the_path(tmp_path):
    r = raster(P, "plus", GridSpec(0.1, 0.5, 2.0, 3.0, 2, 2))
    bad = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="missing"):
        write_csv(r, bad)
    with pytest.raises(OSError, match="missing"):
        write_svg(r, tmp_path / "missing" / "x.svg")


def test_curve_branches_styles():
    plus = {(b.name, b.thick) for b in curve_branches(P, "plus", 0.0, 4.0)}
    assert plus == {("merged", True), ("upper", True), ("lower", False)}
    minus = [(b.name, b.thick) for b in curve_branches(GAPPED, "minus", 0.0, 0.6)]
    assert sorted(minus) == sorted([("merged", True), ("upper", True), ("upper", False), ("lower", True)])
    # branches start where the merged curve ends
    branches = curve_branches(P, "plus", 0.0, 4.0)
    end = [b for b in branches if b.name == "merged"][0].points[-1]
    for b in branches:
        if b.name != "merged":
            assert b.points[0] == end


def test_svg_and_figure(tmp_path):
    r = raster(GAPPED, "minus", GridSpec(0.0, 0.6, -0.5, 0.8, 8, 8))
    svg = write_svg(r, tmp_path / "d.svg").read_text()
    assert svg.startswith("<svg")
    assert svg.count("<polyline") == 4
    assert "stroke-width:3" in svg and "stroke-width:1" in svg
    png = write_figure(r, tmp_path / "d.png")
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
