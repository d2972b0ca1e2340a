"""Thresholds and phase-boundary curves in the scaled ``(xi, b)`` plane.

For each boundary condition there is an upper curve (``b_1`` / ``b~_1``)
above which ``m = m_star`` (all liquid) wins, and a lower curve
(``b_2`` / ``b~_2``) below which ``m = -m_star`` (all ice) wins.  Between them the minimizer is interior: a macroscopic
droplet of the minority phase.

All curves are obtained from the zero-tilt profile ``E^_xi``: the upper
curve is the slope of the lowest line supporting the graph of ``E_xi`` at
``m_star``, the lower curve the slope of the one supporting it at
``-m_star``.  When the supporting line touches a second, interior point
the two tangency conditions are solved by bracketed root finding inside the
convexity cell of ``E_xi``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .rates import (
    BoundaryCondition,
    ModelParams,
    chord_slope,
    convex_cells,
    e_profile,
    g,
)

__all__ = [
    "CurveError",
    "CurvePoint",
    "MinusThresholds",
    "CriticalCurves",
    "tilted_minimum",
    "locate_threshold",
    "xi_t_plus",
    "b2_plus",
    "m1_plus",
    "b1_plus",
    "thresholds_minus",
    "tilde_curves",
    "curve_point",
    "critical_curves",
    "gap_condition",
    "part1_solve",
    "part1_boundary",
    "b0_separation_window",
]

_XTOL = 1e-14
_MAXITER = 200


class CurveError(RuntimeError):
    """A tangency solve failed to bracket its root (branch logic bug)."""


def _root(f, lo, hi, what):
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise CurveError(f"{what}: no sign change on [{lo!r}, {hi!r}] ({flo!r}, {fhi!r})")
    return brentq(f, lo, hi, xtol=_XTOL, rtol=1e-15, maxiter=_MAXITER)


def tilted_minimum(p: ModelParams, bc: BoundaryCondition, xi: float):
    """Lowest point of the zero-tilt profile.

    Returns ``(m, value, cell)`` where ``cell`` is the convexity interval
    containing ``m``; ``(-m_star, 0.0, None)`` if the profile is nonnegative.
    Off the convex cells the profile is concave, so its minimum there sits on
    a cell boundary or at an anchor (where it vanishes).
    """
    bc = BoundaryCondition.parse(bc)
    best = (-p.m_star, 0.0, None)
    for lo, hi in convex_cells(p, bc, xi):

        def d1(m):
            return e_profile(p, bc, xi, m, "tilted", 1)

        if d1(lo) >= 0.0:
            m = lo
        elif d1(hi) <= 0.0:
            m = hi
        else:
            m = brentq(d1, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=_MAXITER)
        v = e_profile(p, bc, xi, m, "tilted")
        if v < best[1]:
            best = (m, v, (lo, hi))
    return best


def locate_threshold(p: ModelParams, bc: BoundaryCondition, lo: float, hi: float) -> float:
    """Smallest ``xi`` in ``(lo, hi]`` where the zero-tilt profile dips below zero.

    Plain bisection on the sign of its minimum; the sign is monotone in ``xi``
    because the profile decreases in ``xi`` at every interior ``m``.
    """
    bc = BoundaryCondition.parse(bc)

    def negative(xi):
        return tilted_minimum(p, bc, xi)[1] < 0.0

    if negative(lo) or not negative(hi):
        raise CurveError(f"threshold not bracketed by xi in [{lo!r}, {hi!r}]")
    for _ in range(_MAXITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-15 * max(1.0, hi):
            break
        if negative(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _d_star_g(p: ModelParams) -> float:
    return chord_slope(g(p, -p.m_star), g(p, p.m_star), p.m_star)


def xi_t_plus(p: ModelParams) -> float:
    """Concentration threshold for phase separation under the plus boundary."""
    denom = g(p, -p.m_star, 1) - _d_star_g(p)
    if not denom > 0.0:
        return math.inf
    return p.w1 / (2.0 * p.m_star * p.d) / denom


def b2_plus(p: ModelParams, xi: float) -> float:
    """Lower (ice) boundary for the plus boundary condition; piecewise linear."""
    two_ms = 2.0 * p.m_star
    if xi < xi_t_plus(p):
        return -p.w1 / two_ms - xi * _d_star_g(p)
    return -(p.d - 1) / p.d * p.w1 / two_ms - xi * g(p, -p.m_star, 1)


def m1_plus(p: ModelParams, xi: float) -> float:
    """Interior minimizer on the upper curve ``b_1`` (plus boundary).

    Root of ``E(m_star) - E(m) - (m_star - m) E'(m)`` in ``(-m_star, T^-1(xi))``.
    For ``xi <= xi_t`` the other minimizer on the curve is ``-m_star``.
    """
    bc = BoundaryCondition.PLUS
    ms = p.m_star
    if xi <= xi_t_plus(p):
        return -ms
    e_top = e_profile(p, bc, xi, ms)

    def f(m):
        return e_top - e_profile(p, bc, xi, m) - (ms - m) * e_profile(p, bc, xi, m, order=1)

    cells = convex_cells(p, bc, xi)
    if not cells:
        raise CurveError(f"no convexity interval at xi={xi!r}")
    hi = cells[0][1]
    return _root(f, -ms, hi, f"m1 at xi={xi!r}")


def b1_plus(p: ModelParams, xi: float) -> float:
    """Upper (liquid) boundary for the plus boundary condition."""
    if xi <= xi_t_plus(p):
        return b2_plus(p, xi)
    return e_profile(p, BoundaryCondition.PLUS, xi, m1_plus(p, xi), order=1)


@dataclass(frozen=True)
class MinusThresholds:
    xi_t: float
    xi_u: float
    xi_1: float
    xi_2: float
    m0: float | None = None  # triple-point magnetization when xi_t < xi_u

    @property
    def has_gap(self) -> bool:
        return self.xi_t < self.xi_u


def gap_condition(p: ModelParams) -> bool:
    """Inequality on ``g`` that holds iff ``xi_1 >= xi_2``; evaluated directly."""
    ms = p.m_star
    lhs = g(p, ms) - 2.0 * ms * g(p, ms, 1) + p.d / (p.d - 1) * (2.0 * ms) ** 2 * g(p, ms, 2)
    return lhs <= g(p, -ms)


@functools.lru_cache(maxsize=256)
def thresholds_minus(p: ModelParams) -> MinusThresholds:
    """``(xi~_t, xi~_u, xi_1, xi_2)`` for the minus boundary condition."""
    ms = p.m_star
    xi_1 = p.w1 / (2.0 * ms * p.d) / (_d_star_g(p) - g(p, ms, 1))
    xi_2 = -(p.d - 1) * p.w1 / ((2.0 * ms * p.d) ** 2 * g(p, ms, 2))
    if xi_1 >= xi_2:
        return MinusThresholds(xi_1, xi_1, xi_1, xi_2)
    xi_t = locate_threshold(p, BoundaryCondition.MINUS, 0.0, xi_1)
    m0 = tilted_minimum(p, BoundaryCondition.MINUS, xi_t)[0]
    if not xi_t < xi_1:
        raise CurveError("gap case requires xi~_t < xi_1")
    return MinusThresholds(xi_t, xi_2, xi_1, xi_2, m0)


@dataclass(frozen=True)
class CurvePoint:
    """Both boundary curves at one ``xi`` plus their second touching points.

    ``m_upper`` is the minimizer other than ``m_star`` on the upper curve and
    ``m_lower`` the one other than ``-m_star`` on the lower curve.  A value of
    ``-m_star`` (resp. ``m_star``) means the curve is a direct ice/liquid jump
    or, on a continuous branch, that the droplet shrinks to nothing.
    """

    xi: float
    b_upper: float
    b_lower: float
    m_upper: float
    m_lower: float
    upper_jump: bool
    lower_jump: bool


def tilde_curves(p: ModelParams, xi: float) -> CurvePoint:
    """Upper and lower boundary curves for the minus (ice) boundary condition."""
    bc = BoundaryCondition.MINUS
    ms = p.m_star
    two_ms = 2.0 * ms
    th = thresholds_minus(p)
    if xi <= th.xi_t:
        b = p.w1 / two_ms - xi * _d_star_g(p)
        if th.m0 is not None and xi == th.xi_t:
            return CurvePoint(xi, b, b, th.m0, th.m0, True, True)
        return CurvePoint(xi, b, b, -ms, ms, True, True)

    m_min, v_min, cell = tilted_minimum(p, bc, xi)
    if cell is None or not v_min < 0.0:
        raise CurveError(f"expected a negative tilted minimum above xi~_t (xi={xi!r})")
    lo, hi = cell

    def d1(m):
        return e_profile(p, bc, xi, m, "tilted", 1)

    def lower_residual(m):
        return e_profile(p, bc, xi, m, "tilted") - (m + ms) * d1(m)

    m2 = _root(lower_residual, lo, m_min, f"m2 at xi={xi!r}")
    b_lower = e_profile(p, bc, xi, m2, order=1)

    if xi >= th.xi_u:
        b_upper = (p.d - 1) / p.d * p.w1 / two_ms - xi * g(p, ms, 1)
        return CurvePoint(xi, b_upper, b_lower, ms, m2, False, True)

    def upper_residual(m):
        return -e_profile(p, bc, xi, m, "tilted") - (ms - m) * d1(m)

    m1 = _root(upper_residual, m_min, hi, f"m1 at xi={xi!r}")
    b_upper = e_profile(p, bc, xi, m1, order=1)
    if m2 > m1:
        raise CurveError(f"tangency points out of order at xi={xi!r}")
    return CurvePoint(xi, b_upper, b_lower, m1, m2, True, True)


def _plus_point(p: ModelParams, xi: float) -> CurvePoint:
    ms = p.m_star
    xt = xi_t_plus(p)
    b2 = b2_plus(p, xi)
    if xi <= xt:
        return CurvePoint(xi, b2, b2, -ms, ms, True, True)
    m1 = m1_plus(p, xi)
    b1 = e_profile(p, BoundaryCondition.PLUS, xi, m1, order=1)
    return CurvePoint(xi, b1, b2, m1, -ms, True, False)


def curve_point(p: ModelParams, bc: BoundaryCondition, xi: float) -> CurvePoint:
    bc = BoundaryCondition.parse(bc)
    if xi < 0.0:
        raise ValueError("xi must be >= 0")
    if bc is BoundaryCondition.PLUS:
        return _plus_point(p, xi)
    return tilde_curves(p, xi)


@dataclass
class CriticalCurves:
    bc: BoundaryCondition
    xi_t: float
    xi_u: float
    xi_1: float | None = None
    xi_2: float | None = None
    m0: float | None = None
    samples: list[CurvePoint] = field(default_factory=list)

    def as_array(self) -> np.ndarray:
        """Rows of ``(xi, b_upper, b_lower)``."""
        return np.array([(s.xi, s.b_upper, s.b_lower) for s in self.samples], dtype=float)


def critical_curves(
    p: ModelParams,
    bc: BoundaryCondition,
    n: int = 512,
    xi_max: float | None = None,
    xi_min: float | None = None,
    xis=None,
) -> CriticalCurves:
    """Thresholds plus the two curves sampled on a log-spaced ``xi`` grid.

    The default grid spans ``(0, 8 max(xi_t, xi_2)]`` with ``n`` points.
    """
    bc = BoundaryCondition.parse(bc)
    if bc is BoundaryCondition.PLUS:
        xt = xi_t_plus(p)
        out = CriticalCurves(bc, xt, xt)
        scale = xt
    else:
        th = thresholds_minus(p)
        out = CriticalCurves(bc, th.xi_t, th.xi_u, th.xi_1, th.xi_2, th.m0)
        scale = max(th.xi_t, th.xi_2)
    if xis is None:
        hi = xi_max if xi_max is not None else 8.0 * scale
        lo = xi_min if xi_min is not None else hi * 1e-3
        xis = np.geomspace(lo, hi, n)
    out.samples = [curve_point(p, bc, float(x)) for x in xis]
    return out


def part1_solve(kappa: float, m: float, c: float) -> tuple[float, float, float]:
    """Finite-concentration boundary ``h`` at concentration ``c``.

    Solves ``q+/(1-q+) = e^kappa q-/(1-q-)`` together with
    ``q+ (1+m)/2 + q- (1-m)/2 = c`` and returns ``(h, q+, q-)`` with
    ``h = log((1-q+)/(1-q-)) / 2``.  ``m = m_star`` gives the liquid-side
    curve, ``m = -m_star`` the ice-side one.
    """
    if not 0.0 <= c < 1.0:
        raise ValueError(f"concentration must lie in [0, 1), got {c!r}")
    if c == 0.0:
        return 0.0, 0.0, 0.0
    ek = math.exp(kappa)

    def q_plus(qm):
        return ek * qm / (1.0 - qm + ek * qm)

    def f(qm):
        return q_plus(qm) * 0.5 * (1.0 + m) + qm * 0.5 * (1.0 - m) - c

    qm = brentq(f, 0.0, 1.0, xtol=1e-300, rtol=1e-15, maxiter=_MAXITER)
    qp = q_plus(qm)
    h = 0.5 * (math.log1p(-qp) - math.log1p(-qm))
    return h, qp, qm


@dataclass(frozen=True)
class Part1Point:
    c: float
    h_plus: float
    h_minus: float
    q_plus: float
    q_minus: float


def part1_boundary(p: ModelParams, c: float) -> Part1Point:
    """Both finite-concentration boundary curves at ``c`` (``q`` from the liquid side)."""
    hp, qp, qm = part1_solve(p.kappa, p.m_star, c)
    hm = part1_solve(p.kappa, -p.m_star, c)[0]
    return Part1Point(c, hp, hm, qp, qm)


def b0_separation_window(p: ModelParams) -> tuple[float, float] | None:
    """Open ``xi`` interval where the minus-bc droplet phase reaches ``b = 0``.

    Both sufficient inequalities for an interior minimizer at ``b = 0`` hold
    on ``(w1 / (g(m*) - g(-m*)), (d-1)/d w1 / (2 m* g'(m*)))``; ``None`` when
    that interval is empty.
    """
    ms = p.m_star
    lower = p.w1 / (g(p, ms) - g(p, -ms))
    upper = (p.d - 1) / p.d * p.w1 / (2.0 * ms * g(p, ms, 1))
    if lower >= upper:
        return None
    return lower, upper

