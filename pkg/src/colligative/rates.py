"""Closed-form rate functions for the dilute salt/Ising solvent model.

Everything here is a pure function of a :class:`ModelParams` bundle and a
magnetization ``m``.  Functions accept floats or numpy arrays; domain
violations raise :class:`DomainError`.

Objects provided
----------------
``g``
    Salt free-energy gain ``log((1-m)/2 + e^kappa (1+m)/2)``.
``upsilon``
    Surface-order salt entropy at fixed salt-on-plus fraction ``theta``.
``surface_rate``
    Droplet cost ``w1 ((m* -/+ m) / 2m*)^((d-1)/d)`` for plus/minus boundary.
``q_joint`` / ``q_reduced``
    The joint rate function in ``(m, theta)`` and its infimum over ``theta``.
``e_profile``
    ``E_xi = -xi g + M`` and its zero-tilt version (chord subtracted).
``t_ratio`` / ``convexity_profile``
    Ratio ``M''/g''`` and the points where ``E_xi''`` changes sign.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "DomainError",
    "ModelParams",
    "BoundaryCondition",
    "ThermoPoint",
    "g",
    "upsilon",
    "theta_star",
    "surface_rate",
    "q_joint",
    "q_reduced",
    "chord_slope",
    "e_profile",
    "t_ratio",
    "t_minimum_location",
    "convexity_profile",
    "convex_cells",
    "onsager_mstar",
    "ISING_2D_JC",
]

#: Critical coupling of the square-lattice Ising model, ``asinh(1)/2``.
ISING_2D_JC = 0.5 * math.asinh(1.0)

_ROOT_XTOL = 1e-14
_ROOT_MAXITER = 200


class DomainError(ValueError):
    """Argument outside the domain of a closed-form expression."""


class BoundaryCondition(enum.Enum):
    PLUS = "plus"  # liquid
    MINUS = "minus"  # ice

    @classmethod
    def parse(cls, value: "str | BoundaryCondition") -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"boundary condition must be 'plus' or 'minus', got {value!r}") from None

    @property
    def sign(self) -> int:
        return 1 if self is BoundaryCondition.PLUS else -1


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs of the analytic layer.

    The Ising coupling enters only through ``m_star`` and ``w1``.
    """

    d: int = 2
    m_star: float = 0.8
    w1: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise DomainError(f"d must be an integer >= 2, got {self.d}")
        if not 0.0 < self.m_star < 1.0:
            raise DomainError(f"m_star must lie in (0, 1), got {self.m_star}")
        if not self.w1 > 0.0:
            raise DomainError(f"w1 must be positive, got {self.w1}")
        if not self.kappa > 0.0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")

    @property
    def coth_half_kappa(self) -> float:
        return 1.0 / math.tanh(0.5 * self.kappa)


@dataclass(frozen=True)
class ThermoPoint:
    """Scaled field ``b`` (limit of L h) and concentration ``xi`` (limit of L c)."""

    b: float
    xi: float

    def __post_init__(self):
        if not math.isfinite(self.b):
            raise DomainError(f"b must be finite, got {self.b}")
        if not (math.isfinite(self.xi) and self.xi >= 0.0):
            raise DomainError(f"xi must be finite and >= 0, got {self.xi}")


def _ret(x):
    """Unwrap 0-d arrays to Python floats."""
    return float(x) if np.ndim(x) == 0 else x


def _check_order(order: int) -> None:
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")


def g(p: ModelParams, m, order: int = 0):
    """Evaluate ``g`` or one of its first two derivatives.

    ``g'(m) = 1 / (m + coth(kappa/2))`` and ``g'' = -(g')**2``.
    """
    _check_order(order)
    m = np.asarray(m, dtype=float)
    if np.any(np.abs(m) > 1.0):
        raise DomainError("g is defined for |m| <= 1")
    if order == 0:
        # log((1-m)/2 + e^k (1+m)/2) = log1p((e^k - 1)(1+m)/2)
        return _ret(np.log1p(np.expm1(p.kappa) * 0.5 * (1.0 + m)))
    g1 = 1.0 / (m + p.coth_half_kappa)
    return _ret(g1 if order == 1 else -g1 * g1)


def _xlogy(x, y):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x == 0.0, 0.0, x * np.log(np.where(x == 0.0, 1.0, y)))
    return out


def upsilon(m, theta):
    """Salt entropy ``-theta log(2theta/(1+m)) - (1-theta) log(2(1-theta)/(1-m))``.

    Uses ``0 log 0 = 0`` at ``theta`` in {0, 1}.
    """
    m = np.asarray(m, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < 0.0) | (theta > 1.0)):
        raise DomainError("theta must lie in [0, 1]")
    if np.any((theta > 0.0) & (1.0 + m <= 0.0)) or np.any((theta < 1.0) & (1.0 - m <= 0.0)):
        raise DomainError("upsilon requires 1+m > 0 when theta > 0 and 1-m > 0 when theta < 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        a = _xlogy(theta, 2.0 * theta / (1.0 + m))
        b = _xlogy(1.0 - theta, 2.0 * (1.0 - theta) / (1.0 - m))
    return _ret(-a - b)


def theta_star(p: ModelParams, m):
    """Salt-on-plus fraction minimizing the joint rate at fixed ``m``.

    Stationarity of ``kappa theta + upsilon(m, theta)`` gives
    ``theta/(1-theta) = e^kappa (1+m)/(1-m)``.
    """
    m = np.asarray(m, dtype=float)
    if np.any(np.abs(m) > 1.0):
        raise DomainError("theta_star is defined for |m| <= 1")
    ek = math.exp(p.kappa)
    return _ret(ek * (1.0 + m) / (ek * (1.0 + m) + (1.0 - m)))


def _check_mag(p: ModelParams, m):
    m = np.asarray(m, dtype=float)
    # a hair of slack so that +-m_star computed as -(-m_star) etc. is accepted
    if np.any(np.abs(m) > p.m_star * (1.0 + 1e-14)):
        raise DomainError(f"|m| must not exceed m_star={p.m_star}")
    return np.clip(m, -p.m_star, p.m_star)


def surface_rate(p: ModelParams, bc: BoundaryCondition, m, order: int = 0):
    """Droplet cost ``M_pm(m)`` and its derivatives.

    Derivatives of order >= 1 diverge where the droplet volume vanishes
    (``m = m_star`` for plus, ``m = -m_star`` for minus); a signed infinity
    is returned there.
    """
    _check_order(order)
    bc = BoundaryCondition.parse(bc)
    m = _check_mag(p, m)
    two_ms = 2.0 * p.m_star
    a = (p.d - 1) / p.d
    s = (p.m_star - bc.sign * m) / two_ms
    with np.errstate(divide="ignore", invalid="ignore"):
        if order == 0:
            out = p.w1 * s**a
        elif order == 1:
            out = np.where(s > 0.0, -bc.sign * p.w1 * a * s ** (a - 1.0) / two_ms, -bc.sign * np.inf)
        else:
            out = np.where(s > 0.0, p.w1 * a * (a - 1.0) * s ** (a - 2.0) / two_ms**2, -np.inf)
    return _ret(out)


def q_joint(p: ModelParams, bc: BoundaryCondition, pt: ThermoPoint, m, theta):
    """Joint rate ``-b m - xi kappa theta - xi upsilon(m, theta) + M(m)``."""
    mag = surface_rate(p, bc, m)
    m = np.asarray(m, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if pt.xi == 0.0:
        upsilon(m, theta)  # domain check only
        return _ret(-pt.b * m + mag + 0.0 * theta)
    return _ret(-pt.b * m - pt.xi * p.kappa * theta - pt.xi * np.asarray(upsilon(m, theta)) + mag)


def q_reduced(p: ModelParams, bc: BoundaryCondition, pt: ThermoPoint, m):
    """Rate function ``Q(m) = -b m - xi g(m) + M(m)`` (theta eliminated)."""
    return _ret(-pt.b * np.asarray(m, dtype=float) + np.asarray(e_profile(p, bc, pt.xi, m)))


def chord_slope(fm, fp, m_star: float) -> float:
    """Slope of a function between ``-m_star`` (value ``fm``) and ``m_star`` (value ``fp``)."""
    return (fp - fm) / (2.0 * m_star)


def _e_endpoints(p: ModelParams, bc: BoundaryCondition, xi: float) -> tuple[float, float]:
    em = -xi * g(p, -p.m_star) + surface_rate(p, bc, -p.m_star)
    ep = -xi * g(p, p.m_star) + surface_rate(p, bc, p.m_star)
    return em, ep


def e_profile(p: ModelParams, bc: BoundaryCondition, xi: float, m, variant: str = "raw", order: int = 0):
    """``E_xi(m) = -xi g(m) + M(m)`` or its zero-tilt version.

    The tilted profile subtracts the chord through ``(+-m_star, E_xi(+-m_star))``
    and therefore vanishes at both endpoints.
    """
    _check_order(order)
    if variant not in ("raw", "tilted"):
        raise ValueError(f"variant must be 'raw' or 'tilted', got {variant!r}")
    if xi < 0.0:
        raise DomainError("xi must be >= 0")
    bc = BoundaryCondition.parse(bc)
    m = _check_mag(p, m)
    val = -xi * np.asarray(g(p, m, order)) + np.asarray(surface_rate(p, bc, m, order))
    if variant == "raw" or order == 2:
        return _ret(val)
    em, ep = _e_endpoints(p, bc, xi)
    slope = chord_slope(em, ep, p.m_star)
    if order == 1:
        return _ret(val - slope)
    out = val - em - (m + p.m_star) * slope
    # pin the anchors exactly
    out = np.where(np.abs(m) == p.m_star, 0.0, out)
    return _ret(out)


def _t_prefactor(p: ModelParams) -> float:
    d = p.d
    two_ms = 2.0 * p.m_star
    return p.w1 * (d - 1) * two_ms ** ((d + 1) / d) / (d * d * two_ms**2)


def t_ratio(p: ModelParams, bc: BoundaryCondition, m):
    """``T(m) = M''(m) / g''(m)``.

    Closed form ``C (m_star -/+ m)^(-(d+1)/d) (m + coth(kappa/2))**2``; diverges
    (``+inf``) at the endpoint where the droplet volume vanishes.
    ``E_xi`` is strictly convex exactly where ``T(m) < xi``.
    """
    bc = BoundaryCondition.parse(bc)
    m = _check_mag(p, m)
    base = p.m_star - bc.sign * m
    with np.errstate(divide="ignore"):
        out = np.where(
            base > 0.0,
            _t_prefactor(p) * base ** (-(p.d + 1) / p.d) * (m + p.coth_half_kappa) ** 2,
            np.inf,
        )
    return _ret(out)


def t_minimum_location(p: ModelParams) -> float:
    """Stationary point of ``T`` for the minus boundary (may lie beyond ``m_star``)."""
    d = p.d
    return ((d + 1) / d * p.coth_half_kappa - 2.0 * p.m_star) / ((d - 1) / d)


def _near_singular(p: ModelParams, bc: BoundaryCondition, xi: float, far: float) -> float:
    """A point between ``far`` and the singular endpoint where ``T > xi``."""
    end = bc.sign * p.m_star
    delta = abs(far - end)
    for _ in range(2000):
        delta *= 0.5
        m = end - bc.sign * delta
        if t_ratio(p, bc, m) > xi:
            return m
    raise RuntimeError("could not bracket T = xi next to the singular endpoint")


def _solve_t(p, bc, xi, lo, hi):
    return brentq(lambda m: t_ratio(p, bc, m) - xi, lo, hi, xtol=_ROOT_XTOL, maxiter=_ROOT_MAXITER)


def convexity_profile(p: ModelParams, bc: BoundaryCondition, xi: float) -> list[float]:
    """Points in ``(-m_star, m_star)`` where ``E_xi''`` changes sign.

    At most one point for the plus boundary, at most two for the minus one.
    """
    bc = BoundaryCondition.parse(bc)
    ms = p.m_star
    if bc is BoundaryCondition.PLUS:
        # T increases from T(-m_star) to +inf
        if not t_ratio(p, bc, -ms) < xi:
            return []
        return [_solve_t(p, bc, xi, -ms, _near_singular(p, bc, xi, -ms))]

    t_end = t_ratio(p, bc, ms)
    m_t = t_minimum_location(p)
    if m_t >= ms:
        # T decreases on the whole interval
        if not t_end < xi:
            return []
        return [_solve_t(p, bc, xi, _near_singular(p, bc, xi, ms), ms)]
    if not t_ratio(p, bc, m_t) < xi:
        return []
    roots = [_solve_t(p, bc, xi, _near_singular(p, bc, xi, m_t), m_t)]
    if t_end > xi:
        roots.append(_solve_t(p, bc, xi, m_t, ms))
    return roots


def convex_cells(p: ModelParams, bc: BoundaryCondition, xi: float) -> list[tuple[float, float]]:
    """Closed intervals of ``[-m_star, m_star]`` on which ``E_xi`` is convex."""
    ms = p.m_star
    cuts = [-ms, *convexity_profile(p, bc, xi), ms]
    cells = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        if t_ratio(p, bc, 0.5 * (lo + hi)) < xi:
            cells.append((lo, hi))
    return cells


def onsager_mstar(J: float) -> float:
    """Spontaneous magnetization of the square-lattice Ising model.

    Yang's formula ``(1 - sinh(2J)**-4)**(1/8)`` for ``J > J_c``; zero below.
    This is an external classical result, supplied so that simulation runs
    can be compared with the analytic layer.
    """
    if J <= ISING_2D_JC:
        return 0.0
    return (1.0 - math.sinh(2.0 * J) ** -4) ** 0.125
