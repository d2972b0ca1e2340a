"""Built-in numerical self-check.

Reference numbers were computed independently at 50-digit precision and are
frozen here; the checks confirm that the installed build reproduces them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .curves import (
    b0_separation_window,
    b2_plus,
    curve_point,
    locate_threshold,
    part1_boundary,
    thresholds_minus,
    xi_t_plus,
)
from .exact import exact_distribution, salt_count
from .rates import BoundaryCondition, ModelParams, ThermoPoint, g, q_reduced, surface_rate, theta_star
from .rng import philox4x32
from .variational import minimize_q

__all__ = ["Check", "CHECKS", "run_selftest"]

CANONICAL = ModelParams(d=2, m_star=0.8, w1=1.0, kappa=1.0)
GAPPED = ModelParams(d=2, m_star=0.98, w1=1.0, kappa=4.0)


@dataclass(frozen=True)
class Check:
    name: str
    run: Callable[[], tuple[bool, str]]


def _close(name, got, want, tol):
    return abs(got - want) <= tol, f"{name}={got:.12g} reference={want:.12g} tol={tol:g}"


def _g_values():
    ok1, s1 = _close("g(0.8)", g(CANONICAL, 0.8), 0.934701664001166, 1e-12)
    ok2, s2 = _close("g'(0.8)", g(CANONICAL, 0.8, 1), 0.337387219166386, 1e-12)
    return ok1 and ok2, f"{s1}; {s2}"


def _theta():
    return _close("theta*(0)", theta_star(CANONICAL, 0.0), math.e / (math.e + 1.0), 1e-14)


def _surface():
    return _close("M+(0)", surface_rate(CANONICAL, "plus", 0.0), math.sqrt(0.5), 1e-14)


def _q_example():
    return _close("Q+(0; b=0, xi=2)", q_reduced(CANONICAL, "plus", ThermoPoint(0.0, 2.0), 0.0), -0.533122232730008, 1e-12)


def _xi_t():
    closed = xi_t_plus(CANONICAL)
    ok1, s1 = _close("xi_t", closed, 1.25968696921638, 1e-11)
    located = locate_threshold(CANONICAL, BoundaryCondition.PLUS, 0.5, 2.0)
    ok2, s2 = _close("located xi_t", located, closed, 1e-6)
    return ok1 and ok2, f"{s1}; {s2}"


def _b2():
    return _close("b2(2)", b2_plus(CANONICAL, 2.0), -1.77882574093415, 1e-11)


def _minus_canonical():
    th = thresholds_minus(CANONICAL)
    ok1, s1 = _close("xi_1", th.xi_1, 2.11580176967740, 1e-11)
    ok2, s2 = _close("xi_2", th.xi_2, 0.857912093634083, 1e-11)
    ok3 = th.xi_t == th.xi_u == th.xi_1
    return ok1 and ok2 and ok3, f"{s1}; {s2}; case={'3b' if th.has_gap else '3a'}"


def _minus_gapped():
    th = thresholds_minus(GAPPED)
    ok = th.has_gap and th.xi_t < th.xi_1 < th.xi_u == th.xi_2
    ok1, s1 = _close("xi_1", th.xi_1, 0.193096681218657, 1e-11)
    ok2, s2 = _close("xi_2", th.xi_2, 0.264834878856731, 1e-11)
    return ok and ok1 and ok2, f"{s1}; {s2}; xi~_t={th.xi_t:.10g}"


def _triple():
    th = thresholds_minus(GAPPED)
    b = curve_point(GAPPED, "minus", th.xi_t).b_upper
    res = minimize_q(GAPPED, "minus", ThermoPoint(b, th.xi_t))
    return res.multiplicity == 3, str(res)


def _window():
    w = b0_separation_window(CANONICAL)
    w3 = b0_separation_window(GAPPED)
    ok = w is None and w3 is not None
    if ok:
        mid = 0.5 * (w3[0] + w3[1])
        ok = minimize_q(GAPPED, "minus", ThermoPoint(0.0, mid)).classification.value == "interior"
    return ok, f"canonical={w} gapped={w3}"


def _part1():
    c = 1e-4
    ratio = part1_boundary(CANONICAL, c).h_plus / c
    want = -g(CANONICAL, 0.8, 1)
    return abs(ratio / want - 1.0) < 0.01, f"h+(c)/c={ratio:.8g} limit={want:.8g}"


def _salt():
    vals = (salt_count(4, 0, 2, 1), salt_count(4, 4, 1, 0), salt_count(2, 0, 0, 0))
    return vals == (4, 0, 1), f"counts={vals}"


def _oracle():
    d = exact_distribution(3, "plus", 0.3, 1.0, 0.3, 0.1)
    total = float(d.prob.sum())
    return abs(total - 1.0) < 1e-12, f"sum={total!r}"


def _philox():
    got = tuple(int(x) for x in philox4x32(0, 0, 0, 0, 0, 0))
    want = (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)
    return got == want, "counter=0 key=0 -> " + " ".join(f"{x:08x}" for x in got)


CHECKS = [
    Check("g_values", _g_values),
    Check("theta_star", _theta),
    Check("surface_rate", _surface),
    Check("q_reduced_example", _q_example),
    Check("xi_t_plus", _xi_t),
    Check("b2_plus", _b2),
    Check("thresholds_minus_3a", _minus_canonical),
    Check("thresholds_minus_3b", _minus_gapped),
    Check("triple_point", _triple),
    Check("b0_window", _window),
    Check("part1_linkage", _part1),
    Check("salt_count", _salt),
    Check("exact_normalization", _oracle),
    Check("philox_kat", _philox),
]


def run_selftest(out=print) -> bool:
    """Run every check, print one line each, return overall success."""
    all_ok = True
    for check in CHECKS:
        try:
            ok, detail = check.run()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        out(f"{'PASS' if ok else 'FAIL'} {check.name}: {detail}")
    out(f"{'PASS' if all_ok else 'FAIL'} selftest: {len(CHECKS)} checks")
    return all_ok
