"""Regime classification of the scaled ``(xi, b)`` plane and its renderings.

Points are labelled by comparing ``b`` with the two boundary curves of the
chosen boundary condition.  Inside the band between the curves the droplet
volume fraction comes from the lever rule applied to the minimizer of the
reduced rate function.

Outputs are a CSV raster, a hand-written SVG (shaded cells plus one
polyline per curve branch, thick where the minimizer jumps, thin where it
moves continuously) and an optional matplotlib PNG.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curves import CurvePoint, critical_curves, curve_point, thresholds_minus, xi_t_plus
from .rates import BoundaryCondition, DomainError, ModelParams, ThermoPoint
from .variational import minimize_q

__all__ = [
    "Regime",
    "RegimeLabel",
    "GridSpec",
    "DiagramRaster",
    "droplet_fraction",
    "classify",
    "raster",
    "curve_branches",
    "write_csv",
    "write_svg",
    "write_figure",
]


class Regime(enum.Enum):
    LIQUID = "liquid"
    ICE = "ice"
    PHASE_SEPARATION = "phase_separation"
    BOUNDARY_UPPER = "boundary_upper"
    BOUNDARY_LOWER = "boundary_lower"
    TRIPLE_POINT = "triple_point"


@dataclass(frozen=True)
class RegimeLabel:
    regime: Regime
    droplet_fraction: float


def droplet_fraction(p: ModelParams, bc: BoundaryCondition, m: float) -> float:
    """Minority-phase volume fraction at magnetization ``m`` (lever rule)."""
    bc = BoundaryCondition.parse(bc)
    if bc is BoundaryCondition.PLUS:
        return (p.m_star - m) / (2.0 * p.m_star)
    return (m + p.m_star) / (2.0 * p.m_star)


def _triple_point(p: ModelParams, bc: BoundaryCondition) -> tuple[float, float] | None:
    if bc is not BoundaryCondition.MINUS:
        return None
    th = thresholds_minus(p)
    if not th.has_gap:
        return None
    return th.xi_t, curve_point(p, bc, th.xi_t).b_upper


def _label(p, bc, pt, cp: CurvePoint, tol, triple, xi_tol) -> RegimeLabel:
    if triple is not None and abs(pt.xi - triple[0]) <= xi_tol and abs(pt.b - triple[1]) <= tol:
        return RegimeLabel(Regime.TRIPLE_POINT, droplet_fraction(p, bc, thresholds_minus(p).m0))
    if pt.b > cp.b_upper + tol:
        return RegimeLabel(Regime.LIQUID, droplet_fraction(p, bc, p.m_star))
    if pt.b < cp.b_lower - tol:
        return RegimeLabel(Regime.ICE, droplet_fraction(p, bc, -p.m_star))
    m = minimize_q(p, bc, pt).minimizers[0]
    frac = min(1.0, max(0.0, droplet_fraction(p, bc, m)))
    if abs(pt.b - cp.b_upper) <= tol:
        return RegimeLabel(Regime.BOUNDARY_UPPER, frac)
    if abs(pt.b - cp.b_lower) <= tol:
        return RegimeLabel(Regime.BOUNDARY_LOWER, frac)
    return RegimeLabel(Regime.PHASE_SEPARATION, frac)


def classify(
    p: ModelParams,
    bc: BoundaryCondition,
    pt: ThermoPoint,
    tol: float = 0.0,
    xi_tol: float = 0.0,
) -> RegimeLabel:
    """Regime of ``pt``; within ``tol`` of a curve the point counts as on it."""
    bc = BoundaryCondition.parse(bc)
    return _label(p, bc, pt, curve_point(p, bc, pt.xi), tol, _triple_point(p, bc), xi_tol)


@dataclass(frozen=True)
class GridSpec:
    xi_min: float = 0.0
    xi_max: float = 4.0
    b_min: float = -3.0
    b_max: float = 1.0
    n_xi: int = 64
    n_b: int = 64

    def __post_init__(self):
        if self.n_xi < 1 or self.n_b < 1:
            raise DomainError("grid resolution must be positive")
        if not (0.0 <= self.xi_min < self.xi_max):
            raise DomainError("need 0 <= xi_min < xi_max")
        if not self.b_min < self.b_max:
            raise DomainError("need b_min < b_max")

    @property
    def d_xi(self) -> float:
        return (self.xi_max - self.xi_min) / self.n_xi

    @property
    def d_b(self) -> float:
        return (self.b_max - self.b_min) / self.n_b

    def xi_centers(self) -> np.ndarray:
        return self.xi_min + (np.arange(self.n_xi) + 0.5) * self.d_xi

    def b_centers(self) -> np.ndarray:
        return self.b_min + (np.arange(self.n_b) + 0.5) * self.d_b


@dataclass
class DiagramRaster:
    params: ModelParams
    bc: BoundaryCondition
    grid: GridSpec
    cells: list[list[RegimeLabel]]  # cells[j][i]: b index j, xi index i

    def regime_codes(self) -> np.ndarray:
        order = list(Regime)
        return np.array([[order.index(c.regime) for c in row] for row in self.cells])

    def fractions(self) -> np.ndarray:
        return np.array([[c.droplet_fraction for c in row] for row in self.cells])


def raster(p: ModelParams, bc: BoundaryCondition, grid: GridSpec = GridSpec()) -> DiagramRaster:
    """Label every cell center; the boundary tolerance is half a cell height."""
    bc = BoundaryCondition.parse(bc)
    tol = 0.5 * grid.d_b
    triple = _triple_point(p, bc)
    xis = grid.xi_centers()
    bs = grid.b_centers()
    columns = [curve_point(p, bc, float(x)) for x in xis]
    cells = [
        [_label(p, bc, ThermoPoint(float(b), float(x)), cp, tol, triple, 0.5 * grid.d_xi) for x, cp in zip(xis, columns)]
        for b in bs
    ]
    return DiagramRaster(p, bc, grid, cells)


def write_csv(r: DiagramRaster, path, header: str = "") -> Path:
    """One row per cell, ordered by ``b`` then ``xi``; fixed six-decimal formatting."""
    path = Path(path)
    xis = r.grid.xi_centers()
    bs = r.grid.b_centers()
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(header)
            fh.write("xi,b,regime,droplet_fraction\n")
            for j, b in enumerate(bs):
                for i, x in enumerate(xis):
                    c = r.cells[j][i]
                    fh.write(f"{x:.6f},{b:.6f},{c.regime.value},{_fmt(c.droplet_fraction)}\n")
    except OSError as exc:
        raise OSError(f"cannot write diagram CSV to {path}: {exc}") from exc
    return path


def _fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


# ---------------------------------------------------------------- curves overlay


@dataclass
class Branch:
    name: str
    thick: bool
    points: list[tuple[float, float]]


def _thresholds(p: ModelParams, bc: BoundaryCondition) -> list[float]:
    if bc is BoundaryCondition.PLUS:
        return [xi_t_plus(p)]
    th = thresholds_minus(p)
    return [th.xi_t, th.xi_u]


def curve_branches(p: ModelParams, bc: BoundaryCondition, xi_min: float, xi_max: float, n: int = 400) -> list[Branch]:
    """Boundary curves split into branches of constant kind and style.

    ``merged`` is the part where both curves coincide; ``upper`` and
    ``lower`` continue from its end.  ``thick`` marks a jump of the minimizer.
    """
    bc = BoundaryCondition.parse(bc)
    xs = set(np.linspace(xi_min, xi_max, n).tolist())
    xs.update(x for x in _thresholds(p, bc) if xi_min <= x <= xi_max and math.isfinite(x))
    samples = critical_curves(p, bc, xis=sorted(xs)).samples
    done: list[Branch] = []
    open_: dict[str, Branch] = {}
    prev: dict[str, tuple[float, float]] = {}
    for s in samples:
        if s.b_upper == s.b_lower:
            items = [("merged", True, s.b_upper)]
        else:
            items = [("upper", s.upper_jump, s.b_upper), ("lower", s.lower_jump, s.b_lower)]
        keys = {k for k, _, _ in items}
        for k in list(open_):
            if k not in keys:
                done.append(open_.pop(k))
        cur = {}
        for key, thick, b in items:
            br = open_.get(key)
            if br is None or br.thick != thick:
                if br is not None:
                    done.append(open_.pop(key))
                seed = prev.get(key) or prev.get("merged")
                br = open_[key] = Branch(key, thick, [seed] if seed else [])
            br.points.append((s.xi, b))
            cur[key] = (s.xi, b)
        prev = cur
    done.extend(open_.values())
    return [b for b in done if len(b.points) > 1]


_COLORS = {
    Regime.LIQUID: "#cfe8ff",
    Regime.ICE: "#e6e6e6",
    Regime.PHASE_SEPARATION: "#ffe2b8",
    Regime.BOUNDARY_UPPER: "#9fc5e8",
    Regime.BOUNDARY_LOWER: "#b7b7b7",
    Regime.TRIPLE_POINT: "#e06666",
}


def write_svg(r: DiagramRaster, path, title: str = "") -> Path:
    """Shaded cells with the curve branches drawn on top."""
    g = r.grid
    W, H, pad = 640, 480, 60
    pw, ph = W - 2 * pad, H - 2 * pad

    def sx(x):
        return pad + (x - g.xi_min) / (g.xi_max - g.xi_min) * pw

    def sy(b):
        return pad + (g.b_max - b) / (g.b_max - g.b_min) * ph

    cw, chh = pw / g.n_xi, ph / g.n_b
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<title>{_esc(title or "phase diagram, " + r.bc.value + " boundary")}</title>',
        f'<clipPath id="plot"><rect x="{pad}" y="{pad}" width="{pw}" height="{ph}"/></clipPath>',
        '<g id="cells" stroke="none">',
    ]
    for j in range(g.n_b):
        y = pad + (g.n_b - 1 - j) * chh
        for i in range(g.n_xi):
            color = _COLORS[r.cells[j][i].regime]
            out.append(f'<rect x="{pad + i * cw:.3f}" y="{y:.3f}" width="{cw:.3f}" height="{chh:.3f}" fill="{color}"/>')
    out.append("</g>")
    out.append('<g id="curves" clip-path="url(#plot)" fill="none" stroke="black">')
    for br in curve_branches(r.params, r.bc, g.xi_min, g.xi_max):
        pts = " ".join(f"{sx(x):.3f},{sy(b):.3f}" for x, b in br.points)
        width = 3 if br.thick else 1
        kind = "discontinuous" if br.thick else "continuous"
        out.append(f'<polyline class="{br.name} {kind}" style="stroke-width:{width}" points="{pts}"/>')
    out.append("</g>")
    out.append(f'<rect x="{pad}" y="{pad}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in np.linspace(g.xi_min, g.xi_max, 5):
        out.append(f'<text x="{sx(t):.3f}" y="{H - pad + 18}" font-size="12" text-anchor="middle">{t:g}</text>')
    for t in np.linspace(g.b_min, g.b_max, 5):
        out.append(f'<text x="{pad - 6}" y="{sy(t) + 4:.3f}" font-size="12" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{W / 2}" y="{H - 15}" font-size="14" text-anchor="middle">xi</text>')
    out.append(f'<text x="15" y="{H / 2}" font-size="14" text-anchor="middle" transform="rotate(-90 15 {H / 2})">b</text>')
    out.append("</svg>")
    path = Path(path)
    try:
        path.write_text("\n".join(out) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc
    return path


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_figure(r: DiagramRaster, path, dpi: int = 120) -> Path:
    """Render the raster and curve branches to a raster image with matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import ListedColormap

    g = r.grid
    regimes = list(Regime)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.imshow(
        r.regime_codes(),
        origin="lower",
        extent=(g.xi_min, g.xi_max, g.b_min, g.b_max),
        aspect="auto",
        cmap=ListedColormap([_COLORS[k] for k in regimes]),
        vmin=-0.5,
        vmax=len(regimes) - 0.5,
        interpolation="nearest",
    )
    for br in curve_branches(r.params, r.bc, g.xi_min, g.xi_max):
        x, b = zip(*br.points)
        ax.plot(x, b, color="black", linewidth=2.5 if br.thick else 0.8)
    ax.set_xlim(g.xi_min, g.xi_max)
    ax.set_ylim(g.b_min, g.b_max)
    ax.set_xlabel("xi")
    ax.set_ylabel("b")
    ax.set_title(f"{r.bc.value} boundary")
    path = Path(path)
    try:
        fig.savefig(path, dpi=dpi)
    except OSError as exc:
        raise OSError(f"cannot write figure to {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path
