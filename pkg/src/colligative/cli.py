"""Command-line front end.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines whose
keys are the long flag names (``burn-in`` or ``burn_in``).  Precedence is
flag, then file, then built-in default.  Relative output paths are resolved
against ``--out-dir``, which defaults to ``$COLLIGATIVE_OUT_DIR`` or the
current directory.

Exit status: 0 on success, 1 on a domain or I/O error, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .curves import CurveError, critical_curves
from .diagram import GridSpec, raster, write_csv, write_figure, write_svg
from .exact import exact_distribution
from .rates import ISING_2D_JC, BoundaryCondition, DomainError, ModelParams, ThermoPoint, onsager_mstar
from .selftest import run_selftest
from .sim import ConfigError, SimConfig, droplet_fraction_estimate, load_config, run
from .variational import minimize_q

__all__ = ["main", "build_parser", "OUT_DIR_ENV"]

OUT_DIR_ENV = "COLLIGATIVE_OUT_DIR"


class UsageError(Exception):
    pass


def _bc(text):
    try:
        return BoundaryCondition.parse(text).value
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _flag(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# name -> (type, default, help); names double as config-file keys
_MODEL = {
    "d": (int, 2, "lattice dimension"),
    "mstar": (float, 0.8, "spontaneous magnetization m*"),
    "w1": (float, 1.0, "droplet surface cost w1"),
    "kappa": (float, 1.0, "salt-ice repulsion kappa"),
}
_PARAMS = {
    "curves": {
        **_MODEL,
        "bc": (_bc, "plus", "boundary condition: plus (liquid) or minus (ice)"),
        "n": (int, 512, "number of log-spaced xi samples"),
        "xi_min": (float, None, "smallest xi sample (default 1e-3 xi_max)"),
        "xi_max": (float, None, "largest xi sample (default 8 max(xi_t, xi_2))"),
        "output": (str, None, "output CSV (default: standard output)"),
    },
    "diagram": {
        **_MODEL,
        "bc": (_bc, "plus", "boundary condition"),
        "xi_min": (float, 0.0, "left edge of the raster"),
        "xi_max": (float, 4.0, "right edge of the raster"),
        "b_min": (float, -3.0, "bottom edge of the raster"),
        "b_max": (float, 1.0, "top edge of the raster"),
        "n_xi": (int, 64, "cells along xi"),
        "n_b": (int, 64, "cells along b"),
        "prefix": (str, None, "output file stem (default diagram_<bc>)"),
        "figure": (_flag, False, "also render a PNG with matplotlib"),
    },
    "minimize": {
        **_MODEL,
        "bc": (_bc, "plus", "boundary condition"),
        "b": (float, 0.0, "scaled field b"),
        "xi": (float, 0.0, "scaled salt concentration xi"),
    },
    "oracle": {
        "L": (int, 4, "box side (at most 5)"),
        "bc": (_bc, "plus", "boundary condition"),
        "J": (float, 0.4, "Ising coupling"),
        "kappa": (float, 1.0, "salt-ice repulsion"),
        "c": (float, 0.25, "salt concentration"),
        "h": (float, 0.0, "magnetic field"),
        "output": (str, None, "output CSV (default: standard output)"),
    },
    "simulate": {
        "L": (int, 16, "box side"),
        "bc": (_bc, "plus", "boundary condition"),
        "J": (float, 0.6, "Ising coupling"),
        "kappa": (float, 1.0, "salt-ice repulsion"),
        "c": (float, None, "salt concentration (exclusive with --xi)"),
        "xi": (float, None, "scaled concentration, c = xi / L"),
        "h": (float, None, "magnetic field (exclusive with --b)"),
        "b": (float, None, "scaled field, h = b / L"),
        "seed": (int, 0, "seed of the counter-based random stream"),
        "sweeps": (int, 1000, "total sweeps including burn-in"),
        "burn_in": (int, 100, "sweeps discarded before recording"),
        "thinning": (int, 1, "record every n-th sweep"),
        "move": (str, "heat_bath", "salt update: heat_bath or pair_swap"),
        "mstar": (float, None, "m* for the droplet-fraction estimate (default: Onsager value)"),
        "prefix": (str, None, "output file stem (default simulate_<bc>_L<L>_s<seed>)"),
    },
    "selftest": {},
}
_HELP = {
    "curves": "thresholds and sampled boundary curves",
    "diagram": "regime raster as CSV and SVG (optionally PNG)",
    "minimize": "global minimizers of the reduced rate function",
    "oracle": "exact joint law of (M, Q) on a small box",
    "simulate": "Monte Carlo run of the lattice model",
    "selftest": "verify reference values and print pass/fail lines",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colligative",
        description="Finite-size phase diagram of a dilute salt solution in an Ising solvent.",
        epilog=f"Output directory defaults to ${OUT_DIR_ENV} or the current directory.",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, params in _PARAMS.items():
        sp = sub.add_parser(name, help=_HELP[name], description=_HELP[name], allow_abbrev=False)
        for key, (typ, default, text) in params.items():
            flag = "--" + key.replace("_", "-")
            if typ is _flag:
                sp.add_argument(flag, dest=key, action="store_const", const=True, default=None, help=text)
                continue
            shown = "" if default is None else f" (default {default})"
            sp.add_argument(flag, dest=key, type=typ, default=None, help=text + shown)
        if name != "selftest":
            sp.add_argument("--config", default=None, help="key=value file; flags override its entries")
            sp.add_argument("--out-dir", dest="out_dir", default=None, help=f"output directory (default ${OUT_DIR_ENV} or .)")
    return parser


def _resolve(command: str, args: argparse.Namespace) -> dict:
    params = _PARAMS[command]
    out = {k: default for k, (_, default, _) in params.items()}
    if getattr(args, "config", None):
        for raw_key, text in load_config(args.config).items():
            key = raw_key.replace("-", "_")
            if key not in params:
                raise UsageError(f"unknown key '{raw_key}' in config file {args.config} for '{command}'")
            typ = params[key][0]
            try:
                out[key] = typ(text)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad value for '{raw_key}' in {args.config}: {exc}") from None
    for key in params:
        val = getattr(args, key)
        if val is not None:
            out[key] = val
    return out


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or ".")
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {d}: {exc}") from exc
    return d


def _header(command: str, params: dict, seed=None, extra: list[str] = ()) -> str:
    lines = [f"# colligative {__version__}", f"# command: {command}", f"# seed: {'none' if seed is None else seed}"]
    lines += [f"# {k}={params[k]}" for k in sorted(params) if k not in ("output", "prefix", "figure")]
    lines += [f"# {e}" for e in extra]
    return "\n".join(lines) + "\n"


def _model(params) -> ModelParams:
    return ModelParams(d=params["d"], m_star=params["mstar"], w1=params["w1"], kappa=params["kappa"])


def _emit(text: str, target: Path | None) -> None:
    if target is None:
        sys.stdout.write(text)
        return
    try:
        target.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {target}: {exc}") from exc
    print(f"wrote {target}")


def _target(args, params) -> Path | None:
    if params.get("output") is None:
        return None
    return _out_dir(args) / params["output"]


def _fmt(x) -> str:
    return "none" if x is None else f"{x:.12g}"


def cmd_curves(args, params) -> int:
    p = _model(params)
    cc = critical_curves(p, params["bc"], n=params["n"], xi_max=params["xi_max"], xi_min=params["xi_min"])
    extra = [f"xi_t={_fmt(cc.xi_t)} xi_u={_fmt(cc.xi_u)}"]
    if cc.bc is BoundaryCondition.MINUS:
        case = "3b" if cc.xi_t < cc.xi_u else "3a"
        extra.append(f"xi_1={_fmt(cc.xi_1)} xi_2={_fmt(cc.xi_2)} m0={_fmt(cc.m0)} case={case}")
    rows = ["xi,b_upper,b_lower,m_upper,m_lower,upper_jump,lower_jump"]
    for s in cc.samples:
        rows.append(
            f"{s.xi:.12g},{s.b_upper:.12g},{s.b_lower:.12g},{s.m_upper:.12g},{s.m_lower:.12g},"
            f"{int(s.upper_jump)},{int(s.lower_jump)}"
        )
    _emit(_header("curves", params, extra=extra) + "\n".join(rows) + "\n", _target(args, params))
    return 0


def cmd_diagram(args, params) -> int:
    p = _model(params)
    grid = GridSpec(params["xi_min"], params["xi_max"], params["b_min"], params["b_max"], params["n_xi"], params["n_b"])
    r = raster(p, params["bc"], grid)
    stem = _out_dir(args) / (params["prefix"] or f"diagram_{params['bc']}")
    paths = [
        write_csv(r, stem.with_suffix(".csv"), _header("diagram", params)),
        write_svg(r, stem.with_suffix(".svg")),
    ]
    if params["figure"]:
        paths.append(write_figure(r, stem.with_suffix(".png")))
    for path in paths:
        print(f"wrote {path}")
    return 0


def cmd_minimize(args, params) -> int:
    res = minimize_q(_model(params), params["bc"], ThermoPoint(params["b"], params["xi"]))
    print(res)
    return 0


def cmd_oracle(args, params) -> int:
    d = exact_distribution(params["L"], params["bc"], params["J"], params["kappa"], params["c"], params["h"])
    extra = [f"N={d.N} log_z={d.log_z:.15g}"]
    header = _header("oracle", params, extra=extra)
    target = _target(args, params)
    if target is None:
        sys.stdout.write(header + "M,Q,probability\n")
        for i, M in enumerate(d.m_values):
            for Q in d.q_values:
                sys.stdout.write(f"{int(M)},{int(Q)},{d.prob[i, Q]:.15e}\n")
        return 0
    d.write_csv(target, header)
    print(f"wrote {target}")
    return 0


def cmd_simulate(args, params) -> int:
    mapping = {k: v for k, v in params.items() if k not in ("mstar", "prefix") and v is not None}
    try:
        cfg = SimConfig.from_mapping(mapping)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    series = run(cfg)
    resolved = {**cfg.as_dict(), "mstar": params["mstar"]}
    header = _header("simulate", resolved, seed=cfg.seed)
    stem = _out_dir(args) / (params["prefix"] or f"simulate_{cfg.bc.value}_L{cfg.L}_s{cfg.seed}")
    p1 = series.write_csv(stem.with_name(stem.name + "_series.csv"), header)
    p2 = series.write_histogram_csv(stem.with_name(stem.name + "_hist.csv"), header)
    print(f"wrote {p1}")
    print(f"wrote {p2}")
    print(f"records={len(series)} N={cfg.n_salt} mean_m={series.mean_magnetization():.6f}")
    m_star = params["mstar"] if params["mstar"] is not None else onsager_mstar(cfg.J)
    if m_star > 0.0:
        print(f"droplet_fraction={droplet_fraction_estimate(series, m_star):.6f} m_star={m_star:.6f}")
    else:
        print(f"droplet_fraction=undefined (J={cfg.J} is not above J_c={ISING_2D_JC:.6f})")
    return 0


def cmd_selftest(args, params) -> int:
    return 0 if run_selftest() else 1


_COMMANDS = {
    "curves": cmd_curves,
    "diagram": cmd_diagram,
    "minimize": cmd_minimize,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        params = _resolve(args.command, args)
        return _COMMANDS[args.command](args, params)
    except (UsageError, ConfigError) as exc:
        print(f"colligative {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, CurveError, ValueError, OSError) as exc:
        print(f"colligative {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
