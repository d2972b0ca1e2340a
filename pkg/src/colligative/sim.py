"""Monte Carlo sampler for the Ising solvent with canonical salt.

A sweep is one Metropolis pass over the spins in raster order followed by
one salt update.  The default salt update is an exact heat bath of the whole
salt sector: given the spins, the number ``Q`` of salts on plus sites is
drawn from its conditional law and the salts are then placed uniformly.  A
Kawasaki-type pair swap is available as an independent check.

Every random number comes from the counter-based stream in
:mod:`colligative.rng`, addressed by ``(seed, sweep, index, purpose)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from numba import njit

from .exact import salt_number
from .rates import BoundaryCondition, DomainError
from .rng import (
    PURPOSE_INIT,
    PURPOSE_SALT_MINUS,
    PURPOSE_SALT_PLUS,
    PURPOSE_SALT_Q,
    PURPOSE_SPIN,
    PURPOSE_SWAP,
    PURPOSE_SWAP_ACCEPT,
    CounterRNG,
    uniform_pair,
)

__all__ = [
    "MOVES",
    "SimConfig",
    "ConfigError",
    "parse_config_text",
    "load_config",
    "LatticeState",
    "TimeSeries",
    "init",
    "spin_sweep",
    "salt_heat_bath",
    "pair_swap",
    "run",
    "droplet_fraction_estimate",
]

MOVES = ("heat_bath", "pair_swap")


class ConfigError(ValueError):
    """Invalid or unknown simulation configuration entry."""


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one Markov chain.

    ``sweeps`` counts all sweeps including the ``burn_in`` ones; a record is
    taken every ``thinning`` sweeps after burn-in.
    """

    L: int = 16
    J: float = 0.6
    kappa: float = 1.0
    c: float = 0.0
    h: float = 0.0
    bc: BoundaryCondition = BoundaryCondition.PLUS
    seed: int = 0
    sweeps: int = 1000
    burn_in: int = 100
    thinning: int = 1
    move: str = "heat_bath"

    def __post_init__(self):
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))
        if self.L < 4:
            raise DomainError(f"L must be >= 4, got {self.L}")
        if not 0.0 <= self.c <= 1.0:
            raise DomainError(f"salt concentration c must lie in [0, 1], got {self.c}")
        if self.kappa < 0.0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")
        if not (0 <= self.burn_in < self.sweeps):
            raise DomainError(f"need sweeps > burn_in >= 0, got sweeps={self.sweeps}, burn_in={self.burn_in}")
        if self.thinning < 1:
            raise DomainError(f"thinning must be >= 1, got {self.thinning}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in 64 unsigned bits")
        if self.move not in MOVES:
            raise DomainError(f"move must be one of {MOVES}, got {self.move!r}")

    @property
    def volume(self) -> int:
        return self.L * self.L

    @property
    def n_salt(self) -> int:
        return salt_number(self.c, self.volume)

    @property
    def n_records(self) -> int:
        return (self.sweeps - self.burn_in) // self.thinning

    @classmethod
    def from_mapping(cls, values: dict) -> "SimConfig":
        """Build from string or typed values; ``xi`` and ``b`` stand for ``c L`` and ``h L``."""
        values = dict(values)
        known = {f.name for f in fields(cls)} | {"xi", "b"}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        for scaled, raw in (("xi", "c"), ("b", "h")):
            if scaled in values and raw in values:
                raise ConfigError(f"give either {scaled} or {raw}, not both")
        types = {f.name: f.type for f in fields(cls)}
        out = {}
        for key, val in values.items():
            if key in ("xi", "b"):
                continue
            out[key] = _coerce(key, types[key], val)
        L = out.get("L", cls.L)
        if "xi" in values:
            out["c"] = _coerce("xi", "float", values["xi"]) / L
        if "b" in values:
            out["h"] = _coerce("b", "float", values["b"]) / L
        return cls(**out)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["bc"] = self.bc.value
        return d


def _coerce(key, typ, val):
    if not isinstance(val, str):
        return val
    try:
        if typ in ("int", int):
            return int(val)
        if typ in ("float", float):
            return float(val)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {val!r}") from None
    return val.strip()


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = val
    return out


def load_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        return parse_config_text(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc


@dataclass
class LatticeState:
    """Spins (int8, +-1) and salts (int8, 0/1) on an ``L x L`` box with running totals."""

    L: int
    spins: np.ndarray
    salts: np.ndarray
    bc: BoundaryCondition
    M: int
    N: int
    Q: int

    def recomputed_totals(self) -> tuple[int, int, int]:
        s = self.spins.astype(np.int64)
        a = self.salts.astype(np.int64)
        return int(s.sum()), int(a.sum()), int((a * (s > 0)).sum())

    def check(self) -> None:
        if (self.M, self.N, self.Q) != self.recomputed_totals():
            raise RuntimeError(f"running totals {(self.M, self.N, self.Q)} disagree with {self.recomputed_totals()}")


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _fisher_yates(seed, sweep, purpose, pool, k):
    # moves a uniform k-subset of pool to its front
    n = pool.shape[0]
    for i in range(k):
        u, _ = uniform_pair(seed, sweep, i, purpose)
        j = i + min(int(u * (n - i)), n - i - 1)
        t = pool[i]
        pool[i] = pool[j]
        pool[j] = t


@njit(cache=True)
def _init_salts(seed, n_sites, n_salt):
    pool = np.arange(n_sites)
    _fisher_yates(seed, 0, PURPOSE_INIT, pool, n_salt)
    salts = np.zeros(n_sites, dtype=np.int8)
    for i in range(n_salt):
        salts[pool[i]] = 1
    return salts


@njit(cache=True)
def _spin_sweep(spins, salts, L, bc_sign, J, h, kappa, seed, sweep):
    # returns the change in (M, Q)
    dM = 0
    dQ = 0
    for i in range(L):
        for j in range(L):
            x = i * L + j
            s = spins[x]
            nb = 0
            nb += spins[x - L] if i > 0 else bc_sign
            nb += spins[x + L] if i < L - 1 else bc_sign
            nb += spins[x - 1] if j > 0 else bc_sign
            nb += spins[x + 1] if j < L - 1 else bc_sign
            d_e = 2.0 * s * (J * nb + h) + kappa * salts[x] * s
            if d_e > 0.0:
                u, _ = uniform_pair(seed, sweep, x, PURPOSE_SPIN)
                if u >= math.exp(-d_e):
                    continue
            spins[x] = -s
            dM -= 2 * s
            if salts[x]:
                dQ -= s
    return dM, dQ


@njit(cache=True)
def _log_comb(n, k):
    return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)


@njit(cache=True)
def _salt_heat_bath(spins, salts, kappa, n_salt, seed, sweep):
    n = spins.shape[0]
    n_plus = 0
    for x in range(n):
        if spins[x] > 0:
            n_plus += 1
    n_minus = n - n_plus
    q_lo = max(0, n_salt - n_minus)
    q_hi = min(n_salt, n_plus)
    # Gumbel-max draw from P(Q) ~ C(n+, Q) C(n-, N-Q) e^(kappa Q)
    best = -np.inf
    q = q_lo
    for k in range(q_lo, q_hi + 1):
        u, _ = uniform_pair(seed, sweep, k, PURPOSE_SALT_Q)
        score = _log_comb(n_plus, k) + _log_comb(n_minus, n_salt - k) + kappa * k - math.log(-math.log(u))
        if score > best:
            best = score
            q = k
    plus_pool = np.empty(n_plus, dtype=np.int64)
    minus_pool = np.empty(n_minus, dtype=np.int64)
    a = 0
    b = 0
    for x in range(n):
        salts[x] = 0
        if spins[x] > 0:
            plus_pool[a] = x
            a += 1
        else:
            minus_pool[b] = x
            b += 1
    _fisher_yates(seed, sweep, PURPOSE_SALT_PLUS, plus_pool, q)
    _fisher_yates(seed, sweep, PURPOSE_SALT_MINUS, minus_pool, n_salt - q)
    for i in range(q):
        salts[plus_pool[i]] = 1
    for i in range(n_salt - q):
        salts[minus_pool[i]] = 1
    return q


@njit(cache=True)
def _pair_swap(spins, salts, kappa, seed, sweep):
    # n attempts to exchange a salted site with an empty one; returns change in Q
    n = spins.shape[0]
    n_salt = 0
    for x in range(n):
        n_salt += salts[x]
    if n_salt == 0 or n_salt == n:
        return 0
    full = np.empty(n_salt, dtype=np.int64)
    empty = np.empty(n - n_salt, dtype=np.int64)
    a = 0
    b = 0
    for x in range(n):
        if salts[x]:
            full[a] = x
            a += 1
        else:
            empty[b] = x
            b += 1
    dQ = 0
    for t in range(n):
        u, v = uniform_pair(seed, sweep, t, PURPOSE_SWAP)
        ia = min(int(u * n_salt), n_salt - 1)
        ib = min(int(v * (n - n_salt)), n - n_salt - 1)
        xa = full[ia]
        xb = empty[ib]
        # energy kappa per salt on a minus site
        d_e = kappa * ((spins[xb] < 0) - (spins[xa] < 0))
        if d_e > 0.0:
            w, _ = uniform_pair(seed, sweep, t, PURPOSE_SWAP_ACCEPT)
            if w >= math.exp(-d_e):
                continue
        salts[xa] = 0
        salts[xb] = 1
        full[ia] = xb
        empty[ib] = xa
        dQ += (spins[xb] > 0) - (spins[xa] > 0)
    return dQ


@njit(cache=True)
def _totals(spins, salts):
    M = 0
    N = 0
    Q = 0
    for x in range(spins.shape[0]):
        M += spins[x]
        N += salts[x]
        if salts[x] and spins[x] > 0:
            Q += 1
    return M, N, Q


@njit(cache=True)
def _run(spins, salts, L, bc_sign, J, h, kappa, n_salt, seed, sweeps, burn_in, thinning, use_swap, M, Q):
    n_rec = (sweeps - burn_in) // thinning
    rec_sweep = np.empty(n_rec, dtype=np.int64)
    rec_M = np.empty(n_rec, dtype=np.int64)
    rec_Q = np.empty(n_rec, dtype=np.int64)
    r = 0
    for sweep in range(1, sweeps + 1):
        dM, dQ = _spin_sweep(spins, salts, L, bc_sign, J, h, kappa, seed, sweep)
        M += dM
        Q += dQ
        if use_swap:
            Q += _pair_swap(spins, salts, kappa, seed, sweep)
        else:
            Q = _salt_heat_bath(spins, salts, kappa, n_salt, seed, sweep)
        cM, cN, cQ = _totals(spins, salts)
        if cM != M or cN != n_salt or cQ != Q:
            return rec_sweep[:r], rec_M[:r], rec_Q[:r], sweep
        k = sweep - burn_in
        if k > 0 and k % thinning == 0 and r < n_rec:
            rec_sweep[r] = sweep
            rec_M[r] = M
            rec_Q[r] = Q
            r += 1
    return rec_sweep, rec_M, rec_Q, 0


# ---------------------------------------------------------------- public API


def init(cfg: SimConfig) -> LatticeState:
    """Spins equal to the boundary value; ``floor(c L^2)`` salts placed uniformly."""
    n = cfg.volume
    N = cfg.n_salt
    if N > n:
        raise DomainError(f"{N} salts do not fit on {n} sites")
    spins = np.full(n, cfg.bc.sign, dtype=np.int8)
    salts = _init_salts(np.uint64(cfg.seed), n, N)
    M, N, Q = _totals(spins, salts)
    return LatticeState(cfg.L, spins.reshape(cfg.L, cfg.L), salts.reshape(cfg.L, cfg.L), cfg.bc, int(M), int(N), int(Q))


def _flat(state: LatticeState):
    return state.spins.reshape(-1), state.salts.reshape(-1)


def spin_sweep(state: LatticeState, cfg: SimConfig, rng: CounterRNG, sweep: int) -> LatticeState:
    """One Metropolis pass over all sites in raster order, salts held fixed."""
    spins, salts = _flat(state)
    dM, dQ = _spin_sweep(spins, salts, state.L, state.bc.sign, cfg.J, cfg.h, cfg.kappa, np.uint64(rng.seed), sweep)
    state.M += int(dM)
    state.Q += int(dQ)
    return state


def salt_heat_bath(state: LatticeState, cfg: SimConfig, rng: CounterRNG, sweep: int) -> LatticeState:
    """Exact redraw of the salt field given the spins."""
    spins, salts = _flat(state)
    state.Q = int(_salt_heat_bath(spins, salts, cfg.kappa, state.N, np.uint64(rng.seed), sweep))
    return state


def pair_swap(state: LatticeState, cfg: SimConfig, rng: CounterRNG, sweep: int) -> LatticeState:
    """``L^2`` Metropolis attempts to move one salt to an empty site."""
    spins, salts = _flat(state)
    state.Q += int(_pair_swap(spins, salts, cfg.kappa, np.uint64(rng.seed), sweep))
    return state


@dataclass
class TimeSeries:
    """Records ``(sweep, M, Q)`` taken after burn-in."""

    config: SimConfig
    sweep: np.ndarray
    M: np.ndarray
    Q: np.ndarray

    def __len__(self) -> int:
        return len(self.sweep)

    def mean_magnetization(self) -> float:
        """Average of ``M / L^2``."""
        return float(self.M.mean()) / self.config.volume

    def histogram(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Distinct ``(M, Q)`` pairs in lexicographic order and their counts."""
        pairs, counts = np.unique(np.stack([self.M, self.Q], axis=1), axis=0, return_counts=True)
        return pairs[:, 0], pairs[:, 1], counts

    def empirical_law(self) -> dict[tuple[int, int], float]:
        Ms, Qs, counts = self.histogram()
        total = counts.sum()
        return {(int(m), int(q)): c / total for m, q, c in zip(Ms, Qs, counts)}

    def write_csv(self, path, header: str = "") -> Path:
        rows = np.stack([self.sweep, self.M, self.Q], axis=1)
        return _write_rows(path, header, "sweep,M,Q", rows)

    def write_histogram_csv(self, path, header: str = "") -> Path:
        return _write_rows(path, header, "M,Q,count", np.stack(self.histogram(), axis=1))


def _write_rows(path, header, columns, rows) -> Path:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(header)
            fh.write(columns + "\n")
            np.savetxt(fh, rows, fmt="%d", delimiter=",")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def run(cfg: SimConfig) -> TimeSeries:
    """Run the chain described by ``cfg`` from :func:`init`."""
    state = init(cfg)
    spins, salts = _flat(state)
    sw, Ms, Qs, bad = _run(
        spins,
        salts,
        cfg.L,
        cfg.bc.sign,
        float(cfg.J),
        float(cfg.h),
        float(cfg.kappa),
        state.N,
        np.uint64(cfg.seed),
        cfg.sweeps,
        cfg.burn_in,
        cfg.thinning,
        cfg.move == "pair_swap",
        state.M,
        state.Q,
    )
    if bad:
        raise RuntimeError(f"running totals diverged from recomputed totals at sweep {bad}")
    return TimeSeries(cfg, sw, Ms, Qs)


def droplet_fraction_estimate(series: TimeSeries, m_star: float) -> float:
    """Lever-rule estimate of the minority-phase volume fraction.

    ``(m_star - mbar)/(2 m_star)`` under the plus boundary and
    ``(mbar + m_star)/(2 m_star)`` under the minus one, with ``mbar`` the
    sample mean of ``M / L^2``.  Not clipped to ``[0, 1]``.
    """
    if not 0.0 < m_star < 1.0:
        raise DomainError(f"m_star must lie in (0, 1), got {m_star}")
    mbar = series.mean_magnetization()
    if series.config.bc is BoundaryCondition.PLUS:
        return (m_star - mbar) / (2.0 * m_star)
    return (mbar + m_star) / (2.0 * m_star)
