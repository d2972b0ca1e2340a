"""Exact finite-volume reference computations.

Salt configuration counts are exact integers.  ``exact_distribution``
enumerates every spin configuration of an ``L x L`` box (``L <= 5``) with a
fixed boundary ring, tallies the exact density of states in
``(bond sum, number of plus sites)``, and sums the salt sector in closed
form: given the spins, the weight of a salt placement depends only on how
many salts sit on plus sites.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit
from scipy.special import gammaln, logsumexp

from .rates import BoundaryCondition, DomainError

__all__ = [
    "salt_number",
    "salt_count",
    "entropy_s",
    "entropy_xi",
    "stirling_gap",
    "ExactDistribution",
    "density_of_states",
    "exact_distribution",
    "MAX_EXACT_SIDE",
    "hamiltonian",
    "salt_log_weight",
]

MAX_EXACT_SIDE = 5


def salt_number(c: float, volume: int) -> int:
    """``floor(c |Lambda|)``, guarded against representation error in ``c``."""
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"salt concentration must lie in [0, 1], got {c!r}")
    return int(math.floor(c * volume + 1e-9))


def salt_count(volume: int, M: int, N: int, Q: int) -> int:
    """Number of salt placements with ``N`` salts, ``Q`` of them on plus sites.

    ``C((V+M)/2, Q) * C((V-M)/2, N-Q)`` for a spin field of magnetization ``M``.
    """
    if volume < 1:
        raise DomainError("volume must be >= 1")
    if abs(M) > volume:
        raise DomainError(f"|M| must not exceed the volume ({M} vs {volume})")
    if (volume + M) % 2:
        raise DomainError(f"magnetization {M} has the wrong parity for volume {volume}")
    if not 0 <= N <= volume:
        raise DomainError(f"salt number {N} outside [0, {volume}]")
    n_plus = (volume + M) // 2
    n_minus = volume - n_plus
    if Q < 0 or Q > N or Q > n_plus or N - Q > n_minus:
        return 0
    return math.comb(n_plus, Q) * math.comb(n_minus, N - Q)


def entropy_s(p):
    """``p log p + (1-p) log(1-p)`` with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
        b = np.where(p < 1.0, (1.0 - p) * np.log(np.where(p < 1.0, 1.0 - p, 1.0)), 0.0)
    out = a + b
    return float(out) if out.ndim == 0 else out


def entropy_xi(m: float, theta: float, c: float, eta: float = 0.0) -> float:
    """Bulk salt entropy per site at magnetization ``m``, salt fraction ``c``.

    Requires ``|m| <= 1-eta`` and both occupation ratios ``<= 1-eta``.
    """
    if not (0.0 <= theta <= 1.0 and 0.0 <= c <= 1.0):
        raise DomainError("theta and c must lie in [0, 1]")
    if abs(m) > 1.0 - eta or abs(m) >= 1.0:
        raise DomainError(f"|m| must be below 1 - eta, got m={m!r}")
    r_plus = 2.0 * theta * c / (1.0 + m)
    r_minus = 2.0 * (1.0 - theta) * c / (1.0 - m)
    if r_plus > 1.0 - eta or r_minus > 1.0 - eta:
        raise DomainError("salt occupation ratios exceed 1 - eta")
    return -0.5 * (1.0 + m) * entropy_s(r_plus) - 0.5 * (1.0 - m) * entropy_s(r_minus)


def _lattice_counts(volume: int, m: float, theta: float, c: float) -> tuple[int, int, int]:
    M = int(math.floor(m * volume + 1e-9))
    if (volume + M) % 2:
        M -= 1
    N = salt_number(c, volume)
    Q = int(math.floor(theta * c * volume + 1e-9))
    return M, N, Q


def stirling_gap(volume: int, m: float, theta: float, c: float) -> float:
    """``|log A / |Lambda| - Xi(m, theta; c)|`` with exact integer ``A``.

    ``M``, ``N`` and ``Q`` are floors of ``m V``, ``c V`` and ``theta c V``;
    ``M`` is lowered by one when its parity does not match ``V``.
    """
    M, N, Q = _lattice_counts(volume, m, theta, c)
    count = salt_count(volume, M, N, Q)
    if count == 0:
        raise DomainError("no salt configuration realizes these counts")
    return abs(math.log(count) / volume - entropy_xi(m, theta, c))


def hamiltonian(spins, salts, bc: BoundaryCondition, J: float, h: float, kappa: float) -> float:
    """Reduced energy ``-J sum sigma sigma' - h sum sigma + kappa sum S (1 - sigma)/2``.

    ``spins`` and ``salts`` are ``L x L`` arrays; the pair sum includes the
    bonds to the fixed boundary ring.  Written for clarity, not speed.
    """
    bc = BoundaryCondition.parse(bc)
    s = np.pad(np.asarray(spins, dtype=np.int64), 1, constant_values=bc.sign)
    salts = np.asarray(salts, dtype=np.int64)
    inner = s[1:-1, 1:-1]
    # each box site's bonds to the right and below, plus the left column / top row bonds
    pairs = (s[1:-1, 1:] * s[1:-1, :-1]).sum() + (s[1:, 1:-1] * s[:-1, 1:-1]).sum()
    return float(-J * pairs - h * inner.sum() + kappa * (salts * (1 - inner) // 2).sum())


def salt_log_weight(spins, salts, kappa: float) -> float:
    """Log of the salt part of the Boltzmann weight given the spins.

    Equals ``-kappa`` times the number of salts on minus sites, so any two
    placements with the same ``(N, Q)`` carry the same weight.
    """
    spins = np.asarray(spins)
    salts = np.asarray(salts)
    return float(-kappa * np.sum(salts * (spins < 0)))


@njit(cache=True)
def _gray_walk(L: int, bc_sign: int) -> np.ndarray:
    # visit all 2^(L*L) configurations flipping one site per step
    n = L * L
    n_bonds = 2 * L * (L + 1)
    spins = -np.ones(n, dtype=np.int64)
    bond = 0
    for i in range(L):
        for j in range(L):
            x = i * L + j
            nb = 0
            nb += spins[x - L] if i > 0 else bc_sign
            nb += spins[x - 1] if j > 0 else bc_sign
            bond += spins[x] * nb
            if i == L - 1:
                bond += spins[x] * bc_sign
            if j == L - 1:
                bond += spins[x] * bc_sign
    n_plus = 0
    counts = np.zeros((2 * n_bonds + 1, n + 1), dtype=np.int64)
    counts[bond + n_bonds, n_plus] += 1
    for k in range(1, 1 << n):
        x = 0
        while not (k >> x) & 1:
            x += 1
        i = x // L
        j = x % L
        nb = 0
        nb += spins[x - L] if i > 0 else bc_sign
        nb += spins[x + L] if i < L - 1 else bc_sign
        nb += spins[x - 1] if j > 0 else bc_sign
        nb += spins[x + 1] if j < L - 1 else bc_sign
        bond -= 2 * spins[x] * nb
        n_plus -= spins[x]
        spins[x] = -spins[x]
        counts[bond + n_bonds, n_plus] += 1
    return counts


def density_of_states(L: int, bc: BoundaryCondition) -> tuple[np.ndarray, np.ndarray]:
    """Exact counts of spin configurations by ``(bond sum, n_plus)``.

    The bond sum includes the bonds to the fixed boundary ring.  Returns
    ``(bond_sums, counts)`` with ``counts[k, n_plus]`` an int64 table.
    """
    bc = BoundaryCondition.parse(bc)
    if not 1 <= L <= MAX_EXACT_SIDE:
        raise DomainError(f"exact enumeration supports 1 <= L <= {MAX_EXACT_SIDE}, got {L}")
    n_bonds = 2 * L * (L + 1)
    counts = _gray_walk(L, bc.sign)
    return np.arange(-n_bonds, n_bonds + 1), counts


def _log_comb(n, k):
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    with np.errstate(invalid="ignore"):
        out = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return np.where((k < 0) | (k > n), -np.inf, out)


@dataclass
class ExactDistribution:
    """Joint law of ``(M, Q)`` under the canonical-salt measure on a small box."""

    L: int
    bc: BoundaryCondition
    J: float
    kappa: float
    c: float
    h: float
    N: int
    m_values: np.ndarray  # M for each row, ascending
    q_values: np.ndarray  # 0..N
    prob: np.ndarray  # shape (len(m_values), N + 1)
    log_z: float  # log of sum_S E_Ising[exp(kappa Q + h M)] over placements with N salts

    @property
    def volume(self) -> int:
        return self.L * self.L

    def m_marginal(self) -> np.ndarray:
        return self.prob.sum(axis=1)

    def conditional_q(self, row: int) -> np.ndarray:
        w = self.prob[row]
        s = w.sum()
        return w / s if s > 0 else w

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {
            (int(M), int(Q)): float(self.prob[i, Q])
            for i, M in enumerate(self.m_values)
            for Q in self.q_values
            if self.prob[i, Q] > 0.0
        }

    def write_csv(self, path, header: str = "") -> Path:
        path = Path(path)
        try:
            with path.open("w", encoding="utf-8", newline="\n") as fh:
                fh.write(header)
                fh.write("M,Q,probability\n")
                for i, M in enumerate(self.m_values):
                    for Q in self.q_values:
                        fh.write(f"{int(M)},{int(Q)},{self.prob[i, Q]:.15e}\n")
        except OSError as exc:
            raise OSError(f"cannot write exact distribution to {path}: {exc}") from exc
        return path


def exact_distribution(
    L: int,
    bc: BoundaryCondition,
    J: float,
    kappa: float,
    c: float,
    h: float,
) -> ExactDistribution:
    """Exact ``P(M, Q)`` for the canonical-salt measure on an ``L x L`` box."""
    bc = BoundaryCondition.parse(bc)
    if L > MAX_EXACT_SIDE:
        raise DomainError(f"exact enumeration is limited to L <= {MAX_EXACT_SIDE} (2^{L * L} states requested)")
    n = L * L
    N = salt_number(c, n)
    bond_sums, counts = density_of_states(L, bc)
    n_plus = np.arange(n + 1)
    M = 2 * n_plus - n

    with np.errstate(divide="ignore"):
        log_counts = np.log(counts.astype(float))
    # log sum over spin configs with given n_plus of exp(J * bond_sum)
    log_spin = logsumexp(log_counts + J * bond_sums[:, None], axis=0)
    log_ising_z = logsumexp(log_spin)

    q = np.arange(N + 1)
    log_salt = _log_comb(n_plus[:, None], q[None, :]) + _log_comb(n - n_plus[:, None], N - q[None, :]) + kappa * q[None, :]
    log_w = log_spin[:, None] + h * M[:, None] + log_salt
    log_total = logsumexp(log_w)
    prob = np.exp(log_w - log_total)
    return ExactDistribution(
        L=L,
        bc=bc,
        J=J,
        kappa=kappa,
        c=c,
        h=h,
        N=N,
        m_values=M,
        q_values=q,
        prob=prob,
        log_z=float(log_total - log_ising_z),
    )
