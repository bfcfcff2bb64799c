"""Cardinality-constrained QUBO instances, Ising conversion and classical solvers.

Bitstrings are 0/1 integer arrays ``x`` with ``x[i]`` the value of variable ``i``.
The integer index of a bitstring is ``sum(x[i] << i)``, so the printed label
(``format_bitstring``) puts variable ``n-1`` leftmost. Every tie-break in this
module picks the lowest index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from pathlib import Path

import numpy as np

BRUTE_FORCE_MAX_N = 24
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-9
SIGMA_JITTER = 1e-6

# (label, n, k, volatility, seed) for the three desk-scale analogues of the
# hardware instances: 6-var low-vol, 8-var low-vol, 8-var high-vol.
SHIPPED_INSTANCES = (
    ("6-var low-vol", 6, 3, "low", 1),
    ("8-var low-vol", 8, 4, "low", 1),
    ("8-var high-vol", 8, 4, "high", 1),
)


class InstanceError(ValueError):
    """Invalid instance parameters."""


def _check_nk(n: int, k: int) -> None:
    if n < 2:
        raise InstanceError(f"n must be >= 2, got {n}")
    if not 1 <= k <= n - 1:
        raise InstanceError(f"k must satisfy 1 <= k <= n-1, got k={k}, n={n}")


@dataclass
class PortfolioInstance:
    """Mean-variance selection problem with a cardinality constraint."""

    n: int
    k: int
    mu: np.ndarray
    sigma_mat: np.ndarray
    risk_aversion: float
    penalty: float
    label: str = ""
    seed: int | None = None

    def __post_init__(self) -> None:
        self.mu = np.asarray(self.mu, dtype=float)
        self.sigma_mat = np.asarray(self.sigma_mat, dtype=float)
        _check_nk(self.n, self.k)
        if self.mu.shape != (self.n,):
            raise InstanceError("mu must have length n")
        if self.sigma_mat.shape != (self.n, self.n):
            raise InstanceError("sigma_mat must be n x n")
        if np.max(np.abs(self.sigma_mat - self.sigma_mat.T)) > SYMMETRY_TOL:
            raise InstanceError("sigma_mat must be symmetric")
        if np.linalg.eigvalsh(self.sigma_mat).min() < -PSD_TOL:
            raise InstanceError("sigma_mat must be positive semidefinite")
        if self.risk_aversion < 0:
            raise InstanceError("risk_aversion must be >= 0")
        if self.penalty <= 0:
            raise InstanceError("penalty must be > 0")

    def objective(self, x: np.ndarray) -> float:
        """Unpenalized mean-variance objective ``-mu.x + lambda x^T Sigma x``."""
        x = np.asarray(x, dtype=float)
        return float(-self.mu @ x + self.risk_aversion * x @ self.sigma_mat @ x)

    @property
    def feasible_fraction(self) -> float:
        return comb(self.n, self.k) / 2**self.n

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "k": self.k,
            "mu": self.mu.tolist(),
            "sigma": self.sigma_mat.tolist(),
            "risk_aversion": self.risk_aversion,
            "penalty": self.penalty,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> PortfolioInstance:
        return cls(
            n=int(d["n"]),
            k=int(d["k"]),
            mu=d["mu"],
            sigma_mat=d["sigma"],
            risk_aversion=float(d["risk_aversion"]),
            penalty=float(d["penalty"]),
            label=d.get("label", ""),
            seed=d.get("seed"),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> PortfolioInstance:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class QuboMatrix:
    """Energy ``x^T q x + offset`` over binary ``x``; ``q`` is symmetric."""

    q: np.ndarray
    offset: float = 0.0

    def __post_init__(self) -> None:
        self.q = np.atleast_2d(np.asarray(self.q, dtype=float))
        if self.q.shape[0] != self.q.shape[1]:
            raise ValueError("q must be square")
        if np.max(np.abs(self.q - self.q.T), initial=0.0) > SYMMETRY_TOL:
            raise ValueError("q must be symmetric")
        self.offset = float(self.offset)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def scaled(self, c: float) -> QuboMatrix:
        return QuboMatrix(c * self.q, c * self.offset)


@dataclass
class IsingHamiltonian:
    """Spin form ``sum_{i<j} j_ij z_i z_j + sum_i h_i z_i + constant`` with z = 1 - 2x."""

    h: np.ndarray
    j: np.ndarray
    constant: float = 0.0
    n: int = field(init=False)

    def __post_init__(self) -> None:
        self.h = np.asarray(self.h, dtype=float)
        self.j = np.triu(np.asarray(self.j, dtype=float), k=1)
        self.n = self.h.shape[0]
        if self.j.shape != (self.n, self.n):
            raise ValueError("j must be n x n")
        self.constant = float(self.constant)

    def energy(self, x: np.ndarray) -> float:
        z = 1.0 - 2.0 * np.asarray(x, dtype=float)
        return float(z @ self.j @ z + self.h @ z + self.constant)

    def couplings(self) -> list[tuple[int, int, float]]:
        """Nonzero ``(i, j, j_ij)`` with ``i < j`` in row-major order."""
        rows, cols = np.nonzero(self.j)
        return [(int(a), int(b), float(self.j[a, b])) for a, b in zip(rows, cols)]


def generate_instance(
    n: int,
    k: int,
    volatility: str = "low",
    seed: int = 0,
    risk_aversion: float = 0.5,
    label: str | None = None,
) -> PortfolioInstance:
    """Seeded synthetic instance standing in for market data.

    ``Sigma = A A^T + 1e-6 I`` with Gaussian ``A``. The high-volatility regime
    draws the same ``A`` and scales it by ``sqrt(2)``, which doubles every
    off-diagonal covariance while keeping ``Sigma`` positive semidefinite.
    The penalty is ``||mu||_1 + lambda * sum_ij |Sigma_ij|``.
    """
    _check_nk(n, k)
    if volatility not in ("low", "high"):
        raise InstanceError(f"volatility must be 'low' or 'high', got {volatility!r}")
    rng = np.random.default_rng(seed)
    mu = rng.uniform(0.1, 0.5, size=n)
    a = rng.normal(0.0, 0.15, size=(n, n))
    if volatility == "high":
        a = np.sqrt(2.0) * a
    sigma = a @ a.T
    sigma = 0.5 * (sigma + sigma.T) + SIGMA_JITTER * np.eye(n)
    penalty = float(np.abs(mu).sum() + risk_aversion * np.abs(sigma).sum())
    if label is None:
        label = f"{n}-var {volatility}-vol seed{seed}"
    return PortfolioInstance(n, k, mu, sigma, risk_aversion, penalty, label, seed)


def shipped_instances() -> list[PortfolioInstance]:
    return [generate_instance(n, k, vol, seed, label=lab) for lab, n, k, vol, seed in SHIPPED_INSTANCES]


def build_qubo(inst: PortfolioInstance) -> QuboMatrix:
    """Fold ``-mu.x + lambda x^T Sigma x + P (sum x - k)^2`` into ``(q, offset)``."""
    n, k, p = inst.n, inst.k, inst.penalty
    q = inst.risk_aversion * inst.sigma_mat.copy()
    # P (sum x)^2 = P sum_i x_i + P sum_{i != j} x_i x_j, using x_i^2 = x_i
    q += p * (np.ones((n, n)) - np.eye(n))
    q[np.diag_indices(n)] += -inst.mu + p * (1 - 2 * k)
    q = 0.5 * (q + q.T)
    return QuboMatrix(q, p * k * k)


def qubo_to_ising(Q: QuboMatrix) -> IsingHamiltonian:
    q = Q.q
    diag = np.diag(q)
    off = q - np.diag(diag)
    # q_ii x_i -> q_ii (1 - z_i)/2 ; 2 q_ij x_i x_j -> q_ij (1 - z_i - z_j + z_i z_j)/2
    h = -0.5 * diag - 0.5 * off.sum(axis=1)
    j = np.triu(off, k=1) / 2.0
    constant = Q.offset + 0.5 * diag.sum() + 0.5 * np.triu(off, k=1).sum()
    return IsingHamiltonian(h, j, constant)


def qubo_energy(Q: QuboMatrix, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (Q.n,):
        raise ValueError(f"bitstring length {x.shape} does not match n={Q.n}")
    return float(x @ Q.q @ x + Q.offset)


def index_to_bits(index: int, n: int) -> np.ndarray:
    return (int(index) >> np.arange(n)) & 1


def bits_to_index(x: np.ndarray) -> int:
    return int(sum(int(b) << i for i, b in enumerate(x)))


def format_bitstring(x: np.ndarray) -> str:
    return "".join(str(int(b)) for b in reversed(list(x)))


def all_bitstrings(n: int) -> np.ndarray:
    """``(2**n, n)`` array; row ``b`` is the bitstring with index ``b``."""
    idx = np.arange(2**n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.int8)


def _energies_chunked(Q: QuboMatrix, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    x = ((idx[:, None] >> np.arange(Q.n)) & 1).astype(float)
    return np.einsum("bi,ij,bj->b", x, Q.q, x) + Q.offset


def brute_force_optimum(Q: QuboMatrix, chunk: int = 1 << 16) -> tuple[np.ndarray, float]:
    """Exact minimizer by enumeration; ties go to the lowest bitstring index."""
    if Q.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force capped at n={BRUTE_FORCE_MAX_N}, got {Q.n}")
    best_idx, best_e = 0, np.inf
    total = 2**Q.n
    for start in range(0, total, chunk):
        e = _energies_chunked(Q, start, min(start + chunk, total))
        i = int(np.argmin(e))
        if e[i] < best_e:
            best_idx, best_e = start + i, e[i]
    x = index_to_bits(best_idx, Q.n)
    return x, qubo_energy(Q, x)


def enumerate_feasible(n: int, k: int) -> list[np.ndarray]:
    """All weight-``k`` bitstrings in ascending index order."""
    _check_nk(n, k)
    idx = sorted(sum(1 << i for i in c) for c in combinations(range(n), k))
    return [index_to_bits(i, n) for i in idx]


@lru_cache(maxsize=64)
def feasible_mask(n: int, k: int) -> np.ndarray:
    """Boolean mask over bitstring indices with Hamming weight ``k`` (read-only)."""
    mask = all_bitstrings(n).sum(axis=1) == k
    mask.flags.writeable = False
    return mask


def _flip_bound(Q: QuboMatrix) -> float:
    q = Q.q
    bound = np.abs(np.diag(q)) + 2.0 * (np.abs(q).sum(axis=1) - np.abs(np.diag(q)))
    return float(bound.max()) if Q.n else 0.0


def simulated_annealing(
    Q: QuboMatrix, sweeps: int = 1000, seed: int = 0, t_final: float = 1e-3
) -> tuple[np.ndarray, float]:
    """Single-bit-flip Metropolis with a geometric temperature schedule.

    The start temperature is twice the largest possible single-flip energy
    change and decays geometrically to ``t_final`` over ``sweeps`` sweeps.
    Returns the best state visited.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    n = Q.n
    rng = np.random.default_rng(seed)
    q = Q.q
    diag = np.diag(q).copy()
    x = rng.integers(0, 2, size=n).astype(float)
    # local field: q_ii + 2 sum_{j != i} q_ij x_j
    field = diag + 2.0 * (q @ x - diag * x)
    energy = qubo_energy(Q, x)
    best_x, best_e = x.copy(), energy

    t0 = 2.0 * _flip_bound(Q)
    if t0 <= t_final:
        t0 = max(1.0, 2.0 * t_final)
    temps = t0 * (t_final / t0) ** (np.arange(sweeps) / max(sweeps - 1, 1))
    for t in temps:
        order = rng.permutation(n)
        u = rng.random(n)
        for i, r in zip(order, u):
            delta = (1.0 - 2.0 * x[i]) * field[i]
            if delta <= 0.0 or r < np.exp(-delta / t):
                step = 1.0 - 2.0 * x[i]
                x[i] += step
                field += 2.0 * q[:, i] * step
                field[i] -= 2.0 * q[i, i] * step
                energy += delta
                if energy < best_e - 1e-12 or (
                    abs(energy - best_e) <= 1e-12 and bits_to_index(x) < bits_to_index(best_x)
                ):
                    best_x, best_e = x.copy(), energy
    best_x = best_x.astype(np.int64)
    return best_x, qubo_energy(Q, best_x)


def random_search(Q: QuboMatrix, samples: int = 10_000, seed: int = 0) -> tuple[np.ndarray, float]:
    """Best of ``samples`` uniform bitstrings."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 2, size=(samples, Q.n))
    xf = x.astype(float)
    e = np.einsum("bi,ij,bj->b", xf, Q.q, xf) + Q.offset
    weights = 1 << np.arange(Q.n, dtype=np.int64)
    idx = x.astype(np.int64) @ weights
    # lowest energy, then lowest index
    order = np.lexsort((idx, e))
    best = x[order[0]].astype(np.int64)
    return best, qubo_energy(Q, best)
