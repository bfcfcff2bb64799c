"""Exact p=1 QAOA evolution: statevector (ideal) and density matrix (noisy).

Basis index ``b`` encodes qubit ``i`` in bit ``i``; in the ``(2,)*n`` tensor
view qubit ``i`` lives on axis ``n - 1 - i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .noise import NoiseSpec, compose, kraus_to_superop, depolarizing_kraus, relaxation_superop, unitary_superop
from .qubo import IsingHamiltonian, all_bitstrings, feasible_mask, format_bitstring, index_to_bits

STATEVECTOR_MAX_N = 16
DENSITY_MAX_N = 10
CONDITIONS = ("ideal", "noisy", "external")

H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
# trace the qubit out and replace it by I/2
_RESET_MIXED = np.einsum("ab,cd->abcd", np.eye(2), np.eye(2)) / 2.0


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


@dataclass(frozen=True)
class GateEvent:
    """One scheduled gate.

    ``weight`` multiplies the variational angle: RZZ/RZ rotate by ``2*gamma*weight``,
    RX by ``2*beta``. ``duration=None`` takes the gate-class duration from the
    NoiseSpec (dur1, dur2 or dur_meas).
    """

    kind: str
    qubits: tuple[int, ...] = ()
    weight: float = 1.0
    duration: float | None = None

    def angle(self, gamma: float, beta: float) -> float:
        if self.kind in ("RZZ", "RZ"):
            return 2.0 * gamma * self.weight
        if self.kind == "RX":
            return 2.0 * beta
        return 0.0


@dataclass(frozen=True)
class GateSchedule:
    n: int
    events: tuple[GateEvent, ...]

    def count(self, kind: str) -> int:
        return sum(e.kind == kind for e in self.events)


def build_schedule(H: IsingHamiltonian) -> GateSchedule:
    """H on all qubits, one RZZ per nonzero coupling, one RZ per nonzero field, RX layer, measure."""
    n = H.n
    events = [GateEvent("H", (i,)) for i in range(n)]
    events += [GateEvent("RZZ", (i, j), w) for i, j, w in H.couplings()]
    events += [GateEvent("RZ", (i,), float(H.h[i])) for i in range(n) if H.h[i] != 0.0]
    events += [GateEvent("RX", (i,)) for i in range(n)]
    events.append(GateEvent("MEASURE_ALL", tuple(range(n))))
    return GateSchedule(n, tuple(events))


@dataclass
class OutcomeDistribution:
    probs: np.ndarray
    condition: str = "ideal"
    shots: int | None = None
    counts: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=float)
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}")
        if abs(self.probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {self.probs.sum()!r}")
        if self.counts is not None and int(self.counts.sum()) != self.shots:
            raise ValueError("counts must sum to shots")

    @property
    def n(self) -> int:
        return int(np.log2(self.probs.size))

    def counts_map(self) -> dict[str, int]:
        if self.counts is None:
            return {}
        return {
            format_bitstring(index_to_bits(b, self.n)): int(c)
            for b, c in enumerate(self.counts)
            if c
        }


def cost_diagonal(H: IsingHamiltonian) -> np.ndarray:
    """QUBO-unit energy of every basis state, indexed by bitstring index."""
    if H.n > STATEVECTOR_MAX_N:
        raise ValueError(f"cost diagonal capped at n={STATEVECTOR_MAX_N}, got {H.n}")
    z = 1.0 - 2.0 * all_bitstrings(H.n).astype(float)
    return np.einsum("bi,ij,bj->b", z, H.j, z) + z @ H.h + H.constant


def _n_from_diag(diag: np.ndarray) -> int:
    n = int(round(np.log2(diag.size)))
    if 2**n != diag.size:
        raise ValueError("diagonal length must be a power of two")
    return n


def _apply_1q_state(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    v = psi.reshape(2 ** (n - 1 - q), 2, 2**q)
    return np.einsum("xa,iaj->ixj", u, v).reshape(-1)


def ideal_state(gamma: float, beta: float, diag: np.ndarray) -> np.ndarray:
    n = _n_from_diag(diag)
    psi = np.exp(-1j * gamma * diag) / np.sqrt(diag.size)
    u = rx(2.0 * beta)
    for q in range(n):
        psi = _apply_1q_state(psi, u, q, n)
    return psi


def ideal_distribution(gamma: float, beta: float, diag: np.ndarray) -> OutcomeDistribution:
    probs = np.abs(ideal_state(gamma, beta, diag)) ** 2
    return OutcomeDistribution(probs / probs.sum(), "ideal")


def ideal_energy(gamma: float, beta: float, diag: np.ndarray) -> float:
    return float(np.abs(ideal_state(gamma, beta, diag)) ** 2 @ diag)


@dataclass
class DensityMatrix:
    """Mutable ``2**n x 2**n`` register state with in-place channel application."""

    n: int
    rho: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        if self.rho is None:
            d = 2**self.n
            self.rho = np.zeros((d, d), dtype=complex)
            self.rho[0, 0] = 1.0

    def apply_superop(self, s: np.ndarray, q: int) -> None:
        a, b = 2 ** (self.n - 1 - q), 2**q
        r = self.rho.reshape(a, 2, b, a, 2, b).transpose(1, 4, 0, 2, 3, 5).reshape(4, -1)
        out = (s.reshape(4, 4) @ r).reshape(2, 2, a, b, a, b).transpose(2, 0, 3, 4, 1, 5)
        self.rho = np.ascontiguousarray(out).reshape(self.rho.shape)

    def apply_phase(self, phases: np.ndarray) -> None:
        self.rho *= np.multiply.outer(phases, phases.conj())

    def depolarize_pair(self, p: float, i: int, j: int) -> None:
        if p == 0.0:
            return
        before = self.rho
        self.apply_superop(_RESET_MIXED, i)
        self.apply_superop(_RESET_MIXED, j)
        self.rho = (1.0 - p) * before + p * self.rho

    def depolarize_global(self, w: float) -> None:
        if w == 0.0:
            return
        self.rho *= 1.0 - w
        self.rho[np.diag_indices_from(self.rho)] += w / self.rho.shape[0]

    def probabilities(self) -> np.ndarray:
        p = np.real(np.diag(self.rho)).copy()
        return p

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))


def _event_duration(event: GateEvent, noise: NoiseSpec) -> float:
    if event.duration is not None:
        base = event.duration
    elif event.kind == "RZZ":
        base = noise.dur2
    elif event.kind == "MEASURE_ALL":
        base = noise.dur_meas
    else:
        base = noise.dur1
    return base * noise.scale


class _RelaxationCache:
    def __init__(self, noise: NoiseSpec, n: int) -> None:
        self.t1 = noise.t1_array(n)
        self.t2 = noise.t2_array(n)
        self._cache: dict[tuple[int, float], np.ndarray | None] = {}

    def get(self, q: int, duration: float) -> np.ndarray | None:
        key = (q, duration)
        if key not in self._cache:
            self._cache[key] = relaxation_superop(duration, self.t1[q], self.t2[q])
        return self._cache[key]


def evolve_density(
    gamma: float,
    beta: float,
    sched: GateSchedule,
    noise: NoiseSpec,
    check_trace: bool = False,
) -> DensityMatrix:
    """Run ``sched`` on |0...0> with per-gate noise; returns the pre-readout state.

    After each event the touched qubits get a depolarizing channel (p1 for
    single-qubit gates, p2 as a two-qubit channel for RZZ), then every qubit,
    touched or idle, relaxes for the event duration. Relaxation of a qubit is
    accumulated and applied only when a later gate touches it; channels on
    distinct qubits commute, so this is exact.
    """
    n = sched.n
    if n > DENSITY_MAX_N:
        raise ValueError(f"density-matrix simulation capped at n={DENSITY_MAX_N}, got {n}")
    p1, p2 = noise.eff_p1, noise.eff_p2
    relax = _RelaxationCache(noise, n)
    use_relax = noise.has_relaxation or (
        noise.has_finite_coherence and any(e.duration for e in sched.events)
    )
    depol1 = kraus_to_superop(depolarizing_kraus(p1)) if p1 > 0 else None
    z = 1.0 - 2.0 * all_bitstrings(n).astype(float)
    dm = DensityMatrix(n)
    pending: list[np.ndarray | None] = [None] * n

    def flush(q: int) -> None:
        if pending[q] is not None:
            dm.apply_superop(pending[q], q)
            pending[q] = None

    def defer(q: int, s: np.ndarray | None) -> None:
        if s is not None:
            pending[q] = s if pending[q] is None else compose(pending[q], s)

    for event in sched.events:
        theta = event.angle(gamma, beta)
        d = _event_duration(event, noise)
        if event.kind in ("H", "RX", "RZ"):
            (q,) = event.qubits
            u = H_GATE if event.kind == "H" else rx(theta) if event.kind == "RX" else rz(theta)
            s = unitary_superop(u)
            if pending[q] is not None:
                s = compose(pending[q], s)
                pending[q] = None
            if depol1 is not None:
                s = compose(s, depol1)
            pending[q] = s
        elif event.kind == "RZZ":
            i, j = event.qubits
            flush(i)
            flush(j)
            dm.apply_phase(np.exp(-0.5j * theta * z[:, i] * z[:, j]))
            dm.depolarize_pair(p2, i, j)
        elif event.kind != "MEASURE_ALL":
            raise ValueError(f"unknown gate kind {event.kind!r}")

        if use_relax:
            for q in range(n):
                defer(q, relax.get(q, d))
        if event.kind == "MEASURE_ALL":
            for q in range(n):
                flush(q)
            dm.depolarize_global(noise.eff_p_global)
        if check_trace:
            for q in range(n):
                flush(q)
            if abs(dm.trace() - 1.0) > 1e-9:
                raise RuntimeError(f"trace drifted to {dm.trace()} after {event}")

    for q in range(n):
        flush(q)
    if not any(e.kind == "MEASURE_ALL" for e in sched.events):
        dm.depolarize_global(noise.eff_p_global)
    return dm


def noisy_distribution(
    gamma: float,
    beta: float,
    sched: GateSchedule,
    diag: np.ndarray,
    noise: NoiseSpec,
) -> OutcomeDistribution:
    """Measured-outcome distribution under ``noise``, readout flips included."""
    if sched.n != _n_from_diag(diag):
        raise ValueError("schedule and diagonal disagree on qubit count")
    dm = evolve_density(gamma, beta, sched, noise)
    probs = np.clip(dm.probabilities(), 0.0, None)
    dist = OutcomeDistribution(probs / probs.sum(), "noisy")
    return apply_readout(dist, noise)


def apply_readout(dist: OutcomeDistribution, noise: NoiseSpec) -> OutcomeDistribution:
    """Independent per-qubit asymmetric bit flips on the outcome probabilities."""
    n = dist.n
    p01, p10 = noise.eff_readout(n)
    if not (p01.any() or p10.any()):
        return OutcomeDistribution(dist.probs.copy(), dist.condition)
    p = dist.probs
    for q in range(n):
        m = np.array([[1 - p01[q], p10[q]], [p01[q], 1 - p10[q]]])
        p = np.einsum("xa,iaj->ixj", m, p.reshape(2 ** (n - 1 - q), 2, 2**q)).reshape(-1)
    return OutcomeDistribution(p / p.sum(), dist.condition)


def sample_counts(dist: OutcomeDistribution, shots: int, seed) -> OutcomeDistribution:
    """Multinomial shot sample; ``seed`` is anything ``default_rng`` accepts."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, dist.probs)
    return OutcomeDistribution(dist.probs, dist.condition, shots, counts)


def energy_expectation(dist: OutcomeDistribution, diag: np.ndarray, use_counts: bool = False) -> float:
    if dist.probs.size != diag.size:
        raise ValueError("distribution and diagonal sizes differ")
    if use_counts:
        if dist.counts is None:
            raise ValueError("distribution carries no counts")
        return float(dist.counts @ diag / dist.shots)
    return float(dist.probs @ diag)


def energy_std_error(dist: OutcomeDistribution, diag: np.ndarray) -> float:
    """Standard error of the count-weighted energy mean (sample std / sqrt(shots))."""
    if dist.counts is None:
        return 0.0
    mean = dist.counts @ diag / dist.shots
    var = dist.counts @ (diag - mean) ** 2 / max(dist.shots - 1, 1)
    return float(np.sqrt(var / dist.shots))


def feasibility_fraction(dist: OutcomeDistribution, k: int, use_counts: bool = False) -> float:
    mask = feasible_mask(dist.n, k)
    if use_counts:
        if dist.counts is None:
            raise ValueError("distribution carries no counts")
        return float(dist.counts[mask].sum() / dist.shots)
    return float(min(1.0, dist.probs[mask].sum()))
