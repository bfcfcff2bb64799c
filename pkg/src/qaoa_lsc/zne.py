"""Zero-noise extrapolation by Richardson (Lagrange) extrapolation to scale 0."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .engine import (
    GateSchedule,
    energy_expectation,
    energy_std_error,
    ideal_energy,
    noisy_distribution,
    sample_counts,
)
from .noise import NoiseSpec

DEFAULT_FACTORS = (1.0, 3.0, 5.0)


class NonMonotoneWarning(UserWarning):
    """Energies are not monotone in the amplification factor."""


def richardson_coefficients(scales: Sequence[float]) -> np.ndarray:
    """Lagrange basis polynomials through ``scales`` evaluated at zero."""
    s = np.asarray(scales, dtype=float)
    if s.size < 2:
        raise ValueError("need at least two scale factors")
    if np.unique(s).size != s.size:
        raise ValueError(f"duplicate scale factors in {list(scales)}")
    coeffs = np.empty_like(s)
    for i, si in enumerate(s):
        others = np.delete(s, i)
        coeffs[i] = np.prod(others / (others - si))
    return coeffs


def richardson_extrapolate(points: Sequence[tuple[float, float]]) -> tuple[float, np.ndarray]:
    """Zero-noise value and weights from ``(scale, value)`` pairs."""
    scales = [p[0] for p in points]
    values = np.array([p[1] for p in points], dtype=float)
    coeffs = richardson_coefficients(scales)
    return float(coeffs @ values), coeffs


def propagate_std(coefficients: Sequence[float], stds: Sequence[float]) -> float:
    """Standard error of ``sum c_i v_i`` for independent ``v_i``."""
    c = np.asarray(coefficients, dtype=float)
    s = np.asarray(stds, dtype=float)
    if c.shape != s.shape:
        raise ValueError("coefficients and stds differ in length")
    return float(np.sqrt(np.sum(c**2 * s**2)))


def is_monotone(factors: Sequence[float], energies: Sequence[float]) -> bool:
    order = np.argsort(factors)
    d = np.diff(np.asarray(energies, dtype=float)[order])
    return bool(np.all(d >= 0) or np.all(d <= 0))


@dataclass
class ZneResult:
    factors: list[float]
    energies: list[float]
    stds: list[float]
    extrapolated: float
    extrapolated_std: float
    coefficients: list[float]
    improvement_pct: float | None
    inflation: float | None
    monotone: bool
    ideal: float | None = None
    clamped: bool = False
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def zne_from_energies(
    factors: Sequence[float],
    energies: Sequence[float],
    stds: Sequence[float] | None = None,
    ideal: float | None = None,
) -> ZneResult:
    """Assemble a ZneResult from per-factor estimates.

    ``improvement_pct`` is the signed reduction in distance to ``ideal``
    relative to the factor-1 (raw) energy: positive when the extrapolation
    lands closer to the ideal value than the raw estimate, negative when it
    moves away or overshoots. Without ``ideal`` it is ``(raw - extrapolated)/|raw|``.
    """
    factors = [float(f) for f in factors]
    energies = [float(e) for e in energies]
    stds = [0.0] * len(factors) if stds is None else [float(s) for s in stds]
    value, coeffs = richardson_extrapolate(list(zip(factors, energies)))
    ext_std = propagate_std(coeffs, stds)

    raw_i = int(np.argmin(factors))
    raw = energies[raw_i]
    improvement = None
    if raw != 0:
        if ideal is None:
            improvement = 100.0 * (raw - value) / abs(raw)
        else:
            improvement = 100.0 * (abs(raw - ideal) - abs(value - ideal)) / abs(raw)
    inflation = ext_std / stds[raw_i] if stds[raw_i] > 0 else None

    result = ZneResult(
        factors=factors,
        energies=energies,
        stds=stds,
        extrapolated=value,
        extrapolated_std=ext_std,
        coefficients=coeffs.tolist(),
        improvement_pct=improvement,
        inflation=inflation,
        monotone=is_monotone(factors, energies),
        ideal=ideal,
    )
    if not result.monotone:
        msg = "energies are not monotone in the noise factor; the extrapolated value should not be trusted"
        result.warnings.append(msg)
        warnings.warn(msg, NonMonotoneWarning, stacklevel=2)
    return result


def run_zne(
    gamma: float,
    beta: float,
    sched: GateSchedule,
    diag: np.ndarray,
    noise: NoiseSpec,
    factors: Sequence[float] = DEFAULT_FACTORS,
    shots: int | None = None,
    seed: int = 0,
) -> ZneResult:
    """Evaluate at each amplified noise level and extrapolate to zero.

    Each factor gets its own seed stream. ``shots=None`` uses exact
    probabilities (zero standard errors).
    """
    factors = [float(f) for f in factors]
    richardson_coefficients(factors)
    if shots is not None and shots < 1:
        raise ValueError("shots must be >= 1")
    energies, stds = [], []
    clamped = False
    children = np.random.SeedSequence(seed).spawn(len(factors))
    for f, child in zip(factors, children):
        spec = noise.with_scale(f)
        clamped |= spec.clamped
        dist = noisy_distribution(gamma, beta, sched, diag, spec)
        if shots is None:
            energies.append(energy_expectation(dist, diag))
            stds.append(0.0)
        else:
            dist = sample_counts(dist, shots, child)
            energies.append(energy_expectation(dist, diag, True))
            stds.append(energy_std_error(dist, diag))
    result = zne_from_energies(factors, energies, stds, ideal_energy(gamma, beta, diag))
    if clamped:
        result.clamped = True
        result.warnings.append("amplified probabilities were clamped to 1")
    return result
