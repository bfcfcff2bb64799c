"""Calibration-style noise parameters and the single-qubit channels they induce."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

FIELDS = ("p1", "p2", "t1", "t2", "dur1", "dur2", "dur_meas", "p01", "p10", "scale", "p_global")


class NoiseError(ValueError):
    pass


class ClampedProbabilityWarning(UserWarning):
    """A probability exceeded 1 after noise amplification and was clamped."""


def _per_qubit(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise NoiseError(f"{name} must be a scalar or have length {n}")
    return arr


@dataclass(frozen=True)
class NoiseSpec:
    """Per-gate depolarizing, thermal relaxation and asymmetric readout flips.

    ``t1``, ``t2``, ``p01`` and ``p10`` may be scalars (uniform) or per-qubit
    sequences. ``scale`` is the amplification factor used by ZNE: it multiplies
    every probability and every duration at evaluation time. ``p_global`` is an
    optional whole-register depolarizing channel applied once before readout.
    """

    p1: float = 0.0
    p2: float = 0.0
    t1: float | tuple[float, ...] = float("inf")
    t2: float | tuple[float, ...] = float("inf")
    dur1: float = 0.0
    dur2: float = 0.0
    dur_meas: float = 0.0
    p01: float | tuple[float, ...] = 0.0
    p10: float | tuple[float, ...] = 0.0
    scale: float = 1.0
    p_global: float = 0.0

    def __post_init__(self) -> None:
        for name in ("t1", "t2", "p01", "p10"):
            v = getattr(self, name)
            if not np.isscalar(v):
                object.__setattr__(self, name, tuple(float(a) for a in v))
        for name in ("p1", "p2", "p_global"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise NoiseError(f"{name}={v} outside [0, 1]")
        for name in ("p01", "p10"):
            v = np.asarray(getattr(self, name), dtype=float)
            if np.any(v < 0) or np.any(v > 1):
                raise NoiseError(f"{name} outside [0, 1]")
        t1 = np.asarray(self.t1, dtype=float)
        t2 = np.asarray(self.t2, dtype=float)
        if np.any(t1 <= 0) or np.any(t2 <= 0):
            raise NoiseError("t1 and t2 must be positive")
        if np.any(t2 > 2 * t1):
            raise NoiseError("t2 must not exceed 2*t1")
        if min(self.dur1, self.dur2, self.dur_meas) < 0:
            raise NoiseError("durations must be non-negative")
        if self.scale < 1.0:
            raise NoiseError("scale must be >= 1")

    @classmethod
    def ideal(cls) -> NoiseSpec:
        return cls()

    @classmethod
    def depolarizing(cls, p1: float = 0.0, p2: float = 0.0) -> NoiseSpec:
        return cls(p1=p1, p2=p2)

    @classmethod
    def calibration_like(cls) -> NoiseSpec:
        """Typical heavy-hex transmon figures: ~3e-4 1q, ~3e-3 2q, T1 ~150 us."""
        return cls(
            p1=3e-4,
            p2=3e-3,
            t1=150e-6,
            t2=100e-6,
            dur1=36e-9,
            dur2=84e-9,
            dur_meas=1.5e-6,
            p01=0.01,
            p10=0.02,
        )

    def with_scale(self, scale: float) -> NoiseSpec:
        return replace(self, scale=float(scale))

    def _scaled_prob(self, value):
        raw = np.asarray(value, dtype=float) * self.scale
        if np.any(raw > 1.0):
            warnings.warn(
                f"amplified probability {raw.max():.4g} clamped to 1 at scale {self.scale}",
                ClampedProbabilityWarning,
                stacklevel=3,
            )
        return np.clip(raw, 0.0, 1.0)

    @property
    def clamped(self) -> bool:
        probs = [self.p1, self.p2, self.p_global, *np.ravel(self.p01), *np.ravel(self.p10)]
        return any(p * self.scale > 1.0 for p in probs)

    @property
    def eff_p1(self) -> float:
        return float(self._scaled_prob(self.p1))

    @property
    def eff_p2(self) -> float:
        return float(self._scaled_prob(self.p2))

    @property
    def eff_p_global(self) -> float:
        return float(self._scaled_prob(self.p_global))

    def eff_readout(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        return (
            self._scaled_prob(_per_qubit(self.p01, n, "p01")),
            self._scaled_prob(_per_qubit(self.p10, n, "p10")),
        )

    def t1_array(self, n: int) -> np.ndarray:
        return _per_qubit(self.t1, n, "t1")

    def t2_array(self, n: int) -> np.ndarray:
        return _per_qubit(self.t2, n, "t2")

    @property
    def has_finite_coherence(self) -> bool:
        return bool(
            np.isfinite(np.asarray(self.t1, dtype=float)).any()
            or np.isfinite(np.asarray(self.t2, dtype=float)).any()
        )

    @property
    def has_relaxation(self) -> bool:
        return self.has_finite_coherence and max(self.dur1, self.dur2, self.dur_meas) > 0

    def is_identity(self) -> bool:
        return (
            self.p1 == 0
            and self.p2 == 0
            and self.p_global == 0
            and not np.any(np.asarray(self.p01))
            and not np.any(np.asarray(self.p10))
            and not self.has_relaxation
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("t1", "t2"):
            v = d[key]
            if isinstance(v, tuple):
                d[key] = [None if np.isinf(a) else a for a in v]
            elif np.isinf(v):
                d[key] = None
        for key in ("p01", "p10"):
            if isinstance(d[key], tuple):
                d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> NoiseSpec:
        unknown = set(d) - set(FIELDS)
        if unknown:
            raise NoiseError(f"unknown noise fields: {sorted(unknown)}")
        kw = dict(d)
        for key in ("t1", "t2"):
            if key in kw:
                v = kw[key]
                if v is None:
                    kw[key] = float("inf")
                elif isinstance(v, list):
                    kw[key] = tuple(float("inf") if a is None else float(a) for a in v)
        return cls(**kw)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> NoiseSpec:
        return cls.from_dict(json.loads(Path(path).read_text()))


# Kraus sets as lists of 2x2 arrays; superoperators as (2,2,2,2) arrays indexed
# [a_out, b_out, a_in, b_in] acting on rho[a, b].


def depolarizing_kraus(p: float) -> list[np.ndarray]:
    """rho -> (1 - p) rho + p I/2."""
    i2 = np.eye(2, dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    return [np.sqrt(1 - 3 * p / 4) * i2] + [np.sqrt(p / 4) * m for m in (x, y, z)]


def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    return [
        np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex),
    ]


def phase_damping_kraus(lam: float) -> list[np.ndarray]:
    """Off-diagonals shrink by ``sqrt(1 - lam)``."""
    return [
        np.array([[1, 0], [0, np.sqrt(1 - lam)]], dtype=complex),
        np.array([[0, 0], [0, np.sqrt(lam)]], dtype=complex),
    ]


def relaxation_params(duration: float, t1: float, t2: float) -> tuple[float, float]:
    """Amplitude-damping and phase-damping strengths for an interval.

    Pure dephasing rate is ``1/t2 - 1/(2 t1)``, clamped at zero, so the total
    coherence decay over the interval is ``exp(-duration/t2)``.
    """
    if duration <= 0:
        return 0.0, 0.0
    gamma = 0.0 if np.isinf(t1) else 1.0 - np.exp(-duration / t1)
    rate_phi = (0.0 if np.isinf(t2) else 1.0 / t2) - (0.0 if np.isinf(t1) else 0.5 / t1)
    rate_phi = max(rate_phi, 0.0)
    lam = 1.0 - np.exp(-2.0 * duration * rate_phi)
    return float(gamma), float(lam)


def kraus_to_superop(kraus: list[np.ndarray]) -> np.ndarray:
    return sum(np.einsum("ac,bd->abcd", k, k.conj()) for k in kraus)


def unitary_superop(u: np.ndarray) -> np.ndarray:
    return kraus_to_superop([u])


def compose(*superops: np.ndarray) -> np.ndarray:
    """Superoperator of applying ``superops`` left to right."""
    out = np.einsum("ac,bd->abcd", np.eye(2), np.eye(2)).astype(complex)
    for s in superops:
        out = np.einsum("abcd,cdef->abef", s, out)
    return out


def relaxation_superop(duration: float, t1: float, t2: float) -> np.ndarray | None:
    gamma, lam = relaxation_params(duration, t1, t2)
    if gamma == 0.0 and lam == 0.0:
        return None
    return compose(
        kraus_to_superop(amplitude_damping_kraus(gamma)),
        kraus_to_superop(phase_damping_kraus(lam)),
    )
