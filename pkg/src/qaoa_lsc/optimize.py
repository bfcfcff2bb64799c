"""Multi-start derivative-free search for (gamma*, beta*) on the ideal landscape."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .engine import cost_diagonal, ideal_energy
from .qubo import IsingHamiltonian

DEFAULT_BOX = ((0.0, np.pi), (0.0, np.pi / 2))
DEFAULT_STARTS = 16
XATOL = 1e-8
FATOL = 1e-8
MAX_EVALS = 500


@dataclass
class OptimizationResult:
    gamma_star: float
    beta_star: float
    energy: float
    starts: int
    best_start_index: int
    trace: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> OptimizationResult:
        return cls(**json.loads(Path(path).read_text()))


def optimize_parameters(
    H: IsingHamiltonian,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    box: tuple[tuple[float, float], tuple[float, float]] = DEFAULT_BOX,
    refine: bool = True,
) -> OptimizationResult:
    """Bounded Nelder-Mead from ``starts`` uniform seeded points in ``box``.

    Ties between starts go to the lowest start index. With ``refine`` the best
    point is then checked against the default 13x13, half-width 0.4 grid
    around it and the search restarts from any lower in-box grid cell, so a
    later scan centered on the result cannot undercut it inside the box.
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    (g_lo, g_hi), (b_lo, b_hi) = box
    if not (g_lo < g_hi and b_lo < b_hi):
        raise ValueError(f"degenerate search box {box}")
    diag = cost_diagonal(H)
    rng = np.random.default_rng(seed)
    x0s = rng.uniform([g_lo, b_lo], [g_hi, b_hi], size=(starts, 2))

    def energy(p: np.ndarray) -> float:
        return ideal_energy(p[0], p[1], diag)

    def local(x0: np.ndarray) -> tuple[np.ndarray, float]:
        res = minimize(
            energy,
            x0,
            method="Nelder-Mead",
            bounds=box,
            options={"xatol": XATOL, "fatol": FATOL, "maxfev": MAX_EVALS},
        )
        x = np.clip(res.x, [g_lo, b_lo], [g_hi, b_hi])
        return x, energy(x)

    trace = []
    best_i, best_e, best_x = -1, np.inf, None
    for i, x0 in enumerate(x0s):
        x, e = local(x0)
        trace.append({"initial": x0.tolist(), "final": x.tolist(), "energy": e})
        if e < best_e:
            best_i, best_e, best_x = i, e, x

    if refine:
        best_x, best_e = _grid_refine(energy, local, best_x, best_e, box)
    return OptimizationResult(float(best_x[0]), float(best_x[1]), float(best_e), starts, best_i, trace)


def _grid_refine(energy, local, x, e, box, half_width=0.4, n_points=13, rounds=10):
    """Restart the local search from any lower in-box cell of the grid around ``x``."""
    (g_lo, g_hi), (b_lo, b_hi) = box
    for _ in range(rounds):
        gs = np.linspace(x[0] - half_width, x[0] + half_width, n_points)
        bs = np.linspace(x[1] - half_width, x[1] + half_width, n_points)
        cells = [
            (energy((g, b)), g, b)
            for b in bs
            for g in gs
            if g_lo <= g <= g_hi and b_lo <= b <= b_hi
        ]
        ce, cg, cb = min(cells)
        if ce >= e:
            break
        nx, ne = local(np.array([cg, cb]))
        if ne < ce:
            x, e = nx, ne
        else:
            x, e = np.array([cg, cb]), ce
    return x, e
