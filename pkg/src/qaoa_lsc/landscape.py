"""(gamma, beta) parameter grids, landscape scans and the landscape CSV format.

Landscape arrays are indexed ``[beta_index, gamma_index]``: rows follow beta,
columns follow gamma, matching the CSV row order (beta-major, gamma ascending).
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import (
    CONDITIONS,
    GateSchedule,
    build_schedule,
    cost_diagonal,
    energy_expectation,
    feasibility_fraction,
    ideal_distribution,
    noisy_distribution,
    sample_counts,
)
from .noise import NoiseSpec
from .qubo import IsingHamiltonian

CSV_HEADER = ["gamma", "beta", "energy", "ff", "shots"]
GRID_ATOL = 1e-12


class GridError(ValueError):
    """Malformed or mismatched landscape grid."""


@dataclass(frozen=True)
class ParameterGrid:
    """Uniform ``N x N`` product grid centered at ``(gamma_center, beta_center)``.

    ``gamma_half_width`` defaults to ``half_width``; set it separately only when
    the gamma axis is rescaled (e.g. to compensate for a rescaled cost).
    """

    gamma_center: float
    beta_center: float
    half_width: float = 0.4
    points_per_axis: int = 13
    gamma_half_width: float | None = None
    gamma_values: np.ndarray = field(init=False, repr=False, compare=False)
    beta_values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.points_per_axis < 2:
            raise GridError("points_per_axis must be >= 2")
        if not self.half_width > 0 or (self.gamma_half_width is not None and not self.gamma_half_width > 0):
            raise GridError("half widths must be > 0")
        ghw = self.gamma_hw
        n = self.points_per_axis
        object.__setattr__(
            self, "gamma_values", np.linspace(self.gamma_center - ghw, self.gamma_center + ghw, n)
        )
        object.__setattr__(
            self,
            "beta_values",
            np.linspace(self.beta_center - self.half_width, self.beta_center + self.half_width, n),
        )

    @property
    def gamma_hw(self) -> float:
        return self.half_width if self.gamma_half_width is None else self.gamma_half_width

    @property
    def shape(self) -> tuple[int, int]:
        return (self.points_per_axis, self.points_per_axis)

    @property
    def size(self) -> int:
        return self.points_per_axis**2

    @property
    def gamma_spacing(self) -> float:
        return 2 * self.gamma_hw / (self.points_per_axis - 1)

    @property
    def beta_spacing(self) -> float:
        return 2 * self.half_width / (self.points_per_axis - 1)

    def points(self) -> list[tuple[int, float, float]]:
        """``(flat_index, gamma, beta)`` in beta-major order."""
        n = self.points_per_axis
        return [
            (jb * n + ig, float(g), float(b))
            for jb, b in enumerate(self.beta_values)
            for ig, g in enumerate(self.gamma_values)
        ]

    def coords(self, flat_index: int) -> tuple[float, float]:
        jb, ig = divmod(int(flat_index), self.points_per_axis)
        return float(self.gamma_values[ig]), float(self.beta_values[jb])

    def nearest_index(self, gamma: float, beta: float) -> tuple[int, int]:
        """``(beta_index, gamma_index)`` of the cell nearest to a point."""
        return (
            int(np.argmin(np.abs(self.beta_values - beta))),
            int(np.argmin(np.abs(self.gamma_values - gamma))),
        )

    def matches(self, other: ParameterGrid) -> bool:
        return (
            self.points_per_axis == other.points_per_axis
            and np.allclose(self.gamma_values, other.gamma_values, rtol=0, atol=GRID_ATOL)
            and np.allclose(self.beta_values, other.beta_values, rtol=0, atol=GRID_ATOL)
        )

    def to_dict(self) -> dict:
        d = {
            "gamma_center": self.gamma_center,
            "beta_center": self.beta_center,
            "half_width": self.half_width,
            "points_per_axis": self.points_per_axis,
        }
        if self.gamma_half_width is not None:
            d["gamma_half_width"] = self.gamma_half_width
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ParameterGrid:
        return cls(
            float(d["gamma_center"]),
            float(d["beta_center"]),
            float(d["half_width"]),
            int(d["points_per_axis"]),
            None if d.get("gamma_half_width") is None else float(d["gamma_half_width"]),
        )


def make_grid(
    center: tuple[float, float], half_width: float = 0.4, n_points: int = 13
) -> ParameterGrid:
    return ParameterGrid(float(center[0]), float(center[1]), float(half_width), int(n_points))


@dataclass
class LandscapeGrid:
    grid: ParameterGrid
    energies: np.ndarray
    ff: np.ndarray
    condition: str = "ideal"
    label: str = ""
    shots: int | None = None
    n: int | None = None
    k: int | None = None

    def __post_init__(self) -> None:
        self.energies = np.asarray(self.energies, dtype=float)
        self.ff = np.asarray(self.ff, dtype=float)
        if self.energies.shape != self.grid.shape or self.ff.shape != self.grid.shape:
            raise GridError(f"energies and ff must be {self.grid.shape}")
        if np.any(self.ff < 0) or np.any(self.ff > 1):
            raise GridError("ff entries must lie in [0, 1]")
        if self.condition not in CONDITIONS:
            raise GridError(f"unknown condition {self.condition!r}")

    def with_energies(self, energies: np.ndarray, condition: str | None = None, label: str | None = None) -> LandscapeGrid:
        return LandscapeGrid(
            self.grid,
            energies,
            self.ff.copy(),
            condition or self.condition,
            self.label if label is None else label,
            self.shots,
            self.n,
            self.k,
        )

    def metadata(self) -> dict:
        return {
            "label": self.label,
            "condition": self.condition,
            "n": self.n,
            "k": self.k,
            "grid": self.grid.to_dict(),
        }


def point_seed(seed: int, flat_index: int) -> np.random.SeedSequence:
    """Independent per-point stream so results do not depend on evaluation order."""
    return np.random.SeedSequence([int(seed), int(flat_index)])


def _evaluate_point(args) -> tuple[float, float]:
    idx, gamma, beta, sched, diag, k, noise, shots, seed = args
    if noise is None:
        dist = ideal_distribution(gamma, beta, diag)
    else:
        dist = noisy_distribution(gamma, beta, sched, diag, noise)
    if shots is None:
        return energy_expectation(dist, diag), feasibility_fraction(dist, k)
    dist = sample_counts(dist, shots, point_seed(seed, idx))
    return energy_expectation(dist, diag, True), feasibility_fraction(dist, k, True)


def scan_landscape(
    grid: ParameterGrid,
    H: IsingHamiltonian,
    k: int,
    noise: NoiseSpec | None = None,
    shots: int | None = None,
    seed: int = 0,
    label: str = "",
    workers: int = 1,
    sched: GateSchedule | None = None,
) -> LandscapeGrid:
    """Energy and feasibility landscape over ``grid``.

    ``noise=None`` uses the statevector path and tags the result ``ideal``;
    otherwise the density-matrix path tagged ``noisy``. With ``shots`` each
    point is sampled from its own seed stream, so ``workers`` does not
    affect the output.
    """
    diag = cost_diagonal(H)
    if noise is not None and sched is None:
        sched = build_schedule(H)
    jobs = [(i, g, b, sched, diag, k, noise, shots, seed) for i, g, b in grid.points()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_evaluate_point(job) for job in jobs]
    values = np.array(results).reshape(grid.points_per_axis, grid.points_per_axis, 2)
    return LandscapeGrid(
        grid,
        values[..., 0],
        np.clip(values[..., 1], 0.0, 1.0),
        "ideal" if noise is None else "noisy",
        label,
        shots,
        H.n,
        k,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def export_landscape(L: LandscapeGrid, path: str | Path, sidecar: bool = True) -> None:
    """Write the landscape CSV (and, by default, its metadata sidecar JSON)."""
    path = Path(path)
    shots = "" if L.shots is None else str(int(L.shots))
    n = L.grid.points_per_axis
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for jb in range(n):
            for ig in range(n):
                w.writerow(
                    [
                        _fmt(L.grid.gamma_values[ig]),
                        _fmt(L.grid.beta_values[jb]),
                        _fmt(L.energies[jb, ig]),
                        _fmt(L.ff[jb, ig]),
                        shots,
                    ]
                )
    if sidecar:
        sidecar_path(path).write_text(json.dumps(L.metadata(), indent=2) + "\n")


def _uniform_axis(values: np.ndarray, name: str) -> np.ndarray:
    if values.size < 2:
        raise GridError(f"{name} axis needs at least 2 distinct values")
    steps = np.diff(values)
    if np.max(np.abs(steps - steps.mean())) > 1e-9 * max(1.0, abs(steps.mean())):
        raise GridError(f"{name} values are not uniformly spaced")
    return values


def ingest_landscape(path: str | Path, condition: str | None = None, label: str | None = None) -> LandscapeGrid:
    """Read a landscape CSV, validating that it is a complete uniform grid.

    The condition comes from ``condition`` if given, else from the sidecar JSON
    if one exists, else ``external``. Without a sidecar the grid is
    reconstructed from the coordinate columns.
    """
    path = Path(path)
    rows: list[tuple[float, float, float, float, int | None]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CSV_HEADER:
            raise GridError(f"expected header {','.join(CSV_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise GridError(f"line {lineno}: expected 5 fields, got {len(row)}")
            try:
                g, b, e, f = (float(v) for v in row[:4])
                s = int(row[4]) if row[4].strip() else None
            except ValueError as exc:
                raise GridError(f"line {lineno}: {exc}") from None
            if not all(np.isfinite([g, b, e, f])):
                raise GridError(f"line {lineno}: non-finite value")
            rows.append((g, b, e, f, s))
    if not rows:
        raise GridError("no data rows")

    gammas = np.unique([r[0] for r in rows])
    betas = np.unique([r[1] for r in rows])
    if gammas.size != betas.size:
        raise GridError(f"grid is not square: {gammas.size} gamma x {betas.size} beta values")
    n = gammas.size
    if len(rows) != n * n:
        if len(rows) > n * n:
            raise GridError("duplicate coordinates")
        raise GridError(f"incomplete grid: {len(rows)} rows for a {n}x{n} grid")
    _uniform_axis(gammas, "gamma")
    _uniform_axis(betas, "beta")

    energies = np.full((n, n), np.nan)
    ff = np.full((n, n), np.nan)
    gi = {v: i for i, v in enumerate(gammas)}
    bi = {v: i for i, v in enumerate(betas)}
    for g, b, e, f, _ in rows:
        jb, ig = bi[b], gi[g]
        if not np.isnan(energies[jb, ig]):
            raise GridError(f"duplicate coordinates ({g}, {b})")
        energies[jb, ig] = e
        ff[jb, ig] = f
    if np.isnan(energies).any():
        raise GridError("duplicate coordinates")
    shot_values = {r[4] for r in rows}
    shots = shot_values.pop() if len(shot_values) == 1 else None

    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
    if "grid" in meta:
        grid = ParameterGrid.from_dict(meta["grid"])
        if grid.points_per_axis != n or not (
            np.allclose(grid.gamma_values, gammas, rtol=0, atol=GRID_ATOL)
            and np.allclose(grid.beta_values, betas, rtol=0, atol=GRID_ATOL)
        ):
            raise GridError("CSV coordinates disagree with sidecar grid")
    else:
        ghw = (gammas[-1] - gammas[0]) / 2
        bhw = (betas[-1] - betas[0]) / 2
        grid = ParameterGrid(
            (gammas[0] + gammas[-1]) / 2,
            (betas[0] + betas[-1]) / 2,
            bhw,
            n,
            None if np.isclose(ghw, bhw, rtol=0, atol=GRID_ATOL) else ghw,
        )
    return LandscapeGrid(
        grid,
        energies,
        ff,
        condition or meta.get("condition", "external"),
        meta.get("label", path.stem) if label is None else label,
        shots,
        meta.get("n"),
        meta.get("k"),
    )


def export_heatmap(values: np.ndarray, grid: ParameterGrid, path: str | Path) -> None:
    """Matrix CSV: header row of gamma values, first column beta."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["beta\\gamma"] + [_fmt(g) for g in grid.gamma_values])
        for jb, b in enumerate(grid.beta_values):
            w.writerow([_fmt(b)] + [_fmt(v) for v in values[jb]])
