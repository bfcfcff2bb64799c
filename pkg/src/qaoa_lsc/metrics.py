"""Landscape distortion metrics: span, span compression, AR, FF, Pearson r, OPS."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .landscape import GridError, LandscapeGrid


class MetricError(ValueError):
    pass


class OffsetError(MetricError):
    """Approximation ratio undefined because the reference optimum is not negative."""


def _check_grids(*landscapes: LandscapeGrid) -> None:
    first = landscapes[0].grid
    for L in landscapes[1:]:
        if not first.matches(L.grid):
            raise GridError("landscapes must share an identical parameter grid")


def landscape_span(L: LandscapeGrid) -> float:
    e = L.energies
    if e.size == 0:
        raise MetricError("empty landscape")
    return float(e.max() - e.min())


def span_compression(span_eps: float, span_0: float) -> float:
    """``1 - span_eps/span_0``; negative values are returned as is."""
    if not span_0 > 0:
        raise MetricError("reference landscape has zero span")
    return 1.0 - span_eps / span_0


def lsc(L_eps: LandscapeGrid, L_0: LandscapeGrid) -> float:
    _check_grids(L_eps, L_0)
    return span_compression(landscape_span(L_eps), landscape_span(L_0))


def decompose_spans(span_0: float, span_n: float, span_hw: float) -> tuple[float, float, float]:
    """``(lsc_noisy, lsc_hw, lsc_hw_given_noisy)`` from three spans.

    ``(1 - lsc_hw) == (1 - lsc_noisy) * (1 - lsc_hw_given_noisy)`` by construction.
    """
    lsc_n = span_compression(span_n, span_0)
    lsc_hw = span_compression(span_hw, span_0)
    lsc_hw_n = span_compression(span_hw, span_n)
    return lsc_n, lsc_hw, lsc_hw_n


def lsc_decompose(
    L_0: LandscapeGrid, L_n: LandscapeGrid, L_hw: LandscapeGrid
) -> tuple[float, float, float]:
    _check_grids(L_0, L_n, L_hw)
    return decompose_spans(landscape_span(L_0), landscape_span(L_n), landscape_span(L_hw))


def approximation_ratio(e_scan_min: float, e_star: float) -> float:
    if e_star == 0 or e_star > 0:
        raise OffsetError(
            f"E*={e_star} is not negative; shift energies by a constant so the optimum "
            "is negative before forming the ratio"
        )
    return e_scan_min / e_star


def pearson_fidelity(L_a: LandscapeGrid, L_b: LandscapeGrid) -> float:
    _check_grids(L_a, L_b)
    a = L_a.energies.ravel() - L_a.energies.mean()
    b = L_b.energies.ravel() - L_b.energies.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise MetricError("correlation undefined for a constant landscape")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def grid_argmin(L: LandscapeGrid) -> tuple[int, int]:
    """``(row, col)`` of the minimum energy; ties go to the lowest row, then column."""
    flat = int(np.argmin(L.energies))
    return divmod(flat, L.grid.points_per_axis)


def optimal_parameter_shift(L_a: LandscapeGrid, L_b: LandscapeGrid) -> float:
    _check_grids(L_a, L_b)
    ga, ba = L_a.grid.coords(np.ravel_multi_index(grid_argmin(L_a), L_a.grid.shape))
    gb, bb = L_b.grid.coords(np.ravel_multi_index(grid_argmin(L_b), L_b.grid.shape))
    return float(math.hypot(ga - gb, ba - bb))


@dataclass
class MetricsReport:
    ls: dict[str, float]
    lsc_noisy: float
    lsc_hw: float | None = None
    lsc_hw_given_noisy: float | None = None
    ar: dict[str, float | None] = field(default_factory=dict)
    ff_at_optimum: dict[str, float] = field(default_factory=dict)
    pearson: dict[str, float | None] = field(default_factory=dict)
    ops_noisy: float = 0.0
    ops_external: float | None = None
    explained_fraction: float | None = None
    e_star: float | None = None
    negative_lsc: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    def table(self, label: str = "instance") -> str:
        """Plain-text span table: LS_0, LS_n, LS_hw, LSC_n, LSC_hw."""

        def cell(v: float | None, fmt: str) -> str:
            width = int(fmt.split(".")[0])
            return "-".rjust(width) if v is None else format(v, fmt)

        head = f"{'Instance':<20} {'LS_0':>10} {'LS_n':>10} {'LS_hw':>10} {'LSC_n':>8} {'LSC_hw':>8}"
        row = (
            f"{label:<20} {cell(self.ls.get('ideal'), '10.2f')} {cell(self.ls.get('noisy'), '10.2f')} "
            f"{cell(self.ls.get('external'), '10.2f')} {cell(self.lsc_noisy, '8.3f')} {cell(self.lsc_hw, '8.3f')}"
        )
        return head + "\n" + row + "\n"


def build_report(
    L_0: LandscapeGrid,
    L_n: LandscapeGrid,
    L_ext: LandscapeGrid | None = None,
    e_star: float | None = None,
    optimum_point: tuple[float, float] | None = None,
) -> MetricsReport:
    """Every metric for an ideal/noisy pair and an optional external landscape.

    FF at the optimum is read from the grid cell nearest ``optimum_point``
    (grid center when omitted); it is not re-simulated.
    """
    landscapes = {"ideal": L_0, "noisy": L_n}
    if L_ext is not None:
        landscapes["external"] = L_ext
    _check_grids(*landscapes.values())

    ls = {c: landscape_span(L) for c, L in landscapes.items()}
    report = MetricsReport(ls=ls, lsc_noisy=span_compression(ls["noisy"], ls["ideal"]), e_star=e_star)
    report.pearson["noisy_vs_ideal"] = _safe_pearson(L_n, L_0, report)
    report.ops_noisy = optimal_parameter_shift(L_n, L_0)

    if L_ext is not None:
        report.lsc_hw = span_compression(ls["external"], ls["ideal"])
        if ls["noisy"] > 0:
            report.lsc_hw_given_noisy = span_compression(ls["external"], ls["noisy"])
        else:
            report.notes.append("noisy span is zero; lsc_hw_given_noisy undefined")
        report.pearson["external_vs_ideal"] = _safe_pearson(L_ext, L_0, report)
        report.pearson["external_vs_noisy"] = _safe_pearson(L_ext, L_n, report)
        report.ops_external = optimal_parameter_shift(L_ext, L_0)
        if report.lsc_hw != 0:
            report.explained_fraction = report.lsc_noisy / report.lsc_hw

    lscs = [v for v in (report.lsc_noisy, report.lsc_hw) if v is not None]
    if any(v < 0 for v in lscs):
        report.negative_lsc = True
        report.notes.append("negative LSC: a landscape span exceeds the ideal span")

    if optimum_point is None:
        optimum_point = (L_0.grid.gamma_center, L_0.grid.beta_center)
    cell = L_0.grid.nearest_index(*optimum_point)
    for c, L in landscapes.items():
        report.ff_at_optimum[c] = float(L.ff[cell])
        if e_star is not None:
            if L.energies.min() >= 0 > e_star:
                report.notes.append(
                    f"{c} scan minimum is non-negative (penalty mass from infeasible outcomes); "
                    "its AR is not a meaningful quality ratio"
                )
            try:
                report.ar[c] = approximation_ratio(float(L.energies.min()), e_star)
            except OffsetError as exc:
                report.ar[c] = None
                if str(exc) not in report.notes:
                    report.notes.append(str(exc))
    return report


def _safe_pearson(a: LandscapeGrid, b: LandscapeGrid, report: MetricsReport) -> float | None:
    try:
        return pearson_fidelity(a, b)
    except MetricError as exc:
        report.notes.append(f"pearson {a.condition} vs {b.condition}: {exc}")
        return None
