"""Command-line entry point: ``qaoa-lsc <command> [options]``.

Commands: generate, solve-classical, optimize, scan, metrics, zne, pipeline,
ingest. Global flags (--seed, --out-dir, --config) may go before or after
the command.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from math import comb
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .engine import build_schedule, cost_diagonal
from .landscape import (
    ParameterGrid,
    export_heatmap,
    export_landscape,
    ingest_landscape,
    make_grid,
    scan_landscape,
)
from .metrics import build_report
from .noise import NoiseSpec
from .optimize import DEFAULT_BOX, DEFAULT_STARTS, OptimizationResult, optimize_parameters
from .qubo import (
    PortfolioInstance,
    brute_force_optimum,
    build_qubo,
    format_bitstring,
    generate_instance,
    qubo_to_ising,
    random_search,
    simulated_annealing,
)
from .zne import DEFAULT_FACTORS, run_zne, zne_from_energies

log = logging.getLogger("qaoa_lsc")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


@dataclass
class RunConfig:
    """Everything that determines a pipeline bundle.

    ``out_dir`` and ``workers`` are execution settings: they are not persisted
    into the bundle, since neither changes any result.
    """

    instance: dict = field(default_factory=lambda: {"n": 6, "k": 3, "volatility": "low", "seed": 1})
    instance_path: str | None = None
    noise: dict | None = None
    noise_path: str | None = None
    half_width: float = 0.4
    points_per_axis: int = 13
    shots: int | None = None
    seed: int = 0
    starts: int = DEFAULT_STARTS
    box: list[list[float]] = field(default_factory=lambda: [list(b) for b in DEFAULT_BOX])
    external: str | None = None
    zne: bool = True
    zne_factors: list[float] = field(default_factory=lambda: list(DEFAULT_FACTORS))
    zne_shots: int | None = None
    out_dir: str = "run"
    workers: int = 1

    RUNTIME_ONLY = ("out_dir", "workers")

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in self.RUNTIME_ONLY:
            d.pop(key)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown RunConfig fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def load_instance(self) -> PortfolioInstance:
        if self.instance_path:
            return PortfolioInstance.load(self.instance_path)
        return generate_instance(**self.instance)

    def load_noise(self) -> NoiseSpec:
        if self.noise_path:
            return NoiseSpec.load(self.noise_path)
        if self.noise is not None:
            return NoiseSpec.from_dict(self.noise)
        return NoiseSpec.calibration_like()


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage name
        raise StageError(name, exc) from exc


def _parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _load_instance_arg(args) -> PortfolioInstance:
    if args.instance:
        return PortfolioInstance.load(args.instance)
    return generate_instance(args.n, args.k, args.volatility, args.seed)


def _center(args) -> tuple[float, float]:
    if args.optimum:
        opt = OptimizationResult.load(args.optimum)
        return opt.gamma_star, opt.beta_star
    if args.gamma is None or args.beta is None:
        raise SystemExit("error: give --optimum or both --gamma and --beta")
    return args.gamma, args.beta


# -- commands ----------------------------------------------------------------


def cmd_generate(args) -> int:
    inst = generate_instance(args.n, args.k, args.volatility, args.seed, args.risk_aversion, args.label)
    out = Path(args.output) if args.output else Path(args.out_dir) / "instance.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    inst.save(out)
    print(f"instance  {inst.label}")
    print(f"n={inst.n} k={inst.k} penalty={inst.penalty:.6g} risk_aversion={inst.risk_aversion}")
    print(
        f"feasible set: {comb(inst.n, inst.k)} of {2**inst.n} bitstrings "
        f"({100 * inst.feasible_fraction:.2f}% random baseline)"
    )
    print(f"wrote {out}")
    return 0


def cmd_solve_classical(args) -> int:
    inst = _load_instance_arg(args)
    Q = build_qubo(inst)
    x_bf, e_bf = brute_force_optimum(Q)
    x_sa, e_sa = simulated_annealing(Q, args.sweeps, args.seed)
    x_rs, e_rs = random_search(Q, args.samples, args.seed)
    result = {
        "brute_force": {"x": format_bitstring(x_bf), "energy": e_bf},
        "simulated_annealing": {"x": format_bitstring(x_sa), "energy": e_sa, "ar": e_sa / e_bf if e_bf else None},
        "random_search": {"x": format_bitstring(x_rs), "energy": e_rs, "ar": e_rs / e_bf if e_bf else None},
    }
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "classical.json", result)
    for name, r in result.items():
        print(f"{name:<20} {r['x']}  E={r['energy']:.10g}")
    return 0


def cmd_optimize(args) -> int:
    inst = _load_instance_arg(args)
    H = qubo_to_ising(build_qubo(inst))
    box = ((args.gamma_lo, args.gamma_hi), (args.beta_lo, args.beta_hi))
    res = optimize_parameters(H, args.starts, args.seed, box)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res.save(out / "optimum.json")
    print(f"gamma*={res.gamma_star:.6f} beta*={res.beta_star:.6f} E={res.energy:.10g}")
    return 0


def cmd_scan(args) -> int:
    inst = _load_instance_arg(args)
    H = qubo_to_ising(build_qubo(inst))
    grid = make_grid(_center(args), args.half_width, args.points)
    noise = NoiseSpec.load(args.noise) if args.noise else None
    L = scan_landscape(grid, H, inst.k, noise, args.shots, args.seed, inst.label, args.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = Path(args.output) if args.output else out / f"landscape_{L.condition}.csv"
    export_landscape(L, path)
    print(f"{L.condition} scan: span={L.energies.max() - L.energies.min():.6g} -> {path}")
    return 0


def cmd_metrics(args) -> int:
    L0 = ingest_landscape(args.ideal, condition="ideal")
    Ln = ingest_landscape(args.noisy, condition="noisy")
    Le = ingest_landscape(args.external, condition="external") if args.external else None
    e_star = None
    if args.instance:
        e_star = brute_force_optimum(build_qubo(PortfolioInstance.load(args.instance)))[1]
    point = None
    if args.optimum:
        opt = OptimizationResult.load(args.optimum)
        point = (opt.gamma_star, opt.beta_star)
    report = build_report(L0, Ln, Le, e_star, point)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.save(out / "metrics.json")
    table = report.table(L0.label or "instance")
    (out / "table.txt").write_text(table)
    print(table, end="")
    return 0


def cmd_zne(args) -> int:
    factors = _parse_floats(args.factors)
    if args.energies:
        # test hook: extrapolate injected energies without simulating
        energies = _parse_floats(args.energies)
        stds = _parse_floats(args.stds) if args.stds else None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = zne_from_energies(factors, energies, stds, args.ideal)
    else:
        inst = _load_instance_arg(args)
        H = qubo_to_ising(build_qubo(inst))
        noise = NoiseSpec.load(args.noise) if args.noise else NoiseSpec.calibration_like()
        gamma, beta = _center(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = run_zne(gamma, beta, build_schedule(H), cost_diagonal(H), noise, factors, args.shots, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.save(out / "zne.json")
    imp = "n/a" if result.improvement_pct is None else f"{result.improvement_pct:+.2f}%"
    print(f"extrapolated={result.extrapolated:.10g} improvement={imp} monotone={result.monotone}")
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_ingest(args) -> int:
    L = ingest_landscape(args.input, condition=args.condition)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"landscape_{L.condition}.csv"
    export_landscape(L, path)
    n = L.grid.points_per_axis
    print(
        f"ingested {n}x{n} {L.condition} grid centered at "
        f"({L.grid.gamma_center:.6g}, {L.grid.beta_center:.6g}); "
        f"span={L.energies.max() - L.energies.min():.6g} -> {path}"
    )
    return 0


def run_pipeline(cfg: RunConfig) -> Path:
    """Optimize, scan ideal and noisy, optionally ingest an external grid, report, ZNE."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    inst = _stage("instance", cfg.load_instance)
    noise = _stage("noise", cfg.load_noise)
    Q = build_qubo(inst)
    H = qubo_to_ising(Q)
    _, e_star = _stage("solve-classical", brute_force_optimum, Q)

    box = tuple(tuple(b) for b in cfg.box)
    opt = _stage("optimize", optimize_parameters, H, cfg.starts, cfg.seed, box)
    grid = make_grid((opt.gamma_star, opt.beta_star), cfg.half_width, cfg.points_per_axis)
    L0 = _stage("scan-ideal", scan_landscape, grid, H, inst.k, None, cfg.shots, cfg.seed, inst.label, cfg.workers)
    Ln = _stage(
        "scan-noisy", scan_landscape, grid, H, inst.k, noise, cfg.shots, cfg.seed + 1, inst.label, cfg.workers
    )
    Le = None
    if cfg.external:
        Le = _stage("ingest", ingest_landscape, cfg.external, "external")
        if not Le.grid.matches(grid):
            raise StageError("ingest", ValueError("external grid does not match the scan grid"))

    report = _stage("metrics", build_report, L0, Ln, Le, e_star, (opt.gamma_star, opt.beta_star))

    _write_json(out / "run_config.json", cfg.to_dict())
    inst.save(out / "instance.json")
    noise.save(out / "noise.json")
    opt.save(out / "optimum.json")
    for L in (L0, Ln, Le):
        if L is None:
            continue
        export_landscape(L, out / f"landscape_{L.condition}.csv")
        export_heatmap(L.energies, L.grid, out / f"heatmap_energy_{L.condition}.csv")
        export_heatmap(L.ff, L.grid, out / f"heatmap_ff_{L.condition}.csv")
    report.save(out / "metrics.json")
    (out / "table.txt").write_text(report.table(inst.label))

    if cfg.zne:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            zres = _stage(
                "zne",
                run_zne,
                opt.gamma_star,
                opt.beta_star,
                build_schedule(H),
                cost_diagonal(H),
                noise,
                cfg.zne_factors,
                cfg.zne_shots,
                cfg.seed + 2,
            )
        zres.save(out / "zne.json")
    return out


def cmd_pipeline(args) -> int:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {
        "out_dir": args.out_dir,
        "seed": args.seed,
        "external": args.external,
        "shots": args.shots,
        "workers": args.workers,
        "instance_path": args.instance,
        "noise_path": args.noise,
        "starts": args.starts,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if args.no_zne:
        cfg.zne = False
    out = run_pipeline(cfg)
    print((out / "table.txt").read_text(), end="")
    report = json.loads((out / "metrics.json").read_text())
    print(f"OPS(noisy)={report['ops_noisy']:.4g}  r(noisy,ideal)={report['pearson']['noisy_vs_ideal']:.4f}")
    if cfg.zne:
        z = json.loads((out / "zne.json").read_text())
        if not z["monotone"]:
            print("warning: ZNE energies are not monotone in the noise factor", file=sys.stderr)
    print(f"bundle written to {out}")
    return 0


# -- parser ------------------------------------------------------------------


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", help="instance JSON (otherwise generated from --n/--k/--volatility)")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--volatility", choices=("low", "high"), default="low")


def _add_point_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--optimum", help="optimum.json from the optimize command")
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qaoa-lsc", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    parser.add_argument("--out-dir", default=None, help="output directory (default: run)")
    parser.add_argument("--config", default=None, help="RunConfig JSON")
    parser.add_argument("-v", "--verbose", action="store_true")
    # the global flags are also accepted after the command name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out-dir", default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_parser = sub.add_parser

    def add_parser(name, **kw):
        return _add_parser(name, parents=[common], **kw)

    sub.add_parser = add_parser

    p = sub.add_parser("generate", help="write a seeded instance JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--volatility", choices=("low", "high"), default="low")
    p.add_argument("--risk-aversion", type=float, default=0.5)
    p.add_argument("--label")
    p.add_argument("--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve-classical", help="brute force, simulated annealing, random search")
    _add_instance_args(p)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_solve_classical)

    p = sub.add_parser("optimize", help="multi-start search for (gamma*, beta*)")
    _add_instance_args(p)
    p.add_argument("--starts", type=int, default=DEFAULT_STARTS)
    p.add_argument("--gamma-lo", type=float, default=DEFAULT_BOX[0][0])
    p.add_argument("--gamma-hi", type=float, default=DEFAULT_BOX[0][1])
    p.add_argument("--beta-lo", type=float, default=DEFAULT_BOX[1][0])
    p.add_argument("--beta-hi", type=float, default=DEFAULT_BOX[1][1])
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("scan", help="scan a landscape grid (ideal, or noisy with --noise)")
    _add_instance_args(p)
    _add_point_args(p)
    p.add_argument("--noise", help="NoiseSpec JSON; omit for the ideal landscape")
    p.add_argument("--half-width", type=float, default=0.4)
    p.add_argument("--points", type=int, default=13)
    p.add_argument("--shots", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("metrics", help="metrics report from landscape CSVs")
    p.add_argument("--ideal", required=True)
    p.add_argument("--noisy", required=True)
    p.add_argument("--external")
    p.add_argument("--instance", help="instance JSON, used for E*")
    p.add_argument("--optimum")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("zne", help="zero-noise extrapolation at (gamma*, beta*)")
    _add_instance_args(p)
    _add_point_args(p)
    p.add_argument("--noise")
    p.add_argument("--factors", default=",".join(str(int(f)) for f in DEFAULT_FACTORS))
    p.add_argument("--shots", type=int)
    p.add_argument("--energies", help=argparse.SUPPRESS)
    p.add_argument("--stds", help=argparse.SUPPRESS)
    p.add_argument("--ideal", type=float, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_zne)

    p = sub.add_parser("pipeline", help="full protocol, writes a report bundle")
    p.add_argument("--instance")
    p.add_argument("--noise")
    p.add_argument("--external", help="externally measured landscape CSV")
    p.add_argument("--shots", type=int)
    p.add_argument("--starts", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-zne", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("ingest", help="validate an external landscape CSV and copy it into the run")
    p.add_argument("input")
    p.add_argument("--condition", default="external", choices=("ideal", "noisy", "external"))
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command != "pipeline":
        cfg = RunConfig.load(args.config) if args.config else None
        if args.seed is None:
            args.seed = cfg.seed if cfg else 0
        if args.out_dir is None:
            args.out_dir = cfg.out_dir if cfg else "run"
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
