"""Command-line front end: calculators, integral checks, simulation harness."""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import experiments, theory
from .geometry import parse_region_spec

__all__ = ["main", "build_parser"]


def _int_arg(text: str) -> int:
    """Integer flag that also accepts scientific notation like 1e8."""
    try:
        return int(text)
    except ValueError:
        return int(float(text))


def _sig(value: float) -> str:
    return f"{value:.12g}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rggcrit",
        description="Critical transmission radii of random geometric graphs "
                    "over 3D convex regions",
    )
    sub = p.add_subparsers(dest="command", required=True)

    xi = sub.add_parser("xi", help="solve for the tail offset xi")
    xi.add_argument("--dim", type=int, choices=(2, 3), required=True)
    xi.add_argument("--k", type=_int_arg, required=True)
    xi.add_argument("--c", type=float, required=True)
    xi.add_argument("--area", type=float, help="boundary surface area (3D)")
    xi.add_argument("--perimeter", type=float, help="boundary length (2D)")

    rad = sub.add_parser("radius", help="evaluate the critical-radius formula")
    rad.add_argument("--dim", type=int, choices=(2, 3), required=True)
    rad.add_argument("--n", type=_int_arg, required=True)
    rad.add_argument("--k", type=_int_arg, required=True)
    rad.add_argument("--xi", type=float)
    rad.add_argument("--c", type=float)

    integ = sub.add_parser("integral", help="numerical integral checks")
    integ.add_argument("--region", default="cube")
    integ.add_argument("--n", type=_int_arg, required=True)
    integ.add_argument("--k", type=_int_arg, required=True)
    integ.add_argument("--c", type=float, required=True)
    integ.add_argument("--estimator", choices=("layer", "mc", "1d"), default="layer")
    integ.add_argument("--mc-samples", type=_int_arg, default=1_000_000)
    integ.add_argument("--seed", type=_int_arg, default=0)

    sim = sub.add_parser("simulate", help="run the Monte Carlo experiment")
    sim.add_argument("--config", help="key=value config file; flags override")
    sim.add_argument("--region")
    sim.add_argument("--n", type=_int_arg)
    sim.add_argument("--k", type=_int_arg)
    sim.add_argument("--c", type=float)
    sim.add_argument("--process", choices=("binomial", "poisson"))
    sim.add_argument("--trials", type=_int_arg)
    sim.add_argument("--seed", type=_int_arg)
    sim.add_argument("--workers", type=_int_arg)
    sim.add_argument("--out")

    ana = sub.add_parser("analyze", help="recompute aggregates from a results CSV")
    ana.add_argument("path")
    return p


def _cmd_xi(args) -> int:
    if args.dim == 3:
        if args.area is None:
            raise ValueError("--area is required for --dim 3")
        if args.k < 1:
            raise ValueError("k >= 1 required in 3D")
        value = theory.solve_xi_3d(args.c, args.k, args.area)
    else:
        if args.perimeter is None:
            raise ValueError("--perimeter is required for --dim 2")
        value = theory.solve_xi_2d(args.c, args.k, args.perimeter)
    print(_sig(value))
    return 0


def _cmd_radius(args) -> int:
    if args.dim == 3:
        if args.xi is None:
            if args.c is None:
                raise ValueError("--dim 3 needs --xi (or --c with --area via 'xi')")
            raise ValueError("--dim 3 needs --xi; compute it first with the xi command")
        value = theory.radius_3d(args.n, args.k, args.xi)
    else:
        value = theory.radius_2d(args.n, args.k, xi=args.xi, c=args.c)
    print(_sig(value))
    return 0


def _cmd_integral(args) -> int:
    target = math.exp(-args.c)
    if args.estimator == "1d":
        region = parse_region_spec(args.region)
        xi = theory.solve_xi_3d(args.c, args.k, region.surface_area)
        report = theory.boundary_layer_integral(args.n, args.k, xi)
        asym = theory.boundary_layer_asymptote(args.k, xi)
        print(f"value={_sig(report.value)} error={_sig(report.error)} "
              f"nodes={report.nodes}")
        print(f"asymptote={_sig(asym)} ratio={_sig(report.value / asym)}")
        print(f"area*value={_sig(region.surface_area * report.value)} "
              f"target={_sig(target)}")
        return 0
    region = parse_region_spec(args.region)
    params = theory.theory_params(args.n, args.k, args.c, region.surface_area)
    kind = "layered" if args.estimator == "layer" else "mc"
    report = theory.psi_integral_over_region(
        region, params, estimator=kind, mc_samples=args.mc_samples, seed=args.seed
    )
    print(f"value={_sig(report.value)} error={_sig(report.error)} "
          f"estimator={report.estimator} nodes={report.nodes}")
    print(f"target={_sig(target)} abs_gap={_sig(abs(report.value - target))}")
    return 0


_SIM_KEYS = ("region", "n", "k", "c", "process", "trials", "seed", "workers", "out")


def _load_config_file(path: str) -> dict:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in _SIM_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = val
    return values


def _cmd_simulate(args) -> int:
    raw = _load_config_file(args.config) if args.config else {}
    conv = {"region": str, "n": _int_arg, "k": _int_arg, "c": float,
            "process": str, "trials": _int_arg, "seed": _int_arg,
            "workers": _int_arg, "out": str}
    merged = {k: conv[k](v) for k, v in raw.items()}
    for key in _SIM_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    merged.setdefault("region", "cube")
    merged.setdefault("process", "binomial")
    merged.setdefault("trials", 100)
    merged.setdefault("seed", 0)
    merged.setdefault("workers", _int_arg(os.environ.get("RGG_WORKERS", "1")))
    for key in ("n", "k", "c"):
        if key not in merged:
            raise ValueError(f"missing required setting --{key}")
    config = experiments.ExperimentConfig(
        region=merged["region"], n=merged["n"], k=merged["k"], c=merged["c"],
        process=merged["process"], trials=merged["trials"],
        master_seed=merged["seed"], workers=merged["workers"],
        output=merged.get("out"),
    )
    result = experiments.run_experiment(config)
    print(f"trials={config.trials} p_hat_delta={_sig(result.p_hat_delta)} "
          f"p_hat_kappa={_sig(result.p_hat_kappa)} "
          f"equality_rate={_sig(result.equality_rate)} "
          f"theory_limit={_sig(result.theory_limit)}")
    return 0


def _cmd_analyze(args) -> int:
    records = experiments.read_csv(args.path)
    violations = []
    for rec in records:
        if rec.rho_delta is not None and rec.rho_kappa is not None:
            if rec.rho_kappa < rec.rho_delta:
                violations.append(f"trial {rec.trial}: rho_kappa < rho_delta")
        if rec.below_kappa and not rec.below_delta:
            violations.append(f"trial {rec.trial}: below_kappa without below_delta")
    t = len(records)
    p_d = sum(r.below_delta for r in records) / t
    p_k = sum(r.below_kappa for r in records) / t
    eq = sum(r.equal for r in records) / t
    print(f"trials={t} p_hat_delta={_sig(p_d)} p_hat_kappa={_sig(p_k)} "
          f"equality_rate={_sig(eq)}")
    if violations:
        for v in violations:
            print(f"invariant violation: {v}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"xi": _cmd_xi, "radius": _cmd_radius, "integral": _cmd_integral,
                "simulate": _cmd_simulate, "analyze": _cmd_analyze}
    try:
        return handlers[args.command](args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
