"""Monte Carlo harness for the critical-radius limit law.

Each trial derives its own random stream from (master_seed, trial index), so
results are byte-identical for a fixed seed no matter how many workers run
the trials.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import ConvexRegion, parse_region_spec, sample_uniform
from .graphs import critical_radius_k_connectivity, critical_radius_min_degree
from .spatial import PointSample
from .theory import limit_probability, radius_3d, solve_xi_3d

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "ExperimentResult",
    "CSV_HEADER",
    "sample_binomial_process",
    "sample_poisson_process",
    "run_trial",
    "run_experiment",
    "empirical_cdf_at",
    "equality_rate",
    "write_csv",
    "read_csv",
    "write_summary",
    "summary_dict",
]

CSV_HEADER = "trial,count,rho_delta,rho_kappa,r_n,below_delta,below_kappa,equal"


@dataclass(frozen=True)
class ExperimentConfig:
    region: str
    n: int
    k: int
    c: float
    process: str = "binomial"  # "binomial" | "poisson"
    trials: int = 100
    master_seed: int = 0
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n < self.k + 2:
            raise ValueError("need n >= k + 2")
        if self.process not in ("binomial", "poisson"):
            raise ValueError(f"unknown process {self.process!r}")


@dataclass
class TrialRecord:
    trial: int
    count: int
    rho_delta: float | None
    rho_kappa: float | None
    r_n: float
    below_delta: bool
    below_kappa: bool
    equal: bool


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    p_hat_delta: float
    p_hat_kappa: float
    se_delta: float
    se_kappa: float
    equality_rate: float
    theory_limit: float


def sample_binomial_process(region: ConvexRegion, n: int,
                            rng: np.random.Generator) -> PointSample:
    """Exactly n i.i.d. uniform points."""
    if n < 0:
        raise ValueError("point count must be nonnegative")
    pts = sample_uniform(region, rng, size=n) if n else np.empty((0, 3))
    return PointSample(points=pts, region=region, kind="binomial", n_param=n)


def sample_poisson_process(region: ConvexRegion, intensity: float,
                           rng: np.random.Generator) -> PointSample:
    """Poisson(intensity * |region|) many i.i.d. uniform points; the region
    has unit volume, so the mean count is the intensity itself."""
    if intensity <= 0:
        raise ValueError("intensity must be positive")
    count = int(rng.poisson(intensity * 1.0))
    pts = sample_uniform(region, rng, size=count) if count else np.empty((0, 3))
    return PointSample(points=pts, region=region, kind="poisson",
                       n_param=int(intensity))


_REGION_CACHE: dict[str, ConvexRegion] = {}


def _region_for(spec: str) -> ConvexRegion:
    if spec not in _REGION_CACHE:
        _REGION_CACHE[spec] = parse_region_spec(spec)
    return _REGION_CACHE[spec]


def _trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    )


def run_trial(config: ExperimentConfig, trial: int,
              region: ConvexRegion | None = None,
              r_n: float | None = None) -> TrialRecord:
    """One trial: sample, compute both critical radii, compare with r_n."""
    if region is None:
        region = _region_for(config.region)
    if r_n is None:
        xi = solve_xi_3d(config.c, config.k, region.surface_area)
        r_n = radius_3d(config.n, config.k, xi)
    rng = _trial_rng(config.master_seed, trial)
    if config.process == "binomial":
        sample = sample_binomial_process(region, config.n, rng)
    else:
        sample = sample_poisson_process(region, config.n, rng)
    level = config.k + 1
    if sample.count < level + 1:
        # too few points for the graph property at any radius; counted as
        # an exceedance of r_n
        return TrialRecord(trial=trial, count=sample.count, rho_delta=None,
                           rho_kappa=None, r_n=r_n, below_delta=False,
                           below_kappa=False, equal=False)
    rho_delta = critical_radius_min_degree(sample, level)
    rho_kappa = critical_radius_k_connectivity(sample, level)
    return TrialRecord(
        trial=trial,
        count=sample.count,
        rho_delta=rho_delta,
        rho_kappa=rho_kappa,
        r_n=r_n,
        below_delta=rho_delta <= r_n,
        below_kappa=rho_kappa <= r_n,
        equal=rho_delta == rho_kappa,
    )


def _trial_worker(args) -> TrialRecord:
    config, trial = args
    return run_trial(config, trial)


def _aggregate(config: ExperimentConfig, records: list) -> ExperimentResult:
    t = len(records)
    p_d = sum(r.below_delta for r in records) / t
    p_k = sum(r.below_kappa for r in records) / t
    eq = sum(r.equal for r in records) / t
    return ExperimentResult(
        config=config,
        records=records,
        p_hat_delta=p_d,
        p_hat_kappa=p_k,
        se_delta=math.sqrt(p_d * (1.0 - p_d) / t),
        se_kappa=math.sqrt(p_k * (1.0 - p_k) / t),
        equality_rate=eq,
        theory_limit=limit_probability(config.c),
    )


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run all trials (optionally in parallel) and aggregate.

    The result is a deterministic function of the config alone; workers only
    change wall-clock time.
    """
    region = _region_for(config.region)
    xi = solve_xi_3d(config.c, config.k, region.surface_area)
    r_n = radius_3d(config.n, config.k, xi)
    indices = range(config.trials)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_trial_worker,
                                    ((config, i) for i in indices),
                                    chunksize=max(1, config.trials // (8 * config.workers))))
    else:
        records = [run_trial(config, i, region, r_n) for i in indices]
    records.sort(key=lambda rec: rec.trial)
    result = _aggregate(config, records)
    if config.output:
        write_csv(result, config.output)
        write_summary(result, _summary_path(config.output))
    return result


def empirical_cdf_at(records: list, radius_field: str, r: float) -> float:
    """Fraction of trials whose chosen critical radius is <= r; undefined
    radii count as exceedances."""
    if not records:
        raise ValueError("no records")
    if radius_field not in ("rho_delta", "rho_kappa"):
        raise ValueError(f"unknown radius field {radius_field!r}")
    vals = [getattr(rec, radius_field) for rec in records]
    return sum(1 for v in vals if v is not None and v <= r) / len(vals)


def equality_rate(records: list) -> float:
    """Fraction of trials where the two critical radii are exactly equal."""
    if not records:
        raise ValueError("no records")
    return sum(rec.equal for rec in records) / len(records)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(result: ExperimentResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in result.records:
            fh.write(",".join(_fmt(v) for v in (
                rec.trial, rec.count, rec.rho_delta, rec.rho_kappa,
                rec.r_n, rec.below_delta, rec.below_kappa, rec.equal)) + "\n")


def read_csv(path: str) -> list:
    """Parse a results CSV back into trial records, validating the schema."""
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != CSV_HEADER:
            raise ValueError(f"bad or missing CSV header in {path}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 8:
                raise ValueError(f"{path}:{lineno}: expected 8 fields, got {len(row)}")
            try:
                records.append(TrialRecord(
                    trial=int(row[0]),
                    count=int(row[1]),
                    rho_delta=float(row[2]) if row[2] else None,
                    rho_kappa=float(row[3]) if row[3] else None,
                    r_n=float(row[4]),
                    below_delta=bool(int(row[5])),
                    below_kappa=bool(int(row[6])),
                    equal=bool(int(row[7])),
                ))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not records:
        raise ValueError(f"{path}: no trial rows")
    return records


def _summary_path(csv_path: str) -> str:
    base, ext = os.path.splitext(csv_path)
    return base + ".json"


def summary_dict(result: ExperimentResult) -> dict:
    # the echo omits execution-only settings (workers, output) so summaries
    # are byte-identical across worker counts and output paths
    config = asdict(result.config)
    config.pop("workers")
    config.pop("output")
    return {
        "config": config,
        "p_hat_delta": result.p_hat_delta,
        "p_hat_kappa": result.p_hat_kappa,
        "se_delta": result.se_delta,
        "se_kappa": result.se_kappa,
        "equality_rate": result.equality_rate,
        "theory_limit": result.theory_limit,
    }


def write_summary(result: ExperimentResult, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_dict(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
