"""Experiment drivers: the geographic Monte Carlo study, telescope siting and
constellation design, plus CSV export of fronts and convergence traces."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import DATA_DIR, io, orbit
from .engine import GAConfig, Individual, Problem, RunResult, dominates, run
from .errors import ConfigurationError
from .lattice import MutationPool
from .problems import (
    AstroProblem,
    GeoTargetProblem,
    OrbitProblem,
    land_pool,
    orbit_feasible,
    orbit_pool,
    sample_land_point,
)

log = logging.getLogger(__name__)

PROBLEMS = ("geo_mc", "astro", "orbit")
TRACE_HEADER = ("generation", "p5", "p50", "p95")
_POOL_TAG = 0x9E3779B9  # substream tag for pool generation, distinct from optimum indices


@dataclass(frozen=True)
class RunConfig:
    problem: str = "geo_mc"
    ga: GAConfig = field(default_factory=GAConfig)
    seed: int = 0
    out_dir: str = "results"
    mask_path: str = str(DATA_DIR / "synthetic_land.txt")
    luminance_path: str = str(DATA_DIR / "luminance.csv")
    cloud_dir: str = str(DATA_DIR)  # holds cloud_01.csv .. cloud_12.csv
    stations_path: str = ""  # empty: per-problem default station list
    pool_path: str = ""  # empty: generate the mutation pool
    pool_size: int = 1000
    n_optima: int = 50
    runs_per_optimum: int = 2
    duration_hours: float = 168.0
    step_minutes: float = 1.0
    n_jobs: int = 1

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigurationError(f"unknown problem {self.problem!r}; choose from {PROBLEMS}")
        if self.n_optima < 1 or self.runs_per_optimum < 1:
            raise ConfigurationError("n_optima and runs_per_optimum must be at least 1")
        if self.pool_size < 0:
            raise ConfigurationError("pool_size must be nonnegative")
        if self.n_jobs < 1:
            raise ConfigurationError("n_jobs must be at least 1")
        if self.duration_hours <= 0 or self.step_minutes <= 0:
            raise ConfigurationError("scenario duration and step must be positive")

    @property
    def scenario_stations(self) -> str:
        return self.stations_path or str(DATA_DIR / ("ground_stations.csv" if self.problem == "orbit"
                                                     else "stations.csv"))


def default_config(problem: str = "geo_mc") -> RunConfig:
    """Per-problem defaults: 100-generation cap for the Monte Carlo study, n_q = 20 for orbits."""
    if problem == "geo_mc":
        ga = GAConfig(max_generations=100)
    elif problem == "orbit":
        ga = GAConfig(n_q=20, n_p=12)
    else:
        ga = GAConfig(n_q=10, n_p=12)
    return RunConfig(problem=problem, ga=ga)


def config_keys() -> dict[str, str]:
    """Flat key -> owner ('run' or 'ga') for every overridable setting."""
    keys = {f.name: "run" for f in fields(RunConfig) if f.name != "ga"}
    keys.update({f.name: "ga" for f in fields(GAConfig)})
    return keys


def apply_overrides(config: RunConfig, values: dict) -> RunConfig:
    """Return ``config`` with flat ``values`` applied; values are already typed."""
    owners = config_keys()
    run_kw, ga_kw = {}, {}
    for key, value in values.items():
        key = key.replace("-", "_")
        if key not in owners:
            raise ConfigurationError(f"unknown configuration key {key!r}")
        (run_kw if owners[key] == "run" else ga_kw)[key] = value
    ga = replace(config.ga, **ga_kw) if ga_kw else config.ga
    return replace(config, ga=ga, **run_kw)


def derived_seed(*parts: int) -> int:
    """Order-independent 63-bit seed from integer parts, e.g. (base, optimum, run)."""
    state = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts]).generate_state(2, np.uint64)
    return int(state[0] >> np.uint64(1))


# --------------------------------------------------------------------------
# Monte Carlo study on the land-constrained target problem


@dataclass
class MonteCarloReport:
    operator: str
    optima: np.ndarray  # (n_optima, 2) lat, lon
    final_best: np.ndarray  # (n_runs,) final central angle, radians
    generations: np.ndarray  # (n_runs,) generations executed before stopping
    last_improvement: np.ndarray  # (n_runs,) generation of the last best-so-far improvement
    converged: np.ndarray  # (n_runs,) stall criterion met before the cap
    bands: np.ndarray  # (max_generations + 1, 3) p5, p50, p95 of best fitness across runs
    run_index: list[tuple[int, int]] = field(default_factory=list)  # (optimum, run) per row

    @property
    def median_final(self) -> float:
        return float(np.median(self.final_best))

    @property
    def generations_variance(self) -> float:
        return float(np.var(self.generations))

    def summary(self) -> str:
        return (f"{self.operator}: runs={len(self.final_best)} median_final={self.median_final:.3e} rad "
                f"p95_final={np.percentile(self.final_best, 95):.3e} "
                f"generations mean={np.mean(self.generations):.1f} var={self.generations_variance:.1f}")


def _geo_run(args) -> tuple[float, int, int, bool, list[float]]:
    mask, optimum, pool, ga = args
    res = run(GeoTargetProblem(mask, optimum, pool), ga)
    return (res.best[0], res.generations, res.last_improvement, res.converged,
            [rec.best[0] for rec in res.trace])


def sample_optima(mask, n: int, seed: int) -> np.ndarray:
    """Rejection-sampled land points; optimum ``i`` depends only on (seed, i)."""
    return np.array([sample_land_point(mask, np.random.default_rng([seed, i])) for i in range(n)])


def run_monte_carlo_geo(config: RunConfig) -> MonteCarloReport:
    """``n_optima`` land targets, ``runs_per_optimum`` GA runs each.

    Runs that stop before the generation cap keep their final best for the
    remaining generations so every generation aggregates all runs.
    """
    mask = io.read_polygons(config.mask_path)
    optima = sample_optima(mask, config.n_optima, config.seed)
    pool = _geo_pool(mask, config)
    jobs, index = [], []
    for i, opt in enumerate(optima):
        for r in range(config.runs_per_optimum):
            ga = replace(config.ga, rng_seed=derived_seed(config.seed, i, r))
            jobs.append((mask, tuple(opt), pool, ga))
            index.append((i, r))
    if config.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=config.n_jobs) as ex:
            results = list(ex.map(_geo_run, jobs, chunksize=max(1, len(jobs) // (4 * config.n_jobs))))
    else:
        results = [_geo_run(j) for j in jobs]

    horizon = config.ga.max_generations + 1
    curves = np.empty((len(results), horizon))
    for k, (*_, trace) in enumerate(results):
        curves[k, :len(trace)] = trace
        curves[k, len(trace):] = trace[-1]
    bands = np.percentile(curves, [5, 50, 95], axis=0).T
    return MonteCarloReport(
        operator=config.ga.operator_choice,
        optima=optima,
        final_best=np.array([r[0] for r in results]),
        generations=np.array([r[1] for r in results]),
        last_improvement=np.array([r[2] for r in results]),
        converged=np.array([r[3] for r in results]),
        bands=bands,
        run_index=index,
    )


def _geo_pool(mask, config: RunConfig) -> Optional[MutationPool]:
    if config.pool_path:
        pool = MutationPool.from_csv(config.pool_path)
        pool.validate(mask)
        return pool
    if config.pool_size == 0:
        return None  # realtime resampling
    return land_pool(mask, config.pool_size, np.random.default_rng([config.seed, _POOL_TAG]))


# --------------------------------------------------------------------------
# single-run problems


def load_astro(config: RunConfig) -> AstroProblem:
    mask = io.read_polygons(config.mask_path)
    luminance = io.read_grid(config.luminance_path)
    clouds = [io.read_grid(Path(config.cloud_dir) / f"cloud_{m:02d}.csv") for m in range(1, 13)]
    stations = io.read_stations(config.scenario_stations)
    return AstroProblem(mask, luminance, clouds, stations, _geo_pool(mask, config))


def run_astro(config: RunConfig) -> tuple[RunResult, Path]:
    problem = load_astro(config)
    ga = replace(config.ga, rng_seed=derived_seed(config.seed))
    result = run(problem, ga)
    path = export_pareto_csv(result.front, Path(config.out_dir) / "astro_front.csv", problem)
    return result, path


def load_orbit_pool(config: RunConfig) -> MutationPool:
    if config.pool_path:
        pool = MutationPool.from_csv(config.pool_path)
    else:
        pool = orbit_pool(config.pool_size, np.random.default_rng([config.seed, _POOL_TAG]))
    pool.validate(orbit_feasible)
    return pool


def run_orbit(config: RunConfig, pool: MutationPool | None = None) -> tuple[RunResult, Path]:
    scenario = orbit.Scenario(io.read_stations(config.scenario_stations),
                              duration=config.duration_hours, step=config.step_minutes)
    problem = OrbitProblem(scenario, pool if pool is not None else load_orbit_pool(config))
    ga = replace(config.ga, rng_seed=derived_seed(config.seed))
    result = run(problem, ga)
    path = export_pareto_csv(result.front, Path(config.out_dir) / "orbit_front.csv", problem)
    return result, path


# --------------------------------------------------------------------------
# exports


def _sort_key(row_and_obj):
    row, obj = row_and_obj
    return tuple(obj), tuple(math.inf if v is None else v for v in row)


def export_pareto_csv(front: Sequence[Individual], path, problem: Problem) -> Path:
    """Front rows sorted by objectives; duplicate chromosomes are written once."""
    seen, rows = set(), []
    for ind in front:
        key = ind.chromosome.key()
        if key in seen:
            continue
        seen.add(key)
        rows.append((problem.export_row(ind), ind.objectives))
    rows.sort(key=_sort_key)
    return io.write_rows(path, problem.export_header(), [r for r, _ in rows])


def export_trace_csv(report: MonteCarloReport, path) -> Path:
    rows = [(g, *(float(v) for v in band)) for g, band in enumerate(report.bands)]
    return io.write_rows(path, TRACE_HEADER, rows)


def export_runs_csv(report: MonteCarloReport, path) -> Path:
    header = ("optimum", "run", "opt_lat", "opt_lon", "final_best", "generations",
              "last_improvement", "converged")
    rows = []
    for k, (i, r) in enumerate(report.run_index):
        rows.append((i, r, float(report.optima[i, 0]), float(report.optima[i, 1]),
                     float(report.final_best[k]), int(report.generations[k]),
                     int(report.last_improvement[k]), bool(report.converged[k])))
    return io.write_rows(path, header, rows)


def read_front(path, objective_columns: Sequence[str], maximize: Sequence[str] = ()) -> np.ndarray:
    """Objective matrix (minimization sense) from an exported front."""
    _, rows = io.read_rows(path)
    sign = np.array([-1.0 if c in maximize else 1.0 for c in objective_columns])
    return np.array([[float(r[c]) for c in objective_columns] for r in rows]).reshape(-1, len(sign)) * sign


def mutually_nondominated(objectives: np.ndarray) -> bool:
    F = [tuple(row) for row in np.asarray(objectives, dtype=float)]
    return not any(dominates(a, b) for a in F for b in F)
