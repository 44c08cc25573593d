"""Acceptance criteria 1-10.  Each test prints one PASS/FAIL line (see the
``acceptance criteria`` section of the pytest summary)."""
import math
import os
import time
from dataclasses import replace

import numpy as np
import pytest

import oracles
from latticega import bench, io
from latticega.engine import Chromosome, Individual, fast_nondominated_sort
from latticega.geo import haversine_angle, sample_point_latlon
from latticega.lattice import (
    GaussBuilder,
    MutationPool,
    UniformBuilder,
    build_gauss_lattice,
    build_uniform_lattice,
    lattice_crossover,
    mutate_advance_sampling,
)
from latticega.orbit import (
    GROUND_STATIONS,
    MIN_ALTITUDE,
    R_EARTH,
    OrbitElements,
    Scenario,
    apparent_disk_radius,
    altitude_in_band,
    hohmann_delta_v,
    semi_major_axis_for_period,
    total_access,
)
from latticega.problems import orbit_feasible

SEED = 20240601


def test_criterion_01_apparent_disk(criterion):
    two_psi = 2 * apparent_disk_radius(350.0)
    geo_psi = apparent_disk_radius(42164.0 - R_EARTH)

    # independent root of acos(R / (R + h)) = 10 deg by bisection
    lo, hi = 1.0, 500.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if math.degrees(math.acos(oracles.R_EARTH / (oracles.R_EARTH + mid))) > 10.0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)

    ok = abs(two_psi - 17.1) <= 0.05 and abs(geo_psi - 71.0) <= 0.5 and abs(root - 99.0) <= 1.0 \
        and abs(MIN_ALTITUDE - root) < 1e-6
    assert criterion(1, ok, f"2psi(350)={two_psi:.4f} psi(GEO)={geo_psi:.3f} root={root:.3f} km")


def test_criterion_02_delta_v(criterion):
    three_geo = 3 * hohmann_delta_v(42164.0)
    semi_sync = hohmann_delta_v(semi_major_axis_for_period(6.0))
    ok = abs(three_geo - 11.796) <= 0.006 and abs(semi_sync - 2.74) <= 0.05
    assert criterion(2, ok, f"3xGEO={three_geo:.4f} km/s  T=6h: {semi_sync:.4f} km/s")


def test_criterion_03_band_fraction(criterion):
    t0 = time.perf_counter()
    h = np.random.default_rng(SEED).uniform(350.0, 36500.0, 1_000_000)
    frac = float(np.mean(altitude_in_band(h)))
    dt = time.perf_counter() - t0
    assert criterion(3, abs(frac - 0.12) <= 0.02 and dt < 1.0, f"fraction={frac:.4f} in {dt:.3f} s")


def _random_predicate(rng):
    """Union of 1-4 balls in 2 or 3 dimensions, plus a feasible point sampler."""
    dim = int(rng.integers(2, 4))
    centres = rng.uniform(-10, 10, size=(int(rng.integers(1, 5)), dim))
    radii = rng.uniform(0.3, 4.0, size=len(centres))

    def feasible(x):
        return bool(np.any(np.linalg.norm(centres - np.asarray(x), axis=1) <= radii))

    def sample(r):
        k = int(r.integers(len(centres)))
        u = r.normal(size=dim)
        return centres[k] + radii[k] * r.uniform() ** (1 / dim) * u / np.linalg.norm(u) * (1 - 1e-9)

    return dim, feasible, sample


def test_criterion_04_constraint_consistency(criterion):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    bad = trials = 0
    for kind in ("uniform", "gauss"):
        for _ in range(1000):
            dim, feasible, sample = _random_predicate(rng)
            a, b = sample(rng), sample(rng)
            builder = UniformBuilder(int(rng.integers(2, 8))) if kind == "uniform" else \
                GaussBuilder(int(rng.integers(2, 13)), int(rng.integers(1, 11)))
            child = lattice_crossover(a, b, builder, feasible, rng)
            bad += not feasible(child)
            trials += 1
    for _ in range(1000):
        dim, feasible, sample = _random_predicate(rng)
        # candidates jittered around the balls: a mix the pool must filter
        pool = MutationPool.sample(lambda r: sample(r) + r.normal(scale=2.0, size=dim), feasible, 20, rng)
        child = mutate_advance_sampling(np.zeros(dim), pool, rng)
        bad += not feasible(child)
        trials += 1
    dt = time.perf_counter() - t0
    assert criterion(4, bad == 0 and dt < 10.0, f"{bad} infeasible of {trials} offspring in {dt:.2f} s")


def test_criterion_05_round_trip(criterion):
    rng = np.random.default_rng(SEED)
    n = 100_000
    lat = rng.uniform(-60, 60, n)
    lon = rng.uniform(-180, 180, n)
    gamma = rng.uniform(1e-6, 0.4, n)
    theta = rng.uniform(0, 2 * math.pi, n)
    s = np.c_[np.cos(theta), np.sin(theta)]
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(n):
        p = (lat[k], lon[k])
        out = sample_point_latlon(p, gamma[k], s[k])
        worst = max(worst, abs(haversine_angle(p, out) - gamma[k]))
    dt = time.perf_counter() - t0
    assert criterion(5, worst <= 1e-9 and dt < 5.0, f"max |gamma error|={worst:.2e} rad over {n} calls in {dt:.2f} s")


def test_criterion_06_sort_oracle(criterion):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    mismatches = 0
    for k in range(200):
        size, m = int(rng.integers(1, 31)), int(rng.integers(2, 4))
        # half the populations use a coarse integer grid so ties and duplicates occur
        objs = rng.integers(0, 5, size=(size, m)).astype(float) if k % 2 else rng.uniform(size=(size, m))
        objs = [tuple(row) for row in objs]
        pop = [Individual(Chromosome(np.zeros(1)), o) for o in objs]
        mismatches += [set(f) for f in fast_nondominated_sort(pop)] != oracles.brute_force_fronts(objs)
    dt = time.perf_counter() - t0
    assert criterion(6, mismatches == 0 and dt < 5.0, f"{mismatches} mismatches in 200 populations, {dt:.2f} s")


@pytest.mark.slow
def test_criterion_07_desk_monte_carlo(criterion, tmp_path):
    base = bench.default_config("geo_mc")
    base = replace(base, seed=SEED, n_optima=50, runs_per_optimum=2, out_dir=str(tmp_path),
                   n_jobs=os.cpu_count() or 1, ga=replace(base.ga, population_size=100, max_generations=100))
    t0 = time.perf_counter()
    reports = {}
    for op in ("gauss_lattice", "uniform_lattice", "repair_baseline"):
        reports[op] = bench.run_monte_carlo_geo(replace(base, ga=replace(base.ga, operator_choice=op)))
        print(reports[op].summary())
    dt = time.perf_counter() - t0
    g, u, r = (reports[k] for k in ("gauss_lattice", "uniform_lattice", "repair_baseline"))
    median_ok = g.median_final <= 0.1 * r.median_final
    var_ok = g.generations_variance < min(u.generations_variance, r.generations_variance)
    detail = (f"median final gauss={g.median_final:.2e} repair={r.median_final:.2e} rad; generations variance "
              f"gauss={g.generations_variance:.1f} uniform={u.generations_variance:.1f} "
              f"repair={r.generations_variance:.1f}; {dt:.0f} s")
    assert criterion(7, median_ok and var_ok, detail)


def test_criterion_08_full_coverage(criterion):
    t0 = time.perf_counter()
    a = semi_major_axis_for_period(24.0)
    psi = apparent_disk_radius(a - R_EARTH)
    (lon1, lon2), margin = oracles.geo_coverage_longitudes([p for _, p in GROUND_STATIONS], psi)
    constellation = [OrbitElements(a, 0.0, lon1), OrbitElements(a, 0.0, lon2)]
    access = total_access(constellation, Scenario())
    dt = time.perf_counter() - t0
    ok = access == 1.0 and margin > 0 and dt < 5.0
    assert criterion(8, ok, f"GEO pair at lon {lon1:g}, {lon2:g} (margin {margin:.1f} deg): "
                            f"access={access!r} in {dt:.2f} s")


def test_criterion_09_lattice_structure(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    problems = []
    for n_p, dim in ((2, 1), (5, 2), (4, 3), (12, 2)):
        a, b = rng.uniform(-5, 5, dim), rng.uniform(-5, 5, dim)
        nodes = build_uniform_lattice(a, b, n_p).nodes
        if len(nodes) != n_p ** dim:
            problems.append(f"uniform count {len(nodes)} != {n_p}^{dim}")
        # both parents appear exactly, as the first and last corner of the grid
        if not (np.array_equal(nodes[0], a) and np.array_equal(nodes[-1], b)):
            problems.append("uniform parents are not corner nodes")

    worst = 0.0
    for n_p, n_q in ((12, 10), (7, 20), (3, 1)):
        a, b = np.array([rng.uniform(-5, 5)]), np.array([rng.uniform(-5, 5)])
        lat = build_gauss_lattice(a, b, n_p, n_q)
        nodes = lat.nodes
        if len(nodes) != n_p * n_q + 1:
            problems.append(f"gauss count {len(nodes)} != {n_p * n_q + 1}")
        if not np.array_equal(nodes[lat.anchors[0]], a):
            problems.append("gauss anchor is not parent A")
        sep = abs(b[0] - a[0])
        for i in range(1, n_q + 1):
            expected = sep / 3 * abs(oracles.probit_bisection(i / (n_q + 1)))
            ring = nodes[(i - 1) * n_p:i * n_p]
            worst = max(worst, float(np.max(np.abs(np.abs(ring[:, 0] - a[0]) - expected))))
    if worst > 1e-9:
        problems.append(f"radius error {worst:.2e}")
    dt = time.perf_counter() - t0
    ok = not problems and dt < 1.0
    assert criterion(9, ok, f"{'; '.join(problems) or 'counts, corners, anchor ok'}; "
                            f"max radius error {worst:.1e}; {dt:.3f} s")


@pytest.mark.slow
def test_criterion_10_orbit_front_richness(criterion, tmp_path):
    base = bench.default_config("orbit")
    base = replace(base, seed=SEED, ga=replace(base.ga, max_evaluations=3000))
    t0 = time.perf_counter()
    paths = {}
    for op in ("gauss_lattice", "death_penalty"):
        cfg = replace(base, out_dir=str(tmp_path / op), ga=replace(base.ga, operator_choice=op))
        result, paths[op] = bench.run_orbit(cfg)
        print(f"{op}: {result.evaluations} evaluations, {result.generations} generations")
    dt = time.perf_counter() - t0

    _, g_rows = io.read_rows(paths["gauss_lattice"])
    _, d_rows = io.read_rows(paths["death_penalty"])
    multi = sum(int(r["n_sats"]) >= 2 for r in g_rows)
    d_sats = [(float(r[f"a{s}"]), float(r[f"inc{s}"])) for r in d_rows for s in (1, 2, 3) if r[f"a{s}"]]
    d_ok = bool(d_sats) and all(orbit_feasible(x) for x in d_sats)
    nondom = all(bench.mutually_nondominated(bench.read_front(p, ["access", "delta_v"], maximize=["access"]))
                 for p in paths.values())
    ok = multi >= 2 and d_ok and nondom
    assert criterion(10, ok, f"gauss front {len(g_rows)} rows ({multi} multi-satellite); death-penalty front "
                             f"{len(d_rows)} rows, {len(d_sats)} satellites all feasible={d_ok}; "
                             f"mutually nondominated={nondom}; {dt:.0f} s")
