import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from latticega.engine import (
    WORST,
    Chromosome,
    ChromosomeLayout,
    GAConfig,
    Individual,
    LinkedGeneGroup,
    Problem,
    VariableLength,
    crowding_distance,
    dominates,
    fast_nondominated_sort,
    run,
    tournament_select,
)
from latticega.errors import ConfigurationError, InitializationError


def box_sampler(lo, hi):
    return lambda rng: rng.uniform(lo, hi)


class Sphere(Problem):
    """Unconstrained sum of squares in a box."""

    n_objectives = 1

    def __init__(self, dim=3):
        lo, hi = np.full(dim, -5.0), np.full(dim, 5.0)
        self.layout = ChromosomeLayout(dim, (LinkedGeneGroup(tuple(range(dim)), sampler=box_sampler(lo, hi)),))

    def evaluate(self, chrom):
        return (float(np.sum(chrom.genes ** 2)),)


def annulus(x):
    r = math.hypot(x[0], x[1])
    return 1.0 <= r <= 2.0


def annulus_repair(x):
    r = math.hypot(x[0], x[1])
    if r == 0:
        return np.array([1.0, 0.0])
    # clamp strictly inside so rounding in the rescale cannot land outside
    return np.asarray(x) * (min(max(r, 1.0 + 1e-9), 2.0 - 1e-9) / r)


class Annulus(Problem):
    """Two objectives on an annulus: distance to (2, 0) and to (0, 2)."""

    n_objectives = 2

    def __init__(self):
        g = LinkedGeneGroup((0, 1), feasible=annulus, sampler=box_sampler([-2, -2], [2, 2]),
                            repair=annulus_repair)
        self.layout = ChromosomeLayout(2, (g,))

    def evaluate(self, chrom):
        x = chrom.genes
        return (float(np.hypot(x[0] - 2, x[1])), float(np.hypot(x[0], x[1] - 2)))


class Impossible(Problem):
    n_objectives = 1
    init_attempts = 50

    def __init__(self):
        self.layout = ChromosomeLayout(1, (LinkedGeneGroup((0,), feasible=lambda x: False,
                                                           sampler=box_sampler([0], [1])),))

    def evaluate(self, chrom):
        return (0.0,)


def individuals(objs):
    return [Individual(Chromosome(np.zeros(1)), tuple(o)) for o in objs]


# --- domination and sorting ------------------------------------------------

@pytest.mark.parametrize("a, b, expected", [((1, 2), (1, 2), False), ((1, 2), (2, 2), True), ((1, 3), (2, 2), False)])
def test_dominates_examples(a, b, expected):
    assert dominates(a, b) is expected


def test_dominates_arity_mismatch():
    with pytest.raises(ValueError):
        dominates((1, 2), (1, 2, 3))


def test_sort_single_and_pair():
    assert fast_nondominated_sort(individuals([(1, 1)])) == [[0]]
    assert fast_nondominated_sort(individuals([(1, 2), (2, 1)])) == [[0, 1]]


objective_rows = st.integers(2, 3).flatmap(
    lambda m: st.lists(st.tuples(*[st.integers(0, 6) for _ in range(m)]), min_size=1, max_size=30))


@settings(max_examples=250)
@given(objective_rows)
def test_sort_matches_brute_force(objs):
    pop = individuals(objs)
    fronts = fast_nondominated_sort(pop)
    assert [set(f) for f in fronts] == oracles.brute_force_fronts(objs)
    for rank, front in enumerate(fronts):
        assert all(pop[i].rank == rank for i in front)


def test_sort_random_twenty(rng):
    objs = [tuple(r) for r in rng.uniform(size=(20, 2))]
    assert [set(f) for f in fast_nondominated_sort(individuals(objs))] == oracles.brute_force_fronts(objs)


# --- crowding --------------------------------------------------------------

def test_crowding_small_fronts_are_infinite():
    assert crowding_distance(individuals([(1, 2), (2, 1)])) == [math.inf, math.inf]
    assert crowding_distance(individuals([(1, 2)])) == [math.inf]


def test_crowding_middle_of_three():
    d = crowding_distance(individuals([(0, 2), (1, 1), (2, 0)]))
    assert d[0] == d[2] == math.inf
    assert d[1] == pytest.approx(2.0)


def test_crowding_identical_vectors():
    d = crowding_distance(individuals([(1, 1)] * 5))
    assert sorted(d)[:3] == [0.0, 0.0, 0.0]


# --- selection -------------------------------------------------------------

def _ranked(ranks, crowd):
    pop = individuals([(0,)] * len(ranks))
    for ind, r, c in zip(pop, ranks, crowd):
        ind.rank, ind.crowding = r, c
    return pop


def test_tournament_prefers_rank(rng):
    pop = _ranked([0, 1], [1.0, 1.0])
    assert all(tournament_select(pop, rng) == 0 for _ in range(50))


def test_tournament_prefers_crowding(rng):
    pop = _ranked([0, 0], [math.inf, 1.0])
    assert all(tournament_select(pop, rng) == 0 for _ in range(50))


def test_tournament_coin_flip(rng):
    pop = _ranked([2, 2], [0.5, 0.5])
    wins = sum(tournament_select(pop, rng) == 0 for _ in range(10_000))
    assert abs(wins / 10_000 - 0.5) < 0.03


def test_tournament_empty(rng):
    with pytest.raises(ValueError):
        tournament_select([], rng)


# --- configuration ---------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(population_size=1), dict(max_generations=0), dict(crossover_probability=1.5),
    dict(mutation_probability_per_group=-0.1), dict(operator_choice="sbx"), dict(n_p=1), dict(n_q=0),
    dict(max_evaluations=0),
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        GAConfig(**kwargs)


def test_layout_validation():
    with pytest.raises(ValueError):
        ChromosomeLayout(2, (LinkedGeneGroup((0, 1)), LinkedGeneGroup((1,))))
    with pytest.raises(ValueError):
        ChromosomeLayout(2, (LinkedGeneGroup((0, 2)),))
    with pytest.raises(ValueError):
        ChromosomeLayout(6, (LinkedGeneGroup((2, 3)),), VariableLength(1, 2, 3))


# --- main loop -------------------------------------------------------------

@pytest.mark.parametrize("op", ["gauss_lattice", "uniform_lattice", "repair_baseline", "death_penalty"])
def test_sphere_trace_is_nonincreasing(op):
    res = run(Sphere(), GAConfig(population_size=30, max_generations=50, operator_choice=op, rng_seed=3))
    best = [rec.best[0] for rec in res.trace]
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert best[-1] < best[0]


def test_same_seed_same_result():
    cfg = GAConfig(population_size=20, max_generations=15, rng_seed=11)
    r1, r2 = run(Annulus(), cfg), run(Annulus(), cfg)
    assert r1.trace == r2.trace
    assert [i.objectives for i in r1.population] == [i.objectives for i in r2.population]
    assert [i.chromosome.key() for i in r1.front] == [i.chromosome.key() for i in r2.front]


def test_different_seeds_differ():
    r1 = run(Annulus(), GAConfig(population_size=20, max_generations=5, rng_seed=1))
    r2 = run(Annulus(), GAConfig(population_size=20, max_generations=5, rng_seed=2))
    assert r1.trace != r2.trace


@pytest.mark.parametrize("op", ["gauss_lattice", "uniform_lattice", "repair_baseline"])
def test_population_stays_feasible(op):
    problem = Annulus()

    def check(gen, population):
        assert all(problem.is_feasible(ind.chromosome) for ind in population), gen

    res = run(problem, GAConfig(population_size=30, max_generations=30, operator_choice=op, rng_seed=5),
              callback=check)
    assert all(annulus(i.chromosome.genes) for i in res.front)


def test_death_penalty_uses_sentinel():
    seen = []
    problem = Annulus()
    run(problem, GAConfig(population_size=30, max_generations=10, operator_choice="death_penalty", rng_seed=2),
        callback=lambda g, pop: seen.extend(i for i in pop if not i.feasible))
    for ind in seen:
        assert ind.objectives == (WORST, WORST)


def test_death_penalty_front_is_feasible():
    res = run(Annulus(), GAConfig(population_size=30, max_generations=20, operator_choice="death_penalty"))
    assert res.front and all(annulus(i.chromosome.genes) for i in res.front)


@given(st.integers(0, 2**63 - 1), st.sampled_from(["gauss_lattice", "repair_baseline"]))
@settings(max_examples=15)
def test_front_best_never_worsens(seed, op):
    res = run(Annulus(), GAConfig(population_size=16, max_generations=12, operator_choice=op, rng_seed=seed))
    bests = np.array([rec.best for rec in res.trace])
    assert np.all(np.diff(bests, axis=0) <= 0)


def test_percentiles_are_ordered():
    res = run(Annulus(), GAConfig(population_size=20, max_generations=10))
    for rec in res.trace:
        assert all(a <= b <= c for a, b, c in zip(rec.p5, rec.p50, rec.p95))


def test_stall_stops_the_run():
    class Flat(Sphere):
        def evaluate(self, chrom):
            return (1.0,)

    res = run(Flat(), GAConfig(population_size=10, max_generations=500, stall_generations=7))
    assert res.converged and res.generations == 7


def test_evaluation_budget_stops_the_run():
    res = run(Sphere(), GAConfig(population_size=20, max_generations=500, max_evaluations=150))
    assert not res.converged
    assert 150 <= res.evaluations < 150 + 20


def test_broken_repair_rule_is_reported():
    class Broken(Annulus):
        def __init__(self):
            super().__init__()
            g = self.layout.groups[0]
            self.layout = ChromosomeLayout(2, (LinkedGeneGroup(g.indices, feasible=g.feasible, sampler=g.sampler,
                                                               repair=lambda x: np.zeros(2)),))

    with pytest.raises(ConfigurationError):
        run(Broken(), GAConfig(population_size=20, max_generations=20, operator_choice="repair_baseline"))


def test_initialization_failure():
    with pytest.raises(InitializationError):
        run(Impossible(), GAConfig(population_size=4, max_generations=2))


class Slots(Problem):
    """Variable-length toy: each active slot adds (x - 1)^2; fewer slots cost less."""

    n_objectives = 2

    def __init__(self):
        groups = tuple(LinkedGeneGroup((2 * s, 2 * s + 1), feasible=lambda x: x[0] >= 0,
                                       sampler=box_sampler([-1, -1], [3, 3])) for s in range(3))
        self.layout = ChromosomeLayout(6, groups, VariableLength(1, 3, 2))

    def evaluate(self, chrom):
        err = sum((chrom.genes[2 * s] - 1) ** 2 for s in range(3) if chrom.active[s])
        return (float(err), -float(chrom.active.sum()))


def test_variable_length_slot_counts_stay_in_range():
    counts = set()

    def check(gen, pop):
        for ind in pop:
            n = int(ind.chromosome.active.sum())
            assert 1 <= n <= 3
            counts.add(n)

    run(Slots(), GAConfig(population_size=30, max_generations=20, slot_toggle_probability=0.3), callback=check)
    assert counts == {1, 2, 3}


def test_inactive_slots_ignore_feasibility():
    p = Slots()
    chrom = Chromosome(np.array([1.0, 0, -5.0, 0, 2.0, 0]), np.array([True, False, True]))
    assert p.is_feasible(chrom)
    chrom.active[1] = True
    assert not p.is_feasible(chrom)
