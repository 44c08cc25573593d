"""NSGA-II loop with pluggable, linkage-aware variation operators.

All objectives are minimized.  Problems describe their chromosome through a
:class:`ChromosomeLayout` (which genes are linked, their feasibility
predicates and domain samplers) and the engine hands each linked group to the
configured operator as a unit.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, InitializationError
from .lattice import (
    GaussBuilder,
    MutationPool,
    UniformBuilder,
    lattice_crossover,
    mutate_advance_sampling,
    mutate_realtime_resample,
)

log = logging.getLogger(__name__)

WORST = math.inf  # objective value assigned to death-penalized individuals
OPERATORS = ("uniform_lattice", "gauss_lattice", "repair_baseline", "death_penalty")


def always_feasible(x) -> bool:
    return True


# --------------------------------------------------------------------------
# chromosome description


@dataclass(frozen=True, eq=False)
class LinkedGeneGroup:
    """Genes recombined and mutated together.

    Only ``indices`` and ``feasible`` are required.  The remaining hooks let
    operators work on the group: ``sampler(rng)`` draws uniformly from the
    group's box domain (feasible or not), ``wraps`` gives per-gene wrap rules,
    ``sample_point``/``separation`` customize the gauss lattice for non-flat
    genes, ``pool`` enables advance-sampling mutation and ``repair`` maps an
    infeasible vector to a feasible one.
    """

    indices: tuple[int, ...]
    feasible: Callable[[np.ndarray], bool] = always_feasible
    sampler: Optional[Callable[[np.random.Generator], np.ndarray]] = None
    wraps: tuple = ()
    sample_point: Optional[Callable] = None
    separation: Optional[Callable] = None
    pool: Optional[MutationPool] = None
    repair: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        if not self.indices:
            raise ValueError("a linked gene group needs at least one index")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))


@dataclass(frozen=True)
class VariableLength:
    min_slots: int
    max_slots: int
    slot_width: int


@dataclass(frozen=True)
class ChromosomeLayout:
    n_genes: int
    groups: tuple[LinkedGeneGroup, ...]
    length: Optional[VariableLength] = None  # None means fixed length

    def __post_init__(self):
        seen: set[int] = set()
        for g in self.groups:
            if any(i < 0 or i >= self.n_genes for i in g.indices):
                raise ValueError(f"group {g.name or g.indices} indexes past {self.n_genes} genes")
            if seen.intersection(g.indices):
                raise ValueError("linked gene groups must be disjoint")
            seen.update(g.indices)
        if self.length is not None:
            v = self.length
            if v.max_slots * v.slot_width != self.n_genes:
                raise ValueError("gene count must equal max_slots * slot_width")
            if not 1 <= v.min_slots <= v.max_slots:
                raise ValueError("need 1 <= min_slots <= max_slots")
            for g in self.groups:
                if len({i // v.slot_width for i in g.indices}) != 1:
                    raise ValueError("a linked group may not straddle slots")

    def slot_of(self, group: LinkedGeneGroup) -> Optional[int]:
        if self.length is None:
            return None
        return group.indices[0] // self.length.slot_width

    def live_groups(self, chrom: "Chromosome") -> list[LinkedGeneGroup]:
        if self.length is None:
            return list(self.groups)
        return [g for g in self.groups if chrom.active[self.slot_of(g)]]


@dataclass
class Chromosome:
    genes: np.ndarray
    active: Optional[np.ndarray] = None  # slot flags for variable-length layouts

    def copy(self) -> "Chromosome":
        return Chromosome(self.genes.copy(), None if self.active is None else self.active.copy())

    def key(self) -> bytes:
        k = self.genes.tobytes()
        return k if self.active is None else k + self.active.tobytes()

    def group(self, g: LinkedGeneGroup) -> np.ndarray:
        return self.genes[list(g.indices)]

    def set_group(self, g: LinkedGeneGroup, values) -> None:
        self.genes[list(g.indices)] = values


@dataclass
class Individual:
    chromosome: Chromosome
    objectives: Optional[tuple[float, ...]] = None
    rank: int = 0
    crowding: float = 0.0
    feasible: bool = True


class Problem:
    """Base class for optimization problems.

    Subclasses set ``layout`` and ``n_objectives`` and implement
    :meth:`evaluate`.  The default initializer draws every linked group until
    feasible.
    """

    layout: ChromosomeLayout
    n_objectives: int
    objective_names: tuple[str, ...] = ()
    gene_names: tuple[str, ...] = ()
    init_attempts: int = 10_000

    def evaluate(self, chrom: Chromosome) -> tuple[float, ...]:
        raise NotImplementedError

    def export_header(self) -> list[str]:
        genes = list(self.gene_names) or [f"x{i}" for i in range(self.layout.n_genes)]
        objs = list(self.objective_names) or [f"f{k}" for k in range(self.n_objectives)]
        return genes + objs

    def export_row(self, ind: "Individual") -> list:
        return [float(v) for v in ind.chromosome.genes] + [float(v) for v in ind.objectives]

    def is_feasible(self, chrom: Chromosome) -> bool:
        return all(g.feasible(chrom.group(g)) for g in self.layout.live_groups(chrom))

    def initialize(self, rng: np.random.Generator) -> Chromosome:
        genes = np.zeros(self.layout.n_genes)
        for g in self.layout.groups:
            if g.pool is not None:  # the pool is the admissible set when one is given
                genes[list(g.indices)] = mutate_advance_sampling(None, g.pool, rng)
                continue
            if g.sampler is None:
                raise InitializationError(f"group {g.name or g.indices} has no sampler or pool")
            for _ in range(self.init_attempts):
                x = np.asarray(g.sampler(rng), dtype=float)
                if g.feasible(x):
                    genes[list(g.indices)] = x
                    break
            else:
                raise InitializationError(f"no feasible sample for group {g.name or g.indices}")
        active = None
        v = self.layout.length
        if v is not None:
            n = int(rng.integers(v.min_slots, v.max_slots + 1))
            active = np.zeros(v.max_slots, dtype=bool)
            active[rng.choice(v.max_slots, size=n, replace=False)] = True
        return Chromosome(genes, active)


# --------------------------------------------------------------------------
# configuration and results


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 100
    max_generations: int = 200
    stall_generations: int = 50
    crossover_probability: float = 0.9
    mutation_probability_per_group: float = 0.1
    slot_toggle_probability: float = 0.1
    rng_seed: int = 0
    operator_choice: str = "gauss_lattice"
    n_p: int = 12
    n_q: int = 10
    max_resample_attempts: int = 1000
    stall_tolerance: float = 0.0
    max_evaluations: Optional[int] = None  # stop once this many distinct chromosomes were scored

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigurationError("population_size must be at least 2")
        if self.max_generations < 1 or self.stall_generations < 1:
            raise ConfigurationError("generation limits must be positive")
        for name in ("crossover_probability", "mutation_probability_per_group", "slot_toggle_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {p}")
        if self.operator_choice not in OPERATORS:
            raise ConfigurationError(f"unknown operator {self.operator_choice!r}; choose from {OPERATORS}")
        if self.n_p < 2:
            raise ConfigurationError(f"n_p must be >= 2, got {self.n_p}")
        if self.n_q < 1:
            raise ConfigurationError(f"n_q must be >= 1, got {self.n_q}")
        if self.stall_tolerance < 0:
            raise ConfigurationError("stall_tolerance must be nonnegative")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ConfigurationError("max_evaluations must be positive")


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best: tuple[float, ...]  # per-objective best over the nondominated front
    p5: tuple[float, ...]  # population percentiles per objective
    p50: tuple[float, ...]
    p95: tuple[float, ...]


@dataclass
class RunResult:
    front: list[Individual]
    trace: list[GenerationRecord]
    generations: int
    converged: bool
    evaluations: int
    population: list[Individual] = field(default_factory=list)
    last_improvement: int = 0  # generation of the final improvement to the front's best

    @property
    def best(self) -> tuple[float, ...]:
        return self.trace[-1].best


# --------------------------------------------------------------------------
# NSGA-II building blocks


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    if len(a) != len(b):
        raise ValueError(f"objective arity mismatch: {len(a)} vs {len(b)}")
    strictly = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strictly = True
    return strictly


def nondominated_fronts(objectives: np.ndarray) -> list[list[int]]:
    """Fronts of row indices for an (n, m) objective matrix."""
    F = np.asarray(objectives, dtype=float)
    n = len(F)
    if n == 0:
        return []
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    remaining = np.ones(n, dtype=bool)
    fronts = []
    while remaining.any():
        current = np.flatnonzero(remaining & (count == 0))
        fronts.append(current.tolist())
        remaining[current] = False
        count = count - dom[current].sum(axis=0)
    return fronts


def fast_nondominated_sort(population: Sequence[Individual]) -> list[list[int]]:
    if not population:
        return []
    fronts = nondominated_fronts(np.array([ind.objectives for ind in population], dtype=float))
    for rank, front in enumerate(fronts):
        for i in front:
            population[i].rank = rank
    return fronts


def crowding_distances(objectives: np.ndarray) -> np.ndarray:
    F = np.asarray(objectives, dtype=float)
    n = len(F)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = math.inf
        return dist
    for k in range(F.shape[1]):
        order = np.argsort(F[:, k], kind="stable")
        vals = F[order, k]
        dist[order[0]] = dist[order[-1]] = math.inf
        span = vals[-1] - vals[0]
        if not np.isfinite(span) or span == 0.0:
            continue
        dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def crowding_distance(front: Sequence[Individual]) -> list[float]:
    if not front:
        return []
    d = crowding_distances(np.array([ind.objectives for ind in front], dtype=float))
    for ind, c in zip(front, d):
        ind.crowding = float(c)
    return d.tolist()


def tournament_select(population: Sequence[Individual], rng: np.random.Generator) -> int:
    """Binary tournament on (rank, -crowding) with a coin flip for full ties."""
    n = len(population)
    if n == 0:
        raise ValueError("cannot select from an empty population")
    if n == 1:
        return 0
    i = int(rng.integers(n))
    j = int(rng.integers(n - 1))
    j += j >= i  # distinct pair
    a, b = population[i], population[j]
    if a.rank != b.rank:
        return int(i if a.rank < b.rank else j)
    if a.crowding != b.crowding:
        return int(i if a.crowding > b.crowding else j)
    return int(i if rng.random() < 0.5 else j)


def survive(population: list[Individual], size: int) -> list[Individual]:
    """Elitist truncation by rank, then crowding distance."""
    fronts = fast_nondominated_sort(population)
    survivors: list[Individual] = []
    for front in fronts:
        members = [population[i] for i in front]
        crowding_distance(members)
        if len(survivors) + len(members) <= size:
            survivors.extend(members)
            if len(survivors) == size:
                break
            continue
        order = sorted(range(len(members)), key=lambda k: -members[k].crowding)
        survivors.extend(members[k] for k in order[: size - len(survivors)])
        break
    return survivors


# --------------------------------------------------------------------------
# operators


class Operator:
    """Variation strategy: crossover + mutation over linked groups."""

    name = "base"
    constraint_consistent = True

    def __init__(self, config: GAConfig):
        self.config = config

    def crossover(self, problem: Problem, a: Chromosome, b: Chromosome, rng):
        raise NotImplementedError

    def mutate_group(self, problem: Problem, g: LinkedGeneGroup, values: np.ndarray, rng) -> np.ndarray:
        raise NotImplementedError

    def finish(self, problem: Problem, chrom: Chromosome) -> Chromosome:
        return chrom

    def _shared_groups(self, problem: Problem, a: Chromosome, b: Chromosome):
        layout = problem.layout
        if layout.length is None:
            return list(layout.groups)
        return [g for g in layout.groups if a.active[layout.slot_of(g)] and b.active[layout.slot_of(g)]]

    def mutate(self, problem: Problem, chrom: Chromosome, rng) -> Chromosome:
        p = self.config.mutation_probability_per_group
        for g in problem.layout.live_groups(chrom):
            if rng.random() < p:
                chrom.set_group(g, self.mutate_group(problem, g, chrom.group(g), rng))
        v = problem.layout.length
        if v is not None and rng.random() < self.config.slot_toggle_probability:
            slot = int(rng.integers(v.max_slots))
            n_active = int(chrom.active.sum())
            if chrom.active[slot] and n_active > v.min_slots:
                chrom.active[slot] = False
            elif not chrom.active[slot] and n_active < v.max_slots:
                chrom.active[slot] = True
        return self.finish(problem, chrom)


class LatticeOperator(Operator):
    """Lattice quantization crossover with feasibility-preserving mutation."""

    def __init__(self, config: GAConfig, kind: str):
        super().__init__(config)
        if kind not in ("uniform", "gauss"):
            raise ConfigurationError(f"unknown lattice kind {kind!r}")
        self.kind = kind
        self.name = f"{kind}_lattice"
        self._builders: dict[int, object] = {}

    def builder(self, g: LinkedGeneGroup):
        b = self._builders.get(id(g))
        if b is None:
            if self.kind == "uniform":
                b = UniformBuilder(self.config.n_p, tuple(g.wraps))
            else:
                b = GaussBuilder(self.config.n_p, self.config.n_q, g.sample_point, g.separation, tuple(g.wraps))
            self._builders[id(g)] = b
        return b

    def crossover(self, problem, a, b, rng):
        ca, cb = a.copy(), b.copy()
        for g in self._shared_groups(problem, a, b):
            ga, gb = a.group(g), b.group(g)
            builder = self.builder(g)
            ca.set_group(g, lattice_crossover(ga, gb, builder, g.feasible, rng, check_parents=False))
            cb.set_group(g, lattice_crossover(gb, ga, builder, g.feasible, rng, check_parents=False))
        return ca, cb

    def mutate_group(self, problem, g, values, rng):
        if g.pool is not None:
            return mutate_advance_sampling(values, g.pool, rng)
        if g.sampler is None:
            return values
        return mutate_realtime_resample(values, g.sampler, g.feasible, rng, self.config.max_resample_attempts)


class GenewiseOperator(Operator):
    """Conventional per-gene operators: uniform gene swap and single-gene reset."""

    def crossover(self, problem, a, b, rng):
        ca, cb = a.copy(), b.copy()
        for g in self._shared_groups(problem, a, b):
            idx = np.asarray(g.indices)
            swap = idx[rng.random(len(idx)) < 0.5]
            ca.genes[swap], cb.genes[swap] = b.genes[swap], a.genes[swap]
        return ca, cb

    def mutate_group(self, problem, g, values, rng):
        if g.sampler is None:
            return values
        out = values.copy()
        k = int(rng.integers(len(out)))
        out[k] = np.asarray(g.sampler(rng), dtype=float)[k]
        return out


class RepairOperator(GenewiseOperator):
    name = "repair_baseline"

    def finish(self, problem, chrom):
        for g in problem.layout.live_groups(chrom):
            x = chrom.group(g)
            if not g.feasible(x):
                if g.repair is None:
                    raise ConfigurationError(f"group {g.name or g.indices} has no repair rule")
                fixed = np.asarray(g.repair(x), dtype=float)
                if not g.feasible(fixed):
                    raise ConfigurationError(f"repair rule of group {g.name or g.indices} returned an infeasible point")
                chrom.set_group(g, fixed)
        return chrom


class DeathPenaltyOperator(GenewiseOperator):
    name = "death_penalty"
    constraint_consistent = False


def make_operator(config: GAConfig) -> Operator:
    choice = config.operator_choice
    if choice == "uniform_lattice":
        return LatticeOperator(config, "uniform")
    if choice == "gauss_lattice":
        return LatticeOperator(config, "gauss")
    if choice == "repair_baseline":
        return RepairOperator(config)
    if choice == "death_penalty":
        return DeathPenaltyOperator(config)
    raise ConfigurationError(f"unknown operator {choice!r}")


# --------------------------------------------------------------------------
# main loop

_SELECT = 0  # substream tag for selection draws


def _stream(seed: int, generation: int, slot: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, generation, slot])


class _Evaluator:
    def __init__(self, problem: Problem, operator: Operator):
        self.problem = problem
        self.check = not operator.constraint_consistent
        self.cache: dict[bytes, tuple[tuple[float, ...], bool]] = {}
        self.evaluations = 0

    def __call__(self, chrom: Chromosome) -> Individual:
        key = chrom.key()
        hit = self.cache.get(key)
        if hit is None:
            feasible = self.problem.is_feasible(chrom) if self.check else True
            if feasible:
                obj = tuple(float(v) for v in self.problem.evaluate(chrom))
            else:
                obj = (WORST,) * self.problem.n_objectives
            self.evaluations += 1
            hit = (obj, feasible)
            self.cache[key] = hit
        return Individual(chrom, hit[0], feasible=hit[1])


def _record(generation: int, population: list[Individual], m: int) -> GenerationRecord:
    F = np.array([ind.objectives for ind in population], dtype=float)
    front = F[[ind.rank == 0 for ind in population]]
    best = tuple(float(v) for v in front.min(axis=0))
    finite = F[np.all(np.isfinite(F), axis=1)]
    if len(finite) == 0:
        nan = (math.nan,) * m
        return GenerationRecord(generation, best, nan, nan, nan)
    p = np.percentile(finite, [5, 50, 95], axis=0)
    return GenerationRecord(generation, best, *(tuple(float(v) for v in row) for row in p))


def _improved(new: tuple[float, ...], old: tuple[float, ...], tol: float) -> bool:
    return any(n < o - tol for n, o in zip(new, old))


def run(problem: Problem, config: GAConfig, operator: Operator | None = None,
        callback: Callable[[int, list[Individual]], None] | None = None) -> RunResult:
    """Evolve ``problem`` under ``config``.

    Stops after ``max_generations``, once ``stall_generations`` pass with
    no per-objective improvement of the nondominated front, or at the end of
    the generation that exhausts ``max_evaluations``.  ``callback`` is
    called with (generation, population) after initialization and after
    every survival step.
    """
    op = operator or make_operator(config)
    evaluate = _Evaluator(problem, op)
    n = config.population_size
    m = problem.n_objectives
    seed = config.rng_seed

    population = []
    for i in range(n):
        chrom = problem.initialize(_stream(seed, 0, 1 + i))
        if not problem.is_feasible(chrom):
            raise InitializationError("problem initializer produced an infeasible individual")
        population.append(evaluate(chrom))
    population = survive(population, n)
    trace = [_record(0, population, m)]
    if callback:
        callback(0, population)

    stall = 0
    converged = False
    generation = last_improvement = 0
    for generation in range(1, config.max_generations + 1):
        sel = _stream(seed, generation, _SELECT)
        n_pairs = (n + 1) // 2
        picks = [tournament_select(population, sel) for _ in range(2 * n_pairs)]
        offspring = []
        for k in range(n_pairs):
            rng = _stream(seed, generation, 1 + k)
            a = population[picks[2 * k]].chromosome
            b = population[picks[2 * k + 1]].chromosome
            if rng.random() < config.crossover_probability:
                ca, cb = op.crossover(problem, a, b, rng)
            else:
                ca, cb = a.copy(), b.copy()
            offspring.append(evaluate(op.mutate(problem, ca, rng)))
            offspring.append(evaluate(op.mutate(problem, cb, rng)))
        population = survive(population + offspring[:n], n)
        record = _record(generation, population, m)
        if _improved(record.best, trace[-1].best, config.stall_tolerance):
            stall = 0
            last_improvement = generation
        else:
            stall += 1
        trace.append(record)
        if callback:
            callback(generation, population)
        if stall >= config.stall_generations:
            converged = True
            break
        if config.max_evaluations is not None and evaluate.evaluations >= config.max_evaluations:
            break

    front = [ind for ind in population if ind.rank == 0 and ind.feasible]
    log.debug("%s: %d generations, %d evaluations, converged=%s", op.name, generation,
              evaluate.evaluations, converged)
    return RunResult(front, trace, generation, converged, evaluate.evaluations, population,
                     last_improvement)


def with_overrides(config: GAConfig, **kwargs) -> GAConfig:
    return replace(config, **kwargs)
