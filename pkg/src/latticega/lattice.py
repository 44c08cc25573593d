"""Lattice quantization crossover and constraint-consistent mutation.

A lattice is a finite set of candidate offspring built from the linked alleles
of two parents.  Crossover walks the lattice in random order and keeps the
first node that satisfies the group's feasibility predicate.  Because every
builder includes at least one parent as a node, two feasible parents always
produce a feasible child.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError

Feasibility = Callable[[np.ndarray], bool]
SamplePoint = Callable[[np.ndarray, "float | np.ndarray", np.ndarray], np.ndarray]


# --------------------------------------------------------------------------
# wrap rules


@dataclass(frozen=True)
class Periodic:
    """Periodic gene on the half-open interval (low, high], e.g. longitude."""

    low: float = -180.0
    high: float = 180.0

    @property
    def period(self) -> float:
        return self.high - self.low

    def normalize(self, x):
        x = np.asarray(x, dtype=float)
        return x - self.period * np.ceil((x - self.high) / self.period)

    def difference(self, a, b):
        """Shortest signed step from ``a`` to ``b``, in (-period/2, period/2]."""
        half = self.period / 2.0
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        return d - self.period * np.ceil((d - half) / self.period)


@dataclass(frozen=True)
class Clamped:
    """Bounded gene; values outside [low, high] are clipped, e.g. latitude."""

    low: float = -90.0
    high: float = 90.0

    def normalize(self, x):
        return np.clip(np.asarray(x, dtype=float), self.low, self.high)

    def difference(self, a, b):
        return np.asarray(b, dtype=float) - np.asarray(a, dtype=float)


Wrap = Optional["Periodic | Clamped"]


def _normalize(values: np.ndarray, wraps: Sequence[Wrap]) -> np.ndarray:
    if not wraps:
        return values
    out = np.array(values, dtype=float, copy=True)
    for i, w in enumerate(wraps):
        if w is not None:
            out[..., i] = w.normalize(out[..., i])
    return out


def _difference(a: np.ndarray, b: np.ndarray, wraps: Sequence[Wrap]) -> np.ndarray:
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    for i, w in enumerate(wraps or ()):
        if w is not None:
            d[i] = w.difference(a[i], b[i])
    return d


# --------------------------------------------------------------------------
# probit

# Acklam's rational approximation coefficients
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_Q_LOW = 0.02425


def probit(q: float) -> float:
    """Standard normal quantile, ``sqrt(2) * erfinv(2q - 1)``.

    Rational approximation (relative error ~1e-9) followed by one Newton
    step on the normal CDF.
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"probit is defined on the open interval (0, 1), got {q}")
    if q < _Q_LOW:
        r = math.sqrt(-2.0 * math.log(q))
        x = (((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]) / \
            ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0)
    elif q > 1.0 - _Q_LOW:
        r = math.sqrt(-2.0 * math.log1p(-q))
        x = -(((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]) / \
            ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0)
    else:
        u = q - 0.5
        r = u * u
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * u / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    # Newton refinement; the residual is taken from whichever tail keeps precision
    if x < 0:
        resid = 0.5 * math.erfc(-x / math.sqrt(2.0)) - q
    else:
        resid = (1.0 - q) - 0.5 * math.erfc(x / math.sqrt(2.0))
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return x - resid / pdf


# --------------------------------------------------------------------------
# unit hypersphere

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@lru_cache(maxsize=64)
def _deterministic_sphere(n_p: int, dim: int) -> np.ndarray:
    k = np.arange(n_p)
    if dim == 1:
        pts = np.where(k % 2 == 0, 1.0, -1.0)[:, None]
    elif dim == 2:
        ang = 2.0 * np.pi * k / n_p
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
    else:
        z = 1.0 - (2.0 * k + 1.0) / n_p
        r = np.sqrt(1.0 - z * z)
        ang = _GOLDEN_ANGLE * k
        pts = np.column_stack([r * np.cos(ang), r * np.sin(ang), z])
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    pts.setflags(write=False)
    return pts


def construct_unit_hypersphere(n_p: int, dim: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """``n_p`` points of unit norm in ``dim`` dimensions, shape (n_p, dim).

    Deterministic for dim <= 3 (antipodal pair, circle, Fibonacci sphere).
    Higher dimensions fall back to normalized Gaussian draws from ``rng``.
    """
    if n_p < 1 or dim < 1:
        raise ConfigurationError("n_p and dim must both be >= 1")
    if dim <= 3:
        return _deterministic_sphere(int(n_p), int(dim))
    if rng is None:
        raise ConfigurationError("an rng is required for hyperspheres with dim >= 4")
    pts = rng.standard_normal((n_p, dim))
    norms = np.linalg.norm(pts, axis=1, keepdims=True)
    while np.any(norms == 0.0):  # pragma: no cover - measure zero
        bad = norms[:, 0] == 0.0
        pts[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
    return pts / norms


# --------------------------------------------------------------------------
# lattices


class Lattice:
    """Finite node set built from two parents.

    Nodes are produced on demand by index so a crossover that stops at the
    first feasible node never pays for the rest; ``nodes`` materializes the
    whole set.  ``anchors`` lists node indices that reproduce a parent.
    """

    anchors: tuple[int, ...] = ()

    def __len__(self) -> int:
        raise NotImplementedError

    def node(self, k: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def nodes(self) -> np.ndarray:
        return np.array([self.node(k) for k in range(len(self))])


class UniformLattice(Lattice):
    """Cartesian grid with ``n_p`` levels per gene between parents ``a`` and ``b``."""

    def __init__(self, a: np.ndarray, b: np.ndarray, n_p: int, wraps: Sequence[Wrap] = ()):
        self.a, self.b = a, b
        self.step = _difference(a, b, wraps)
        self.n_p = n_p
        self.dim = a.size
        self.wraps = tuple(wraps) + (None,) * (self.dim - len(wraps))
        self.anchors = (0, len(self) - 1)

    def __len__(self) -> int:
        return self.n_p ** self.dim

    def level(self, i: int, j: int) -> float:
        if j == 0:
            return float(self.a[i])
        if j == self.n_p - 1:
            return float(self.b[i])
        v = self.a[i] + (j / (self.n_p - 1)) * self.step[i]
        w = self.wraps[i]
        return float(w.normalize(v)) if w is not None else float(v)

    @property
    def levels(self) -> np.ndarray:
        """(N, n_p) coordinate arrays; row i holds gene i's levels."""
        return np.array([[self.level(i, j) for j in range(self.n_p)] for i in range(self.dim)])

    def node(self, k: int) -> np.ndarray:
        out = np.empty(self.dim)
        k = int(k)
        for i in range(self.dim - 1, -1, -1):
            k, j = divmod(k, self.n_p)
            out[i] = self.level(i, j)
        return out

    @property
    def nodes(self) -> np.ndarray:
        grids = np.meshgrid(*self.levels, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


class GaussLattice(Lattice):
    def __init__(self, parent: np.ndarray, gammas: np.ndarray, sphere: np.ndarray, sample_point: SamplePoint):
        self.parent = parent
        self.gammas = gammas  # (n_q,) scalar radii or (n_q, N) per-gene scales
        self.sphere = sphere  # (n_p, N)
        self.sample_point = sample_point
        self.n_q, self.n_p = len(gammas), len(sphere)
        self.anchors = (len(self) - 1,)

    def __len__(self) -> int:
        return self.n_p * self.n_q + 1

    def node(self, k: int) -> np.ndarray:
        if k == len(self) - 1:
            return self.parent.copy()
        i, j = divmod(int(k), self.n_p)
        return np.asarray(self.sample_point(self.parent, self.gammas[i], self.sphere[j]), dtype=float)

    @property
    def nodes(self) -> np.ndarray:
        gamma = np.repeat(self.gammas, self.n_p, axis=0)  # shell-major order
        shells = self.sample_point(self.parent, gamma, np.tile(self.sphere, (self.n_q, 1)))
        return np.vstack([np.atleast_2d(shells), self.parent[None, :]])


def build_uniform_lattice(a, b, n_p: int, wraps: Sequence[Wrap] = ()) -> UniformLattice:
    """Full Cartesian grid of ``n_p`` evenly spaced levels per linked gene.

    Level 1 is parent ``a`` and level ``n_p`` is parent ``b``; periodic genes
    interpolate along the shorter arc.
    """
    if n_p < 2:
        raise ConfigurationError(f"uniform lattice needs n_p >= 2, got {n_p}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("parents must have equal dimension")
    return UniformLattice(a, b, n_p, wraps)


def euclidean_sample_point(wraps: Sequence[Wrap] = ()) -> SamplePoint:
    """SamplePoint for genes living in a flat space: ``parent + gamma * s``.

    ``s`` is one direction (N,) or a stack (M, N); ``gamma`` is a scalar or
    per-gene (N,) scale, or one row per direction when ``s`` is stacked.
    """

    def sample(parent, gamma, s):
        gamma = np.asarray(gamma, dtype=float)
        s = np.asarray(s, dtype=float)
        if s.ndim == 2 and gamma.ndim == 1:
            gamma = gamma[:, None]
        return _normalize(np.asarray(parent, dtype=float) + gamma * s, wraps)

    return sample


def gamma_scale(separation, q: float):
    """Hypersphere scale at quantile ``q`` with the three-sigma convention."""
    return np.abs(np.asarray(separation, dtype=float) / 3.0 * probit(q))


@lru_cache(maxsize=64)
def _shell_probits(n_q: int) -> np.ndarray:
    out = np.array([abs(probit(i / (n_q + 1))) for i in range(1, n_q + 1)])
    out.setflags(write=False)
    return out


def build_gauss_lattice(
    a,
    b,
    n_p: int,
    n_q: int,
    sample_point: SamplePoint | None = None,
    rng: np.random.Generator | None = None,
    separation: Callable[[np.ndarray, np.ndarray], "float | np.ndarray"] | None = None,
    wraps: Sequence[Wrap] = (),
) -> GaussLattice:
    """Concentric hypersphere shells around parent ``a``.

    Shell ``i`` (1..n_q) has radius ``|a - b| / 3 * |probit(i / (n_q + 1))|``
    and carries ``n_p`` nodes.  Parent ``a`` is appended as the final node;
    parent ``b`` only sets the scale and is never a node.

    ``separation`` returns either a per-gene vector (default: wrapped absolute
    difference) or a scalar for genes sharing one metric, such as the central
    angle between two lat-lon points.
    """
    if n_p < 1 or n_q < 1:
        raise ConfigurationError(f"gauss lattice needs n_p, n_q >= 1, got {n_p}, {n_q}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("parents must have equal dimension")
    if separation is None:
        delta = np.abs(_difference(a, b, wraps))
    else:
        delta = np.asarray(separation(a, b), dtype=float)
    if sample_point is None:
        sample_point = euclidean_sample_point(wraps)
    sphere = construct_unit_hypersphere(n_p, a.size, rng)
    radii = _shell_probits(n_q) / 3.0
    gammas = radii * delta if delta.ndim == 0 else radii[:, None] * delta[None, :]
    return GaussLattice(a, gammas, sphere, sample_point)


@dataclass(frozen=True)
class UniformBuilder:
    n_p: int
    wraps: tuple = ()

    def __call__(self, a, b, rng=None) -> Lattice:
        return build_uniform_lattice(a, b, self.n_p, self.wraps)


@dataclass(frozen=True)
class GaussBuilder:
    n_p: int
    n_q: int
    sample_point: SamplePoint | None = None
    separation: Callable | None = None
    wraps: tuple = ()

    def __call__(self, a, b, rng=None) -> Lattice:
        return build_gauss_lattice(a, b, self.n_p, self.n_q, self.sample_point, rng,
                                   self.separation, self.wraps)


def lattice_crossover(a, b, builder, feasible: Feasibility, rng: np.random.Generator,
                      check_parents: bool = True) -> np.ndarray:
    """Offspring for parent ``a``: first feasible node of the shuffled lattice.

    Call again with the parents swapped for the second child.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("parents must have equal dimension")
    if check_parents and not (feasible(a) and feasible(b)):
        raise ValueError("lattice crossover requires feasible parents")
    lattice = builder(a, b, rng)
    for k in rng.permutation(len(lattice)):
        node = lattice.node(k)
        if feasible(node):
            return node
    # unreachable with feasible anchors; kept so a bad predicate cannot leak nodes
    return lattice.node(lattice.anchors[0])


# --------------------------------------------------------------------------
# mutation


@dataclass
class MutationPool:
    """Precomputed feasible linked-allele vectors for advance-sampling mutation."""

    entries: np.ndarray
    preempted: np.ndarray = None
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.entries = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if self.preempted is None:
            self.preempted = np.zeros(len(self.entries), dtype=bool)
        self.preempted = np.asarray(self.preempted, dtype=bool)
        if len(self.preempted) != len(self.entries):
            raise ValueError("preempted flags must align with entries")
        if not self.names:
            self.names = tuple(f"g{i}" for i in range(self.entries.shape[1]))

    def __len__(self) -> int:
        return len(self.entries) if self.entries.size else 0

    @classmethod
    def sample(cls, sampler, feasible: Feasibility, size: int, rng: np.random.Generator,
               preempted=(), names=(), max_draws: int | None = None) -> "MutationPool":
        """Rejection-sample ``size`` feasible vectors, then append preempted rows."""
        rows = []
        max_draws = max_draws or 1000 * max(size, 1)
        draws = 0
        while len(rows) < size and draws < max_draws:
            x = np.asarray(sampler(rng), dtype=float)
            draws += 1
            if feasible(x):
                rows.append(x)
        extra = [np.asarray(p, dtype=float) for p in preempted]
        for p in extra:
            if not feasible(p):
                raise ConfigurationError(f"preempted entry {p.tolist()} is infeasible")
        if not rows and not extra:
            raise ConfigurationError("no feasible entries found for mutation pool")
        entries = np.array(rows + extra)
        flags = np.r_[np.zeros(len(rows), bool), np.ones(len(extra), bool)]
        return cls(entries, flags, tuple(names))

    def validate(self, feasible: Feasibility) -> None:
        if len(self) == 0:
            raise ConfigurationError("mutation pool is empty")
        bad = [i for i, x in enumerate(self.entries) if not feasible(x)]
        if bad:
            raise ConfigurationError(f"mutation pool rows {bad[:5]} violate the constraint")

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(self.names) + ["preempted"])
            for row, flag in zip(self.entries, self.preempted):
                w.writerow([repr(float(v)) for v in row] + [str(bool(flag)).lower()])

    @classmethod
    def from_csv(cls, path) -> "MutationPool":
        path = Path(path)
        try:
            fh = path.open(newline="")
        except OSError as exc:
            raise ConfigurationError(f"cannot open mutation pool {path}: {exc.strerror}") from exc
        with fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[-1].strip().lower() != "preempted":
                raise ConfigurationError(f"{path}: header must end with a 'preempted' column")
            rows, flags = [], []
            for lineno, rec in enumerate(reader, start=2):
                if not rec or not "".join(rec).strip():
                    continue
                if len(rec) != len(header):
                    raise ConfigurationError(f"{path}:{lineno}: expected {len(header)} fields")
                rows.append([float(v) for v in rec[:-1]])
                flags.append(rec[-1].strip().lower() in ("1", "true", "yes"))
        if not rows:
            raise ConfigurationError(f"{path}: mutation pool is empty")
        return cls(np.array(rows), np.array(flags), tuple(h.strip() for h in header[:-1]))


def mutate_advance_sampling(group, pool: MutationPool, rng: np.random.Generator) -> np.ndarray:
    """Replace the linked alleles with a uniformly drawn pool entry."""
    if pool is None or len(pool) == 0:
        raise ConfigurationError("advance-sampling mutation needs a nonempty pool")
    return pool.entries[rng.integers(len(pool))].copy()


def mutate_realtime_resample(group, domain_sampler, feasible: Feasibility, rng: np.random.Generator,
                             max_attempts: int = 1000) -> np.ndarray:
    """Resample the whole group until feasible; give back ``group`` on exhaustion."""
    for _ in range(max_attempts):
        x = np.asarray(domain_sampler(rng), dtype=float)
        if feasible(x):
            return x
    return np.array(group, dtype=float, copy=True)
