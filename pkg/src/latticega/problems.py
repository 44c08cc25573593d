"""Built-in problems: land-constrained target search, telescope siting, constellation design."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import geo, orbit
from .engine import (
    Chromosome,
    ChromosomeLayout,
    LinkedGeneGroup,
    Problem,
    VariableLength,
)
from .errors import ConfigurationError, InitializationError
from .lattice import MutationPool, Periodic


def latlon_sampler(rng: np.random.Generator) -> np.ndarray:
    return np.array([rng.uniform(-90.0, 90.0), rng.uniform(-180.0, 180.0)])


def land_group(mask: geo.LandMask, pool: MutationPool | None = None) -> LinkedGeneGroup:
    """(lat, lon) genes constrained to ``mask``."""
    return LinkedGeneGroup(
        indices=(0, 1),
        feasible=mask,
        sampler=latlon_sampler,
        wraps=geo.LATLON_WRAPS,
        sample_point=geo.sample_point_latlon,
        separation=geo.latlon_separation,
        pool=pool,
        repair=lambda x: np.array(geo.repair_to_boundary(x, mask)),
        name="latlon",
    )


def land_pool(mask: geo.LandMask, size: int, rng: np.random.Generator) -> MutationPool:
    return MutationPool.sample(latlon_sampler, mask, size, rng, names=("lat", "lon"))


def sample_land_point(mask: geo.LandMask, rng: np.random.Generator, max_draws: int = 100_000) -> geo.GeoPoint:
    """Uniform draw over the mask's bounding box, retried until on land."""
    lat_lo, lat_hi, lon_lo, lon_hi = mask.bounding_box()
    for _ in range(max_draws):
        p = (rng.uniform(lat_lo, lat_hi), rng.uniform(lon_lo, lon_hi))
        if mask.contains(*p):
            return geo.GeoPoint(*p)
    raise InitializationError("land mask has no reachable feasible area")


class GeoTargetProblem(Problem):
    """Single objective: central angle (radians) to a hidden land optimum."""

    n_objectives = 1
    objective_names = ("angle",)
    gene_names = ("lat", "lon")

    def __init__(self, mask: geo.LandMask, optimum: Sequence[float], pool: MutationPool | None = None):
        self.mask = mask
        self.optimum = geo.GeoPoint(float(optimum[0]), float(optimum[1]))
        self.layout = ChromosomeLayout(2, (land_group(mask, pool),))

    def evaluate(self, chrom: Chromosome):
        g = chrom.genes
        return (geo.haversine_angle(g, self.optimum),)


class AstroProblem(Problem):
    """Telescope siting: dark sky, clear sky, close to an operator site.

    Objectives (all minimized): negated sky brightness in mag/arcsec^2 (a
    darker sky has a larger magnitude), mean yearly cloud fraction, and the
    central angle to the nearest station.
    """

    n_objectives = 3
    objective_names = ("neg_sky_brightness", "cloud_cover", "station_angle")
    gene_names = ("lat", "lon")

    def __init__(self, mask: geo.LandMask, luminance: geo.GriddedField,
                 clouds: Sequence[geo.GriddedField], stations, pool: MutationPool | None = None):
        if len(clouds) != 12:
            raise ConfigurationError(f"astro problem needs 12 monthly cloud grids, got {len(clouds)}")
        if not all(c.same_grid(clouds[0]) for c in clouds):
            raise ConfigurationError("monthly cloud grids must share one grid")
        if not stations:
            raise ConfigurationError("astro problem needs at least one station")
        self.mask = mask
        self.luminance = luminance
        self.clouds = list(clouds)
        self.stations = list(stations)
        self.layout = ChromosomeLayout(2, (land_group(mask, pool),))

    def evaluate(self, chrom: Chromosome):
        p = chrom.genes
        m = geo.luminance_to_brightness(max(geo.interpolate(self.luminance, p), 0.0))
        return (-m, geo.mean_cloud_cover(self.clouds, p), geo.min_station_angle(p, self.stations))


# --------------------------------------------------------------------------
# constellation design

SLOT_WIDTH = 3  # a, inc, raan
INCLINATION_DOMAIN = (0.0, 60.0)


def orbit_feasible(x) -> bool:
    return orbit.is_feasible_orbit(x[0] - orbit.R_EARTH, x[1])


def orbit_sampler(rng: np.random.Generator) -> np.ndarray:
    h = rng.uniform(*orbit.ALTITUDE_DOMAIN)
    return np.array([orbit.R_EARTH + h, rng.uniform(*INCLINATION_DOMAIN)])


def raan_sampler(rng: np.random.Generator) -> np.ndarray:
    return np.array([rng.uniform(-180.0, 180.0)])


def orbit_pool(size: int, rng: np.random.Generator, preempt: bool = True) -> MutationPool:
    pre = [(a, i) for a, i, _ in orbit.PREEMPTED_ALLELES] if preempt else []
    return MutationPool.sample(orbit_sampler, orbit_feasible, size, rng, preempted=pre, names=("a", "inc"))


def orbit_repair(x) -> np.ndarray:
    return np.array(orbit.nearest_feasible_orbit(x[0], x[1]))


class OrbitProblem(Problem):
    """Variable-length constellation (1-3 circular orbits): maximize access, minimize delta-v."""

    n_objectives = 2
    objective_names = ("neg_access", "delta_v")

    def __init__(self, scenario: orbit.Scenario = orbit.Scenario(), pool: MutationPool | None = None,
                 max_slots: int = 3):
        self.scenario = scenario
        self.max_slots = max_slots
        if pool is not None:
            pool.validate(orbit_feasible)
        self.pool = pool
        groups = []
        for s in range(max_slots):
            base = s * SLOT_WIDTH
            groups.append(LinkedGeneGroup(
                indices=(base, base + 1), feasible=orbit_feasible, sampler=orbit_sampler,
                pool=pool, repair=orbit_repair, name=f"orbit{s + 1}",
            ))
            groups.append(LinkedGeneGroup(
                indices=(base + 2,), sampler=raan_sampler, wraps=(Periodic(-180.0, 180.0),),
                name=f"raan{s + 1}",
            ))
        self.layout = ChromosomeLayout(max_slots * SLOT_WIDTH, tuple(groups),
                                       VariableLength(1, max_slots, SLOT_WIDTH))

    def constellation(self, chrom: Chromosome) -> list[orbit.OrbitElements]:
        out = []
        for s, on in enumerate(chrom.active):
            if on:
                a, inc, raan = chrom.genes[s * SLOT_WIDTH:(s + 1) * SLOT_WIDTH]
                out.append(orbit.OrbitElements(float(a), float(inc), float(raan)))
        return out

    def evaluate(self, chrom: Chromosome):
        sats = self.constellation(chrom)
        return (-orbit.total_access(sats, self.scenario), orbit.total_delta_v(sats))

    def export_header(self) -> list[str]:
        slots = [f"{g}{s + 1}" for s in range(self.max_slots) for g in ("a", "inc", "raan")]
        return ["n_sats", *slots, "access", "delta_v"]

    def export_row(self, ind) -> list:
        chrom = ind.chromosome
        row: list = [int(chrom.active.sum())]
        for s, on in enumerate(chrom.active):
            vals = chrom.genes[s * SLOT_WIDTH:(s + 1) * SLOT_WIDTH]
            row += [float(v) for v in vals] if on else [None] * SLOT_WIDTH
        neg_access, dv = ind.objectives
        return row + [-neg_access + 0.0, dv]


def feasible_altitude_fraction(n: int, rng: np.random.Generator) -> float:
    h = rng.uniform(*orbit.ALTITUDE_DOMAIN, size=n)
    return float(np.mean(orbit.altitude_in_band(h)))
