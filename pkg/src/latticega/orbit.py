"""Circular-orbit ground tracks, station access and Hohmann cost.

Ground tracks use a sinusoid model: latitude swings between +/- inclination
once per orbit while longitude drifts with the difference between orbital and
Earth rotation rates.  Times are in hours, angles in degrees, lengths in km.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .geo import GeoPoint, LONGITUDE, central_angle

MU = 398600.435507  # km^3/s^2
R_EARTH = 6378.137  # km
A_PARK = R_EARTH + 200.0
LIMB_CUT = 10.0  # deg removed from the visible arc
DAY_HOURS = 24.0
MIN_ALTITUDE = R_EARTH / math.cos(math.radians(LIMB_CUT)) - R_EARTH  # psi = 0 here (~98.4 km)

# altitude range (km, exclusive), inclination range (deg), inclusive flags for inclination
ORBIT_BANDS = (
    (350.0, 2000.0, 45.0, 60.0, True),
    (10185.0, 10585.0, 45.0, 60.0, False),
    (13729.0, 14129.0, 45.0, 60.0, False),
    (20032.0, 20432.0, 45.0, 60.0, False),
    (35000.0, 36500.0, None, 15.0, True),
)
ALTITUDE_DOMAIN = (350.0, 36500.0)

GROUND_STATIONS = (
    ("Blacksburg, USA", GeoPoint(37.226754, -80.432546)),
    ("Geneva, CHE", GeoPoint(46.308158, 6.134166)),
    ("Winton, AUS", GeoPoint(-22.485683, 143.167884)),
)

# (semi-major axis km, inclination deg, note)
PREEMPTED_ALLELES = (
    (6828.0, 53.0, "Mock Starlink orbit"),
    (16763.0, 52.0, "Semi-sync orbit (4 revs/day)"),
    (20307.0, 57.0, "Semi-sync orbit (3 revs/day)"),
    (26560.0, 55.0, "Mock GPS orbit"),
    (42164.0, 0.0, "Standard GEO orbit"),
)


class OrbitElements(NamedTuple):
    a: float
    inc: float
    raan: float


@dataclass(frozen=True)
class Scenario:
    stations: Sequence = GROUND_STATIONS
    duration: float = 168.0  # hours
    step: float = 1.0  # minutes

    def __post_init__(self):
        if self.duration <= 0 or self.step <= 0:
            raise ValueError("duration and step must be positive")
        n = self.duration * 60.0 / self.step
        if abs(n - round(n)) > 1e-9:
            raise ValueError("step must divide the scenario duration")

    @property
    def times(self) -> np.ndarray:
        n = int(round(self.duration * 60.0 / self.step))
        return np.arange(n) * (self.step / 60.0)


def orbit_period(a: float) -> float:
    """Orbital period in hours, ``2 pi sqrt(a^3 / mu)``."""
    if a <= 0:
        raise ValueError(f"semi-major axis must be positive, got {a}")
    return 2.0 * math.pi * math.sqrt(a ** 3 / MU) / 3600.0


def semi_major_axis_for_period(hours: float) -> float:
    return (MU * (hours * 3600.0 / (2.0 * math.pi)) ** 2) ** (1.0 / 3.0)


def sat_latitude(elements: OrbitElements, t):
    return elements.inc * np.sin(2.0 * np.pi * np.asarray(t) / orbit_period(elements.a))


def sat_longitude(elements: OrbitElements, t):
    t = np.asarray(t, dtype=float)
    return LONGITUDE.normalize(360.0 * (t / orbit_period(elements.a) - t / DAY_HOURS) + elements.raan)


def apparent_disk_radius(h: float) -> float:
    """Angular radius (deg) of the resolvable ground disk at altitude ``h`` km."""
    if h <= 99.0:
        raise ValueError(f"apparent-disk model is invalid at or below 99 km (h={h})")
    return math.degrees(math.acos(R_EARTH / (R_EARTH + h))) - LIMB_CUT


def instantaneous_access(station: Sequence[float], sub_point: Sequence[float], psi: float) -> bool:
    angle = math.degrees(float(central_angle(station[0], station[1], sub_point[0], sub_point[1])))
    return angle < psi


def total_access(constellation: Sequence[OrbitElements], scenario: Scenario = Scenario()) -> float:
    """Fraction of (station, time step) samples seen by at least one satellite."""
    stations = np.array([[s[1][0], s[1][1]] for s in scenario.stations], dtype=float)
    t = scenario.times
    seen = np.zeros((len(stations), len(t)), dtype=bool)
    for el in constellation:
        psi = math.radians(apparent_disk_radius(el.a - R_EARTH))
        lat = sat_latitude(el, t)
        lon = sat_longitude(el, t)
        ang = central_angle(stations[:, 0:1], stations[:, 1:2], lat[None, :], lon[None, :])
        seen |= ang < psi
    return float(seen.sum()) / seen.size


def hohmann_delta_v(a: float) -> float:
    """Two-burn Hohmann cost (km/s) from the circular parking orbit up to radius ``a``."""
    if a < A_PARK:
        raise ValueError(f"target radius {a} km is below the parking orbit {A_PARK} km")
    at = 0.5 * (A_PARK + a)
    return (math.sqrt(2 * MU / A_PARK - MU / at) - math.sqrt(MU / A_PARK)
            + math.sqrt(MU / a) - math.sqrt(2 * MU / a - MU / at))


def total_delta_v(constellation: Sequence[OrbitElements]) -> float:
    return sum(hohmann_delta_v(el.a) for el in constellation)


def altitude_in_band(h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    ok = np.zeros(h.shape, dtype=bool)
    for lo, hi, *_ in ORBIT_BANDS:
        ok |= (h > lo) & (h < hi)
    return ok


def is_feasible_orbit(h: float, inc: float) -> bool:
    """Altitude band membership with the band's inclination window; inclination is never negative."""
    if inc < 0:
        return False
    for lo, hi, ilo, ihi, closed in ORBIT_BANDS:
        if not lo < h < hi:
            continue
        if ilo is None:
            return inc <= ihi
        if closed:
            return ilo <= inc <= ihi
        return ilo < inc < ihi
    return False


def nearest_feasible_orbit(a: float, inc: float, margin: float = 1e-6) -> tuple[float, float]:
    """Repair for (a, inc): closest band point in range-normalized distance."""
    h = a - R_EARTH
    span_h = ALTITUDE_DOMAIN[1] - ALTITUDE_DOMAIN[0]
    best, best_d = None, math.inf
    for lo, hi, ilo, ihi, _ in ORBIT_BANDS:
        hh = min(max(h, lo + margin * span_h), hi - margin * span_h)
        lo_i = 0.0 if ilo is None else ilo + margin * 90
        ii = min(max(inc, lo_i), ihi - (0 if ilo is None else margin * 90))
        d = ((hh - h) / span_h) ** 2 + ((ii - inc) / 90.0) ** 2
        if d < best_d:
            best, best_d = (hh + R_EARTH, ii), d
    return best
