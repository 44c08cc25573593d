"""Spherical geometry, land masks and gridded fields for lat-lon search.

Angles cross the API in degrees; central angles come back in radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .lattice import Clamped, Periodic

LATITUDE = Clamped(-90.0, 90.0)
LONGITUDE = Periodic(-180.0, 180.0)
LATLON_WRAPS = (LATITUDE, LONGITUDE)

NATURAL_SKY_LUMINANCE = 0.236  # mcd/m^2
LUMINANCE_REFERENCE = 1.08e8  # mcd/m^2 at 0 mag/arcsec^2


class GeoPoint(NamedTuple):
    lat: float
    lon: float


def wrap_point(lat: float, lon: float) -> GeoPoint:
    return GeoPoint(float(LATITUDE.normalize(lat)), float(LONGITUDE.normalize(lon)))


def versine(x):
    """1 - cos(x), evaluated as 2 sin^2(x/2) to keep precision for small x."""
    h = np.sin(0.5 * np.asarray(x, dtype=float))
    return 2.0 * h * h


def central_angle(lat1, lon1, lat2, lon2):
    """Vectorized haversine central angle (radians) between degree coordinates."""
    p1 = np.radians(lat1)
    p2 = np.radians(lat2)
    dlon = np.radians(np.asarray(lon2, dtype=float) - np.asarray(lon1, dtype=float))
    hav = 0.5 * (versine(p2 - p1) + np.cos(p1) * np.cos(p2) * versine(dlon))
    return 2.0 * np.arcsin(np.sqrt(np.clip(hav, 0.0, 1.0)))


def haversine_angle(p1: Sequence[float], p2: Sequence[float]) -> float:
    """Central angle (radians) between two (lat, lon) points; scalar path of central_angle."""
    phi1 = math.radians(p1[0])
    phi2 = math.radians(p2[0])
    a = math.sin(0.5 * (phi2 - phi1))
    b = math.sin(0.5 * math.radians(p2[1] - p1[1]))
    hav = a * a + math.cos(phi1) * math.cos(phi2) * b * b
    return 2.0 * math.asin(math.sqrt(min(max(hav, 0.0), 1.0)))


def sample_point_latlon(parent: Sequence[float], gamma, s) -> np.ndarray:
    """Point at central angle ``gamma`` (radians) from ``parent`` along direction ``s``.

    The latitude step is ``gamma * s[0]``; the longitude step is recovered by
    inverting the haversine and takes the sign of ``s[1]``.  ``s`` may be one
    direction of shape (2,) or a stack of shape (n, 2), with ``gamma`` a
    scalar or one value per row.
    """
    s = np.asarray(s, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if s.ndim == 1:
        return _sample_point_scalar(parent, float(gamma.reshape(-1)[0]), s[0], s[1])
    if gamma.ndim == 2:  # per-gene scale from a vector separation; lat-lon genes share one
        gamma = gamma[:, 0]
    phi_p = math.radians(parent[0])
    phi_o = np.clip(phi_p + gamma * s[:, 0], -math.pi / 2, math.pi / 2)
    denom = np.cos(phi_o) * math.cos(phi_p)
    # cos(dphi) - cos(gamma), written as a product to stay accurate for small steps
    dphi = phi_o - phi_p
    num = 2.0 * np.sin(0.5 * (gamma + dphi)) * np.sin(0.5 * (gamma - dphi))
    pole = np.abs(denom) < 1e-12
    ver = np.where(pole, 0.0, num / np.where(pole, 1.0, denom))
    dlon = 2.0 * np.arcsin(np.sqrt(np.clip(ver, 0.0, 2.0) / 2.0))
    lon = LONGITUDE.normalize(parent[1] + np.sign(s[:, 1]) * np.degrees(dlon))
    return np.column_stack([np.degrees(phi_o), lon])


def _sample_point_scalar(parent, gamma: float, s1: float, s2: float) -> np.ndarray:
    phi_p = math.radians(parent[0])
    phi_o = min(max(phi_p + gamma * s1, -math.pi / 2), math.pi / 2)
    denom = math.cos(phi_o) * math.cos(phi_p)
    dphi = phi_o - phi_p
    if abs(denom) < 1e-12:
        dlon = 0.0
    else:
        ver = 2.0 * math.sin(0.5 * (gamma + dphi)) * math.sin(0.5 * (gamma - dphi)) / denom
        dlon = 2.0 * math.asin(math.sqrt(min(max(ver, 0.0), 2.0) / 2.0))
    sign = float(np.sign(s2))
    lon = parent[1] + sign * math.degrees(dlon)
    lon -= 360.0 * math.ceil((lon - 180.0) / 360.0)
    return np.array([math.degrees(phi_o), lon])


def latlon_separation(a, b) -> float:
    """Scalar parent separation for the gauss lattice: central angle in radians."""
    return haversine_angle(a, b)


# --------------------------------------------------------------------------
# land mask


def _unwrap_ring(lons: np.ndarray) -> np.ndarray:
    steps = LONGITUDE.difference(lons[:-1], lons[1:])
    return np.concatenate([[lons[0]], lons[0] + np.cumsum(steps)])


class LandMask:
    """Polygonal feasibility region; even-odd rule across all rings.

    Edges are bucketed by latitude band so a query only visits the edges
    whose latitude span covers it.
    """

    BAND = 1.0  # degrees of latitude per edge bucket
    TOL = 1e-12

    def __init__(self, rings: Sequence[Sequence[Sequence[float]]]):
        if not rings:
            raise ValueError("a land mask needs at least one ring")
        self.rings: list[np.ndarray] = []
        self._rings = []
        for ring in rings:
            r = np.asarray(ring, dtype=float)  # (lat, lon) rows
            if r.ndim != 2 or r.shape[1] != 2 or len(r) < 3:
                raise ValueError("each ring needs at least 3 (lat, lon) vertices")
            if np.array_equal(r[0], r[-1]):
                r = r[:-1]
            self.rings.append(r)
            lon = _unwrap_ring(r[:, 1])
            lat = r[:, 0]
            x1, y1 = lon, lat
            x2, y2 = np.roll(lon, -1), np.roll(lat, -1)
            # closing edge may cross the seam; unwrap it onto the ring's branch
            x2[-1] = x1[-1] + LONGITUDE.difference(x1[-1], x2[-1])
            bbox = (min(x1.min(), x2.min()), max(x1.max(), x2.max()), lat.min(), lat.max())
            buckets: dict[int, list[tuple[float, float, float, float]]] = {}
            for e in zip(x1.tolist(), y1.tolist(), x2.tolist(), y2.tolist()):
                lo = math.floor((min(e[1], e[3]) - self.TOL) / self.BAND)
                hi = math.floor((max(e[1], e[3]) + self.TOL) / self.BAND)
                for k in range(lo, hi + 1):
                    buckets.setdefault(k, []).append(e)
            self._rings.append((bbox, buckets))
        self.boundary_points = np.vstack(self.rings)

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(lat_min, lat_max, lon_min, lon_max) in degrees over all vertices."""
        b = self.boundary_points
        return b[:, 0].min(), b[:, 0].max(), b[:, 1].min(), b[:, 1].max()

    @classmethod
    def _ring_test(cls, ring, lat: float, lon: float) -> tuple[bool, bool]:
        """(on_boundary, odd_crossings) for one ring."""
        (xmin, xmax, ymin, ymax), buckets = ring
        if lat < ymin or lat > ymax:
            return False, False
        for shift in (0.0, 360.0, -360.0):
            if xmin <= lon + shift <= xmax:
                x = lon + shift
                break
        else:
            return False, False
        tol = cls.TOL
        odd = False
        for x1, y1, x2, y2 in buckets.get(math.floor(lat / cls.BAND), ()):
            dx, dy = x2 - x1, y2 - y1
            if (min(x1, x2) - tol <= x <= max(x1, x2) + tol and min(y1, y2) - tol <= lat <= max(y1, y2) + tol
                    and abs(dx * (lat - y1) - dy * (x - x1)) <= tol * (1.0 + abs(dx) + abs(dy))):
                return True, False
            if (y1 > lat) != (y2 > lat) and x1 + (lat - y1) * dx / dy > x:
                odd = not odd
        return False, odd

    def contains(self, lat: float, lon: float) -> bool:
        lat, lon = float(lat), float(lon)
        inside = False
        for ring in self._rings:
            on_edge, odd = self._ring_test(ring, lat, lon)
            if on_edge:
                return True
            inside ^= odd
        return inside

    def __call__(self, x) -> bool:
        return self.contains(x[0], x[1])


def contains(mask: LandMask, p: Sequence[float]) -> bool:
    return mask.contains(p[0], p[1])


def repair_to_boundary(p: Sequence[float], mask: LandMask) -> GeoPoint:
    """Feasible points pass through; others snap to the nearest boundary vertex."""
    if mask.contains(p[0], p[1]):
        return GeoPoint(float(p[0]), float(p[1]))
    b = mask.boundary_points
    i = int(np.argmin(central_angle(b[:, 0], b[:, 1], p[0], p[1])))
    return GeoPoint(float(b[i, 0]), float(b[i, 1]))


# --------------------------------------------------------------------------
# gridded fields and objectives


@dataclass(frozen=True)
class GriddedField:
    lat0: float
    lon0: float
    dlat: float
    dlon: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise ValueError("grid values must be a matrix with at least 2x2 nodes")
        if self.dlat <= 0 or self.dlon <= 0:
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def same_grid(self, other: "GriddedField") -> bool:
        return (self.lat0, self.lon0, self.dlat, self.dlon, self.shape) == \
            (other.lat0, other.lon0, other.dlat, other.dlon, other.shape)


def interpolate(field: GriddedField, p: Sequence[float]) -> float:
    """Bilinear interpolation; raises ValueError outside the grid."""
    nrows, ncols = field.shape
    fi = (p[0] - field.lat0) / field.dlat
    fj = (p[1] - field.lon0) / field.dlon
    eps = 1e-9
    if not (-eps <= fi <= nrows - 1 + eps and -eps <= fj <= ncols - 1 + eps):
        raise ValueError(f"point {tuple(p)} lies outside the grid extent")
    i0 = min(max(int(math.floor(fi)), 0), nrows - 2)
    j0 = min(max(int(math.floor(fj)), 0), ncols - 2)
    ti = min(max(fi - i0, 0.0), 1.0)
    tj = min(max(fj - j0, 0.0), 1.0)
    v = field.values
    return float((1 - ti) * ((1 - tj) * v[i0, j0] + tj * v[i0, j0 + 1])
                 + ti * ((1 - tj) * v[i0 + 1, j0] + tj * v[i0 + 1, j0 + 1]))


def luminance_to_brightness(luminance: float) -> float:
    """Artificial luminance (mcd/m^2) to sky brightness (mag/arcsec^2), natural floor added."""
    if luminance < 0:
        raise ValueError(f"luminance must be nonnegative, got {luminance}")
    return -2.5 * math.log10((luminance + NATURAL_SKY_LUMINANCE) / LUMINANCE_REFERENCE)


def mean_cloud_cover(monthly: Sequence[GriddedField], p: Sequence[float]) -> float:
    if len(monthly) != 12:
        raise ValueError(f"expected 12 monthly fields, got {len(monthly)}")
    return sum(interpolate(f, p) for f in monthly) / 12.0


def min_station_angle(p: Sequence[float], stations) -> float:
    """Smallest central angle from ``p`` to any station; ``stations`` holds (name, point) pairs."""
    if not stations:
        raise ValueError("station list is empty")
    pts = np.array([[s[1][0], s[1][1]] for s in stations], dtype=float)
    return float(np.min(central_angle(pts[:, 0], pts[:, 1], p[0], p[1])))
