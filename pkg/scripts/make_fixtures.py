"""Regenerate the synthetic data files bundled in src/latticega/data.

Two rectangular continents (one straddling the antimeridian) plus a small
island, a light-pollution grid built from Gaussian "city" bumps, twelve
monthly cloud grids varying with latitude and season, and a station list.
"""
from pathlib import Path

import numpy as np

from latticega import io
from latticega.geo import GriddedField, central_angle

DATA = Path(__file__).resolve().parents[1] / "src" / "latticega" / "data"

CONTINENTS = [
    # lat_lo, lat_hi, lon_lo, lon_hi (lon_hi may exceed 180: wraps)
    (10.0, 60.0, -130.0, -60.0),
    (-45.0, 15.0, 140.0, 210.0),
    (-5.0, 0.0, -30.0, -25.0),
]

CITIES = [
    # lat, lon, peak luminance mcd/m^2, width deg
    (40.7, -74.0, 3000.0, 3.0),
    (34.0, -118.2, 2500.0, 3.0),
    (41.9, -87.6, 1500.0, 2.5),
    (47.6, -122.3, 800.0, 2.0),
    (-33.9, 151.2, 1800.0, 2.5),
    (-37.8, 145.0, 1200.0, 2.5),
    (-27.5, 153.0, 600.0, 2.0),
    (-2.5, -27.5, 50.0, 1.0),
]

STATIONS = [
    ("North Tech", 42.36, -71.09),
    ("Bay University", 37.43, -122.17),
    ("Lakes Institute", 43.07, -89.40),
    ("Harbour College", -33.89, 151.19),
    ("Southern Poly", -37.80, 144.96),
    ("Island Lab", -2.0, -27.0),
]

GRID = dict(lat0=-90.0, lon0=-180.0, dlat=2.0, dlon=2.0)


def rectangle(lat_lo, lat_hi, lon_lo, lon_hi, step=1.0):
    """Counter-clockwise ring with a vertex every ``step`` degrees."""
    def seg(a, b):
        n = max(int(round(abs(b - a) / step)), 1)
        return np.linspace(a, b, n + 1)[:-1]
    ring = [(lat_lo, lon) for lon in seg(lon_lo, lon_hi)]
    ring += [(lat, lon_hi) for lat in seg(lat_lo, lat_hi)]
    ring += [(lat_hi, lon) for lon in seg(lon_hi, lon_lo)]
    ring += [(lat, lon_lo) for lat in seg(lat_hi, lat_lo)]
    return [(lat, ((lon + 180.0) % 360.0) - 180.0 if lon > 180.0 else lon) for lat, lon in ring]


def grid_axes():
    lats = GRID["lat0"] + GRID["dlat"] * np.arange(91)
    lons = GRID["lon0"] + GRID["dlon"] * np.arange(181)
    return np.meshgrid(lats, lons, indexing="ij")


def luminance_field() -> GriddedField:
    lat, lon = grid_axes()
    values = np.zeros_like(lat)
    for clat, clon, peak, width in CITIES:
        d = np.degrees(central_angle(lat, lon, clat, clon))
        values += peak * np.exp(-0.5 * (d / width) ** 2)
    return GriddedField(values=values, **GRID)


def cloud_fields() -> list[GriddedField]:
    lat, lon = grid_axes()
    out = []
    for month in range(12):
        season = np.sin(2 * np.pi * month / 12.0 + np.radians(lon))
        values = 0.55 + 0.25 * np.sin(np.radians(3.0 * lat)) + 0.1 * season
        out.append(GriddedField(values=np.clip(values, 0.0, 1.0), **GRID))
    return out


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    io.write_polygons([rectangle(*c) for c in CONTINENTS], DATA / "synthetic_land.txt")
    io.write_grid(luminance_field(), DATA / "luminance.csv")
    for month, field in enumerate(cloud_fields(), start=1):
        io.write_grid(field, DATA / f"cloud_{month:02d}.csv")
    io.write_stations([(n, (la, lo)) for n, la, lo in STATIONS], DATA / "stations.csv")
    from latticega.orbit import GROUND_STATIONS
    io.write_stations(GROUND_STATIONS, DATA / "ground_stations.csv")
    print(f"wrote fixtures to {DATA}")


if __name__ == "__main__":
    main()
