"""Readers and writers for the plain-text data formats used by the CLI.

* polygon file: one ``lon,lat`` pair per line, rings separated by blank lines
* grid file: header ``lat0,lon0,dlat,dlon,nrows,ncols`` then ``nrows`` CSV rows
* station file: CSV ``name,lat,lon``
* config file: ``key = value`` lines, ``#`` comments
"""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError
from .geo import GeoPoint, GriddedField, LandMask


def _open(path, mode="r"):
    try:
        return Path(path).open(mode, newline="")
    except OSError as exc:
        raise ConfigurationError(f"cannot open {path}: {exc.strerror}") from exc


def read_polygons(path) -> LandMask:
    rings, current = [], []
    with _open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line.startswith("#"):
                continue
            if not line:
                if current:
                    rings.append(current)
                    current = []
                continue
            try:
                lon, lat = (float(v) for v in line.split(","))
            except ValueError:
                raise ConfigurationError(f"{path}:{lineno}: expected 'lon,lat', got {line!r}") from None
            current.append((lat, lon))
    if current:
        rings.append(current)
    if not rings:
        raise ConfigurationError(f"{path}: no polygon rings found")
    try:
        return LandMask(rings)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def write_polygons(rings: Iterable[Sequence[Sequence[float]]], path) -> None:
    """``rings`` hold (lat, lon) vertices; written as lon,lat lines."""
    with _open(path, "w") as fh:
        blocks = ["\n".join(f"{lon:.6f},{lat:.6f}" for lat, lon in ring) for ring in rings]
        fh.write("\n\n".join(blocks) + "\n")


def read_grid(path) -> GriddedField:
    with _open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, [])
        if header and header[0].strip() == "lat0":  # optional names line before the numbers
            header = next(reader, [])
        try:
            lat0, lon0, dlat, dlon, nrows, ncols = (float(v) for v in header)
        except ValueError:
            raise ConfigurationError(f"{path}: grid header must be lat0,lon0,dlat,dlon,nrows,ncols") from None
        try:
            rows = [[float(v) for v in rec] for rec in reader if rec]
        except ValueError:
            raise ConfigurationError(f"{path}: non-numeric grid value") from None
    values = np.array(rows, dtype=float)
    if values.shape != (int(nrows), int(ncols)):
        raise ConfigurationError(f"{path}: expected {int(nrows)}x{int(ncols)} values, got {values.shape}")
    return GriddedField(lat0, lon0, dlat, dlon, values)


def write_grid(field: GriddedField, path) -> None:
    nrows, ncols = field.shape
    with _open(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([field.lat0, field.lon0, field.dlat, field.dlon, nrows, ncols])
        for row in field.values:
            w.writerow([f"{v:.6g}" for v in row])


def read_stations(path) -> list[tuple[str, GeoPoint]]:
    out = []
    with _open(path) as fh:
        reader = csv.reader(fh)
        for lineno, rec in enumerate(reader, start=1):
            if not rec or rec[0].startswith("#"):
                continue
            if lineno == 1 and rec[0].strip().lower() == "name":
                continue
            try:
                name, lat, lon = rec
                out.append((name.strip(), GeoPoint(float(lat), float(lon))))
            except ValueError:
                raise ConfigurationError(f"{path}:{lineno}: expected name,lat,lon") from None
    if not out:
        raise ConfigurationError(f"{path}: station list is empty")
    return out


def write_stations(stations, path) -> None:
    with _open(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "lat", "lon"])
        for name, p in stations:
            w.writerow([name, p[0], p[1]])


# --------------------------------------------------------------------------
# flat key-value config


def read_config(path) -> dict[str, str]:
    out = {}
    with _open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


# --------------------------------------------------------------------------
# exports


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc
    return path


def read_rows(path) -> tuple[list[str], list[dict[str, str]]]:
    with _open(path) as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)
