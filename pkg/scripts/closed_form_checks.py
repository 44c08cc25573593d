"""Closed-form quantities: disk radii, transfer costs, band fraction, the GEO coverage pair."""

import numpy as np

from latticega.orbit import (
    GROUND_STATIONS,
    MIN_ALTITUDE,
    PREEMPTED_ALLELES,
    R_EARTH,
    OrbitElements,
    Scenario,
    altitude_in_band,
    apparent_disk_radius,
    hohmann_delta_v,
    orbit_period,
    semi_major_axis_for_period,
    total_access,
)


def geo_pair(psi, step=0.25):
    """Best pair of equatorial longitudes by grid scan (widest worst-station clearance)."""
    grid = np.arange(-180.0 + step, 180.0 + step / 2, step)
    st = np.radians([[p[0], p[1]] for _, p in GROUND_STATIONS])
    g = np.radians(grid)
    cosang = np.cos(st[:, :1]) * np.cos(g[None, :] - st[:, 1:2])  # sub-point latitude is zero
    ang = np.degrees(np.arccos(np.clip(cosang, -1, 1)))
    worst = np.minimum(ang[:, :, None], ang[:, None, :]).max(axis=0)
    i, j = np.unravel_index(np.argmin(worst), worst.shape)
    return grid[i], grid[j], psi - worst[i, j]


def main():
    print(f"2 psi at 350 km        : {2 * apparent_disk_radius(350.0):.3f} deg")
    print(f"psi at GEO             : {apparent_disk_radius(42164.0 - R_EARTH):.3f} deg")
    print(f"psi = 0 altitude       : {MIN_ALTITUDE:.2f} km")
    print(f"3 x GEO delta-v        : {3 * hohmann_delta_v(42164.0):.4f} km/s")
    print(f"delta-v, 4 revs/day    : {hohmann_delta_v(semi_major_axis_for_period(6.0)):.4f} km/s")
    print(f"GEO period at 42164 km : {orbit_period(42164.0):.4f} h")
    h = np.random.default_rng(0).uniform(350.0, 36500.0, 1_000_000)
    print(f"feasible altitude share: {np.mean(altitude_in_band(h)):.4f}")
    for a, inc, note in PREEMPTED_ALLELES:
        print(f"  {note:<30s} a={a:8.1f} km  T={orbit_period(a):6.3f} h  dV={hohmann_delta_v(a):.3f} km/s")

    a = semi_major_axis_for_period(24.0)
    psi = apparent_disk_radius(a - R_EARTH)
    lon1, lon2, margin = geo_pair(psi)
    access = total_access([OrbitElements(a, 0.0, lon1), OrbitElements(a, 0.0, lon2)], Scenario())
    print(f"GEO pair at {lon1:g}, {lon2:g} deg (margin {margin:.1f} deg): access {access}")
    print(f"12 h solar-period axis : {semi_major_axis_for_period(12.0):.1f} km "
          f"(sidereal half day: {semi_major_axis_for_period(86164.0905 / 7200.0):.1f} km)")


if __name__ == "__main__":
    main()
