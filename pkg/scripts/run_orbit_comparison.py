"""Gaussian lattice vs death penalty on constellation design at an equal evaluation budget.

    python scripts/run_orbit_comparison.py --evaluations 3000 --out results/orbit
"""
import argparse
from dataclasses import replace
from pathlib import Path

from latticega import bench, io


def describe(path):
    _, rows = io.read_rows(path)
    counts = {n: sum(int(r["n_sats"]) == n for r in rows) for n in (1, 2, 3)}
    objs = bench.read_front(path, ["access", "delta_v"], maximize=["access"])
    best = max((float(r["access"]) for r in rows), default=0.0)
    return (f"{len(rows)} front rows, by satellite count {counts}, best access {best:.4f}, "
            f"mutually nondominated={bench.mutually_nondominated(objs)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--evaluations", type=int, default=3000)
    ap.add_argument("--population", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/orbit")
    args = ap.parse_args()

    base = bench.default_config("orbit")
    base = replace(base, seed=args.seed,
                   ga=replace(base.ga, population_size=args.population, max_evaluations=args.evaluations))
    for op in ("gauss_lattice", "death_penalty"):
        cfg = replace(base, out_dir=str(Path(args.out) / op), ga=replace(base.ga, operator_choice=op))
        result, path = bench.run_orbit(cfg)
        print(f"{op}: {result.evaluations} evaluations over {result.generations} generations")
        print(f"  {describe(path)}")
        print(f"  wrote {path}")


if __name__ == "__main__":
    main()
