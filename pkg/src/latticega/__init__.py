"""Lattice-based constraint-consistent genetic algorithms."""
from pathlib import Path

from .engine import GAConfig, RunResult, dominates, fast_nondominated_sort, crowding_distance, run
from .lattice import build_gauss_lattice, build_uniform_lattice, lattice_crossover, probit

DATA_DIR = Path(__file__).resolve().parent / "data"

__all__ = [
    "DATA_DIR", "GAConfig", "RunResult", "build_gauss_lattice", "build_uniform_lattice",
    "crowding_distance", "dominates", "fast_nondominated_sort", "lattice_crossover", "probit", "run",
]
__version__ = "0.1.0"
