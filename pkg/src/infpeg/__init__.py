"""Peg solitaire on countably infinite, locally finite graphs.

Exact golden-ratio arithmetic, lazy graph families, the jump rule,
pagoda values and certificates, transfinite schedules with compression to
length omega, executable strategies, and a brute-force finite oracle.
"""

from .golden import PHI, SIGMA, GoldenNum, approx, sigma_pow, sign
from .graphs import Graph, bfs_layers, build, cartesian_product, distance
from .game import EMPTY, FULL, Jump, State, apply, apply_sequence, is_legal

__all__ = [
    "PHI",
    "SIGMA",
    "GoldenNum",
    "approx",
    "sigma_pow",
    "sign",
    "Graph",
    "bfs_layers",
    "build",
    "cartesian_product",
    "distance",
    "EMPTY",
    "FULL",
    "Jump",
    "State",
    "apply",
    "apply_sequence",
    "is_legal",
]

__version__ = "0.1.0"
