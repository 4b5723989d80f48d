"""Per-level fitness terms: solvability, chunk entropy and partial solvability."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from pcgnn.solvers import SearchResult, maze_connected, solve
from pcgnn.tilemap import EMPTY, Level

ENTROPY_FITNESS_CAP = 10.0


def solvability_fitness(levels: Sequence[Level],
                        solver: Callable[[Level], SearchResult] = solve) -> float:
    """Fraction of ``levels`` the solver can complete."""
    if not levels:
        raise ValueError("need at least one level")
    return sum(1 for lvl in levels if solver(lvl).solvable) / len(levels)


def chunk_entropy(chunk, n_tile_types: int) -> float:
    """Shannon entropy (bits) of tile frequencies in ``chunk``.

    Normalised by log2(n) when there are more than two tile types, so the
    result stays in [0, 1].
    """
    values = np.asarray(chunk).ravel()
    if values.size == 0:
        raise ValueError("chunk must be nonempty")
    counts = np.bincount(values, minlength=n_tile_types)
    probs = counts[counts > 0] / values.size
    h = float(-np.sum(probs * np.log2(probs)))
    if n_tile_types > 2:
        h /= math.log2(n_tile_types)
    return max(h, 0.0)


def mean_chunk_entropy(level: Level, chunk_edge: int) -> float:
    """Average entropy over the non-overlapping chunk grid; edge chunks keep their true size."""
    if chunk_edge < 1:
        raise ValueError("chunk_edge must be >= 1")
    cells = level.cells
    n = level.tileset.n
    values = [chunk_entropy(cells[y:y + chunk_edge, x:x + chunk_edge], n)
              for y in range(0, level.height, chunk_edge)
              for x in range(0, level.width, chunk_edge)]
    return sum(values) / len(values)


def entropy_fitness(level: Level, chunk_edge: int, desired_entropy: float) -> float:
    """Reciprocal gap between the mean chunk entropy and the target, capped at 10."""
    if not 0.0 <= desired_entropy <= 1.0:
        raise ValueError("desired_entropy must lie in [0, 1]")
    gap = abs(mean_chunk_entropy(level, chunk_edge) - desired_entropy)
    if gap == 0.0:
        return ENTROPY_FITNESS_CAP
    return min(ENTROPY_FITNESS_CAP, 1.0 / gap)


def partial_solvability(level: Level) -> float:
    """One third each for an open start, an open goal and a start-goal path."""
    cells = level.cells
    start_open = cells[0, 0] == EMPTY
    end_open = cells[-1, -1] == EMPTY
    connected = start_open and end_open and maze_connected(level)
    return (int(start_open) + int(end_open) + int(connected)) / 3
