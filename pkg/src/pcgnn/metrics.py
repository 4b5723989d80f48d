"""Post-hoc level metrics, pairwise aggregation, timing and effect size."""

from __future__ import annotations

import csv
import itertools
import lzma
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from pcgnn.diversity import resample_trajectory
from pcgnn.solvers import SearchResult, reachable_mask, solve
from pcgnn.tilemap import EMPTY, Game, Level

# Recorded alongside every report so numbers stay comparable between runs.
COMPRESSOR = "lzma-alone-preset6"


def _compressed_size(data: bytes) -> int:
    return len(lzma.compress(data, format=lzma.FORMAT_ALONE, preset=6))


def level_bytes(level: Level) -> bytes:
    """Row-major glyph string without row separators."""
    glyphs = np.array([t.glyph for t in level.tileset.tiles])
    return "".join(glyphs[level.cells].ravel()).encode("ascii")


def compression_distance(l1: Level, l2: Level) -> float:
    """Normalised compression distance of the two serialised levels."""
    if l1.tileset != l2.tileset:
        raise ValueError("levels use different tilesets")
    x, y = level_bytes(l1), level_bytes(l2)
    cx, cy, cxy = _compressed_size(x), _compressed_size(y), _compressed_size(x + y)
    return (cxy - min(cx, cy)) / max(cx, cy)


def astar_diversity(l1: Level, l2: Level,
                    solver: Callable[[Level], SearchResult] = solve) -> float:
    """Mean gap between the two solver trajectories in unit-square coordinates.

    Paths are scaled to ``(x/width, y/height)``, resampled to 30 points and
    compared pointwise; the mean Euclidean distance is divided by sqrt(2).
    Exactly one unsolvable level gives 1, two unsolvable levels give 0.
    """
    if l1.shape != l2.shape:
        raise ValueError(f"level shapes differ: {l1.shape} vs {l2.shape}")
    r1, r2 = solver(l1), solver(l2)
    if not (r1.solvable and r2.solvable):
        return 0.0 if r1.solvable == r2.solvable else 1.0
    scale = np.array([l1.width, l1.height], dtype=np.float64)
    p1 = resample_trajectory(r1.trajectory) / scale
    p2 = resample_trajectory(r2.trajectory) / scale
    return float(np.linalg.norm(p1 - p2, axis=1).mean() / math.sqrt(2))


def astar_difficulty(level: Level, solver: Callable[[Level], SearchResult] = solve) -> float:
    """Share of expanded nodes that did not end up on the returned path.

    An unsolvable search wastes every expansion (1); a search that never
    expands anything, e.g. from a walled start, wastes nothing (0).
    """
    result = solver(level)
    if result.expanded == 0:
        return 0.0
    return (result.expanded - len(result.trajectory)) / result.expanded


def maze_leniency(level: Level) -> float:
    """1 - fraction of reachable empty cells that are dead ends; 0 if unsolvable."""
    mask = reachable_mask(level)
    if not mask[-1, -1]:
        return 0.0
    padded = np.pad(mask, 1)
    neighbours = (padded[:-2, 1:-1].astype(int) + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:])
    dead = mask & (neighbours == 1)
    dead[0, 0] = dead[-1, -1] = False
    return 1.0 - np.count_nonzero(dead) / np.count_nonzero(mask)


def platformer_leniency(level: Level) -> float:
    """Share of columns with some solid tile and no enemy."""
    solid = level.tileset.solid_mask()[level.cells]
    hazard = level.tileset.hazard_mask()[level.cells]
    safe = solid.any(axis=0) & ~hazard.any(axis=0)
    return float(np.mean(safe))


def leniency(level: Level) -> float:
    if level.tileset.game is Game.MAZE:
        return maze_leniency(level)
    return platformer_leniency(level)


def pairwise_average(levels: Sequence[Level], metric: Callable[[Level, Level], float]) -> float:
    """Mean of ``metric`` over all unordered pairs."""
    if len(levels) < 2:
        raise ValueError("need at least two levels")
    values = [metric(a, b) for a, b in itertools.combinations(levels, 2)]
    return sum(values) / len(values)


def cohens_d(sample_a, sample_b) -> float:
    """(mean_a - mean_b) / std_a, population std of the first sample only."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 1:
        raise ValueError("sample_a needs at least two values and sample_b at least one")
    sigma = float(np.std(a))
    if sigma == 0.0:
        raise ValueError("cohen's d is undefined when sample_a has zero spread")
    return (float(a.mean()) - float(b.mean())) / sigma


# -- timing -------------------------------------------------------------------

@dataclass(frozen=True)
class TimingRow:
    width: int
    height: int
    median_s: float
    std_s: float
    trials: int

    @property
    def size(self) -> str:
        return f"{self.width}x{self.height}"


def _as_shape(size) -> tuple[int, int]:
    if isinstance(size, (int, np.integer)):
        return int(size), int(size)
    width, height = size
    return int(width), int(height)


def benchmark_generation(generate: Callable[[int, int, np.random.Generator], Level],
                         sizes: Sequence, trials: int = 5, seed: int = 0) -> list[TimingRow]:
    """Wall-clock seconds per generated level at each size.

    Args:
        generate: ``(width, height, rng) -> Level``; only this call is timed.
        sizes: Square side lengths or ``(width, height)`` pairs.
        trials: Timed repetitions per size, after one discarded warm-up.
        seed: Every trial uses a fresh rng from this seed, so all trials of a
            size produce the same level.
    """
    if trials < 3:
        raise ValueError("trials must be >= 3")
    rows = []
    for size in sizes:
        width, height = _as_shape(size)
        generate(width, height, np.random.default_rng(seed))  # warm-up
        times = []
        for _ in range(trials):
            rng = np.random.default_rng(seed)
            t0 = time.perf_counter()
            generate(width, height, rng)
            times.append(time.perf_counter() - t0)
        rows.append(TimingRow(width, height, float(np.median(times)), float(np.std(times)), trials))
    return rows


def write_timing_csv(path: str | Path, rows: Sequence[TimingRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", "median_s", "std_s", "trials"])
        for row in rows:
            writer.writerow([row.size, repr(row.median_s), repr(row.std_s), row.trials])


# -- level-set reports --------------------------------------------------------

METRIC_NAMES = ("solvability", "compression_distance", "astar_diversity",
                "astar_difficulty", "leniency", "n_solvable")


def evaluate_levels(levels: Sequence[Level], random_baseline: bool = False) -> dict[str, float]:
    """Standard metric panel for one seed's levels.

    Difficulty and diversity use only the solvable levels, except for the
    random baseline where every level counts. Metrics that cannot be formed
    (e.g. fewer than two solvable levels for a pairwise metric) are NaN.
    """
    if not levels:
        raise ValueError("need at least one level")
    results = [solve(lvl) for lvl in levels]
    solvable = [lvl for lvl, r in zip(levels, results) if r.solvable]
    pool = list(levels) if random_baseline else solvable
    out = {
        "solvability": len(solvable) / len(levels),
        "n_solvable": float(len(solvable)),
    }
    out["compression_distance"] = pairwise_average(pool, compression_distance) if len(pool) >= 2 else math.nan
    out["astar_diversity"] = pairwise_average(pool, astar_diversity) if len(pool) >= 2 else math.nan
    out["astar_difficulty"] = float(np.mean([astar_difficulty(l) for l in pool])) if pool else math.nan
    out["leniency"] = float(np.mean([leniency(l) for l in pool])) if pool else math.nan
    return out


@dataclass
class MetricReport:
    """Per-seed metric values with mean/std summaries."""

    random_baseline: bool = False
    values: dict[str, dict[int, float]] = field(default_factory=dict)
    compressor: str = COMPRESSOR

    def add(self, seed: int, metrics: dict[str, float]) -> None:
        for name, value in metrics.items():
            self.values.setdefault(name, {})[seed] = float(value)

    def summary(self) -> dict[str, tuple[float, float, int]]:
        out = {}
        for name, per_seed in self.values.items():
            vals = np.array([v for v in per_seed.values() if not math.isnan(v)])
            if vals.size:
                out[name] = (float(vals.mean()), float(vals.std()), int(vals.size))
            else:
                out[name] = (math.nan, math.nan, 0)
        return out

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "seed", "value"])
            for name, per_seed in self.values.items():
                for seed in sorted(per_seed):
                    writer.writerow([name, seed, repr(per_seed[seed])])

    def write_summary_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "mean", "std", "n"])
            for name, (mean, std, n) in self.summary().items():
                writer.writerow([name, repr(mean), repr(std), n])
