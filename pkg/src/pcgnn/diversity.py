"""Level distance functions and novelty scoring over generators.

Every distance splits into a per-level ``prepare`` step and a cheap
``compare`` of two prepared features, so population-wide novelty only pays
for flood fills, path searches and hashing once per level.
"""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from scipy import ndimage

from pcgnn.solvers import reachable_mask, solve_maze
from pcgnn.tilemap import WALL, Level

log = logging.getLogger(__name__)

PATH_SAMPLES = 30
HASH_SIZE = 8


class DistanceFunction(str, enum.Enum):
    VISUAL_DIVERSITY = "visual_diversity"
    VISUAL_DIVERSITY_REACHABLE = "visual_diversity_reachable"
    EUCLIDEAN = "euclidean"
    PATH = "path"
    JS = "js"
    WINDOW = "window"
    WINDOW_V2 = "window_v2"
    HASH_AVERAGE = "hash_average"


def _check_shapes(l1: Level, l2: Level) -> None:
    if l1.shape != l2.shape:
        raise ValueError(f"level shapes differ: {l1.shape} vs {l2.shape}")


# -- per-function features ----------------------------------------------------

def _hamming(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.count_nonzero(a != b)) / a.size


def _reachable_as_walls(level: Level) -> np.ndarray:
    cells = np.array(level.cells)
    cells[~reachable_mask(level)] = WALL
    return cells


def _euclid_feature(level: Level):
    return level.cells.astype(np.float64), level.tileset.n


def _euclid_compare(fa, fb) -> float:
    a, n = fa
    b, _ = fb
    if n < 2:
        return 0.0
    return float(np.linalg.norm(a - b) / ((n - 1) * np.sqrt(a.size)))


def resample_trajectory(points: Sequence[tuple[float, float]], samples: int = PATH_SAMPLES) -> np.ndarray:
    """Linear interpolation of a polyline at ``samples`` evenly spaced step indices."""
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) == 1:
        return np.repeat(pts, samples, axis=0)
    t = np.linspace(0.0, len(pts) - 1, samples)
    idx = np.arange(len(pts))
    return np.column_stack([np.interp(t, idx, pts[:, 0]), np.interp(t, idx, pts[:, 1])])


def _path_feature(level: Level):
    result = solve_maze(level)
    if not result.solvable:
        return None, level.width + level.height - 2
    return resample_trajectory(result.trajectory), level.width + level.height - 2


def _path_compare(fa, fb) -> float:
    pa, norm = fa
    pb, _ = fb
    if pa is None or pb is None:
        # one unsolvable level is maximally far; two unsolvable levels coincide
        return 0.0 if pa is None and pb is None else 1.0
    return float(np.abs(pa - pb).sum(axis=1).mean() / norm)


def _js_feature(level: Level) -> np.ndarray:
    mask = reachable_mask(level).ravel().astype(np.float64)
    if not mask.any():
        mask[0] = 1.0
    return mask / mask.sum()


def _js_compare(p: np.ndarray, q: np.ndarray) -> float:
    m = 0.5 * (p + q)
    total = 0.0
    for dist in (p, q):
        nz = dist > 0
        total += 0.5 * float(np.sum(dist[nz] * np.log2(dist[nz] / m[nz])))
    return min(max(total, 0.0), 1.0)


_BLOCK = np.ones((3, 3))


def _window_feature(level: Level, shortest_path: bool):
    if shortest_path:
        anchors = np.zeros(level.shape, dtype=bool)
        for x, y in solve_maze(level).trajectory:
            anchors[y, x] = True
    else:
        anchors = reachable_mask(level)
    return level.cells, anchors


def _window_compare(fa, fb) -> float:
    a, anchors_a = fa
    b, anchors_b = fb
    union = anchors_a | anchors_b
    n_union = int(np.count_nonzero(union))
    if n_union == 0:
        return 0.0
    both = anchors_a & anchors_b
    # padding reads -1 in both levels, so out-of-bounds block cells always match
    differing = ndimage.convolve((a != b).astype(np.float64), _BLOCK, mode="constant", cval=0.0)
    shared = float(np.sum(differing[both])) / _BLOCK.size
    return (shared + (n_union - int(np.count_nonzero(both)))) / n_union


def _area_weights(length: int, bins: int = HASH_SIZE) -> np.ndarray:
    """Integer overlap (in 1/bins-pixel units) of each pixel with each output bin."""
    w = np.zeros((bins, length), dtype=np.int64)
    for i in range(bins):
        lo, hi = i * length, (i + 1) * length  # bin i covers [lo, hi) in pixel*bins units
        for p in range(length):
            w[i, p] = max(0, min(hi, (p + 1) * bins) - max(lo, p * bins))
    return w


def average_hash(level: Level) -> np.ndarray:
    """64-bit average hash of the greyscale tile image.

    Area-average pooling to 8x8 is done in exact integer arithmetic (sums of
    tile indices weighted by overlap), so comparisons against the mean never
    suffer rounding; a pooled cell equal to the mean yields bit 0.
    """
    rows = _area_weights(level.height)
    cols = _area_weights(level.width)
    pooled = rows @ level.cells.astype(np.int64) @ cols.T  # each bin has equal total weight
    return (pooled * pooled.size > pooled.sum()).ravel()


@dataclass(frozen=True)
class _Distance:
    prepare: Callable[[Level], Any]
    compare: Callable[[Any, Any], float]


_DISTANCES = {
    DistanceFunction.VISUAL_DIVERSITY: _Distance(lambda lvl: lvl.cells, _hamming),
    DistanceFunction.VISUAL_DIVERSITY_REACHABLE: _Distance(_reachable_as_walls, _hamming),
    DistanceFunction.EUCLIDEAN: _Distance(_euclid_feature, _euclid_compare),
    DistanceFunction.PATH: _Distance(_path_feature, _path_compare),
    DistanceFunction.JS: _Distance(_js_feature, _js_compare),
    DistanceFunction.WINDOW: _Distance(lambda lvl: _window_feature(lvl, False), _window_compare),
    DistanceFunction.WINDOW_V2: _Distance(lambda lvl: _window_feature(lvl, True), _window_compare),
    DistanceFunction.HASH_AVERAGE: _Distance(average_hash, _hamming),
}


def prepare(level: Level, d: DistanceFunction | str):
    return _DISTANCES[DistanceFunction(d)].prepare(level)


def compare(fa, fb, d: DistanceFunction | str) -> float:
    return _DISTANCES[DistanceFunction(d)].compare(fa, fb)


def level_distance(l1: Level, l2: Level, d: DistanceFunction | str) -> float:
    _check_shapes(l1, l2)
    dist = _DISTANCES[DistanceFunction(d)]
    return dist.compare(dist.prepare(l1), dist.prepare(l2))


# -- public per-function entry points ----------------------------------------

def visual_diversity(l1: Level, l2: Level) -> float:
    """Fraction of positions holding different tiles."""
    return level_distance(l1, l2, DistanceFunction.VISUAL_DIVERSITY)


def visual_diversity_reachable(l1: Level, l2: Level) -> float:
    """Visual diversity after walling off every empty cell the start cannot reach."""
    return level_distance(l1, l2, DistanceFunction.VISUAL_DIVERSITY_REACHABLE)


def euclidean_distance(l1: Level, l2: Level) -> float:
    return level_distance(l1, l2, DistanceFunction.EUCLIDEAN)


def path_distance(l1: Level, l2: Level) -> float:
    """Mean Manhattan gap between the two shortest paths, each resampled to
    30 points, over ``width + height - 2``. Exactly one unsolvable level gives 1."""
    return level_distance(l1, l2, DistanceFunction.PATH)


def js_distance(l1: Level, l2: Level) -> float:
    """Base-2 Jensen-Shannon divergence of uniform distributions over reachable cells."""
    return level_distance(l1, l2, DistanceFunction.JS)


def window_distance(l1: Level, l2: Level, mode: str = "all_reachable") -> float:
    """Average 3x3-block mismatch around anchor cells.

    Anchors are the reachable cells (``all_reachable``) or the shortest-path
    cells (``shortest_path``) of either level. An anchor present in only one
    level scores 1; otherwise it scores the mismatch fraction of the two
    -1-padded 3x3 blocks.
    """
    if mode not in ("all_reachable", "shortest_path"):
        raise ValueError(f"unknown window mode {mode!r}")
    d = DistanceFunction.WINDOW if mode == "all_reachable" else DistanceFunction.WINDOW_V2
    return level_distance(l1, l2, d)


def hash_average_distance(l1: Level, l2: Level) -> float:
    return level_distance(l1, l2, DistanceFunction.HASH_AVERAGE)


# -- generators and novelty ---------------------------------------------------

def _generator_distance_prepared(fa: Sequence, fb: Sequence, d: DistanceFunction) -> float:
    cmp = _DISTANCES[d].compare
    return sum(cmp(a, b) for a, b in zip(fa, fb)) / len(fa)


def generator_distance(levels_a: Sequence[Level], levels_b: Sequence[Level],
                       d: DistanceFunction | str) -> float:
    """Mean distance between positionally paired levels of two generators."""
    if len(levels_a) != len(levels_b) or not levels_a:
        raise ValueError("generators must contribute the same, nonzero number of levels")
    d = DistanceFunction(d)
    for a, b in zip(levels_a, levels_b):
        _check_shapes(a, b)
    prep = _DISTANCES[d].prepare
    return _generator_distance_prepared([prep(l) for l in levels_a], [prep(l) for l in levels_b], d)


@dataclass(frozen=True)
class NoveltyConfig:
    k_neighbors: int = 15
    archive_lambda: int = 0
    distance: DistanceFunction = DistanceFunction.VISUAL_DIVERSITY_REACHABLE
    intra_k: int = 10

    def __post_init__(self):
        if self.k_neighbors < 1 or self.intra_k < 1:
            raise ValueError("k_neighbors and intra_k must be >= 1")
        if self.archive_lambda < 0:
            raise ValueError("archive_lambda must be >= 0")
        object.__setattr__(self, "distance", DistanceFunction(self.distance))


@dataclass(frozen=True)
class NoveltyArchive:
    """Level lists of past individuals; adding returns a new archive."""

    entries: tuple[tuple[Level, ...], ...] = ()
    features: tuple[tuple, ...] = field(default=(), compare=False, repr=False)

    def __len__(self):
        return len(self.entries)

    def extended(self, new_entries, new_features) -> "NoveltyArchive":
        return NoveltyArchive(self.entries + tuple(tuple(e) for e in new_entries),
                              self.features + tuple(tuple(f) for f in new_features))


def generator_distance_matrix(features: Sequence[Sequence], d: DistanceFunction) -> np.ndarray:
    """Symmetric matrix of generator distances over prepared level features; inf on the diagonal."""
    p = len(features)
    dist = np.full((p, p), np.inf)
    for i in range(p):
        for j in range(i + 1, p):
            dist[i, j] = dist[j, i] = _generator_distance_prepared(features[i], features[j], d)
    return dist


def _mean_of_smallest(values: list[float], k: int) -> float:
    if k == 0:
        return 0.0
    return sum(sorted(values)[:k]) / k


def novelty_from_distances(pop_dist: np.ndarray, archive_dist: np.ndarray | None, k: int) -> list[float]:
    """Mean of the ``k`` smallest distances from each individual to the others and the archive."""
    p = pop_dist.shape[0]
    available = p - 1 + (archive_dist.shape[1] if archive_dist is not None else 0)
    if k > available:
        log.warning("novelty K=%d exceeds the %d available neighbours; clamping", k, available)
        k = available
    scores = []
    for i in range(p):
        row = [float(pop_dist[i, j]) for j in range(p) if j != i]
        if archive_dist is not None:
            row += [float(v) for v in archive_dist[i]]
        scores.append(_mean_of_smallest(row, k))
    return scores


def novelty_scores(population_levels: Sequence[Sequence[Level]], archive: NoveltyArchive,
                   config: NoveltyConfig, rng: np.random.Generator | None = None,
                   features: Sequence[Sequence] | None = None,
                   ) -> tuple[list[float], NoveltyArchive]:
    """Novelty of each generator against the rest of the population and the archive.

    Returns the scores and the archive with ``lambda`` randomly chosen
    individuals appended. ``features`` may hold already prepared level
    features (one list per individual) to skip the prepare step.
    """
    if not population_levels:
        raise ValueError("population must not be empty")
    d = config.distance
    if features is None:
        prep = _DISTANCES[d].prepare
        features = [[prep(l) for l in levels] for levels in population_levels]
    pop_dist = generator_distance_matrix(features, d)
    archive_feats = archive.features if len(archive.features) == len(archive) else [
        [_DISTANCES[d].prepare(l) for l in entry] for entry in archive.entries]
    archive_dist = None
    if archive_feats:
        archive_dist = np.array([[_generator_distance_prepared(f, a, d) for a in archive_feats]
                                 for f in features])
    scores = novelty_from_distances(pop_dist, archive_dist, config.k_neighbors)

    add = min(config.archive_lambda, len(population_levels))
    if add:
        if rng is None:
            raise ValueError("an rng is required when archive_lambda > 0")
        chosen = rng.choice(len(population_levels), size=add, replace=False)
        archive = NoveltyArchive(archive.entries, tuple(tuple(f) for f in archive_feats)).extended(
            [population_levels[i] for i in chosen], [features[i] for i in chosen])
    return scores, archive


def intra_novelty_prepared(features: Sequence, k: int, d: DistanceFunction) -> float:
    n = len(features)
    if n < 2:
        raise ValueError("intra-novelty needs at least two levels")
    if k > n - 1:
        log.debug("intra-novelty k=%d clamped to %d", k, n - 1)
        k = n - 1
    cmp = _DISTANCES[d].compare
    dist = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            dist[i][j] = dist[j][i] = cmp(features[i], features[j])
    per_level = [_mean_of_smallest([dist[i][j] for j in range(n) if j != i], k) for i in range(n)]
    return sum(per_level) / n


def intra_novelty(levels: Sequence[Level], intra_k: int, d: DistanceFunction | str) -> float:
    """Mean, over one generator's levels, of each level's distance to its
    ``intra_k`` nearest siblings. No archive is involved."""
    d = DistanceFunction(d)
    prep = _DISTANCES[d].prepare
    return intra_novelty_prepared([prep(l) for l in levels], intra_k, d)


def write_distance_csv(path: str | Path, matrix: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "distance"])
        for i in range(matrix.shape[0]):
            for j in range(matrix.shape[1]):
                if i != j:
                    writer.writerow([i, j, repr(float(matrix[i, j]))])
