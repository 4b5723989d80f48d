import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from helpers import maze, random_maze
from pcgnn import diversity
from pcgnn.diversity import (DistanceFunction, NoveltyArchive, NoveltyConfig, average_hash,
                             euclidean_distance, generator_distance, hash_average_distance,
                             intra_novelty, js_distance, level_distance, novelty_from_distances,
                             novelty_scores, path_distance, visual_diversity,
                             visual_diversity_reachable, window_distance, write_distance_csv)
from pcgnn.tilemap import MARIO_TILESET, MAZE_TILESET, Level

ALL = list(DistanceFunction)


def row(bits: str) -> Level:
    return Level([[int(b) for b in bits]], MAZE_TILESET)


# -- per-function examples ------------------------------------------------------

def test_visual_diversity_examples():
    a = maze("..", "..")
    assert visual_diversity(a, a) == 0
    assert visual_diversity(maze(".#", "#."), maze("#.", ".#")) == 1
    assert visual_diversity(maze("..", ".."), maze(".#", "#.")) == 0.5


def test_visual_diversity_shape_mismatch():
    with pytest.raises(ValueError):
        visual_diversity(maze("..", ".."), maze("...", "..."))


def test_visual_diversity_reachable_ignores_sealed_chamber():
    a = maze("..#.", "..#.", "..##", "..#.")
    b = maze("..##", "..#.", "..##", "..##")
    assert visual_diversity(a, b) > 0
    assert visual_diversity_reachable(a, b) == 0


def test_visual_diversity_reachable_hand_pair():
    # after walling unreachable cells:
    #   a -> ..##/#.##/..##/####   b -> ..../#.#./..#./####
    a = maze("..#.", "#.#.", "..#.", "##..")
    b = maze("....", "#.#.", "..#.", "##.#")
    assert visual_diversity_reachable(a, b) == 4 / 16


def test_euclidean_examples():
    assert euclidean_distance(maze("..", ".."), maze("..", "..")) == 0
    assert euclidean_distance(maze("...", "..."), maze("###", "###")) == 1
    assert euclidean_distance(maze("..", ".."), maze("..", ".#")) == 0.5


def test_euclidean_multi_tile():
    empty = Level(np.zeros((2, 2), dtype=int), MARIO_TILESET)
    full = Level(np.full((2, 2), 5), MARIO_TILESET)
    assert euclidean_distance(empty, full) == 1


def test_path_distance_examples():
    open_maze = maze("...", "...", "...")
    blocked = maze("..#", ".#.", "#..")
    assert path_distance(open_maze, open_maze) == 0
    assert path_distance(open_maze, blocked) == 1
    assert path_distance(blocked, blocked) == 0


def test_path_distance_top_vs_left_corridor():
    top = maze("...", "##.", "##.")
    left = maze(".##", ".##", "...")
    # both paths have 5 cells (4 steps); at step parameter t the routes sit at
    # (t, 0) / (0, t) for t <= 2 and (2, t-2) / (t-2, 2) afterwards, so their
    # Manhattan gap is 2*min(t, 4-t)
    ts = [4 * i / 29 for i in range(30)]
    expected = sum(2 * min(t, 4 - t) for t in ts) / 30 / 4
    assert path_distance(top, left) == pytest.approx(expected, abs=1e-12)


def test_resample_trajectory_endpoints():
    pts = diversity.resample_trajectory([(0, 0), (1, 0), (1, 1)], 5)
    assert pts.tolist() == [[0, 0], [0.5, 0], [1, 0], [1, 0.5], [1, 1]]
    assert diversity.resample_trajectory([(2, 3)], 4).tolist() == [[2, 3]] * 4


def test_js_examples():
    a = maze("..", "##")
    b = maze(".#", ".#")
    assert js_distance(a, a) == 0
    # (1/2, 1/2, 0) vs (0, 1/2, 1/2): each KL to the midpoint is 1/2 bit
    assert js_distance(a, b) == pytest.approx(0.5, abs=1e-12)


def test_js_disjoint_distributions():
    p = np.array([0.5, 0.5, 0.0, 0.0])
    q = np.array([0.0, 0.0, 0.5, 0.5])
    assert diversity.compare(p, q, DistanceFunction.JS) == 1.0


def test_js_no_reachable_cells():
    walled = maze("#.", "..")
    assert js_distance(walled, walled) == 0
    assert js_distance(walled, maze("#.", ".#")) == 0


def test_window_examples():
    a = maze("..#", "...", "#..")
    for mode in ("all_reachable", "shortest_path"):
        assert window_distance(a, a, mode) == 0
    assert window_distance(maze("..", ".."), maze("##", "##")) == 1
    with pytest.raises(ValueError):
        window_distance(a, a, "diagonal")


def test_window_hand_pair():
    # three shared anchors each see one mismatching cell out of 9;
    # the fourth anchor exists only in the first level and scores 1
    a = maze("..", "..")
    b = maze("..", ".#")
    assert window_distance(a, b) == pytest.approx((3 / 9 + 1) / 4, abs=1e-12)


def test_window_four_by_four_enumeration():
    a = maze("....", ".##.", "....", "#...")
    b = maze("....", "....", ".#..", "....")
    ra, rb = diversity.reachable_mask(a), diversity.reachable_mask(b)
    pa = np.pad(a.cells, 1, constant_values=-1)
    pb = np.pad(b.cells, 1, constant_values=-1)
    total, count = 0.0, 0
    for y, x in itertools.product(range(4), range(4)):
        if ra[y, x] and rb[y, x]:
            total += np.count_nonzero(pa[y:y + 3, x:x + 3] != pb[y:y + 3, x:x + 3]) / 9
            count += 1
        elif ra[y, x] or rb[y, x]:
            total += 1
            count += 1
    assert window_distance(a, b) == pytest.approx(total / count, abs=1e-12)


def fraction_hash(cells: np.ndarray) -> np.ndarray:
    """Oracle: exact box-filter pooling to 8x8 with rational arithmetic."""
    h, w = cells.shape
    pooled = [[Fraction(0)] * 8 for _ in range(8)]
    for by in range(8):
        for bx in range(8):
            y0, y1 = Fraction(by * h, 8), Fraction((by + 1) * h, 8)
            x0, x1 = Fraction(bx * w, 8), Fraction((bx + 1) * w, 8)
            acc = Fraction(0)
            for y in range(h):
                oy = max(0, min(y1, y + 1) - max(y0, y))
                if not oy:
                    continue
                for x in range(w):
                    ox = max(0, min(x1, x + 1) - max(x0, x))
                    acc += oy * ox * int(cells[y, x])
            pooled[by][bx] = acc / ((y1 - y0) * (x1 - x0))
    mean = sum(sum(r) for r in pooled) / 64
    return np.array([[p > mean for p in r] for r in pooled]).ravel()


def test_hash_examples():
    a = maze(*["." * 16] * 16)
    b = maze(*["#" * 16] * 16)
    checker = Level(np.indices((16, 16)).sum(axis=0) % 2, MAZE_TILESET)
    assert hash_average_distance(a, a) == 0
    assert hash_average_distance(a, b) == 0
    expected = np.count_nonzero(fraction_hash(checker.cells) != fraction_hash(a.cells)) / 64
    assert hash_average_distance(checker, a) == expected


@pytest.mark.parametrize("shape", [(14, 14), (16, 16), (10, 20), (9, 5)])
def test_average_hash_matches_rational_oracle(shape):
    rng = np.random.default_rng(shape[0] * 100 + shape[1])
    for _ in range(5):
        level = Level(rng.integers(0, 2, shape), MAZE_TILESET)
        assert average_hash(level).tolist() == fraction_hash(level.cells).tolist()


@pytest.mark.parametrize("d", ALL)
def test_distance_axioms(d):
    rng = np.random.default_rng(hash(d.value) % 2**32)
    for _ in range(40):
        a = random_maze(rng, 8, 8, wall_density=0.3)
        b = random_maze(rng, 8, 8, wall_density=0.3)
        dab = level_distance(a, b, d)
        assert level_distance(a, a, d) == 0
        assert dab == level_distance(b, a, d)
        assert 0.0 <= dab <= 1.0


# -- generators and novelty ------------------------------------------------------

def test_generator_distance():
    a = [maze("..", ".."), maze("##", "##"), maze(".#", "..")]
    b = [maze("..", ".#"), maze("##", "##"), maze("#.", "..")]
    assert generator_distance(a[:1], b[:1], "visual_diversity") == visual_diversity(a[0], b[0])
    assert generator_distance(a, a, "visual_diversity") == 0
    assert generator_distance(a, b, "visual_diversity") == pytest.approx((0.25 + 0 + 0.5) / 3)
    with pytest.raises(ValueError):
        generator_distance(a, b[:2], "visual_diversity")


def test_novelty_from_distances_example():
    dist = np.array([[math.inf, .2, .6], [.2, math.inf, .4], [.6, .4, math.inf]])
    assert novelty_from_distances(dist, None, 2) == pytest.approx([.4, .3, .5])


def test_novelty_scores_example_levels():
    pop = [[row("00000")], [row("10000")], [row("11100")]]
    cfg = NoveltyConfig(k_neighbors=2, distance="visual_diversity")
    scores, archive = novelty_scores(pop, NoveltyArchive(), cfg)
    assert scores == pytest.approx([.4, .3, .5], abs=1e-12)
    assert len(archive) == 0


def test_identical_individuals_score_zero():
    lvl = [maze("..", ".#")]
    scores, _ = novelty_scores([lvl, lvl], NoveltyArchive(), NoveltyConfig(k_neighbors=1))
    assert scores == [0.0, 0.0]


def brute_novelty(pop, archive_entries, k, d):
    """Oracle: O(P^2 N) recomputation from level_distance alone."""
    def gdist(a, b):
        return sum(level_distance(x, y, d) for x, y in zip(a, b)) / len(a)
    out = []
    for i, ind in enumerate(pop):
        dists = [gdist(ind, other) for j, other in enumerate(pop) if j != i]
        dists += [gdist(ind, e) for e in archive_entries]
        kk = min(k, len(dists))
        out.append(sum(sorted(dists)[:kk]) / kk)
    return out


@pytest.mark.parametrize("d", ALL)
def test_novelty_matches_brute_force(d):
    rng = np.random.default_rng(7)
    for p in (2, 5, 8):
        pop = [[random_maze(rng, 6, 6, 0.3) for _ in range(3)] for _ in range(p)]
        archive_entries = [[random_maze(rng, 6, 6, 0.3) for _ in range(3)] for _ in range(2)]
        archive = NoveltyArchive(tuple(tuple(e) for e in archive_entries))
        cfg = NoveltyConfig(k_neighbors=3, distance=d)
        scores, _ = novelty_scores(pop, archive, cfg)
        assert scores == brute_novelty(pop, archive_entries, 3, d)


def test_duplicate_never_raises_novelty():
    rng = np.random.default_rng(11)
    cfg = NoveltyConfig(k_neighbors=3, distance="visual_diversity")
    for _ in range(20):
        pop = [[random_maze(rng, 5, 5) for _ in range(2)] for _ in range(6)]
        before, _ = novelty_scores(pop, NoveltyArchive(), cfg)
        i = int(rng.integers(6))
        after, _ = novelty_scores(pop + [list(pop[i])], NoveltyArchive(), cfg)
        assert after[i] <= before[i]


def test_archive_grows_by_lambda():
    rng = np.random.default_rng(0)
    pop = [[random_maze(rng, 4, 4)] for _ in range(5)]
    cfg = NoveltyConfig(k_neighbors=2, archive_lambda=2, distance="visual_diversity")
    archive = NoveltyArchive()
    for gen in range(3):
        first = archive.entries
        _, archive = novelty_scores(pop, archive, cfg, rng)
        assert len(archive) == 2 * (gen + 1)
        assert archive.entries[:len(first)] == first
    big = NoveltyConfig(k_neighbors=2, archive_lambda=9, distance="visual_diversity")
    _, grown = novelty_scores(pop, NoveltyArchive(), big, rng)
    assert len(grown) == 5


def test_archive_needs_rng():
    cfg = NoveltyConfig(archive_lambda=1)
    with pytest.raises(ValueError):
        novelty_scores([[maze("..", "..")], [maze("..", ".#")]], NoveltyArchive(), cfg)


def test_k_clamped_with_warning(caplog):
    pop = [[row("000")], [row("100")]]
    with caplog.at_level("WARNING"):
        scores, _ = novelty_scores(pop, NoveltyArchive(), NoveltyConfig(k_neighbors=15, distance="visual_diversity"))
    assert "clamping" in caplog.text
    assert scores == pytest.approx([1 / 3, 1 / 3])


def test_novelty_config_validation():
    with pytest.raises(ValueError):
        NoveltyConfig(k_neighbors=0)
    with pytest.raises(ValueError):
        NoveltyConfig(intra_k=0)


def test_intra_novelty():
    a, b = maze("..", ".."), maze("##", "..")
    assert intra_novelty([a, a, a], 2, "visual_diversity") == 0
    assert intra_novelty([a, b], 5, "visual_diversity") == 0.5
    with pytest.raises(ValueError):
        intra_novelty([a], 1, "visual_diversity")


def test_intra_novelty_brute_force():
    rng = np.random.default_rng(5)
    for d in ALL:
        levels = [random_maze(rng, 5, 5, 0.3) for _ in range(4)]
        per_level = []
        for i in range(4):
            dists = sorted(level_distance(levels[i], levels[j], d) for j in range(4) if j != i)
            per_level.append(sum(dists[:2]) / 2)
        assert intra_novelty(levels, 2, d) == pytest.approx(sum(per_level) / 4, abs=1e-12)


def test_distance_csv(tmp_path):
    m = np.array([[math.inf, 0.5], [0.5, math.inf]])
    write_distance_csv(tmp_path / "d.csv", m)
    assert (tmp_path / "d.csv").read_text().splitlines() == ["i,j,distance", "0,1,0.5", "1,0,0.5"]
