"""Small builders shared by the test modules."""

import numpy as np

from pcgnn.tilemap import MARIO_TILESET, MAZE_TILESET, Level, parse_level


def maze(*rows: str) -> Level:
    return parse_level("\n".join(rows) + "\n", MAZE_TILESET)


def mario(*rows: str) -> Level:
    return parse_level("\n".join(rows) + "\n", MARIO_TILESET)


def flat_mario(width: int = 20, height: int = 6) -> Level:
    rows = ["-" * width] * (height - 1) + ["X" * width]
    return mario(*rows)


def gap_mario(gap: int, width: int = 24, height: int = 6) -> Level:
    floor = "X" * 4 + "-" * gap + "X" * (width - 4 - gap)
    return mario(*(["-" * width] * (height - 1) + [floor]))


def random_maze(rng: np.random.Generator, width: int = 14, height: int = 14,
                wall_density: float | None = None) -> Level:
    if wall_density is None:
        return Level(rng.integers(0, 2, (height, width)), MAZE_TILESET)
    return Level((rng.random((height, width)) < wall_density).astype(int), MAZE_TILESET)
