"""Tile grids, tilesets and the plain-text level format."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

PADDING = -1


class Game(str, enum.Enum):
    MAZE = "maze"
    MARIO = "mario"


@dataclass(frozen=True)
class Tile:
    index: int
    glyph: str
    name: str
    solid: bool = False
    hazard: bool = False


@dataclass(frozen=True)
class Tileset:
    game: Game
    tiles: tuple[Tile, ...]

    def __post_init__(self):
        for i, tile in enumerate(self.tiles):
            if tile.index != i:
                raise ValueError(f"tile indices must be contiguous from 0, got {tile.index} at {i}")
        glyphs = [t.glyph for t in self.tiles]
        if len(set(glyphs)) != len(glyphs):
            raise ValueError("tile glyphs must be unique")

    @property
    def n(self) -> int:
        return len(self.tiles)

    def glyph_map(self) -> dict[str, int]:
        return {t.glyph: t.index for t in self.tiles}

    def solid_mask(self) -> np.ndarray:
        return np.array([t.solid for t in self.tiles], dtype=bool)

    def hazard_mask(self) -> np.ndarray:
        return np.array([t.hazard for t in self.tiles], dtype=bool)


MAZE_TILESET = Tileset(
    Game.MAZE,
    (
        Tile(0, ".", "empty"),
        Tile(1, "#", "wall", solid=True),
    ),
)

MARIO_TILESET = Tileset(
    Game.MARIO,
    (
        Tile(0, "-", "empty"),
        Tile(1, "X", "solid", solid=True),
        Tile(2, "S", "brick", solid=True),
        Tile(3, "?", "question", solid=True),
        Tile(4, "o", "coin"),
        Tile(5, "E", "enemy", hazard=True),
    ),
)

# Maze tiles by name, used throughout the solvers and metrics.
EMPTY = 0
WALL = 1

DEFAULT_SIZES = {Game.MAZE: (14, 14), Game.MARIO: (114, 14)}


def tileset_for(game: Game | str) -> Tileset:
    game = Game(game)
    return MAZE_TILESET if game is Game.MAZE else MARIO_TILESET


class LevelFormatError(ValueError):
    """Raised when level text cannot be parsed; carries the offending position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} at line {line}, column {column}"
        super().__init__(message)


class Level:
    """A rectangular grid of tile indices, stored row-major as ``cells[y, x]``."""

    __slots__ = ("cells", "tileset")

    def __init__(self, cells, tileset: Tileset):
        cells = np.array(cells, dtype=np.int64)
        if cells.ndim != 2:
            raise ValueError("level cells must be a 2D grid")
        if cells.size and (cells.min() < 0 or cells.max() >= tileset.n):
            raise ValueError(f"cell values must lie in 0..{tileset.n - 1}")
        cells.setflags(write=False)
        self.cells = cells
        self.tileset = tileset

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def __eq__(self, other):
        if not isinstance(other, Level):
            return NotImplemented
        return self.tileset == other.tileset and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.tileset.game, self.cells.shape, self.cells.tobytes()))

    def __repr__(self):
        return f"Level({self.tileset.game.value}, {self.width}x{self.height})"

    def with_cells(self, cells) -> "Level":
        return Level(cells, self.tileset)


def parse_level(text: str, tileset: Tileset) -> Level:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise LevelFormatError("empty level")
    lookup = tileset.glyph_map()
    width = len(lines[0])
    rows = []
    for y, line in enumerate(lines):
        if len(line) != width:
            raise LevelFormatError(
                f"ragged line: expected {width} glyphs, got {len(line)}", y, min(len(line), width)
            )
        row = []
        for x, ch in enumerate(line):
            if ch not in lookup:
                raise LevelFormatError(f"unknown glyph {ch!r}", y, x)
            row.append(lookup[ch])
        rows.append(row)
    return Level(rows, tileset)


def serialize_level(level: Level) -> str:
    glyphs = np.array([t.glyph for t in level.tileset.tiles])
    return "".join("".join(row) + "\n" for row in glyphs[level.cells])


def read_level(path: str | Path, tileset: Tileset) -> Level:
    return parse_level(Path(path).read_text(encoding="utf-8"), tileset)


def write_level(path: str | Path, level: Level) -> None:
    Path(path).write_text(serialize_level(level), encoding="utf-8")


def random_level(width: int, height: int, tileset: Tileset, rng: np.random.Generator) -> Level:
    """Each cell drawn independently and uniformly over the tileset."""
    if width < 2 or height < 2:
        raise ValueError(f"level must be at least 2x2, got {width}x{height}")
    return Level(rng.integers(0, tileset.n, size=(height, width)), tileset)


def padded_window(level: Level, x: int, y: int, context_size: int) -> np.ndarray:
    """Row-major neighbourhood of ``(x, y)`` with the centre removed.

    Positions outside the level read as ``PADDING`` (-1). The result has
    ``(2c+1)**2 - 1`` entries.
    """
    if context_size < 1:
        raise ValueError("context_size must be >= 1")
    if not (0 <= x < level.width and 0 <= y < level.height):
        raise IndexError(f"({x}, {y}) outside {level.width}x{level.height} level")
    c = context_size
    padded = np.pad(level.cells, c, constant_values=PADDING)
    block = padded[y : y + 2 * c + 1, x : x + 2 * c + 1].ravel()
    centre = (2 * c + 1) * c + c
    return np.delete(block, centre)


def padding_count(x: int, y: int, context_size: int, width: int, height: int) -> int:
    """Number of out-of-bounds entries in ``padded_window(level, x, y, c)``."""
    c = context_size
    inside_x = min(x + c, width - 1) - max(x - c, 0) + 1
    inside_y = min(y + c, height - 1) - max(y - c, 0) + 1
    return (2 * c + 1) ** 2 - inside_x * inside_y


def write_pgm(path: str | Path, level: Level) -> None:
    """Plain (P2) greyscale rendering, tile index scaled to 0-255."""
    scale = 255 // max(level.tileset.n - 1, 1)
    lines = ["P2", f"{level.width} {level.height}", "255"]
    lines += [" ".join(str(int(v) * scale) for v in row) for row in level.cells]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def stack_cells(levels: Iterable[Level]) -> np.ndarray:
    return np.stack([lvl.cells for lvl in levels])
