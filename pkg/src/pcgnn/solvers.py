"""Playability oracles: A* over maze cells and over a coarse platformer state space."""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from pcgnn.tilemap import EMPTY, Game, Level

MAX_JUMP = 4
_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass(frozen=True)
class SearchResult:
    solvable: bool
    trajectory: list[tuple[int, int]] = field(default_factory=list)
    expanded: int = 0

    def __post_init__(self):
        if self.solvable != bool(self.trajectory):
            raise ValueError("a result is solvable exactly when it carries a trajectory")


def solve(level: Level) -> SearchResult:
    if level.tileset.game is Game.MAZE:
        return solve_maze(level)
    return solve_platformer(level)


# -- maze ---------------------------------------------------------------------

def solve_maze(level: Level) -> SearchResult:
    """A* from the top-left to the bottom-right cell over 4-connected empty cells.

    Manhattan heuristic. The frontier is ordered by ``(f, -g, y, x)``: among
    equal f the deeper node goes first, so open ground is crossed without
    fanning out, and the expansion count is reproducible. A walled start
    expands nothing; a walled goal still explores the start's component.
    """
    cells = level.cells
    h, w = cells.shape
    goal = (w - 1, h - 1)
    if cells[0, 0] != EMPTY:
        return SearchResult(False, [], 0)
    open_cells = (cells == EMPTY).tolist()
    best_g = {(0, 0): 0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    closed = set()
    frontier = [(goal[0] + goal[1], 0, 0, 0)]  # (f, -g, y, x)
    expanded = 0
    while frontier:
        f, neg_g, y, x = heapq.heappop(frontier)
        if (x, y) in closed:
            continue
        closed.add((x, y))
        expanded += 1
        if (x, y) == goal:
            path = [(x, y)]
            while path[-1] in parent:
                path.append(parent[path[-1]])
            return SearchResult(True, path[::-1], expanded)
        ng = 1 - neg_g
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < w and 0 <= ny < h and open_cells[ny][nx] and ng < best_g.get((nx, ny), ng + 1):
                best_g[(nx, ny)] = ng
                parent[(nx, ny)] = (x, y)
                heapq.heappush(frontier, (ng + (goal[0] - nx) + (goal[1] - ny), -ng, ny, nx))
    return SearchResult(False, [], expanded)


def reachable_mask(level: Level) -> np.ndarray:
    """Empty cells 4-connected to the start; all False when the start is a wall."""
    empty = level.cells == EMPTY
    if not empty[0, 0]:
        return np.zeros_like(empty)
    labels, _ = ndimage.label(empty, structure=_FOUR_CONNECTED)
    return labels == labels[0, 0]


def maze_connected(level: Level) -> bool:
    mask = reachable_mask(level)
    return bool(mask[-1, -1])


# -- platformer ---------------------------------------------------------------

class PlatformerState(NamedTuple):
    x: int
    y: int
    airborne: bool
    jump_power_left: int


class _Physics:
    """Per-level lookup tables shared by successor generation and search."""

    def __init__(self, level: Level):
        self.h, self.w = level.cells.shape
        self.solid = level.tileset.solid_mask()[level.cells].tolist()
        self.hazard = level.tileset.hazard_mask()[level.cells].tolist()

    def passable(self, x: int, y: int) -> bool:
        return 0 <= x < self.w and 0 <= y < self.h and not self.solid[y][x] and not self.hazard[y][x]

    def supported(self, x: int, y: int) -> bool:
        return y + 1 < self.h and self.solid[y + 1][x]

    def settle(self, x: int, y: int, power: int) -> PlatformerState:
        if power > 0:
            return PlatformerState(x, y, True, power)
        return PlatformerState(x, y, not self.supported(x, y), 0)

    def successors(self, s: PlatformerState) -> list[PlatformerState]:
        x, y = s.x, s.y
        out = []
        if s.jump_power_left > 0:
            if not (y - 1 >= 0 and not self.solid[y - 1][x]):
                # head bump: the jump ends here
                return [self.settle(x, y, 0)]
            for dx in (-1, 0, 1):
                if self.passable(x + dx, y - 1):
                    out.append(self.settle(x + dx, y - 1, s.jump_power_left - 1))
        elif s.airborne:
            for dx in (-1, 0, 1):
                if self.passable(x + dx, y + 1):
                    out.append(self.settle(x + dx, y + 1, 0))
        else:
            for dx in (-1, 1):
                if self.passable(x + dx, y):
                    out.append(self.settle(x + dx, y, 0))
            if self.passable(x, y - 1):
                # take-off is a straight step up that spends one unit of jump power
                for power in range(1, MAX_JUMP + 1):
                    out.append(self.settle(x, y - 1, power - 1))
        return out


def platformer_successors(state: PlatformerState, level: Level) -> list[PlatformerState]:
    """One-tile moves under the simplified physics.

    Grounded: step left/right, or take off with jump power 1..4 (the take-off
    itself moves one tile up). Ascending: up one tile with optional lateral
    step, spending one unit; a solid tile straight above ends the jump.
    Falling: down one tile with optional lateral step. Moves into solid or
    hazard tiles, or out of the level, are dropped.
    """
    return _Physics(level).successors(state)


def platformer_start(level: Level) -> PlatformerState | None:
    phys = _Physics(level)
    for y in range(phys.h - 1, -1, -1):
        if phys.passable(0, y) and phys.supported(0, y):
            return PlatformerState(0, y, False, 0)
    for y in range(phys.h):
        if phys.passable(0, y):
            return phys.settle(0, y, 0)
    return None


def solve_platformer(level: Level) -> SearchResult:
    """A* to any state in the rightmost column; heuristic is the horizontal gap.

    Same ``(f, -g, y, x)`` frontier order as the maze search, extended by the
    airborne flag and remaining jump power.
    """
    phys = _Physics(level)
    start = platformer_start(level)
    if start is None:
        return SearchResult(False, [], 0)
    goal_x = phys.w - 1
    parent: dict[PlatformerState, PlatformerState] = {}
    best_g = {start: 0}
    closed = set()
    frontier = [(goal_x - start.x, 0, start.y, start.x, start.airborne, start.jump_power_left)]
    expanded = 0
    while frontier:
        _, neg_g, y, x, airborne, power = heapq.heappop(frontier)
        state = PlatformerState(x, y, airborne, power)
        if state in closed:
            continue
        closed.add(state)
        expanded += 1
        if x == goal_x:
            path = [state]
            while path[-1] in parent:
                path.append(parent[path[-1]])
            return SearchResult(True, [(s.x, s.y) for s in reversed(path)], expanded)
        ng = 1 - neg_g
        for nxt in phys.successors(state):
            if ng < best_g.get(nxt, ng + 1):
                best_g[nxt] = ng
                parent[nxt] = state
                heapq.heappush(frontier, (ng + goal_x - nxt.x, -ng, nxt.y, nxt.x,
                                          nxt.airborne, nxt.jump_power_left))
    return SearchResult(False, [], expanded)


def write_trajectory_csv(path: str | Path, result: SearchResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "x", "y"])
        for step, (x, y) in enumerate(result.trajectory):
            writer.writerow([step, x, y])
