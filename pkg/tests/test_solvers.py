from collections import deque

import numpy as np
import pytest

from helpers import flat_mario, gap_mario, mario, maze, random_maze
from pcgnn.solvers import (PlatformerState, SearchResult, maze_connected, platformer_start,
                           platformer_successors, reachable_mask, solve, solve_maze,
                           write_trajectory_csv)
from pcgnn.tilemap import MAZE_TILESET, Level


def bfs_distance(level):
    """Oracle: breadth-first shortest path length in moves, or None."""
    cells = level.cells
    h, w = cells.shape
    if cells[0, 0] or cells[-1, -1]:
        return None
    dist = {(0, 0): 0}
    queue = deque([(0, 0)])
    while queue:
        x, y = queue.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < w and 0 <= ny < h and not cells[ny, nx] and (nx, ny) not in dist:
                dist[(nx, ny)] = dist[(x, y)] + 1
                queue.append((nx, ny))
    return dist.get((w - 1, h - 1))


def platformer_bfs(level):
    """Oracle: exhaustive search over the successor relation."""
    start = platformer_start(level)
    if start is None:
        return False
    seen, queue = {start}, deque([start])
    while queue:
        s = queue.popleft()
        if s.x == level.width - 1:
            return True
        for n in platformer_successors(s, level):
            if n not in seen:
                seen.add(n)
                queue.append(n)
    return False


def assert_valid_maze_path(level, path):
    assert path[0] == (0, 0)
    assert path[-1] == (level.width - 1, level.height - 1)
    for (x0, y0), (x1, y1) in zip(path, path[1:]):
        assert abs(x0 - x1) + abs(y0 - y1) == 1
    assert all(level.cells[y, x] == 0 for x, y in path)


def test_open_maze():
    level = maze("...", "...", "...")
    result = solve_maze(level)
    assert result.solvable and len(result.trajectory) == 5
    assert result.expanded == 5


def test_blocked_maze():
    result = solve_maze(maze(".#", "#."))
    assert not result.solvable and result.trajectory == []
    assert result.expanded == 1


def test_walled_start_expands_nothing():
    assert solve_maze(maze("#.", "..")) == SearchResult(False, [], 0)


def test_walled_goal_still_explores():
    result = solve_maze(maze("..", ".#"))
    assert not result.solvable and result.expanded == 3


def test_single_corridor():
    level = maze(".####", ".....", "####.")
    result = solve(level)
    assert result.trajectory == [(0, 0), (0, 1), (1, 1), (2, 1), (3, 1), (4, 1), (4, 2)]


def test_random_mazes_match_bfs():
    rng = np.random.default_rng(0)
    for _ in range(300):
        level = random_maze(rng, int(rng.integers(2, 12)), int(rng.integers(2, 12)), wall_density=0.3)
        result = solve_maze(level)
        expected = bfs_distance(level)
        assert result.solvable == (expected is not None)
        assert result.solvable == maze_connected(level)
        if result.solvable:
            assert len(result.trajectory) == expected + 1
            assert_valid_maze_path(level, result.trajectory)
            assert result.expanded >= len(result.trajectory)


def test_solver_is_deterministic():
    level = random_maze(np.random.default_rng(3), wall_density=0.3)
    assert solve_maze(level) == solve_maze(level)


def test_reachable_mask():
    level = maze("..#", "#.#", "#..")
    assert reachable_mask(level).sum() == 5
    assert not reachable_mask(maze("#.", "..")).any()


def test_search_result_invariant():
    with pytest.raises(ValueError):
        SearchResult(True, [])


# -- platformer ---------------------------------------------------------------

def test_flat_ground_is_solvable():
    result = solve(flat_mario())
    assert result.solvable
    assert result.trajectory[0] == (0, 4) and result.trajectory[-1][0] == 19


@pytest.mark.parametrize("gap", range(0, 7))
def test_small_gaps_are_jumpable(gap):
    assert solve(gap_mario(gap)).solvable


@pytest.mark.parametrize("gap", [7, 8, 10])
def test_wide_gaps_are_not(gap):
    assert not solve(gap_mario(gap)).solvable


def test_wall_of_height_four_is_climbable_five_is_not():
    floor = "X" * 20
    four = ["-" * 20] * 2 + ["-" * 10 + "X" + "-" * 9] * 4 + [floor]
    five = ["-" * 20] * 1 + ["-" * 10 + "X" + "-" * 9] * 5 + [floor]
    assert solve(mario(*four)).solvable
    assert not solve(mario(*five)).solvable


def test_enemy_blocks_walking_path():
    column = ["----E-----"] * 5 + ["X" * 10]
    assert not solve(mario(*column)).solvable
    single = ["-" * 10] * 4 + ["----E-----", "X" * 10]
    assert solve(mario(*single)).solvable


def test_head_bump_ends_jump():
    level = mario("---", "XXX", "---", "XXX")
    state = PlatformerState(1, 2, True, 2)
    assert platformer_successors(state, level) == [PlatformerState(1, 2, False, 0)]


def test_take_off_spends_power():
    level = flat_mario(5, 7)
    succ = platformer_successors(PlatformerState(2, 5, False, 0), level)
    jumps = sorted(s.jump_power_left for s in succ if s.y == 4)
    assert jumps == [0, 1, 2, 3]


def test_no_start_position():
    level = mario("X--", "X--", "XXX")
    assert not solve(level).solvable and solve(level).expanded == 0


def test_random_platformers_match_exhaustive_search():
    rng = np.random.default_rng(1)
    tiles = np.array(list("-XSo?E"))
    for _ in range(150):
        w, h = int(rng.integers(3, 14)), int(rng.integers(3, 8))
        probs = [0.6, 0.2, 0.05, 0.05, 0.05, 0.05]
        rows = ["".join(rng.choice(tiles, size=w, p=probs)) for _ in range(h)]
        level = mario(*rows)
        assert solve(level).solvable == platformer_bfs(level)


def test_trajectory_csv(tmp_path):
    result = solve(maze("..", ".."))
    write_trajectory_csv(tmp_path / "t.csv", result)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "step,x,y"
    assert len(lines) == 4


def test_all_four_by_four_mazes_match_bfs():
    for bits in range(1 << 16):
        cells = np.array([(bits >> i) & 1 for i in range(16)]).reshape(4, 4)
        level = Level(cells, MAZE_TILESET)
        result = solve_maze(level)
        expected = bfs_distance(level)
        assert result.solvable == (expected is not None)
        if result.solvable:
            assert len(result.trajectory) == expected + 1


def test_open_fourteen_square_path_length():
    result = solve(maze(*["." * 14] * 14))
    assert len(result.trajectory) == 27


def test_successor_counts():
    flat = flat_mario(7, 7)
    assert len(platformer_successors(PlatformerState(3, 5, False, 0), flat)) == 6
    assert len(platformer_successors(PlatformerState(3, 2, True, 0), flat)) == 3
    beside_enemy = mario("-----", "-----", "---E-", "-----", "XXXXX")
    ascending = platformer_successors(PlatformerState(2, 3, True, 2), beside_enemy)
    assert sorted((s.x, s.y) for s in ascending) == [(1, 2), (2, 2)]


def test_removing_support_can_break_solvability():
    # widening a jumpable gap by one floor tile makes it impassable
    assert solve(gap_mario(6)).solvable
    assert not solve(gap_mario(7)).solvable
