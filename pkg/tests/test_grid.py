"""Test grids, shortest paths and path-finding examples."""
import numpy as np
import pytest

from tamlab.benchgen import Grid, TaskSpec, gen_pathfinding_example,\
                            rasterize, shortest_path, unrasterize
from tamlab.benchgen.grid import is_valid_path, path_length, route
from tamlab.extra.const import PATH_TOKEN_OFFSET
from tamlab.extra.exceptions import GenerationError
from tamlab.selfcheck import PRINTED_PATHS, printed_paths


def test_rasterize():
    """Cells map to row * N + col and back."""
    assert rasterize((7, 0)) == 70
    assert rasterize((1, 4)) == 14
    assert unrasterize(14) == (1, 4)
    assert rasterize((2, 3), size=5) == 13


def test_blobs_cover_two_by_two():
    """A blob occupies its cell and the three below/right, clipped."""
    grid = Grid(4, [(0, 0), (3, 3)])
    assert grid.occupancy.sum() == 5
    assert not grid.is_free((1, 1))
    assert not grid.is_free((3, 3))
    assert grid.is_free((2, 2))
    assert not grid.is_free((4, 0))


@pytest.mark.parametrize('index, length', [(0, 9), (1, 7), (2, 8)])
def test_printed_examples(index, length):
    """Shortest paths of the published grids have the published lengths."""
    source, target = PRINTED_PATHS[index]
    grid = Grid.from_tokens(source)
    path = shortest_path(grid, (7, 0), (1, 4))
    assert len(path) == length == len(target)
    assert path_length(grid, (7, 0), (1, 4)) == length
    assert is_valid_path(grid, path, (7, 0), (1, 4))
    assert PATH_TOKEN_OFFSET + rasterize(path[0]) == target[0]
    assert PATH_TOKEN_OFFSET + rasterize(path[-1]) == target[-1]


def test_selfcheck_paths_pass():
    """The built-in path checks agree."""
    assert all(result.passed for result in printed_paths())


def test_tie_break_order():
    """Neighbours expand N, NE, E, SE, ... so ties resolve the same way."""
    grid = Grid(3)
    assert shortest_path(grid, (0, 0), (2, 2)) == [(0, 0), (1, 1), (2, 2)]
    assert shortest_path(grid, (0, 0), (0, 2)) == [(0, 0), (0, 1), (0, 2)]
    assert shortest_path(grid, (2, 0), (0, 0)) == [(2, 0), (1, 0), (0, 0)]


def test_unreachable():
    """A full wall leaves no path."""
    grid = Grid(4, [(0, 1), (2, 1)])
    assert shortest_path(grid, (0, 0), (0, 3)) is None
    assert path_length(grid, (0, 0), (0, 3)) is None


def test_blocked_endpoint():
    """No path starts or ends inside an obstacle."""
    grid = Grid(4, [(0, 0)])
    assert shortest_path(grid, (1, 1), (3, 3)) is None


def test_route_through_waypoint():
    """Both legs are joined with the waypoint once."""
    grid = Grid(5)
    path = route(grid, (0, 0), (0, 4), waypoint=(4, 2))
    assert path[0] == (0, 0) and path[-1] == (0, 4)
    assert path.count((4, 2)) == 1
    assert len(path) == 5 + 5 - 1
    assert is_valid_path(grid, path, (0, 0), (0, 4))


def test_generated_example():
    """x holds the blob cells, y the shifted path from start to end."""
    spec = TaskSpec('pathfinding', start=(0, 0), end=(4, 4))
    rng = np.random.default_rng(3)
    x, y = gen_pathfinding_example(spec, rng, size=5, num_obstacles=2)
    assert len(x) == 2
    assert y[0] == PATH_TOKEN_OFFSET and y[-1] == PATH_TOKEN_OFFSET + 24
    grid = Grid.from_tokens(x, size=5)
    path = [unrasterize(t - PATH_TOKEN_OFFSET, 5) for t in y]
    assert path == shortest_path(grid, (0, 0), (4, 4))


def test_generated_example_is_reproducible():
    """The same generator state gives the same example."""
    spec = TaskSpec('pathfinding', start=(1, 0), end=(3, 4), waypoint=(0, 4))
    first = gen_pathfinding_example(spec, np.random.default_rng(8), 5, 3)
    second = gen_pathfinding_example(spec, np.random.default_rng(8), 5, 3)
    assert first == second


def test_no_admissible_grid():
    """Exhausted resampling raises GenerationError with diagnostics."""
    spec = TaskSpec('pathfinding', start=(0, 0), end=(2, 2))
    with pytest.raises(GenerationError) as err:
        gen_pathfinding_example(spec, np.random.default_rng(0), size=3,
                                num_obstacles=30, max_resamples=5)
    assert err.value.diagnostics['draws'] == 5
    assert err.value.diagnostics['blocked'] + \
        err.value.diagnostics['unreachable'] == 5
