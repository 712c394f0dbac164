"""Grids with 2x2 obstacle blobs and their shortest paths.

Cells are ``(row, col)`` tuples and rasterize to ``row * N + col``. Moves
are 8-connected; breadth-first search expands neighbours in the order
N, NE, E, SE, S, SW, W, NW from a FIFO queue, so ties always resolve the
same way.
"""
import logging
from collections import deque

import numpy as np

from tamlab.extra.const import PATH_TOKEN_OFFSET
from tamlab.extra.exceptions import GenerationError

logger = logging.getLogger(__name__)

NEIGHBOURS = ((-1, 0), (-1, 1), (0, 1), (1, 1),
              (1, 0), (1, -1), (0, -1), (-1, -1))


def rasterize(cell, size=10):
    return int(cell[0]) * size + int(cell[1])


def unrasterize(index, size=10):
    return divmod(int(index), size)


class Grid:
    """N x N grid whose occupied cells are 2x2 blobs clipped at the border.

    Args:
        size (int): N.
        obstacle_blobs (list(tuple)): Top-left cell of every blob.
    """
    def __init__(self, size=10, obstacle_blobs=()):
        self.size = int(size)
        self.obstacle_blobs = [tuple(int(v) for v in cell)
                               for cell in obstacle_blobs]
        self.occupancy = np.zeros((self.size, self.size), dtype=bool)
        for row, col in self.obstacle_blobs:
            self.occupancy[row:row + 2, col:col + 2] = True

    @classmethod
    def from_tokens(cls, tokens, size=10):
        """Grid whose blobs are the rasterized top-left cells ``tokens``."""
        return cls(size, [unrasterize(t, size) for t in tokens])

    def tokens(self):
        return [rasterize(cell, self.size) for cell in self.obstacle_blobs]

    def contains(self, cell):
        return 0 <= cell[0] < self.size and 0 <= cell[1] < self.size

    def is_free(self, cell):
        return self.contains(cell) and not self.occupancy[cell[0], cell[1]]


def shortest_path(grid, start, end):
    """Optimal 8-connected path from ``start`` to ``end``, both included.

    Returns:
        list(tuple): Cells of the path, or None when end is unreachable.
    """
    start, end = tuple(start), tuple(end)
    if not grid.is_free(start) or not grid.is_free(end):
        return None
    parent = {start: None}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        if cell == end:
            break
        for d_row, d_col in NEIGHBOURS:
            nxt = (cell[0] + d_row, cell[1] + d_col)
            if nxt not in parent and grid.is_free(nxt):
                parent[nxt] = cell
                queue.append(nxt)
    if end not in parent:
        return None
    path = [end]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return path[::-1]


def path_length(grid, start, end):
    """Number of cells of an optimal path, None when unreachable.

    Independent of :func:`shortest_path`; used to re-check its optimality.
    """
    dist = np.full((grid.size, grid.size), -1, dtype=np.int64)
    dist[tuple(start)] = 1
    frontier = [tuple(start)]
    while frontier:
        nxt_frontier = []
        for row, col in frontier:
            for d_row in (-1, 0, 1):
                for d_col in (-1, 0, 1):
                    cell = (row + d_row, col + d_col)
                    if grid.is_free(cell) and dist[cell] < 0:
                        dist[cell] = dist[row, col] + 1
                        nxt_frontier.append(cell)
        frontier = nxt_frontier
    found = dist[tuple(end)]
    return None if found < 0 else int(found)


def is_valid_path(grid, path, start, end):
    """True when ``path`` joins start to end through free adjacent cells."""
    if not path or tuple(path[0]) != tuple(start) \
            or tuple(path[-1]) != tuple(end):
        return False
    for a, b in zip(path, path[1:]):
        if max(abs(a[0] - b[0]), abs(a[1] - b[1])) != 1:
            return False
    return all(grid.is_free(cell) for cell in path)


def route(grid, start, end, waypoint=None):
    """Shortest path, through ``waypoint`` when one is given."""
    if waypoint is None:
        return shortest_path(grid, start, end)
    first = shortest_path(grid, start, waypoint)
    second = shortest_path(grid, waypoint, end)
    if first is None or second is None:
        return None
    return first + second[1:]


def sample_grid(rng, size=10, num_obstacles=8):
    blobs = rng.integers(0, size, size=(num_obstacles, 2))
    return Grid(size, [tuple(b) for b in blobs])


def gen_pathfinding_example(spec, rng, size=10, num_obstacles=8,
                            max_resamples=1000):
    """Sample obstacles for ``spec`` and return ``(x, y)`` token lists.

    x holds the rasterized blob cells in sampled order; y the rasterized
    path cells shifted by 100.

    Raises:
        GenerationError: If no admissible grid is found within
            ``max_resamples`` draws.
    """
    keep_free = [spec.start, spec.end] + (
        [spec.waypoint] if spec.waypoint is not None else [])
    blocked = unreachable = 0
    for _ in range(max_resamples):
        grid = sample_grid(rng, size, num_obstacles)
        if not all(grid.is_free(cell) for cell in keep_free):
            blocked += 1
            continue
        path = route(grid, spec.start, spec.end, spec.waypoint)
        if path is None:
            unreachable += 1
            continue
        x = grid.tokens()
        y = [PATH_TOKEN_OFFSET + rasterize(cell, size) for cell in path]
        return x, y
    raise GenerationError(
        '[Benchgen] no admissible grid for start %s end %s waypoint %s '
        'after %s draws' % (spec.start, spec.end, spec.waypoint,
                            max_resamples),
        {'blocked': blocked, 'unreachable': unreachable,
         'draws': max_resamples})
