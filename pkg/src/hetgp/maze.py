"""Perfect mazes from Wilson's algorithm, rasterized to occupancy grids."""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import FrozenSet, Optional, Set, Tuple

import numpy as np

from .environment import OccupancyGrid, build_sdf, load_occupancy, save_occupancy

Cell = Tuple[int, int]
Edge = FrozenSet[Cell]

MAX_WALK_STEPS = 10**7


class MazeConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MazeSpec:
    """Logical maze size plus its metric inflation.

    Unless ``cell_size`` is given, every maze spans the same square workspace
    of side ``workspace_size`` so that larger ``n`` means narrower corridors.
    """

    n: int
    cell_size: Optional[float] = None
    wall_thickness: float = 0.2
    resolution: float = 0.05
    seed: int = 0
    workspace_size: float = 30.0

    def __post_init__(self):
        if self.n < 1:
            raise MazeConfigError("maze needs at least one cell per side")
        if not 0 < self.wall_thickness < self.cell:
            raise MazeConfigError("wall_thickness must be in (0, cell_size)")

    @property
    def cell(self) -> float:
        return self.cell_size if self.cell_size is not None else self.workspace_size / self.n


@dataclass
class MazeEnvironment:
    occupancy: OccupancyGrid
    start: np.ndarray
    goal: np.ndarray
    spec: MazeSpec
    passages: Optional[Set[Edge]] = None


def neighbors(cell: Cell, n: int):
    r, c = cell
    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        rr, cc = r + dr, c + dc
        if 0 <= rr < n and 0 <= cc < n:
            yield (rr, cc)


def wilson_maze(n: int, seed: int) -> Set[Edge]:
    """Uniform spanning tree of the n x n grid graph via loop-erased walks."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    cells = [(r, c) for r in range(n) for c in range(n)]
    nbrs = {cell: list(neighbors(cell, n)) for cell in cells}
    in_tree = {rng.choice(cells)}
    edges: Set[Edge] = set()
    steps = 0
    for cell in cells:
        if cell in in_tree:
            continue
        # walk until the tree is hit; overwriting next_step erases loops
        next_step = {}
        cur = cell
        while cur not in in_tree:
            nxt = rng.choice(nbrs[cur])
            next_step[cur] = nxt
            cur = nxt
            steps += 1
            if steps > MAX_WALK_STEPS:
                raise RuntimeError(f"walk step cap hit for seed {seed}")
        cur = cell
        while cur not in in_tree:
            in_tree.add(cur)
            edges.add(frozenset((cur, next_step[cur])))
            cur = next_step[cur]
    return edges


def is_spanning_tree(edges, n: int) -> bool:
    parent = list(range(n * n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if len(edges) != n * n - 1:
        return False
    for e in edges:
        (r1, c1), (r2, c2) = sorted(e)
        a, b = find(r1 * n + c1), find(r2 * n + c2)
        if a == b:
            return False
        parent[a] = b
    return True


def cell_center(spec: MazeSpec, cell: Cell) -> np.ndarray:
    r, c = cell
    return np.array([(c + 0.5) * spec.cell, (r + 0.5) * spec.cell])


def rasterize(passages: Set[Edge], spec: MazeSpec) -> OccupancyGrid:
    """Walls of the given thickness, centered on every closed cell boundary.

    The world frame puts maze cell (0, 0) at [0, cell_size]^2; the raster
    extends half a wall beyond the outer boundary.
    """
    n, cs, half, res = spec.n, spec.cell, 0.5 * spec.wall_thickness, spec.resolution
    size = int(round((n * cs + 2 * half) / res))
    origin = (-half, -half)
    centers = origin[0] + (np.arange(size) + 0.5) * res
    x = centers[None, :]
    y = centers[:, None]
    occ = np.zeros((size, size), dtype=bool)
    eps = 1e-9
    for k in range(n + 1):
        near_x = np.abs(x - k * cs) < half - eps  # vertical line x = k * cs
        near_y = np.abs(y - k * cs) < half - eps
        for j in range(n):
            span_y = (y > j * cs - half + eps) & (y < (j + 1) * cs + half - eps)
            span_x = (x > j * cs - half + eps) & (x < (j + 1) * cs + half - eps)
            # vertical wall between (j, k-1) and (j, k)
            if k in (0, n) or frozenset(((j, k - 1), (j, k))) not in passages:
                occ |= near_x & span_y
            # horizontal wall between (k-1, j) and (k, j)
            if k in (0, n) or frozenset(((k - 1, j), (k, j))) not in passages:
                occ |= near_y & span_x
    return OccupancyGrid(occ, res, origin)


def inflate(passages: Set[Edge], spec: MazeSpec, robot_radius: float = 0.5) -> MazeEnvironment:
    grid = rasterize(passages, spec)
    start = cell_center(spec, (0, 0))
    goal = cell_center(spec, (spec.n - 1, spec.n - 1))
    sdf = build_sdf(grid)
    for name, p in (("start", start), ("goal", goal)):
        r, c = grid.world_to_cell(p)
        if sdf.values[r, c] <= robot_radius:
            raise MazeConfigError(
                f"{name} clearance {sdf.values[r, c]:.3f} m does not exceed robot radius "
                f"{robot_radius} m; enlarge cell_size or thin the walls")
    return MazeEnvironment(grid, start, goal, spec, passages)


def generate_maze(spec: MazeSpec, robot_radius: float = 0.5) -> MazeEnvironment:
    return inflate(wilson_maze(spec.n, spec.seed), spec, robot_radius)


def solvable_path_exists(env: MazeEnvironment, robot_radius: float) -> bool:
    """4-connected BFS from start to goal over raster cells with SDF > r."""
    grid = env.occupancy
    sdf = build_sdf(grid)
    free = sdf.values > robot_radius
    start = grid.world_to_cell(env.start)
    goal = grid.world_to_cell(env.goal)
    if not (free[start] and free[goal]):
        return False
    seen = np.zeros_like(free)
    seen[start] = True
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        if (r, c) == goal:
            return True
        for rr, cc in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
            if 0 <= rr < free.shape[0] and 0 <= cc < free.shape[1] and free[rr, cc] and not seen[rr, cc]:
                seen[rr, cc] = True
                queue.append((rr, cc))
    return False


# -- corpus persistence --------------------------------------------------------

def save_maze(env: MazeEnvironment, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_occupancy(env.occupancy, directory / "occupancy.pgm", directory / "occupancy.json")
    meta = {
        "kind": "maze",
        "seed": env.spec.seed,
        "n": env.spec.n,
        "start": [float(v) for v in env.start],
        "goal": [float(v) for v in env.goal],
        "spec": asdict(env.spec),
    }
    if env.passages is not None:
        meta["passages"] = sorted(sorted(list(c) for c in e) for e in env.passages)
    (directory / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def load_maze(directory) -> MazeEnvironment:
    directory = Path(directory)
    meta_path = directory / "meta.json"
    try:
        meta = json.loads(meta_path.read_text())
        spec = MazeSpec(**meta["spec"])
        passages = None
        if "passages" in meta:
            passages = {frozenset(tuple(c) for c in e) for e in meta["passages"]}
        start, goal = np.array(meta["start"], float), np.array(meta["goal"], float)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ValueError(f"cannot load maze metadata {meta_path}: {exc}") from exc
    grid = load_occupancy(directory / "occupancy.pgm", directory / "occupancy.json")
    return MazeEnvironment(grid, start, goal, spec, passages)
