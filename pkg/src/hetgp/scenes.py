"""Open 2D scenes where obstacles hug the start and the goal.

A planar stand-in for reaching out from under a table into a drawer: each
scene puts a wall block directly in front of the start and another directly
in front of the goal, so the straight line is blocked near both ends while
the middle of the workspace stays open. Geometry jitter comes from a seeded
``random.Random``.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .environment import OccupancyGrid, build_sdf, load_occupancy, save_occupancy


@dataclass(frozen=True)
class SceneSpec:
    seed: int = 0
    workspace_size: float = 30.0
    resolution: float = 0.05
    end_margin: float = 4.0  # start/goal distance from the left/right border
    gap: float = 1.0  # free space between an endpoint and the face of its block
    block_depth: float = 1.0
    half_span: tuple = (2.0, 4.0)  # block half-length range across the path
    pocket: bool = False  # side walls turning each block into a U open away from the path

    def __post_init__(self):
        lo, hi = self.half_span
        if not 0 < lo <= hi:
            raise ValueError("half_span must satisfy 0 < lo <= hi")
        if self.gap <= 0 or self.block_depth <= 0:
            raise ValueError("gap and block_depth must be positive")


@dataclass
class SceneEnvironment:
    occupancy: OccupancyGrid
    start: np.ndarray
    goal: np.ndarray
    spec: SceneSpec
    blocks: list  # axis-aligned boxes (x0, y0, x1, y1) in meters


def _fill_box(occ: np.ndarray, res: float, box) -> None:
    x0, y0, x1, y1 = box
    c0, c1 = int(np.floor(x0 / res)), int(np.ceil(x1 / res))
    r0, r1 = int(np.floor(y0 / res)), int(np.ceil(y1 / res))
    occ[max(r0, 0):max(r1, 0), max(c0, 0):max(c1, 0)] = True


def _pocket(anchor: np.ndarray, facing: float, spec: SceneSpec, rng: random.Random) -> list:
    """Blocks around ``anchor``; ``facing`` is +1 when the path leaves toward +x."""
    half = rng.uniform(*spec.half_span)
    dy = rng.uniform(-0.5, 0.5) * half
    near = anchor[0] + facing * spec.gap
    far = near + facing * spec.block_depth
    x0, x1 = min(near, far), max(near, far)
    yc = anchor[1] + dy
    boxes = [(x0, yc - half, x1, yc + half)]
    if spec.pocket:
        # side walls run back past the endpoint, leaving the U open behind it
        back = anchor[0] - facing * rng.uniform(0.5, 1.5)
        bx0, bx1 = min(back, x0), max(back, x1)
        t = spec.block_depth * 0.5
        boxes.append((bx0, yc + half - t, bx1, yc + half))
        boxes.append((bx0, yc - half, bx1, yc - half + t))
    return boxes


def generate_scene(spec: SceneSpec, robot_radius: float = 0.5) -> SceneEnvironment:
    rng = random.Random(spec.seed)
    size = spec.workspace_size
    res = spec.resolution
    cells = int(round(size / res))
    y_start = rng.uniform(0.35, 0.65) * size
    y_goal = rng.uniform(0.35, 0.65) * size
    start = np.array([spec.end_margin, y_start])
    goal = np.array([size - spec.end_margin, y_goal])
    occ = np.zeros((cells, cells), dtype=bool)
    blocks = _pocket(start, 1.0, spec, rng) + _pocket(goal, -1.0, spec, rng)
    for box in blocks:
        _fill_box(occ, res, box)
    grid = OccupancyGrid(occ, res)
    sdf = build_sdf(grid)
    for name, p in (("start", start), ("goal", goal)):
        r, c = grid.world_to_cell(p)
        if sdf.values[r, c] <= robot_radius:
            raise ValueError(f"scene {spec.seed}: {name} clearance below robot radius")
    return SceneEnvironment(grid, start, goal, spec, blocks)


def save_scene(env: SceneEnvironment, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_occupancy(env.occupancy, directory / "occupancy.pgm", directory / "occupancy.json")
    meta = {
        "kind": "scene",
        "seed": env.spec.seed,
        "start": [float(v) for v in env.start],
        "goal": [float(v) for v in env.goal],
        "spec": asdict(env.spec),
        "blocks": [[float(v) for v in b] for b in env.blocks],
    }
    (directory / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def load_scene(directory) -> SceneEnvironment:
    directory = Path(directory)
    meta_path = directory / "meta.json"
    try:
        meta = json.loads(meta_path.read_text())
        fields = dict(meta["spec"])
        fields["half_span"] = tuple(fields["half_span"])
        spec = SceneSpec(**fields)
        blocks = [tuple(b) for b in meta["blocks"]]
        start, goal = np.array(meta["start"], float), np.array(meta["goal"], float)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ValueError(f"cannot load scene metadata {meta_path}: {exc}") from exc
    grid = load_occupancy(directory / "occupancy.pgm", directory / "occupancy.json")
    return SceneEnvironment(grid, start, goal, spec, blocks)
