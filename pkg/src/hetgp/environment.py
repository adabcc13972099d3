"""2D workspace: occupancy grid, signed distance field and collision cost.

Grids are indexed ``cells[row, col]`` with row along +y and col along +x.
``origin`` is the world position of the lower-left corner of cell (0, 0), so
the center of cell (row, col) is ``origin + ((col, row) + 0.5) * resolution``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage

from .interpolation import InterpTable, densify, position_operator


@dataclass(frozen=True)
class OccupancyGrid:
    cells: np.ndarray  # bool, True = occupied
    resolution: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.cells.ndim != 2 or min(self.cells.shape) < 1:
            raise ValueError("occupancy grid must be a non-empty 2D array")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def extent(self) -> tuple:
        ox, oy = self.origin
        return ox, oy, ox + self.width * self.resolution, oy + self.height * self.resolution

    def cell_center(self, row: int, col: int) -> np.ndarray:
        return np.array([self.origin[0] + (col + 0.5) * self.resolution,
                         self.origin[1] + (row + 0.5) * self.resolution])

    def world_to_cell(self, point) -> tuple:
        x, y = point
        return (int(np.floor((y - self.origin[1]) / self.resolution)),
                int(np.floor((x - self.origin[0]) / self.resolution)))

    def shifted(self, rows: int, cols: int) -> "OccupancyGrid":
        ox, oy = self.origin
        return OccupancyGrid(self.cells, self.resolution,
                             (ox + cols * self.resolution, oy + rows * self.resolution))


@dataclass(frozen=True)
class SignedDistanceField:
    values: np.ndarray  # float, meters
    resolution: float
    origin: tuple = (0.0, 0.0)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def cap(self) -> float:
        return float(np.hypot(self.width, self.height) * self.resolution)


@dataclass(frozen=True)
class CostParams:
    robot_radius: float = 0.5
    safety_margin: float = 0.1

    def __post_init__(self):
        if not self.robot_radius > 0:
            raise ValueError("robot_radius must be positive")
        if self.safety_margin < 0:
            raise ValueError("safety_margin must be non-negative")

    @property
    def clearance(self) -> float:
        return self.robot_radius + self.safety_margin


def build_sdf(grid: OccupancyGrid) -> SignedDistanceField:
    """Exact Euclidean signed distance between cell centers.

    Free cells hold the distance to the nearest occupied center, occupied
    cells minus the distance to the nearest free center. Values are capped
    at the grid diagonal.
    """
    occ = np.asarray(grid.cells, dtype=bool)
    cap = float(np.hypot(grid.width, grid.height) * grid.resolution)
    if not occ.any():
        values = np.full(occ.shape, cap)
    elif occ.all():
        values = np.full(occ.shape, -cap)
    else:
        to_occupied = ndimage.distance_transform_edt(~occ)
        to_free = ndimage.distance_transform_edt(occ)
        values = np.where(occ, -to_free, to_occupied) * grid.resolution
        values = np.clip(values, -cap, cap)
    return SignedDistanceField(values.astype(float), grid.resolution, tuple(grid.origin))


def _snap(f, tol=1e-9):
    # world -> index conversion leaves centers a few ulps off integers
    r = np.round(f)
    return np.where(np.abs(f - r) < tol, r, f)


def query_distance(sdf: SignedDistanceField, points) -> np.ndarray:
    """Bilinear interpolation of the field at world ``points`` (..., 2).

    Points outside the raster extent return ``-cap`` so that leaving the map
    counts as deep collision.
    """
    pts = np.asarray(points, dtype=float)
    x = (pts[..., 0] - sdf.origin[0]) / sdf.resolution
    y = (pts[..., 1] - sdf.origin[1]) / sdf.resolution
    inside = (x >= 0) & (x <= sdf.width) & (y >= 0) & (y <= sdf.height)
    fx = np.clip(_snap(x - 0.5), 0.0, sdf.width - 1)
    fy = np.clip(_snap(y - 0.5), 0.0, sdf.height - 1)
    c0 = np.minimum(np.floor(fx).astype(int), max(sdf.width - 2, 0))
    r0 = np.minimum(np.floor(fy).astype(int), max(sdf.height - 2, 0))
    c1 = np.minimum(c0 + 1, sdf.width - 1)
    r1 = np.minimum(r0 + 1, sdf.height - 1)
    tx = fx - c0
    ty = fy - r0
    v = sdf.values
    out = ((1 - ty) * ((1 - tx) * v[r0, c0] + tx * v[r0, c1])
           + ty * ((1 - tx) * v[r1, c0] + tx * v[r1, c1]))
    return np.where(inside, out, -sdf.cap)


def hinge_cost(d, params: CostParams):
    return np.maximum(params.clearance - np.asarray(d, dtype=float), 0.0)


class CostEvaluator:
    """Collision cost of support trajectories over their densified states.

    The mean only shifts the interpolation, and for means that are themselves
    interpolated by the same coefficients it cancels, so the densified
    positions are a fixed linear map of the support states.
    """

    def __init__(self, sdf: SignedDistanceField, params: CostParams, table: InterpTable, dim: int = 2):
        self.sdf = sdf
        self.params = params
        self.table = table
        self.dim = dim
        self.operator = position_operator(table, dim)

    def dense_positions(self, batch: np.ndarray) -> np.ndarray:
        batch = np.asarray(batch, dtype=float)
        flat = batch.reshape(batch.shape[0], -1)
        return (flat @ self.operator.T).reshape(batch.shape[0], -1, self.dim)

    def costs(self, batch: np.ndarray) -> np.ndarray:
        d = query_distance(self.sdf, self.dense_positions(batch))
        return hinge_cost(d, self.params).sum(axis=1)

    def cost(self, states: np.ndarray) -> float:
        return float(self.costs(np.asarray(states)[None])[0])


def trajectory_cost(states, mean, sdf: SignedDistanceField, params: CostParams,
                    table: InterpTable) -> float:
    """Sum of hinge costs over all ``N * S + 1`` densified positions."""
    dense = densify(np.asarray(states, dtype=float), mean, table)
    dim = dense.shape[1] // 2
    return float(hinge_cost(query_distance(sdf, dense[:, :dim]), params).sum())


def is_collision_free(states, mean, sdf, params, table, tol: float = 1e-12) -> bool:
    return trajectory_cost(states, mean, sdf, params, table) <= tol


# -- serialization -----------------------------------------------------------

def _header(resolution: float, origin) -> dict:
    return {"resolution": float(resolution), "origin_x": float(origin[0]),
            "origin_y": float(origin[1])}


def save_occupancy(grid: OccupancyGrid, pgm_path, header_path: Optional[Path] = None) -> None:
    """Binary PGM (P5, maxval 255, 0 = occupied) plus a JSON header.

    The image is stored top row first, i.e. flipped so +y points up.
    """
    pgm_path = Path(pgm_path)
    header_path = Path(header_path) if header_path else pgm_path.with_suffix(".json")
    img = np.where(grid.cells, 0, 255).astype(np.uint8)[::-1]
    with open(pgm_path, "wb") as f:
        f.write(f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii"))
        f.write(img.tobytes())
    header_path.write_text(json.dumps(_header(grid.resolution, grid.origin), indent=2) + "\n")


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while data[pos:pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM unsupported")
    pixels = np.frombuffer(data[pos + 1:pos + 1 + width * height], dtype=np.uint8)
    if pixels.size != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    return pixels.reshape(height, width)


def load_occupancy(pgm_path, header_path: Optional[Path] = None) -> OccupancyGrid:
    pgm_path = Path(pgm_path)
    header_path = Path(header_path) if header_path else pgm_path.with_suffix(".json")
    try:
        img = _read_pgm(pgm_path)
        header = json.loads(header_path.read_text())
        return OccupancyGrid(img[::-1] < 128, float(header["resolution"]),
                             (float(header["origin_x"]), float(header["origin_y"])))
    except (OSError, ValueError, KeyError, IndexError) as exc:
        raise ValueError(f"cannot load occupancy grid {pgm_path}: {exc}") from exc


def save_sdf(sdf: SignedDistanceField, raster_path, header_path: Optional[Path] = None) -> None:
    """Row-major little-endian float32 raster, row 0 at the grid origin."""
    raster_path = Path(raster_path)
    header_path = Path(header_path) if header_path else raster_path.with_suffix(".json")
    raster_path.write_bytes(sdf.values.astype("<f4").tobytes())
    header = _header(sdf.resolution, sdf.origin)
    header.update(width=sdf.width, height=sdf.height)
    header_path.write_text(json.dumps(header, indent=2) + "\n")


def load_sdf(raster_path, header_path: Optional[Path] = None) -> SignedDistanceField:
    raster_path = Path(raster_path)
    header_path = Path(header_path) if header_path else raster_path.with_suffix(".json")
    header = json.loads(header_path.read_text())
    values = np.frombuffer(raster_path.read_bytes(), dtype="<f4").astype(float)
    values = values.reshape(header["height"], header["width"])
    return SignedDistanceField(values, float(header["resolution"]),
                               (float(header["origin_x"]), float(header["origin_y"])))
