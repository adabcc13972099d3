"""Dependency-free SVG figures built with ElementTree."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .environment import OccupancyGrid
from .gp_prior import GpPrior, NoiseProfile, TimeGrid, build_prior
from .sampler import factorize, sample_batch

SVG_NS = "http://www.w3.org/2000/svg"


class Canvas:
    """Maps a world box onto an SVG viewport with +y pointing up."""

    def __init__(self, box, width: int = 600, height: Optional[int] = None, pad: int = 20):
        x0, y0, x1, y1 = box
        if height is None:
            height = int(round(width * (y1 - y0) / (x1 - x0)))
        self.box, self.width, self.height, self.pad = box, width, height, pad
        self.sx = (width - 2 * pad) / (x1 - x0)
        self.sy = (height - 2 * pad) / (y1 - y0)
        self.root = ET.Element("svg", xmlns=SVG_NS, width=str(width), height=str(height),
                               viewBox=f"0 0 {width} {height}")
        ET.SubElement(self.root, "rect", width=str(width), height=str(height), fill="white")

    def xy(self, x, y):
        x0, y0, _, y1 = self.box
        return self.pad + (x - x0) * self.sx, self.height - self.pad - (y - y0) * self.sy

    def group(self, **attrs) -> ET.Element:
        return ET.SubElement(self.root, "g", **attrs)

    def polyline(self, pts: np.ndarray, parent=None, **attrs) -> None:
        coords = " ".join(f"{u:.2f},{v:.2f}" for u, v in (self.xy(x, y) for x, y in pts))
        attrs.setdefault("fill", "none")
        ET.SubElement(self.root if parent is None else parent, "polyline", points=coords, **attrs)

    def circle(self, center, radius_px: float, **attrs) -> None:
        u, v = self.xy(*center)
        ET.SubElement(self.root, "circle", cx=f"{u:.2f}", cy=f"{v:.2f}", r=f"{radius_px:.2f}", **attrs)

    def text(self, x_px: float, y_px: float, label: str, **attrs) -> None:
        el = ET.SubElement(self.root, "text", x=f"{x_px:.1f}", y=f"{y_px:.1f}", **attrs)
        el.text = label

    def write(self, path) -> Path:
        path = Path(path)
        ET.ElementTree(self.root).write(path, encoding="utf-8", xml_declaration=True)
        return path


def _occupancy_rects(canvas: Canvas, grid: OccupancyGrid) -> None:
    g = canvas.group(fill="#333333")
    res = grid.resolution
    ox, oy = grid.origin
    for r in range(grid.height):
        row = grid.cells[r]
        # run-length encode each raster row into rectangles
        edges = np.flatnonzero(np.diff(np.concatenate([[0], row.astype(np.int8), [0]])))
        for c0, c1 in zip(edges[::2], edges[1::2]):
            u0, v0 = canvas.xy(ox + c0 * res, oy + (r + 1) * res)
            u1, v1 = canvas.xy(ox + c1 * res, oy + r * res)
            ET.SubElement(g, "rect", x=f"{u0:.2f}", y=f"{v0:.2f}",
                          width=f"{u1 - u0:.2f}", height=f"{v1 - v0:.2f}")


def plot_environment(path, grid: OccupancyGrid, start, goal, solution: Optional[np.ndarray] = None,
                     elites: Iterable[np.ndarray] = (), robot_radius: float = 0.5,
                     title: str = "") -> Path:
    """Walls, start/goal discs, optional densified solution and elite fan (positions only)."""
    canvas = Canvas(grid.extent)
    _occupancy_rects(canvas, grid)
    fan = canvas.group(stroke="#7aa6c2", **{"stroke-width": "1", "stroke-opacity": "0.6"})
    for e in elites:
        canvas.polyline(np.asarray(e)[:, :2], parent=fan)
    if solution is not None:
        canvas.polyline(np.asarray(solution)[:, :2], stroke="#d62728", **{"stroke-width": "2"})
    rad = robot_radius * canvas.sx
    canvas.circle(start, rad, fill="#2ca02c", **{"fill-opacity": "0.7"})
    canvas.circle(goal, rad, fill="#1f77b4", **{"fill-opacity": "0.7"})
    if title:
        canvas.text(canvas.pad, canvas.pad - 5, title, **{"font-size": "12"})
    return canvas.write(path)


def prior_fan(noise: NoiseProfile, n_support: int = 11, count: int = 30, seed: int = 0,
              start: float = 0.0, goal: float = 0.0) -> tuple:
    """Times and 1-D position samples (count, n_support) from a goal-conditioned prior."""
    grid = TimeGrid(noise.t_total, n_support)
    prior: GpPrior = build_prior([start], [goal], grid, noise)
    batch = sample_batch(factorize(prior), prior.mean, count, seed)
    return grid.times, batch[:, :, 0]


def plot_prior(path, profiles: Sequence[tuple], count: int = 30, n_support: int = 11,
               seed: int = 0) -> Path:
    """One panel per ``(label, NoiseProfile)``: sample fan on top, q_c(t) beneath."""
    panels = []
    for label, noise in profiles:
        times, fan = prior_fan(noise, n_support, count, seed)
        ts = np.linspace(0.0, noise.t_total, 201)
        panels.append((label, noise, times, fan, ts, np.asarray(noise(ts), dtype=float)))
    t_total = max(p[1].t_total for p in panels)
    ylim = max(float(np.abs(p[3]).max()) for p in panels) * 1.05 or 1.0
    qmax = max(float(p[5].max()) for p in panels) * 1.05 or 1.0
    panel_w, fan_h, q_h, gap = 360, 220, 120, 30
    width = panel_w * len(panels) + gap * (len(panels) + 1)
    height = fan_h + q_h + 3 * gap
    root = ET.Element("svg", xmlns=SVG_NS, width=str(width), height=str(height),
                      viewBox=f"0 0 {width} {height}")
    ET.SubElement(root, "rect", width=str(width), height=str(height), fill="white")
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    for k, (label, noise, times, fan, ts, qs) in enumerate(panels):
        x0 = gap + k * (panel_w + gap)

        def tx(t):
            return x0 + t / t_total * panel_w

        g = ET.SubElement(root, "g", stroke=colors[k % len(colors)], fill="none",
                          **{"stroke-width": "1", "stroke-opacity": "0.5"})
        for row in fan:
            pts = " ".join(f"{tx(t):.2f},{gap + fan_h / 2 - y / ylim * fan_h / 2:.2f}"
                           for t, y in zip(times, row))
            ET.SubElement(g, "polyline", points=pts)
        base = gap * 2 + fan_h + q_h
        pts = " ".join(f"{tx(t):.2f},{base - q / qmax * q_h:.2f}" for t, q in zip(ts, qs))
        ET.SubElement(root, "polyline", points=pts, fill="none", stroke="black",
                      **{"stroke-width": "1.5"})
        ET.SubElement(root, "line", x1=f"{x0}", y1=f"{base}", x2=f"{x0 + panel_w}", y2=f"{base}",
                      stroke="#999999")
        el = ET.SubElement(root, "text", x=f"{x0}", y=f"{gap - 8}", **{"font-size": "12"})
        el.text = f"{label}: {count} prior samples"
        el = ET.SubElement(root, "text", x=f"{x0}", y=f"{2 * gap + fan_h - 4}", **{"font-size": "11"})
        el.text = f"q_c(t), max {qs.max():.1f}"
    path = Path(path)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)
    return path
