"""Goal-conditioned GP trajectory prior for the constant-velocity model.

States are stored as flat vectors ``[p_1..p_D, v_1..v_D]``. A trajectory of
``N + 1`` support states is an array of shape ``(N + 1, 2 * D)``.

The precision matrix is never materialized densely here; it is kept as its
block-tridiagonal bands (``precision_diag`` and ``precision_offdiag``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

# 3-point Gauss-Legendre on [-1, 1]; exact for polynomials of degree <= 5.
_GL_NODES = np.array([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)])
_GL_WEIGHTS = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
DEFAULT_PANELS = 16


class PriorConstructionError(ValueError):
    """Raised when the assembled precision is not positive definite."""

    def __init__(self, message: str, block_index: Optional[int] = None):
        super().__init__(message)
        self.block_index = block_index


@dataclass(frozen=True)
class NoiseProfile:
    """Power-spectral density q_c(t) of the acceleration white noise.

    ``kind`` is one of ``"constant"``, ``"parabolic"`` or ``"custom"``. The
    parabolic profile is ``(t - t_total / 2) ** 2`` with no gain. A custom
    profile wraps any non-negative callable.
    """

    kind: str
    q_c: float = 1.0
    t_total: float = 20.0
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("constant", "parabolic", "custom"):
            raise ValueError(f"unknown noise profile kind {self.kind!r}")
        if self.kind == "constant" and not self.q_c >= 0:
            raise ValueError("constant q_c must be non-negative")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom profile needs fn")
        if self.t_total <= 0:
            raise ValueError("t_total must be positive")

    @classmethod
    def constant(cls, q_c: float, t_total: float = 20.0) -> "NoiseProfile":
        return cls("constant", q_c=float(q_c), t_total=float(t_total))

    @classmethod
    def parabolic(cls, t_total: float) -> "NoiseProfile":
        return cls("parabolic", t_total=float(t_total))

    @classmethod
    def matched_constant(cls, t_total: float) -> "NoiseProfile":
        """Constant profile with the same integrated power as the parabola."""
        return cls.constant(t_total**2 / 12.0, t_total)

    def scaled(self, c: float) -> "NoiseProfile":
        base = self
        return NoiseProfile("custom", t_total=self.t_total, fn=lambda t: c * base(t))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.q_c)
        if self.kind == "parabolic":
            return (t - 0.5 * self.t_total) ** 2
        return np.asarray(self.fn(t), dtype=float)

    def total_power(self) -> float:
        """Integral of q_c over [0, t_total]."""
        if self.kind == "constant":
            return self.q_c * self.t_total
        if self.kind == "parabolic":
            return self.t_total**3 / 12.0
        return float(_gauss_legendre(self, 0.0, self.t_total, lambda s: np.ones_like(s),
                                     panels=64))

    def is_constant(self) -> bool:
        return self.kind == "constant"


@dataclass(frozen=True)
class TimeGrid:
    t_total: float
    n_support: int

    def __post_init__(self):
        if self.n_support < 2:
            raise ValueError("n_support must be >= 2")
        if not self.t_total > 0:
            raise ValueError("t_total must be positive")

    @property
    def n_intervals(self) -> int:
        return self.n_support - 1

    @property
    def dt(self) -> float:
        return self.t_total / self.n_intervals

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_support) * self.dt

    def time(self, i: int) -> float:
        return i * self.dt


def transition(dt: float, dim: int) -> np.ndarray:
    """Exact transition matrix of the double integrator over ``dt``."""
    if dt < 0:
        raise ValueError(f"negative dt {dt}")
    eye = np.eye(dim)
    phi = np.eye(2 * dim)
    phi[:dim, dim:] = dt * eye
    return phi


def _gauss_legendre(noise: NoiseProfile, t_a: float, t_b: float, weight, panels: int):
    edges = np.linspace(t_a, t_b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    s = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    q = noise(s)
    if np.any(q < 0):
        raise AssertionError("noise profile evaluated negative")
    return np.sum(w * q * weight(s))


def process_noise_block(t_a: float, t_b: float, noise: NoiseProfile, dim: int,
                        panels: int = DEFAULT_PANELS) -> np.ndarray:
    """Accumulated process noise Q_{a,b} of the constant-velocity model.

    With L = [0; I] the integrand reduces per dimension to
    ``q(s) * [[r^2, r], [r, 1]]`` where ``r = t_b - s``.
    """
    if not t_b > t_a:
        raise ValueError(f"need t_b > t_a, got t_a={t_a}, t_b={t_b}")
    if noise.is_constant():
        d = t_b - t_a
        q11, q12, q22 = noise.q_c * d**3 / 3.0, noise.q_c * d**2 / 2.0, noise.q_c * d
    else:
        # parabolic integrand is polynomial of degree <= 4: one panel is exact
        n = 1 if noise.kind == "parabolic" else panels
        q11 = _gauss_legendre(noise, t_a, t_b, lambda s: (t_b - s) ** 2, n)
        q12 = _gauss_legendre(noise, t_a, t_b, lambda s: (t_b - s), n)
        q22 = _gauss_legendre(noise, t_a, t_b, lambda s: np.ones_like(s), n)
    eye = np.eye(dim)
    return np.block([[q11 * eye, q12 * eye], [q12 * eye, q22 * eye]])


def straight_line_mean(start, goal, grid: TimeGrid) -> np.ndarray:
    """Constant-velocity line from start to goal, shape ``(N + 1, 2 * D)``."""
    start = np.atleast_1d(np.asarray(start, dtype=float))
    goal = np.atleast_1d(np.asarray(goal, dtype=float))
    if start.shape != goal.shape or start.ndim != 1:
        raise ValueError("start and goal must be vectors of equal dimension")
    frac = np.arange(grid.n_support) / grid.n_intervals
    pos = start[None, :] + frac[:, None] * (goal - start)[None, :]
    vel = np.broadcast_to((goal - start) / grid.t_total, pos.shape)
    return np.hstack([pos, vel])


def straight_line_state(start, goal, t_total: float, t: float) -> np.ndarray:
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    return np.concatenate([start + (t / t_total) * (goal - start), (goal - start) / t_total])


@dataclass(frozen=True)
class GpPrior:
    mean: np.ndarray
    precision_diag: np.ndarray  # (N + 1, 2D, 2D)
    precision_offdiag: np.ndarray  # (N, 2D, 2D); block i couples states i + 1 and i
    time_grid: TimeGrid
    noise: NoiseProfile
    anchor_cov_start: float
    anchor_cov_goal: float
    start: np.ndarray
    goal: np.ndarray

    @property
    def dim(self) -> int:
        return self.start.shape[0]

    @property
    def state_size(self) -> int:
        return 2 * self.dim

    def mean_at(self, t: float) -> np.ndarray:
        return straight_line_state(self.start, self.goal, self.time_grid.t_total, t)

    def dense_precision(self) -> np.ndarray:
        n, s = self.time_grid.n_support, self.state_size
        out = np.zeros((n * s, n * s))
        for i in range(n):
            out[i * s:(i + 1) * s, i * s:(i + 1) * s] = self.precision_diag[i]
        for i in range(n - 1):
            blk = self.precision_offdiag[i]
            out[(i + 1) * s:(i + 2) * s, i * s:(i + 1) * s] = blk
            out[i * s:(i + 1) * s, (i + 1) * s:(i + 2) * s] = blk.T
        return out


def build_prior(start, goal, grid: TimeGrid, noise: NoiseProfile,
                anchor_cov_start: float = 1e-6, anchor_cov_goal: float = 1e-6) -> GpPrior:
    if not (anchor_cov_start > 0 and anchor_cov_goal > 0):
        raise ValueError("anchor covariances must be positive")
    mean = straight_line_mean(start, goal, grid)
    dim = mean.shape[1] // 2
    s = 2 * dim
    n = grid.n_support
    phi = transition(grid.dt, dim)

    diag = np.zeros((n, s, s))
    off = np.zeros((n - 1, s, s))
    diag[0] += np.eye(s) / anchor_cov_start
    diag[n - 1] += np.eye(s) / anchor_cov_goal
    for i in range(n - 1):
        q = process_noise_block(grid.time(i), grid.time(i + 1), noise, dim)
        q_inv = np.linalg.inv(q)
        q_inv = 0.5 * (q_inv + q_inv.T)
        diag[i] += phi.T @ q_inv @ phi
        diag[i + 1] += q_inv
        off[i] = -q_inv @ phi
    if not np.all(np.isfinite(diag)) or not np.all(np.isfinite(off)):
        raise PriorConstructionError("non-finite precision block")
    return GpPrior(mean=mean, precision_diag=diag, precision_offdiag=off, time_grid=grid,
                   noise=noise, anchor_cov_start=float(anchor_cov_start),
                   anchor_cov_goal=float(anchor_cov_goal),
                   start=np.atleast_1d(np.asarray(start, dtype=float)),
                   goal=np.atleast_1d(np.asarray(goal, dtype=float)))


def dense_kernel(prior: GpPrior) -> np.ndarray:
    """Dense covariance (inverse precision). Only meant for small N."""
    if prior.time_grid.n_support > 51:
        raise ValueError("dense_kernel is limited to N <= 50")
    prec = prior.dense_precision()
    try:
        chol = np.linalg.cholesky(prec)
    except np.linalg.LinAlgError as exc:
        raise PriorConstructionError("precision is singular or indefinite") from exc
    eye = np.eye(prec.shape[0])
    inv_l = np.linalg.solve(chol, eye)
    cov = inv_l.T @ inv_l
    return 0.5 * (cov + cov.T)
