"""Dense querying of a trajectory between support states.

``theta(tau) = mu(tau) + Lam (theta_i - mu_i) + Psi (theta_{i+1} - mu_{i+1})``
with ``Psi = Q_{i,tau} Phi(t_{i+1}, tau)^T Q_{i,i+1}^{-1}`` and
``Lam = Phi(tau, t_i) - Psi Phi(t_{i+1}, t_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .gp_prior import NoiseProfile, TimeGrid, process_noise_block, transition

MeanLike = Union[np.ndarray, Callable[[float], np.ndarray]]


def interp_coeffs(t_i: float, t_next: float, tau: float, noise: NoiseProfile, dim: int):
    """Return ``(Lam, Psi)`` for a query time inside ``[t_i, t_next]``."""
    if not (t_i <= tau <= t_next):
        raise ValueError(f"tau={tau} outside [{t_i}, {t_next}]")
    s = 2 * dim
    if tau == t_i:
        return np.eye(s), np.zeros((s, s))
    if tau == t_next:
        return np.zeros((s, s)), np.eye(s)
    q_full = process_noise_block(t_i, t_next, noise, dim)
    q_part = process_noise_block(t_i, tau, noise, dim)
    try:
        # Psi = Q_{i,tau} Phi(t_{i+1},tau)^T Q_{i,i+1}^{-1}; Q is symmetric
        psi = np.linalg.solve(q_full, (q_part @ transition(t_next - tau, dim).T).T).T
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular process noise on [{t_i}, {t_next}]") from exc
    psi = np.ascontiguousarray(psi)
    lam = transition(tau - t_i, dim) - psi @ transition(t_next - t_i, dim)
    return lam, psi


@dataclass(frozen=True)
class InterpTable:
    """Coefficients for offsets ``j * dt / S``, ``j = 1 .. S - 1``.

    ``lam`` and ``psi`` have shape ``(N, S - 1, s, s)``. Tables are kept per
    interval even for a constant profile: sharing one would make query times
    differ from per-query evaluation in the last bit.
    """

    lam: np.ndarray
    psi: np.ndarray
    steps: int
    time_grid: TimeGrid

    def coeffs(self, interval: int, j: int):
        return self.lam[interval, j - 1], self.psi[interval, j - 1]


def query_time(grid: TimeGrid, interval: int, j: int, steps: int) -> float:
    return grid.time(interval) + j * (grid.dt / steps)


def build_table(grid: TimeGrid, noise: NoiseProfile, dim: int, steps: int) -> InterpTable:
    if steps < 1:
        raise ValueError("steps_per_interval must be >= 1")
    s = 2 * dim
    n_tables = grid.n_intervals
    lam = np.zeros((n_tables, max(steps - 1, 0), s, s))
    psi = np.zeros_like(lam)
    for k in range(n_tables):
        for j in range(1, steps):
            lam[k, j - 1], psi[k, j - 1] = interp_coeffs(
                grid.time(k), grid.time(k + 1), query_time(grid, k, j, steps), noise, dim)
    return InterpTable(lam, psi, steps, grid)


def _mean_at(mean: MeanLike, grid: TimeGrid, interval: int, lam, psi, tau: float):
    if callable(mean):
        return np.asarray(mean(tau), dtype=float)
    # general (non-straight) mean: interpolate it with the same coefficients
    return lam @ mean[interval] + psi @ mean[interval + 1]


def _apply(states, mean: MeanLike, grid: TimeGrid, interval: int, lam, psi, tau: float,
           mean_states: np.ndarray):
    mu_tau = _mean_at(mean, grid, interval, lam, psi, tau)
    return (mu_tau + lam @ (states[interval] - mean_states[interval])
            + psi @ (states[interval + 1] - mean_states[interval + 1]))


def _support_mean(mean: MeanLike, grid: TimeGrid) -> np.ndarray:
    if callable(mean):
        return np.array([mean(t) for t in grid.times])
    return np.asarray(mean, dtype=float)


def interpolate(states: np.ndarray, mean: MeanLike, tau: float, noise: NoiseProfile,
                grid: TimeGrid) -> np.ndarray:
    """State at ``tau`` given support ``states`` and the prior mean.

    ``mean`` is either a callable ``t -> state`` (exact mean function) or the
    array of support means.
    """
    states = np.asarray(states, dtype=float)
    if not (0.0 <= tau <= grid.t_total):
        raise ValueError(f"tau={tau} outside [0, {grid.t_total}]")
    i = min(int(np.searchsorted(grid.times, tau, side="right")) - 1, grid.n_intervals - 1)
    t_i = grid.time(i)
    if tau == t_i:
        return states[i].copy()
    if tau == grid.time(i + 1):
        return states[i + 1].copy()
    lam, psi = interp_coeffs(t_i, grid.time(i + 1), tau, noise, states.shape[1] // 2)
    return _apply(states, mean, grid, i, lam, psi, tau, _support_mean(mean, grid))


def densify(states: np.ndarray, mean: MeanLike, table: InterpTable,
            mean_states: Optional[np.ndarray] = None) -> np.ndarray:
    """``N * S + 1`` states at spacing ``dt / S``."""
    states = np.asarray(states, dtype=float)
    grid, steps = table.time_grid, table.steps
    if mean_states is None:
        mean_states = _support_mean(mean, grid)
    out = [states[0].copy()]
    for i in range(grid.n_intervals):
        for j in range(1, steps):
            lam, psi = table.coeffs(i, j)
            out.append(_apply(states, mean, grid, i, lam, psi,
                              query_time(grid, i, j, steps), mean_states))
        out.append(states[i + 1].copy())
    return np.array(out)


def position_operator(table: InterpTable, dim: int) -> np.ndarray:
    """Linear map from stacked support states to densified positions.

    Returns ``G`` of shape ``((N*S + 1) * D, (N + 1) * 2D)`` so that for any
    trajectory whose mean is interpolated with the same coefficients, the
    densified positions are ``G @ theta.ravel()``.
    """
    grid, steps = table.time_grid, table.steps
    s = 2 * dim
    n_dense = grid.n_intervals * steps + 1
    g = np.zeros((n_dense, dim, grid.n_support, s))
    g[0, :, 0, :dim] = np.eye(dim)
    row = 1
    for i in range(grid.n_intervals):
        for j in range(1, steps):
            lam, psi = table.coeffs(i, j)
            g[row, :, i, :] = lam[:dim]
            g[row, :, i + 1, :] = psi[:dim]
            row += 1
        g[row, :, i + 1, :dim] = np.eye(dim)
        row += 1
    return g.reshape(n_dense * dim, grid.n_support * s)
