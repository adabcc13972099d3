"""Sampling trajectories from a GpPrior through its precision factor.

With ``K^{-1} = L L^T`` a draw is ``mu + L^{-T} z``, computed by one
block back-substitution. Each sample owns a fixed slice of a Philox
counter stream, so a batch is the same no matter how it is split across
workers.
"""

from __future__ import annotations

from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import ndtri

from .gp_prior import GpPrior, TimeGrid


class NotPositiveDefinite(np.linalg.LinAlgError):
    def __init__(self, block_index: int):
        super().__init__(f"precision not positive definite at block {block_index}")
        self.block_index = block_index


@dataclass(frozen=True)
class PrecisionFactor:
    diag: np.ndarray  # (N + 1, s, s) lower-triangular Cholesky blocks
    offdiag: np.ndarray  # (N, s, s) block (i + 1, i) of L
    time_grid: TimeGrid

    @property
    def n_support(self) -> int:
        return self.diag.shape[0]

    @property
    def state_size(self) -> int:
        return self.diag.shape[1]

    @property
    def size(self) -> int:
        return self.n_support * self.state_size

    def dense(self) -> np.ndarray:
        n, s = self.n_support, self.state_size
        out = np.zeros((n * s, n * s))
        for i in range(n):
            out[i * s:(i + 1) * s, i * s:(i + 1) * s] = self.diag[i]
        for i in range(n - 1):
            out[(i + 1) * s:(i + 2) * s, i * s:(i + 1) * s] = self.offdiag[i]
        return out


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray  # (N + 1, 2D)
    time_grid: TimeGrid

    def __post_init__(self):
        if self.states.shape[0] != self.time_grid.n_support:
            raise ValueError("trajectory length does not match its time grid")

    @property
    def dim(self) -> int:
        return self.states.shape[1] // 2

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, : self.dim]


def factorize(prior: GpPrior) -> PrecisionFactor:
    """Block Cholesky of the block-tridiagonal precision, linear in N."""
    a = prior.precision_diag
    b = prior.precision_offdiag
    n = a.shape[0]
    diag = np.empty_like(a)
    off = np.empty_like(b)
    schur = a[0]
    for i in range(n):
        try:
            diag[i] = np.linalg.cholesky(schur)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(i) from None
        if i == n - 1:
            break
        # L_{i+1,i} = B_i L_ii^{-T}
        off[i] = solve_triangular(diag[i], b[i].T, lower=True).T
        schur = a[i + 1] - off[i] @ off[i].T
    return PrecisionFactor(diag=diag, offdiag=off, time_grid=prior.time_grid)


def _back_substitute(factor: PrecisionFactor, z: np.ndarray) -> np.ndarray:
    """Solve L^T x = z for a stack of z with shape (count, N + 1, s)."""
    n = factor.n_support
    x = np.empty_like(z)
    for i in range(n - 1, -1, -1):
        rhs = z[:, i, :]
        if i < n - 1:
            rhs = rhs - x[:, i + 1, :] @ factor.offdiag[i]
        # x_i = L_ii^{-T} rhs, batched as rhs @ L_ii^{-1}
        x[:, i, :] = solve_triangular(factor.diag[i], rhs.T, lower=True, trans="T").T
    return x


def deviation(factor: PrecisionFactor, z: np.ndarray) -> np.ndarray:
    """Zero-mean draw ``L^{-T} z`` with shape (N + 1, s)."""
    z = np.asarray(z, dtype=float)
    if z.size != factor.size:
        raise ValueError(f"expected {factor.size} normals, got {z.size}")
    shape = (factor.n_support, factor.state_size)
    return _back_substitute(factor, z.reshape((1,) + shape))[0]


def sample(factor: PrecisionFactor, mean: np.ndarray, z: np.ndarray) -> Trajectory:
    mean = np.asarray(mean, dtype=float)
    if mean.size != factor.size:
        raise ValueError(f"expected mean of {factor.size} entries, got {mean.size}")
    dev = deviation(factor, z)
    return Trajectory(mean.reshape(dev.shape) + dev, factor.time_grid)


def _stream_key(seed: int, stream: int) -> np.ndarray:
    return np.random.SeedSequence([int(seed) & (2**64 - 1), int(stream)]).generate_state(2, np.uint64)


def standard_normals(seed: int, stream: int, first: int, count: int, size: int) -> np.ndarray:
    """Normals for samples ``first .. first + count - 1`` of a stream.

    Sample k reads raw words from a fixed range of the Philox counter, so any
    contiguous slice of the batch can be generated independently.
    """
    words_per_sample = -(-size // 4) * 4  # Philox yields 4 words per counter step
    bitgen = np.random.Philox(key=_stream_key(seed, stream),
                              counter=[first * (words_per_sample // 4), 0, 0, 0])
    raw = bitgen.random_raw(count * words_per_sample).reshape(count, words_per_sample)
    u = ((raw[:, :size] >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def sample_batch(factor: PrecisionFactor, mean: np.ndarray, count: int, seed: int,
                 stream: int = 0, workers: int = 1,
                 executor: Optional[Executor] = None) -> np.ndarray:
    """Draw ``count`` trajectories as an array of shape (count, N + 1, s).

    With ``workers > 1`` the batch is split into contiguous slices; pass an
    ``executor`` to reuse a pool across calls.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    shape = (factor.n_support, factor.state_size)
    mean = np.asarray(mean, dtype=float).reshape(shape)
    size = factor.size

    def run(lo: int, hi: int) -> np.ndarray:
        z = standard_normals(seed, stream, lo, hi - lo, size).reshape((hi - lo,) + shape)
        return mean + _back_substitute(factor, z)

    if workers <= 1 or count < 2:
        return run(0, count)
    edges = np.linspace(0, count, min(workers, count) + 1).astype(int)
    if executor is not None:
        parts = list(executor.map(run, edges[:-1], edges[1:]))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, edges[:-1], edges[1:]))
    return np.concatenate(parts, axis=0)
