"""Stochastic trajectory optimization with a fixed GP covariance.

Each iteration draws K trajectories around the current mean, stops on the
first zero-cost one and otherwise moves the mean to the inverse-cost
weighted average of the M cheapest samples.
"""

from __future__ import annotations

import time
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .environment import CostEvaluator, CostParams, SignedDistanceField
from .gp_prior import GpPrior
from .interpolation import build_table
from .sampler import PrecisionFactor, Trajectory, factorize, sample_batch

ZERO_COST = 1e-12


@dataclass
class OptimizerConfig:
    k_samples: int = 400
    m_elites: int = 3
    time_budget: Optional[float] = 1.0  # seconds; None = deterministic mode
    max_iters: int = 1000
    steps_per_interval: int = 5
    seed: int = 0
    worker_count: int = 1
    keep_history: bool = False
    chunk_size: int = 100

    def __post_init__(self):
        if not 1 <= self.m_elites <= self.k_samples:
            raise ValueError("need 1 <= m_elites <= k_samples")
        if self.time_budget is not None and not self.time_budget > 0:
            raise ValueError("time_budget must be positive or None")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.worker_count < 1 or self.chunk_size < 1:
            raise ValueError("worker_count and chunk_size must be >= 1")


@dataclass
class PlanResult:
    solved: bool
    trajectory: Trajectory  # the solution, or the best trajectory seen
    cost: float
    iterations: int
    samples_evaluated: int
    elapsed: float
    best_cost_history: List[float] = field(default_factory=list)
    mean_history: Optional[List[np.ndarray]] = None
    final_elites: Optional[np.ndarray] = None

    @property
    def outcome(self) -> str:
        return "solved" if self.solved else "failed"


def elite_weighted_mean(elites: np.ndarray, costs: np.ndarray) -> np.ndarray:
    """Weighted average of elite trajectories with weights ``1 / cost``."""
    elites = np.asarray(elites, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if len(elites) < 1 or len(elites) != len(costs):
        raise ValueError("need one cost per elite and at least one elite")
    if np.any(costs <= 0):
        raise AssertionError("zero-cost elite reached the weighted mean")
    w = 1.0 / costs
    return np.tensordot(w, elites, axes=1) / w.sum()


def select_elites(costs: np.ndarray, m: int) -> np.ndarray:
    """Indices of the m lowest costs; ties go to the lower sample index."""
    return np.argsort(costs, kind="stable")[:m]


class Planner:
    """Holds the fixed factor and cost evaluator for one planning problem."""

    def __init__(self, prior: GpPrior, sdf: SignedDistanceField, cost_params: CostParams,
                 config: OptimizerConfig):
        self.prior = prior
        self.config = config
        self.factor: PrecisionFactor = factorize(prior)
        self.table = build_table(prior.time_grid, prior.noise, prior.dim, config.steps_per_interval)
        self.evaluator = CostEvaluator(sdf, cost_params, self.table, prior.dim)
        self.factor_ids: List[int] = []

    def _evaluate(self, batch: np.ndarray, deadline: Optional[float],
                  pool: Optional[Executor]) -> np.ndarray:
        """Costs in chunks; unevaluated entries stay inf once the deadline passes.

        With a pool, ``worker_count`` chunks run concurrently per round and the
        deadline is checked between rounds.
        """
        k = batch.shape[0]
        chunk = self.config.chunk_size
        bounds = [(lo, min(lo + chunk, k)) for lo in range(0, k, chunk)]
        width = self.config.worker_count if pool is not None else 1
        costs = np.full(k, np.inf)
        for r in range(0, len(bounds), width):
            group = bounds[r:r + width]
            if pool is None:
                parts = [self.evaluator.costs(batch[lo:hi]) for lo, hi in group]
            else:
                parts = pool.map(lambda b: self.evaluator.costs(batch[b[0]:b[1]]), group)
            for (lo, hi), part in zip(group, parts):
                costs[lo:hi] = part
            if deadline is not None and time.perf_counter() > deadline:
                break
        return costs

    def plan(self) -> PlanResult:
        if self.config.worker_count > 1:
            with ThreadPoolExecutor(max_workers=self.config.worker_count) as pool:
                return self._plan(pool)
        return self._plan(None)

    def _plan(self, pool: Optional[Executor]) -> PlanResult:
        cfg = self.config
        t0 = time.perf_counter()
        deadline = None if cfg.time_budget is None else t0 + cfg.time_budget
        grid = self.prior.time_grid
        mean = self.prior.mean.copy()
        best_cost, best_states = np.inf, mean
        history, means = [], [] if cfg.keep_history else None
        evaluated = 0
        elites = None
        it = 0
        while it < cfg.max_iters:
            it += 1
            self.factor_ids.append(id(self.factor))
            if means is not None:
                means.append(mean.copy())
            batch = sample_batch(self.factor, mean, cfg.k_samples, cfg.seed, stream=it,
                                 workers=cfg.worker_count, executor=pool)
            batch[0] = mean
            costs = self._evaluate(batch, deadline, pool)
            done = np.isfinite(costs)
            evaluated += int(done.sum())
            zero = np.flatnonzero(costs < ZERO_COST)
            if zero.size:
                history.append(0.0)
                return PlanResult(True, Trajectory(batch[zero[0]].copy(), grid), 0.0, it,
                                  evaluated, time.perf_counter() - t0, history, means, elites)
            order = select_elites(costs, cfg.m_elites)
            if costs[order[0]] < best_cost:
                best_cost, best_states = float(costs[order[0]]), batch[order[0]].copy()
            history.append(best_cost)
            order = order[np.isfinite(costs[order])]
            elites = batch[order]
            if deadline is not None and time.perf_counter() > deadline:
                break
            mean = elite_weighted_mean(elites, costs[order])
        return PlanResult(False, Trajectory(best_states, grid), best_cost, it, evaluated,
                          time.perf_counter() - t0, history, means, elites)


def plan(prior: GpPrior, sdf: SignedDistanceField, cost_params: CostParams,
         config: OptimizerConfig) -> PlanResult:
    return Planner(prior, sdf, cost_params, config).plan()
