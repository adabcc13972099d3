"""Sampling-based trajectory optimization with a heteroscedastic GP prior."""

from .environment import CostParams, OccupancyGrid, build_sdf
from .gp_prior import NoiseProfile, TimeGrid, build_prior
from .maze import MazeSpec, generate_maze
from .optimizer import OptimizerConfig, PlanResult, Planner, plan
from .sampler import factorize, sample_batch

__all__ = [
    "CostParams", "OccupancyGrid", "build_sdf", "NoiseProfile", "TimeGrid", "build_prior",
    "MazeSpec", "generate_maze", "OptimizerConfig", "PlanResult", "Planner", "plan",
    "factorize", "sample_batch",
]
__version__ = "0.1.0"
