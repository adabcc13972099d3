import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as nph

from hetgp.environment import CostParams, OccupancyGrid, build_sdf, is_collision_free
from hetgp.gp_prior import NoiseProfile, TimeGrid, build_prior
from hetgp.maze import MazeSpec, generate_maze
from hetgp.optimizer import OptimizerConfig, Planner, elite_weighted_mean, plan, select_elites

RES = 0.05


def test_elite_mean_examples():
    elites = np.array([[0.0], [4.0]])
    assert elite_weighted_mean(elites, np.array([1.0, 3.0]))[0] == pytest.approx(1.0)
    assert elite_weighted_mean(elites, np.array([2.0, 2.0]))[0] == pytest.approx(2.0)
    with pytest.raises(AssertionError):
        elite_weighted_mean(elites, np.array([0.0, 1.0]))


@given(nph.arrays(float, st.tuples(st.integers(1, 6), st.just(4)), elements=st.floats(-50, 50)),
       st.floats(1e-3, 1e3))
@settings(max_examples=50)
def test_elite_mean_scale_invariant_and_convex(elites, scale):
    costs = np.linspace(0.5, 3.0, len(elites))
    a = elite_weighted_mean(elites, costs)
    b = elite_weighted_mean(elites, costs * scale)
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)
    assert np.all(a >= elites.min(axis=0) - 1e-9) and np.all(a <= elites.max(axis=0) + 1e-9)


@given(nph.arrays(float, st.integers(1, 40), elements=st.floats(0, 5, allow_nan=False)),
       st.integers(1, 40))
def test_select_elites_matches_sort_oracle(costs, m):
    m = min(m, len(costs))
    ref = sorted(range(len(costs)), key=lambda i: (costs[i], i))[:m]
    assert list(select_elites(costs, m)) == ref


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(k_samples=2, m_elites=3)
    with pytest.raises(ValueError):
        OptimizerConfig(time_budget=0.0)


def _open_problem():
    sdf = build_sdf(OccupancyGrid(np.zeros((200, 200), bool), RES))
    prior = build_prior([2.0, 2.0], [8.0, 8.0], TimeGrid(20.0, 11), NoiseProfile.parabolic(20.0))
    return prior, sdf


def test_open_space_solves_with_the_prior_mean():
    prior, sdf = _open_problem()
    res = plan(prior, sdf, CostParams(), OptimizerConfig(time_budget=None))
    assert res.solved and res.iterations == 1
    np.testing.assert_array_equal(res.trajectory.states, prior.mean)


@pytest.fixture(scope="module")
def maze_problem():
    env = generate_maze(MazeSpec(4, seed=3))
    sdf = build_sdf(env.occupancy)
    prior = build_prior(env.start, env.goal, TimeGrid(20.0, 11), NoiseProfile.parabolic(20.0))
    return prior, sdf


def test_deterministic_mode_is_repeatable(maze_problem):
    prior, sdf = maze_problem
    cfg = OptimizerConfig(time_budget=None, max_iters=15, seed=4)
    a = plan(prior, sdf, CostParams(), cfg)
    b = plan(prior, sdf, CostParams(), cfg)
    assert a.solved == b.solved and a.iterations == b.iterations
    np.testing.assert_array_equal(a.trajectory.states, b.trajectory.states)
    assert a.best_cost_history == b.best_cost_history


def test_worker_count_does_not_change_results(maze_problem):
    prior, sdf = maze_problem
    one = plan(prior, sdf, CostParams(), OptimizerConfig(time_budget=None, max_iters=8, seed=2))
    four = plan(prior, sdf, CostParams(),
                OptimizerConfig(time_budget=None, max_iters=8, seed=2, worker_count=4, chunk_size=37))
    assert one.iterations == four.iterations
    np.testing.assert_array_equal(one.trajectory.states, four.trajectory.states)


def test_factor_fixed_and_history_monotone(maze_problem):
    prior, sdf = maze_problem
    planner = Planner(prior, sdf, CostParams(), OptimizerConfig(time_budget=None, max_iters=10,
                                                                seed=11, keep_history=True))
    before = planner.factor.diag.copy()
    res = planner.plan()
    assert len(set(planner.factor_ids)) == 1
    np.testing.assert_array_equal(planner.factor.diag, before)
    h = res.best_cost_history
    assert all(b <= a for a, b in zip(h, h[1:]))
    assert len(res.mean_history) == res.iterations
    np.testing.assert_array_equal(res.mean_history[0], prior.mean)


def test_solved_trajectories_revalidate():
    solved = 0
    for seed in range(6):
        env = generate_maze(MazeSpec(3, seed=seed))
        sdf = build_sdf(env.occupancy)
        prior = build_prior(env.start, env.goal, TimeGrid(20.0, 11),
                            NoiseProfile.parabolic(20.0))
        planner = Planner(prior, sdf, CostParams(), OptimizerConfig(time_budget=None, max_iters=50))
        res = planner.plan()
        if res.solved:
            solved += 1
            assert is_collision_free(res.trajectory.states, prior.mean_at, sdf, CostParams(),
                                     planner.table, tol=1e-9)
            assert res.cost == 0.0
    assert solved >= 4


def test_time_budget_stops_the_loop(maze_problem):
    prior, sdf = maze_problem
    # a tiny budget still evaluates the first chunk
    res = plan(prior, sdf, CostParams(), OptimizerConfig(time_budget=1e-4, max_iters=10**6))
    assert res.iterations <= 2
    assert res.samples_evaluated >= OptimizerConfig().chunk_size
