import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetgp.gp_prior import (
    NoiseProfile,
    TimeGrid,
    build_prior,
    dense_kernel,
    process_noise_block,
    straight_line_mean,
    transition,
)

import oracles

PROFILES = [NoiseProfile.constant(2.0, 20.0), NoiseProfile.parabolic(20.0)]


def _kind(noise):
    return noise.kind, noise.q_c


def test_transition_examples():
    np.testing.assert_array_equal(transition(0.0, 1), np.eye(2))
    np.testing.assert_array_equal(transition(2.0, 1), oracles.phi(2.0, 1))
    np.testing.assert_array_equal(transition(2.0, 1), [[1, 2], [0, 1]])
    expected = np.block([[np.eye(2), np.eye(2)], [np.zeros((2, 2)), np.eye(2)]])
    np.testing.assert_array_equal(transition(1.0, 2), expected)


def test_transition_rejects_negative_dt():
    with pytest.raises(ValueError):
        transition(-0.1, 1)


@given(st.floats(0, 10), st.floats(0, 10), st.integers(1, 3))
def test_transition_semigroup(a, b, dim):
    # exact for dyadic-free floats only up to rounding of a + b
    lhs = transition(a + b, dim)
    rhs = transition(b, dim) @ transition(a, dim)
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12 * (1 + a + b))


def test_noise_block_constant_closed_form():
    q = process_noise_block(1.0, 3.5, NoiseProfile.constant(0.7), 1)
    d = 2.5
    np.testing.assert_allclose(q, 0.7 * np.array([[d**3 / 3, d**2 / 2], [d**2 / 2, d]]), rtol=1e-14)


def test_noise_block_parabolic_regression():
    # frozen from exact polynomial integration; a 1e6-step midpoint sum agrees to 1e-10
    q = process_noise_block(0.0, 2.0, NoiseProfile.parabolic(20.0), 1)
    np.testing.assert_allclose(q, [[3616 / 15, 524 / 3], [524 / 3, 488 / 3]], rtol=1e-13)


def test_noise_block_parabolic_riemann_oracle():
    n = 10**6
    h = 2.0 / n
    s = (np.arange(n) + 0.5) * h
    qc = (s - 10.0) ** 2
    riemann = np.array([[np.sum(qc * (2 - s) ** 2), np.sum(qc * (2 - s))],
                        [np.sum(qc * (2 - s)), np.sum(qc)]]) * h
    q = process_noise_block(0.0, 2.0, NoiseProfile.parabolic(20.0), 1)
    np.testing.assert_allclose(q, riemann, rtol=1e-9)


@pytest.mark.parametrize("noise", PROFILES)
@given(t_a=st.floats(0, 19), width=st.floats(0.01, 1.0), dim=st.integers(1, 3))
def test_noise_block_is_spd(noise, t_a, width, dim):
    q = process_noise_block(t_a, t_a + width, noise, dim)
    np.testing.assert_array_equal(q, q.T)
    assert np.all(np.linalg.eigvalsh(q) > 0)


def test_noise_block_rejects_empty_interval():
    with pytest.raises(ValueError):
        process_noise_block(2.0, 2.0, PROFILES[0], 1)


def test_noise_block_negative_profile_is_invariant_violation():
    bad = NoiseProfile("custom", t_total=20.0, fn=lambda t: t - 5.0)
    with pytest.raises(AssertionError):
        process_noise_block(0.0, 2.0, bad, 1)


@pytest.mark.parametrize("noise", PROFILES)
@given(a=st.floats(0, 6), b=st.floats(0.1, 6), c=st.floats(0.1, 6))
@settings(max_examples=50)
def test_noise_block_additivity(noise, a, b, c):
    t_b, t_c = a + b, a + b + c
    q_ac = process_noise_block(a, t_c, noise, 2)
    ph = transition(t_c - t_b, 2)
    composed = ph @ process_noise_block(a, t_b, noise, 2) @ ph.T + process_noise_block(t_b, t_c, noise, 2)
    np.testing.assert_allclose(q_ac, composed, rtol=1e-9, atol=1e-9)


def test_custom_profile_matches_polynomial_integral():
    custom = NoiseProfile("custom", t_total=20.0, fn=lambda t: np.exp(-t))
    q = process_noise_block(0.5, 1.5, custom, 1)
    from scipy.integrate import quad
    q11 = quad(lambda s: np.exp(-s) * (1.5 - s) ** 2, 0.5, 1.5)[0]
    q22 = quad(lambda s: np.exp(-s), 0.5, 1.5)[0]
    assert q[0, 0] == pytest.approx(q11, rel=1e-10)
    assert q[1, 1] == pytest.approx(q22, rel=1e-10)


def test_parabolic_profile_values():
    p = NoiseProfile.parabolic(20.0)
    assert p(0.0) == 100.0
    assert p(20.0) == 100.0
    assert p(10.0) == 0.0
    assert NoiseProfile.matched_constant(20.0).total_power() == pytest.approx(p.total_power())


def test_straight_line_mean_examples():
    grid = TimeGrid(20.0, 11)
    m = straight_line_mean([0, 0], [10, 10], grid)
    np.testing.assert_allclose(m[5, :2], [5, 5])
    np.testing.assert_allclose(m[:, 2:], 0.5)
    m = straight_line_mean([3, 4], [3, 4], grid)
    np.testing.assert_array_equal(m[:, :2], np.tile([3, 4], (11, 1)))
    np.testing.assert_array_equal(m[:, 2:], 0)
    m = straight_line_mean([0], [20], TimeGrid(20.0, 3))
    np.testing.assert_allclose(m[:, 0], [0, 10, 20])


def test_straight_line_mean_dimension_mismatch():
    with pytest.raises(ValueError):
        straight_line_mean([0, 0], [1], TimeGrid(20.0, 3))


def test_timegrid_invariants():
    with pytest.raises(ValueError):
        TimeGrid(20.0, 1)
    g = TimeGrid(20.0, 11)
    assert g.dt == 2.0
    np.testing.assert_array_equal(g.times, np.arange(11) * 2.0)


@pytest.mark.parametrize("noise", PROFILES)
@pytest.mark.parametrize("n_support", [3, 4, 6, 11])
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_block_assembly_matches_dense_product(noise, n_support, dim):
    prior = build_prior(np.zeros(dim), np.arange(1, dim + 1), TimeGrid(20.0, n_support), noise)
    kind, q_c = _kind(noise)
    dense = oracles.dense_precision(n_support, dim, 20.0, kind, q_c)
    np.testing.assert_allclose(prior.dense_precision(), dense, rtol=1e-9, atol=1e-9)


def test_rejects_non_positive_anchor():
    with pytest.raises(ValueError):
        build_prior([0.0], [1.0], TimeGrid(20.0, 3), PROFILES[0], anchor_cov_start=-1.0)


def test_dense_kernel_matches_forward_then_condition():
    prior = build_prior([0.0], [4.0], TimeGrid(20.0, 3), NoiseProfile.constant(2.0), 1e-2, 1e-2)
    expected = oracles.goal_conditioned_covariance(3, 1, 20.0, "constant", 2.0, 1e-2, 1e-2)
    np.testing.assert_allclose(dense_kernel(prior), expected, rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("noise", PROFILES)
def test_dense_kernel_properties(noise):
    prior = build_prior([0.0, 1.0], [4.0, 2.0], TimeGrid(20.0, 6), noise, 1e-2, 1e-2)
    k = dense_kernel(prior)
    np.testing.assert_allclose(k, k.T, atol=1e-10)
    assert np.all(np.diag(k) > 0)
    assert np.linalg.norm(k @ prior.dense_precision() - np.eye(len(k))) < 1e-8


def test_tight_goal_anchor_pins_goal_state():
    prior = build_prior([0.0, 0.0], [1.0, 1.0], TimeGrid(20.0, 6), PROFILES[0], 1e-2, 1e-8)
    k = dense_kernel(prior)
    assert np.max(np.abs(k[-4:, -4:])) <= 1e-6


def test_parabolic_variance_symmetric_about_midpoint():
    prior = build_prior([0.0], [5.0], TimeGrid(20.0, 11), NoiseProfile.parabolic(20.0))
    var = np.diag(dense_kernel(prior))[0::2]
    np.testing.assert_allclose(var, var[::-1], atol=1e-8)


def test_zero_noise_at_midpoint_keeps_positive_covariance():
    noise = NoiseProfile.parabolic(20.0)
    assert noise(10.0) == 0.0
    prior = build_prior([0.0], [5.0], TimeGrid(20.0, 11), noise)
    k = dense_kernel(prior)
    mid = slice(10, 12)
    assert np.all(np.linalg.eigvalsh(k[mid, mid]) > 0)


def test_scaling_noise_scales_precision():
    grid = TimeGrid(20.0, 6)
    base = build_prior([0.0], [1.0], grid, PROFILES[1], 1.0, 1.0)
    scaled = build_prior([0.0], [1.0], grid, PROFILES[1].scaled(4.0), 4.0, 4.0)
    np.testing.assert_allclose(scaled.dense_precision(), base.dense_precision() / 4.0, rtol=1e-9, atol=1e-12)
