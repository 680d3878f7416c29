import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wassdetect.attacks import (
    NO_ATTACK,
    AttackPolicy,
    gamma_at,
    sample_gamma_bar,
    shifted,
    stealth_margin,
    uniform_ball,
)
from wassdetect.detector import simulate_attacked
from wassdetect.empirical import from_samples
from wassdetect.lti_core import AugmentedState, NoiseSpec


def test_no_attack_is_zero(plant):
    g, gb = gamma_at(NO_ATTACK, 5, plant, AugmentedState.zeros(2), np.array([0.1]), np.random.default_rng(0))
    assert np.all(g == 0) and gb is None


def test_activity_window():
    pol = AttackPolicy("additive_fixed", vector=[1.0], start=3, end=5)
    assert [pol.active(t) for t in range(7)] == [False, False, False, True, True, True, False]
    assert AttackPolicy("additive_fixed", vector=[1.0], start=2).active(10**9)
    with pytest.raises(ValueError):
        AttackPolicy("additive_fixed", vector=[1.0], start=5, end=3)
    with pytest.raises(ValueError):
        AttackPolicy("replay")


def test_additive_kinds(plant):
    rng = np.random.default_rng(0)
    s = AugmentedState.zeros(2)
    g, _ = gamma_at(AttackPolicy("additive_fixed", vector=[2.0]), 0, plant, s, np.array([0.0]), rng)
    assert g[0] == 2.0
    pol = AttackPolicy("additive_noise", noise=NoiseSpec.from_config([[{"kind": "point_mass", "value": -1.0}]]))
    g, _ = gamma_at(pol, 0, plant, s, np.array([0.0]), rng)
    assert g[0] == -1.0


def test_stealthy_gamma_cancels_error_and_noise(plant):
    src = from_samples([[0.3]])
    pol = AttackPolicy("stealthy_resample", source=src)
    s = AugmentedState([0.1, 0.2], [0.5, -0.4])
    g, gb = gamma_at(pol, 0, plant, s, np.array([0.05]), np.random.default_rng(0))
    assert gb[0] == 0.3
    assert g[0] == pytest.approx(-0.5 - 0.05 + 0.3)


def test_resampling_without_jitter_reproduces_benchmark(plant, noise, benchmark):
    pol = AttackPolicy("stealthy_resample", source=from_samples(benchmark))
    run = simulate_attacked(plant, noise, pol, 200, np.random.default_rng(1))
    assert np.array_equal(run.residuals, run.gamma_bar)
    assert np.isin(run.residuals[:, 0], benchmark[:, 0]).all()
    d, within = stealth_margin(from_samples(benchmark), from_samples(benchmark), 1, 0.039)
    assert d == 0 and within


BENCH_1D = np.random.default_rng(7).standard_normal((200, 1))


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3))
def test_shift_moves_distance_by_shift(c):
    bench = from_samples(BENCH_1D)
    d, _ = stealth_margin(shifted(bench, [c]), bench, 1, 0.039)
    assert abs(d - abs(c)) <= 1e-10


def test_shift_by_twice_eps_is_not_within(benchmark, plan):
    d, within = stealth_margin(shifted(from_samples(benchmark), [2 * plan.eps_B]), from_samples(benchmark), 1, plan.eps_B)
    assert d == pytest.approx(2 * plan.eps_B, abs=1e-10) and not within


def test_jittered_resampling_stays_within_eps(benchmark, plan):
    pol = AttackPolicy("stealthy_resample", source=from_samples(benchmark), jitter=plan.eps_B)
    proxy = sample_gamma_bar(pol, np.random.default_rng(3), 10 * len(benchmark))
    d, within = stealth_margin(proxy, benchmark, 1, plan.eps_B)
    assert within, d


def test_uniform_ball_radius_and_spread():
    X = uniform_ball(np.random.default_rng(0), 2.0, 3, 20000)
    r = np.linalg.norm(X, axis=1)
    assert r.max() <= 2.0
    # radius^3 is uniform on [0, 8] for the 3-ball
    assert np.mean(r**3) == pytest.approx(4.0, rel=0.03)
    assert uniform_ball(np.random.default_rng(0), 1.0, 2).shape == (2,)
