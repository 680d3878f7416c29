import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wassdetect.lti_core import (
    AugmentedState,
    Gaussian,
    LinearPlant,
    NoiseSpec,
    PointMass,
    Uniform,
    augmented_step,
    collect_benchmark,
    reference_noise,
    simulate_residuals,
    step,
    step_attacked,
    write_residual_csv,
)

finite = st.floats(-5, 5, allow_nan=False)


def test_zero_everything_stays_zero(plant):
    nxt, rec = step(plant, AugmentedState.zeros(2), [0, 0], [0], [0])
    assert np.all(nxt.xi == 0) and np.all(rec.r == 0)


def test_sensor_noise_enters_residual_and_error(plant):
    nxt, rec = step(plant, AugmentedState.zeros(2), [0, 0], [0.3], [0])
    assert rec.r == pytest.approx([0.3])
    np.testing.assert_allclose(nxt.e, [-0.069, 0.060], atol=1e-15)
    np.testing.assert_allclose(nxt.x, [0, 0], atol=0)


def test_attacked_step_reference_values(plant):
    nxt, rec = step_attacked(plant, AugmentedState.zeros(2), [0, 0], [1.0])
    np.testing.assert_allclose(nxt.e, [-0.23, 0.20], atol=1e-15)
    np.testing.assert_allclose(nxt.x, [0, 0], atol=0)
    nxt, rec = step_attacked(plant, AugmentedState.zeros(2), [0, 0], [0.0])
    assert np.all(nxt.xi == 0) and rec.r[0] == 0


def test_decay_without_inputs(plant):
    # F has a complex eigenpair, so the Euclidean norm wobbles; the Lyapunov norm must not.
    from scipy.linalg import solve_discrete_lyapunov

    F = plant.F
    P = solve_discrete_lyapunov(F.T, np.eye(4))
    xi = np.array([1.0, -2.0, 0.5, 0.3])
    energy = [xi @ P @ xi]
    for _ in range(500):
        xi = augmented_step(plant, xi, np.zeros(3))
        energy.append(xi @ P @ xi)
    assert np.all(np.diff(energy) < 0) or energy[-1] == 0
    assert np.linalg.norm(xi) < 1e-12


@settings(max_examples=200, deadline=None)
@given(arrays(float, 4, elements=finite), arrays(float, 2, elements=finite),
       arrays(float, 1, elements=finite), arrays(float, 1, elements=finite))
def test_primal_and_augmented_routes_agree(xi, w, v, g):
    from wassdetect.lti_core import reference_plant

    P = reference_plant()
    nxt, _ = step(P, AugmentedState.from_xi(xi), w, v, g)
    np.testing.assert_allclose(nxt.xi, augmented_step(P, xi, np.concatenate([w, v + g])), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(arrays(float, 4, elements=finite), arrays(float, 2, elements=finite),
       arrays(float, 1, elements=finite), arrays(float, 1, elements=finite))
def test_attacked_step_matches_explicit_cancellation(xi, w, v, gbar):
    from wassdetect.lti_core import reference_plant

    P = reference_plant()
    s = AugmentedState.from_xi(xi)
    gamma = -P.C @ s.e - v + gbar
    a, rec_a = step_attacked(P, s, w, gbar, v)
    b, rec_b = step(P, s, w, v, gamma)
    np.testing.assert_allclose(a.xi, b.xi, atol=1e-12)
    np.testing.assert_allclose(rec_b.r, gbar, atol=1e-12)
    assert np.array_equal(rec_a.r, gbar)


def test_plant_rejects_unstable_observer():
    with pytest.raises(ValueError, match="observer"):
        LinearPlant([[1.0, 0.1], [-0.2, 0.75]], [[0.1], [0.2]], [[1.0, 0.0]], [[3.0], [0.0]], [[-0.13, 0.01]])


def test_plant_rejects_bad_shapes():
    with pytest.raises(ValueError):
        LinearPlant(np.eye(2), np.ones((3, 1)), [[1.0, 0.0]], [[0.5], [0.0]], [[0.0, 0.0]])


def test_noise_primitives():
    rng = np.random.default_rng(1)
    assert np.all(PointMass(2.5).sample(rng, (5,)) == 2.5)
    assert abs(Uniform(-0.3, 0.3).sample(rng, (10**6,)).mean()) < 0.002
    w, _ = reference_noise()
    assert abs(w.sample(rng, 10**6)[:, 0].mean()) < 0.003
    np.testing.assert_allclose(w.mean(), [0.0, 0.0], atol=1e-15)


def test_noise_config_std_and_variance_agree():
    a = NoiseSpec.from_config([[{"kind": "gaussian", "mean": 0.0, "std": 0.5}]])
    b = NoiseSpec.from_config([[{"kind": "gaussian", "mean": 0.0, "variance": 0.25}]])
    assert a == b
    assert NoiseSpec.from_config(a.to_config()) == a
    with pytest.raises(ValueError):
        NoiseSpec.from_config([[{"kind": "cauchy"}]])


def test_benchmark_shapes_and_zero_noise(plant):
    zero = (NoiseSpec.zero(2), NoiseSpec.zero(1))
    r = collect_benchmark(plant, zero, 0, 1, 10, np.random.default_rng(0))
    assert r.shape == (1, 1) and r[0, 0] == 0
    for N, gap in [(1, 1), (7, 3), (50, 10)]:
        assert collect_benchmark(plant, reference_noise(), 5, N, gap, np.random.default_rng(0)).shape == (N, 1)


def test_benchmark_is_near_zero_mean(benchmark):
    assert np.linalg.norm(benchmark.mean(axis=0)) <= 0.05


def test_seed_determinism(plant, noise):
    a, _ = simulate_residuals(plant, noise, 300, np.random.default_rng(5))
    b, _ = simulate_residuals(plant, noise, 300, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_simulated_residuals_follow_step(plant, noise):
    rng = np.random.default_rng(3)
    r, final = simulate_residuals(plant, noise, 50, np.random.default_rng(3))
    ws, vs = noise[0].sample(rng, 50), noise[1].sample(rng, 50)
    s = AugmentedState.zeros(2)
    for k in range(50):
        s, rec = step(plant, s, ws[k], vs[k], [0.0])
        assert rec.r[0] == pytest.approx(r[k, 0], abs=1e-12)
    np.testing.assert_allclose(s.xi, final.xi, atol=1e-12)


def test_residual_csv(tmp_path):
    write_residual_csv(tmp_path / "r.csv", np.array([[0.1], [1 / 3]]), t0=4)
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "t,r_1"
    assert float(lines[2].split(",")[1]) == 1 / 3 and lines[2].startswith("5,")
