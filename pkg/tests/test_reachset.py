import numpy as np
import pytest

from wassdetect.reach import (
    Ellipsoid,
    SdpSolution,
    SupportRegion,
    clamp_to,
    draw_from_support,
    lyapunov_level,
    monte_carlo_reach,
    project_state,
    reach_ellipsoid,
)


def fake_solution(Q, a):
    return SdpSolution(Q, a, a / 2, a / 2, -np.linalg.slogdet(Q)[1], 0.0, True, "optimal")


def test_level_examples():
    assert lyapunov_level(0.5, 0.0, None) == pytest.approx(3.0)
    assert lyapunov_level(0.9, 123.0, None) == pytest.approx(11.0)
    assert lyapunov_level(0.5, 0.0, 0) == 0.0
    assert lyapunov_level(0.5, 0.0, 1) == pytest.approx(1.5)
    assert lyapunov_level(0.5, 4.0, 2) == pytest.approx(0.25 * 4 + 1.5 * 0.75 / 0.5)


def test_reach_ellipsoid_levels_and_point_set():
    Q = np.diag([1.0, 2.0, 3.0, 4.0])
    Exi, Ex = reach_ellipsoid(fake_solution(Q, 0.5), np.zeros(4), 0)
    assert Exi.level == 0 and Ex.level == 0
    Exi, Ex = reach_ellipsoid(fake_solution(Q, 0.5), np.zeros(4))
    assert Ex.level == pytest.approx(3.0)
    with pytest.raises(ValueError):
        reach_ellipsoid(SdpSolution(None, 0.5, 0.2, 0.3, np.inf, -np.inf, False, "infeasible"), np.zeros(4))


def test_projection_is_shadow_of_ellipsoid():
    rng = np.random.default_rng(0)
    R = rng.standard_normal((4, 4))
    Q = R @ R.T + np.eye(4)
    S = project_state(Q, 2)
    np.testing.assert_allclose(S, np.linalg.inv(np.linalg.inv(Q)[:2, :2]), rtol=1e-10)
    # boundary points of the projection are attained by some e
    x = rng.standard_normal(2)
    e = -np.linalg.solve(Q[2:, 2:], Q[2:, :2] @ x)
    xi = np.concatenate([x, e])
    assert xi @ Q @ xi == pytest.approx(x @ S @ x)


def test_zero_supports_follow_noiseless_trajectory(plant):
    region = SupportRegion([[0.0]], 0.0)
    w_region = SupportRegion([[0.0, 0.0]], 0.0)
    xi0 = np.array([1.0, -0.5, 0.2, 0.1])
    X = monte_carlo_reach(plant, (w_region, region), xi0, 20, 50, np.random.default_rng(0))
    expected = np.linalg.matrix_power(plant.H, 20) @ xi0
    np.testing.assert_allclose(X, np.tile(expected[:2], (50, 1)), atol=1e-14)


def test_cloud_reproducible(plant, reach_setup):
    args = (plant, (reach_setup["w_region"], reach_setup["g_region"]), np.zeros(4), 10, 200)
    a = monte_carlo_reach(*args, np.random.default_rng(4))
    b = monte_carlo_reach(*args, np.random.default_rng(4))
    assert np.array_equal(a, b)


def test_support_draws_stay_inside(reach_setup):
    region = reach_setup["g_region"]
    X = draw_from_support(region, np.random.default_rng(1), 5000)
    assert region.contains(X).all()
    pinned = SupportRegion([[1.0, 2.0]], 0.0)
    assert np.all(draw_from_support(pinned, np.random.default_rng(1), 10) == [1.0, 2.0])


def test_clamp_only_moves_outside_points():
    E = Ellipsoid(np.eye(2), 1.0)
    X = np.array([[0.5, 0.0], [3.0, 4.0]])
    Y = clamp_to(E, X)
    assert np.array_equal(Y[0], X[0])
    assert E.contains(Y[1:]).all()
    np.testing.assert_allclose(Y[1], [0.6, 0.8], atol=1e-9)


def test_short_horizon_cloud_inside_finite_level(plant, reach_setup):
    sweep = reach_setup["sweep"]
    xi0 = np.array([0.5, -0.5, 0.1, 0.0])
    _, Ex = reach_ellipsoid(sweep.best, xi0, 5)
    X = monte_carlo_reach(plant, (reach_setup["w_region"], reach_setup["g_region"]), xi0, 5, 2000,
                          np.random.default_rng(2), covers=(reach_setup["E_w"], reach_setup["E_g"]))
    assert Ex.contains(X).all()


def test_sweep_reports_infeasible_rates(reach_setup):
    sweep = reach_setup["sweep"]
    assert sweep.infeasible == [0.5]
    assert set(sweep.log_volumes) == {0.8, 0.9}
    assert sweep.x_ellipsoid.log_volume() == pytest.approx(min(sweep.log_volumes.values()))
