import math

import numpy as np
import pytest

from wassdetect.calibration import (
    ConcentrationProfile,
    _solve_transcendental,
    epsilon_radius,
    epsilon_radius_detail,
    reference_profile,
    stealth_probability_bound,
    threshold,
)

# Frozen by hand: k = ln(1.84e6 / beta) / 12.5, eps = sqrt(k / n).
EPS_B = math.sqrt(math.log(1.84e8) / 12.5 / 1000)
EPS_D = math.sqrt(math.log(1.84e6 / (0.04 / 0.99)) / 12.5 / 100)


def test_hand_values():
    assert EPS_B == pytest.approx(0.0390184, abs=1e-7)
    assert EPS_D == pytest.approx(0.1187741, abs=1e-7)
    prof = reference_profile()
    assert epsilon_radius(prof, 1000, 0.01) == pytest.approx(EPS_B, rel=1e-14)
    assert epsilon_radius(prof, 100, 0.04 / 0.99) == pytest.approx(EPS_D, rel=1e-14)


def test_threshold_reference():
    plan = threshold(reference_profile(), 1000, 100, 0.01, 0.05)
    assert plan.alpha == pytest.approx(0.158, abs=1e-3)
    assert plan.alpha == pytest.approx(EPS_B + EPS_D, rel=1e-14)
    assert "alpha = " in plan.report()


def test_doubling_n_divides_by_sqrt2():
    prof = reference_profile()
    assert epsilon_radius(prof, 2000, 0.01) == pytest.approx(epsilon_radius(prof, 1000, 0.01) / math.sqrt(2), rel=1e-14)


def test_branches_follow_their_conditions():
    prof = reference_profile()
    k = math.log(prof.c1 / 0.01) / prof.c2  # about 1.52
    assert epsilon_radius_detail(prof, 1, 0.01).branch == "small_sample"
    assert epsilon_radius_detail(prof, 1, 0.01).value == pytest.approx(k ** (1 / 1.5))
    assert epsilon_radius_detail(prof, 2, 0.01).branch == "power"
    assert epsilon_radius_detail(prof.with_dim(2), 1000, 0.01).branch == "transcendental"
    high = prof.with_dim(5)
    assert epsilon_radius(high, 1000, 0.01) == pytest.approx((k / 1000) ** (1 / 5))


def test_transcendental_root_residual():
    for rhs in (1e-4, 0.039, 0.5, 3.0):
        eps = _solve_transcendental(rhs)
        assert abs(eps / math.log(2 + 1 / eps) - rhs) <= 1e-12 * max(1.0, rhs) + 1e-12


def test_monotone_in_beta_and_delta():
    # alpha itself is U-shaped in beta: eps_B falls but eps_D rises as the window budget shrinks.
    prof = reference_profile()
    betas = np.linspace(0.001, 0.049, 30)
    plans = [threshold(prof, 1000, 100, b, 0.05) for b in betas]
    assert np.all(np.diff([p.eps_B for p in plans]) < 0)
    assert np.all(np.diff([p.eps_D for p in plans]) > 0)
    assert epsilon_radius(prof, 1000, 1e-300) > 5 * epsilon_radius(prof, 1000, 1e-3)
    deltas = np.linspace(0.0101, 0.5, 30)
    alphas = [threshold(prof, 1000, 100, 0.01, d).alpha for d in deltas]
    assert np.all(np.diff(alphas) < 0)


def test_validation():
    with pytest.raises(ValueError):
        ConcentrationProfile(q=0.5, a=1.5, c1=1, c2=1, p=1)
    with pytest.raises(ValueError):
        ConcentrationProfile(q=1, a=1.0, c1=1, c2=1, p=1)
    with pytest.raises(ValueError):
        threshold(reference_profile(), 1000, 100, 0.05, 0.05)
    with pytest.raises(ValueError):
        epsilon_radius(reference_profile(), 0, 0.01)


def test_stealth_bound():
    assert stealth_probability_bound(0.01, 0.05) == pytest.approx(0.95 / 0.99)
