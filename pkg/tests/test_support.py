import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wassdetect.reach import SupportRegion, lower_bound_L, markov_mass_bound, support_mass_bound, support_membership
from wassdetect.transport import wasserstein


def test_membership_examples():
    sites = np.random.default_rng(0).standard_normal((10, 2))
    region = SupportRegion(sites, 1e-9)
    assert all(support_membership(region, s) for s in sites)
    assert not support_membership(SupportRegion([[0.0, 0.0]], 1.0), [2.0, 0.0])
    two = SupportRegion([[-1.0], [1.0]], 0.5)
    assert two.nearest([[0.0]])[0][0] == 0
    assert not support_membership(two, [0.0])
    with pytest.raises(ValueError):
        support_membership(two, [0.0, 1.0])


def test_region_validation():
    with pytest.raises(ValueError):
        SupportRegion(np.zeros((0, 2)), 1.0)
    with pytest.raises(ValueError):
        SupportRegion([[0.0]], -1.0)
    r = SupportRegion.from_eps([[0.0]], 0.25, s=2)
    assert r.radius == 0.5 and r.s == 2


def test_mass_and_lower_bound_examples():
    sites = np.random.default_rng(1).standard_normal((30, 2))
    assert support_mass_bound(sites, SupportRegion(sites, 0.0)) == 1.0
    assert lower_bound_L(sites, sites) == 0.0
    assert lower_bound_L([[1.0], [-1.0]], [[0.0]], 1) == 1.0
    assert markov_mass_bound(2, 1) == 0.5


def test_nearest_matches_brute_force_beyond_one_chunk():
    rng = np.random.default_rng(2)
    sites, X = rng.standard_normal((50, 3)), rng.standard_normal((5000, 3))
    idx, dist = SupportRegion(sites, 1.0).nearest(X)
    full = np.linalg.norm(X[:, None, :] - sites[None], axis=2)
    assert np.array_equal(idx, full.argmin(axis=1))
    np.testing.assert_allclose(dist, full.min(axis=1), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(float, (8, 2), elements=st.floats(-2, 2)), arrays(float, (5, 2), elements=st.floats(-2, 2)),
       st.sampled_from([1, 2]))
def test_voronoi_cost_lower_bounds_transport(proxy, sites, q):
    assert lower_bound_L(proxy, sites, q) <= wasserstein(proxy, sites, q) ** q + 1e-9


def test_markov_mass_for_near_proxies(benchmark, plan):
    """Proxies within eps of the sites put at least 1 - 1/s^q of their mass in Omega(sites, s*eps)."""
    rng = np.random.default_rng(4)
    eps = plan.alpha
    for scale in (0.5, 1.0, 1.5):
        proxy = benchmark[rng.integers(len(benchmark), size=3000)] + rng.normal(0, scale * eps, (3000, 1))
        d = wasserstein(proxy, benchmark, 1)
        L = lower_bound_L(proxy, benchmark, 1)
        frac = support_mass_bound(proxy, SupportRegion.from_eps(benchmark, max(d, L), 2.0))
        assert frac >= markov_mass_bound(2, 1) - 0.03


def test_markov_mass_bound_is_nearly_tight():
    # 49% of the mass just outside 2*eps still costs at most eps to transport back.
    eps = 0.1
    proxy = np.array([[0.0]] * 51 + [[2.04 * eps]] * 49)
    assert wasserstein(proxy, [[0.0]], 1) <= eps
    frac = support_mass_bound(proxy, SupportRegion.from_eps([[0.0]], eps, 2.0))
    assert frac == pytest.approx(0.51)
    assert frac >= markov_mass_bound(2, 1)
