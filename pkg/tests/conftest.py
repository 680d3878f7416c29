import numpy as np
import pytest

from wassdetect.calibration import epsilon_radius, reference_profile, threshold
from wassdetect.lti_core import collect_benchmark, collect_noise_benchmark, reference_noise, reference_plant

REF_SEED = 20240601


@pytest.fixture(scope="session")
def plant():
    return reference_plant()


@pytest.fixture(scope="session")
def noise():
    return reference_noise()


@pytest.fixture(scope="session")
def plan():
    return threshold(reference_profile(), 1000, 100, 0.01, 0.05)


@pytest.fixture(scope="session")
def benchmark(plant, noise):
    return collect_benchmark(plant, noise, 1000, 1000, 10, np.random.default_rng(REF_SEED))


@pytest.fixture(scope="session")
def noise_benchmark(noise):
    return collect_noise_benchmark(noise[0], 1000, np.random.default_rng(REF_SEED + 1))


@pytest.fixture(scope="session")
def eps_w():
    return epsilon_radius(reference_profile().with_dim(2), 1000, 0.01)


@pytest.fixture(scope="session")
def reach_setup(plant, benchmark, noise_benchmark, eps_w, plan):
    """Supports, covers and the best SDP solution for the reference loop."""
    from wassdetect.reach import SupportRegion, cover_support, sweep_a

    w_region = SupportRegion.from_eps(noise_benchmark, eps_w, 2.0)
    g_region = SupportRegion.from_eps(benchmark, plan.alpha, 2.0)
    E_w, E_g = cover_support(w_region), cover_support(g_region)
    sweep = sweep_a(plant.H, plant.G, E_w, E_g, [0.5, 0.8, 0.9], np.zeros(4))
    return {"w_region": w_region, "g_region": g_region, "E_w": E_w, "E_g": E_g, "sweep": sweep}
