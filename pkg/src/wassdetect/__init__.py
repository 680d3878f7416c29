"""Wasserstein-distance anomaly detection for LTI control loops under sensor attacks."""
from .attacks import NO_ATTACK, AttackPolicy, gamma_at, sample_gamma_bar, shifted, stealth_margin
from .calibration import ConcentrationProfile, ThresholdPlan, epsilon_radius, reference_profile, threshold
from .detector import (
    AlarmRecord,
    TraceVerdict,
    alarm_rate,
    classify_trace,
    detect_step,
    detect_stream,
    run_detection,
    simulate_attacked,
)
from .empirical import EmpiricalDistribution, SlidingWindow, from_samples
from .lti_core import (
    AugmentedState,
    LinearPlant,
    NoiseSpec,
    collect_benchmark,
    reference_noise,
    reference_plant,
    step,
    step_attacked,
)
from .transport import wasserstein

__version__ = "0.1.0"
