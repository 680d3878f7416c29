"""Sensor attack policies, including the benchmark-resampling stealthy attack."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .empirical import EmpiricalDistribution
from .lti_core import AugmentedState, LinearPlant, NoiseSpec
from .transport import wasserstein

KINDS = ("none", "additive_fixed", "additive_noise", "stealthy_resample")


@dataclass(frozen=True)
class AttackPolicy:
    """What the attacker injects, and when (``start <= t <= end``; ``end=None`` is open-ended).

    ``additive_*`` kinds add their vector straight onto ``gamma``.
    ``stealthy_resample`` cancels ``C e + v`` and substitutes ``gamma_bar``: a
    uniformly drawn sample of ``source`` plus uniform jitter in a ball of
    radius ``jitter``.
    """

    kind: str = "none"
    vector: Optional[np.ndarray] = None
    noise: Optional[NoiseSpec] = None
    source: Optional[EmpiricalDistribution] = None
    jitter: float = 0.0
    start: int = 0
    end: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.end is not None and self.start > self.end:
            raise ValueError("attack start must not exceed end")
        if self.kind == "additive_fixed":
            if self.vector is None:
                raise ValueError("additive_fixed needs a vector")
            object.__setattr__(self, "vector", np.asarray(self.vector, dtype=float).reshape(-1))
        if self.kind == "additive_noise" and self.noise is None:
            raise ValueError("additive_noise needs a noise spec")
        if self.kind == "stealthy_resample":
            if self.source is None:
                raise ValueError("stealthy_resample needs a source distribution")
            if self.jitter < 0:
                raise ValueError("jitter must be nonnegative")

    @property
    def stealthy(self) -> bool:
        return self.kind == "stealthy_resample"

    def active(self, t: int) -> bool:
        if self.kind == "none" or t < self.start:
            return False
        return self.end is None or t <= self.end


NO_ATTACK = AttackPolicy()


def uniform_ball(rng: np.random.Generator, radius: float, dim: int, size: int | None = None) -> np.ndarray:
    """Uniform draws from the closed Euclidean ball of the given radius."""
    shape = (1 if size is None else size, dim)
    direction = rng.standard_normal(shape)
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    scale = radius * rng.random((shape[0], 1)) ** (1.0 / dim)
    out = direction * scale
    return out[0] if size is None else out


def sample_gamma_bar(policy: AttackPolicy, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draws of ``gamma_bar`` for a ``stealthy_resample`` policy."""
    if not policy.stealthy:
        raise ValueError("gamma_bar is only defined for stealthy_resample policies")
    sites = policy.source.samples
    idx = rng.integers(sites.shape[0], size=1 if size is None else size)
    draws = sites[idx]
    if policy.jitter > 0:
        draws = draws + uniform_ball(rng, policy.jitter, sites.shape[1], draws.shape[0])
    return draws[0] if size is None else draws


def gamma_at(
    policy: AttackPolicy,
    t: int,
    plant: LinearPlant,
    state: AugmentedState,
    sampled_v: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Attack vector ``gamma(t)`` and, for stealthy kinds, the ``gamma_bar(t)`` it realises.

    The stealthy kind reads the true estimation error and sensor noise, which
    the attacker is granted full access to.
    """
    p = plant.p
    if not policy.active(t):
        return np.zeros(p), None
    if policy.kind == "additive_fixed":
        return policy.vector.copy(), None
    if policy.kind == "additive_noise":
        return policy.noise.sample(rng), None
    gamma_bar = sample_gamma_bar(policy, rng)
    return -plant.C @ state.e - sampled_v + gamma_bar, gamma_bar


def stealth_margin(proxy, benchmark, q: float, eps_B: float) -> tuple[float, bool]:
    """Distance from an empirical proxy of ``P_gamma_bar`` to the benchmark, and whether it is ``<= eps_B``."""
    d = wasserstein(proxy, benchmark, q)
    return d, bool(d <= eps_B)


def shifted(dist: EmpiricalDistribution, offset) -> EmpiricalDistribution:
    return EmpiricalDistribution(dist.samples + np.asarray(offset, dtype=float))
