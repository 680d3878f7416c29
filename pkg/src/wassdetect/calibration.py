"""Concentration radii for empirical distributions and the robust alarm threshold.

With ``k = log(c1 / beta) / c2`` (natural log), the radius for ``n`` samples is

    (k / n)^(q / a)                         if n < k
    (k / n)^(1 / max(2, p / q))             if n >= k and p != 2q
    eps solving eps / log(2 + 1/eps) = (k/n)^(1/2)   if n >= k and p == 2q

and the threshold is ``alpha = eps_B + eps_D`` where ``eps_D`` uses ``T``
samples and confidence parameter ``(Delta - beta) / (1 - beta)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class ConcentrationProfile:
    q: float
    a: float
    c1: float
    c2: float
    p: int

    def __post_init__(self):
        if not self.q >= 1:
            raise ValueError("q must be >= 1")
        if not self.a > self.q:
            raise ValueError("tail exponent a must exceed q")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("c1 and c2 must be positive")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("p must be a positive integer")

    def with_dim(self, p: int) -> "ConcentrationProfile":
        return ConcentrationProfile(self.q, self.a, self.c1, self.c2, p)


def reference_profile() -> ConcentrationProfile:
    return ConcentrationProfile(q=1.0, a=1.5, c1=1.84e6, c2=12.5, p=1)


@dataclass(frozen=True)
class RadiusResult:
    value: float
    branch: str  # "small_sample", "power", "transcendental"
    k: float


def _solve_transcendental(rhs: float, rtol: float = 1e-12) -> float:
    """Unique ``eps > 0`` with ``eps / log(2 + 1/eps) = rhs`` by bisection on [1e-12, 1e6]."""

    def g(eps: float) -> float:
        return eps / math.log(2.0 + 1.0 / eps)

    lo, hi = 1e-12, 1e6
    if not g(lo) < g(hi):
        raise ArithmeticError("left side not increasing on the bracket")
    if rhs <= g(lo):
        return lo
    if rhs >= g(hi):
        raise ArithmeticError(f"no root below {hi} for rhs={rhs}")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) < rhs:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def epsilon_radius_detail(profile: ConcentrationProfile, n_samples: int, beta: float) -> RadiusResult:
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    q, a, p = profile.q, profile.a, profile.p
    k = math.log(profile.c1 / beta) / profile.c2
    ratio = k / n_samples
    if n_samples < k:
        return RadiusResult(ratio ** (q / a), "small_sample", k)
    if p != 2 * q:
        return RadiusResult(ratio ** (1.0 / max(2.0, p / q)), "power", k)
    return RadiusResult(_solve_transcendental(math.sqrt(ratio)), "transcendental", k)


def epsilon_radius(profile: ConcentrationProfile, n_samples: int, beta: float) -> float:
    """Radius ``eps`` with ``Prob(W_q(empirical, true) <= eps) >= 1 - beta``."""
    return epsilon_radius_detail(profile, n_samples, beta).value


@dataclass(frozen=True)
class ThresholdPlan:
    N: int
    T: int
    beta: float
    Delta: float
    eps_B: float
    eps_D: float
    alpha: float
    branch_B: str
    branch_D: str

    def report(self) -> str:
        """Key-value text block."""
        lines = [f"{k} = {v}" for k, v in asdict(self).items()]
        return "\n".join(lines) + "\n"


def threshold(profile: ConcentrationProfile, N: int, T: int, beta: float, Delta: float) -> ThresholdPlan:
    if not 0.0 < beta < Delta < 1.0:
        raise ValueError(f"need 0 < beta < Delta < 1, got beta={beta}, Delta={Delta}")
    rb = epsilon_radius_detail(profile, N, beta)
    rd = epsilon_radius_detail(profile, T, (Delta - beta) / (1.0 - beta))
    return ThresholdPlan(N, T, beta, Delta, rb.value, rd.value, rb.value + rd.value, rb.branch, rd.branch)


def stealth_probability_bound(beta: float, Delta: float) -> float:
    """Lower bound ``(1 - Delta) / (1 - beta)`` on the per-step no-alarm probability."""
    return (1.0 - Delta) / (1.0 - beta)
