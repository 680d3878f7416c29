"""Online Wasserstein detector: sliding window, detection measure, alarms, trace verdicts."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .attacks import NO_ATTACK, AttackPolicy, gamma_at, sample_gamma_bar
from .empirical import EmpiricalDistribution, SlidingWindow
from .lti_core import AugmentedState, LinearPlant, NoiseSpec, step, step_attacked
from .transport import wasserstein


@dataclass(frozen=True)
class AlarmRecord:
    t: int
    z: float
    alarm: bool
    alpha: float


@dataclass(frozen=True)
class TraceVerdict:
    kind: str  # stealthy_all | m_step_stealthy | active_all | mixed
    alarm_count: int
    step_count: int
    M: Optional[int] = None

    @property
    def alarm_rate(self) -> float:
        return self.alarm_count / self.step_count if self.step_count else 0.0


@dataclass
class AttackedRun:
    """Residuals ``r(t)`` for ``t = 0..steps-1`` and, where applied, ``gamma_bar(t)`` (NaN elsewhere)."""

    residuals: np.ndarray
    gamma_bar: np.ndarray
    final_state: AugmentedState
    states: list = field(default_factory=list)


def detect_step(benchmark: EmpiricalDistribution, window: SlidingWindow, alpha: float, q: float = 1.0,
                t: int = -1, method: str = "auto") -> Optional[AlarmRecord]:
    """``z = W_q(benchmark, window)``, alarm iff ``z > alpha``; ``None`` while the window warms up.

    ``method`` is passed to :func:`wasserstein` (``"lp"`` forces the network simplex).
    """
    if not window.full:
        return None
    z = wasserstein(benchmark, window.samples(), q, method=method)
    return AlarmRecord(t, z, bool(z > alpha), alpha)


def simulate_attacked(
    plant: LinearPlant,
    noise: tuple[NoiseSpec, NoiseSpec],
    attack: AttackPolicy,
    steps: int,
    rng: np.random.Generator,
    attack_rng: np.random.Generator | None = None,
    state: AugmentedState | None = None,
    keep_states: bool = False,
) -> AttackedRun:
    w_spec, v_spec = noise
    attack_rng = rng.spawn(1)[0] if attack_rng is None else attack_rng
    state = AugmentedState.zeros(plant.n) if state is None else state
    ws = w_spec.sample(rng, steps)
    vs = v_spec.sample(rng, steps)
    residuals = np.empty((steps, plant.p))
    gbar = np.full((steps, plant.p), np.nan)
    states = []
    for k in range(steps):
        t = state.t
        if keep_states:
            states.append(state)
        if attack.stealthy and attack.active(t):
            g = sample_gamma_bar(attack, attack_rng)
            state, rec = step_attacked(plant, state, ws[k], g, vs[k])
            gbar[k] = g
        else:
            gamma, _ = gamma_at(attack, t, plant, state, vs[k], attack_rng)
            state, rec = step(plant, state, ws[k], vs[k], gamma)
        residuals[k] = rec.r
    return AttackedRun(residuals, gbar, state, states)


def detect_stream(benchmark: EmpiricalDistribution, residuals: np.ndarray, T: int, alpha: float,
                  q: float = 1.0, t0: int = 0, method: str = "auto") -> list[AlarmRecord]:
    """Apply the detector to every full window of a residual stream (one record per step once full)."""
    residuals = np.atleast_2d(np.asarray(residuals, dtype=float))
    if residuals.shape[0] == 1 and residuals.shape[1] != benchmark.dim:
        residuals = residuals.T
    window = SlidingWindow(T, benchmark.dim)
    records = []
    for k, r in enumerate(residuals):
        window.push(r)
        rec = detect_step(benchmark, window, alpha, q, t=t0 + k, method=method)
        if rec is not None:
            records.append(rec)
    return records


def run_detection(
    plant: LinearPlant,
    noise: tuple[NoiseSpec, NoiseSpec],
    benchmark: EmpiricalDistribution,
    attack: AttackPolicy,
    steps: int,
    T: int,
    alpha: float,
    q: float,
    rng: np.random.Generator,
    attack_rng: np.random.Generator | None = None,
    burn_in: int = 0,
) -> list[AlarmRecord]:
    """Closed-loop run with the online detector; one record per step once ``T`` residuals are held.

    ``burn_in`` attack-free steps are simulated first (not recorded) so the
    detector starts from steady state; times are counted from the end of burn-in.
    """
    state = None
    if burn_in > 0:
        warm = simulate_attacked(plant, noise, NO_ATTACK, burn_in, rng, attack_rng)
        state = AugmentedState(warm.final_state.x, warm.final_state.e, 0)
    run = simulate_attacked(plant, noise, attack, steps, rng, attack_rng, state)
    return detect_stream(benchmark, run.residuals, T, alpha, q)


def classify_trace(records: Sequence[AlarmRecord]) -> TraceVerdict:
    """Summarise an attacked run's alarm sequence.

    ``m_step_stealthy`` carries ``M``, the number of quiet records before the first alarm.
    """
    if not records:
        raise ValueError("cannot classify an empty trace")
    alarms = np.array([r.alarm for r in records], dtype=bool)
    count, n = int(alarms.sum()), alarms.size
    if count == 0:
        return TraceVerdict("stealthy_all", 0, n)
    if count == n:
        return TraceVerdict("active_all", n, n)
    first = int(np.argmax(alarms))
    if first > 0:
        return TraceVerdict("m_step_stealthy", count, n, M=first)
    return TraceVerdict("mixed", count, n)


def alarm_rate(records: Iterable[AlarmRecord]) -> float:
    records = list(records)
    return sum(r.alarm for r in records) / len(records) if records else 0.0


def write_alarm_csv(path, records: Sequence[AlarmRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "z", "alarm"])
        for r in records:
            writer.writerow([r.t, repr(float(r.z)), int(r.alarm)])
