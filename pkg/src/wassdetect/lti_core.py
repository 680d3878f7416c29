"""Closed-loop stochastic LTI plant with observer, state feedback and sensor attack.

The plant is

    x(t+1) = A x(t) + B u(t) + w(t)
    y(t)   = C x(t) + v(t) + gamma(t)

with observer ``xh(t+1) = A xh + B u + L (y - C xh)`` and feedback
``u = K xh``. Stacking the true state and the estimation error
``e = x - xh`` gives ``xi = (x, e)`` and ``xi(t+1) = F xi + G sigma``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np


def _as_matrix(a, name: str) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(a, dtype=float))
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    return arr


def spectral_radius(M: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(M))))


@dataclass(frozen=True)
class LinearPlant:
    """Plant matrices ``(A, B, C)`` with observer gain ``L`` and feedback gain ``K``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    L: np.ndarray
    K: np.ndarray
    check_stability: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        B = _as_matrix(self.B, "B")
        if B.shape[0] != n:
            B = B.T if B.shape[1] == n else B
        C = _as_matrix(self.C, "C")
        L = _as_matrix(self.L, "L")
        if L.shape[0] != n and L.shape[1] == n:
            L = L.T
        K = _as_matrix(self.K, "K")
        m, p = B.shape[1], C.shape[0]
        expected = {"B": (B, (n, m)), "C": (C, (p, n)), "L": (L, (n, p)), "K": (K, (m, n))}
        for name, (mat, shape) in expected.items():
            if mat.shape != shape:
                raise ValueError(f"{name} has shape {mat.shape}, expected {shape}")
        for name, mat in (("A", A), ("B", B), ("C", C), ("L", L), ("K", K)):
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        if self.check_stability:
            rho_obs = spectral_radius(A - L @ C)
            rho_ctl = spectral_radius(A + B @ K)
            if rho_obs >= 1.0:
                raise ValueError(f"observer not stable: spectral radius of A - LC is {rho_obs:.4f}")
            if rho_ctl >= 1.0:
                raise ValueError(f"feedback not stabilizing: spectral radius of A + BK is {rho_ctl:.4f}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def F(self) -> np.ndarray:
        """Augmented transition for ``xi = (x, e)`` in normal operation."""
        n = self.n
        BK = self.B @ self.K
        return np.block([[self.A + BK, -BK], [np.zeros((n, n)), self.A - self.L @ self.C]])

    @property
    def H(self) -> np.ndarray:
        """Augmented transition under an attack that cancels ``C e + v``."""
        n = self.n
        BK = self.B @ self.K
        return np.block([[self.A + BK, -BK], [np.zeros((n, n)), self.A]])

    @property
    def G(self) -> np.ndarray:
        """Input matrix mapping ``(w, v + gamma)`` (or ``(w, gamma_bar)``) into ``xi``."""
        n, p = self.n, self.p
        eye = np.eye(n)
        return np.block([[eye, np.zeros((n, p))], [eye, -self.L]])

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("A", "B", "C", "L", "K")}


def reference_plant() -> LinearPlant:
    """The two-state, single-output benchmark plant used throughout the experiments."""
    return LinearPlant(
        A=[[1.00, 0.10], [-0.20, 0.75]],
        B=[[0.10], [0.20]],
        C=[[1.0, 0.0]],
        L=[[0.23], [-0.20]],
        K=[[-0.13, 0.01]],
    )


@dataclass(frozen=True)
class AugmentedState:
    x: np.ndarray
    e: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AugmentedState":
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def from_xi(cls, xi, t: int = 0) -> "AugmentedState":
        xi = np.asarray(xi, dtype=float)
        n = xi.shape[0] // 2
        return cls(xi[:n].copy(), xi[n:].copy(), t)

    @property
    def xi(self) -> np.ndarray:
        return np.concatenate([self.x, self.e])

    @property
    def x_hat(self) -> np.ndarray:
        return self.x - self.e


@dataclass(frozen=True)
class StepRecord:
    t: int
    x: np.ndarray
    x_hat: np.ndarray
    y: np.ndarray
    y_hat: np.ndarray
    r: np.ndarray
    gamma: np.ndarray


# --------------------------------------------------------------------------- noise


@dataclass(frozen=True)
class Gaussian:
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.normal(self.mean, np.sqrt(self.variance), size)

    def expectation(self) -> float:
        return self.mean


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("uniform requires lo <= hi")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size)

    def expectation(self) -> float:
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class PointMass:
    value: float

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return np.full(size, float(self.value))

    def expectation(self) -> float:
        return float(self.value)


Primitive = Union[Gaussian, Uniform, PointMass]

_PRIMITIVES = {"gaussian": Gaussian, "uniform": Uniform, "point_mass": PointMass}
_PRIMITIVE_NAMES = {v: k for k, v in _PRIMITIVES.items()}


@dataclass(frozen=True)
class NoiseSpec:
    """Per-coordinate noise, each coordinate an independent sum of primitive terms."""

    coords: tuple[tuple[Primitive, ...], ...]

    def __post_init__(self):
        coords = tuple(tuple(terms) for terms in self.coords)
        if not coords or any(len(terms) == 0 for terms in coords):
            raise ValueError("every noise coordinate needs at least one term")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def mean(self) -> np.ndarray:
        return np.array([sum(t.expectation() for t in terms) for terms in self.coords])

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draw one vector (``size=None``) or a ``(size, dim)`` array."""
        shape = () if size is None else (size,)
        cols = []
        for terms in self.coords:
            total = np.zeros(shape)
            for term in terms:
                total = total + term.sample(rng, shape)
            cols.append(total)
        return np.stack(cols, axis=-1)

    @classmethod
    def zero(cls, dim: int) -> "NoiseSpec":
        return cls(tuple((PointMass(0.0),) for _ in range(dim)))

    @classmethod
    def from_config(cls, coords: Sequence[Sequence[dict]]) -> "NoiseSpec":
        """Build from ``[[{"kind": "gaussian", "mean": .., "variance": ..}, ...], ...]``."""
        parsed = []
        for i, terms in enumerate(coords):
            row = []
            for term in terms:
                term = dict(term)
                kind = term.pop("kind", None)
                if kind not in _PRIMITIVES:
                    raise ValueError(f"coordinate {i}: unknown noise kind {kind!r}")
                if kind == "gaussian" and "std" in term:
                    if "variance" in term:
                        raise ValueError(f"coordinate {i}: give either std or variance, not both")
                    term["variance"] = float(term.pop("std")) ** 2
                try:
                    row.append(_PRIMITIVES[kind](**term))
                except TypeError as exc:
                    raise ValueError(f"coordinate {i}: bad parameters for {kind}: {exc}") from None
            parsed.append(tuple(row))
        return cls(tuple(parsed))

    def to_config(self) -> list[list[dict]]:
        out = []
        for terms in self.coords:
            out.append([{"kind": _PRIMITIVE_NAMES[type(t)], **t.__dict__} for t in terms])
        return out


def reference_noise() -> tuple[NoiseSpec, NoiseSpec]:
    """Process and sensor noise of the benchmark experiment.

    The Gaussian terms ``N(-0.25, 0.02)`` and ``N(0, 0.04)`` are read as
    (mean, standard deviation). Read as variances, the attack-free alarm rate
    of the calibrated detector lands near 10%, well above its 5% design rate.
    """
    w = NoiseSpec((
        (Gaussian(-0.25, 0.02**2), Uniform(0.0, 0.5)),
        (Gaussian(0.0, 0.04**2), Uniform(-0.2, 0.2)),
    ))
    v = NoiseSpec(((Uniform(-0.3, 0.3),),))
    return w, v


def sample_noise(spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    return spec.sample(rng)


# ---------------------------------------------------------------------- dynamics


def _vec(a, dim: int, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float).reshape(-1)
    if arr.shape != (dim,):
        raise ValueError(f"{name} must have dimension {dim}, got {arr.shape[0]}")
    return arr


def step(plant: LinearPlant, state: AugmentedState, w, v, gamma) -> tuple[AugmentedState, StepRecord]:
    """Advance the closed loop one step through the plant/observer equations."""
    n, p = plant.n, plant.p
    x = _vec(state.x, n, "x")
    e = _vec(state.e, n, "e")
    w = _vec(w, n, "w")
    v = _vec(v, p, "v")
    gamma = _vec(gamma, p, "gamma")

    x_hat = x - e
    u = plant.K @ x_hat
    y = plant.C @ x + v + gamma
    y_hat = plant.C @ x_hat
    r = y - y_hat
    x_next = plant.A @ x + plant.B @ u + w
    x_hat_next = plant.A @ x_hat + plant.B @ u + plant.L @ r
    nxt = AugmentedState(x_next, x_next - x_hat_next, state.t + 1)
    return nxt, StepRecord(state.t, x, x_hat, y, y_hat, r, gamma)


def augmented_step(plant: LinearPlant, xi, sigma) -> np.ndarray:
    """``xi(t+1) = F xi + G sigma`` with ``sigma = (w, v + gamma)``."""
    return plant.F @ np.asarray(xi, dtype=float) + plant.G @ np.asarray(sigma, dtype=float)


def step_attacked(
    plant: LinearPlant, state: AugmentedState, w, gamma_bar, v=None
) -> tuple[AugmentedState, StepRecord]:
    """Advance under ``gamma = -C e - v + gamma_bar``; the residual equals ``gamma_bar``.

    ``v`` only affects the recorded ``y`` and ``gamma``; the dynamics do not depend on it.
    """
    n, p = plant.n, plant.p
    x = _vec(state.x, n, "x")
    e = _vec(state.e, n, "e")
    w = _vec(w, n, "w")
    gamma_bar = _vec(gamma_bar, p, "gamma_bar")
    v = np.zeros(p) if v is None else _vec(v, p, "v")

    xi_next = plant.H @ np.concatenate([x, e]) + plant.G @ np.concatenate([w, gamma_bar])
    x_hat = x - e
    gamma = -plant.C @ e - v + gamma_bar
    y = plant.C @ x + v + gamma
    y_hat = plant.C @ x_hat
    nxt = AugmentedState.from_xi(xi_next, state.t + 1)
    return nxt, StepRecord(state.t, x, x_hat, y, y_hat, gamma_bar.copy(), gamma)


def simulate_residuals(
    plant: LinearPlant,
    noise: tuple[NoiseSpec, NoiseSpec],
    steps: int,
    rng: np.random.Generator,
    state: AugmentedState | None = None,
) -> tuple[np.ndarray, AugmentedState]:
    """Attack-free residual stream ``r(0..steps-1)`` and the final state."""
    w_spec, v_spec = noise
    state = AugmentedState.zeros(plant.n) if state is None else state
    ws = w_spec.sample(rng, steps)
    vs = v_spec.sample(rng, steps)
    F = plant.F
    G = plant.G
    xi = state.xi
    out = np.empty((steps, plant.p))
    C, n = plant.C, plant.n
    for k in range(steps):
        e = xi[n:]
        out[k] = C @ e + vs[k]
        xi = F @ xi + G @ np.concatenate([ws[k], vs[k]])
    return out, AugmentedState.from_xi(xi, state.t + steps)


def collect_benchmark(
    plant: LinearPlant,
    noise: tuple[NoiseSpec, NoiseSpec],
    burn_in: int,
    N: int,
    gap: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Attack-free residuals ``r(burn_in + k*gap)``, ``k = 0..N-1``, starting from ``xi = 0``."""
    if burn_in < 0 or N < 1 or gap < 1:
        raise ValueError("need burn_in >= 0, N >= 1 and gap >= 1")
    total = burn_in + (N - 1) * gap + 1
    residuals, _ = simulate_residuals(plant, noise, total, rng)
    return residuals[burn_in::gap][:N].copy()


def collect_noise_benchmark(spec: NoiseSpec, N: int, rng: np.random.Generator) -> np.ndarray:
    """``N`` i.i.d. draws of the process noise, the sites of its benchmark distribution."""
    if N < 1:
        raise ValueError("N must be positive")
    return spec.sample(rng, N)


def write_residual_csv(path, residuals: np.ndarray, t0: int = 0) -> None:
    residuals = np.atleast_2d(np.asarray(residuals, dtype=float))
    p = residuals.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"r_{i + 1}" for i in range(p)])
        for k, row in enumerate(residuals):
            writer.writerow([t0 + k] + [repr(float(val)) for val in row])
