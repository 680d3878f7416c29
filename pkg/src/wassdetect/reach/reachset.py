"""Reach ellipsoids from an SDP solution, and Monte Carlo clouds to check them against."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..lti_core import LinearPlant, NoiseSpec
from .ellipsoid import Ellipsoid
from .sdp import SdpSolution, solve_p2
from .support import SupportRegion

MAX_ATTEMPTS = 1000


def lyapunov_level(a: float, v0: float, M: Optional[int]) -> float:
    """Bound on ``xi^T Q xi`` after ``M`` steps from ``V(xi0) = v0``; ``M=None`` is the infinite horizon."""
    if M is None or math.isinf(M):
        return (2.0 - a) / (1.0 - a)
    aM = a**M
    return aM * v0 + (2.0 - a) * (1.0 - aM) / (1.0 - a)


def project_state(Q: np.ndarray, n: int) -> np.ndarray:
    """Shape of ``{x : exists e, (x, e)^T Q (x, e) <= c}``: the Schur complement of ``Q_ee``."""
    Qxx, Qxe, Qee = Q[:n, :n], Q[:n, n:], Q[n:, n:]
    S = Qxx - Qxe @ np.linalg.solve(Qee, Qxe.T)
    return 0.5 * (S + S.T)


def reach_ellipsoid(sol: SdpSolution, xi0, M: Optional[int] = None) -> tuple[Ellipsoid, Ellipsoid]:
    """Ellipsoid over ``xi = (x, e)`` holding the ``M``-step reachable set, and its projection onto ``x``."""
    if not sol.feasible:
        raise ValueError("reach ellipsoid needs a feasible SDP solution")
    Q = sol.Q
    xi0 = np.asarray(xi0, dtype=float).reshape(-1)
    level = lyapunov_level(sol.a, float(xi0 @ Q @ xi0), M)
    n = Q.shape[0] // 2
    return Ellipsoid(Q, level), Ellipsoid(project_state(Q, n), level)


def clamp_to(E: Ellipsoid, X: np.ndarray) -> np.ndarray:
    """Radially shrink rows of ``X`` lying outside ``E`` onto its boundary."""
    vals = E.values(X)
    over = vals > E.level
    if np.any(over):
        X = X.copy()
        X[over] *= np.sqrt(E.level / vals[over])[:, None] * (1.0 - 1e-12)
    return X


def draw_from_support(region: SupportRegion, rng: np.random.Generator, size: int) -> np.ndarray:
    """Bootstrap a site, add uniform jitter in the capping ball, reject draws outside the region.

    After ``MAX_ATTEMPTS`` rejections a draw falls back to its site, which is always inside.
    """
    from ..attacks import uniform_ball

    sites = region.sites
    idx = rng.integers(sites.shape[0], size=size)
    out = sites[idx].copy()
    pending = np.arange(size)
    for _ in range(MAX_ATTEMPTS):
        if pending.size == 0:
            break
        cand = sites[idx[pending]]
        if region.radius > 0:
            cand = cand + uniform_ball(rng, region.radius, region.dim, pending.size)
        ok = region.contains(cand)
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
    return out


def _as_xi0(xi0, d: int, trials: int) -> np.ndarray:
    xi0 = np.asarray(xi0, dtype=float).reshape(-1)
    if xi0.shape[0] != d:
        raise ValueError(f"xi0 must have length {d}")
    return np.tile(xi0, (trials, 1))


def monte_carlo_reach(
    plant: LinearPlant,
    supports: tuple[SupportRegion, SupportRegion],
    xi0,
    M: int,
    trials: int,
    rng: np.random.Generator,
    covers: Optional[tuple[Ellipsoid, Ellipsoid]] = None,
    return_xi: bool = False,
) -> np.ndarray:
    """Endpoints ``x(M)`` of ``trials`` runs of ``xi+ = H xi + G (w, gamma_bar)`` with support-drawn inputs.

    With ``covers`` the inputs are additionally clamped into the covering
    ellipsoids, which makes the Lyapunov bound hold deterministically.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    w_sup, g_sup = supports
    H, G = plant.H, plant.G
    xi = _as_xi0(xi0, 2 * plant.n, trials)
    for _ in range(M):
        w = draw_from_support(w_sup, rng, trials)
        g = draw_from_support(g_sup, rng, trials)
        if covers is not None:
            w = clamp_to(covers[0], w)
            g = clamp_to(covers[1], g)
        xi = xi @ H.T + np.hstack([w, g]) @ G.T
    return xi if return_xi else xi[:, : plant.n]


def unclamped_reach(
    plant: LinearPlant,
    w_spec: NoiseSpec,
    gamma_sites: np.ndarray,
    jitter: float,
    xi0,
    M: int,
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Endpoints ``x(M)`` with ``w`` from the true noise law and ``gamma_bar`` from a resampling attacker."""
    from ..attacks import uniform_ball

    sites = np.atleast_2d(np.asarray(gamma_sites, dtype=float))
    H, G = plant.H, plant.G
    xi = _as_xi0(xi0, 2 * plant.n, trials)
    for _ in range(M):
        w = w_spec.sample(rng, trials)
        g = sites[rng.integers(sites.shape[0], size=trials)]
        if jitter > 0:
            g = g + uniform_ball(rng, jitter, sites.shape[1], trials)
        xi = xi @ H.T + np.hstack([w, g]) @ G.T
    return xi[:, : plant.n]


@dataclass
class ReachSweep:
    """Per-``a`` SDP outcomes and the one whose projected state ellipsoid is smallest."""

    best: Optional[SdpSolution]
    xi_ellipsoid: Optional[Ellipsoid]
    x_ellipsoid: Optional[Ellipsoid]
    solutions: list = field(default_factory=list)
    log_volumes: dict = field(default_factory=dict)

    @property
    def infeasible(self) -> list:
        return [s.a for s in self.solutions if not s.feasible]


def sweep_a(H, G, Q_w, Q_g, a_grid: Sequence[float], xi0, M: Optional[int] = None, **kw) -> ReachSweep:
    """Solve the SDP for every ``a`` and keep the smallest projected reach ellipsoid."""
    sols, vols = [], {}
    best = None
    for a in a_grid:
        sol = solve_p2(H, G, Q_w, Q_g, float(a), **kw)
        sols.append(sol)
        if not sol.feasible:
            continue
        _, Ex = reach_ellipsoid(sol, xi0, M)
        vols[float(a)] = Ex.log_volume()
        if best is None or vols[float(a)] < vols[best.a]:
            best = sol
    if best is None:
        return ReachSweep(None, None, None, sols, vols)
    Exi, Ex = reach_ellipsoid(best, xi0, M)
    return ReachSweep(best, Exi, Ex, sols, vols)
