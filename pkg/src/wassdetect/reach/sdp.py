"""Determinant maximisation for the invariant-ellipsoid LMI.

For ``xi+ = H xi + G (w, gamma_bar)`` with ``w^T Qw w <= 1`` and
``gamma_bar^T Qg gamma_bar <= 1``, any symmetric ``Q > 0`` with

    [ a Q     H^T Q   0   ]
    [ Q H     Q       Q G ]  >= 0,      W = blkdiag((1 - a1) Qw, (1 - a2) Qg)
    [ 0       G^T Q   W   ]

satisfies ``V(xi+) <= a V(xi) + (2 - a1 - a2)`` for ``V(xi) = xi^T Q xi``.
Among those we maximise ``log det Q``.

For fixed ``(a, a1, a2)`` the problem is solved by a barrier method on the
``d(d+1)/2`` free entries of ``Q``: minimise ``-t log det Q - log det M(Q)``
with damped Newton steps, increasing ``t`` geometrically. The LMI has size
``2d + k`` so the optimality gap after the last stage is at most
``(2d + k) / t``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..lti_core import spectral_radius
from .ellipsoid import Ellipsoid


@dataclass(frozen=True)
class SdpSolution:
    Q: Optional[np.ndarray]
    a: float
    a1: float
    a2: float
    objective: float  # -log det Q (inf when infeasible)
    margin: float  # min eigenvalue of the LMI at Q
    feasible: bool
    status: str
    stages: int = 0
    newton_steps: int = 0
    gap_bound: float = float("nan")  # barrier bound on log det suboptimality
    cells: list = field(default_factory=list, repr=False)

    @property
    def log_det(self) -> float:
        return -self.objective


def _sym_basis(d: int) -> np.ndarray:
    basis = []
    for i in range(d):
        for j in range(i, d):
            E = np.zeros((d, d))
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
    return np.array(basis)


def _to_vec(Q: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(Q.shape[0])
    return Q[iu].copy()


def _to_mat(x: np.ndarray, d: int) -> np.ndarray:
    Q = np.zeros((d, d))
    iu = np.triu_indices(d)
    Q[iu] = x
    return Q + np.triu(Q, 1).T


def lmi_matrix(Q: np.ndarray, H: np.ndarray, G: np.ndarray, W: np.ndarray, a: float) -> np.ndarray:
    d, k = G.shape
    Z_dk = np.zeros((d, k))
    return np.block([
        [a * Q, H.T @ Q, Z_dk],
        [Q @ H, Q, Q @ G],
        [Z_dk.T, G.T @ Q, W],
    ])


def input_weight(Q_w: np.ndarray, Q_g: np.ndarray, a1: float, a2: float) -> np.ndarray:
    nw, ng = Q_w.shape[0], Q_g.shape[0]
    return np.block([
        [(1.0 - a1) * Q_w, np.zeros((nw, ng))],
        [np.zeros((ng, nw)), (1.0 - a2) * Q_g],
    ])


def _is_pd(M: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(M)
        return True
    except np.linalg.LinAlgError:
        return False


def _initial_point(H, G, W, a):
    from scipy.linalg import solve_discrete_lyapunov

    rho2 = spectral_radius(H) ** 2
    a_mid = 0.5 * (a + rho2)
    # (H / sqrt(a_mid))^T P (H / sqrt(a_mid)) - P = -I  gives  a P - H^T P H = (a - a_mid) P + a_mid I > 0.
    Hs = H / np.sqrt(a_mid)
    P = solve_discrete_lyapunov(Hs.T, np.eye(H.shape[0]))
    P = 0.5 * (P + P.T)
    c = 1.0
    for _ in range(400):
        if _is_pd(lmi_matrix(c * P, H, G, W, a)):
            return c * P
        c *= 0.5
    raise ArithmeticError("no strictly feasible starting point found")


def _maxdet_cell(H, G, W, a, t0=1.0, growth=2.5, stages=30, gap_tol=1e-9, newton_tol=1e-10,
                 max_newton=100):
    d, k = G.shape
    basis = _sym_basis(d)
    # M(Q) = M0 + sum_i x_i M_i
    M0 = np.zeros((2 * d + k, 2 * d + k))
    M0[2 * d:, 2 * d:] = W
    Mi = np.array([lmi_matrix(E, H, G, np.zeros_like(W), a) for E in basis])

    Q = _initial_point(H, G, W, a)
    x = _to_vec(Q)
    t = t0
    total_newton = 0

    def phi(x, t):
        Q = _to_mat(x, d)
        M = M0 + np.tensordot(x, Mi, axes=1)
        sq, ldq = np.linalg.slogdet(Q)
        sm, ldm = np.linalg.slogdet(M)
        if sq <= 0 or sm <= 0 or not _is_pd(Q) or not _is_pd(M):
            return np.inf
        return -t * ldq - ldm

    size = 2 * d + k
    done = 0
    for _ in range(stages):
        prev = np.inf
        for _ in range(max_newton):
            Q = _to_mat(x, d)
            M = M0 + np.tensordot(x, Mi, axes=1)
            Qi = np.linalg.inv(Q)
            Mi_inv = np.linalg.inv(M)
            A = np.einsum("ab,kbc->kac", Qi, basis)  # Q^-1 E_k
            B = np.einsum("ab,kbc->kac", Mi_inv, Mi)  # M^-1 M_k
            grad = -t * np.einsum("kaa->k", A) - np.einsum("kaa->k", B)
            hess = t * np.einsum("kab,lba->kl", A, A) + np.einsum("kab,lba->kl", B, B)
            step = -np.linalg.solve(hess, grad)
            dec2 = -grad @ step
            if dec2 / 2.0 <= newton_tol or (dec2 < 1e-6 and dec2 > 0.25 * prev):
                # Converged, or stalled at the rounding floor after the quadratic phase.
                break
            prev = dec2
            total_newton += 1
            f0 = phi(x, t)
            s = 1.0
            while s > 1e-12 and not phi(x + s * step, t) <= f0 - 0.25 * s * dec2:
                s *= 0.5
            if s <= 1e-12:
                # Rounding floor reached for this centring problem.
                break
            x = x + s * step
        done += 1
        if size / t <= gap_tol:
            break
        t *= growth

    Q = _to_mat(x, d)
    return Q, total_newton, done, size / t


def solve_cell(H, G, Q_w, Q_g, a: float, a1: float, a2: Optional[float] = None, **kw) -> SdpSolution:
    """Solve one ``(a, a1, a2)`` cell; ``a2`` defaults to ``a - a1``."""
    H = np.asarray(H, float)
    G = np.asarray(G, float)
    a2 = a - a1 if a2 is None else a2
    if not (0.0 <= a < 1.0 and 0.0 <= a1 < 1.0 and 0.0 <= a2 < 1.0):
        raise ValueError("a, a1, a2 must lie in [0, 1)")
    if a1 + a2 < a - 1e-12:
        raise ValueError("need a1 + a2 >= a")
    W = input_weight(np.atleast_2d(Q_w), np.atleast_2d(Q_g), a1, a2)
    if spectral_radius(H) ** 2 >= a:
        # a Q - H^T Q H >= 0 with Q > 0 forces rho(H)^2 <= a.
        return SdpSolution(None, a, a1, a2, np.inf, -np.inf, False, "infeasible")
    Q, newton, stages, gap = _maxdet_cell(H, G, W, a, **kw)
    Q = 0.5 * (Q + Q.T)
    margin = float(np.linalg.eigvalsh(lmi_matrix(Q, H, G, W, a))[0])
    q_min = float(np.linalg.eigvalsh(Q)[0])
    ok = margin >= -1e-8 and q_min > 0
    obj = -float(np.linalg.slogdet(Q)[1])
    return SdpSolution(Q, a, a1, a2, obj, margin, ok, "optimal" if ok else "verification_failed",
                       stages, newton, gap_bound=gap)


def _shape(E) -> np.ndarray:
    if isinstance(E, Ellipsoid):
        return E.normalized().Q
    return np.atleast_2d(np.asarray(E, dtype=float))


def solve_p2(H, G, Q_w, Q_g, a: float, a1_grid: Sequence[float] | None = None, **kw) -> SdpSolution:
    """Best ``log det Q`` over the split grid ``a1 = f * a`` (default ``f = 0.1..0.9``), ``a2 = a - a1``.

    ``Q_w``/``Q_g`` may be :class:`Ellipsoid` objects (normalised to level 1) or shape matrices.
    """
    Qw, Qg = _shape(Q_w), _shape(Q_g)
    fractions = np.arange(1, 10) / 10.0 if a1_grid is None else np.asarray(a1_grid, float)
    cells = [solve_cell(H, G, Qw, Qg, a, f * a, **kw) for f in fractions]
    good = [c for c in cells if c.feasible]
    if not good:
        return SdpSolution(None, a, float("nan"), float("nan"), np.inf, -np.inf, False, "infeasible",
                           cells=cells)
    best = min(good, key=lambda c: c.objective)
    return SdpSolution(best.Q, best.a, best.a1, best.a2, best.objective, best.margin, True, best.status,
                       best.stages, best.newton_steps, best.gap_bound, cells)
