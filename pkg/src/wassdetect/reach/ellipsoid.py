"""Origin-centred ellipsoids, minimum-volume enclosing ellipsoids, and support covers."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .support import SupportRegion


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """``{x : x^T Q x <= level}``; ``level == 0`` is the single point at the origin."""

    Q: np.ndarray
    level: float = 1.0

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise ValueError("shape matrix must be square")
        if not np.allclose(Q, Q.T, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise ValueError("shape matrix must be symmetric")
        Q = 0.5 * (Q + Q.T)
        if np.linalg.eigvalsh(Q)[0] <= 0:
            raise ValueError("shape matrix must be positive definite")
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "level", float(self.level))

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    def values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :] if X.shape[0] == self.dim else X[:, None]
        return np.einsum("ij,jk,ik->i", X, self.Q, X)

    def contains(self, X, rtol: float = 0.0) -> np.ndarray:
        return self.values(X) <= self.level * (1.0 + rtol)

    def normalized(self) -> "Ellipsoid":
        """Same set written with level 1."""
        if self.level == 0:
            raise ValueError("a point ellipsoid has no level-1 form")
        return Ellipsoid(self.Q / self.level, 1.0)

    def semi_axes(self) -> np.ndarray:
        return np.sqrt(self.level / np.linalg.eigvalsh(self.Q))

    def log_volume(self) -> float:
        """Log of the Lebesgue volume; ``-inf`` at level 0."""
        d = self.dim
        if self.level == 0:
            return -math.inf
        log_ball = 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0)
        return log_ball + 0.5 * d * math.log(self.level) - 0.5 * np.linalg.slogdet(self.Q)[1]

    def same_set(self, other: "Ellipsoid", rtol: float = 1e-9) -> bool:
        a, b = self.normalized().Q, other.normalized().Q
        return bool(np.allclose(a, b, rtol=rtol, atol=rtol * np.abs(a).max()))

    def to_json(self) -> dict:
        return {"dim": self.dim, "Q": [float(x) for x in self.Q.reshape(-1)], "level": self.level}

    @classmethod
    def from_json(cls, obj) -> "Ellipsoid":
        if isinstance(obj, str):
            obj = json.loads(obj)
        d = int(obj["dim"])
        return cls(np.array(obj["Q"], dtype=float).reshape(d, d), float(obj["level"]))


@dataclass(frozen=True)
class MveeResult:
    """``{x : (x - center)^T A (x - center) <= 1}`` with its optimality certificate."""

    A: np.ndarray
    center: np.ndarray
    weights: np.ndarray
    gap: float  # max_i kappa_i / (d + 1) - 1 over all points
    complementarity: float  # 1 - min_{u_i > 0} kappa_i / (d + 1)
    iterations: int


def mvee(points, tol: float = 1e-7, max_iter: int = 100_000, use_hull: bool = True) -> MveeResult:
    """Minimum-volume enclosing ellipsoid (Khachiyan's method with Todd-Yildirim away steps).

    Works on the lifted points ``(x_i, 1)`` with weights ``u`` and stops once
    every lifted point has ``kappa_i <= (1 + tol)(d + 1)`` and every weighted
    point has ``kappa_i >= (1 - tol)(d + 1)``. The returned ``A`` is scaled so
    that every input point lies inside.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    n_pts, d = P.shape
    if n_pts < d + 1:
        raise ValueError("need at least d + 1 points")
    idx = np.arange(n_pts)
    if use_hull and d == 1:
        idx = np.array([np.argmin(P[:, 0]), np.argmax(P[:, 0])])
    elif use_hull and d >= 2 and n_pts > 4 * (d + 1):
        from scipy.spatial import ConvexHull, QhullError

        try:
            idx = np.unique(ConvexHull(P).simplices)
        except QhullError:
            pass
    work = P[idx]
    m = work.shape[0]
    if np.linalg.matrix_rank(np.hstack([work, np.ones((m, 1))])) < d + 1:
        raise ValueError("points do not span the space affinely")
    Z = np.hstack([work, np.ones((m, 1))])
    u = np.full(m, 1.0 / m)
    dp1 = d + 1.0
    it = 0
    while True:
        Lam = (Z * u[:, None]).T @ Z
        kappa = np.einsum("ij,jk,ik->i", Z, np.linalg.inv(Lam), Z)
        j_up = int(np.argmax(kappa))
        eps_up = kappa[j_up] / dp1 - 1.0
        active = u > 0
        j_dn = int(np.flatnonzero(active)[np.argmin(kappa[active])])
        eps_dn = 1.0 - kappa[j_dn] / dp1
        if max(eps_up, eps_dn) <= tol or it >= max_iter:
            break
        it += 1
        if eps_up >= eps_dn:
            k = kappa[j_up]
            tau = (k - dp1) / (dp1 * (k - 1.0))
            u *= 1.0 - tau
            u[j_up] += tau
        else:
            k = kappa[j_dn]
            uj = u[j_dn]
            drop = uj / (1.0 - uj) if uj < 1.0 else np.inf
            tau = min((dp1 - k) / (dp1 * (k - 1.0)), drop) if k > 1.0 else drop
            u *= 1.0 + tau
            u[j_dn] -= tau
            if tau == drop:
                u[j_dn] = 0.0
        u /= u.sum()

    center = u @ work
    S = (work * u[:, None]).T @ work - np.outer(center, center)
    A = np.linalg.inv(S) / d
    diff = P - center
    vals = np.einsum("ij,jk,ik->i", diff, A, diff)
    worst = vals.max()
    if worst > 1.0:
        A = A / worst
    # Certificate over every input point, not only the hull vertices.
    Zall = np.hstack([P, np.ones((n_pts, 1))])
    Lam = (Z * u[:, None]).T @ Z
    kap_all = np.einsum("ij,jk,ik->i", Zall, np.linalg.inv(Lam), Zall)
    gap = float(kap_all.max() / dp1 - 1.0)
    comp = float(1.0 - kappa[u > 0].min() / dp1)
    weights = np.zeros(n_pts)
    weights[idx] = u
    return MveeResult(0.5 * (A + A.T), center, weights, gap, comp, it)


def _deficient_directions(sites: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    centered = sites - sites.mean(axis=0)
    d = sites.shape[1]
    if sites.shape[0] == 1:
        return np.eye(d)
    _, s, vt = np.linalg.svd(centered, full_matrices=True)
    s_full = np.zeros(d)
    s_full[: s.shape[0]] = s
    scale = max(s_full.max(), 1.0)
    return vt[s_full <= rtol * scale]


def cover_support(region: SupportRegion, tol: float = 1e-7) -> Ellipsoid:
    """Origin-centred ellipsoid containing every ball ``B_radius(site)`` and hence the region.

    The MVEE of the sites fixes the shape; its centre is absorbed by choosing
    the level ``max_i (||s_i||_Q + radius * sqrt(lambda_max(Q)))^2``, which by
    the triangle inequality in the ``Q``-norm puts each whole ball inside.
    Rank-deficient site sets are first padded with points ``mean ± delta*u``
    along each deficient direction ``u`` (``delta`` is the radius, or a small
    positive fallback when the radius is zero). The shape matrix is returned
    scaled to unit largest eigenvalue.
    """
    sites = region.sites
    d = sites.shape[1]
    pts = sites
    deficient = _deficient_directions(sites)
    if deficient.shape[0] > 0:
        spread = float(np.ptp(sites, axis=0).max()) if sites.shape[0] > 1 else 0.0
        delta = region.radius if region.radius > 0 else 1e-3 * max(spread, 1.0)
        c = sites.mean(axis=0)
        pad = [c + sign * delta * u for u in deficient for sign in (1.0, -1.0)]
        pts = np.vstack([sites, np.array(pad)])
    if pts.shape[0] < d + 1:
        pts = np.vstack([pts, pts.mean(axis=0, keepdims=True)])
    Q = mvee(pts, tol=tol).A
    Q = Q / np.linalg.eigvalsh(Q)[-1]
    site_norm = np.sqrt(np.einsum("ij,jk,ik->i", sites, Q, sites))
    level = float(np.max(site_norm + region.radius) ** 2)  # lambda_max(Q) == 1
    if level == 0.0:
        raise ValueError("degenerate support: single site at the origin with zero radius")
    return Ellipsoid(Q, level)
