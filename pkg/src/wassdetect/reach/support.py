"""Probabilistic supports: Voronoi cells of benchmark sites capped by balls."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..empirical import EmpiricalDistribution

_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class SupportRegion:
    """``union_i (V_i(sites) ∩ B_radius(site_i))`` with ``V_i`` the unweighted Voronoi cell.

    Membership only needs the nearest site, so cell geometry is never built.
    ``s`` records the inflation factor that produced ``radius = s * eps``.
    """

    sites: np.ndarray
    radius: float
    s: float = 1.0

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=float)
        if sites.ndim == 1:
            sites = sites[:, None]
        if sites.shape[0] == 0:
            raise ValueError("a support region needs at least one site")
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        sites = sites.copy()
        sites.setflags(write=False)
        object.__setattr__(self, "sites", sites)

    @classmethod
    def from_eps(cls, sites, eps: float, s: float = 2.0) -> "SupportRegion":
        return cls(sites, s * eps, s)

    @property
    def dim(self) -> int:
        return self.sites.shape[1]

    def nearest(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Index (lowest on ties) and Euclidean distance of each point's nearest site."""
        X = _points(X, self.dim)
        idx = np.empty(X.shape[0], dtype=np.int64)
        dist = np.empty(X.shape[0])
        sq_sites = np.einsum("ij,ij->i", self.sites, self.sites)
        for lo in range(0, X.shape[0], _CHUNK):
            chunk = X[lo:lo + _CHUNK]
            d2 = np.einsum("ij,ij->i", chunk, chunk)[:, None] - 2.0 * chunk @ self.sites.T + sq_sites[None, :]
            k = np.argmin(d2, axis=1)
            idx[lo:lo + _CHUNK] = k
            diff = chunk - self.sites[k]
            dist[lo:lo + _CHUNK] = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        return idx, dist

    def contains(self, X) -> np.ndarray:
        _, dist = self.nearest(X)
        return dist <= self.radius


def _points(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :] if X.shape[0] == dim else X[:, None]
    if X.shape[1] != dim:
        raise ValueError(f"points have dimension {X.shape[1]}, region has {dim}")
    return X


def _samples(proxy) -> np.ndarray:
    if isinstance(proxy, EmpiricalDistribution):
        return proxy.samples
    arr = np.asarray(proxy, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


def support_membership(region: SupportRegion, x) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != region.dim:
        raise ValueError(f"point has dimension {x.shape[0]}, region has {region.dim}")
    return bool(region.contains(x[None, :])[0])


def support_mass_bound(proxy, region: SupportRegion) -> float:
    """Fraction of the proxy's samples inside the region."""
    return float(np.mean(region.contains(_samples(proxy))))


def lower_bound_L(proxy, sites, q: float = 1.0) -> float:
    """Mean nearest-site distance^q: the Voronoi (unconstrained-mass) transport cost."""
    sites = _samples(sites)
    _, dist = SupportRegion(sites, 0.0).nearest(_samples(proxy))
    return float(np.mean(dist**q))


def markov_mass_bound(s: float, q: float) -> float:
    """Guaranteed mass ``1 - 1/s^q`` inside ``Omega(sites, s*eps)`` once ``L <= eps^q``."""
    return 1.0 - 1.0 / s**q
