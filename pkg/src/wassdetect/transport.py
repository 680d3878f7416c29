"""Exact q-Wasserstein distance between uniform-weight empirical distributions.

For ``N`` source atoms of mass ``1/N`` and ``T`` target atoms of mass ``1/T``
the optimal coupling solves the transportation LP

    min  sum_ij lam_ij * ||x_i - y_j||^q
    s.t. sum_i lam_ij = 1/T,  sum_j lam_ij = 1/N,  lam >= 0.

Scaling by ``N*T`` turns the marginals into integers (``T`` per row, ``N`` per
column), which :func:`_network_simplex` solves with a transportation network
simplex on the bipartite spanning-tree basis.

Degeneracy is removed with Orden's perturbation: every row supply gets ``+1``
and the last column demand ``+N`` after multiplying the integer marginals by
``K = 2N + 1``. Every basic solution of the perturbed problem is then strictly
positive, so each pivot strictly lowers the objective and the method cannot
cycle. Optimality conditions do not depend on the marginals, so the final
basis is optimal for the unperturbed problem; its flows are recovered by
rounding ``flow / K`` (the perturbation contributes at most ``N < K/2``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numba
import numpy as np

from .empirical import EmpiricalDistribution


@dataclass(frozen=True)
class TransportPlan:
    """Sparse optimal coupling: ``lam[rows[k], cols[k]] = mass[k]``."""

    rows: np.ndarray
    cols: np.ndarray
    mass: np.ndarray
    shape: tuple[int, int]
    cost: float
    row_potential: np.ndarray
    col_potential: np.ndarray
    iterations: int

    def dense(self) -> np.ndarray:
        lam = np.zeros(self.shape)
        np.add.at(lam, (self.rows, self.cols), self.mass)
        return lam

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.mass > 0))

    def dual_value(self) -> float:
        """Dual objective ``sum_i u_i/N + sum_j v_j/T``; equals ``cost`` at an optimum."""
        return float(self.row_potential.mean() + self.col_potential.mean())


def cost_matrix(src: np.ndarray, dst: np.ndarray, q: float, norm: str = "euclidean") -> np.ndarray:
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    diff = src[:, None, :] - dst[None, :, :]
    if norm == "euclidean":
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    elif norm == "l1":
        dist = np.abs(diff).sum(axis=2)
    elif norm == "linf":
        dist = np.abs(diff).max(axis=2)
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return dist if q == 1 else dist**q


@numba.njit(cache=True)
def _tree_potentials(n_nodes, tail, head, cost_of_arc, n_rows):
    """Potentials with u[0] = 0 plus parent structure of the basis tree rooted at row 0."""
    n_arcs = tail.shape[0]
    deg = np.zeros(n_nodes + 1, np.int64)
    for k in range(n_arcs):
        deg[tail[k] + 1] += 1
        deg[head[k] + 1] += 1
    for a in range(n_nodes):
        deg[a + 1] += deg[a]
    adj = np.empty(2 * n_arcs, np.int64)
    fill = deg[:-1].copy()
    for k in range(n_arcs):
        adj[fill[tail[k]]] = k
        fill[tail[k]] += 1
        adj[fill[head[k]]] = k
        fill[head[k]] += 1

    pot = np.zeros(n_nodes)
    parent_arc = np.full(n_nodes, -1, np.int64)
    parent = np.full(n_nodes, -1, np.int64)
    depth = np.zeros(n_nodes, np.int64)
    seen = np.zeros(n_nodes, np.bool_)
    stack = np.empty(n_nodes, np.int64)
    top = 0
    stack[0] = 0
    seen[0] = True
    top = 1
    while top > 0:
        top -= 1
        a = stack[top]
        for idx in range(deg[a], deg[a + 1]):
            k = adj[idx]
            b = head[k] if tail[k] == a else tail[k]
            if seen[b]:
                continue
            seen[b] = True
            parent[b] = a
            parent_arc[b] = k
            depth[b] = depth[a] + 1
            # Basic arcs are tight: u_row + v_col = c.
            pot[b] = cost_of_arc[k] - pot[a]
            stack[top] = b
            top += 1
    return pot, parent, parent_arc, depth


@numba.njit(cache=True)
def _network_simplex(C, supply, demand, init_tail, init_head, init_flow, tol, max_iter):
    """Transportation simplex from a nondegenerate initial tree; returns final tree and potentials."""
    N, T = C.shape
    n_nodes = N + T
    tail = init_tail.copy()  # row index
    head = init_head.copy()  # column node id (N + j)
    flow = init_flow.copy()
    n_arcs = tail.shape[0]
    cost_of_arc = np.empty(n_arcs)
    for k in range(n_arcs):
        cost_of_arc[k] = C[tail[k], head[k] - N]

    total = N * T
    block = max(int(np.sqrt(total)), 64)
    if block > total:
        block = total
    cursor = 0
    it = 0
    path_arcs = np.empty(n_nodes, np.int64)
    path_sign = np.empty(n_nodes, np.int64)
    while True:
        pot, parent, parent_arc, depth = _tree_potentials(n_nodes, tail, head, cost_of_arc, N)
        # Block pricing: first block (cyclically) holding a violated reduced cost.
        best = -tol
        bi = -1
        bj = -1
        scanned = 0
        while scanned < total:
            stop = min(scanned + block, total)
            for s in range(scanned, stop):
                idx = cursor + s
                if idx >= total:
                    idx -= total
                i = idx // T
                j = idx - i * T
                d = C[i, j] - pot[i] - pot[N + j]
                if d < best:
                    best = d
                    bi = i
                    bj = j
            scanned = stop
            if bi >= 0:
                break
        if bi < 0:
            return tail, head, flow, pot, it
        cursor = (cursor + scanned) % total
        it += 1
        if it > max_iter:
            return tail, head, flow, pot, -1

        # Cycle through the tree path between row bi and column node N + bj.
        a = bi
        b = N + bj
        da = 0  # distance of a from its endpoint
        db = 0
        n_path = 0
        while a != b:
            if depth[a] >= depth[b]:
                path_arcs[n_path] = parent_arc[a]
                path_sign[n_path] = -1 if da % 2 == 0 else 1
                a = parent[a]
                da += 1
            else:
                path_arcs[n_path] = parent_arc[b]
                path_sign[n_path] = -1 if db % 2 == 0 else 1
                b = parent[b]
                db += 1
            n_path += 1
        theta = -1
        leave = -1
        for s in range(n_path):
            if path_sign[s] < 0:
                f = flow[path_arcs[s]]
                if theta < 0 or f < theta:
                    theta = f
                    leave = path_arcs[s]
        for s in range(n_path):
            flow[path_arcs[s]] += path_sign[s] * theta
        tail[leave] = bi
        head[leave] = N + bj
        flow[leave] = theta
        cost_of_arc[leave] = C[bi, bj]


def _northwest_corner(supply: np.ndarray, demand: np.ndarray):
    N, T = supply.shape[0], demand.shape[0]
    tails, heads, flows = [], [], []
    s = supply.copy()
    d = demand.copy()
    i = j = 0
    while i < N and j < T:
        f = min(s[i], d[j])
        tails.append(i)
        heads.append(N + j)
        flows.append(f)
        s[i] -= f
        d[j] -= f
        if s[i] == 0 and i < N - 1:
            i += 1
        elif d[j] == 0:
            j += 1
        else:
            i += 1
    return (np.array(tails, np.int64), np.array(heads, np.int64), np.array(flows, np.int64))


def _warm_order(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort both atom sets along the leading principal axis of the pooled cloud."""
    pooled = np.vstack([src, dst])
    if pooled.shape[1] == 1:
        axis = np.ones(1)
    else:
        centered = pooled - pooled.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        axis = vt[0]
    return np.argsort(src @ axis, kind="stable"), np.argsort(dst @ axis, kind="stable")


def solve_transport(C: np.ndarray, warm_start_order=None, max_iter: int | None = None) -> TransportPlan:
    """Solve the uniform-marginal transportation LP for an ``N x T`` cost matrix."""
    C = np.ascontiguousarray(C, dtype=float)
    N, T = C.shape
    if warm_start_order is not None:
        perm_r, perm_c = warm_start_order
    else:
        perm_r, perm_c = np.arange(N), np.arange(T)
    Cp = np.ascontiguousarray(C[np.ix_(perm_r, perm_c)])

    K = 2 * N + 1
    supply = np.full(N, T * K + 1, np.int64)
    demand = np.full(T, N * K, np.int64)
    demand[-1] += N
    tails, heads, flows = _northwest_corner(supply, demand)
    assert tails.shape[0] == N + T - 1, "perturbed NW corner must be nondegenerate"

    scale = float(np.max(np.abs(Cp))) if Cp.size else 0.0
    tol = 1e-13 * max(scale, 1e-300)
    if max_iter is None:
        max_iter = 50 * (N + T) * max(1, int(np.log2(N + T)))
    tail, head, flow, pot, it = _network_simplex(Cp, supply, demand, tails, heads, flows, tol, max_iter)
    if it < 0:
        raise RuntimeError("network simplex exceeded its iteration budget")

    base = np.rint(flow / K).astype(np.int64)
    keep = base > 0
    rows = perm_r[tail[keep]]
    cols = perm_c[head[keep] - N]
    mass = base[keep] / float(N * T)
    cost = float(np.sum(base[keep] * Cp[tail[keep], head[keep] - N]) / (N * T))
    u = np.empty(N)
    v = np.empty(T)
    u[perm_r] = pot[:N]
    v[perm_c] = pot[N:]
    return TransportPlan(rows, cols, mass, (N, T), cost, u, v, it)


def _coerce(dist) -> np.ndarray:
    if isinstance(dist, EmpiricalDistribution):
        return dist.samples
    arr = np.asarray(dist, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


def wasserstein(src, dst, q: float = 1.0, *, return_plan: bool = False, norm: str = "euclidean",
                method: str = "auto", warm_start: bool = True):
    """q-Wasserstein distance between two uniform empirical distributions.

    Parameters
    ----------
    src, dst : EmpiricalDistribution or (N, p) array_like
    q : float
        Order, ``q >= 1``.
    return_plan : bool
        Also return the optimal :class:`TransportPlan` (forces the LP path).
    method : {"auto", "lp", "quantile"}
        ``auto`` uses the sorted-quantile formula for one-dimensional samples
        when no plan is requested and the network simplex otherwise.
    warm_start : bool
        Start the simplex from the north-west corner rule on atoms sorted
        along the principal axis (optimal immediately in one dimension).

    Returns
    -------
    distance : float, or ``(distance, plan)`` if ``return_plan``.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    x, y = _coerce(src), _coerce(dst)
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    if method not in ("auto", "lp", "quantile"):
        raise ValueError(f"unknown method {method!r}")
    if method == "quantile" or (method == "auto" and x.shape[1] == 1 and not return_plan):
        if return_plan:
            raise ValueError("the quantile formula does not produce a plan")
        return wasserstein_1d_oracle(x, y, q)
    C = cost_matrix(x, y, q, norm)
    order = _warm_order(x, y) if warm_start else None
    plan = solve_transport(C, order)
    dist = max(plan.cost, 0.0) ** (1.0 / q)
    return (dist, plan) if return_plan else dist


def wasserstein_1d_oracle(src, dst, q: float = 1.0) -> float:
    """W_q on the line through the quantile functions of both samples.

    The two sorted samples are refined onto the common grid of breakpoints
    ``{k/N} U {l/T}`` (kept as integers in units of ``1/(N*T)``), on whose
    cells both quantile functions are constant.
    """
    x, y = _coerce(src), _coerce(dst)
    if x.shape[1] != 1 or y.shape[1] != 1:
        raise ValueError("the quantile oracle needs one-dimensional samples")
    x = np.sort(x[:, 0])
    y = np.sort(y[:, 0])
    N, T = x.shape[0], y.shape[0]
    grid = np.union1d(np.arange(N + 1, dtype=np.int64) * T, np.arange(T + 1, dtype=np.int64) * N)
    start = grid[:-1]
    width = np.diff(grid)
    gap = np.abs(x[start // T] - y[start // N])
    value = float(np.sum(width * gap**q)) / (N * T)
    return value ** (1.0 / q)


def assignment_oracle(src, dst, q: float = 1.0, norm: str = "euclidean") -> float:
    """Brute-force W_q for ``N == T <= 8`` by enumerating all matchings."""
    x, y = _coerce(src), _coerce(dst)
    N, T = x.shape[0], y.shape[0]
    if N != T:
        raise ValueError("assignment oracle needs equally many atoms")
    if N > 8:
        raise ValueError("assignment oracle limited to 8 atoms")
    C = cost_matrix(x, y, q, norm)
    rows = np.arange(N)
    best = min(C[rows, list(perm)].sum() for perm in itertools.permutations(range(N)))
    return float(best / N) ** (1.0 / q)
