"""Exact Wasserstein-1 distances between finitely supported measures."""
from __future__ import annotations

import csv
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _simplex
from .measures import DiscreteMeasure

MASS_TOL = 1e-10
BRUTE_FORCE_CELLS = 16


class TransportError(ValueError):
    pass


@dataclass(frozen=True)
class CostMatrix:
    entries: np.ndarray
    error: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2:
            raise ValueError("cost matrix must be two-dimensional")
        if np.any(arr < 0):
            raise ValueError("costs must be nonnegative")
        object.__setattr__(self, "entries", arr)

    @property
    def shape(self):
        return self.entries.shape


@dataclass
class TransportResult:
    value: float
    plan: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    error_bound: float = 0.0
    iterations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def dual_value(self) -> float:
        a = self.plan.sum(axis=1)
        b = self.plan.sum(axis=0)
        return float(a @ self.phi + b @ self.psi)


def cost_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure, metric) -> CostMatrix:
    return CostMatrix(metric.pairwise(mu.keys, nu.keys), metric.error)


def _marginals(mu, nu, cost: CostMatrix):
    a = mu.weight_array() if isinstance(mu, DiscreteMeasure) else np.asarray(mu, dtype=float)
    b = nu.weight_array() if isinstance(nu, DiscreteMeasure) else np.asarray(nu, dtype=float)
    if cost.shape != (len(a), len(b)):
        raise TransportError(f"cost shape {cost.shape} does not match supports {(len(a), len(b))}")
    if abs(a.sum() - b.sum()) > MASS_TOL:
        raise TransportError(f"total masses differ: {a.sum()!r} vs {b.sum()!r}")
    if np.any(a < 0) or np.any(b < 0):
        raise TransportError("negative mass")
    return a, b


def w1_exact(mu, nu, cost: CostMatrix | np.ndarray, max_iter: int | None = None) -> TransportResult:
    """Optimal coupling by the transportation simplex, with dual potentials.

    ``mu`` and ``nu`` are measures (or weight vectors) whose atom order
    matches the rows and columns of ``cost``.
    """
    if not isinstance(cost, CostMatrix):
        cost = CostMatrix(cost)
    a, b = _marginals(mu, nu, cost)
    # rebalance the last column so the transportation polytope is nonempty
    b = b * (a.sum() / b.sum())
    C = np.ascontiguousarray(cost.entries)
    if max_iter is None:
        max_iter = 50 * (len(a) + len(b)) * max(len(a), len(b)) + 1000
    flow, u, v, it, status = _simplex.transport_simplex(a, b, C, max_iter)
    if status != _simplex.STATUS_OPTIMAL:
        raise TransportError(f"transportation simplex stopped with status {status} after {it} pivots")
    value = float(np.sum(flow * C))
    return TransportResult(value, flow, u, v, cost.error, it)


def w1(mu: DiscreteMeasure, nu: DiscreteMeasure, metric) -> float:
    """W1 value only; common mass is cancelled before solving."""
    keys = sorted(set(mu.keys) | set(nu.keys), key=_key_order)
    idx = {k: i for i, k in enumerate(keys)}
    wa = np.zeros(len(keys))
    wb = np.zeros(len(keys))
    for k, w in mu.items():
        wa[idx[k]] = float(w)
    for k, w in nu.items():
        wb[idx[k]] = float(w)
    diff = wa - wb
    pos = np.flatnonzero(diff > 0)
    neg = np.flatnonzero(diff < 0)
    if len(pos) == 0 or len(neg) == 0:
        return 0.0
    C = metric.pairwise([keys[i] for i in pos], [keys[j] for j in neg])
    a = diff[pos]
    b = -diff[neg]
    b *= a.sum() / b.sum()
    flow, u, v, it, status = _simplex.transport_simplex(a, b, np.ascontiguousarray(C),
                                                        50 * (len(a) + len(b)) ** 2 + 1000)
    if status != _simplex.STATUS_OPTIMAL:
        raise TransportError(f"transportation simplex failed with status {status}")
    return float(np.sum(flow * C))


def _key_order(key):
    from .measures import _order
    return _order(key)


def brute_force_w1(mu, nu, cost: CostMatrix | np.ndarray) -> float:
    """Minimum of the transport cost over all vertices of the coupling polytope.

    Vertices are the basic feasible solutions: for every choice of
    ``m + n - 1`` cells forming a spanning tree of the bipartite graph the
    flow is determined uniquely by peeling leaves.  Only for tiny supports.
    """
    if not isinstance(cost, CostMatrix):
        cost = CostMatrix(cost)
    a, b = _marginals(mu, nu, cost)
    m, n = cost.shape
    if m * n > BRUTE_FORCE_CELLS:
        raise TransportError(f"brute force limited to {BRUTE_FORCE_CELLS} cells, got {m * n}")
    b = b * (a.sum() / b.sum())
    C = cost.entries
    cells = [(i, j) for i in range(m) for j in range(n)]
    best = np.inf
    for basis in itertools.combinations(cells, m + n - 1):
        flow = _tree_flow(basis, a, b, m, n)
        if flow is None or min(flow.values()) < -1e-12:
            continue
        best = min(best, sum(f * C[i, j] for (i, j), f in flow.items()))
    return float(best)


def _tree_flow(basis, a, b, m, n):
    # solve the equality system on a spanning tree by repeatedly fixing leaves
    rows = {i: [] for i in range(m)}
    cols = {j: [] for j in range(n)}
    for i, j in basis:
        rows[i].append(j)
        cols[j].append(i)
    if any(not v for v in rows.values()) or any(not v for v in cols.values()):
        return None
    ra = dict(enumerate(a))
    cb = dict(enumerate(b))
    flow = {}
    live = set(basis)
    while live:
        progressed = False
        for i in list(rows):
            if len(rows[i]) == 1:
                j = rows[i][0]
                flow[(i, j)] = ra[i]
                cb[j] -= ra[i]
                live.discard((i, j))
                cols[j].remove(i)
                del rows[i]
                progressed = True
        for j in list(cols):
            if len(cols[j]) == 1:
                i = cols[j][0]
                if (i, j) not in live:
                    continue
                flow[(i, j)] = cb[j]
                ra[i] -= cb[j]
                live.discard((i, j))
                rows[i].remove(j)
                del cols[j]
                progressed = True
        if not progressed:
            return None  # the cells contain a cycle
    return flow


def w1_dual_lower_bound(mu: DiscreteMeasure, nu: DiscreteMeasure, phi: Callable | dict,
                        metric, tol: float = 1e-12) -> float:
    """|int phi dmu - int phi dnu| for a 1-Lipschitz witness on the joint support.

    Values are clipped to [-1, 1], which preserves the Lipschitz bound.
    """
    keys = list(dict.fromkeys(list(mu.keys) + list(nu.keys)))
    vals = np.array([float(phi[k] if isinstance(phi, dict) else phi(k)) for k in keys])
    vals = np.clip(vals, -1.0, 1.0)
    D = metric.pairwise(keys, keys)
    slack = tol + 2 * metric.error
    gap = np.abs(vals[:, None] - vals[None, :]) - D
    if np.any(gap > slack):
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        raise TransportError(f"witness is not 1-Lipschitz between atoms {keys[i]!r} and {keys[j]!r}")
    val = dict(zip(keys, vals))
    total = sum(float(w) * val[k] for k, w in mu.items()) - sum(float(w) * val[k] for k, w in nu.items())
    return abs(total)


def bump_witness(center, radius: float, metric) -> Callable:
    """z -> max(radius - d(center, z), 0), a 1-Lipschitz bump."""
    def phi(z):
        return max(radius - metric.distance(center, z), 0.0)
    return phi


def dump_plan_csv(result: TransportResult, cost: CostMatrix, path, min_mass: float = 0.0):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "mass", "cost"])
        for i, j in zip(*np.nonzero(result.plan > min_mass)):
            w.writerow([int(i), int(j), repr(float(result.plan[i, j])), repr(float(cost.entries[i, j]))])


class MeasureBatch:
    """Measures embedded on a shared atom universe for batched W1 solves."""

    def __init__(self, measures: Sequence[DiscreteMeasure], metric, drop: float = 1e-15):
        self.measures = list(measures)
        keys = sorted({k for mu in self.measures for k in mu.keys}, key=_key_order)
        self.keys = keys
        idx = {k: i for i, k in enumerate(keys)}
        W = np.zeros((len(self.measures), len(keys)))
        for r, mu in enumerate(self.measures):
            for k, w in mu.items():
                W[r, idx[k]] = float(w)
        self.W = W
        self.C = np.ascontiguousarray(metric.pairwise(keys, keys)) if keys else np.zeros((0, 0))
        self.error = metric.error
        self.drop = drop

    def __len__(self):
        return len(self.measures)

    def distances(self, rows: Sequence[int], cols: Sequence[int] | None = None, jobs: int = 1) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.arange(len(self.measures), dtype=np.int64) if cols is None else np.asarray(cols, dtype=np.int64)
        if jobs <= 1 or len(rows) < 2:
            out = _simplex.w1_rows(self.W, self.C, rows, cols, self.drop)
        else:
            parts = np.array_split(rows, min(jobs, len(rows)))
            with ThreadPoolExecutor(max_workers=jobs) as ex:
                chunks = list(ex.map(lambda r: _simplex.w1_rows(self.W, self.C, r, cols, self.drop), parts))
            out = np.vstack(chunks)
        if np.any(out < 0):
            raise TransportError("batched transportation simplex failed")
        return out

    def pairwise(self, jobs: int = 1) -> np.ndarray:
        n = len(self.measures)
        D = self.distances(np.arange(n), jobs=jobs)
        upper = np.triu(D, 1)
        return upper + upper.T
