"""Ground metrics on measure atoms.

A metric object exposes ``pairwise(keys_a, keys_b)`` returning a dense
float matrix, and ``error``, a per-entry bound on the difference between
the returned values and the true distances of the underlying points.
"""
from __future__ import annotations

import itertools
from typing import NamedTuple, Sequence

import numpy as np

from .shift import truncation_error


class ShiftMetric:
    """d(x, y) = sum_j |x_j - y_j| / m**j on depth-T prefix keys."""

    def __init__(self, m: int, depth: int):
        self.m = m
        self.depth = depth
        self.error = truncation_error(m, depth)
        self._w = float(m) ** -np.arange(depth, dtype=float)

    def _array(self, keys) -> np.ndarray:
        arr = np.asarray(keys, dtype=np.int16)
        if arr.ndim != 2 or arr.shape[1] != self.depth:
            raise ValueError(f"keys must be prefixes of length {self.depth}")
        return arr

    def pairwise(self, keys_a: Sequence, keys_b: Sequence) -> np.ndarray:
        A = self._array(keys_a)
        B = self._array(keys_b)
        out = np.empty((len(A), len(B)))
        chunk = max(1, 4_000_000 // max(1, len(B) * self.depth))
        for s in range(0, len(A), chunk):
            diff = np.abs(A[s:s + chunk, None, :] - B[None, :, :])
            out[s:s + chunk] = diff @ self._w
        return out

    def distance(self, a, b) -> float:
        return float(self.pairwise([a], [b])[0, 0])

    @property
    def diameter(self) -> float:
        return float((self.m - 1) * self._w.sum())

    def describe(self) -> dict:
        return {"type": "shift", "m": self.m, "depth": self.depth}


class TableMetric:
    """Finite metric space given by an explicit distance table."""

    def __init__(self, labels: Sequence, table, check: bool = True):
        self.labels = list(labels)
        self.table = np.asarray(table, dtype=float)
        n = len(self.labels)
        if self.table.shape != (n, n):
            raise ValueError("table shape does not match labels")
        if len(set(self.labels)) != n:
            raise ValueError("labels must be distinct")
        self.index = {k: i for i, k in enumerate(self.labels)}
        self.error = 0.0
        if check:
            self._validate()

    def _validate(self, tol: float = 1e-12):
        D = self.table
        if np.any(D < 0) or not np.allclose(D, D.T, atol=tol) or np.any(np.abs(np.diag(D)) > tol):
            raise ValueError("table is not a symmetric nonnegative matrix with zero diagonal")
        off = D + np.eye(len(D))
        if np.any(off <= 0):
            raise ValueError("distinct labels must have positive distance")
        # triangle inequality d(i,j) <= d(i,k) + d(k,j)
        via = (D[:, :, None] + D[None, :, :]).min(axis=1)
        if np.any(D > via + tol):
            raise ValueError("table violates the triangle inequality")

    def pairwise(self, keys_a, keys_b) -> np.ndarray:
        ia = [self.index[k] for k in keys_a]
        ib = [self.index[k] for k in keys_b]
        return self.table[np.ix_(ia, ib)]

    def distance(self, a, b) -> float:
        return float(self.table[self.index[a], self.index[b]])

    @property
    def diameter(self) -> float:
        return float(self.table.max())

    def describe(self) -> dict:
        return {"type": "table", "labels": [str(k) for k in self.labels],
                "table": self.table.tolist()}


class Perturbed(NamedTuple):
    """A point displaced by ``radius`` from ``base``; ``tag`` keeps copies distinct."""

    base: object
    tag: int
    radius: float


class HedgehogMetric:
    """Extends a base metric to displaced copies of its points.

    Distinct keys are at distance d(base_a, base_b) + r_a + r_b, which is
    a metric whenever the base is, and puts each copy exactly ``radius``
    away from its base point.
    """

    def __init__(self, base):
        self.base = base
        self.error = base.error

    @staticmethod
    def _split(key):
        if isinstance(key, Perturbed):
            return key.base, key.radius
        return key, 0.0

    def pairwise(self, keys_a, keys_b) -> np.ndarray:
        ba, ra = zip(*(self._split(k) for k in keys_a)) if keys_a else ((), ())
        bb, rb = zip(*(self._split(k) for k in keys_b)) if keys_b else ((), ())
        D = self.base.pairwise(list(ba), list(bb))
        D = D + np.asarray(ra)[:, None] + np.asarray(rb)[None, :]
        for (i, a), (j, b) in itertools.product(enumerate(keys_a), enumerate(keys_b)):
            if a == b:
                D[i, j] = 0.0
        return D

    def distance(self, a, b) -> float:
        return float(self.pairwise([a], [b])[0, 0])

    def describe(self) -> dict:
        return {"type": "hedgehog", "base": self.base.describe()}
