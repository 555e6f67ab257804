"""Covering and packing numbers of sampled accumulation sets.

Counts come from a single farthest-point traversal (start at index 0,
ties to the lowest index).  Its first k centers are pairwise more than
r_k apart and cover everything within r_k, so at scale eps the prefix
ending at the first radius <= eps is at once an internal eps-cover and
a maximal eps-separated set.  Packing also tries a greedy pass in index
order, which on near-linear sample sets keeps many more points, and
reports the larger of the two.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .measures import DiscreteMeasure, PeriodicFamily, simplex_measure
from .transport import MeasureBatch, w1


# --- samples -----------------------------------------------------------------

@dataclass
class AccumulationSample:
    """Empirical measures of one orbit at increasing times."""

    measures: list
    times: list
    provenance: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.measures) != len(self.times):
            raise ValueError("one time per measure")
        if not self.provenance:
            self.provenance = [{} for _ in self.times]
        if len(self.provenance) != len(self.times):
            raise ValueError("one provenance record per measure")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("sample times must be strictly increasing")
        for mu in self.measures:
            if abs(float(mu.total_weight) - 1.0) > 1e-9:
                raise ValueError("sample measures must be normalized")

    def __len__(self):
        return len(self.measures)

    def select(self, keep) -> "AccumulationSample":
        """Sub-sample by a predicate on provenance records or by an index list."""
        idx = [i for i, p in enumerate(self.provenance) if keep(p)] if callable(keep) else sorted(keep)
        return AccumulationSample([self.measures[i] for i in idx], [self.times[i] for i in idx],
                                  [self.provenance[i] for i in idx])

    def checkpoints(self) -> "AccumulationSample":
        return self.select(lambda p: p.get("kind") == "checkpoint")


def geometric_times(a: int, b: int, ratio: float) -> list:
    """Integer times strictly between a and b growing by at least ``ratio``."""
    if ratio <= 1:
        raise ValueError("ratio must exceed 1")
    if a <= 0:
        raise ValueError("start time must be positive")
    out = []
    r = Fraction(ratio).limit_denominator(10**9)
    t = a
    while True:
        nxt = max(t + 1, math.ceil(t * r))
        if nxt >= b:
            return out
        out.append(nxt)
        t = nxt


def run_times(code, per_run: int) -> list:
    """``per_run`` times inside each run of a shift code.

    During a run from time a to b the empirical measure moves on the
    segment towards the run's periodic measure with convex weight a/n, so
    times are placed at equal steps of that weight.
    """
    if per_run < 0:
        raise ValueError("per_run must be nonnegative")
    out = []
    a = 0
    for ell, n in code.pairs():
        b = a + n * code.periods[ell]
        for j in range(1, per_run + 1):
            if a == 0:
                t = b * j // (per_run + 1)
            else:
                lam = 1 - Fraction(j, per_run + 1) * (1 - Fraction(a, b))
                t = round(a / lam)
            if a < t < b:
                out.append(t)
        a = b
    return sorted(set(out))


def _schedule_entries(schedule) -> list:
    if hasattr(schedule, "blocks"):
        entries = []
        for i, (b, n) in enumerate(zip(schedule.blocks, schedule.checkpoints())):
            entries.append((n, {"kind": "checkpoint", "block": i, "L": b.L,
                                "t": [str(v) for v in b.t]}))
        return entries
    out = []
    for item in schedule:
        if isinstance(item, tuple):
            out.append((int(item[0]), dict(item[1], kind=item[1].get("kind", "checkpoint"))))
        else:
            out.append((int(item), {"kind": "checkpoint"}))
    return out


def accumulation_samples(orbit, schedule, T: int | None = None, extra_times: Iterable[int] = (),
                         prune: float = 0.0) -> AccumulationSample:
    """delta_x^n at each checkpoint of ``schedule`` (plus ``extra_times``).

    ``schedule`` is a code (its checkpoints are used), or a list of times or
    (time, provenance) pairs.  Counts are accumulated window by window, so
    times may be astronomically large.  Atoms lighter than ``prune`` are
    dropped and the rest renormalized; this moves each sample by at most
    2 * (dropped mass) * diameter in W1.
    """
    entries = _schedule_entries(schedule)
    entries += [(int(t), {"kind": "intermediate"}) for t in extra_times]
    merged: dict = {}
    for t, prov in entries:
        if t <= 0:
            raise ValueError("sample times must be positive")
        if t not in merged or prov.get("kind") == "checkpoint":
            merged[t] = prov
    times = sorted(merged)
    horizon = getattr(orbit, "horizon", None)
    if horizon is not None and times and times[-1] > horizon and getattr(orbit, "tail", None) is None:
        raise IndexError(f"sample time {times[-1]} beyond realized horizon {horizon}")
    counts = Counter()
    last = 0
    measures = []
    for t in times:
        counts.update(orbit.window_counts(last, t, T))
        last = t
        meta = {"time": t}
        if prune > 0:
            cut = Fraction(prune).limit_denominator(10**18) * t
            kept = {k: c for k, c in counts.items() if c >= cut}
            mu = DiscreteMeasure.from_counts(kept, meta)
        else:
            mu = DiscreteMeasure.from_counts(counts, meta)
        measures.append(mu)
    return AccumulationSample(measures, times, [dict(merged[t], time=t) for t in times])


# --- covering / packing ------------------------------------------------------

class SampleSpace:
    """Deduplicated sample measures with lazily computed W1 rows."""

    def __init__(self, measures: Sequence[DiscreteMeasure] | AccumulationSample, metric, jobs: int = 1,
                 digits: int = 15):
        ms = measures.measures if isinstance(measures, AccumulationSample) else list(measures)
        if not ms:
            raise ValueError("empty sample set")
        seen = {}
        for i, mu in enumerate(ms):
            seen.setdefault(mu.fingerprint(digits), i)
        self.source_index = sorted(seen.values())
        self.measures = [ms[i] for i in self.source_index]
        self.metric = metric
        self.jobs = jobs
        self.batch = MeasureBatch(self.measures, metric)
        self._rows: dict = {}
        self._order = [0]
        self._nearest = self.row(0).copy()
        self._nearest[0] = 0.0
        self._radii = [float(self._nearest.max())]

    def __len__(self):
        return len(self.measures)

    def row(self, i: int) -> np.ndarray:
        if i not in self._rows:
            self._rows[i] = self.batch.distances([i], jobs=self.jobs)[0]
        return self._rows[i]

    def distance(self, i: int, j: int) -> float:
        return float(self.row(i)[j])

    def matrix(self) -> np.ndarray:
        missing = [i for i in range(len(self)) if i not in self._rows]
        if missing:
            for i, r in zip(missing, self.batch.distances(missing, jobs=self.jobs)):
                self._rows[i] = r
        D = np.vstack([self._rows[i] for i in range(len(self))])
        return np.maximum(D, D.T)

    def _extend(self, eps: float):
        while self._radii[-1] > eps and len(self._order) < len(self):
            nxt = int(np.argmax(self._nearest))
            self._order.append(nxt)
            np.minimum(self._nearest, self.row(nxt), out=self._nearest)
            self._nearest[nxt] = 0.0
            self._radii.append(float(self._nearest.max()))

    def count(self, eps: float) -> int:
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        self._extend(eps)
        for k, r in enumerate(self._radii, start=1):
            if r <= eps:
                return k
        return len(self)

    def centers(self, eps: float) -> list:
        return self._order[:self.count(eps)]

    def separated(self, eps: float) -> list:
        """Maximal eps-separated subset taken greedily in index order."""
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        chosen = [0]
        nearest = self.row(0).copy()
        nearest[0] = 0.0
        for i in range(1, len(self)):
            if nearest[i] > eps:
                chosen.append(i)
                np.minimum(nearest, self.row(i), out=nearest)
                nearest[i] = 0.0
        return chosen

    def pack(self, eps: float) -> int:
        """Larger of two maximal eps-separated subsets: the farthest-point prefix and the index-order one."""
        return max(self.count(eps), len(self.separated(eps)))


def _space(S, metric, jobs=1) -> SampleSpace:
    if isinstance(S, SampleSpace):
        return S
    if metric is None:
        raise ValueError("a metric is needed to compare raw measures")
    return SampleSpace(S, metric, jobs)


def covering_number_greedy(S, eps: float, metric=None) -> int:
    """Size of an internal eps-cover of S (centers in S) found greedily."""
    return _space(S, metric).count(eps)


def packing_number_greedy(S, eps: float, metric=None) -> int:
    """Size of a maximal eps-separated subset of S (pairwise distances > eps).

    The farthest-point prefix used for the cover is itself separated, so the
    result is never below the covering count at the same scale.
    """
    return _space(S, metric).pack(eps)


# --- bounds ------------------------------------------------------------------

def rho_L(fam: PeriodicFamily, L: int) -> tuple:
    """(min pairwise distance among anchors 0..L clamped to 1, pivot index)."""
    if L < 1 or L + 1 > len(fam):
        raise ValueError(f"need anchors 0..{L}, family has {len(fam)}")
    pts = [fam.base_point(ell) for ell in range(L + 1)]
    D = fam.metric.pairwise(pts, pts)
    best, pivot = math.inf, 0
    for i in range(L + 1):
        for j in range(i + 1, L + 1):
            if D[i, j] < best:
                best, pivot = float(D[i, j]), i
    if best <= fam.metric.error:
        raise ValueError("anchors coincide")
    return min(best, 1.0), pivot


def theory_constant(zeta, rho: float, L: int) -> float:
    if not 0 < zeta <= 1 or not 0 < rho <= 1 or L < 1:
        raise ValueError("need 0 < zeta <= 1, 0 < rho <= 1, L >= 1")
    return (float(zeta) * rho / (2 * math.sqrt(math.pi * L))) ** L * math.gamma(L / 2 + 1)


def theory_lower_bound(zeta, rho: float, L: int, eps: float) -> float:
    """C_L * eps**-L, the volume lower bound on the emergence at scale eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return theory_constant(zeta, rho, L) * eps ** -L


def historic_lower_bound(mu: DiscreteMeasure, nu: DiscreteMeasure, eps: float, metric=None,
                         distance: float | None = None) -> float:
    """d(mu, nu) / (2 eps)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if distance is None:
        if metric is None:
            raise ValueError("metric or distance required")
        distance = w1(mu, nu, metric)
    return distance / (2 * eps)


# --- curves ------------------------------------------------------------------

def dyadic_grid(a: int, b: int) -> list:
    """[2^-a, 2^-(a+1), ..., 2^-b]."""
    if b < a:
        raise ValueError("dyadic grid needs a <= b")
    return [2.0 ** -j for j in range(a, b + 1)]


def parse_eps_grid(spec: str) -> list:
    kind, _, body = spec.partition(":")
    if kind == "dyadic":
        a, b = (int(v) for v in body.split(","))
        return dyadic_grid(a, b)
    if kind == "list":
        return sorted((float(v) for v in body.split(",")), reverse=True)
    raise ValueError(f"unknown eps grid {spec!r}")


@dataclass(frozen=True)
class CurveRow:
    eps: float
    pack: int
    cover: int
    theory: float | None = None


@dataclass
class EmergenceCurve:
    rows: list
    n_samples: int
    meta: dict = field(default_factory=dict)

    @property
    def eps(self) -> np.ndarray:
        return np.array([r.eps for r in self.rows])

    @property
    def pack(self) -> np.ndarray:
        return np.array([r.pack for r in self.rows])

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "pack", "cover", "theory"])
        for r in self.rows:
            w.writerow([repr(r.eps), r.pack, r.cover, "" if r.theory is None else repr(r.theory)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_dict(self) -> dict:
        return {"n_samples": self.n_samples, "meta": self.meta,
                "rows": [{"eps": r.eps, "pack": r.pack, "cover": r.cover, "theory": r.theory}
                         for r in self.rows]}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def emergence_curve(S, eps_grid: Sequence[float], metric=None, theory: dict | None = None,
                    jobs: int = 1) -> EmergenceCurve:
    """Counts at each eps of a decreasing grid.

    ``theory`` = {"zeta", "rho", "L"} adds C_L eps^-L to every row.
    Packing counts are carried down the grid as a running maximum.
    The cross-scale sandwich pack(2 eps) <= cover(eps) is checked at run time.
    """
    grid = [float(e) for e in eps_grid]
    if not grid or any(e <= 0 for e in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("eps grid must be positive and strictly decreasing")
    space = _space(S, metric, jobs)
    rows = []
    best = 0
    for e in grid:
        cover = covering_number_greedy(space, e)
        # a set separated at a coarser scale is separated at this one too
        best = pack = max(best, packing_number_greedy(space, e))
        if packing_number_greedy(space, 2 * e) > cover:
            raise ArithmeticError(f"sandwich violated at eps={e}")
        th = theory_lower_bound(theory["zeta"], theory["rho"], theory["L"], e) if theory else None
        rows.append(CurveRow(e, pack, cover, th))
    for a, b in zip(rows, rows[1:]):
        if b.pack < a.pack or b.cover < a.cover:
            raise ArithmeticError("counts must be non-increasing in eps")
    return EmergenceCurve(rows, len(space))


def emergence_exponent(curve: EmergenceCurve, window: tuple | None = None) -> float:
    """Least-squares slope of log(pack) against -log(eps).

    ``window`` = (eps_max, eps_min) restricts the rows; rows saturated at
    one sample or at the whole sample set are left out.
    """
    if curve.n_samples == 1:
        return 0.0
    rows = curve.rows
    if window is not None:
        hi, lo = max(window), min(window)
        rows = [r for r in rows if lo * (1 - 1e-12) <= r.eps <= hi * (1 + 1e-12)]
    rows = [r for r in rows if 1 < r.pack < curve.n_samples]
    if len(rows) < 3:
        raise ValueError(f"exponent window has {len(rows)} unsaturated points, need 3")
    x = -np.log([r.eps for r in rows])
    y = np.log([r.pack for r in rows])
    return float(np.polyfit(x, y, 1)[0])


# --- simplex coverage ----------------------------------------------------------

def verify_simplex_in_accumulation(S, fam: PeriodicFamily, L: int, net: Sequence, tol: float,
                                   metric=None) -> dict:
    """Nearest-sample W1 distance of every net measure mu_s, s in the net."""
    measures = S.measures if isinstance(S, (AccumulationSample, SampleSpace)) else list(S)
    metric = metric or fam.metric
    targets = [simplex_measure(s, fam) for s in net]
    batch = MeasureBatch(targets + measures, metric)
    n = len(targets)
    D = batch.distances(np.arange(n), np.arange(n, n + len(measures)))
    nearest = D.min(axis=1)
    which = D.argmin(axis=1)
    slack = 2 * metric.error
    failures = [i for i in range(n) if nearest[i] > tol + slack]
    return {
        "L": L,
        "tol": tol,
        "nearest": [float(v) for v in nearest],
        "sample": [int(v) for v in which],
        "max_nearest": float(nearest.max()) if n else 0.0,
        "failures": failures,
        "pass": not failures,
    }


# --- estimator ---------------------------------------------------------------

class EmergenceEstimator(BaseEstimator):
    """Fits an emergence curve to a list of sample measures."""

    def __init__(self, metric=None, eps_grid=None, window=None, jobs: int = 1):
        self.metric = metric
        self.eps_grid = eps_grid
        self.window = window
        self.jobs = jobs

    def fit(self, X, y=None):
        grid = self.eps_grid if self.eps_grid is not None else dyadic_grid(1, 6)
        self.space_ = SampleSpace(X, self.metric, self.jobs)
        self.curve_ = emergence_curve(self.space_, grid)
        try:
            self.exponent_ = emergence_exponent(self.curve_, self.window)
        except ValueError:
            self.exponent_ = float("nan")
        return self

    def predict(self, eps) -> np.ndarray:
        """Greedy covering counts at the given scales."""
        check_is_fitted(self, "curve_")
        return np.array([self.space_.count(float(e)) for e in np.atleast_1d(eps)])
