"""Orbits realized from codes.

Two kinds of orbit are produced here: the coded point of the full shift
(a concatenation of periodic words), and a synthetic orbit of an abstract
wandering domain that follows a schedule of windows over a base order.
Both expose ``window_counts`` so empirical measures can be formed at
astronomically large times without enumerating the orbit.
"""
from __future__ import annotations

import bisect
import csv
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .measures import DiscreteMeasure, PeriodicFamily
from .metric import HedgehogMetric, Perturbed
from .scheduling import BaseOrder, MasterCode, NewhouseOrder, ShiftCode
from .shift import CodedPoint, _count_residue

DIRECT_SUM_LIMIT = 10**6


def realize_shift_point(code: ShiftCode, fam: PeriodicFamily | None = None, m: int | None = None,
                        tail: str | None = "repeat") -> CodedPoint:
    """Concatenate [p^(l)]_{n per(p^(l))} over the pairs of the code."""
    words = fam.words if fam is not None else code.words
    if words is None:
        raise ValueError("shift realization needs anchor words")
    if m is None:
        m = fam.metric.m if fam is not None and hasattr(fam.metric, "m") else max(2, max(max(w) for w in words))
    runs = [(words[ell], n) for ell, n in code.pairs()]
    return CodedPoint(runs, m, tail=tail)


# --- realization specs --------------------------------------------------------

@dataclass(frozen=True)
class WindowLayout:
    hat_start: int
    hat_len: int
    I_start: int
    I_len: int
    m: int

    def tag(self, offset: int) -> str:
        if self.hat_start <= offset < self.hat_start + self.hat_len:
            return "hat"
        if self.I_start <= offset < self.I_start + self.I_len:
            return "I"
        return "gap"


class CodeRealizationSpec:
    """Where the hat interval and the I interval sit inside each window."""

    order: BaseOrder
    zeta: Fraction
    k_D: int

    def layout(self, k: int, per: int) -> WindowLayout:
        raise NotImplementedError

    def sums(self, k1: int, k2: int, per: int) -> tuple:
        """(sum #hat-I_k, sum #I_k) over k1 < k <= k2, counting only k >= k_D."""
        lo = max(k1, self.k_D - 1)
        if k2 <= lo:
            return 0, 0
        if k2 - lo > DIRECT_SUM_LIMIT:
            raise OverflowError("range too long for direct summation")
        h = i = 0
        for k in range(lo + 1, k2 + 1):
            lay = self.layout(k, per)
            h += lay.hat_len
            i += lay.I_len
        return h, i

    def check_layout(self, k: int, per: int):
        lay = self.layout(k, per)
        if min(lay.hat_start, lay.hat_len, lay.I_start, lay.I_len) < 0:
            raise ValueError(f"negative interval in window {k}")
        if lay.hat_start + lay.hat_len > lay.I_start and lay.I_start + lay.I_len > lay.hat_start:
            raise ValueError(f"intervals overlap in window {k}")
        if max(lay.hat_start + lay.hat_len, lay.I_start + lay.I_len) > lay.m:
            raise ValueError(f"intervals leave window {k}")
        if lay.I_len % per:
            raise ValueError(f"#I_{k} = {lay.I_len} is not a multiple of the period {per}")
        return lay


def _sum_sq(a: int, b: int) -> int:
    # sum of k^2 for a < k <= b
    f = lambda x: x * (x + 1) * (2 * x + 1) // 6
    return f(b) - f(a)


def _sum_lin(a: int, b: int) -> int:
    return b * (b + 1) // 2 - a * (a + 1) // 2


class NewhouseRealization(CodeRealizationSpec):
    """Window k: gap, hat interval of z0 k^2 - 2k, gap of 2k, I of per*ceil(k^2/per), gap.

    The lengths add up to the window length of :class:`NewhouseOrder`, and
    #I_k / m_k -> 1/(z0+1).
    """

    def __init__(self, order: NewhouseOrder, max_period: int):
        self.order = order
        self.zeta = order.zeta
        self.max_period = max_period
        k = 1
        while not self._valid_from(k):
            k += 1
        self.k_D = k

    def _valid_from(self, k: int) -> bool:
        # both inequalities only get easier as k grows
        z0 = self.order.z0
        return z0 * k >= 2 and self.max_period - 1 <= 2 * k + self.order.nhat_at(k)

    def layout(self, k: int, per: int) -> WindowLayout:
        if per > self.max_period:
            raise ValueError(f"period {per} exceeds the declared maximum {self.max_period}")
        z0 = self.order.z0
        lead = self.order.jhat_at(k) + k + 1
        hat_len = z0 * k * k - 2 * k
        I_start = lead + hat_len + 2 * k
        I_len = per * (-(-k * k // per))
        return WindowLayout(lead, hat_len, I_start, I_len, self.order.m(k))

    def _residue_sum(self, x: int, per: int) -> int:
        # sum_{k=1}^x ((-k^2) mod per), periodic in k with period per
        one = [(-j * j) % per for j in range(1, per + 1)]
        q, r = divmod(x, per)
        return q * sum(one) + sum(one[:r])

    def sums(self, k1: int, k2: int, per: int) -> tuple:
        lo = max(k1, self.k_D - 1)
        if k2 <= lo:
            return 0, 0
        z0 = self.order.z0
        hat = z0 * _sum_sq(lo, k2) - 2 * _sum_lin(lo, k2)
        I = _sum_sq(lo, k2) + self._residue_sum(k2, per) - self._residue_sum(lo, per)
        return hat, I


class SimpleRealization(CodeRealizationSpec):
    """User-supplied interval lengths; sums by direct summation."""

    def __init__(self, order: BaseOrder, hat_len: Callable, I_len: Callable, zeta, k_D: int = 1):
        self.order = order
        self.hat_len = hat_len
        self.I_len = I_len
        self.zeta = Fraction(zeta)
        self.k_D = k_D

    def layout(self, k: int, per: int) -> WindowLayout:
        h = int(self.hat_len(k, per))
        i = int(self.I_len(k, per))
        return WindowLayout(0, h, h, i, self.order.m(k))


# --- synthetic orbits --------------------------------------------------------

class SyntheticSpace:
    """A mixed periodic family plus perturbation radii eps_k -> 0."""

    def __init__(self, fam: PeriodicFamily, eps_k: Callable[[int], float] | None = None):
        if not fam.mixed:
            raise ValueError("synthetic space needs p-hat and zeta")
        self.fam = fam
        self.eps_k = eps_k or (lambda k: 1.0 / k)
        radii = [self.eps_k(k) for k in range(1, 64)]
        if not all(r > 0 for r in radii) or any(b > a for a, b in zip(radii, radii[1:])):
            raise ValueError("perturbation radii must be positive and non-increasing")

    @property
    def metric(self):
        return self.fam.metric


class SyntheticOrbit:
    """Orbit of a point of a coded wandering domain.

    Time n in window k (N_{k-1} <= n < N_k) sits at p-hat on the hat interval
    and during gaps, and at f^n(p^(l_k)) (phase n mod per) on I_k.
    ``displacement="stress"`` moves every point by a pseudo-random amount
    in [0, eps_k]; this is only supported for small horizons.
    """

    def __init__(self, spec: CodeRealizationSpec, space: SyntheticSpace, segments: list,
                 horizon_k: int, displacement: str = "zero", seed: int = 0):
        if displacement not in ("zero", "stress"):
            raise ValueError("displacement must be 'zero' or 'stress'")
        self.spec = spec
        self.space = space
        self.fam = space.fam
        self.order = spec.order
        self.segments = sorted(segments)
        self._seg_lo = [s[0] for s in self.segments]
        self.horizon_k = horizon_k
        self.horizon = self.order.N(horizon_k)
        self.displacement = displacement
        self.seed = seed
        self.metric = HedgehogMetric(space.metric) if displacement == "stress" else space.metric
        lo = 1
        for a, b, ell in self.segments:
            if a != lo or b < a:
                raise ValueError("code segments must tile 1..K without gaps")
            if not 0 <= ell < len(self.fam):
                raise ValueError(f"code uses anchor {ell} outside the family")
            lo = b + 1
        if lo <= horizon_k:
            raise ValueError("code does not reach the requested horizon")
        for ell in {s[2] for s in self.segments}:
            spec.check_layout(max(spec.k_D, 1), self.fam.period(ell))

    def ell(self, k: int) -> int:
        i = bisect.bisect_right(self._seg_lo, k) - 1
        return self.segments[i][2]

    def window_of(self, n: int) -> int:
        """k with N_{k-1} <= n < N_k."""
        if not 0 <= n < self.horizon:
            raise IndexError(f"time {n} outside realized horizon {self.horizon}")
        lo, hi = 1, self.horizon_k
        while lo < hi:
            mid = (lo + hi) // 2
            if self.order.N(mid) > n:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def location(self, n: int) -> dict:
        k = self.window_of(n)
        ell = self.ell(k)
        per = self.fam.period(ell)
        if k < self.spec.k_D:
            tag = "gap"
        else:
            tag = self.spec.layout(k, per).tag(n - self.order.N(k - 1))
        if tag == "I":
            base, phase, anchor = self.fam.orbit_point(ell, n % per), n % per, ell
        else:
            base, phase, anchor = self.fam.hat, 0, "hat"
        key = base
        if self.displacement == "stress":
            r = random.Random(hash((self.seed, n)) & 0xFFFFFFFF).random() * float(self.space.eps_k(k))
            if r > 0:
                key = Perturbed(base, n, r)
        return {"n": n, "k": k, "anchor": anchor, "phase": phase, "tag": tag, "key": key, "base": base}

    def window_counts(self, start: int, stop: int, T=None) -> Counter:
        if stop > self.horizon:
            raise IndexError(f"time {stop} beyond realized horizon {self.horizon}")
        if self.displacement == "stress":
            if stop - start > DIRECT_SUM_LIMIT:
                raise OverflowError("stress mode enumerates the orbit; horizon too long")
            return Counter(self.location(n)["key"] for n in range(start, stop))
        c = self._counts_before(stop)
        if start:
            c.subtract(self._counts_before(start))
            c = Counter({k: v for k, v in c.items() if v})
        return c

    def _counts_before(self, n: int) -> Counter:
        counts = Counter()
        if n <= 0:
            return counts
        kn = self.window_of(n - 1)
        per_I = Counter()
        for a, b, ell in self.segments:
            if a > kn - 1:
                break
            _, I = self.spec.sums(a - 1, min(b, kn - 1), self.fam.period(ell))
            per_I[ell] += I
        total_I = 0
        for ell, I in per_I.items():
            per = self.fam.period(ell)
            if I % per:
                raise ArithmeticError("I count not a multiple of the period")
            for ph in range(per):
                counts[self.fam.orbit_point(ell, ph)] += I // per
            total_I += I
        # partial window kn: times N_{kn-1} .. n-1
        if kn >= self.spec.k_D:
            ell = self.ell(kn)
            per = self.fam.period(ell)
            base = self.order.N(kn - 1)
            lay = self.spec.layout(kn, per)
            a = base + lay.I_start
            b = min(n, base + lay.I_start + lay.I_len)
            if b > a:
                for ph in range(per):
                    c = _count_residue(a, b, ph, per)
                    if c:
                        counts[self.fam.orbit_point(ell, ph)] += c
                        total_I += c
        counts[self.fam.hat] += n - total_I
        return Counter({k: v for k, v in counts.items() if v})

    def empirical(self, n: int) -> DiscreteMeasure:
        return DiscreteMeasure.from_counts(self.window_counts(0, n), {"time": n})

    def export_csv(self, path, start: int, stop: int):
        if stop - start > DIRECT_SUM_LIMIT:
            raise OverflowError("export range too long")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "anchor", "phase", "tag"])
            for n in range(start, stop):
                loc = self.location(n)
                w.writerow([n, loc["anchor"], loc["phase"], loc["tag"]])


def realize_synthetic_orbit(spec: CodeRealizationSpec, space: SyntheticSpace, code, horizon_k: int | None = None,
                            **kw) -> SyntheticOrbit:
    """Build the orbit for a master code (or an explicit list of (lo, hi, l) segments)."""
    if isinstance(code, MasterCode):
        if code.order is not spec.order and code.order.describe() != spec.order.describe():
            raise ValueError("code and realization use different base orders")
        segments = code.ell_segments()
        if code.blocks and code.blocks[0].k[0] < spec.k_D:
            raise ValueError(f"first block starts at k={code.blocks[0].k[0]} before k_D={spec.k_D}")
        horizon_k = code.last_index if horizon_k is None else horizon_k
    else:
        segments = list(code)
        horizon_k = segments[-1][1] if horizon_k is None else horizon_k
    return SyntheticOrbit(spec, space, segments, horizon_k, **kw)


# --- checks ------------------------------------------------------------------

def segment_residuals(spec: CodeRealizationSpec, order: BaseOrder, k1: int, k2: int, per: int) -> tuple:
    """(|sum I / sum m - zeta|, |1 - sum(I + hat) / sum m|) over k1 < k <= k2."""
    hat, I = spec.sums(k1, k2, per)
    M = order.window(k1, k2)
    return abs(Fraction(I, M) - spec.zeta), abs(1 - Fraction(I + hat, M))


def checkpoint_bound(orbit: SyntheticOrbit, block) -> dict:
    """Terms of the checkpoint estimate for a master-code block."""
    order = orbit.order
    k = list(block.k)
    r3 = r1 = Fraction(0)
    for ell in range(block.L + 1):
        a, b = segment_residuals(orbit.spec, order, k[ell], k[ell + 1], orbit.fam.period(ell))
        r3, r1 = max(r3, a), max(r1, b)
    head = Fraction(2 * order.N(k[0]), order.N(k[-1]))
    eps_max = float(orbit.space.eps_k(k[0] + 1))  # radii are non-increasing
    total = float(head) + 2 * eps_max + 2 * float(r3) + 2 * float(r1)
    return {"head": float(head), "eps": eps_max, "c3": float(r3), "c1": float(r1), "bound": total}


def verify_code_conditions(orbit: SyntheticOrbit, K: int) -> dict:
    """Residuals of the window conditions over k_D <= k <= K and containment violations."""
    spec, order, fam = orbit.spec, orbit.order, orbit.fam
    kD = spec.k_D
    if K > orbit.horizon_k:
        raise ValueError("K beyond realized horizon")
    if K < kD:
        raise ValueError("K below k_D")
    ks = list(range(kD, K + 1))
    lays = [spec.check_layout(k, fam.period(orbit.ell(k))) for k in ks]
    I = np.array([float(l.I_len) for l in lays])
    H = np.array([float(l.hat_len) for l in lays])
    M = np.array([float(order.m(k)) for k in ks])
    cI, cH, cM = (np.concatenate([[0.0], np.cumsum(v)]) for v in (I, H, M))
    # windows k1 < k <= k2 with kD - 1 <= k1 < k2 <= K, as index pairs into the cumsums
    n = len(ks)
    i1, i2 = np.triu_indices(n + 1, 1)
    sI, sH, sM = cI[i2] - cI[i1], cH[i2] - cH[i1], cM[i2] - cM[i1]
    r3 = np.abs(sI / sM - float(spec.zeta))
    r1 = np.abs(1 - (sI + sH) / sM)
    violations = 0
    checked = 0
    lo, hi = order.N(kD - 1), order.N(K)
    if hi - lo <= DIRECT_SUM_LIMIT:
        for t in range(lo, hi):
            loc = orbit.location(t)
            eps = float(orbit.space.eps_k(loc["k"]))
            if loc["tag"] == "I":
                target = fam.orbit_point(orbit.ell(loc["k"]), t % fam.period(orbit.ell(loc["k"])))
            else:
                target = fam.hat
            d = orbit.metric.distance(loc["key"], target)
            checked += 1
            if d > eps + orbit.metric.error:
                violations += 1
    return {
        "k_D": kD,
        "K": K,
        "c3_residual": float(r3.max()),
        "c1_residual": float(r1.max()),
        "c3_tail": float(r3[i1 >= n // 2].max()) if n > 1 else float(r3.max()),
        "c1_tail": float(r1[i1 >= n // 2].max()) if n > 1 else float(r1.max()),
        "containment_violations": violations,
        "containment_checked": checked,
    }
