"""Combinatorial codes: base orders, index searches, master and shift codes.

All block conditions are decided in exact integer/rational arithmetic.
The block conditions force geometric growth of the cumulative times, so
indices quickly exceed machine integers; base orders therefore provide
closed-form cumulative sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .measures import Mbar, Tbar, eta_inverse, eta_map, mbar, simplex_grid, tbar


class ScheduleError(RuntimeError):
    pass


# --- base orders -----------------------------------------------------------

class BaseOrder:
    """Window lengths m_1, m_2, ... and cumulative times N_k = m_1 + ... + m_k."""

    def m(self, k: int) -> int:
        raise NotImplementedError

    def N(self, k: int) -> int:
        raise NotImplementedError

    def N_reference(self, k: int) -> int:
        """Second, independent route to N_k used by block re-verification."""
        return sum(self.m(j) for j in range(1, k + 1))

    def window(self, k1: int, k2: int) -> int:
        return self.N(k2) - self.N(k1)

    def describe(self) -> dict:
        return {"type": type(self).__name__}


class SequenceOrder(BaseOrder):
    """Arbitrary m_k from a callable; cumulative sums by caching (small k only)."""

    def __init__(self, func: Callable[[int], int], horizon: int = 10**6):
        self.func = func
        self.horizon = horizon
        self._cum = [0]

    def m(self, k: int) -> int:
        if k < 1:
            raise ValueError("windows are indexed from 1")
        v = int(self.func(k))
        if v < 1:
            raise ValueError(f"m_{k} = {v} is not a positive integer")
        return v

    def N(self, k: int) -> int:
        if k > self.horizon:
            raise ScheduleError(f"index {k} beyond the horizon {self.horizon} of this order")
        while len(self._cum) <= k:
            self._cum.append(self._cum[-1] + self.m(len(self._cum)))
        return self._cum[k]


def _lagrange_eval(ys: Sequence[int], x: int) -> int:
    # value at x of the polynomial through (i, ys[i]), i = 0..d
    d = len(ys) - 1
    if 0 <= x <= d:
        return ys[x]
    total = Fraction(0)
    for i, y in enumerate(ys):
        num = 1
        den = 1
        for j in range(d + 1):
            if j != i:
                num *= x - j
                den *= i - j
        total += Fraction(y * num, den)
    if total.denominator != 1:
        raise ArithmeticError("non-integral cumulative sum")
    return total.numerator


@lru_cache(maxsize=None)
def _bernoulli(n: int) -> Fraction:
    # B_n with the B_1 = +1/2 convention
    B = [Fraction(1)]
    for mm in range(1, n + 1):
        B.append(1 - sum(math.comb(mm, j) * B[j] / (mm - j + 1) for j in range(mm)))
    return B[n]


def _faulhaber_coeffs(p: int) -> list:
    """Coefficients (in k^0, k^1, ...) of the polynomial sum_{j=1}^k j**p."""
    out = [Fraction(0)] * (p + 2)
    for i in range(p + 1):
        out[p + 1 - i] += Fraction(math.comb(p + 1, i)) * _bernoulli(i) / (p + 1)
    return out


class PolynomialOrder(BaseOrder):
    """m_k = c_0 + c_1 k + c_2 k^2 + ... with integer coefficients."""

    def __init__(self, coeffs: Sequence[int]):
        self.coeffs = [int(c) for c in coeffs]
        if not self.coeffs or self.coeffs[-1] <= 0:
            raise ValueError("leading coefficient must be positive")
        d = len(self.coeffs) - 1
        for j in range(1, 64):
            if self.m(j, check=False) < 1:
                raise ValueError(f"m_{j} is not positive")
        # N_k as an integer polynomial over a common denominator
        poly = [Fraction(0)] * (d + 2)
        for i, c in enumerate(self.coeffs):
            for j, a in enumerate(_faulhaber_coeffs(i)):
                poly[j] += c * a
        self._den = math.lcm(*(a.denominator for a in poly))
        self._num = [int(a * self._den) for a in poly]
        self._nodes = [0]
        for j in range(1, d + 2):
            self._nodes.append(self._nodes[-1] + self.m(j, check=False))

    def m(self, k: int, check: bool = True) -> int:
        if check and k < 1:
            raise ValueError("windows are indexed from 1")
        return sum(c * k ** i for i, c in enumerate(self.coeffs))

    def N(self, k: int) -> int:
        if k < 0:
            raise ValueError("negative index")
        acc = 0
        for a in reversed(self._num):
            acc = acc * k + a
        q, r = divmod(acc, self._den)
        if r:
            raise ArithmeticError("non-integral cumulative sum")
        return q

    def N_reference(self, k: int) -> int:
        # Lagrange interpolation through the first partial sums
        return _lagrange_eval(self._nodes, k)

    def describe(self) -> dict:
        return {"type": "polynomial", "coeffs": self.coeffs}


class ConstantOrder(PolynomialOrder):
    def __init__(self, c: int = 1):
        super().__init__([c])

    def describe(self) -> dict:
        return {"type": "constant", "c": self.coeffs[0]}


class GeometricOrder(BaseOrder):
    """m_k = base**k; not moderate."""

    def __init__(self, base: int = 2):
        self.base = base

    def m(self, k: int) -> int:
        return self.base ** k

    def N(self, k: int) -> int:
        return (self.base ** (k + 1) - self.base) // (self.base - 1)

    def describe(self) -> dict:
        return {"type": "geometric", "base": self.base}


def newhouse_mk(z0: int, jhat: Callable[[int], int], nhat: Callable[[int], int], k: int) -> int:
    """Window length (z0+1)k^2 + 3k + 1 + jhat_k + nhat_{k+1}.

    ``nhat(k)`` supplies the value n-hat_{k+1} used by window k.
    """
    j, n = jhat(k), nhat(k)
    if j < 1 or n < 1:
        raise ValueError("jhat and nhat must be positive integers")
    return (z0 + 1) * k * k + 3 * k + 1 + j + n


def newhouse_zeta(z0: int) -> Fraction:
    return Fraction(1, z0 + 1)


def newhouse_period(kappa: int) -> int:
    return kappa + 1


def newhouse_anchor_word(kappa: int) -> str:
    return "1" + "2" * kappa


class NewhouseOrder(PolynomialOrder):
    """The window lengths with affine jhat_k = ja*k + jb and nhat_{k+1} = na*k + nb."""

    def __init__(self, z0: int = 1, jhat: tuple = (1, 0), nhat: tuple = (1, 0)):
        if z0 < 1:
            raise ValueError("z0 must be a positive integer")
        (ja, jb), (na, nb) = jhat, nhat
        if ja < 0 or na < 0 or ja + jb < 1 or na + nb < 1:
            raise ValueError("jhat and nhat must be positive for k >= 1")
        self.z0 = z0
        self.jhat = (ja, jb)
        self.nhat = (na, nb)
        super().__init__([1 + jb + nb, 3 + ja + na, z0 + 1])

    def jhat_at(self, k: int) -> int:
        return self.jhat[0] * k + self.jhat[1]

    def nhat_at(self, k: int) -> int:
        return self.nhat[0] * k + self.nhat[1]

    @property
    def zeta(self) -> Fraction:
        return newhouse_zeta(self.z0)

    def describe(self) -> dict:
        return {"type": "newhouse", "z0": self.z0, "jhat": list(self.jhat), "nhat": list(self.nhat)}


def order_from_dict(data: dict) -> BaseOrder:
    kind = data.get("type", "newhouse")
    if kind == "newhouse":
        return NewhouseOrder(data.get("z0", 1), tuple(data.get("jhat", (1, 0))), tuple(data.get("nhat", (1, 0))))
    if kind == "polynomial":
        return PolynomialOrder(data["coeffs"])
    if kind == "constant":
        return ConstantOrder(data.get("c", 1))
    if kind == "geometric":
        return GeometricOrder(data.get("base", 2))
    raise ValueError(f"unknown base order type {kind!r}")


def moderate_check(order: BaseOrder, K: int, decay: float = 0.9) -> dict:
    """Finite-horizon look at m_k / N_k over k in [K/2, K].

    A moderate order has m_k/N_k -> 0; polynomial orders decay like 1/k, so
    the ratio roughly halves across the window.  The order is flagged when
    the ratio at K is not below ``decay`` times the ratio at K/2.
    """
    if K < 2:
        raise ValueError("horizon must be at least 2")
    lo = max(1, K // 2)
    ratios = [Fraction(order.m(k), order.N(k)) for k in range(lo, K + 1)]
    first, last = ratios[0], ratios[-1]
    increasing = any(b > a for a, b in zip(ratios, ratios[1:]))
    flagged = increasing or last >= decay * first
    return {
        "window": [lo, K],
        "max_ratio": float(max(ratios)),
        "ratio_at_K": float(last),
        "decay_factor": float(last / first),
        "trend": "non-decreasing" if increasing or last >= first else "decreasing",
        "moderate": not flagged,
    }


# --- index searches ----------------------------------------------------------

def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _step_bound(eps: Fraction, L: int) -> Fraction:
    # rational s <= eps / sqrt(L)
    scale = 10 ** 12
    root = math.isqrt(L * scale * scale) + 1
    return eps * scale / root


def _first_true(pred: Callable[[int], bool], lo: int, limit: int | None = None) -> int:
    """Smallest k >= lo with pred(k), assuming pred is monotone false->true."""
    if pred(lo):
        return lo
    step = 1
    bad = lo
    hi = lo + 1
    while not pred(hi):
        bad = hi
        step *= 2
        hi = lo + step
        if limit is not None and hi > limit:
            raise ScheduleError(f"search exceeded index limit {limit}")
    while hi - bad > 1:
        mid = (bad + hi) // 2
        if pred(mid):
            hi = mid
        else:
            bad = mid
    return hi


def find_k_for_T(order: BaseOrder, T: Sequence, eps, c_tilde=0, k_prev: int = 1,
                 max_attempts: int = 64, limit: int | None = None) -> tuple:
    """Increasing indices k(-1) < ... < k(L) with |Tbar(Mbar(k)) - T| <= eps.

    Follows the constructive argument: pick k(0) > c_tilde beyond which
    every single window is small relative to the running total, then extend
    each k(l) until the running ratio first comes within eps/sqrt(L) of T_l.
    """
    T = [_as_fraction(v) for v in T]
    L = len(T)
    if L < 1:
        raise ValueError("need at least one coordinate")
    if any(v < 0 or v > 1 for v in T):
        raise ValueError("T must lie in [0,1]^L")
    eps = _as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if k_prev < 1:
        raise ValueError("k(-1) must be a positive integer")
    a = k_prev
    Na = order.N(a)
    step = _step_bound(eps, L)
    start = max(a + 1, math.floor(_as_fraction(c_tilde)) + 1)

    def small_step(k):
        # m_{k+1} / N_{a,k+1} <= step
        return order.m(k + 1) * step.denominator <= step.numerator * (order.N(k + 1) - Na)

    for _ in range(max_attempts):
        k0 = _first_true(small_step, start, limit)
        ks = [a, k0]
        for ell in range(1, L + 1):
            b = ks[-1]
            Nb = order.N(b)
            target = T[ell - 1] - step

            def reached(k, Nb=Nb, target=target):
                Nk = order.N(k)
                return (Nk - Nb) * target.denominator >= target.numerator * (Nk - Na)

            ks.append(_first_true(reached, b + 1, limit))
        got = Tbar(Mbar(ks, order))
        err2 = sum((g - t) ** 2 for g, t in zip(got, T))
        if err2 <= eps * eps:
            return tuple(ks)
        start = 2 * k0
    raise ScheduleError(f"no admissible indices after {max_attempts} attempts; "
                        "the order is not moderate enough at this horizon")


def find_k_for_t(order: BaseOrder, t: Sequence, eps, c_tilde=0, k_prev: int = 1, **kw) -> tuple:
    """Increasing indices with |tbar(Mbar(k)) - t| <= eps, through eta."""
    t = [_as_fraction(v) for v in t]
    L = len(t) - 1
    if L < 1:
        raise ValueError("t needs at least two coordinates")
    if any(v < 0 for v in t) or sum(t) != 1:
        raise ValueError("t must lie in A_L")
    eps = _as_fraction(eps)
    T = eta_inverse(t)
    ks = find_k_for_T(order, T, eps / (L * (L + 1)), c_tilde, k_prev, **kw)
    M = Mbar(ks, order)
    got = tbar(M)
    if eta_map(Tbar(M)) != got:
        raise ArithmeticError("eta o Tbar differs from tbar")
    if sum((g - v) ** 2 for g, v in zip(got, t)) > eps * eps:
        raise ScheduleError("simplex postcondition failed")
    return ks


def select_n_for_t(t: Sequence, periods, eps, c_tilde=1, D0: int = 1, max_doublings: int = 4096) -> tuple:
    """Repetition counts n with n(l) >= c_tilde and |tbar(n(l) per(l)) - t| <= eps."""
    if hasattr(periods, "periods"):
        periods = periods.periods
    t = [_as_fraction(v) for v in t]
    periods = list(periods)[:len(t)]
    if len(periods) < len(t):
        raise ValueError("not enough anchors for t")
    eps = _as_fraction(eps)
    floor_n = max(1, math.ceil(_as_fraction(c_tilde)))
    D = max(1, int(D0))
    for _ in range(max_doublings):
        n = tuple(max(floor_n, math.floor(D * v / p + Fraction(1, 2))) for v, p in zip(t, periods))
        got = tbar(mbar(n, periods))
        if sum((g - v) ** 2 for g, v in zip(got, t)) <= eps * eps:
            return n
        D *= 2
    raise ScheduleError("could not approximate t")


# --- master code (wandering domains) ---------------------------------------

def default_eps_tilde(L: int) -> Fraction:
    return Fraction(1, 2 ** L)


def _eps_values(eps_tilde, L_max: int) -> dict:
    if callable(eps_tilde):
        vals = {L: _as_fraction(eps_tilde(L)) for L in range(1, L_max + 1)}
    elif isinstance(eps_tilde, dict):
        vals = {int(L): _as_fraction(v) for L, v in eps_tilde.items()}
    else:
        vals = {L: _as_fraction(v) for L, v in zip(range(1, L_max + 1), eps_tilde)}
    for L in range(1, L_max + 1):
        if L not in vals:
            raise ValueError(f"missing eps-tilde for L={L}")
        if not 0 < vals[L] < 2:
            raise ValueError(f"eps-tilde_{L} = {vals[L]} must lie in (0, 2)")
    return vals


def _nets(nets, eps: dict, L_max: int) -> dict:
    out = {}
    for L in range(1, L_max + 1):
        if nets is None:
            net = simplex_grid(L, float(eps[L]))
        elif callable(nets):
            net = nets(L)
        else:
            net = nets[L]
        out[L] = sorted(tuple(_as_fraction(v) for v in t) for t in net)
    return out


def _cond(lhs, rhs, ok) -> dict:
    return {"lhs": float(lhs), "rhs": float(rhs), "ok": bool(ok)}


@dataclass
class MasterBlock:
    L: int
    t: tuple
    k: tuple  # k(-1), k(0), ..., k(L)
    conditions: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"L": self.L, "t": [str(v) for v in self.t], "indices": list(self.k),
                "conditions": self.conditions}


@dataclass
class MasterCode:
    order: BaseOrder
    blocks: list
    eps_tilde: dict
    first_index: int = 1

    def ell_segments(self) -> list:
        """(k_lo, k_hi, l): l_k = l for k_lo <= k <= k_hi."""
        segs = []
        if self.blocks and self.blocks[0].k[0] >= 1:
            segs.append((1, self.blocks[0].k[0], 0))
        for b in self.blocks:
            for ell in range(b.L + 1):
                segs.append((b.k[ell] + 1, b.k[ell + 1], ell))
        return segs

    def ell(self, k: int) -> int:
        for lo, hi, ell in self.ell_segments():
            if lo <= k <= hi:
                return ell
        raise IndexError(f"k={k} beyond the constructed prefix")

    @property
    def last_index(self) -> int:
        return self.blocks[-1].k[-1]

    def checkpoints(self) -> list:
        return [self.order.N(b.k[-1]) for b in self.blocks]

    def verify(self) -> list:
        return verify_master_blocks(self)

    def to_dict(self) -> dict:
        return {"kind": "master", "order": self.order.describe(),
                "eps_tilde": {str(L): str(v) for L, v in sorted(self.eps_tilde.items())},
                "blocks": [b.to_dict() for b in self.blocks]}


def _master_conditions(order, L, t, ks, eps) -> dict:
    Nprev, NL = order.N(ks[0]), order.N(ks[-1])
    got = tbar(Mbar(ks, order))
    dist = math.sqrt(sum(float(g - v) ** 2 for g, v in zip(got, t)))
    okA = 2 * Nprev < eps * NL
    okB = sum((g - v) ** 2 for g, v in zip(got, t)) <= (eps / (L + 1)) ** 2
    return {"A": _cond(Fraction(2 * Nprev, NL), eps, okA),
            "B": _cond(dist, eps / (L + 1), okB)}


def build_master_code(order: BaseOrder, eps_tilde=default_eps_tilde, nets=None, L_max: int = 1,
                      first_index: int = 1) -> MasterCode:
    """Blocks k_{L,t} in the lexicographic order of (L, t), chained end to start."""
    if L_max < 1:
        raise ValueError("L_max must be at least 1")
    eps = _eps_values(eps_tilde, L_max)
    grids = _nets(nets, eps, L_max)
    blocks = []
    prev = first_index
    for L in range(1, L_max + 1):
        e = eps[L]
        for t in grids[L]:
            c = 2 * Fraction(prev) / e
            while True:
                ks = find_k_for_t(order, t, e / (L + 1), c, prev)
                if 2 * order.N(prev) < e * order.N(ks[-1]):
                    break
                c *= 2
            blocks.append(MasterBlock(L, t, ks, _master_conditions(order, L, t, ks, e)))
            prev = ks[-1]
    return MasterCode(order, blocks, eps, first_index)


def verify_master_blocks(code: MasterCode) -> list:
    """Independent re-check of every block in integer arithmetic; returns violations."""
    order = code.order
    bad = []
    prev_key = None
    for i, b in enumerate(code.blocks):
        L, k = b.L, list(b.k)
        e = code.eps_tilde[L]
        key = (L, tuple(b.t))
        if prev_key is not None and key <= prev_key:
            bad.append((i, "order"))
        prev_key = key
        if len(k) != L + 2 or any(y <= x for x, y in zip(k, k[1:])):
            bad.append((i, "indices"))
            continue
        if i > 0 and k[0] != code.blocks[i - 1].k[-1]:
            bad.append((i, "chain"))
        N = [order.N_reference(v) for v in k]
        if not 2 * N[0] * e.denominator < e.numerator * N[-1]:
            bad.append((i, "A"))
        M = [y - x for x, y in zip(N, N[1:])]
        S = sum(M)
        D = math.lcm(*(v.denominator for v in b.t))
        p = [v.numerator * (D // v.denominator) for v in b.t]
        lhs = (L + 1) ** 2 * sum((Ml * D - pl * S) ** 2 for Ml, pl in zip(M, p)) * e.denominator ** 2
        rhs = e.numerator ** 2 * S ** 2 * D ** 2
        if not lhs <= rhs:
            bad.append((i, "B"))
        if not 2 * k[0] * e.denominator < e.numerator * k[1]:
            bad.append((i, "k0"))
    return bad


# --- shift code -------------------------------------------------------------

@dataclass
class ShiftBlock:
    L: int
    t: tuple
    n: tuple
    s: int
    prev: int
    checkpoint: int
    conditions: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"L": self.L, "t": [str(v) for v in self.t], "n": list(self.n), "s": self.s,
                "checkpoint": self.checkpoint, "conditions": self.conditions}


@dataclass
class ShiftCode:
    periods: list
    blocks: list
    eps_tilde: dict
    words: list | None = None

    def pairs(self) -> list:
        return [(ell, nl) for b in self.blocks for ell, nl in enumerate(b.n)]

    def checkpoints(self) -> list:
        return [b.checkpoint for b in self.blocks]

    @property
    def length(self) -> int:
        return self.blocks[-1].checkpoint if self.blocks else 0

    def verify(self) -> list:
        return verify_shift_blocks(self)

    def to_dict(self) -> dict:
        out = {"kind": "shift", "periods": self.periods,
               "eps_tilde": {str(L): str(v) for L, v in sorted(self.eps_tilde.items())},
               "blocks": [b.to_dict() for b in self.blocks]}
        if self.words is not None:
            out["words"] = ["".join(map(str, w)) if max(w) <= 9 else ",".join(map(str, w)) for w in self.words]
        return out


def _shift_conditions(L, t, n, periods, prev, eps) -> dict:
    s = sum(a * p for a, p in zip(n, periods))
    lhsA = Fraction(prev, prev + s) + Fraction(2 * (L + 1), s)
    got = tbar(mbar(n, periods))
    err2 = sum((g - v) ** 2 for g, v in zip(got, t))
    return {"A": _cond(lhsA, eps, lhsA < eps),
            "B": _cond(math.sqrt(float(err2)), eps / (L + 1), err2 <= (eps / (L + 1)) ** 2)}


def build_shift_code(fam, eps_tilde=default_eps_tilde, nets=None, L_max: int = 1,
                     c_tilde=1) -> ShiftCode:
    """Blocks n_{L,t} in lexicographic order, each long enough to dominate the past."""
    periods = list(fam.periods if hasattr(fam, "periods") else fam)
    if len(periods) < L_max + 1:
        raise ValueError(f"need {L_max + 1} anchors, family has {len(periods)}")
    eps = _eps_values(eps_tilde, L_max)
    grids = _nets(nets, eps, L_max)
    blocks = []
    total = 0
    for L in range(1, L_max + 1):
        e = eps[L]
        per = periods[:L + 1]
        # s must exceed both total*(1-e)/e and 2(L+1)/e; s is about D
        D = max(1, math.ceil(total * (1 - e) / e), math.ceil(2 * (L + 1) / e))
        for t in grids[L]:
            while True:
                n = select_n_for_t(t, per, e / (L + 1), c_tilde, D)
                s = sum(a * p for a, p in zip(n, per))
                if Fraction(total, total + s) + Fraction(2 * (L + 1), s) < e:
                    break
                D *= 2
            cond = _shift_conditions(L, t, n, per, total, e)
            blocks.append(ShiftBlock(L, t, n, s, total, total + s, cond))
            total += s
            D = max(1, math.ceil(total * (1 - e) / e))
    words = getattr(fam, "words", None)
    return ShiftCode(periods, blocks, eps, words)


def verify_shift_blocks(code: ShiftCode) -> list:
    bad = []
    total = 0
    prev_key = None
    for i, b in enumerate(code.blocks):
        L = b.L
        e = code.eps_tilde[L]
        key = (L, tuple(b.t))
        if prev_key is not None and key <= prev_key:
            bad.append((i, "order"))
        prev_key = key
        per = code.periods[:L + 1]
        if len(b.n) != L + 1 or min(b.n) < 1:
            bad.append((i, "n"))
            continue
        s = 0
        for a, p in zip(b.n, per):
            s += a * p
        if s != b.s:
            bad.append((i, "s"))
        if b.prev != total or b.checkpoint != total + s:
            bad.append((i, "checkpoint"))
        # prev/(prev+s) + 2(L+1)/s < e, cleared of denominators
        if not (total * s + 2 * (L + 1) * (total + s)) * e.denominator < e.numerator * (total + s) * s:
            bad.append((i, "A"))
        M = [a * p for a, p in zip(b.n, per)]
        D = math.lcm(*(v.denominator for v in b.t))
        pnum = [v.numerator * (D // v.denominator) for v in b.t]
        lhs = (L + 1) ** 2 * sum((Ml * D - pl * s) ** 2 for Ml, pl in zip(M, pnum)) * e.denominator ** 2
        if not lhs <= e.numerator ** 2 * s ** 2 * D ** 2:
            bad.append((i, "B"))
        total += s
    return bad


def code_from_dict(data: dict, order: BaseOrder | None = None):
    eps = {int(L): Fraction(v) for L, v in data["eps_tilde"].items()}
    if data["kind"] == "master":
        order = order or order_from_dict(data["order"])
        blocks = [MasterBlock(b["L"], tuple(Fraction(v) for v in b["t"]), tuple(b["indices"]),
                              b.get("conditions", {})) for b in data["blocks"]]
        first = blocks[0].k[0] if blocks else 1
        return MasterCode(order, blocks, eps, first)
    if data["kind"] == "shift":
        from .shift import parse_word
        blocks = [ShiftBlock(b["L"], tuple(Fraction(v) for v in b["t"]), tuple(b["n"]), b["s"],
                             b["checkpoint"] - b["s"], b["checkpoint"], b.get("conditions", {}))
                  for b in data["blocks"]]
        words = [parse_word(w) for w in data["words"]] if data.get("words") else None
        return ShiftCode(list(data["periods"]), blocks, eps, words)
    raise ValueError(f"unknown code kind {data.get('kind')!r}")
