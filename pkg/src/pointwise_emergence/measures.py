"""Finitely supported measures, orbit measures and simplex coordinates."""
from __future__ import annotations

import json
import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from .metric import ShiftMetric, TableMetric
from .shift import (PeriodicPoint, ShiftPoint, default_depth, format_word,
                    minimal_rotation, parse_word, primitive_root)

SUM_TOL = 1e-12


def _order(key):
    # deterministic ordering across heterogeneous key types
    if isinstance(key, tuple):
        return (0, len(key), key)
    return (1, 0, str(key))


class DiscreteMeasure:
    """A probability measure with finitely many atoms.

    Weights may be ``Fraction`` (exact) or ``float``.  Atoms are kept in a
    canonical order so that serialization and downstream matrices are
    reproducible.
    """

    __slots__ = ("_atoms", "meta")

    def __init__(self, atoms: Mapping | Iterable, meta: dict | None = None, normalize: bool = False):
        merged: dict = {}
        items = atoms.items() if isinstance(atoms, Mapping) else atoms
        for key, w in items:
            merged[key] = merged.get(key, 0) + w
        for key, w in merged.items():
            if w < 0:
                raise ValueError(f"negative weight {w} at atom {key!r}")
        merged = {k: w for k, w in merged.items() if w != 0}
        if not merged:
            raise ValueError("measure has no mass")
        total = sum(merged.values())
        if normalize:
            merged = {k: w / total for k, w in merged.items()}
        elif abs(float(total) - 1.0) > SUM_TOL:
            raise ValueError(f"weights sum to {float(total)!r}, not 1")
        self._atoms = dict(sorted(merged.items(), key=lambda kv: _order(kv[0])))
        self.meta = dict(meta or {})

    @classmethod
    def from_counts(cls, counts: Mapping, meta: dict | None = None) -> "DiscreteMeasure":
        n = sum(counts.values())
        if n <= 0:
            raise ValueError("empty counts")
        return cls({k: Fraction(c, n) for k, c in counts.items() if c}, meta)

    @classmethod
    def dirac(cls, key, meta=None) -> "DiscreteMeasure":
        return cls({key: Fraction(1)}, meta)

    @property
    def keys(self) -> list:
        return list(self._atoms)

    @property
    def weights(self) -> list:
        return list(self._atoms.values())

    def items(self):
        return self._atoms.items()

    def weight_array(self) -> np.ndarray:
        return np.array([float(w) for w in self._atoms.values()])

    def __getitem__(self, key):
        return self._atoms.get(key, 0)

    def __len__(self):
        return len(self._atoms)

    def __contains__(self, key):
        return key in self._atoms

    @property
    def total_weight(self):
        return sum(self._atoms.values())

    @property
    def is_exact(self) -> bool:
        return all(isinstance(w, Rational) for w in self._atoms.values())

    def combine(self, other: "DiscreteMeasure", w_self, w_other) -> "DiscreteMeasure":
        out = {k: w_self * w for k, w in self.items()}
        for k, w in other.items():
            out[k] = out.get(k, 0) + w_other * w
        return DiscreteMeasure(out)

    def support_equal(self, other, tol=0.0) -> bool:
        if set(self._atoms) != set(other._atoms):
            return False
        return all(abs(float(self[k]) - float(other[k])) <= tol for k in self._atoms)

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self._atoms == other._atoms

    def __hash__(self):
        return hash(tuple((k, float(w)) for k, w in self.items()))

    def fingerprint(self, digits: int = 15) -> tuple:
        return tuple((k, round(float(w), digits)) for k, w in self.items())

    def to_dict(self) -> dict:
        atoms = [{"key": _key_to_json(k), "weight": float(w)} for k, w in self.items()]
        return {"atoms": atoms, "meta": self.meta}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        atoms = [(_key_from_json(a["key"]), a["weight"]) for a in data["atoms"]]
        return cls(atoms, data.get("meta"))

    def __repr__(self):
        shown = ", ".join(f"{_short(k)}: {float(w):.4g}" for k, w in list(self.items())[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} atoms)"
        return f"DiscreteMeasure({{{shown}{more}}})"


def _short(key):
    if isinstance(key, tuple) and key and all(isinstance(s, int) for s in key):
        return format_word(key[:8]) + ("..." if len(key) > 8 else "")
    return repr(key)


def _key_to_json(key):
    if isinstance(key, tuple):
        return [_key_to_json(k) for k in key]
    if isinstance(key, (int, str, float)) or key is None:
        return key
    return str(key)


def _key_from_json(key):
    if isinstance(key, list):
        return tuple(_key_from_json(k) for k in key)
    return key


def empirical_measure(x, n: int, T: int | None = None) -> DiscreteMeasure:
    """delta_x^n: uniform measure on the first n orbit points."""
    return partial_empirical(x, 0, n, T)


def partial_empirical(x, n: int, m: int, T: int | None = None) -> DiscreteMeasure:
    """Uniform measure on f^j(x), n <= j < m."""
    if n < 0:
        raise ValueError("window start must be nonnegative")
    if m <= n:
        raise ValueError(f"empty window: need m > n, got n={n}, m={m}")
    if T is None:
        T = default_depth(x.m) if isinstance(x, ShiftPoint) else None
    counts = x.window_counts(n, m, T)
    return DiscreteMeasure.from_counts(counts, {"window": [n, m]})


class PeriodicFamily:
    """Anchors p^(0), p^(1), ... (periodic orbits), optional p-hat and zeta.

    Each anchor is stored as the list of keys of its orbit points in phase
    order.  ``metric`` measures distances between any of these keys.
    """

    def __init__(self, orbits: Sequence[Sequence], metric, hat=None, zeta=None,
                 labels: Sequence[str] | None = None, words: Sequence | None = None):
        if (hat is None) != (zeta is None):
            raise ValueError("p-hat and zeta must be given together")
        if zeta is not None and not 0 < zeta < 1:
            raise ValueError("zeta must lie in (0, 1)")
        self.orbits = [list(o) for o in orbits]
        if not self.orbits or any(not o for o in self.orbits):
            raise ValueError("family needs nonempty anchor orbits")
        seen = set()
        for ell, orb in enumerate(self.orbits):
            if len(set(orb)) != len(orb):
                raise ValueError(f"anchor {ell} orbit repeats a point")
            if seen.intersection(orb):
                raise ValueError(f"anchor {ell} orbit meets an earlier orbit")
            seen.update(orb)
        if hat is not None and hat in seen:
            raise ValueError("p-hat lies on an anchor orbit")
        self.metric = metric
        self.hat = hat
        self.zeta = zeta
        self.labels = list(labels) if labels else [f"p{ell}" for ell in range(len(self.orbits))]
        self.words = list(words) if words else None

    @classmethod
    def from_words(cls, words: Sequence, m: int, depth: int | None = None, hat_word=None,
                   zeta=None) -> "PeriodicFamily":
        depth = default_depth(m) if depth is None else depth
        roots = [primitive_root(parse_word(w, m)) for w in words]
        canon = [minimal_rotation(r) for r in roots]
        if len(set(canon)) != len(canon):
            raise ValueError("anchor words generate overlapping orbits")
        orbits = [PeriodicPoint(r, m).orbit_keys(depth) for r in roots]
        hat = None
        if hat_word is not None:
            hw = primitive_root(parse_word(hat_word, m))
            if len(hw) != 1:
                raise ValueError("p-hat must be a fixed point")
            if minimal_rotation(hw) in canon:
                raise ValueError("p-hat coincides with an anchor")
            hat = hw * depth
        if zeta is not None and not isinstance(zeta, float):
            zeta = Fraction(zeta)
        return cls(orbits, ShiftMetric(m, depth), hat=hat, zeta=zeta,
                   labels=[format_word(r) for r in roots], words=roots)

    @classmethod
    def from_table(cls, table, hat: bool = False, zeta=None, labels=None) -> "PeriodicFamily":
        """Fixed-point anchors in an abstract metric space.

        With ``hat=True`` the first row/column of ``table`` is p-hat and the
        remaining ones are the anchors.
        """
        D = np.asarray(table, dtype=float)
        n = len(D)
        names = list(labels) if labels else (["hat"] + [f"p{i}" for i in range(n - 1)] if hat
                                             else [f"p{i}" for i in range(n)])
        metric = TableMetric(names, D)
        anchors = names[1:] if hat else names
        if zeta is not None and not isinstance(zeta, float):
            zeta = Fraction(zeta)
        return cls([[a] for a in anchors], metric, hat=names[0] if hat else None,
                   zeta=zeta, labels=anchors)

    def __len__(self):
        return len(self.orbits)

    def period(self, ell: int) -> int:
        return len(self.orbits[ell])

    @property
    def periods(self) -> list:
        return [len(o) for o in self.orbits]

    @property
    def mixed(self) -> bool:
        return self.hat is not None

    def base_point(self, ell: int):
        return self.orbits[ell][0]

    def orbit_point(self, ell: int, phase: int):
        orb = self.orbits[ell]
        return orb[phase % len(orb)]

    def anchor_measure(self, ell: int) -> DiscreteMeasure:
        return periodic_measure(self.orbits[ell])

    def mixed_measure(self, ell: int) -> DiscreteMeasure:
        mu = self.anchor_measure(ell)
        if not self.mixed:
            return mu
        return DiscreteMeasure.dirac(self.hat).combine(mu, 1 - self.zeta, self.zeta)

    def subfamily(self, count: int) -> "PeriodicFamily":
        return PeriodicFamily(self.orbits[:count], self.metric, self.hat, self.zeta,
                              self.labels[:count], self.words[:count] if self.words else None)

    def all_keys(self) -> list:
        keys = [k for orb in self.orbits for k in orb]
        if self.hat is not None:
            keys.append(self.hat)
        return keys

    def describe(self) -> dict:
        return {"labels": self.labels, "periods": self.periods,
                "hat": _key_to_json(self.hat), "zeta": None if self.zeta is None else float(self.zeta),
                "metric": self.metric.describe()}


def periodic_measure(p) -> DiscreteMeasure:
    """Uniform measure on a periodic orbit.

    Accepts a :class:`PeriodicPoint` (keys at the default depth) or an
    explicit list of orbit keys.
    """
    if isinstance(p, PeriodicPoint):
        keys = p.orbit_keys(default_depth(p.m))
    else:
        keys = list(p)
    per = len(keys)
    return DiscreteMeasure({k: Fraction(1, per) for k in keys}, {"period": per})


def periodic_point_measure(p: PeriodicPoint, T: int) -> DiscreteMeasure:
    return periodic_measure(p.orbit_keys(T))


def _check_simplex(t, tol=SUM_TOL):
    if any(v < 0 for v in t):
        raise ValueError(f"negative simplex coordinate in {t}")
    if abs(float(sum(t)) - 1.0) > tol:
        raise ValueError(f"coordinates sum to {float(sum(t))}, not 1")


def simplex_measure(t: Sequence, fam: PeriodicFamily) -> DiscreteMeasure:
    """mu_t = sum_l t_l * nu-bar^(l) (plain mu^(l) for unmixed families)."""
    t = list(t)
    if len(t) > len(fam):
        raise ValueError(f"{len(t)} coordinates but only {len(fam)} anchors")
    _check_simplex(t)
    atoms: dict = {}
    scale = fam.zeta if fam.mixed else 1
    for ell, w in enumerate(t):
        if w == 0:
            continue
        orb = fam.orbits[ell]
        share = w * scale / len(orb) if isinstance(w, float) else w * scale * Fraction(1, len(orb))
        for k in orb:
            atoms[k] = atoms.get(k, 0) + share
    if fam.mixed:
        atoms[fam.hat] = atoms.get(fam.hat, 0) + (1 - fam.zeta) * sum(t)
    return DiscreteMeasure(atoms, {"t": [float(v) for v in t]})


# --- simplex coordinates -------------------------------------------------

def eta_map(T: Sequence) -> list:
    """[0,1]^L -> A_L, surjective and L(L+1)-Lipschitz."""
    T = list(T)
    L = len(T)
    if any(v < 0 or v > 1 for v in T):
        raise ValueError("cube coordinates must lie in [0, 1]")
    out = [None] * (L + 1)
    tail = 1
    for ell in range(L, 0, -1):
        out[ell] = T[ell - 1] * tail
        tail = tail * (1 - T[ell - 1])
    out[0] = tail
    return out


def eta_inverse(t: Sequence) -> list:
    """Right inverse of eta: T_l = t_l / (t_0 + ... + t_l), 0 where undefined."""
    t = list(t)
    out = []
    S = t[0]
    for v in t[1:]:
        S = S + v
        out.append(v / S if S else 0 * v)
    return out


def iota_map(T: Sequence, pivot: int) -> list:
    """B_L -> A_L; the pivot coordinate carries the slack 1 - sum(T)."""
    T = list(T)
    L = len(T)
    if not 0 <= pivot <= L:
        raise ValueError("pivot out of range")
    if any(v < 0 for v in T):
        raise ValueError("coordinates must be nonnegative")
    slack = 1 - sum(T)
    if slack < -SUM_TOL:
        raise ValueError("point outside B_L: coordinates sum above 1")
    slack = max(slack, 0 * slack)
    return T[:pivot] + [slack] + T[pivot:]


def iota_inverse(t: Sequence, pivot: int) -> list:
    t = list(t)
    return t[:pivot] + t[pivot + 1:]


def tbar(M: Sequence[int]) -> list:
    M = list(M)
    if any(v < 1 for v in M):
        raise ValueError("entries must be positive integers")
    S = sum(M)
    return [Fraction(v, S) for v in M]


def Tbar(M: Sequence[int]) -> list:
    M = list(M)
    if any(v < 1 for v in M):
        raise ValueError("entries must be positive integers")
    out = []
    S = M[0]
    for v in M[1:]:
        S += v
        out.append(Fraction(v, S))
    return out


def Mbar(k: Sequence[int], order) -> list:
    """Window sums (N_{k(l)} - N_{k(l-1)}) for l = 0..L; ``k`` lists k(-1)..k(L)."""
    k = list(k)
    if len(k) < 2:
        raise ValueError("need at least k(-1) and k(0)")
    if any(b <= a for a, b in zip(k, k[1:])):
        raise ValueError(f"indices must be strictly increasing: {k}")
    if k[0] < 0:
        raise ValueError("indices must be nonnegative")
    N = [order.N(v) for v in k]
    return [b - a for a, b in zip(N, N[1:])]


def mbar(n: Sequence[int], periods: Sequence[int]) -> list:
    return [a * p for a, p in zip(n, periods)]


# --- the net a_L -----------------------------------------------------------

def lattice_covering_radius(L: int, D: int) -> float:
    """Euclidean covering radius of {j/D : sum j = D} inside A_L."""
    a = (L + 1) // 2
    return math.sqrt(a * (L + 1 - a) / (L + 1)) / D


def nearest_lattice_point(t: Sequence[float], D: int) -> tuple:
    """Largest-remainder rounding of D*t, the nearest point of the lattice."""
    x = [D * float(v) for v in t]
    base = [math.floor(v) for v in x]
    rem = D - sum(base)
    order = sorted(range(len(x)), key=lambda i: (-(x[i] - base[i]), i))
    for i in order[:rem]:
        base[i] += 1
    return tuple(Fraction(b, D) for b in base)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def simplex_grid(L: int, r: float) -> list:
    """Finite r-net of A_L, lexicographically sorted, exact rational points."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if L < 1:
        raise ValueError("L must be at least 1")
    # the barycenter alone covers once r reaches the circumradius
    if math.sqrt(L / (L + 1)) <= r:
        return [tuple(Fraction(1, L + 1) for _ in range(L + 1))]
    D = 1
    while lattice_covering_radius(L, D) > r:
        D += 1
    return lattice_grid(L, D)


def lattice_grid(L: int, D: int) -> list:
    """All points of A_L with coordinates in (1/D)Z, sorted."""
    if L < 1 or D < 1:
        raise ValueError("need L >= 1 and D >= 1")
    return sorted(tuple(Fraction(j, D) for j in c) for c in _compositions(D, L + 1))


def grid_denominator(net: Sequence[Sequence[Fraction]]) -> int:
    return math.lcm(*(Fraction(v).denominator for t in net for v in t))
