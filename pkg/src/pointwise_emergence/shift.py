"""Points of the one-sided full shift on {1, ..., m}^N.

Symbols are 1-based.  A point is a deterministic symbol generator; every
metric or measure computation reads it only through a finite prefix of
length ``T`` (the truncation depth), which perturbs distances by at most
``m ** (1 - T)``.
"""
from __future__ import annotations

import bisect
import math
from collections import Counter
from fractions import Fraction
from typing import Iterable, Sequence

Word = tuple


class AlphabetMismatch(ValueError):
    pass


class HorizonError(IndexError):
    """Raised when a finite-horizon point is read past its realized prefix."""


def default_depth(m: int) -> int:
    """Smallest depth with metric tail error m**(1-T) <= 1e-12."""
    if m < 2:
        raise ValueError("alphabet size must be at least 2")
    return 1 + math.ceil(12 / math.log10(m))


def truncation_error(m: int, T: int) -> float:
    return float(m) ** (1 - T)


def parse_word(text, m: int | None = None) -> Word:
    """Parse ``"1121"`` or ``"1,1,2,1"`` (or an iterable of ints) into a word."""
    if isinstance(text, str):
        text = text.strip()
        if "," in text:
            symbols = tuple(int(s) for s in text.split(",") if s.strip())
        else:
            symbols = tuple(int(c) for c in text)
    else:
        symbols = tuple(int(s) for s in text)
    if not symbols:
        raise ValueError("empty word")
    if min(symbols) < 1 or (m is not None and max(symbols) > m):
        raise ValueError(f"word {symbols} has symbols outside 1..{m}")
    return symbols


def format_word(word: Sequence[int]) -> str:
    if max(word) <= 9:
        return "".join(str(s) for s in word)
    return ",".join(str(s) for s in word)


def primitive_root(word: Sequence[int]) -> Word:
    word = tuple(word)
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word == word[:p] * (n // p):
            return word[:p]
    return word


def minimal_rotation(word: Sequence[int]) -> Word:
    word = tuple(word)
    return min(word[i:] + word[:i] for i in range(len(word)))


def _tile(word: Word, phase: int, T: int) -> Word:
    p = len(word)
    reps = (phase + T) // p + 1
    return (word * reps)[phase:phase + T]


class ShiftPoint:
    """Base class; subclasses implement ``symbol`` and ``shift``."""

    kind = "abstract"

    def __init__(self, m: int):
        if m < 2:
            raise ValueError("alphabet size must be at least 2")
        self.m = m

    def symbol(self, j: int) -> int:
        raise NotImplementedError

    def shift(self, n: int) -> "ShiftPoint":
        raise NotImplementedError

    def segment(self, start: int, length: int) -> Word:
        return tuple(self.symbol(start + i) for i in range(length))

    def prefix(self, T: int) -> Word:
        return self.segment(0, T)

    def window_counts(self, start: int, stop: int, T: int) -> Counter:
        """Multiplicities of the depth-T prefixes of f^j(x), start <= j < stop."""
        counts = Counter()
        if stop <= start:
            return counts
        seg = self.segment(start, stop - start + T - 1)
        for i in range(stop - start):
            counts[seg[i:i + T]] += 1
        return counts

    def __repr__(self):
        return f"{type(self).__name__}(m={self.m}, prefix={format_word(self.prefix(12))}...)"


class PeriodicPoint(ShiftPoint):
    kind = "periodic"

    def __init__(self, word: Sequence[int], m: int, phase: int = 0):
        super().__init__(m)
        word = tuple(word)
        if not word:
            raise ValueError("periodic point needs a nonempty word")
        if min(word) < 1 or max(word) > m:
            raise ValueError(f"word {word} has symbols outside 1..{m}")
        root = primitive_root(word)
        phase %= len(root)
        self.word = root[phase:] + root[:phase]
        self.period = len(root)

    def symbol(self, j: int) -> int:
        return self.word[j % self.period]

    def segment(self, start: int, length: int) -> Word:
        return _tile(self.word, start % self.period, length)

    def shift(self, n: int) -> "PeriodicPoint":
        return PeriodicPoint(self.word, self.m, phase=n)

    def orbit_keys(self, T: int) -> list:
        return [_tile(self.word, ph, T) for ph in range(self.period)]

    def window_counts(self, start: int, stop: int, T: int) -> Counter:
        counts = Counter()
        p = self.period
        for ph in range(p):
            # number of j in [start, stop) with j = ph (mod p)
            c = _count_residue(start, stop, ph, p)
            if c:
                counts[_tile(self.word, ph, T)] += c
        return counts

    def __eq__(self, other):
        return isinstance(other, PeriodicPoint) and (self.m, self.word) == (other.m, other.word)

    def __hash__(self):
        return hash(("periodic", self.m, self.word))

    def __repr__(self):
        return f"PeriodicPoint({format_word(self.word)!r}, m={self.m})"


def _count_residue(start: int, stop: int, r: int, p: int) -> int:
    if stop <= start:
        return 0
    return (stop - 1 - r) // p - (start - 1 - r) // p


class PaddedPoint(ShiftPoint):
    """A finite prefix followed by a constant symbol forever."""

    kind = "finite-prefix-padded"

    def __init__(self, prefix: Sequence[int], m: int, pad: int = 1):
        super().__init__(m)
        self.head = tuple(prefix)
        if self.head and (min(self.head) < 1 or max(self.head) > m):
            raise ValueError(f"prefix has symbols outside 1..{m}")
        if not 1 <= pad <= m:
            raise ValueError("pad symbol outside alphabet")
        self.pad = pad

    def symbol(self, j: int) -> int:
        return self.head[j] if j < len(self.head) else self.pad

    def shift(self, n: int) -> "PaddedPoint":
        return PaddedPoint(self.head[n:], self.m, self.pad)

    def __eq__(self, other):
        if not isinstance(other, PaddedPoint) or self.m != other.m:
            return False
        n = max(len(self.head), len(other.head)) + 1
        return self.prefix(n) == other.prefix(n)

    def __hash__(self):
        return hash(("padded", self.m, self.pad))


class CodedPoint(ShiftPoint):
    """Concatenation of runs ``word * reps``.

    The realized prefix has length ``sum(len(word) * reps)``.  Reading past
    it raises :class:`HorizonError` unless ``tail="repeat"``, in which case
    the last word is repeated forever.  Repetition counts may be
    arbitrarily large integers; window statistics are computed per run
    without enumerating positions.
    """

    kind = "coded"

    def __init__(self, runs: Iterable, m: int, tail: str | None = None, offset: int = 0):
        super().__init__(m)
        self.runs = []
        for word, reps in runs:
            word = tuple(word)
            if not word or min(word) < 1 or max(word) > m:
                raise ValueError(f"bad word {word} for alphabet 1..{m}")
            if reps < 1:
                raise ValueError("run repetition count must be positive")
            self.runs.append((word, int(reps)))
        if not self.runs:
            raise ValueError("coded point needs at least one run")
        if tail not in (None, "repeat"):
            raise ValueError("tail must be None or 'repeat'")
        self.tail = tail
        self.offset = offset
        self.starts = [0]
        for word, reps in self.runs:
            self.starts.append(self.starts[-1] + len(word) * reps)
        self.length = self.starts[-1]

    @property
    def horizon(self):
        """Number of symbols readable from the current position (None if unbounded)."""
        return None if self.tail else self.length - self.offset

    def _run_of(self, pos: int) -> int:
        return bisect.bisect_right(self.starts, pos) - 1

    def symbol(self, j: int) -> int:
        return self._abs_segment(self.offset + j, 1)[0]

    def segment(self, start: int, length: int) -> Word:
        return self._abs_segment(self.offset + start, length)

    def _abs_segment(self, pos: int, length: int) -> Word:
        if length <= 0:
            return ()
        if pos < 0:
            raise IndexError("negative position")
        end = pos + length
        if end > self.length and not self.tail:
            raise HorizonError(f"position {end - 1} beyond realized prefix of length {self.length}")
        out = []
        nruns = len(self.runs)
        r = self._run_of(min(pos, self.length - 1))
        while pos < end:
            word, _ = self.runs[r]
            a = self.starts[r]
            b = end if (r == nruns - 1 and self.tail) else self.starts[r + 1]
            take = min(end, b) - pos
            out.extend(_tile(word, (pos - a) % len(word), take))
            pos += take
            r += 1
        return tuple(out)

    def shift(self, n: int) -> "CodedPoint":
        other = object.__new__(CodedPoint)
        other.__dict__.update(self.__dict__)
        other.offset = self.offset + n
        return other

    def window_counts(self, start: int, stop: int, T: int) -> Counter:
        counts = Counter()
        lo = self.offset + start
        hi = self.offset + stop
        if hi <= lo:
            return counts
        if hi + T - 1 > self.length and not self.tail:
            raise HorizonError(f"windows up to {hi - 1} need {hi + T - 1} symbols; prefix has {self.length}")
        nruns = len(self.runs)
        r = self._run_of(min(lo, self.length - 1))
        while r < nruns:
            word, _ = self.runs[r]
            a = self.starts[r]
            last = r == nruns - 1
            b = self.starts[r + 1]
            if a >= hi:
                break
            # windows starting at j in [a, b - T + 1) lie inside the run
            inner_end = hi if (last and self.tail) else b - T + 1
            i0, i1 = max(a, lo), min(inner_end, hi)
            p = len(word)
            if i1 > i0:
                for ph in range(p):
                    c = _count_residue(i0 - a, i1 - a, ph, p)
                    if c:
                        counts[_tile(word, ph, T)] += c
            if not (last and self.tail):
                e0, e1 = max(a, b - T + 1, lo), min(b, hi)
                if e1 > e0:
                    seg = self._abs_segment(e0, e1 - e0 + T - 1)
                    for i in range(e1 - e0):
                        counts[seg[i:i + T]] += 1
            r += 1
        return counts

    def __repr__(self):
        return f"CodedPoint(runs={len(self.runs)}, length={self.length}, offset={self.offset}, m={self.m})"


def apply_shift(x: ShiftPoint, n: int) -> ShiftPoint:
    if n < 0:
        raise ValueError("shift amount must be nonnegative")
    return x if n == 0 else x.shift(n)


def periodic_point(word, m: int | None = None) -> PeriodicPoint:
    if isinstance(word, str):
        if not word.strip():
            raise ValueError("periodic point needs a nonempty word")
        word = parse_word(word)
    word = tuple(word)
    if not word:
        raise ValueError("periodic point needs a nonempty word")
    return PeriodicPoint(word, m if m is not None else max(2, max(word)))


def shift_metric(x: ShiftPoint, y: ShiftPoint, T: int | None = None) -> tuple[float, float]:
    """Truncated distance sum_{j<T} |x_j - y_j| / m**j and its tail bound."""
    if x.m != y.m:
        raise AlphabetMismatch(f"alphabets differ: {x.m} vs {y.m}")
    m = x.m
    T = default_depth(m) if T is None else T
    value = prefix_distance(x.prefix(T), y.prefix(T), m)
    return value, truncation_error(m, T)


def prefix_distance(a: Sequence[int], b: Sequence[int], m: int, exact: bool = False):
    if exact:
        return sum(Fraction(abs(s - t), m ** j) for j, (s, t) in enumerate(zip(a, b)))
    return math.fsum(abs(s - t) / m ** j for j, (s, t) in enumerate(zip(a, b)))


def orbits_disjoint(u, v) -> bool:
    """Whether the periodic orbits generated by words ``u`` and ``v`` are disjoint."""
    u = primitive_root(parse_word(u) if isinstance(u, str) else tuple(u))
    v = primitive_root(parse_word(v) if isinstance(v, str) else tuple(v))
    return minimal_rotation(u) != minimal_rotation(v)


def orbits_disjoint_bruteforce(u, v, T: int) -> bool:
    u = parse_word(u) if isinstance(u, str) else tuple(u)
    v = parse_word(v) if isinstance(v, str) else tuple(v)
    ku = {_tile(u, i, T) for i in range(len(u))}
    kv = {_tile(v, i, T) for i in range(len(v))}
    return ku.isdisjoint(kv)
