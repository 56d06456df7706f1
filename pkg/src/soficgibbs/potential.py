"""Potentials with a summable variation envelope.

A :class:`Potential` is stored as a *core table* of range ``r`` (a value for
every word of length ``r`` over the full alphabet) plus an optional tail
interval ``[lo, hi]``: the modeled function is ``core(x[0:r]) + t(x)`` with
``lo <= t(x) <= hi``.  The computational representative is ``core + hi``.

The variation envelope bounds ``var_m(phi)``, the oscillation over points
agreeing on their first ``m + 1`` coordinates.  Two envelopes are provided:
geometric (``C theta^m``) and polynomial (``C (m+1)^-alpha``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .errors import InsufficientContext, InvalidPotential, WordNotAdmissible
from .symbolic import Alphabet

_VAR_TOL = 1e-12


@dataclass(frozen=True)
class Exponential:
    """Envelope ``C theta^m``."""

    C: float
    theta: float
    kind = "exponential"

    def __post_init__(self):
        if not (self.C >= 0 and math.isfinite(self.C)):
            raise InvalidPotential("variation constant C must be finite and nonnegative")
        if not 0 <= self.theta < 1:
            raise InvalidPotential("theta must lie in [0, 1)")

    def bound(self, m: int) -> float:
        if self.C == 0:
            return 0.0
        return self.C * self.theta ** m if m > 0 else self.C

    def tail_sum(self, j: int) -> float:
        """Sum of the envelope over ``m >= j``."""
        if self.C == 0:
            return 0.0
        return self.C * self.theta ** j / (1.0 - self.theta) if j > 0 else self.C / (1.0 - self.theta)

    def to_dict(self):
        return {"type": "exp", "C": self.C, "theta": self.theta}


@dataclass(frozen=True)
class Polynomial:
    """Envelope ``C (m+1)^-alpha`` with ``alpha > 4``.

    Tail sums use an explicit partial sum plus the integral bound
    ``N^(1-alpha) / (alpha - 1)`` for the remainder, so they are upper bounds.
    """

    C: float
    alpha: float
    kind = "polynomial"
    terms = 2000

    def __post_init__(self):
        if not (self.C >= 0 and math.isfinite(self.C)):
            raise InvalidPotential("variation constant C must be finite and nonnegative")
        if not self.alpha > 4:
            raise InvalidPotential("polynomial variation needs alpha > 4")

    def bound(self, m: int) -> float:
        return self.C * (m + 1.0) ** (-self.alpha)

    def tail_sum(self, j: int) -> float:
        if self.C == 0:
            return 0.0
        k = np.arange(j + 1, j + 1 + self.terms, dtype=np.float64)
        N = j + self.terms
        head = math.fsum(k ** (-self.alpha))
        # relative pad of a few ulps keeps the rounded sum an upper bound
        return self.C * (head + N ** (1.0 - self.alpha) / (self.alpha - 1.0)) * (1.0 + 2.0**-48)

    def to_dict(self):
        return {"type": "poly", "C": self.C, "alpha": self.alpha}


def parse_variation(spec) -> Exponential | Polynomial:
    if isinstance(spec, (Exponential, Polynomial)):
        return spec
    if not isinstance(spec, dict):
        raise InvalidPotential("variation must be an object with a 'type' field")
    kind = str(spec.get("type", "")).lower()
    try:
        if kind in ("exp", "exponential", "holder", "geometric"):
            return Exponential(float(spec["C"]), float(spec["theta"]))
        if kind in ("poly", "polynomial"):
            return Polynomial(float(spec["C"]), float(spec["alpha"]))
    except KeyError as exc:
        raise InvalidPotential(f"variation is missing field {exc.args[0]!r}") from None
    raise InvalidPotential(f"unknown variation type {kind!r}")


@dataclass(frozen=True)
class DerivedConstants:
    """Constants entering every a-priori bound."""

    norm: float
    Lambda: float
    C: float
    theta: float | None
    alpha: float | None
    kind: str


class Potential:
    """Locally constant core plus bounded tail, with a variation envelope.

    Parameters
    ----------
    alphabet : Alphabet
    table : array_like or dict
        Either a flat array of length ``#A**r`` indexed by the base-``#A``
        value of the word, or a mapping from words to values.
    range : int
        Number of coordinates the core depends on (``r >= 1``).
    variation : Exponential, Polynomial, dict or None
        Envelope of ``var_m``.  When omitted, the smallest geometric envelope
        with ``theta = 1/2`` dominating the actual variation is used.
    tail : (float, float)
        Interval for the part of the potential not captured by the table.
    """

    def __init__(self, alphabet, table, range: int, variation=None, tail=(0.0, 0.0), name=None):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        if range < 1:
            raise InvalidPotential("range must be at least 1")
        self.alphabet = alphabet
        self.range = int(range)
        k = len(alphabet)
        size = k ** self.range
        if isinstance(table, dict):
            arr = np.full(size, np.nan)
            for word, val in table.items():
                w = alphabet.encode(word)
                if len(w) != self.range:
                    raise InvalidPotential(f"table key {word!r} does not have length {self.range}")
                arr[self._code(w)] = float(val)
            if np.isnan(arr).any():
                raise InvalidPotential("table does not cover every word of length range")
        else:
            arr = np.asarray(table, dtype=np.float64).reshape(-1)
            if arr.size != size:
                raise InvalidPotential(f"table must have {size} entries, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise InvalidPotential("potential values must be finite")
        self.core = arr
        self.core.setflags(write=False)
        lo, hi = (float(t) for t in tail)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise InvalidPotential("tail must be a finite interval lo <= hi")
        self.tail = (lo, hi)
        self.name = name
        self._actual = self._actual_variations()
        if variation is None:
            if self.tail_width:
                raise InvalidPotential("a potential with a tail needs an explicit variation envelope")
            C = max((v * 2.0 ** m for m, v in enumerate(self._actual)), default=0.0)
            variation = Exponential(C, 0.5 if C else 0.0)
        self.variation = parse_variation(variation)
        if self.tail_width > 0 and isinstance(self.variation, Exponential) and self.variation.C == 0:
            raise InvalidPotential("a nonzero tail needs a nonzero variation envelope")
        for m in range_(self.range):
            v = self.actual_variation(m)
            if v > self.variation.bound(m) * (1 + _VAR_TOL) + _VAR_TOL:
                raise InvalidPotential(
                    f"table variation {v:.6g} at depth {m} exceeds the envelope "
                    f"{self.variation.bound(m):.6g}", depth=m)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, alphabet) -> "Potential":
        return cls.constant(alphabet, 0.0)

    @classmethod
    def constant(cls, alphabet, c: float) -> "Potential":
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        return cls(alphabet, np.full(len(alphabet), float(c)), 1, Exponential(0.0, 0.0))

    @classmethod
    def bernoulli(cls, alphabet, probs) -> "Potential":
        """``phi(x) = log p(x_0)``; its Gibbs measure on the full shift is Bernoulli(p)."""
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        p = np.asarray(probs, dtype=np.float64)
        if p.shape != (len(alphabet),) or np.any(p <= 0):
            raise InvalidPotential("Bernoulli weights must be positive, one per symbol")
        return cls(alphabet, np.log(p / p.sum()), 1, Exponential(0.0, 0.0))

    @classmethod
    def from_function(cls, alphabet, range: int, func: Callable, variation=None, tail=(0.0, 0.0)):
        """Tabulate ``func(word)`` over all words of length ``range``."""
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        k = len(alphabet)
        vals = [func(w) for w in product(range_(k), repeat=range)]
        return cls(alphabet, vals, range, variation, tail)

    # -- structure --------------------------------------------------------

    def _code(self, word) -> int:
        k = len(self.alphabet)
        c = 0
        for a in word:
            c = c * k + a
        return c

    def _codes(self, arr: np.ndarray) -> np.ndarray:
        k = len(self.alphabet)
        c = np.zeros(arr.shape[:-1], dtype=np.int64)
        for j in range_(arr.shape[-1]):
            c = c * k + arr[..., j]
        return c

    @property
    def tail_width(self) -> float:
        return self.tail[1] - self.tail[0]

    def _actual_variations(self):
        """Oscillation of the core over cylinders of length ``m+1``, ``m < r-1``."""
        k = len(self.alphabet)
        out = []
        for m in range_(self.range - 1):
            blocks = self.core.reshape(k ** (m + 1), -1)
            out.append(float(np.max(blocks.max(axis=1) - blocks.min(axis=1))))
        return out

    def actual_variation(self, m: int) -> float:
        """Bound on ``var_m`` read off the table plus the tail width."""
        core = self._actual[m] if m < self.range - 1 else 0.0
        return core + self.tail_width

    def effective_variation(self, m: int) -> float:
        """``min(envelope(m), actual(m))``: the tightest available bound on ``var_m``."""
        return min(self.variation.bound(m), self.actual_variation(m))

    def effective_tail(self, j: int) -> float:
        """Upper bound on ``sum_{m >= j} var_m``."""
        total = 0.0
        w = self.tail_width
        m = max(j, 0)
        for _ in range_(100000):
            if m < self.range - 1:
                total += self.effective_variation(m)
            elif w == 0:
                return total
            elif self.variation.bound(m) > w:
                total += w
            else:
                return total + self.variation.tail_sum(m)
            m += 1
        return total + self.variation.tail_sum(m)

    def constants(self) -> DerivedConstants:
        v = self.variation
        return DerivedConstants(
            norm=self.sup_norm,
            Lambda=v.tail_sum(0),
            C=v.C,
            theta=getattr(v, "theta", None),
            alpha=getattr(v, "alpha", None),
            kind=v.kind,
        )

    @property
    def sup_norm(self) -> float:
        lo, hi = self.tail
        return float(max(np.max(self.core + hi), -np.min(self.core + lo)))

    @property
    def is_exact(self) -> bool:
        return self.tail_width == 0

    # -- evaluation -------------------------------------------------------

    def _check(self, word):
        k = len(self.alphabet)
        word = tuple(word)
        for a in word:
            if not (isinstance(a, (int, np.integer)) and 0 <= a < k):
                raise WordNotAdmissible(f"symbol {a!r} is not an alphabet index")
        return word

    def value(self, word) -> float:
        """Representative value on a word of at least ``range`` symbols."""
        word = self._check(word)
        if len(word) < self.range:
            raise InsufficientContext(f"need {self.range} symbols, got {len(word)}")
        return float(self.core[self._code(word[:self.range])] + self.tail[1])

    def finite_range(self, n: int, a) -> float:
        """Maximum of the potential over the cylinder of the length ``n+1`` word ``a``."""
        a = self._check(a)
        if len(a) != n + 1:
            raise ValueError(f"word must have length n+1 = {n + 1}")
        r = self.range
        if len(a) >= r:
            return float(self.core[self._code(a[:r])] + self.tail[1])
        k = len(self.alphabet)
        span = k ** (r - len(a))
        start = self._code(a) * span
        return float(self.core[start:start + span].max() + self.tail[1])

    def finite_range_many(self, words: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`finite_range` on the rows of an integer array."""
        words = np.asarray(words, dtype=np.int64)
        r = self.range
        L = words.shape[1]
        if L >= r:
            return self.core[self._codes(words[:, :r])] + self.tail[1]
        k = len(self.alphabet)
        blocks = self.core.reshape(k ** L, -1).max(axis=1)
        return blocks[self._codes(words)] + self.tail[1]

    def birkhoff_sum(self, x, k: int, periodic: bool = False) -> float:
        """``sum_{i=0}^{k} phi(T^i x)`` of the representative.

        With ``periodic=True`` the word is read cyclically.  Otherwise ``x``
        must carry at least ``k + range`` symbols.
        """
        x = self._check(x)
        r = self.range
        if periodic:
            if not x:
                raise InsufficientContext("empty periodic word")
            reps = (k + r) // len(x) + 1
            x = x * reps
        elif len(x) < k + r:
            raise InsufficientContext(f"need {k + r} symbols for a {k + 1}-term sum, got {len(x)}")
        arr = np.asarray(x[:k + r], dtype=np.int64)
        win = np.lib.stride_tricks.sliding_window_view(arr, r)
        return float(np.sum(self.core[self._codes(win)]) + (k + 1) * self.tail[1])

    def periodic_sums(self, points: np.ndarray) -> np.ndarray:
        """Full-period Birkhoff sums of each row, read cyclically."""
        pts = np.asarray(points, dtype=np.int64)
        n, p = pts.shape
        r = self.range
        reps = (r - 1) // p + 2
        ext = np.tile(pts, (1, reps))[:, :p + r - 1]
        win = np.lib.stride_tricks.sliding_window_view(ext, r, axis=1)
        return self.core[self._codes(win)].sum(axis=1) + p * self.tail[1]

    def table(self) -> dict:
        k = len(self.alphabet)
        return {w: float(self.core[i]) for i, w in enumerate(product(range_(k), repeat=self.range))}

    def to_dict(self) -> dict:
        d = {
            "alphabet": list(self.alphabet.symbols),
            "range": self.range,
            "table": {self.alphabet.decode(w): v for w, v in self.table().items()},
            "variation": self.variation.to_dict(),
        }
        if self.tail != (0.0, 0.0):
            d["tail"] = list(self.tail)
        return d

    def __repr__(self):
        return (f"Potential(range={self.range}, #A={len(self.alphabet)}, "
                f"variation={self.variation}, tail={self.tail})")


range_ = range  # the class uses ``range`` as a parameter name


def finite_range(phi: Potential, n: int, a) -> float:
    """Projection of ``phi`` to range ``n+1``: its maximum on the cylinder ``[a]``."""
    return phi.finite_range(n, a)


def birkhoff_sum(phi: Potential, x, k: int, periodic: bool = False) -> float:
    return phi.birkhoff_sum(x, k, periodic)


def derived_constants(phi: Potential) -> DerivedConstants:
    return phi.constants()
