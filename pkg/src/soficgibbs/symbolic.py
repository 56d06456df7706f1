"""Alphabets, sofic presentations and their finite type approximations.

Words are tuples of symbol *indices* (``0 .. #A-1``) throughout; an
:class:`Alphabet` converts between those tuples and human readable strings.

A :class:`SoficPresentation` is a right-resolving labeled graph.  The subshift
it presents is the set of labels of infinite paths, and its language
``L_n(X)`` is the set of labels of paths with ``n + 1`` edges.  The order-``m``
approximation :class:`SftApproximation` is the subshift of finite type whose
allowed blocks are exactly ``L_m(X)``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    BudgetExceeded,
    NoMagicWord,
    NotPrimitive,
    PeriodTooLarge,
    PresentationError,
    WordNotAdmissible,
)

Word = tuple

DEFAULT_ENUMERATION_BUDGET = 10**6


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of symbols; the order is the word ordering."""

    symbols: tuple

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if len(symbols) < 2:
            raise PresentationError("an alphabet needs at least two symbols")
        if len(set(symbols)) != len(symbols):
            raise PresentationError("alphabet symbols must be distinct", symbols=symbols)
        object.__setattr__(self, "symbols", symbols)

    def __len__(self):
        return len(self.symbols)

    @classmethod
    def of_size(cls, k: int) -> "Alphabet":
        return cls(tuple(str(i) for i in range(k)))

    @cached_property
    def _lookup(self):
        return {s: i for i, s in enumerate(self.symbols)}

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def index(self, symbol) -> int:
        try:
            return self._lookup[str(symbol)]
        except KeyError:
            raise WordNotAdmissible(f"symbol {symbol!r} is not in the alphabet") from None

    def encode(self, word) -> Word:
        """Convert a string or a sequence of symbols to an index tuple.

        Strings over a single-character alphabet are read character by
        character, otherwise they are split on whitespace.  Tuples of ``int``
        are taken to be indices already.
        """
        if isinstance(word, str):
            parts = list(word) if self.single_char else word.split()
            return tuple(self.index(s) for s in parts)
        word = tuple(word)
        if all(isinstance(s, (int, np.integer)) and not isinstance(s, bool) for s in word):
            for s in word:
                if not 0 <= s < len(self):
                    raise WordNotAdmissible(f"symbol index {s} out of range")
            return tuple(int(s) for s in word)
        return tuple(self.index(s) for s in word)

    def decode(self, word: Word) -> str:
        sep = "" if self.single_char else " "
        return sep.join(self.symbols[i] for i in word)


# ---------------------------------------------------------------------------
# graph helpers


def _strongly_connected(succ: Sequence[Iterable[int]], n: int) -> bool:
    if n == 0:
        return False
    pred = [[] for _ in range(n)]
    for u in range(n):
        for v in succ[u]:
            pred[v].append(u)
    for adj in (succ, pred):
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != n:
            return False
    return True


def _period(succ: Sequence[Iterable[int]], n: int) -> int:
    """Period of an irreducible graph (gcd of cycle lengths)."""
    level = {0: 0}
    queue = deque([0])
    g = 0
    while queue:
        u = queue.popleft()
        for v in succ[u]:
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = math.gcd(g, level[u] + 1 - level[v])
    return abs(g)


def primitivity_exponent(adjacency) -> int | None:
    """Smallest ``j >= 1`` with ``A^j > 0``, or None if ``A`` is not primitive."""
    A = (np.asarray(adjacency) > 0).astype(np.int64)
    n = A.shape[0]
    succ = [np.flatnonzero(A[i]).tolist() for i in range(n)]
    if not _strongly_connected(succ, n) or _period(succ, n) != 1:
        return None
    B = A.copy()
    for j in range(1, n * n - 2 * n + 3):
        if B.all():
            return j
        B = ((B @ A) > 0).astype(np.int64)
    return None


# ---------------------------------------------------------------------------
# presentations


class SoficPresentation:
    """Right-resolving labeled graph presenting a sofic subshift.

    Parameters
    ----------
    alphabet : Alphabet or sequence of symbols
    vertices : sequence of hashable vertex names
    edges : iterable of ``(source, label, target)``; labels are symbols or
        symbol indices.
    require_primitive : bool, default=True
        Reject graphs whose adjacency is not irreducible and aperiodic.

    Stranded vertices (no in-edge or no out-edge) are pruned, so the stored
    graph is always essential.
    """

    def __init__(self, alphabet, vertices, edges, *, require_primitive=True):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        self.alphabet = alphabet
        names = list(vertices)
        if len(set(names)) != len(names):
            raise PresentationError("vertex names must be distinct")
        pos = {v: i for i, v in enumerate(names)}
        delta = [dict() for _ in names]
        for edge in edges:
            try:
                src, label, dst = edge
            except (TypeError, ValueError):
                raise PresentationError(f"malformed edge {edge!r}") from None
            if src not in pos or dst not in pos:
                raise PresentationError(f"edge {edge!r} uses an unknown vertex")
            if isinstance(label, (int, np.integer)) and not isinstance(label, bool) \
                    and str(label) not in alphabet.symbols:
                a = int(label)
                if not 0 <= a < len(alphabet):
                    raise PresentationError(f"edge label {label!r} out of range")
            else:
                a = alphabet.index(label)
            u, v = pos[src], pos[dst]
            if a in delta[u] and delta[u][a] != v:
                raise PresentationError(
                    "presentation is not right-resolving",
                    vertex=str(src), label=alphabet.symbols[a],
                )
            delta[u][a] = v
        names, delta = _prune(names, delta)
        if not names:
            raise PresentationError("presentation has no essential vertices (empty subshift)")
        self.vertices = tuple(names)
        self._delta = tuple(delta)
        self._exponent = None
        if require_primitive:
            self._exponent = primitivity_exponent(self.adjacency())
            if self._exponent is None:
                raise NotPrimitive("presentation adjacency is not primitive "
                                   "(graph must be irreducible and aperiodic)")

    # -- constructors -----------------------------------------------------

    @classmethod
    def full_shift(cls, alphabet) -> "SoficPresentation":
        if isinstance(alphabet, int):
            alphabet = Alphabet.of_size(alphabet)
        elif not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        return cls(alphabet, ["*"], [("*", a, "*") for a in range(len(alphabet))])

    @classmethod
    def from_forbidden(cls, alphabet, forbidden, *, require_primitive=True):
        """Presentation of the subshift avoiding the given factors.

        The follower-set automaton is built on words of length ``L - 1``
        (``L`` the longest forbidden word), trimmed to its essential part and
        minimized.
        """
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        bad = {alphabet.encode(f) for f in forbidden}
        if any(len(f) == 0 for f in bad):
            raise PresentationError("the empty word cannot be forbidden")
        L = max((len(f) for f in bad), default=1)
        k = len(alphabet)

        def clean(w):
            return not any(w[i:j] in bad for i in range(len(w)) for j in range(i + 1, len(w) + 1))

        states = [w for w in product(range(k), repeat=L - 1) if clean(w)]
        state_set = set(states)
        edges = []
        for u in states:
            for a in range(k):
                c = u + (a,)
                if not any(c[i:] in bad for i in range(len(c))):
                    v = c[1:]
                    if v in state_set:
                        edges.append((u, a, v))
        raw = cls(alphabet, states, edges, require_primitive=False)
        return raw.minimize(require_primitive=require_primitive)

    @classmethod
    def beta_shift(cls, prefix, period=0, *, require_primitive=True):
        """Standard presentation of the beta-shift with eventually periodic expansion.

        ``prefix`` lists the digits of the quasi-greedy expansion of 1 whose
        last ``period`` digits repeat forever.  With ``period == 0`` the list
        is the finite (greedy) expansion ``t1..tn`` and is converted to the
        periodic quasi-greedy form ``(t1 .. t_{n-1} (t_n - 1))^inf``.
        """
        t = [int(d) for d in prefix]
        if not t or any(d < 0 for d in t):
            raise PresentationError("beta expansion must be a nonempty list of digits")
        if period < 0 or period > len(t):
            raise PresentationError("period must lie between 0 and the prefix length")
        if period == 0:
            if t[-1] == 0:
                raise PresentationError("a finite beta expansion cannot end in 0")
            padded = t + [0] * len(t)
            if any(padded[j:j + len(t)] >= t for j in range(1, len(t))):
                raise PresentationError("digits are not a valid greedy expansion "
                                        "(a shift is not smaller lexicographically)")
            t = t[:-1] + [t[-1] - 1]
            period = len(t)
        if t[0] == 0:
            raise PresentationError("the first digit of a beta expansion of 1 is positive")
        pre = len(t) - period

        def digit(i):
            return t[i] if i < len(t) else t[pre + (i - pre) % period]

        horizon = 2 * len(t) + 2
        seq = [digit(i) for i in range(horizon)]
        for j in range(1, len(t) + 1):
            if seq[j:j + len(t) + period] > seq[:len(t) + period]:
                raise PresentationError("digits are not a valid quasi-greedy expansion "
                                        "(a shift exceeds the sequence lexicographically)")
        alphabet = Alphabet.of_size(max(t) + 1)
        n = len(t)
        edges = []
        for i in range(n):
            nxt = i + 1 if i + 1 < n else pre
            edges.append((i, t[i], nxt))
            for a in range(t[i]):
                edges.append((i, a, 0))
        return cls(alphabet, list(range(n)), edges, require_primitive=require_primitive)

    # -- structure --------------------------------------------------------

    @property
    def edges(self):
        return tuple((self.vertices[u], self.alphabet.symbols[a], self.vertices[v])
                     for u, d in enumerate(self._delta) for a, v in sorted(d.items()))

    @property
    def n_edges(self) -> int:
        return sum(len(d) for d in self._delta)

    def adjacency(self) -> np.ndarray:
        n = len(self.vertices)
        A = np.zeros((n, n), dtype=np.int64)
        for u, d in enumerate(self._delta):
            for v in d.values():
                A[u, v] += 1
        return A

    def step(self, states, a):
        return frozenset(self._delta[q][a] for q in states if a in self._delta[q])

    def follow(self, q: int, word) -> int | None:
        for a in word:
            q = self._delta[q].get(a)
            if q is None:
                return None
        return q

    def is_admissible(self, word) -> bool:
        states = frozenset(range(len(self.vertices)))
        for a in word:
            states = self.step(states, a)
            if not states:
                return False
        return True

    def admissible_words(self, n: int, budget: int = DEFAULT_ENUMERATION_BUDGET):
        return admissible_words(self, n, budget)

    def minimize(self, *, require_primitive=True) -> "SoficPresentation":
        """Merge vertices with identical follower sets (Moore refinement)."""
        n = len(self.vertices)
        k = len(self.alphabet)
        block = [tuple(sorted(d)) for d in self._delta]
        ids = {}
        part = [ids.setdefault(b, len(ids)) for b in block]
        while True:
            sig = [(part[u],) + tuple(part[self._delta[u][a]] if a in self._delta[u] else -1
                                      for a in range(k)) for u in range(n)]
            ids = {}
            new = [ids.setdefault(s, len(ids)) for s in sig]
            if len(ids) == len(set(part)):
                part = new
                break
            part = new
        rep = {}
        for u in range(n):
            rep.setdefault(part[u], u)
        names = [self.vertices[rep[b]] for b in sorted(rep)]
        edges = set()
        for b in sorted(rep):
            u = rep[b]
            for a, v in self._delta[u].items():
                edges.add((self.vertices[u], a, self.vertices[rep[part[v]]]))
        return SoficPresentation(self.alphabet, names, sorted(edges, key=lambda e: (str(e[0]), e[1])),
                                 require_primitive=require_primitive)

    @property
    def primitivity_exponent(self) -> int | None:
        if self._exponent is None:
            self._exponent = primitivity_exponent(self.adjacency())
        return self._exponent

    def __repr__(self):
        return (f"SoficPresentation(#A={len(self.alphabet)}, vertices={len(self.vertices)}, "
                f"edges={self.n_edges})")


def _prune(names, delta):
    alive = set(range(len(names)))
    changed = True
    while changed:
        changed = False
        has_in = set()
        for u in alive:
            for v in delta[u].values():
                if v in alive:
                    has_in.add(v)
        for u in list(alive):
            out = any(v in alive for v in delta[u].values())
            if not out or u not in has_in:
                alive.discard(u)
                changed = True
    keep = sorted(alive)
    remap = {u: i for i, u in enumerate(keep)}
    new_delta = [{a: remap[v] for a, v in delta[u].items() if v in alive} for u in keep]
    return [names[u] for u in keep], new_delta


# ---------------------------------------------------------------------------
# finite type approximations


class SftApproximation:
    """Subshift of finite type on the allowed blocks of length ``order + 1``.

    Blocks that cannot be continued forever to the right are pruned, so every
    stored block is the prefix of a point.
    """

    def __init__(self, alphabet, order: int, words, *, source=None):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        if order < 0:
            raise ValueError("order must be nonnegative")
        self.alphabet = alphabet
        self.order = order
        self.source = source
        ws = set()
        for w in words:
            w = alphabet.encode(w)
            if len(w) != order + 1:
                raise ValueError(f"block {w} does not have length {order + 1}")
            ws.add(w)
        k = len(alphabet)
        changed = True
        while changed:
            changed = False
            for w in list(ws):
                if not any(w[1:] + (a,) in ws for a in range(k)):
                    ws.discard(w)
                    changed = True
        if not ws:
            raise PresentationError("the subshift of finite type is empty")
        self.words = tuple(sorted(ws))
        self.word_set = frozenset(ws)
        self.index = {w: i for i, w in enumerate(self.words)}

    @classmethod
    def from_words(cls, alphabet, words) -> "SftApproximation":
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        words = [alphabet.encode(w) for w in words]
        lengths = {len(w) for w in words}
        if len(lengths) != 1:
            raise ValueError("all allowed blocks must have the same length")
        return cls(alphabet, lengths.pop() - 1, words)

    @cached_property
    def _prefixes(self):
        return frozenset(w[:k] for w in self.words for k in range(1, len(w) + 1))

    def successors(self, w: Word):
        return [w[1:] + (a,) for a in range(len(self.alphabet)) if w[1:] + (a,) in self.word_set]

    def is_admissible(self, word) -> bool:
        word = tuple(word)
        m = self.order
        if len(word) <= m + 1:
            return word in self._prefixes or not word
        return all(word[i:i + m + 1] in self.word_set for i in range(len(word) - m))

    def admissible_words(self, n: int, budget: int = DEFAULT_ENUMERATION_BUDGET):
        """``L_n`` of the approximation, sorted lexicographically."""
        if n < 0:
            raise ValueError("depth must be nonnegative")
        m = self.order
        if n <= m:
            return sorted({w[:n + 1] for w in self.words})
        level = list(self.words)
        k = len(self.alphabet)
        for _ in range(m + 1, n + 1):
            nxt = []
            for c in level:
                tail = c[len(c) - m:] if m else ()
                for a in range(k):
                    if tail + (a,) in self.word_set:
                        nxt.append(c + (a,))
            if len(nxt) > budget:
                raise BudgetExceeded(f"more than {budget} admissible words", depth=n)
            level = nxt
        return level

    def transition_matrix(self) -> sp.csr_matrix:
        rows, cols = [], []
        for i, w in enumerate(self.words):
            for s in self.successors(w):
                rows.append(i)
                cols.append(self.index[s])
        n = len(self.words)
        return sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(n, n))

    @cached_property
    def presentation(self) -> SoficPresentation:
        """Right-resolving presentation on blocks of length ``order``."""
        m = self.order
        verts = sorted({w[:m] for w in self.words})
        edges = [(w[:m], w[-1], w[1:]) for w in self.words]
        return SoficPresentation(self.alphabet, verts, edges, require_primitive=False)

    def __repr__(self):
        return f"SftApproximation(order={self.order}, #blocks={len(self.words)})"


def admissible_words(P, n: int, budget: int = DEFAULT_ENUMERATION_BUDGET):
    """Admissible words of length ``n + 1``, sorted lexicographically.

    ``P`` may be a :class:`SoficPresentation` (labels of paths) or an
    :class:`SftApproximation`.
    """
    if n < 0:
        raise ValueError("depth must be nonnegative")
    if isinstance(P, SftApproximation):
        return P.admissible_words(n, budget)
    k = len(P.alphabet)
    level = [((), frozenset(range(len(P.vertices))))]
    for _ in range(n + 1):
        nxt = []
        for w, states in level:
            for a in range(k):
                s = P.step(states, a)
                if s:
                    nxt.append((w + (a,), s))
        if len(nxt) > budget:
            raise BudgetExceeded(f"more than {budget} admissible words", depth=n)
        level = nxt
    return [w for w, _ in level]


def build_sft(P: SoficPresentation, m: int, budget: int = DEFAULT_ENUMERATION_BUDGET) -> SftApproximation:
    """Order-``m`` finite type approximation ``X_m`` of the presented subshift."""
    if m < 0:
        raise ValueError("order must be nonnegative")
    return SftApproximation(P.alphabet, m, admissible_words(P, m, budget), source=P)


# ---------------------------------------------------------------------------
# periodic points


@dataclass(frozen=True)
class PeriodicSet:
    """Generators (length ``period``) of all points ``x`` with ``T^period x = x``."""

    period: int
    points: tuple
    trace: int

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.int64).reshape(len(self.points), self.period)


def periodic_count(S: SftApproximation, p: int) -> int:
    """``trace(A^(p+1))`` for the 0/1 block transition matrix ``A``."""
    A = S.transition_matrix()
    k = p + 1
    if A.shape[0] <= 300:
        D = np.array(A.toarray(), dtype=object)
        return int(np.trace(np.linalg.matrix_power(D, k)))
    R = sp.identity(A.shape[0], dtype=np.float64, format="csr")
    B = A.astype(np.float64)
    while k:
        if k & 1:
            R = R @ B
        B = B @ B
        k >>= 1
    return int(round(R.diagonal().sum()))


def enumerate_periodic(S: SftApproximation, p: int, budget: int = DEFAULT_ENUMERATION_BUDGET) -> PeriodicSet:
    """All period-``(p+1)`` points of ``S``, cross-checked against the trace count."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    N = len(S.words)
    k = p + 1
    if N * k > budget:
        raise PeriodTooLarge(f"#blocks*(p+1) = {N * k} exceeds the budget {budget}")
    count = periodic_count(S, p)
    if count > budget:
        raise PeriodTooLarge(f"{count} periodic points exceed the budget {budget}")
    succ = [[S.index[s] for s in S.successors(w)] for w in S.words]
    pred = [[] for _ in range(N)]
    for u in range(N):
        for v in succ[u]:
            pred[v].append(u)
    points = []
    for s in range(N):
        # reach[r]: blocks from which s is reachable in exactly r steps
        reach = [None] * (k + 1)
        reach[0] = {s}
        for r in range(1, k + 1):
            reach[r] = {u for v in reach[r - 1] for u in pred[v]}
        if s not in reach[k]:
            continue
        stack = [(s, k, (S.words[s][0],))]
        while stack:
            u, left, acc = stack.pop()
            if left == 1:
                if s in succ[u]:
                    points.append(acc)
                continue
            for v in reversed(succ[u]):
                if v in reach[left - 1]:
                    stack.append((v, left - 1, acc + (S.words[v][0],)))
    points.sort()
    if len(points) != count:
        raise AssertionError(f"periodic enumeration found {len(points)} points, trace gives {count}")
    return PeriodicSet(period=k, points=tuple(points), trace=count)


# ---------------------------------------------------------------------------
# magic words and specification


def _synchronizing_word(P: SoficPresentation, max_states: int):
    start = frozenset(range(len(P.vertices)))
    if len(start) == 1:
        return ()
    k = len(P.alphabet)
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        states, w = queue.popleft()
        for a in range(k):
            nxt = P.step(states, a)
            if not nxt:
                continue
            if len(nxt) == 1:
                return w + (a,)
            if nxt not in seen:
                if len(seen) >= max_states:
                    return None
                seen.add(nxt)
                queue.append((nxt, w + (a,)))
    return None


def find_magic_word(P: SoficPresentation, max_states: int | None = None) -> Word:
    """Shortest word that collapses the whole vertex set to a single vertex.

    Breadth-first search over the subset automaton, symbols tried in
    alphabet order, so ties are broken lexicographically.  When the given
    presentation is not synchronizing the search is repeated on its
    minimization.
    """
    if max_states is None:
        max_states = 2 ** min(len(P.vertices), 24)
    w = _synchronizing_word(P, max_states)
    if w is None:
        Q = P.minimize(require_primitive=False)
        if len(Q.vertices) < len(P.vertices):
            w = _synchronizing_word(Q, max_states)
    if w is None:
        raise NoMagicWord("no synchronizing word found within the subset-automaton budget",
                          vertices=len(P.vertices))
    return w


def is_magic(P, word, depth: int = 6) -> bool:
    """Direct check: every predecessor/follower pair up to ``depth`` glues through ``word``."""
    word = tuple(word)
    lang = set()
    for n in range(0, 2 * depth + len(word)):
        lang.update(admissible_words(P, n))
    if word and word not in lang:
        return False
    preds = [()] + [b for n in range(depth) for b in admissible_words(P, n) if b + word in lang]
    folls = [()] + [c for n in range(depth) for c in admissible_words(P, n) if word + c in lang]
    return all(b + word + c in lang or not (b + word + c) for b in preds for c in folls)


def specification_length(P: SoficPresentation) -> int:
    """Smallest ``l`` with ``A^(k+1) > 0`` for all ``k >= l`` (A the unlabeled adjacency)."""
    e = P.primitivity_exponent
    if e is None:
        raise NotPrimitive("adjacency has no positive power up to the Wielandt bound")
    return e - 1


def specification_witness(P: SoficPresentation, a, b, gap: int, closing_gap: int | None = None):
    """Periodic word ``a g b g'`` with ``|g| = gap``, ``|g'| = closing_gap`` whose
    periodic repetition lies in the subshift, or None when no such word exists.
    """
    a, b = tuple(a), tuple(b)
    closing_gap = gap if closing_gap is None else closing_gap
    k = len(P.alphabet)

    def layer(q, length):
        cur = {q: ()}
        for _ in range(length):
            nxt = {}
            for u, w in sorted(cur.items(), key=lambda t: t[1]):
                for s in range(k):
                    v = P._delta[u].get(s)
                    if v is not None and v not in nxt:
                        nxt[v] = w + (s,)
            cur = nxt
        return cur

    for s0 in range(len(P.vertices)):
        u = P.follow(s0, a)
        if u is None:
            continue
        for v, g in sorted(layer(u, gap).items(), key=lambda t: t[1]):
            v2 = P.follow(v, b)
            if v2 is None:
                continue
            back = layer(v2, closing_gap)
            if s0 in back:
                return a + g + b + back[s0]
    return None


@dataclass(frozen=True)
class MagicConstants:
    """Constants built from a magic word for the boundary-mass estimate."""

    word: Word
    k: int
    ell: int
    epsilon: float
    theta_X: float
    m_X: int
    C_X: float


def extend_magic_word(P: SoficPresentation, word, length: int) -> Word:
    """Append the smallest admissible followers until ``word`` has ``length`` symbols."""
    word = tuple(word)
    while len(word) < length:
        for a in range(len(P.alphabet)):
            if P.is_admissible(word + (a,)):
                word = word + (a,)
                break
        else:  # pragma: no cover - essential graphs always have a follower
            raise NoMagicWord("magic word cannot be extended")
    return word


def magic_boundary_constants(P: SoficPresentation, phi, budget: int = DEFAULT_ENUMERATION_BUDGET):
    """``(k, eps_w, theta_X, m_X, C_X)`` for a magic word of length ``k >= l + 1``.

    ``k`` is the number of symbols of the magic word; ``eps_w`` compares the
    smallest Birkhoff weight on the magic cylinder with the largest weights
    of the other words of the same length.
    """
    ell = specification_length(P)
    w = extend_magic_word(P, find_magic_word(P), ell + 1)
    k = len(w)
    consts = phi.constants()
    A = len(P.alphabet)
    r = phi.range
    # extensions long enough to fix every window of the k-term Birkhoff sum
    ext = admissible_words(P, k + r - 2, budget)
    lo, hi = {}, {}
    for c in ext:
        b = c[:k]
        s = phi.birkhoff_sum(c, k - 1)
        lo[b] = min(lo.get(b, math.inf), s)
        hi[b] = max(hi.get(b, -math.inf), s)
    width = phi.tail[1] - phi.tail[0]
    lo_w = lo[w] - k * width
    others = [v for b, v in hi.items() if b != w]
    penalty = (A * math.exp(2 * consts.norm)) ** (-ell)
    if not others:
        eps = math.inf
        theta_X = 0.0
    else:
        top = max(others)
        denom = sum(math.exp(v - top) for v in others)
        eps = math.exp(lo_w - top) / denom * penalty
        theta_X = (1.0 + eps) ** (-1.0 / k)
    m_X = 2 * k * (k + ell)
    C_X = (A * math.exp(2 * consts.norm)) ** ell * math.exp(4 * consts.Lambda)
    return MagicConstants(word=w, k=k, ell=ell, epsilon=eps, theta_X=theta_X, m_X=m_X, C_X=C_X)
