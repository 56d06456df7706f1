"""Measures, pressure and entropy of the finite type approximations.

Two independent routes lead to the same cylinder masses:

* periodic orbits: the atomic measure putting weight ``exp(S phi)`` on each
  periodic point of a fixed period (:func:`elementary_measure`), and
* linear algebra: Perron data of the transfer matrix, whose stationary Markov
  chain reproduces the Gibbs measure (:func:`gibbs_cylinder`,
  :func:`markov_extend`).

Every reported quantity carries a radius.  For probabilities the radius is
multiplicative (``value * exp(+-radius)``); for pressure and entropy it is
additive.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from .constants import elementary_constants, model_slack, proof_constants
from .errors import BudgetExceeded, DepthMismatch, GapTooSmall, SupportViolation, WordNotAdmissible
from .symbolic import (
    DEFAULT_ENUMERATION_BUDGET,
    SftApproximation,
    SoficPresentation,
    build_sft,
    enumerate_periodic,
    specification_length,
)
from .transfer import PerronData, TransferMatrix, build_transfer, perron

_EPS = np.finfo(np.float64).eps


def _grow(r: float) -> float:
    """``exp(r) - 1`` saturating at infinity."""
    return math.expm1(r) if r < 700 else math.inf


# ---------------------------------------------------------------------------
# containers


@dataclass(frozen=True)
class Estimate:
    """Point value with an enclosing bracket ``[lo, hi]``."""

    value: float
    radius: float
    lo: float
    hi: float
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def around(cls, value, radius, **meta):
        return cls(float(value), float(radius), float(value - radius), float(value + radius), meta)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def overlaps(self, other: "Estimate") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


PressureEstimate = Estimate


class CylinderMeasure:
    """Cylinder masses for every word up to length ``depth``.

    ``values[word]`` is the mass of the cylinder; ``radius[word]`` a
    multiplicative log radius.  Words absent from the map have mass zero.
    """

    def __init__(self, depth: int, values: dict, radius: dict, provenance: dict | None = None):
        self.depth = depth
        self.values = values
        self.radius = radius
        self.provenance = provenance or {}

    @classmethod
    def from_top(cls, top: dict, top_radius: dict | float, provenance=None) -> "CylinderMeasure":
        """Build all shorter levels by summing over the last symbol."""
        depth = len(next(iter(top)))
        values = dict(top)
        if isinstance(top_radius, dict):
            radius = dict(top_radius)
        else:
            radius = dict.fromkeys(top, float(top_radius))
        level = top
        for L in range(depth - 1, 0, -1):
            groups = defaultdict(list)
            rad = {}
            for w, v in level.items():
                u = w[:L]
                groups[u].append(v)
                rad[u] = max(rad.get(u, 0.0), radius[w])
            # a correctly rounded sum of nonnegative terms adds one rounding unit
            nxt = {u: math.fsum(vs) for u, vs in groups.items()}
            values.update(nxt)
            radius.update({u: r + _EPS for u, r in rad.items()})
            level = nxt
        return cls(depth, values, radius, provenance)

    def __getitem__(self, word) -> float:
        word = tuple(word)
        if len(word) > self.depth:
            raise DepthMismatch(f"word of length {len(word)} beyond depth {self.depth}")
        if not word:
            return 1.0
        return self.values.get(word, 0.0)

    def bracket(self, word):
        v = self[word]
        r = self.radius.get(tuple(word), 0.0)
        return v * math.exp(-r), v * math.exp(r)

    def level(self, k: int) -> dict:
        if not 1 <= k <= self.depth:
            raise DepthMismatch(f"level {k} outside 1..{self.depth}")
        return {w: v for w, v in sorted(self.values.items()) if len(w) == k}

    def level_radius(self, k: int) -> float:
        return max((r for w, r in self.radius.items() if len(w) == k), default=0.0)

    def total(self, k: int) -> float:
        return math.fsum(self.level(k).values())

    def stationarity_defect(self, k: int) -> float:
        """``max |sum_b mu[b a] - mu[a]|`` over words ``a`` of length ``k``."""
        left = defaultdict(float)
        for w, v in self.level(k + 1).items():
            left[w[1:]] += v
        words = set(left) | set(self.level(k))
        return max(abs(left.get(a, 0.0) - self[a]) for a in words)

    def __repr__(self):
        return f"CylinderMeasure(depth={self.depth}, words={len(self.values)}, {self.provenance})"


# ---------------------------------------------------------------------------
# defaults and helpers


def default_depth(m: int, phi) -> int:
    """Matrix depth used when none is given: ``max(m, range - 1) + 2``."""
    return max(m, phi.range - 1) + 2


def default_period(n: int, ell: int) -> int:
    return (n + 1) * (n + ell + 1)


def _ell_of(S: SftApproximation) -> int:
    if S.source is not None:
        return specification_length(S.source)
    return specification_length(S.presentation)


# ---------------------------------------------------------------------------
# periodic orbit route


def elementary_measure(S: SftApproximation, p: int, phi, depth: int | None = None,
                       budget: int = DEFAULT_ENUMERATION_BUDGET) -> CylinderMeasure:
    """Atomic measure on the period-``(p+1)`` points weighted by ``exp(S_p phi)``."""
    per = enumerate_periodic(S, p, budget)
    pts = per.as_array()
    sums = phi.periodic_sums(pts)
    logw = sums - logsumexp(sums)
    weights = np.exp(logw)
    depth = per.period if depth is None else depth
    reps = depth // per.period + 1
    cyl = np.tile(pts, (1, reps))[:, :depth]
    groups = defaultdict(list)
    for row, wt in zip(map(tuple, cyl.tolist()), weights.tolist()):
        groups[row].append(wt)
    top = {w: math.fsum(ws) for w, ws in groups.items()}
    rad = _EPS * (4 * (p + 2) * (1.0 + float(np.max(np.abs(sums)))) + math.log2(len(pts)) + 8)
    return CylinderMeasure.from_top(top, rad, {"m": S.order, "p": p, "method": "periodic"})


def elementary_via_trace(S: SftApproximation, n: int, p: int, phi, a=None, M: TransferMatrix | None = None):
    """Elementary measure of depth-``(n+1)`` cylinders from ``diag(M^(p+1)) / trace``.

    Returns an :class:`Estimate` for a single word ``a``, or a dict of them
    for every index word when ``a`` is None.  The radius is the multiplicative
    slack ``2 (p+1) var_{n+1}``.
    """
    if n > p:
        raise ValueError("need n <= p")
    if M is None:
        M = build_transfer(S, n, phi)
    A = M.dense()
    k = p + 1
    R = np.eye(A.shape[0])
    B = A / A.max()
    while k:
        if k & 1:
            R = R @ B
            R /= R.max()
        B = B @ B
        B /= B.max()
        k >>= 1
    diag = np.diag(R)
    vals = diag / diag.sum()
    rad = 2 * (p + 1) * phi.effective_variation(n + 1) + _EPS * 8 * (p + 2) * max(1.0, math.log2(A.shape[0]))
    out = {w: Estimate(float(v), rad, float(v * math.exp(-rad)), float(v * math.exp(rad)),
                       {"m": S.order, "n": n, "p": p, "method": "trace"})
           for w, v in zip(M.words, vals)}
    if a is None:
        return out
    a = tuple(a)
    if a not in out:
        raise WordNotAdmissible(f"word {a} is not an index word of the transfer matrix")
    return out[a]


# ---------------------------------------------------------------------------
# transfer matrix route


def gibbs_cylinder(S: SftApproximation, n: int, phi, pd: PerronData, M: TransferMatrix | None = None,
                   ell: int | None = None) -> CylinderMeasure:
    """Cylinder masses ``w(a) v(a)`` at depth ``n + 1``."""
    if M is None:
        M = build_transfer(S, n, phi)
    vals = pd.w * pd.v
    total = vals.sum()
    if ell is None:
        ell = _ell_of(S)
    slack = model_slack(phi, n, ell, len(S.alphabet))
    rad = pd.err_v + pd.err_w + slack + _EPS * 8
    top = {w: float(x / total) for w, x in zip(M.words, vals)}
    return CylinderMeasure.from_top(top, rad, {"m": S.order, "n": n, "method": "perron",
                                               "model_slack": slack})


def markov_extend(S: SftApproximation, n: int, phi, pd: PerronData, N: int, M: TransferMatrix | None = None,
                  ell: int | None = None, budget: int = DEFAULT_ENUMERATION_BUDGET) -> CylinderMeasure:
    """Stationary Markov extension of the Perron cylinder masses to depth ``N + 1``."""
    if M is None:
        M = build_transfer(S, n, phi)
    if ell is None:
        ell = _ell_of(S)
    if N <= n:
        base = gibbs_cylinder(S, n, phi, pd, M, ell)
        top = base.level(N + 1)
        return CylinderMeasure.from_top(top, {w: base.radius[w] for w in top},
                                        {**base.provenance, "N": N})
    A = M.matrix.tocsr()
    log_w = np.log(pd.w)
    log_v = np.log(pd.v)
    log_rho = math.log(pd.rho)
    # log-masses of the current words, carried with their last block index
    cur = {w: (log_w[i], i) for i, w in enumerate(M.words)}
    for _ in range(N - n):
        nxt = {}
        for word, (lf, i) in cur.items():
            lo, hi = A.indptr[i], A.indptr[i + 1]
            for j, val in zip(A.indices[lo:hi], A.data[lo:hi]):
                nxt[word + (M.words[j][-1],)] = (lf + math.log(val) - log_rho, j)
        if len(nxt) > budget:
            raise BudgetExceeded(f"more than {budget} cylinders at depth {N + 1}")
        cur = nxt
    top = {w: math.exp(lf + log_v[i]) for w, (lf, i) in cur.items()}
    slack = model_slack(phi, n, ell, len(S.alphabet))
    rad = pd.err_v + pd.err_w + (N - n) * pd.err_rho + (N - n + 1) * slack + _EPS * 4 * (N + 2)
    return CylinderMeasure.from_top(top, rad, {"m": S.order, "n": n, "N": N, "method": "markov",
                                               "model_slack": slack})


def pressure(S: SftApproximation, n: int, phi, pd: PerronData) -> Estimate:
    """``log rho`` of the depth-``n`` transfer matrix as an estimate of ``P(phi, X_m)``."""
    rad = phi.effective_tail(n + 1) + pd.err_rho
    return Estimate.around(math.log(pd.rho), rad, m=S.order, n=n)


@dataclass(frozen=True)
class Fit:
    """Per-order computations bundled for reuse."""

    S: SftApproximation
    n: int
    M: TransferMatrix
    pd: PerronData
    pressure: Estimate


def fit_order(P: SoficPresentation, phi, m: int, n: int | None = None, tol: float = 1e-12,
              budget: int = DEFAULT_ENUMERATION_BUDGET, ell: int | None = None) -> Fit:
    S = build_sft(P, m, budget)
    n = default_depth(m, phi) if n is None else n
    M = build_transfer(S, n, phi, budget)
    ell = specification_length(P) if ell is None else ell
    K0 = elementary_constants(phi, ell, len(P.alphabet))[0]
    pd = perron(M, ell, tol, tau_bound=1.0 - 1.0 / K0)
    return Fit(S, n, M, pd, pressure(S, n, phi, pd))


def pressure_gap(P: SoficPresentation, phi, m: int, n: int | None = None, tol: float = 1e-12,
                 budget: int = DEFAULT_ENUMERATION_BUDGET) -> Estimate:
    """``P(phi, X_m) - P(phi, X_{m+1})`` with the lower end clamped at zero."""
    n = default_depth(m + 1, phi) if n is None else n
    a = fit_order(P, phi, m, n, tol, budget)
    b = fit_order(P, phi, m + 1, n, tol, budget)
    gap = a.pressure.value - b.pressure.value
    rad = a.pressure.radius + b.pressure.radius
    return Estimate(gap, rad, max(0.0, gap - rad), gap + rad, {"m": m, "n": n})


# ---------------------------------------------------------------------------
# comparisons


def weak_distance(mu: CylinderMeasure, nu: CylinderMeasure, K: int) -> Estimate:
    """Truncated weak distance with its tail and the measures' radii folded in.

    ``lo`` and ``hi`` bound ``sum_{k >= 0} 2^-(k+1) sum_a |mu[a] - nu[a]|``
    (levels ``k + 1 <= K + 1`` computed, the rest bounded by ``2^-K``).
    """
    if mu.depth < K + 1 or nu.depth < K + 1:
        raise DepthMismatch(f"both measures must cover depth {K + 1}")
    point = 0.0
    unc = 0.0
    for k in range(K + 1):
        lm, ln = mu.level(k + 1), nu.level(k + 1)
        s = 0.0
        u = 0.0
        for a in set(lm) | set(ln):
            x, y = lm.get(a, 0.0), ln.get(a, 0.0)
            s += abs(x - y)
            if x > 0:
                u += x * _grow(mu.radius.get(a, 0.0))
            if y > 0:
                u += y * _grow(nu.radius.get(a, 0.0))
        point += 2.0 ** -(k + 1) * s
        unc += 2.0 ** -(k + 1) * u
    return Estimate(point, unc + 2.0 ** -K, max(0.0, point - unc), point + unc + 2.0 ** -K, {"K": K})


def weak_distance_exact(mu: dict, nu: dict, K: int):
    """Exact rational truncated sum; ``mu`` and ``nu`` map words to Fractions."""
    from fractions import Fraction

    total = Fraction(0)
    for k in range(K + 1):
        words = {w for w in mu if len(w) == k + 1} | {w for w in nu if len(w) == k + 1}
        total += Fraction(1, 2 ** (k + 1)) * sum(abs(mu.get(w, 0) - nu.get(w, 0)) for w in words)
    return total


@dataclass(frozen=True)
class GibbsRatio:
    lo: float
    hi: float
    by_depth: dict


def gibbs_ratio_certificate(mu: CylinderMeasure, phi, P: Estimate, N: int) -> GibbsRatio:
    """Extremes of ``mu[a] / exp(S_k phi(a*) - (k+1) P)`` over words of length ``k+1 <= N+1``.

    ``S_k phi(a*)`` uses, for each shift, the maximum of the potential over
    the remaining cylinder.
    """
    if mu.depth < N + 1:
        raise DepthMismatch(f"measure must cover depth {N + 1}")
    by_depth = {}
    for k in range(N + 1):
        lo, hi = math.inf, -math.inf
        for a, val in mu.level(k + 1).items():
            if val <= 0:
                continue
            s = sum(phi.finite_range(k - i, a[i:]) for i in range(k + 1))
            r = val / math.exp(s - (k + 1) * P.value)
            lo, hi = min(lo, r), max(hi, r)
        by_depth[k] = (lo, hi)
    return GibbsRatio(min(v[0] for v in by_depth.values()), max(v[1] for v in by_depth.values()), by_depth)


# ---------------------------------------------------------------------------
# mixing


@dataclass(frozen=True)
class MixingResult:
    """``|mu([a] & T^-s [b]) / (mu[a] mu[b]) - 1|`` with its radius."""

    a: tuple
    b: tuple
    s: int
    value: float
    radius: float
    ratio: float
    joint: float
    mu_a: float
    mu_b: float
    method: str
    bound: float | None = None
    s_star: float | None = None


def _constrained_mass(M: TransferMatrix, pd: PerronData, constraints: dict, length: int) -> float:
    """Mass of all words of ``length`` symbols obeying ``constraints`` (position -> symbol)."""
    words = np.asarray(M.words, dtype=np.int64)
    width = words.shape[1]
    mask = np.ones(len(words), dtype=bool)
    for pos, sym in constraints.items():
        if pos < width:
            mask &= words[:, pos] == sym
    x = np.where(mask, pd.w * pd.v, 0.0)
    x /= np.sum(pd.w * pd.v)
    if length <= width:
        return float(x.sum())
    A = M.matrix.tocsr()
    # transition kernel P(u, u') = M(u, u') v(u') / (rho v(u)), applied to row vectors
    Pt = (sp.diags(pd.v) @ A.T @ sp.diags(1.0 / pd.v)).tocsr() / pd.rho
    last = words[:, -1]
    for pos in range(width, length):
        x = Pt @ x
        if pos in constraints:
            x = np.where(last == constraints[pos], x, 0.0)
    return float(x.sum())


def mixing_ratio(S: SftApproximation, n: int, phi, pd: PerronData, a, b, s: int,
                 M: TransferMatrix | None = None, strict: bool = False, constants=None,
                 ell: int | None = None) -> MixingResult:
    """Correlation of the cylinders ``[a]`` and ``T^-s [b]`` under the Markov measure.

    The joint mass is computed by propagating the stationary chain between
    the two blocks.  When ``s < |a|`` the cylinders overlap; with
    ``strict=True`` this raises :class:`GapTooSmall`, otherwise the joint mass
    is the direct sum over the combined cylinder and ``method`` is ``"direct"``.
    """
    a, b = tuple(a), tuple(b)
    if not a or not b:
        raise ValueError("cylinder words must be nonempty")
    if s < len(a) and strict:
        raise GapTooSmall(f"s={s} is smaller than |a|={len(a)}", s=s)
    if M is None:
        M = build_transfer(S, n, phi)
    ca = dict(enumerate(a))
    cb = dict(enumerate(b))
    joint_c = dict(ca)
    consistent = True
    for i, sym in enumerate(b):
        if joint_c.get(s + i, sym) != sym:
            consistent = False
        joint_c[s + i] = sym
    mu_a = _constrained_mass(M, pd, ca, len(a))
    mu_b = _constrained_mass(M, pd, cb, len(b))
    if mu_a <= 0 or mu_b <= 0:
        raise WordNotAdmissible("a or b has zero mass")
    joint = _constrained_mass(M, pd, joint_c, max(len(a), s + len(b))) if consistent else 0.0
    ratio = joint / (mu_a * mu_b)
    if ell is None:
        ell = _ell_of(S)
    slack = model_slack(phi, n, ell, len(S.alphabet))
    span = max(len(a), s + len(b))
    r_each = pd.err_v + pd.err_w + span * pd.err_rho + slack + _EPS * 8 * (span + 2)
    log_rad = 3 * r_each
    radius = abs(ratio) * _grow(log_rad)
    bound = s_star = None
    if constants is not None:
        s_star = constants.s_star(len(a) - 1, len(b) - 1)
        bound = constants.mixing_bound(s)
    return MixingResult(a, b, s, abs(ratio - 1.0), radius, ratio, joint, mu_a, mu_b,
                        "markov" if s >= len(a) else "direct", bound, s_star)


# ---------------------------------------------------------------------------
# entropy


@dataclass(frozen=True)
class EntropyEstimate(Estimate):
    direct: float = math.nan
    direct_average: float = math.nan
    direct_depth: int = 0


def block_entropy(mu: CylinderMeasure, k: int) -> float:
    """Shannon entropy of the length-``k`` cylinder partition."""
    vals = np.array([v for v in mu.level(k).values() if v > 0])
    return float(-np.sum(vals * np.log(vals)))


def entropy(S: SftApproximation, n: int, phi, pd: PerronData, mu: CylinderMeasure | None = None,
            M: TransferMatrix | None = None, direct_depth: int | None = None,
            ell: int | None = None) -> EntropyEstimate:
    """Entropy from the variational identity ``h = P - integral of phi``.

    The integral uses the depth ``n+1`` projection on cylinders of length
    ``n + 2``.  A direct block-entropy estimate is reported alongside: the
    conditional increment ``H(D) - H(D-1)`` and the average ``H(D) / D`` at the
    deepest level ``D`` of ``mu``.
    """
    if M is None:
        M = build_transfer(S, n, phi)
    if ell is None:
        ell = _ell_of(S)
    base = markov_extend(S, n, phi, pd, n + 1, M, ell)
    lvl = base.level(n + 2)
    words = np.asarray(list(lvl), dtype=np.int64)
    masses = np.fromiter(lvl.values(), dtype=np.float64, count=len(lvl))
    vals = phi.finite_range_many(words)
    integral = float(np.dot(masses, vals))
    int_rad = float(np.dot(masses, np.abs(vals))) * _grow(base.level_radius(n + 2))
    h = math.log(pd.rho) - integral
    rad = pd.err_rho + phi.effective_tail(n + 1) + phi.effective_variation(n + 1) + int_rad
    if mu is None:
        mu = markov_extend(S, n, phi, pd, direct_depth if direct_depth is not None else 11, M, ell)
    D = mu.depth
    hD = block_entropy(mu, D)
    direct = hD - block_entropy(mu, D - 1) if D > 1 else hD
    rad = float(rad)
    return EntropyEstimate(h, rad, h - rad, h + rad, {"m": S.order, "n": n},
                           direct=direct, direct_average=hD / D, direct_depth=D)


def relative_entropy(nu: CylinderMeasure, h_nu, psi, S_prime: SftApproximation, n: int,
                     pd: PerronData) -> Estimate:
    """``P(psi, S') - integral of psi d nu - h(nu)``, clamped at zero within its radius."""
    top = nu.level(nu.depth)
    for w, v in top.items():
        if v > 0 and not S_prime.is_admissible(w):
            raise SupportViolation(f"measure charges the word {w}, which is not admissible", word=list(w))
    if isinstance(h_nu, Estimate):
        h_val, h_rad = h_nu.value, h_nu.radius
    else:
        h_val, h_rad = float(h_nu), 0.0
    P = pressure(S_prime, n, psi, pd)
    depth = nu.depth
    lvl = nu.level(depth)
    words = np.asarray(list(lvl), dtype=np.int64)
    masses = np.fromiter(lvl.values(), dtype=np.float64, count=len(lvl))
    vals = psi.finite_range_many(words)
    integral = float(np.dot(masses, vals))
    int_rad = psi.effective_variation(depth - 1) + float(np.dot(masses, np.abs(vals))) * _grow(
        nu.level_radius(depth))
    value = P.value - integral - h_val
    rad = P.radius + int_rad + h_rad
    clamped = value < 0 <= value + rad
    return Estimate(max(value, 0.0) if clamped else value, rad, max(0.0, value - rad), value + rad,
                    {"clamped": clamped, "raw": value})


# ---------------------------------------------------------------------------
# convergence study


@dataclass(frozen=True)
class ConvergenceRow:
    m: int
    D: Estimate
    pressure: Estimate
    pressure_gap: Estimate
    entropy: Estimate
    entropy_gap: Estimate


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r2: float
    rate: float
    points: int


@dataclass
class ConvergenceStudy:
    rows: list
    fit: RateFit | None
    pressures: dict
    entropies: dict
    limit_bracket: tuple | None
    constants: object = None
    theta_FT: float | None = None
    extra: dict = field(default_factory=dict)


def fit_rate(ms, gaps, floor: float = 1e-14) -> RateFit | None:
    """Least squares of ``log gap`` against ``m`` over gaps above ``floor``."""
    pts = [(m, math.log(g)) for m, g in zip(ms, gaps) if g > floor]
    if len(pts) < 2:
        return None
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2, math.exp(slope), len(pts))


def convergence_study(P: SoficPresentation, phi, m_range, K: int = 8, tol: float = 1e-12,
                      n: int | None = None, budget: int = DEFAULT_ENUMERATION_BUDGET,
                      with_constants: bool = True) -> ConvergenceStudy:
    """Per-order comparison of consecutive approximations.

    Each row ``m`` compares ``X_m`` with ``X_{m+1}``: weak distance of the
    Gibbs measures at cutoff ``K``, pressure gap and entropy gap.  The
    pressure-gap decay is fitted geometrically.  ``limit_bracket`` encloses
    the pressure of the sofic shift: the upper end is the last computed
    pressure plus its radius, the lower end subtracts the fitted geometric
    remainder of the gap series (an extrapolation, not a certificate).
    """
    ms = list(m_range)
    if not ms:
        raise ValueError("m_range must be nonempty")
    ell = specification_length(P)
    fits, measures, ent = {}, {}, {}
    for m in ms + [ms[-1] + 1]:
        f = fit_order(P, phi, m, n, tol, budget, ell)
        fits[m] = f
        measures[m] = markov_extend(f.S, f.n, phi, f.pd, K, f.M, ell, budget)
        ent[m] = entropy(f.S, f.n, phi, f.pd, measures[m], f.M, ell=ell)
    rows = []
    for m in ms:
        a, b = fits[m], fits[m + 1]
        g = a.pressure.value - b.pressure.value
        gr = a.pressure.radius + b.pressure.radius
        eg = abs(ent[m].value - ent[m + 1].value)
        er = ent[m].radius + ent[m + 1].radius
        rows.append(ConvergenceRow(
            m=m,
            D=weak_distance(measures[m], measures[m + 1], K),
            pressure=a.pressure,
            pressure_gap=Estimate(g, gr, max(0.0, g - gr), g + gr, {"m": m}),
            entropy=ent[m],
            entropy_gap=Estimate(eg, er, max(0.0, eg - er), eg + er, {"m": m}),
        ))
    rate = fit_rate([r.m for r in rows], [r.pressure_gap.value for r in rows])
    last = fits[ms[-1] + 1].pressure
    bracket = None
    if rate is not None and rate.rate < 1:
        M_last = ms[-1] + 1
        remainder = math.exp(rate.intercept + rate.slope * M_last) / (1.0 - rate.rate)
        bracket = (last.value - last.radius - remainder, last.value + last.radius)
    elif rate is None:
        bracket = (last.value - last.radius, last.value + last.radius)
    consts = None
    theta_FT = None
    if with_constants:
        consts = proof_constants(P, phi)
        theta_FT = consts.theta_FT
    return ConvergenceStudy(rows, rate, {m: f.pressure for m, f in fits.items()}, ent, bracket,
                            consts, theta_FT)
