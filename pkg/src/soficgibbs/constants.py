"""A-priori constants assembled from the potential and the presentation.

These constants bound contraction, elementary-measure slack, boundary mass,
pressure gaps, approximation speed and mixing.  They are very loose by
construction and are reported as diagnostics next to empirical rates.

For polynomial envelopes the geometric factor ``Lambda * theta^j`` is
replaced by the envelope tail sum ``sum_{i >= j} var_i``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import NoMagicWord
from .symbolic import MagicConstants, SoficPresentation, magic_boundary_constants, specification_length


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def eventual_threshold(logf, limit: int = 2**62) -> int | None:
    """Smallest ``s >= 0`` with ``logf(k) <= 0`` for every ``k >= s``.

    ``logf`` must be unimodal (increasing then decreasing), which holds for
    logarithms of ``polynomial * eta^k`` with ``0 < eta < 1``.  Returns None
    when no threshold below ``limit`` exists.
    """
    hi = 1
    while not (logf(hi) <= 0 and logf(hi + 1) <= logf(hi)):
        hi *= 2
        if hi > limit:
            return None
    lo_, hi_ = 0, hi
    while hi_ - lo_ > 2:  # ternary search for the peak
        a = lo_ + (hi_ - lo_) // 3
        b = hi_ - (hi_ - lo_) // 3
        if logf(a) < logf(b):
            lo_ = a + 1
        else:
            hi_ = b - 1
    peak = max(range(lo_, hi_ + 1), key=logf)
    if logf(peak) <= 0:
        return 0
    lo_, hi_ = peak, hi  # logf(lo_) > 0 >= logf(hi_)
    while hi_ - lo_ > 1:
        mid = (lo_ + hi_) // 2
        if logf(mid) <= 0:
            hi_ = mid
        else:
            lo_ = mid
    return hi_


def _series_poly(x, ell, theta, kind):
    """Integral majorants of ``sum_{k >= x} P(k) theta^k`` for the two polynomial shapes."""
    if theta <= 0:
        return 0.0
    L = math.log(theta)
    if kind == "cubic":
        return (-2 * x * (x * x + 3) / L + 6 * (x * x + 1) / L**2
                - 12 * x / L**3 + 12 / L**4)
    y = x + ell + 2
    return -(y * y + 1) / L + 2 * y / L**2 - 2 / L**3


@dataclass(frozen=True)
class ProofConstants:
    """Every constant of the convergence argument, for one (subshift, potential) pair."""

    n_symbols: int
    ell: int
    norm: float
    Lambda: float
    Lambda_theta: float
    C: float
    theta: float | None
    K0: float
    K1: float
    C_E: float
    theta_E: float
    magic_word: tuple | None
    k: int | None
    epsilon: float | None
    C_X: float | None
    theta_X: float | None
    m_X: int | None
    theta_P: float | None
    C_P: float | None
    m_0: int | None
    m_P: int | None
    theta_FT: float | None
    m_tilde: int | None
    m_star: int | None
    gamma_FT: float | None
    theta_mu: float
    s_0: int | None
    C_h: float | None
    theta_h: float | None

    # polynomial prefactors ------------------------------------------------

    def Q(self, x: float) -> float:
        return _series_poly(x, self.ell, self.theta_E, "cubic")

    def Q_E(self, x: float) -> float:
        return _series_poly(x, self.ell, self.theta_E, "square")

    def Q_X(self, x: float) -> float:
        if self.theta_X is None:
            return math.nan
        return _series_poly(x, self.ell, self.theta_X, "square")

    def Q_FT(self, m: float) -> float:
        ell = self.ell
        t = 4 * self.C_E * (self.theta_E ** (-(ell / 2 + 1)) * self.Q(m) + self.Q_E(m) / self.theta_E)
        if self.theta_X:
            t += 8 * self.C_X * self.Q_X(m) / self.theta_X
        return t + (m + 3) * 2 ** (ell / 2 + 3) + 2

    def Q_mu(self, x: float) -> float:
        if self.gamma_FT is None:
            return math.nan
        ell = self.ell
        if self.theta_E == 0:
            return math.inf
        return _safe_exp(math.log(10 * self.C_E) + 4 * self.gamma_FT
                         - (ell + 5) / 4 * math.log(self.theta_E)
                         + math.log((2 * x + ell + 1) ** 2 + 1))

    # bounds ---------------------------------------------------------------

    def approximation_bound(self, m: int) -> float:
        """``Q_FT(m) theta_FT^m``, valid for ``m >= m_star``."""
        if self.theta_FT is None:
            return math.nan
        return self.Q_FT(m) * self.theta_FT**m

    def pressure_gap_bound(self, m: int) -> float:
        """``C_P theta_P^m``, valid for ``m >= m_P``."""
        if self.C_P is None:
            return math.nan
        return self.C_P * self.theta_P**m

    def mixing_bound(self, s: int) -> float:
        """``Q_mu(sqrt s) theta_mu^sqrt(s)``, valid for ``s >= s_star``."""
        if self.gamma_FT is None:
            return math.nan
        r = math.sqrt(s)
        ell = self.ell
        expo = r / 2 - (ell + 5) / 4
        if self.theta_E == 0:
            return 0.0 if expo > 0 else math.inf
        return _safe_exp(math.log(10 * self.C_E) + 4 * self.gamma_FT + expo * math.log(self.theta_E)
                         + math.log((2 * r + ell + 1) ** 2 + 1))

    def s_star(self, n: int, n2: int) -> float | None:
        if self.s_0 is None:
            return None
        return max(max(n, n2) ** 2 / 4, self.s_0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["magic_word"] = list(self.magic_word) if self.magic_word is not None else None
        return d


def elementary_constants(phi, ell: int, n_symbols: int):
    """``(K0, K1, C_E, theta_E)`` from the potential constants alone."""
    c = phi.constants()
    lam_theta = phi.variation.tail_sum(1)
    logK0 = ell * (c.C + math.log(n_symbols)) + lam_theta
    K0 = _safe_exp(logK0)
    K1 = 2 * ((ell + 1) * (math.log(n_symbols) + c.C) + lam_theta + c.norm)
    C_E = 2 * (c.C + K0 * K1)
    theta_E = max(1.0 - 1.0 / K0, c.theta if c.theta is not None else 0.0)
    return K0, K1, C_E, theta_E


def model_slack(phi, n: int, ell: int, n_symbols: int) -> float:
    """Diagnostic slack ``C_E theta_E^(n+1)`` between the depth-``n`` Markov
    measure and the Gibbs measure; zero when the potential is captured exactly."""
    if phi.effective_variation(n + 1) == 0:
        return 0.0
    _, _, C_E, theta_E = elementary_constants(phi, ell, n_symbols)
    return C_E * theta_E ** (n + 1)


def proof_constants(P: SoficPresentation, phi) -> ProofConstants:
    """Assemble all constants; magic-word dependent ones are None when no magic word is found."""
    c = phi.constants()
    ell = specification_length(P)
    A = len(P.alphabet)
    K0, K1, C_E, theta_E = elementary_constants(phi, ell, A)
    lam_theta = phi.variation.tail_sum(1)
    try:
        mc: MagicConstants | None = magic_boundary_constants(P, phi)
    except NoMagicWord:
        mc = None
    theta = c.theta
    theta_mu = math.sqrt(theta_E)

    fields = dict(magic_word=None, k=None, epsilon=None, C_X=None, theta_X=None, m_X=None,
                  theta_P=None, C_P=None, m_0=None, m_P=None, theta_FT=None, m_tilde=None,
                  m_star=None, gamma_FT=None, s_0=None, C_h=None, theta_h=None)
    if mc is not None:
        C_X, theta_X = mc.C_X, mc.theta_X
        theta_P = max(theta or 0.0, theta_X, theta_E)
        C_P = 2 * C_X + C_E * theta_E**2 + phi.variation.tail_sum(2)
        ltx = _log(theta_X)

        def f_m0(m):
            return math.log(2 * C_X * ((m + 2) * (m + ell + 2) + 1)) + m * ltx

        def f_mt(m):
            return math.log(4 * ((m + ell + 1) ** 2 + 1) * C_X) + m * ltx

        m_0 = eventual_threshold(f_m0) if theta_X > 0 else 0
        m_tilde = eventual_threshold(f_mt) if theta_X > 0 else 0
        m_P = None if m_0 is None else max(mc.m_X, m_0)
        m_star = None if m_tilde is None else max(mc.m_X, m_tilde)
        gamma = None
        if m_star is not None:
            gamma = 4 * ell * (math.log(A) + c.norm) + 4 * c.Lambda
            k = m_star
            while True:
                term = ((k + 1) ** 3 + 1) * (4 * C_X * theta_X**k + 2 * C_E * theta_E ** (k + 1))
                gamma += term
                if term < 1e-17 * max(gamma, 1.0):
                    break
                if k > m_star + 10**6:
                    gamma = math.inf
                    break
                k += 1
            gamma += 4 * C_X * _series_poly(m_star, ell, theta_X, "square") * theta_X ** (m_star - 1) \
                if theta_X > 0 else 0.0
            th = theta if theta is not None else theta_E
            gamma += 2 * C_E * _series_poly(m_star, ell, theta_E, "square") * th**m_star
        s_0 = None
        if C_E > 0 and 0 < theta_E < 1:
            lte = math.log(theta_E)

            def f_s0(s):
                r = math.sqrt(s)
                return (math.log(5 * ((2 * r + ell + 1) ** 2 + 1) * C_E)
                        + (r / 2 - (ell + 5) / 4) * lte)

            s_0 = eventual_threshold(f_s0)
        elif theta_E == 0:
            s_0 = math.floor(((ell + 5) / 2) ** 2) + 1
        fields.update(
            magic_word=mc.word, k=mc.k, epsilon=mc.epsilon, C_X=C_X, theta_X=theta_X, m_X=mc.m_X,
            theta_P=theta_P, C_P=C_P, m_0=m_0, m_P=m_P, theta_FT=max(theta_E, theta_X, 0.5),
            m_tilde=m_tilde, m_star=m_star, gamma_FT=gamma, s_0=s_0,
            C_h=C_P / (1 - theta_P) + c.C if theta_P < 1 else math.inf,
            theta_h=max(theta_P, theta or 0.0),
        )
    return ProofConstants(
        n_symbols=A, ell=ell, norm=c.norm, Lambda=c.Lambda, Lambda_theta=lam_theta, C=c.C,
        theta=theta, K0=K0, K1=K1, C_E=C_E, theta_E=theta_E, theta_mu=theta_mu, **fields,
    )
