"""Transfer matrices and certified Perron data.

The transfer matrix of depth ``n`` over an order-``m`` approximation is
indexed by the admissible words of length ``n + 1``; the entry ``(a, b)`` is
``exp(phi^{n+1}(a b[-1]))`` when ``b`` continues ``a`` by one symbol.

Perron data are obtained by power iteration on the simplex.  The Birkhoff
coefficient ``tau`` of ``M^L`` (``L`` a primitivity index) turns every
iterate into a rigorous bracket on the projective distance to the fixed
point; Collatz-Wielandt quotients bracket the eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import BudgetExceeded, NoConvergence, NonPositiveEntry, NotPrimitive
from .symbolic import DEFAULT_ENUMERATION_BUDGET, SftApproximation

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class TransferMatrix:
    """Sparse transfer matrix with its word index."""

    words: tuple
    matrix: sp.csr_matrix
    m: int
    n: int
    potential_id: str = ""
    index: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def to_coo_text(self, alphabet=None) -> str:
        """Coordinate dump ``row-word col-word value`` for external verification."""
        coo = self.matrix.tocoo()
        dec = alphabet.decode if alphabet is not None else (lambda w: "".join(map(str, w)))
        lines = [f"{dec(self.words[i])} {dec(self.words[j])} {v:.17g}"
                 for i, j, v in sorted(zip(coo.row, coo.col, coo.data))]
        return "\n".join(lines) + "\n"


def build_transfer(S: SftApproximation, n: int, phi, budget: int = DEFAULT_ENUMERATION_BUDGET) -> TransferMatrix:
    """Transfer matrix of depth ``n`` (``n + 1 >= order`` of ``S``) for potential ``phi``."""
    if n + 1 < S.order:
        raise ValueError(f"depth n={n} too small for an order {S.order} approximation")
    words = S.admissible_words(n, budget)
    ext = S.admissible_words(n + 1, budget)
    index = {w: i for i, w in enumerate(words)}
    arr = np.asarray(ext, dtype=np.int64).reshape(len(ext), n + 2)
    vals = np.exp(phi.finite_range_many(arr))
    rows = np.fromiter((index[c[:-1]] for c in ext), dtype=np.int64, count=len(ext))
    cols = np.fromiter((index[c[1:]] for c in ext), dtype=np.int64, count=len(ext))
    N = len(words)
    M = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    M.sort_indices()
    return TransferMatrix(tuple(words), M, S.order, n, getattr(phi, "name", None) or repr(phi), index)


def _as_sparse(M) -> sp.csr_matrix:
    if isinstance(M, TransferMatrix):
        return M.matrix
    if sp.issparse(M):
        return sp.csr_matrix(M, dtype=np.float64)
    return sp.csr_matrix(np.asarray(M, dtype=np.float64))


def gamma_tau(M):
    """Birkhoff coefficient pair ``(Gamma, tau)`` of a nonnegative matrix.

    ``Gamma`` is the minimum over row pairs ``(i, k)`` and column pairs
    ``(j, l)`` of ``sqrt(M_ij M_kl / (M_il M_kj))``; it is zero as soon as
    an entry vanishes.  ``tau = (1 - Gamma) / (1 + Gamma)``.
    """
    A = M.toarray() if sp.issparse(M) else (M.dense() if isinstance(M, TransferMatrix) else np.asarray(M, float))
    if A.size == 0 or np.any(A <= 0):
        return 0.0, 1.0
    if A.shape == (1, 1):
        return 1.0, 0.0
    L = np.log(A)
    worst = 0.0
    for i in range(L.shape[0]):
        D = L[i] - L
        worst = min(worst, float(np.min(D.min(axis=1) - D.max(axis=1))))
    G = math.exp(0.5 * worst)
    return G, (1.0 - G) / (1.0 + G)


def projective_distance(x, y) -> float:
    """``log max(x/y) - log min(x/y)`` for positive vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("vectors must have the same shape")
    if np.any(x <= 0) or np.any(y <= 0):
        raise NonPositiveEntry("projective distance needs strictly positive vectors")
    r = np.log(x) - np.log(y)
    return float(r.max() - r.min())


@dataclass(frozen=True)
class PerronData:
    """Perron eigendata with certified radii.

    ``err_v`` and ``err_w`` bound the projective distance of ``v`` and ``w``
    to the true eigenvectors; ``err_rho`` bounds ``|log rho - log rho_true|``.
    ``err`` is the largest of the three plus a floating point allowance.
    """

    rho: float
    v: np.ndarray
    w: np.ndarray
    tau: float
    L: int
    err: float
    err_v: float
    err_w: float
    err_rho: float
    rho_bracket: tuple
    iterations: int
    tau_source: str

    @property
    def log_rho(self) -> float:
        return math.log(self.rho)


def primitivity_index(M, start: int = 1, limit: int | None = None) -> int | None:
    """Smallest ``L >= start`` with ``M^L > 0`` (structural), None if not primitive."""
    A = (_as_sparse(M) > 0).astype(np.int64).tocsr()
    n = A.shape[0]
    if limit is None:
        limit = n * n - 2 * n + 2 if n > 1 else 1
    B = A.copy()
    for j in range(1, max(limit, start) + 1):
        if j >= start and B.nnz == n * n:
            return j
        B = (B @ A)
        B.data[:] = 1
        B.eliminate_zeros()
    return None


def _matrix_power_scaled(A: np.ndarray, L: int) -> np.ndarray:
    R = np.eye(A.shape[0])
    B = A / np.max(A)
    while L:
        if L & 1:
            R = R @ B
            R /= np.max(R)
        B = B @ B
        B /= np.max(B)
        L >>= 1
    return R


def _iterate(A: sp.csr_matrix, x: np.ndarray, steps: int) -> np.ndarray:
    for _ in range(steps):
        x = A @ x
        x /= x.sum()
    return x


def _fixed_point(A, tau, L, tol, max_iter):
    n = A.shape[0]
    x = np.full(n, 1.0 / n)
    x1 = _iterate(A, x, 1)
    xL = _iterate(A, x1, L - 1) if L > 1 else x1
    d0 = min(L * projective_distance(x, x1), projective_distance(x, xL))
    steps = L
    if tau == 0.0:
        return xL, 0.0, steps
    cur = xL
    while True:
        # a-priori bound from the start vector, and a-posteriori bound from the last block
        prior = tau ** (steps // L) * d0 / (1.0 - tau)
        y1 = _iterate(A, cur, 1)
        yL = _iterate(A, y1, L - 1) if L > 1 else y1
        steps += L
        post = tau * min(L * projective_distance(cur, y1), projective_distance(cur, yL)) / (1.0 - tau)
        bound = min(prior * tau, post)
        cur = yL
        if bound <= tol:
            return cur, bound, steps
        if steps > max_iter:
            raise NoConvergence(f"certified bound {bound:.3g} above tol after {steps} iterations",
                                tau=tau, L=L)


def perron(M, ell: int | None = None, tol: float = 1e-12, *, max_iter: int = 1_000_000,
           dense_limit: int = 2000, tau_bound: float | None = None) -> PerronData:
    """Certified Perron data of a primitive nonnegative matrix.

    Parameters
    ----------
    M : TransferMatrix, sparse or dense matrix
    ell : int, optional
        Specification length; the contraction is measured on ``M^L`` with
        ``L = ell + n + 1``.  If that power is not positive the smallest
        larger positive power is used instead.
    tol : float
        Target for the certified projective error of ``v`` and ``w``.
    dense_limit : int
        Largest dimension for which ``tau`` is computed from the dense power.
    tau_bound : float, optional
        A-priori upper bound on ``tau`` used above ``dense_limit``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = _as_sparse(M)
    if A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError("matrix must be square and nonempty")
    if A.nnz and A.data.min() < 0:
        raise NonPositiveEntry("transfer matrix has a negative entry")
    dim = A.shape[0]
    if dim == 1:
        r = float(A.toarray()[0, 0])
        if r <= 0:
            raise NotPrimitive("1x1 matrix with zero entry")
        one = np.ones(1)
        return PerronData(r, one, one, 0.0, 1, 0.0, 0.0, 0.0, 0.0, (r, r), 0, "exact")
    n = M.n if isinstance(M, TransferMatrix) else 0
    start = 1 if ell is None else ell + n + 1
    if dim <= dense_limit:
        L = primitivity_index(A, start=start)
        if L is None:
            raise NotPrimitive("transfer matrix is not primitive")
        _, tau = gamma_tau(_matrix_power_scaled(A.toarray(), L))
        source = "dense"
    else:
        if tau_bound is None:
            raise BudgetExceeded(f"dimension {dim} exceeds the dense limit and no tau bound was given")
        L, tau, source = start, float(tau_bound), "a-priori"
    if tau >= 1.0 - 1e-15:
        raise NoConvergence("Birkhoff coefficient is numerically 1", tau=tau, L=L)
    AT = A.T.tocsr()
    v, err_v, it_v = _fixed_point(A, tau, L, tol, max_iter)
    w, err_w, it_w = _fixed_point(AT, tau, L, tol, max_iter)
    Av = A @ v
    wA = AT @ w
    q_v = Av / v
    q_w = wA / w
    lo = max(q_v.min(), q_w.min())
    hi = min(q_v.max(), q_w.max())
    rho = float(Av.sum())
    lo, hi = min(lo, rho), max(hi, rho)
    fp = 8 * _EPS * (L + 4) * max(1.0, math.log2(dim))
    err_rho = max(math.log(rho / lo), math.log(hi / rho)) + fp
    w = w / float(w @ v)
    err = max(err_v, err_w, err_rho) + fp
    return PerronData(rho, v, w, tau, L, err, err_v + fp, err_w + fp, err_rho,
                      (float(lo), float(hi)), it_v + it_w, source)


def power_estimate(M, pd: PerronData, x, k: int):
    """Estimate ``M^k x`` as ``rho^k (w . x) v`` with a multiplicative log-radius.

    Returns ``(estimate, radius)``; every component of ``M^k x`` lies within
    ``estimate * exp(+-radius)``.
    """
    A = _as_sparse(M)
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0) or not np.any(x > 0):
        raise NonPositiveEntry("power_estimate needs a nonnegative, nonzero start vector")
    if k < 0:
        raise ValueError("k must be nonnegative")
    est = np.exp(k * math.log(pd.rho) + math.log(float(pd.w @ x)) + np.log(pd.v))
    # a vector with zeros enters the positive cone after at most L steps
    y, j = x / x.sum(), 0
    while np.any(y <= 0):
        if j >= k or j > pd.L:
            raise NonPositiveEntry("start vector does not become positive within k steps", k=k)
        y = _iterate(A, y, 1)
        j += 1
    y1 = _iterate(A, y, 1)
    yL = _iterate(A, y1, pd.L - 1) if pd.L > 1 else y1
    dM = min(pd.L * projective_distance(y, y1), projective_distance(y, yL))
    # 0.0 ** 0 == 1: with tau = 0 the bound only vanishes after a full block
    contraction = pd.tau ** ((k - j) // pd.L) * dM / (1.0 - pd.tau) if dM else 0.0
    fp = 8 * _EPS * (k + 4)
    radius = contraction + k * pd.err_rho + pd.err_v + pd.err_w + fp
    return est, radius
