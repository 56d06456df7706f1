"""Estimator-style wrapper around the order-``m`` Gibbs measure.

:class:`FiniteTypeGibbs` follows the scikit-learn density estimator shape:
``fit`` takes the subshift, ``score_samples`` returns log cylinder masses and
``transform`` returns masses with their radii.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import ValidationError, WordNotAdmissible
from .gibbs import _constrained_mass, entropy, fit_order
from .potential import Potential
from .symbolic import DEFAULT_ENUMERATION_BUDGET, Alphabet, SoficPresentation


def check_presentation(X) -> SoficPresentation:
    """Accept a presentation, a JSON path or a decoded JSON object."""
    if isinstance(X, SoficPresentation):
        return X
    from .io import load_presentation, presentation_from_dict

    if isinstance(X, dict):
        return presentation_from_dict(X)
    if isinstance(X, (str, Path)):
        return load_presentation(X)
    raise ValidationError(f"cannot interpret {type(X).__name__} as a sofic presentation")


def check_word(alphabet: Alphabet, word) -> tuple:
    w = alphabet.encode(word)
    if not w:
        raise ValidationError("cylinder words must be nonempty")
    return w


def check_words(alphabet: Alphabet, words) -> list:
    if isinstance(words, (str, tuple)):
        words = [words]
    return [check_word(alphabet, w) for w in words]


class FiniteTypeGibbs(BaseEstimator):
    """Gibbs measure of a potential on the order-``m`` approximation of a sofic shift.

    Parameters
    ----------
    potential : Potential, dict, path or None
        None means the zero potential (measure of maximal entropy).
    m : int
        Approximation order.
    n : int, optional
        Transfer matrix depth; defaults to ``max(m, range - 1) + 2``.
    tol : float
        Certified tolerance for the Perron vectors.
    budget : int
        Enumeration budget.

    Attributes
    ----------
    presentation_, potential_, sft_, transfer_, perron_ :
        Fitted objects.
    pressure_ : Estimate
    entropy_ : EntropyEstimate
    """

    def __init__(self, potential=None, m: int = 2, n=None, tol: float = 1e-12,
                 budget: int = DEFAULT_ENUMERATION_BUDGET):
        self.potential = potential
        self.m = m
        self.n = n
        self.tol = tol
        self.budget = budget

    def _resolve_potential(self, alphabet):
        phi = self.potential
        if phi is None:
            return Potential.zero(alphabet)
        if isinstance(phi, Potential):
            return phi
        from .io import load_potential, potential_from_dict

        if isinstance(phi, dict):
            return potential_from_dict(phi, alphabet)
        return load_potential(phi, alphabet)

    def fit(self, X, y=None):
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 0):
            raise ValidationError("m must be a nonnegative integer")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        P = check_presentation(X)
        phi = self._resolve_potential(P.alphabet)
        f = fit_order(P, phi, int(self.m), self.n, self.tol, self.budget)
        self.presentation_ = P
        self.potential_ = phi
        self.sft_ = f.S
        self.n_ = f.n
        self.transfer_ = f.M
        self.perron_ = f.pd
        self.pressure_ = f.pressure
        self.entropy_ = entropy(f.S, f.n, phi, f.pd, M=f.M)
        return self

    def _mass(self, word):
        if not self.sft_.is_admissible(word):
            return 0.0, 0.0
        mass = _constrained_mass(self.transfer_, self.perron_, dict(enumerate(word)), len(word))
        pd = self.perron_
        span = max(len(word) - self.n_ - 1, 0)
        return mass, pd.err_v + pd.err_w + span * pd.err_rho

    def transform(self, X):
        """Rows ``[mass, log radius]`` for each cylinder word in ``X``."""
        check_is_fitted(self, "perron_")
        words = check_words(self.presentation_.alphabet, X)
        return np.array([self._mass(w) for w in words], dtype=np.float64).reshape(len(words), 2)

    def predict_proba(self, X):
        return self.transform(X)[:, 0]

    def score_samples(self, X):
        """Log cylinder masses (``-inf`` for words outside the approximation)."""
        p = self.predict_proba(X)
        with np.errstate(divide="ignore"):
            return np.log(p)

    def score(self, X, y=None) -> float:
        return float(np.mean(self.score_samples(X)))

    def cylinder(self, word) -> float:
        check_is_fitted(self, "perron_")
        w = check_word(self.presentation_.alphabet, word)
        if not self.sft_.is_admissible(w):
            raise WordNotAdmissible(f"{word!r} is not admissible in the order-{self.m} approximation")
        return self._mass(w)[0]

    @property
    def pressure_value(self) -> float:
        check_is_fitted(self, "pressure_")
        return self.pressure_.value

    def __sklearn_is_fitted__(self):
        return hasattr(self, "perron_")

