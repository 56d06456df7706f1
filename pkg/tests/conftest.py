import math
import re
from itertools import product

import numpy as np
import pytest

from soficgibbs import Exponential, Potential, SoficPresentation

GOLDEN = (1 + math.sqrt(5)) / 2


def golden_ok(w):
    return "11" not in "".join(map(str, w))


def even_ok(w):
    """Even shift (0-runs between two 1s have even length), checked on the string."""
    s = "".join(map(str, w))
    return all(len(run) % 2 == 0 for run in re.findall(r"(?<=1)0+(?=1)", s))


def brute_language(ok, n, k=2):
    """Words of length n+1 that sit inside an allowed word with two free symbols on each side.

    For the golden mean and even shifts two symbols of padding are enough to
    close any open run, so this is the full language.
    """
    pads = list(product(range(k), repeat=2))
    return [w for w in product(range(k), repeat=n + 1)
            if any(ok(left + w + right) for left in pads for right in pads)]


def de_bruijn_matrix(words):
    """0/1 overlap matrix on the given equal-length words."""
    idx = {w: i for i, w in enumerate(words)}
    A = np.zeros((len(words), len(words)))
    for w in words:
        for a in (0, 1):
            u = w[1:] + (a,)
            if u in idx:
                A[idx[w], idx[u]] = 1
    return A


@pytest.fixture
def full2():
    return SoficPresentation.full_shift(2)


@pytest.fixture
def golden():
    return SoficPresentation.from_forbidden("01", ["11"])


@pytest.fixture
def even():
    return SoficPresentation(["0", "1"], ["A", "B"], [("A", "1", "A"), ("A", "0", "B"), ("B", "0", "A")])


@pytest.fixture
def zero2():
    return Potential.zero("01")


@pytest.fixture
def bern():
    return Potential.bernoulli("01", [1 / 3, 2 / 3])


@pytest.fixture
def holder4():
    """Range-4 truncation of sum 2^-k x_k; its variation is below 2^-m."""
    return Potential.from_function("01", 4, lambda w: sum(0.5**k * w[k] for k in range(4)), Exponential(1.0, 0.5))


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
