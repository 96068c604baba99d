"""Independent ground-truth computations used to check the main routes.

Nothing here touches the spectral or structure-constant machinery: the
tree walk is plain path counting on the distance chain of a regular tree,
and the derivative checks are central finite differences.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def tree_walk_profile(q: int, n: int, c0: Fraction = Fraction(0),
                      c1: Fraction | None = None) -> dict[int, Fraction]:
    """Per-vertex transition probabilities on the (q+1)-regular tree.

    Returns {distance d: k(n; o, x) for any x at distance d}, exact.
    The walk stays put with probability c0 and moves to a uniformly random
    neighbor with probability c1 = 1 - c0.
    """
    if c1 is None:
        c1 = 1 - c0
    assert c0 + c1 == 1
    qf = Fraction(q)
    # dist[d] = probability that the walker is at distance d
    dist: dict[int, Fraction] = {0: Fraction(1)}
    for _ in range(n):
        new: dict[int, Fraction] = {}

        def add(d, p):
            if p:
                new[d] = new.get(d, Fraction(0)) + p

        for d, p in dist.items():
            add(d, p * c0)
            if d == 0:
                add(1, p * c1)
            else:
                add(d + 1, p * c1 * qf / (qf + 1))
                add(d - 1, p * c1 / (qf + 1))
        dist = new
    out: dict[int, Fraction] = {}
    for d, p in dist.items():
        sphere = Fraction(1) if d == 0 else (qf + 1) * qf ** (d - 1)
        out[d] = p / sphere
    return out


def tree_return_probability(q: int, n: int) -> Fraction:
    """k(n; o, o) for the simple nearest-neighbor tree walk, exact."""
    return tree_walk_profile(q, n).get(0, Fraction(0))


def finite_difference_hessian(f, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central second differences of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    d = len(x)
    out = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            ei = np.zeros(d); ei[i] = h
            ej = np.zeros(d); ej[j] = h
            out[i, j] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h * h)
    return out


def finite_difference_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x)); e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def spectral_radius_extrapolation(returns: dict[int, float]) -> float:
    """Estimate rho from return probabilities k(2n; o, o).

    Fits log k(2n)^(1/2n) = log rho + b log(n)/n + c/n over the supplied
    even times and extrapolates the drift terms away.
    """
    ns = sorted(m // 2 for m in returns if m % 2 == 0 and returns[m] > 0)
    rows, rhs = [], []
    for n in ns:
        val = float(returns[2 * n])
        rows.append([1.0, np.log(n) / n, 1.0 / n])
        rhs.append(np.log(val) / (2 * n))
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return float(np.exp(sol[0]))
