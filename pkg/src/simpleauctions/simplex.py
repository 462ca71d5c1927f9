"""Dense primal simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The slack basis is feasible from the start, so no phase one is needed.
Bland's rule (lowest-index entering and leaving variables) rules out
cycling on the heavily degenerate LPs the menu oracle produces.  With
``exact=True`` the tableau holds :class:`fractions.Fraction` entries and
every comparison is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import numpy as np


class LPError(RuntimeError):
    pass


class Unbounded(LPError):
    pass


class LPSolution(NamedTuple):
    value: float
    x: np.ndarray
    pivots: int


def _to_fraction(a) -> Fraction:
    # decimal round trip so 0.1 becomes 1/10, not the nearest binary double
    return Fraction(repr(float(a))) if not isinstance(a, (int, Fraction)) else Fraction(a)


def simplex_max(c, A, b, *, exact: bool = False, tol: float = 1e-10,
                max_pivots: int = 100_000) -> LPSolution:
    c, A, b = np.asarray(c, float), np.asarray(A, float), np.asarray(b, float)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("dimension mismatch")
    if (b < 0).any():
        raise LPError("right-hand side must be nonnegative (origin must be feasible)")

    if exact:
        tab = np.empty((m + 1, n + m + 1), dtype=object)
        tab[:m, :n] = [[_to_fraction(a) for a in row] for row in A]
        tab[:m, n:n + m] = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
        tab[:m, -1] = [_to_fraction(x) for x in b]
        tab[m, :n] = [-_to_fraction(x) for x in c]
        tab[m, n:] = Fraction(0)
        tol = 0
    else:
        tab = np.zeros((m + 1, n + m + 1))
        tab[:m, :n] = A
        tab[:m, n:n + m] = np.eye(m)
        tab[:m, -1] = b
        tab[m, :n] = -c
    basis = list(range(n, n + m))

    pivots = 0
    while True:
        obj = tab[m, :-1]
        entering = next((j for j in range(n + m) if obj[j] < -tol), None)
        if entering is None:
            break
        col = tab[:m, entering]
        leave, best_ratio = None, None
        for i in range(m):
            if col[i] > tol:
                ratio = tab[i, -1] / col[i]
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[leave])):
                    leave, best_ratio = i, ratio
        if leave is None:
            raise Unbounded("objective is unbounded")
        tab[leave] = tab[leave] / tab[leave, entering]
        for i in range(m + 1):
            if i != leave and tab[i, entering] != 0:
                tab[i] = tab[i] - tab[i, entering] * tab[leave]
        basis[leave] = entering
        pivots += 1
        if pivots > max_pivots:
            raise LPError("pivot limit reached")

    x = np.zeros(n)
    for i, var in enumerate(basis):
        if var < n:
            x[var] = float(tab[i, -1])
    return LPSolution(float(tab[m, -1]), x, pivots)
