"""Small dense two-phase simplex over exact rationals.

Minimizes ``c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq`` and
``x >= 0``. Bland's rule guarantees termination; the instances solved here
have at most a few dozen rows, so a dense tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Matrix = Sequence[Sequence[Fraction]]


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction] | None = None
    fun: Fraction | None = None


def _pivot(T: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    piv = T[row][col]
    if piv != 1:
        T[row] = [v / piv for v in T[row]]
    prow = T[row]
    for i, r in enumerate(T):
        if i != row:
            f = r[col]
            if f:
                T[i] = [a - f * b for a, b in zip(r, prow)]
    basis[row] = col


def _simplex(T: list[list[Fraction]], basis: list[int], ncols: int, allowed: int) -> bool:
    """Run primal simplex on tableau ``T`` (objective is the last row, reduced costs).

    Only columns ``< allowed`` may enter. Returns False when unbounded.
    """
    obj = T[-1]
    while True:
        col = next((j for j in range(allowed) if obj[j] < 0), None)
        if col is None:
            return True
        best = None
        for i in range(len(T) - 1):
            a = T[i][col]
            if a > 0:
                ratio = T[i][ncols] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return False
        _pivot(T, basis, best[1], col)
        obj = T[-1]


def linprog(c: Sequence, A_ub: Matrix = (), b_ub: Sequence = (),
            A_eq: Matrix = (), b_eq: Sequence = ()) -> LPResult:
    c = [Fraction(v) for v in c]
    n = len(c)
    rows: list[tuple[list[Fraction], Fraction, int]] = []  # (coeffs, rhs, slack sign)
    for a, b in zip(A_ub, b_ub):
        rows.append(([Fraction(v) for v in a], Fraction(b), 1))
    for a, b in zip(A_eq, b_eq):
        rows.append(([Fraction(v) for v in a], Fraction(b), 0))
    m = len(rows)
    n_slack = sum(1 for r in rows if r[2])
    # columns: originals | slacks | artificials | rhs
    n_art = m
    ncols = n + n_slack + n_art
    T: list[list[Fraction]] = []
    basis: list[int] = []
    s_idx = n
    for i, (a, b, has_slack) in enumerate(rows):
        row = a + [Fraction(0)] * (n_slack + n_art) + [b]
        if has_slack:
            row[s_idx] = Fraction(1)
            s_idx += 1
        if b < 0:
            row = [-v for v in row]
        row[n + n_slack + i] = Fraction(1)
        T.append(row)
        basis.append(n + n_slack + i)

    # phase 1: minimize sum of artificials
    obj = [Fraction(0)] * (ncols + 1)
    for j in range(n + n_slack, ncols):
        obj[j] = Fraction(1)
    for r in T:
        obj = [o - v for o, v in zip(obj, r)]
    for j in range(n + n_slack, ncols):
        obj[j] = Fraction(0)
    T.append(obj)
    _simplex(T, basis, ncols, ncols)
    if T[-1][ncols] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis; drop redundant rows
    i = 0
    while i < len(T) - 1:
        if basis[i] >= n + n_slack:
            col = next((j for j in range(n + n_slack) if T[i][j] != 0), None)
            if col is None:
                del T[i], basis[i]
                continue
            _pivot(T, basis, i, col)
        i += 1

    # phase 2
    allowed = n + n_slack
    obj = [Fraction(0)] * (ncols + 1)
    for j in range(n):
        obj[j] = c[j]
    for i, bcol in enumerate(basis):
        f = obj[bcol]
        if f:
            obj = [o - f * v for o, v in zip(obj, T[i])]
    T[-1] = obj
    if not _simplex(T, basis, ncols, allowed):
        return LPResult("unbounded")
    x = [Fraction(0)] * n
    for i, bcol in enumerate(basis):
        if bcol < n:
            x[bcol] = T[i][ncols]
    return LPResult("optimal", x, sum((ci * xi for ci, xi in zip(c, x)), Fraction(0)))
