"""Exact linear programming over rationals.

A small dense two-phase simplex with Bland's rule. It exists to certify
polytope facts exactly: whether a half-space system is feasible, and the
exact supremum of a linear functional over it (via the dual, which keeps
the tableau at `dim` equality rows no matter how many inequalities the
system has). Problems here are tiny, so a dense tableau is the right tool.

All public entry points accept `fractions.Fraction`/int data and return
`Fraction` values. gmpy2 rationals are used internally when available
(about 5x faster); the algorithm is identical either way.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is an optional accelerator
    _Q = Fraction

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"

_ZERO = _Q(0)
_ONE = _Q(1)


def _to_fraction(value):
    return Fraction(int(value.numerator), int(value.denominator))


def _pivot(tableau, cost_row, basis, row, col):
    piv = tableau[row][col]
    if piv != _ONE:
        inv = _ONE / piv
        tableau[row] = [v * inv for v in tableau[row]]
    pivot_row = tableau[row]
    for i, current in enumerate(tableau):
        if i != row and current[col]:
            f = current[col]
            tableau[i] = [a - f * b for a, b in zip(current, pivot_row)]
    if cost_row[col]:
        f = cost_row[col]
        for j, b in enumerate(pivot_row):
            if b:
                cost_row[j] -= f * b
    basis[row] = col


def _iterate(tableau, cost_row, basis, ncols):
    """Run simplex pivots until optimal or unbounded (Bland's rule)."""
    while True:
        enter = -1
        for j in range(ncols):
            if cost_row[j] < _ZERO:
                enter = j
                break
        if enter < 0:
            return OPTIMAL
        ratio = None
        leave = -1
        for i, row in enumerate(tableau):
            coef = row[enter]
            if coef > _ZERO:
                r = row[-1] / coef
                if ratio is None or r < ratio or (r == ratio and basis[i] < basis[leave]):
                    ratio = r
                    leave = i
        if leave < 0:
            return UNBOUNDED
        _pivot(tableau, cost_row, basis, leave, enter)


def solve_min(cost, eq_rows, eq_rhs):
    """Minimize ``cost . y`` subject to ``eq_rows @ y = eq_rhs`` and ``y >= 0``.

    Returns ``(status, value)`` where status is one of OPTIMAL, UNBOUNDED,
    INFEASIBLE and value is the exact optimum (None unless optimal).
    """
    m = len(eq_rows)
    n = len(cost)
    rows = []
    rhs = []
    for row, b in zip(eq_rows, eq_rhs):
        b = _Q(b)
        if b < _ZERO:
            rows.append([-_Q(v) for v in row])
            rhs.append(-b)
        else:
            rows.append([_Q(v) for v in row])
            rhs.append(b)

    if m == 0:
        # No constraints: optimum is 0 at y = 0 unless some cost is negative.
        if any(_Q(c) < _ZERO for c in cost):
            return UNBOUNDED, None
        return OPTIMAL, Fraction(0)

    # Phase 1: artificial basis, minimize the sum of artificials.
    total = n + m
    tableau = [
        rows[i] + [_ONE if j == i else _ZERO for j in range(m)] + [rhs[i]]
        for i in range(m)
    ]
    basis = [n + i for i in range(m)]
    cost_row = [_ZERO] * (total + 1)
    for row in tableau:
        for j in range(total + 1):
            cost_row[j] -= row[j]
    for j in range(n, total):
        cost_row[j] += _ONE

    status = _iterate(tableau, cost_row, basis, total)
    if status != OPTIMAL or -cost_row[-1] > _ZERO:
        return INFEASIBLE, None

    # Drive leftover artificials out of the basis; drop dependent rows.
    keep = []
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if tableau[i][j]:
                    _pivot(tableau, cost_row, basis, i, j)
                    break
        if basis[i] < n:
            keep.append(i)
    tableau = [tableau[i][:n] + [tableau[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]

    # Phase 2: the real objective.
    cost_row = [_Q(c) for c in cost] + [_ZERO]
    for i, bi in enumerate(basis):
        if cost_row[bi]:
            f = cost_row[bi]
            row = tableau[i]
            for j in range(n + 1):
                if row[j]:
                    cost_row[j] -= f * row[j]

    status = _iterate(tableau, cost_row, basis, n)
    if status == UNBOUNDED:
        return UNBOUNDED, None
    return OPTIMAL, _to_fraction(-cost_row[-1])


def halfspaces_feasible(rows, rhs):
    """Exact feasibility of ``rows @ x <= rhs`` with x free.

    By Farkas' lemma the system is infeasible iff some y >= 0 combines the
    rows to 0 with a negative right-hand side, i.e. iff
    ``min rhs . y  s.t.  rows^T y = 0, y >= 0`` is unbounded below.
    """
    if not rows:
        return True
    dim = len(rows[0])
    eq_rows = [[row[i] for row in rows] for i in range(dim)]
    status, _ = solve_min(list(rhs), eq_rows, [0] * dim)
    return status == OPTIMAL


def max_over_halfspaces(objective, rows, rhs, *, assume_feasible=False):
    """Exact supremum of ``objective . x`` over ``rows @ x <= rhs``.

    Solved through the dual ``min rhs . y  s.t.  rows^T y = objective,
    y >= 0`` so the simplex only ever sees ``dim`` equality rows. Returns
    ``(status, value)``; value is the attained maximum when optimal.
    """
    if not assume_feasible and not halfspaces_feasible(rows, rhs):
        return INFEASIBLE, None
    dim = len(objective)
    eq_rows = [[row[i] for row in rows] for i in range(dim)]
    status, value = solve_min(list(rhs), eq_rows, list(objective))
    if status == INFEASIBLE:
        # Dual infeasible with a feasible primal means the primal is unbounded.
        return UNBOUNDED, None
    if status == UNBOUNDED:
        return INFEASIBLE, None
    return OPTIMAL, value
