"""Exact rational linear programming.

Dense tableau simplex over ``Fraction``. The entering column is the most
negative reduced cost, switching to Bland's rule (smallest index enters, ties
in the ratio test broken by smallest basic index) after a run of degenerate
pivots, so every run terminates and is reproducible. Problems are in equality form ``A x = b`` with
a chosen subset of variables constrained nonnegative.

Infeasibility is reported with a Farkas vector ``y``: ``y.A_j >= 0`` for every
nonnegative column, ``y.A_j == 0`` for every free column and ``y.b < 0``. Any
``x`` satisfying the system would give ``0 <= y.A x = y.b < 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InvariantFailure

try:  # GMP rationals make pivots several times faster; results are identical
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

ZERO = Fraction(0)
DEGENERATE_LIMIT = 50


@dataclass(frozen=True)
class LinearSystem:
    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    nonneg: frozenset[int] | None = None  # None means every variable
    objective: tuple[Fraction, ...] | None = None  # minimised

    def __post_init__(self):
        A = tuple(tuple(Fraction(v) for v in row) for row in self.A)
        b = tuple(Fraction(v) for v in self.b)
        if len(A) != len(b):
            raise ValueError(f"{len(A)} rows but {len(b)} right-hand sides")
        n = len(A[0]) if A else (len(self.objective) if self.objective else 0)
        if any(len(row) != n for row in A):
            raise ValueError("ragged constraint matrix")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.objective is not None:
            c = tuple(Fraction(v) for v in self.objective)
            if len(c) != n:
                raise ValueError("objective length differs from column count")
            object.__setattr__(self, "objective", c)
        if self.nonneg is not None:
            object.__setattr__(self, "nonneg", frozenset(self.nonneg))

    @property
    def num_vars(self) -> int:
        if self.A:
            return len(self.A[0])
        return len(self.objective) if self.objective else 0

    def is_nonneg(self, j: int) -> bool:
        return self.nonneg is None or j in self.nonneg


@dataclass(frozen=True)
class Feasible:
    point: tuple[Fraction, ...]


@dataclass(frozen=True)
class Infeasible:
    farkas: tuple[Fraction, ...]


@dataclass(frozen=True)
class Optimal:
    point: tuple[Fraction, ...]
    value: Fraction


@dataclass(frozen=True)
class Unbounded:
    point: tuple[Fraction, ...]
    direction: tuple[Fraction, ...]


def integer_scaled(vec: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Positive rescaling of ``vec`` to coprime integers (zero vector unchanged)."""
    den = 1
    for v in vec:
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g == 0:
        return tuple(Fraction(0) for _ in vec)
    return tuple(Fraction(v // g) for v in ints)


class _Tableau:
    """Rows ``T[i] = [B^-1 A | B^-1 b]`` plus a reduced-cost row."""

    def __init__(self, rows, basis, cost):
        self.T = rows
        self.basis = basis
        self.cost = cost  # reduced costs with last entry = -objective value
        self.pivots = 0

    def pivot(self, r: int, c: int) -> None:
        row = self.T[r]
        piv = row[c]
        if piv != 1:
            row = [v / piv for v in row]
            self.T[r] = row
        nz = [j for j, v in enumerate(row) if v]
        for i, other in enumerate(self.T):
            if i != r:
                f = other[c]
                if f:
                    for j in nz:
                        other[j] -= f * row[j]
        f = self.cost[c]
        if f:
            cost = self.cost
            for j in nz:
                cost[j] -= f * row[j]
        self.basis[r] = c

    def run(self, allowed: int) -> int | None:
        """Pivot over columns ``< allowed``; returns an unbounded column or None.

        The most negative reduced cost enters while the objective keeps
        improving; after a run of degenerate pivots the rule falls back to
        Bland's (smallest index), which cannot cycle.
        """
        T, basis, cost = self.T, self.basis, self.cost
        stalled = 0
        while True:
            if stalled < DEGENERATE_LIMIT:
                enter, best_cost = None, 0
                for j in range(allowed):
                    if cost[j] < best_cost:
                        enter, best_cost = j, cost[j]
            else:
                enter = next((j for j in range(allowed) if cost[j] < 0), None)
            if enter is None:
                return None
            self.pivots += 1
            best = None
            for i, row in enumerate(T):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return enter
            stalled = stalled + 1 if best[0][0] == 0 else 0
            self.pivot(best[1], enter)


def _q(v: Fraction):
    return _Q(v.numerator, v.denominator)


def _fraction(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def _standard_form(sys: LinearSystem):
    """Split free variables into differences of nonnegative ones (tableau number type)."""
    cols = []  # (original index, sign)
    for j in range(sys.num_vars):
        cols.append((j, 1))
        if not sys.is_nonneg(j):
            cols.append((j, -1))
    A = [[_q(row[j]) * s for (j, s) in cols] for row in sys.A]
    c = None
    if sys.objective is not None:
        c = [_q(sys.objective[j]) * s for (j, s) in cols]
    return A, [_q(v) for v in sys.b], c, cols


def _phase_one(A, b):
    m = len(A)
    n = len(A[0]) if m else 0
    signs = [1 if v >= 0 else -1 for v in b]
    rows = []
    for i in range(m):
        s = signs[i]
        art = [_Q(0)] * m
        art[i] = _Q(1)
        rows.append([v * s for v in A[i]] + art + [b[i] * s])
    cost = [_Q(0)] * (n + m + 1)
    for row in rows:
        for j in range(n):
            cost[j] -= row[j]
        cost[-1] -= row[-1]
    tab = _Tableau(rows, list(range(n, n + m)), cost)
    tab.run(n + m)
    return tab, signs, n, m


def _phase_one_result(sys: LinearSystem):
    A, b, c, cols = _standard_form(sys)
    tab, signs, n, m = _phase_one(A, b)
    if -tab.cost[-1] > 0:
        y = [Fraction(1) - _fraction(tab.cost[n + i]) for i in range(m)]
        farkas = integer_scaled([-y[i] * signs[i] for i in range(m)])
        return None, Infeasible(farkas), (tab, n, m, cols, c)
    return tab, None, (tab, n, m, cols, c)


def _extract(tab, n, cols, num_vars):
    x = [ZERO] * n
    for i, j in enumerate(tab.basis):
        if j < n:
            x[j] = _fraction(tab.T[i][-1])
    point = [ZERO] * num_vars
    for k, (j, s) in enumerate(cols):
        point[j] += s * x[k]
    return tuple(point)


def check_farkas(sys: LinearSystem, y: Sequence[Fraction]) -> bool:
    if len(y) != len(sys.b):
        return False
    for j in range(sys.num_vars):
        s = sum((y[i] * sys.A[i][j] for i in range(len(y)) if y[i]), ZERO)
        if s < 0 or (s != 0 and not sys.is_nonneg(j)):
            return False
    return sum((y[i] * sys.b[i] for i in range(len(y))), ZERO) < 0


def check_point(sys: LinearSystem, x: Sequence[Fraction]) -> bool:
    if len(x) != sys.num_vars:
        return False
    if any(x[j] < 0 for j in range(len(x)) if sys.is_nonneg(j)):
        return False
    return all(sum((a * v for a, v in zip(row, x) if a), ZERO) == rhs for row, rhs in zip(sys.A, sys.b))


def lp_feasibility(sys: LinearSystem) -> Feasible | Infeasible:
    """Find a point of ``{x : A x = b, x_j >= 0 for j in nonneg}`` or a Farkas vector."""
    tab, infeasible, (tab_, n, m, cols, _) = _phase_one_result(sys)
    if infeasible is not None:
        if not check_farkas(sys, infeasible.farkas):
            raise InvariantFailure("phase one produced an invalid Farkas certificate")
        return infeasible
    point = _extract(tab, n, cols, sys.num_vars)
    if not check_point(sys, point):
        raise InvariantFailure("phase one produced a point violating the system")
    return Feasible(point)


def lp_minimize(sys: LinearSystem) -> Optimal | Infeasible | Unbounded:
    """Minimise ``objective . x`` over the system; the optimum returned is a basic solution."""
    if sys.objective is None:
        raise ValueError("lp_minimize needs an objective")
    tab, infeasible, (tab_, n, m, cols, c) = _phase_one_result(sys)
    if infeasible is not None:
        return infeasible
    # drive artificials out of the basis; rows where that is impossible are redundant
    keep = []
    for i in range(len(tab.T)):
        if tab.basis[i] >= n:
            col = next((j for j in range(n) if tab.T[i][j] != 0), None)
            if col is None:
                continue
            tab.pivot(i, col)
        keep.append(i)
    rows = [tab.T[i][:n] + [tab.T[i][-1]] for i in keep]
    basis = [tab.basis[i] for i in keep]
    cost = list(c) + [_Q(0)]
    for i, j in enumerate(basis):
        f = cost[j]
        if f:
            for k, v in enumerate(rows[i]):
                if v:
                    cost[k] -= f * v
    phase2 = _Tableau(rows, basis, cost)
    unbounded_col = phase2.run(n)
    point = _extract(phase2, n, cols, sys.num_vars)
    if unbounded_col is not None:
        d = [ZERO] * n
        d[unbounded_col] = Fraction(1)
        for i, j in enumerate(phase2.basis):
            d[j] -= _fraction(phase2.T[i][unbounded_col])
        direction = [ZERO] * sys.num_vars
        for k, (j, s) in enumerate(cols):
            direction[j] += s * d[k]
        return Unbounded(point, tuple(direction))
    value = sum((a * v for a, v in zip(sys.objective, point)), ZERO)
    if not check_point(sys, point):
        raise InvariantFailure("phase two produced a point violating the system")
    return Optimal(point, value)
