import itertools
from fractions import Fraction as F

from hypothesis import given, strategies as st

from bellctx.catalogue import pr_box
from bellctx.classicality import _vertex_pairs, _vertex_vector, Budget
from bellctx.lp import (
    Feasible,
    Infeasible,
    LinearSystem,
    Optimal,
    Unbounded,
    check_farkas,
    check_point,
    integer_scaled,
    lp_feasibility,
    lp_minimize,
)


def _solve_unique(cols, b):
    """Solve ``sum_j t_j cols[j] = b`` when the columns are independent; None otherwise."""
    m, k = len(b), len(cols)
    M = [[cols[j][i] for j in range(k)] + [b[i]] for i in range(m)]
    row = 0
    pivots = []
    for c in range(k):
        r = next((r for r in range(row, m) if M[r][c] != 0), None)
        if r is None:
            return None
        M[row], M[r] = M[r], M[row]
        piv = M[row][c]
        M[row] = [v / piv for v in M[row]]
        for r2 in range(m):
            if r2 != row and M[r2][c] != 0:
                f = M[r2][c]
                M[r2] = [v - f * w for v, w in zip(M[r2], M[row])]
        pivots.append(c)
        row += 1
    if any(M[r][k] != 0 for r in range(row, m)):
        return None
    return [M[i][k] for i in range(k)]


def brute_force_feasible(A, b):
    """Ax = b, x >= 0 is feasible iff some set of independent columns gives a nonnegative solution."""
    n = len(A[0])
    cols = [[row[j] for row in A] for j in range(n)]
    if all(v == 0 for v in b):
        return True
    for size in range(1, min(n, len(b)) + 1):
        for S in itertools.combinations(range(n), size):
            t = _solve_unique([cols[j] for j in S], b)
            if t is not None and all(v >= 0 for v in t):
                return True
    return False


small_ints = st.integers(-3, 3)


@st.composite
def systems(draw):
    m = draw(st.integers(1, 3))
    n = draw(st.integers(1, 4))
    A = [[F(draw(small_ints)) for _ in range(n)] for _ in range(m)]
    b = [F(draw(small_ints)) for _ in range(m)]
    return A, b


def test_segment_is_feasible():
    res = lp_feasibility(LinearSystem(((1, 1),), (1,)))
    assert isinstance(res, Feasible)
    assert res.point in {(F(1), F(0)), (F(0), F(1))}


def test_forced_negative_is_infeasible():
    sys = LinearSystem(((1, 1), (1, -1)), (1, 3))
    res = lp_feasibility(sys)
    assert isinstance(res, Infeasible)
    assert check_farkas(sys, res.farkas)


def test_pr_box_membership_system_is_infeasible():
    p = pr_box()
    pairs = _vertex_pairs(p.scenario, Budget())
    vectors = [_vertex_vector(p.scenario, sa, sb) for sa, sb in pairs]
    cells = list(p.scenario.cells())
    rows = [tuple(v[i] for v in vectors) for i in range(len(cells))] + [tuple(1 for _ in vectors)]
    sys = LinearSystem(tuple(rows), tuple(p[c] for c in cells) + (F(1),))
    res = lp_feasibility(sys)
    assert len(vectors) == 16
    assert isinstance(res, Infeasible) and check_farkas(sys, res.farkas)


def test_free_variables():
    # x0 - x1 = -2 with x0 free: feasible only through a negative x0
    sys = LinearSystem(((1, -1),), (-2,), nonneg=frozenset({1}))
    res = lp_feasibility(sys)
    assert isinstance(res, Feasible) and check_point(sys, res.point)


def test_minimise_and_unbounded():
    opt = lp_minimize(LinearSystem(((1, 1, 1),), (1,), objective=(3, 1, 2)))
    assert isinstance(opt, Optimal) and opt.value == 1 and opt.point == (0, 1, 0)
    unb = lp_minimize(LinearSystem(((1, -1),), (1,), objective=(0, -1)))
    assert isinstance(unb, Unbounded)


def test_integer_scaling():
    assert integer_scaled([F(1, 2), F(-1, 3), F(0)]) == (3, -2, 0)
    assert integer_scaled([F(0), F(0)]) == (0, 0)


@given(systems())
def test_feasibility_agrees_with_basic_solution_enumeration(system):
    A, b = system
    sys = LinearSystem(tuple(map(tuple, A)), tuple(b))
    res = lp_feasibility(sys)
    assert isinstance(res, Feasible) == brute_force_feasible(A, b)
    if isinstance(res, Feasible):
        assert check_point(sys, res.point)
    else:
        assert check_farkas(sys, res.farkas)


@given(systems(), st.lists(small_ints, min_size=4, max_size=4))
def test_optimum_is_no_worse_than_any_basic_solution(system, cost):
    A, b = system
    n = len(A[0])
    c = [F(v) for v in cost[:n]]
    sys = LinearSystem(tuple(map(tuple, A)), tuple(b), objective=tuple(c))
    res = lp_minimize(sys)
    if not brute_force_feasible(A, b):
        assert isinstance(res, Infeasible)
        return
    if isinstance(res, Optimal):
        assert check_point(sys, res.point)
        assert res.value == sum(ci * xi for ci, xi in zip(c, res.point))
        cols = [[row[j] for row in A] for j in range(n)]
        for size in range(1, min(n, len(b)) + 1):
            for S in itertools.combinations(range(n), size):
                t = _solve_unique([cols[j] for j in S], b)
                if t is not None and all(v >= 0 for v in t):
                    assert res.value <= sum(c[j] * v for j, v in zip(S, t))
    else:
        assert isinstance(res, Unbounded)
        d = res.direction
        assert all(v >= 0 for v in d)
        assert all(sum(a * v for a, v in zip(row, d)) == 0 for row in A)
        assert sum(ci * di for ci, di in zip(c, d)) < 0
