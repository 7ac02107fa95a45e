import itertools
from fractions import Fraction as F
from math import gcd

from hypothesis import given, settings, strategies as st

from bellctx.polytope import affine_hull, convex_hull, facets_to_vertices, nullspace, primitive, rank


def _primitive(vec):
    den = 1
    for v in vec:
        den = den * F(v).denominator // gcd(den, F(v).denominator)
    ints = [int(F(v) * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, v)
    return tuple(v // g for v in ints)


def _hyperplane(points):
    """(normal, const) with normal.p + const = 0 through ``points``, if unique up to scale."""
    n = len(points[0])
    M = [list(p) + [F(1)] for p in points]
    # brute-force nullspace by elimination on the transpose system
    rows = [r[:] for r in M]
    piv_cols = []
    r = 0
    for c in range(n + 1):
        k = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        rows[r] = [v / rows[r][c] for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(n + 1) if c not in piv_cols]
    if len(free) != 1:
        return None
    sol = [F(0)] * (n + 1)
    sol[free[0]] = F(1)
    for i, c in enumerate(piv_cols):
        sol[c] = -rows[i][free[0]]
    return sol[:n], sol[n]


def brute_force_facets(points):
    """Facets of a full-dimensional point set: hyperplanes through d points with all points on one side."""
    d = len(points[0])
    found = set()
    for subset in itertools.combinations(points, d):
        plane = _hyperplane(list(subset))
        if plane is None:
            continue
        normal, const = plane
        values = [sum(a * x for a, x in zip(normal, p)) + const for p in points]
        if all(v >= 0 for v in values):
            found.add(_primitive(list(normal) + [const]))
        if all(v <= 0 for v in values):
            found.add(_primitive([-a for a in normal] + [-const]))
    return {(f[:-1], f[-1]) for f in found}


def _facet_set(hull):
    return {(tuple(n), c) for n, c in hull.facets}


coords = st.integers(-3, 3).map(F)


@st.composite
def full_dim_points(draw, d):
    pts = draw(st.lists(st.tuples(*[coords] * d), min_size=d + 1, max_size=8, unique=True))
    if rank([list(p) + [1] for p in pts]) < d + 1:
        pts = pts + [tuple(F(int(i == j)) * 5 for j in range(d)) for i in range(d)] + [tuple([F(-4)] * d)]
    return sorted(set(pts))


def test_primitive_and_rank():
    assert primitive([F(2), F(-4), F(6)]) == (1, -2, 3)
    assert primitive([F(1, 2), F(1, 3)]) == (3, 2)
    assert rank([[1, 2], [2, 4]]) == 1
    ns = nullspace([[1, 1, 1]])
    assert len(ns) == 2 and all(sum(v) == 0 for v in ns)


def test_cube():
    pts = [tuple(F(v) for v in p) for p in itertools.product((0, 1), repeat=3)]
    hull = convex_hull(pts)
    assert hull.dimension == 3
    assert len(hull.facets) == 6 and len(hull.vertices) == 8
    assert ((1, 0, 0), 0) in _facet_set(hull) and ((-1, 0, 0), 1) in _facet_set(hull)


def test_cube_with_interior_and_edge_points():
    pts = [tuple(F(v) for v in p) for p in itertools.product((0, 2), repeat=3)]
    pts += [(F(1), F(1), F(1)), (F(1), F(0), F(0))]
    hull = convex_hull(pts)
    assert len(hull.vertices) == 8 and len(hull.facets) == 6


def test_cross_polytope():
    pts = []
    for i in range(3):
        for s in (1, -1):
            pts.append(tuple(F(s * int(i == j)) for j in range(3)))
    hull = convex_hull(pts)
    assert len(hull.facets) == 8 and len(hull.vertices) == 6
    assert all(c == 1 and all(abs(a) == 1 for a in n) for n, c in hull.facets)


def test_segment_in_the_plane_uses_affine_hull():
    # points on x + y = 1 between (0,1) and (1,0): a 1-dimensional polytope
    pts = [(F(0), F(1)), (F(1), F(0)), (F(1, 2), F(1, 2))]
    hull = convex_hull(pts)
    assert hull.dimension == 1
    assert len(hull.facets) == 2 and len(hull.vertices) == 2
    free, eqs = affine_hull(pts)
    assert free == (0,) and eqs == ((1, (F(-1),), F(1)),)
    # x >= 0 and y >= 0 are the same facets once y is eliminated
    assert hull.canonical([0, 1], 0) in _facet_set(hull)
    assert hull.canonical([1, 0], 0) in _facet_set(hull)


def test_single_point():
    hull = convex_hull([(F(1), F(2))])
    assert hull.dimension == 0 and hull.facets == () and hull.vertices == ((F(1), F(2)),)


@settings(max_examples=60)
@given(st.integers(2, 3).flatmap(full_dim_points))
def test_facets_match_brute_force(pts):
    hull = convex_hull(pts)
    assert hull.dimension == len(pts[0])
    assert _facet_set(hull) == brute_force_facets(pts)


@settings(max_examples=60)
@given(st.integers(2, 3).flatmap(full_dim_points))
def test_vertex_facet_incidence(pts):
    hull = convex_hull(pts)
    for v in hull.vertices:
        assert all(c + sum(a * x for a, x in zip(n, v)) >= 0 for n, c in hull.facets)
    for n, c in hull.facets:
        tight = [list(v) + [1] for v in hull.vertices if c + sum(a * x for a, x in zip(n, v)) == 0]
        assert rank(tight) == hull.dimension
    # every input point is a convex combination: it satisfies all facets
    for p in pts:
        assert all(c + sum(a * x for a, x in zip(n, p)) >= 0 for n, c in hull.facets)


@settings(max_examples=60)
@given(st.integers(2, 4).flatmap(full_dim_points), st.booleans())
def test_vertex_facet_round_trip(pts, embed):
    if embed:
        # place the polytope on a hyperplane of a space one dimension higher
        pts = [tuple(p) + (F(1) - sum(p),) for p in pts]
    hull = convex_hull(pts)
    assert tuple(facets_to_vertices(hull)) == hull.vertices
