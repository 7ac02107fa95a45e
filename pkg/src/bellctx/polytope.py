"""Exact polyhedral conversions by the double description method.

Everything runs on Python integers (rays are kept as coprime integer vectors),
so results are exact and independent of any floating-point tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import BudgetExceeded

ZERO = Fraction(0)


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Positive multiple of a rational vector with coprime integer entries."""
    den = 1
    for v in vec:
        d = Fraction(v).denominator
        den = den * d // math.gcd(den, d)
    ints = [int(Fraction(v) * den) for v in vec]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g == 0:
        return tuple(ints)
    return tuple(v // g for v in ints)


def rref(rows: Sequence[Sequence], pivot_order: Sequence[int] | None = None):
    """Reduced row echelon form over the rationals.

    Columns are tried as pivots in ``pivot_order`` (default left to right).
    Returns ``(rows, pivots)`` with zero rows dropped.
    """
    M = [[Fraction(v) for v in row] for row in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    order = list(pivot_order) if pivot_order is not None else list(range(ncols))
    pivots = []
    r = 0
    for c in order:
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        pv = M[r][c]
        M[r] = [v / pv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[tuple[Fraction, ...]]:
    """Basis of ``{v : rows . v = 0}``."""
    if ncols is None:
        ncols = len(rows[0])
    R, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b) if x and y)


def extreme_rays(rows: Sequence[Sequence], max_rays: int | None = None) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone ``{x : rows . x >= 0}``.

    Incremental double description with the combinatorial adjacency test.
    Raises ``ValueError`` if the cone is not pointed (rows do not span).
    """
    A = [primitive(r) for r in rows]
    A = [r for r in A if any(r)]
    if not A:
        raise ValueError("cone is not pointed")
    d = len(A[0])
    # greedy choice of d independent rows for the initial simplicial cone
    chosen: list[int] = []
    echelon: list[list[Fraction]] = []
    piv_cols: list[int] = []
    for i, row in enumerate(A):
        v = [Fraction(x) for x in row]
        for e, pc in zip(echelon, piv_cols):
            if v[pc]:
                f = v[pc] / e[pc]
                v = [a - f * b for a, b in zip(v, e)]
        nz = next((c for c in range(d) if v[c]), None)
        if nz is None:
            continue
        echelon.append(v)
        piv_cols.append(nz)
        chosen.append(i)
        if len(chosen) == d:
            break
    if len(chosen) < d:
        raise ValueError("cone is not pointed")
    # columns of the inverse of the chosen square block are the initial rays
    K = [[Fraction(v) for v in A[i]] for i in chosen]
    aug = [K[r] + [Fraction(int(r == c)) for c in range(d)] for r in range(d)]
    R, _ = rref(aug)
    inv = [row[d:] for row in R]
    rays = [primitive([inv[r][c] for r in range(d)]) for c in range(d)]
    zsets = []
    for c in range(d):
        z = 0
        for r, i in enumerate(chosen):
            if r != c:
                z |= 1 << i
        zsets.append(z)

    chosen_set = set(chosen)
    for i, row in enumerate(A):
        if i in chosen_set:
            continue
        vals = [_dot(row, r) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        bit = 1 << i
        new_rays, new_z = [], []
        for k, v in enumerate(vals):
            if v >= 0:
                new_rays.append(rays[k])
                new_z.append(zsets[k] | (bit if v == 0 else 0))
        if neg and pos:
            all_z = zsets
            for p in pos:
                zp = zsets[p]
                for n in neg:
                    common = zp & zsets[n]
                    if bin(common).count("1") < d - 2:
                        continue
                    if any(k != p and k != n and (z & common) == common for k, z in enumerate(all_z)):
                        continue
                    vp, vn = vals[p], vals[n]
                    ray = primitive([vp * a - vn * b for a, b in zip(rays[n], rays[p])])
                    new_rays.append(ray)
                    new_z.append(common | bit)
        rays, zsets = new_rays, new_z
        if max_rays is not None and len(rays) > max_rays:
            raise BudgetExceeded(f"double description exceeded {max_rays} rays")
    return sorted(set(rays))


def polyhedron_vertices(A_eq: Sequence[Sequence], b_eq: Sequence, nvars: int,
                        max_rays: int | None = None) -> list[tuple[Fraction, ...]]:
    """Vertices of the bounded polyhedron ``{x >= 0 : A_eq x = b_eq}``."""
    hom = [list(row) + [-Fraction(b)] for row, b in zip(A_eq, b_eq)]
    basis = nullspace(hom, nvars + 1) if hom else [
        tuple(Fraction(int(i == j)) for i in range(nvars + 1)) for j in range(nvars + 1)]
    if not basis:
        return []
    N = [[vec[i] for vec in basis] for i in range(nvars + 1)]  # coordinate i as a function of z
    out = set()
    for z in extreme_rays(N, max_rays=max_rays):
        full = [sum((N[i][k] * z[k] for k in range(len(z))), ZERO) for i in range(nvars + 1)]
        t = full[-1]
        if t > 0:
            out.add(tuple(v / t for v in full[:-1]))
    return sorted(out)


@dataclass(frozen=True)
class Hull:
    """V- and H-description of a polytope given by a finite point set.

    ``equalities`` describe the affine hull in solved form: each entry
    ``(coord, coeffs, const)`` means ``x[coord] = const + sum coeffs[j] x[j]``
    over the free coordinates. Facets ``(normal, const)`` read
    ``const + normal . x >= 0`` with coprime integer entries and zero weight on
    the solved-for coordinates, which makes every facet's representation
    unique.
    """

    dimension: int
    ambient: int
    free: tuple[int, ...]
    equalities: tuple[tuple[int, tuple[Fraction, ...], Fraction], ...]
    vertices: tuple[tuple[Fraction, ...], ...]
    facets: tuple[tuple[tuple[int, ...], int], ...]

    def reduce(self, normal: Sequence, const) -> tuple[list[Fraction], Fraction]:
        """Substitute the affine-hull equalities so only free coordinates remain."""
        normal = [Fraction(v) for v in normal]
        const = Fraction(const)
        for coord, coeffs, c in self.equalities:
            w = normal[coord]
            if w:
                normal[coord] = ZERO
                const += w * c
                for j, v in zip(self.free, coeffs):
                    normal[j] += w * v
        return normal, const

    def canonical(self, normal: Sequence, const) -> tuple[tuple[int, ...], int]:
        """Unique representative of an inequality up to hull equalities and positive scale."""
        normal, const = self.reduce(normal, const)
        prim = primitive(list(normal) + [const])
        return tuple(prim[:-1]), prim[-1]

    def lift(self, free_point: Sequence) -> tuple[Fraction, ...]:
        x = [ZERO] * self.ambient
        for j, v in zip(self.free, free_point):
            x[j] = Fraction(v)
        for coord, coeffs, c in self.equalities:
            x[coord] = c + sum((a * x[j] for a, j in zip(coeffs, self.free)), ZERO)
        return tuple(x)


def affine_hull(points: Sequence[Sequence[Fraction]]):
    """Solved-form equalities of the affine hull, eliminating the rightmost coordinates."""
    n = len(points[0])
    M = [list(p) + [Fraction(1)] for p in points]
    eqs = nullspace(M, n + 1)  # (a, c) with a.p + c = 0
    if not eqs:
        return tuple(range(n)), ()
    R, pivots = rref(eqs, pivot_order=list(range(n - 1, -1, -1)))
    free = tuple(j for j in range(n) if j not in pivots)
    solved = []
    for row, p in zip(R, pivots):
        # row: x_p + sum_{free} row[j] x_j + row[n] = 0
        solved.append((p, tuple(-row[j] for j in free), -row[n]))
    solved.sort()
    return free, tuple(solved)


def convex_hull(points: Sequence[Sequence], max_rays: int | None = None) -> Hull:
    pts = sorted({tuple(Fraction(v) for v in p) for p in points})
    if not pts:
        raise ValueError("empty point set")
    n = len(pts[0])
    free, equalities = affine_hull(pts)
    k = len(free)
    proj = sorted({tuple(p[j] for j in free) for p in pts})
    if k == 0:
        return Hull(0, n, free, equalities, (pts[0],), ())
    rows = [list(p) + [Fraction(1)] for p in proj]
    facets = []
    for ray in extreme_rays(rows, max_rays=max_rays):
        normal = [0] * n
        for j, v in zip(free, ray[:-1]):
            normal[j] = v
        facets.append((tuple(normal), ray[-1]))
    facets.sort()
    verts = []
    for p in proj:
        tight = [[f[0][j] for j in free] for f in facets
                 if sum(f[0][j] * v for j, v in zip(free, p)) + f[1] == 0]
        if tight and rank(tight) == k:
            verts.append(p)
    hull = Hull(k, n, free, equalities, (), tuple(facets))
    lifted = tuple(sorted(hull.lift(v) for v in verts))
    return Hull(k, n, free, equalities, lifted, tuple(facets))


def facets_to_vertices(hull: Hull, max_rays: int | None = None) -> list[tuple[Fraction, ...]]:
    """Recover the vertex set from the facet list (the H to V direction)."""
    if hull.dimension == 0:
        return list(hull.vertices)
    rows = [[f[0][j] for j in hull.free] + [f[1]] for f in hull.facets]
    rows.append([0] * hull.dimension + [1])
    out = set()
    for ray in extreme_rays(rows, max_rays=max_rays):
        t = ray[-1]
        if t > 0:
            out.add(hull.lift([Fraction(v, t) for v in ray[:-1]]))
    return sorted(out)
