"""Membership in the local and non-contextual polytopes, with checkable certificates.

Both tests are exact feasibility LPs. A positive answer carries an explicit
classical model (convex weights on deterministic Bell strategies, or measures
over deterministic response assignments); a negative answer carries a linear
inequality obtained from the Farkas vector, valid on the whole polytope and
violated by the input. :func:`verify_certificate` re-checks either kind by
plain arithmetic, without calling the solver.

A finite ontic space is enough on the contextuality side: every response
function is a mixture of deterministic ones, so ``lambda`` ranges over the
assignments ``y -> b`` of outcomes to measurements.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .core import (
    ZERO,
    BellCorrelation,
    BellScenario,
    CtxBehaviour,
    CtxScenario,
    product_cells,
    validate_correlation,
)
from .errors import BudgetExceeded, InvariantFailure
from .lp import Feasible, LinearSystem, integer_scaled, lp_feasibility
from .polytope import Hull, convex_hull, facets_to_vertices, polyhedron_vertices

ATLAS_BUDGET = 4096
VERTEX_BUDGET = 100_000


@dataclass(frozen=True)
class Budget:
    atlas: int = ATLAS_BUDGET
    vertices: int = VERTEX_BUDGET

    @classmethod
    def from_env(cls, override: int | None = None) -> "Budget":
        """``override`` (a CLI flag) wins over ``BELLCTX_BUDGET``; both set both limits."""
        if override is not None:
            return cls(int(override), int(override))
        env = os.environ.get("BELLCTX_BUDGET")
        if env:
            return cls(int(env), int(env))
        return cls()


def _budget(budget):
    return budget if budget is not None else Budget.from_env()


# --------------------------------------------------------------------------
# Bell side


def _strategies(shape: Sequence[int]) -> list[tuple[int, ...]]:
    return list(product_cells(shape))


def local_vertex_count(scenario: BellScenario) -> int:
    n = 1
    for v in scenario.outcomes_A + scenario.outcomes_B:
        n *= v
    return n


def _vertex_pairs(scenario: BellScenario, budget: Budget):
    count = local_vertex_count(scenario)
    if count > budget.vertices:
        raise BudgetExceeded(f"{count} deterministic strategies exceed the vertex budget {budget.vertices}")
    return [(sa, sb) for sa in _strategies(scenario.outcomes_A) for sb in _strategies(scenario.outcomes_B)]


def _vertex_vector(scenario: BellScenario, sa, sb) -> list[int]:
    return [int(sa[x - 1] == a and sb[y - 1] == b) for a, b, x, y in scenario.cells()]


def local_vertices(scenario: BellScenario, budget: Budget | None = None) -> list[BellCorrelation]:
    """All deterministic product correlations ``v_A(a|x) v_B(b|y)``, lexicographic in the strategies."""
    out = []
    for sa, sb in _vertex_pairs(scenario, _budget(budget)):
        table = {cell: Fraction(v) for cell, v in zip(scenario.cells(), _vertex_vector(scenario, sa, sb))}
        out.append(validate_correlation(table, scenario))
    return out


@dataclass(frozen=True)
class BellInequality:
    """``constant + sum coefficients[cell] * p(cell) >= 0`` on the local polytope."""

    scenario: BellScenario
    coefficients: Mapping[tuple[int, int, int, int], Fraction]
    constant: Fraction
    violation: Fraction

    def evaluate(self, p: BellCorrelation) -> Fraction:
        return self.constant + sum((w * p[c] for c, w in self.coefficients.items() if w), ZERO)


@dataclass(frozen=True)
class LocalVerdict:
    member: bool
    weights: tuple[tuple[tuple[int, ...], tuple[int, ...], Fraction], ...] | None = None
    inequality: BellInequality | None = None


def check_local(p: BellCorrelation, budget: Budget | None = None) -> LocalVerdict:
    """Decide whether ``p`` is a convex mixture of deterministic strategies."""
    sc = p.scenario
    pairs = _vertex_pairs(sc, _budget(budget))
    vectors = [_vertex_vector(sc, sa, sb) for sa, sb in pairs]
    cells = list(sc.cells())
    rows = [tuple(v[i] for v in vectors) for i in range(len(cells))]
    rows.append(tuple(1 for _ in vectors))
    rhs = tuple(p[c] for c in cells) + (Fraction(1),)
    result = lp_feasibility(LinearSystem(tuple(rows), rhs))
    if isinstance(result, Feasible):
        weights = tuple((sa, sb, w) for (sa, sb), w in zip(pairs, result.point) if w)
        return LocalVerdict(True, weights=weights)
    y = result.farkas
    coeffs = list(y[:-1])
    # tighten: the smallest value over deterministic points becomes the zero level
    low = min(sum((c for c, v in zip(coeffs, vec) if v), ZERO) for vec in vectors)
    scaled = integer_scaled(coeffs + [-low])
    coeffs, const = list(scaled[:-1]), scaled[-1]
    value = const + sum((c * p[cell] for c, cell in zip(coeffs, cells) if c), ZERO)
    ineq = BellInequality(sc, dict(zip(cells, coeffs)), const, -value)
    return LocalVerdict(False, inequality=ineq)


# --------------------------------------------------------------------------
# contextuality side


def response_function_atlas(scenario: CtxScenario | Sequence[int], budget: Budget | None = None
                            ) -> list[tuple[int, ...]]:
    """Deterministic assignments ``lambda = (b_1, ..., b_Y)``, lexicographic.

    The response function of ``lambda`` is ``xi_y(b|lambda) = [lambda[y-1] == b]``.
    """
    outcomes = scenario.outcomes_B if isinstance(scenario, CtxScenario) else tuple(scenario)
    count = 1
    for v in outcomes:
        count *= v
    limit = _budget(budget).atlas
    if count > limit:
        raise BudgetExceeded(f"{count} response assignments exceed the atlas budget {limit}")
    return _strategies(outcomes)


@dataclass(frozen=True)
class OntologicalModel:
    """Finite non-contextual model: measures over deterministic assignments.

    ``measures[prep][k]`` is the weight the preparation puts on
    ``assignments[k]``.
    """

    assignments: tuple[tuple[int, ...], ...]
    measures: Mapping[str, tuple[Fraction, ...]]


@dataclass(frozen=True)
class NCInequality:
    """``constant + sum coefficients[(prep,y,b)] q(b|prep,y) >= 0`` on the NC polytope.

    ``prep_offsets`` and ``equivalence_multipliers`` (keyed by equivalence
    index and assignment index) are the dual multipliers proving validity:
    for every preparation and assignment the reduced weight
    ``offset + sum_y coeff(prep, y, lambda_y) + sum_e mult(e, lambda) (alpha - beta)``
    is nonnegative, and ``constant`` is the sum of the offsets.
    """

    coefficients: Mapping[tuple[str, int, int], Fraction]
    constant: Fraction
    violation: Fraction
    prep_offsets: Mapping[str, Fraction] = field(default_factory=dict)
    equivalence_multipliers: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    assignments: tuple[tuple[int, ...], ...] = ()

    def evaluate(self, q: CtxBehaviour) -> Fraction:
        return self.constant + sum((w * q[c] for c, w in self.coefficients.items() if w), ZERO)


@dataclass(frozen=True)
class NCVerdict:
    member: bool
    model: OntologicalModel | None = None
    inequality: NCInequality | None = None
    violated_facets: tuple = ()


def _nc_system(scenario: CtxScenario, atlas):
    labels = scenario.prep_labels
    L = len(atlas)
    nvars = len(labels) * L
    col = {(label, k): i * L + k for i, label in enumerate(labels) for k in range(L)}
    rows, kinds = [], []
    for label in labels:
        r = [0] * nvars
        for k in range(L):
            r[col[label, k]] = 1
        rows.append(r)
        kinds.append(("norm", label))
    for e, eq in enumerate(scenario.equivalences):
        for k in range(L):
            r = [ZERO] * nvars
            for label, w in eq.lhs.items():
                r[col[label, k]] += w
            for label, w in eq.rhs.items():
                r[col[label, k]] -= w
            rows.append(r)
            kinds.append(("equiv", e, k))
    for label, y, b in scenario.cells():
        r = [0] * nvars
        for k, lam in enumerate(atlas):
            if lam[y - 1] == b:
                r[col[label, k]] = 1
        rows.append(r)
        kinds.append(("data", label, y, b))
    return rows, kinds, col


def check_noncontextual(q: CtxBehaviour, budget: Budget | None = None,
                        polytope: "NCPolytope | None" = None) -> NCVerdict:
    """Decide whether ``q`` has a non-contextual model in its scenario.

    If ``polytope`` (from :func:`nc_polytope`) is given, a negative verdict
    also lists the polytope facets that ``q`` violates, most violated first.
    """
    sc = q.scenario
    atlas = response_function_atlas(sc, budget)
    rows, kinds, col = _nc_system(sc, atlas)
    rhs = []
    for kind in kinds:
        if kind[0] == "norm":
            rhs.append(Fraction(1))
        elif kind[0] == "equiv":
            rhs.append(ZERO)
        else:
            rhs.append(q[kind[1], kind[2], kind[3]])
    result = lp_feasibility(LinearSystem(tuple(map(tuple, rows)), tuple(rhs)))
    L = len(atlas)
    if isinstance(result, Feasible):
        measures = {label: tuple(result.point[col[label, k]] for k in range(L)) for label in sc.prep_labels}
        return NCVerdict(True, model=OntologicalModel(tuple(atlas), measures))
    y = result.farkas
    offsets, mults, coeffs = {}, {}, {}
    for kind, v in zip(kinds, y):
        if kind[0] == "norm":
            offsets[kind[1]] = v
        elif kind[0] == "equiv":
            mults[kind[1], kind[2]] = v
        else:
            coeffs[kind[1], kind[2], kind[3]] = v
    const = sum(offsets.values(), ZERO)
    value = const + sum((w * q[c] for c, w in coeffs.items() if w), ZERO)
    ineq = NCInequality(coeffs, const, -value, offsets, mults, tuple(atlas))
    violated = ()
    if polytope is not None:
        violated = tuple(polytope.violated_facets(q))
        if violated:
            # a facet is the strongest statement available; prefer the most violated one
            ineq = facet_certificate(q, polytope, violated[0][0], atlas)
    return NCVerdict(False, inequality=ineq, violated_facets=violated)


def _facet_cells(scenario: CtxScenario, coords, facet: "Facet") -> dict:
    coeffs = {cell: ZERO for cell in scenario.cells()}
    for c, coord in zip(facet.coefficients, coords):
        coeffs[coord] = Fraction(c)
    return coeffs


def dual_multipliers(scenario: CtxScenario, coefficients: Mapping, constant, atlas=None):
    """Offsets and equivalence multipliers proving ``constant + coefficients . q >= 0``.

    Returns ``(offsets, multipliers)`` or ``None`` if the inequality is not
    valid on the non-contextual polytope.
    """
    atlas = list(atlas) if atlas is not None else response_function_atlas(scenario)
    labels = scenario.prep_labels
    P, E, L = len(labels), len(scenario.equivalences), len(atlas)
    n_off, n_mult = P, E * L
    nvars = n_off + n_mult + P * L
    rows, rhs = [], []
    for i, label in enumerate(labels):
        for k, lam in enumerate(atlas):
            r = [ZERO] * nvars
            r[i] = Fraction(1)
            for e, eq in enumerate(scenario.equivalences):
                r[n_off + e * L + k] = eq.lhs.get(label, ZERO) - eq.rhs.get(label, ZERO)
            r[n_off + n_mult + i * L + k] = Fraction(-1)
            rows.append(r)
            rhs.append(-sum((coefficients.get((label, y, b), ZERO) for y, b in enumerate(lam, start=1)), ZERO))
    rows.append([Fraction(1)] * P + [ZERO] * (nvars - P))
    rhs.append(Fraction(constant))
    nonneg = frozenset(range(n_off + n_mult, nvars))
    result = lp_feasibility(LinearSystem(tuple(map(tuple, rows)), tuple(rhs), nonneg=nonneg))
    if not isinstance(result, Feasible):
        return None
    x = result.point
    offsets = {label: x[i] for i, label in enumerate(labels)}
    mults = {(e, k): x[n_off + e * L + k] for e in range(E) for k in range(L)}
    return offsets, mults


def facet_certificate(q: CtxBehaviour, polytope: "NCPolytope", facet: "Facet", atlas=None) -> NCInequality:
    """A polytope facet as a self-contained certificate against ``q``."""
    sc = q.scenario
    atlas = list(atlas) if atlas is not None else response_function_atlas(sc)
    coeffs = _facet_cells(sc, polytope.coordinates, facet)
    const = Fraction(facet.constant)
    duals = dual_multipliers(sc, coeffs, const, atlas)
    if duals is None:
        raise InvariantFailure("polytope facet admits no dual certificate")
    value = const + sum((w * q[c] for c, w in coeffs.items() if w), ZERO)
    return NCInequality(coeffs, const, -value, duals[0], duals[1], tuple(atlas))


# --------------------------------------------------------------------------
# the non-contextual polytope


def nc_coordinates(scenario: CtxScenario) -> list[tuple[str, int, int]]:
    """Behaviour coordinates ``q(b|prep,y)`` for ``b < B_y``; the last outcome is implied."""
    return [(label, y, b) for label, y, b in scenario.cells() if b < scenario.outcomes_B[y - 1]]


def behaviour_point(q: CtxBehaviour) -> tuple[Fraction, ...]:
    return tuple(q[c] for c in nc_coordinates(q.scenario))


def coordinate_name(coord: tuple[str, int, int]) -> str:
    label, y, b = coord
    return f"q({b}|{label},{y})"


@dataclass(frozen=True)
class Facet:
    """``constant + sum coefficients[i] * coordinate_i >= 0`` with coprime integers."""

    coefficients: tuple[int, ...]
    constant: int
    positivity: bool = False

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        return self.constant + sum((c * v for c, v in zip(self.coefficients, point) if c), ZERO)

    def format(self, coords) -> str:
        terms = []
        for c, coord in zip(self.coefficients, coords):
            if c:
                name = coordinate_name(coord)
                terms.append(f"{'+' if c > 0 else '-'} {abs(c) if abs(c) != 1 else ''}{'*' if abs(c) != 1 else ''}{name}")
        const = f"{'+' if self.constant >= 0 else '-'} {abs(self.constant)}"
        text = " ".join(terms + [const]).lstrip("+ ")
        if text.startswith("- "):
            text = "-" + text[2:]
        return text + " >= 0"


@dataclass(frozen=True)
class NCPolytope:
    scenario: CtxScenario
    coordinates: tuple[tuple[str, int, int], ...]
    hull: Hull
    facets: tuple[Facet, ...]
    vertices: tuple[tuple[Fraction, ...], ...]
    mu_vertex_count: int

    @property
    def dimension(self) -> int:
        return self.hull.dimension

    @property
    def positivity_count(self) -> int:
        return sum(f.positivity for f in self.facets)

    def canonical(self, coefficients: Mapping[tuple[str, int, int], Fraction] | Sequence, constant
                  ) -> tuple[tuple[int, ...], int]:
        """Canonical facet form of an inequality given in these coordinates or over all cells."""
        if isinstance(coefficients, Mapping):
            normal, constant = _to_free_coordinates(self.scenario, coefficients, constant)
        else:
            normal = list(coefficients)
        return self.hull.canonical(normal, constant)

    def violated_facets(self, q: CtxBehaviour) -> list[tuple[Facet, Fraction]]:
        point = behaviour_point(q)
        out = [(f, -f.evaluate(point)) for f in self.facets if f.evaluate(point) < 0]
        out.sort(key=lambda t: (-t[1], t[0].coefficients, t[0].constant))
        return out

    def contains(self, q: CtxBehaviour) -> bool:
        point = behaviour_point(q)
        lifted = self.hull.lift([point[j] for j in self.hull.free])
        return lifted == point and all(f.evaluate(point) >= 0 for f in self.facets)


def _to_free_coordinates(scenario, coefficients, constant):
    """Rewrite an inequality over all cells using ``q(B_y) = 1 - sum_{b<B_y} q(b)``."""
    coords = nc_coordinates(scenario)
    index = {c: i for i, c in enumerate(coords)}
    normal = [ZERO] * len(coords)
    constant = Fraction(constant)
    for (label, y, b), w in coefficients.items():
        if not w:
            continue
        By = scenario.outcomes_B[y - 1]
        if b < By:
            normal[index[label, y, b]] += w
        else:
            constant += w
            for bb in range(1, By):
                normal[index[label, y, bb]] -= w
    return normal, constant


def nc_polytope(scenario: CtxScenario, budget: Budget | None = None) -> NCPolytope:
    """V- and H-description of the non-contextual polytope of ``scenario``.

    Vertices of the polytope of admissible measures are enumerated by double
    description, projected onto behaviour coordinates, deduplicated, and their
    convex hull computed. Facets are written in canonical form: coprime
    integers, zero weight on the coordinates solved for by the affine hull.
    """
    budget = _budget(budget)
    atlas = response_function_atlas(scenario, budget)
    rows, kinds, col = _nc_system(scenario, atlas)
    eq_rows = [r for r, k in zip(rows, kinds) if k[0] != "data"]
    eq_rhs = [Fraction(1) if k[0] == "norm" else ZERO for k in kinds if k[0] != "data"]
    nvars = len(scenario.prep_labels) * len(atlas)
    mu_vertices = polyhedron_vertices(eq_rows, eq_rhs, nvars, max_rays=budget.vertices)
    coords = nc_coordinates(scenario)
    L = len(atlas)
    points = set()
    for mu in mu_vertices:
        point = []
        for label, y, b in coords:
            point.append(sum((mu[col[label, k]] for k, lam in enumerate(atlas) if lam[y - 1] == b), ZERO))
        points.add(tuple(point))
    if len(points) > budget.vertices:
        raise BudgetExceeded(f"{len(points)} projected points exceed the vertex budget")
    hull = convex_hull(sorted(points), max_rays=budget.vertices)
    positivity = set()
    for label, y, b in scenario.cells():
        normal, const = _to_free_coordinates(scenario, {(label, y, b): Fraction(1)}, 0)
        positivity.add(hull.canonical(normal, const))
    facets = tuple(Facet(n, c, (n, c) in positivity) for n, c in hull.facets)
    return NCPolytope(scenario, tuple(coords), hull, facets, hull.vertices, len(mu_vertices))


def polytope_self_check(poly: NCPolytope, budget: Budget | None = None) -> bool:
    """V to H to V round trip: the facets give back exactly the vertex list."""
    return tuple(facets_to_vertices(poly.hull, max_rays=_budget(budget).vertices)) == poly.vertices


# --------------------------------------------------------------------------
# certificate verification


@dataclass
class CertificateCheck:
    ok: bool
    defects: list[str] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)

    def fail(self, message: str) -> None:
        self.ok = False
        self.defects.append(message)


def _verify_local(p: BellCorrelation, verdict: LocalVerdict) -> CertificateCheck:
    sc = p.scenario
    check = CertificateCheck(True)
    if verdict.member:
        if verdict.weights is None:
            check.fail("member verdict without weights")
            return check
        total = ZERO
        mix = {cell: ZERO for cell in sc.cells()}
        for idx, (sa, sb, w) in enumerate(verdict.weights):
            if len(sa) != sc.inputs_X or len(sb) != sc.inputs_Y or any(
                    not 1 <= a <= n for a, n in zip(sa, sc.outcomes_A)) or any(
                    not 1 <= b <= n for b, n in zip(sb, sc.outcomes_B)):
                check.fail(f"weight {idx}: strategy {sa},{sb} is not a deterministic strategy of the scenario")
                continue
            if w < 0:
                check.fail(f"weight {idx}: negative weight {w} on strategy {sa},{sb}")
            total += w
            for y, b in enumerate(sb, start=1):
                for x, a in enumerate(sa, start=1):
                    mix[a, b, x, y] += w
        if total != 1:
            check.fail(f"weights sum to {total}, not 1")
        for cell in sc.cells():
            if mix[cell] != p[cell]:
                check.fail(f"cell (a,b,x,y)={cell}: mixture gives {mix[cell]}, correlation has {p[cell]}")
        check.counts = {"weights": len(verdict.weights), "cells": sc.num_cells()}
        return check
    ineq = verdict.inequality
    if ineq is None:
        check.fail("non-member verdict without an inequality")
        return check
    count = 0
    for sa in _strategies(sc.outcomes_A):
        for sb in _strategies(sc.outcomes_B):
            count += 1
            value = ineq.constant + sum((w for (a, b, x, y), w in ineq.coefficients.items()
                                         if w and sa[x - 1] == a and sb[y - 1] == b), ZERO)
            if value < 0:
                check.fail(f"inequality fails on deterministic strategy A={sa}, B={sb} (value {value})")
    actual = -ineq.evaluate(p)
    if actual <= 0:
        check.fail(f"inequality is not violated (value {-actual})")
    if actual != ineq.violation:
        check.fail(f"claimed violation {ineq.violation} but the correlation violates by {actual}")
    check.counts = {"vertices": count}
    return check


def _verify_model(q: CtxBehaviour, model: OntologicalModel) -> CertificateCheck:
    sc = q.scenario
    check = CertificateCheck(True)
    for k, lam in enumerate(model.assignments):
        if len(lam) != sc.num_measurements or any(not 1 <= b <= n for b, n in zip(lam, sc.outcomes_B)):
            check.fail(f"ontic state {k}: {lam} is not a deterministic assignment")
    if not check.ok:
        return check
    L = len(model.assignments)
    counts = {"normalisations": 0, "equivalence_equalities": 0, "data_equalities": 0}
    if set(model.measures) != set(sc.prep_labels):
        check.fail("measures do not cover exactly the scenario's preparations")
        return check
    for label in sc.prep_labels:
        mu = model.measures[label]
        if len(mu) != L:
            check.fail(f"preparation {label}: {len(mu)} weights for {L} ontic states")
            return check
        for k, w in enumerate(mu):
            if w < 0:
                check.fail(f"preparation {label}, ontic state {k}: negative weight {w}")
        counts["normalisations"] += 1
        if sum(mu, ZERO) != 1:
            check.fail(f"preparation {label}: weights sum to {sum(mu, ZERO)}")
    for e, eq in enumerate(sc.equivalences):
        for k in range(L):
            counts["equivalence_equalities"] += 1
            left = sum((w * model.measures[p][k] for p, w in eq.lhs.items()), ZERO)
            right = sum((w * model.measures[p][k] for p, w in eq.rhs.items()), ZERO)
            if left != right:
                check.fail(f"equivalence {e}, ontic state {k}: {left} != {right}")
    for label in sc.prep_labels:
        mu = model.measures[label]
        for y, By in enumerate(sc.outcomes_B, start=1):
            counts["data_equalities"] += 1
            for b in range(1, By + 1):
                got = sum((w for w, lam in zip(mu, model.assignments) if lam[y - 1] == b), ZERO)
                if got != q[label, y, b]:
                    check.fail(f"q({b}|{label},{y}): model gives {got}, behaviour has {q[label, y, b]}")
    check.counts = counts
    return check


def _verify_nc_inequality(q: CtxBehaviour, ineq: NCInequality,
                          vertices: Sequence[Sequence[Fraction]] | None) -> CertificateCheck:
    sc = q.scenario
    check = CertificateCheck(True)
    full_atlas = tuple(_strategies(sc.outcomes_B))
    if ineq.assignments != full_atlas:
        check.fail("multipliers are not indexed by the complete set of deterministic assignments")
        return check
    if set(ineq.prep_offsets) != set(sc.prep_labels):
        check.fail("offsets do not cover exactly the scenario's preparations")
        return check
    if sum(ineq.prep_offsets.values(), ZERO) != ineq.constant:
        check.fail(f"constant {ineq.constant} differs from the sum of offsets {sum(ineq.prep_offsets.values(), ZERO)}")
    columns = 0
    for label in sc.prep_labels:
        for k, lam in enumerate(full_atlas):
            columns += 1
            value = ineq.prep_offsets[label]
            value += sum((ineq.coefficients.get((label, y, b), ZERO) for y, b in enumerate(lam, start=1)), ZERO)
            for e, eq in enumerate(sc.equivalences):
                m = ineq.equivalence_multipliers.get((e, k), ZERO)
                if m:
                    value += m * (eq.lhs.get(label, ZERO) - eq.rhs.get(label, ZERO))
            if value < 0:
                check.fail(f"dual check fails at preparation {label}, assignment {lam} (reduced weight {value})")
    if vertices is not None:
        coords = nc_coordinates(sc)
        normal, const = _to_free_coordinates(sc, ineq.coefficients, ineq.constant)
        for v in vertices:
            value = const + sum((c * x for c, x in zip(normal, v) if c), ZERO)
            if value < 0:
                check.fail(f"inequality fails on polytope vertex {[str(x) for x in v]} over {len(coords)} coordinates")
    actual = -ineq.evaluate(q)
    if actual <= 0:
        check.fail(f"inequality is not violated (value {-actual})")
    if actual != ineq.violation:
        check.fail(f"claimed violation {ineq.violation} but the behaviour violates by {actual}")
    check.counts = {"dual_columns": columns}
    return check


def verify_certificate(obj, verdict, vertices: Sequence[Sequence[Fraction]] | None = None) -> CertificateCheck:
    """Re-check a verdict's certificate against ``obj`` by exact arithmetic only."""
    if isinstance(verdict, LocalVerdict):
        return _verify_local(obj, verdict)
    if isinstance(verdict, NCVerdict):
        if verdict.member:
            if verdict.model is None:
                check = CertificateCheck(True)
                check.fail("member verdict without a model")
                return check
            return _verify_model(obj, verdict.model)
        if verdict.inequality is None:
            check = CertificateCheck(True)
            check.fail("non-member verdict without an inequality")
            return check
        return _verify_nc_inequality(obj, verdict.inequality, vertices)
    if isinstance(verdict, OntologicalModel):
        return _verify_model(obj, verdict)
    raise TypeError(f"cannot verify {type(verdict).__name__}")


def verify_facet(poly: NCPolytope, facet: Facet) -> CertificateCheck:
    """A facet must hold on every vertex and be tight on an affinely spanning subset."""
    check = CertificateCheck(True)
    tight = []
    for v in poly.vertices:
        value = facet.evaluate(v)
        if value < 0:
            check.fail(f"facet fails on vertex {[str(x) for x in v]}")
        elif value == 0:
            tight.append([v[j] for j in poly.hull.free] + [Fraction(1)])
    from .polytope import rank
    if tight and rank(tight) < poly.dimension:
        check.fail(f"facet is tight on a set of affine rank {rank(tight)} < {poly.dimension}")
    check.counts = {"vertices": len(poly.vertices), "tight": len(tight)}
    return check


def deterministic_model_assignments(response: Sequence[Sequence[int]], measurement_order: Sequence[int] | None = None
                                    ) -> tuple[tuple[int, ...], ...]:
    """Assignments from a table ``response[y][k]`` = outcome of measurement ``y`` on ontic state ``k``.

    ``measurement_order[i]`` names which row of ``response`` plays measurement
    ``i + 1`` of the scenario; use it when a model's measurement labels are
    permuted relative to the behaviour's.
    """
    order = list(measurement_order) if measurement_order is not None else list(range(len(response)))
    n_states = len(response[0])
    return tuple(tuple(response[order[i]][k] for i in range(len(order))) for k in range(n_states))


__all__ = [name for name in dir() if not name.startswith("_") and name not in {"annotations", "itertools", "os"}]
