"""Random exact test objects.

All generators take a ``random.Random`` so runs are reproducible from a seed.
Probabilities are built from small random integers, keeping denominators
modest and the exact arithmetic fast.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Mapping, Sequence

from .core import (
    ZERO,
    BellCorrelation,
    BellScenario,
    CtxBehaviour,
    CtxScenario,
    canonical_ns_equivalence,
    prep_label,
    product_cells,
    validate_behaviour,
    validate_correlation,
)
from .lp import LinearSystem, Optimal, lp_minimize


def random_distribution(rng: random.Random, n: int, zeros: bool = False, scale: int = 12) -> list[Fraction]:
    """Random probability vector of length ``n``; strictly positive unless ``zeros``."""
    low = 0 if zeros else 1
    while True:
        w = [rng.randint(low, scale) for _ in range(n)]
        total = sum(w)
        if total:
            return [Fraction(v, total) for v in w]


def random_scenario(rng: random.Random, max_inputs: int = 3, max_outcomes: int = 3) -> BellScenario:
    X, Y = rng.randint(1, max_inputs), rng.randint(1, max_inputs)
    return BellScenario(tuple(rng.randint(2, max_outcomes) for _ in range(X)),
                        tuple(rng.randint(2, max_outcomes) for _ in range(Y)))


def _allowed(scenario: BellScenario, allowed):
    if allowed is None:
        return [list(range(1, n + 1)) for n in scenario.outcomes_A]
    return [sorted(allowed[x]) for x in range(1, scenario.inputs_X + 1)]


def random_local(scenario: BellScenario, rng: random.Random, terms: int = 3,
                 allowed: Mapping[int, Sequence[int]] | None = None) -> BellCorrelation:
    """Convex mixture of random deterministic strategies; Alice only uses ``allowed[x]``."""
    options = _allowed(scenario, allowed)
    weights = random_distribution(rng, terms)
    table = {cell: ZERO for cell in scenario.cells()}
    for w in weights:
        sa = [rng.choice(opts) for opts in options]
        sb = [rng.randint(1, n) for n in scenario.outcomes_B]
        for x, a in enumerate(sa, start=1):
            for y, b in enumerate(sb, start=1):
                table[a, b, x, y] += w
    return validate_correlation(table, scenario)


def ns_system(scenario: BellScenario, allowed: Mapping[int, Sequence[int]] | None = None):
    """Equality rows of the no-signalling polytope over the cells (all variables nonnegative)."""
    cells = list(scenario.cells())
    index = {c: i for i, c in enumerate(cells)}
    n = len(cells)
    rows, rhs = [], []

    def row(entries):
        r = [0] * n
        for c, v in entries:
            r[index[c]] += v
        return r

    A, B = scenario.outcomes_A, scenario.outcomes_B
    for x in range(1, len(A) + 1):
        for y in range(1, len(B) + 1):
            rows.append(row([((a, b, x, y), 1) for a in range(1, A[x - 1] + 1) for b in range(1, B[y - 1] + 1)]))
            rhs.append(1)
    for x in range(1, len(A) + 1):
        for a in range(1, A[x - 1] + 1):
            for y in range(2, len(B) + 1):
                rows.append(row([((a, b, x, y), 1) for b in range(1, B[y - 1] + 1)]
                                + [((a, b, x, 1), -1) for b in range(1, B[0] + 1)]))
                rhs.append(0)
    for y in range(1, len(B) + 1):
        for b in range(1, B[y - 1] + 1):
            for x in range(2, len(A) + 1):
                rows.append(row([((a, b, x, y), 1) for a in range(1, A[x - 1] + 1)]
                                + [((a, b, 1, y), -1) for a in range(1, A[0] + 1)]))
                rhs.append(0)
    if allowed is not None:
        for c in cells:
            a, _, x, _ = c
            if a not in allowed[x]:
                rows.append(row([(c, 1)]))
                rhs.append(0)
    return cells, rows, rhs


def ns_vertex(scenario: BellScenario, rng: random.Random,
              allowed: Mapping[int, Sequence[int]] | None = None) -> BellCorrelation:
    """A vertex of the no-signalling polytope: the optimum of a random integer objective."""
    cells, rows, rhs = ns_system(scenario, allowed)
    objective = [rng.randint(-9, 9) for _ in cells]
    result = lp_minimize(LinearSystem(tuple(map(tuple, rows)), tuple(rhs), objective=tuple(objective)))
    assert isinstance(result, Optimal)
    return validate_correlation(dict(zip(cells, result.point)), scenario)


def relabel(p: BellCorrelation, rng: random.Random) -> BellCorrelation:
    """Random permutation of inputs and of each input's outcomes, on both sides."""
    sc = p.scenario
    px = list(range(1, sc.inputs_X + 1))
    py = list(range(1, sc.inputs_Y + 1))
    rng.shuffle(px)
    rng.shuffle(py)
    # new input x reads old input px[x-1]
    A = tuple(sc.outcomes_A[px[x] - 1] for x in range(sc.inputs_X))
    B = tuple(sc.outcomes_B[py[y] - 1] for y in range(sc.inputs_Y))
    pa = []
    for n in A:
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        pa.append(perm)
    pb = []
    for n in B:
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        pb.append(perm)
    target = BellScenario(A, B)
    table = {}
    for a, b, x, y in target.cells():
        table[a, b, x, y] = p[pa[x - 1][a - 1], pb[y - 1][b - 1], px[x - 1], py[y - 1]]
    return validate_correlation(table, target)


class NSSampler:
    """Random no-signalling correlations: relabelled NS vertices, local mixtures, and blends.

    Vertices found by LP are cached per scenario and reused through random
    relabellings, which map vertices to vertices.
    """

    def __init__(self, rng: random.Random, pool: int = 4):
        self.rng = rng
        self.pool = pool
        self._cache: dict = {}

    def vertex(self, scenario: BellScenario) -> BellCorrelation:
        key = scenario
        found = self._cache.setdefault(key, [])
        if len(found) < self.pool:
            v = ns_vertex(scenario, self.rng)
            found.append(v)
            return v
        while True:
            v = relabel(self.rng.choice(found), self.rng)
            if v.scenario == scenario:
                return v

    def sample(self, scenario: BellScenario, kind: str | None = None) -> BellCorrelation:
        kind = kind or self.rng.choice(["local", "vertex", "blend"])
        if kind == "local":
            return random_local(scenario, self.rng, terms=self.rng.randint(1, 4))
        v = self.vertex(scenario)
        if kind == "vertex":
            return v
        loc = random_local(scenario, self.rng)
        w = Fraction(self.rng.randint(1, 9), 10)
        return validate_correlation({c: w * v[c] + (1 - w) * loc[c] for c in scenario.cells()}, scenario)


def planted_ns(scenario: BellScenario, rng: random.Random, deterministic: int = 1, zeros: int = 1) -> BellCorrelation:
    """NS correlation where some Alice inputs are deterministic and some outcomes never occur."""
    inputs = list(range(1, scenario.inputs_X + 1))
    rng.shuffle(inputs)
    allowed = {x: list(range(1, scenario.outcomes_A[x - 1] + 1)) for x in inputs}
    for x in inputs[:deterministic]:
        allowed[x] = [rng.choice(allowed[x])]
    for x in inputs[deterministic:deterministic + zeros]:
        if len(allowed[x]) > 2:
            allowed[x].remove(rng.choice(allowed[x]))
        else:
            allowed[x] = [rng.choice(allowed[x])]
    v = ns_vertex(scenario, rng, allowed)
    loc = random_local(scenario, rng, terms=4, allowed=allowed)
    w = Fraction(rng.randint(0, 9), 10)
    return validate_correlation({c: w * v[c] + (1 - w) * loc[c] for c in scenario.cells()}, scenario)


def plant_signalling(p: BellCorrelation, rng: random.Random) -> tuple[BellCorrelation, Fraction, int]:
    """Shift Bob's marginal on one Alice input ``x > 1`` by a random amount.

    Mass moves from ``(a, b, x, y)`` to ``(a, b', x, y)``, so Alice's marginal
    is untouched. Returns ``(table, shift, x)``; the map's equivalence anchored
    between input 1 and input ``x`` then has residual exactly ``shift``.
    """
    sc = p.scenario
    if sc.inputs_X < 2:
        raise ValueError("need at least two Alice inputs")
    cands = [(a, b, x, y) for a, b, x, y in sc.cells()
             if x > 1 and p[a, b, x, y] > 0 and sc.outcomes_B[y - 1] > 1]
    if not cands:
        raise ValueError("no cell with a second Bob outcome to shift mass to")
    a, b, x, y = rng.choice(cands)
    b2 = rng.choice([c for c in range(1, sc.outcomes_B[y - 1] + 1) if c != b])
    shift = p[a, b, x, y] * Fraction(rng.randint(1, 4), 4)
    table = {c: p[c] for c in sc.cells()}
    table[a, b, x, y] -= shift
    table[a, b2, x, y] += shift
    return validate_correlation(table, sc), shift, x


def _ns_form_scenario(p_A: Mapping[tuple[int, int], Fraction], index_A, outcomes_B) -> CtxScenario:
    labels = tuple(prep_label(a, x) for x, Ax in enumerate(index_A, start=1)
                   for a in range(1, Ax + 1) if p_A[a, x] > 0)
    return CtxScenario(labels, tuple(outcomes_B), tuple(canonical_ns_equivalence(dict(p_A))), tuple(index_A))


def _random_marginal(rng, index_A, zeros):
    p_A = {}
    for x, Ax in enumerate(index_A, start=1):
        while True:
            w = random_distribution(rng, Ax, zeros=zeros)
            if sum(1 for v in w if v) >= 1:
                break
        for a, v in enumerate(w, start=1):
            p_A[a, x] = v
    return p_A


def random_ns_form_behaviour(rng: random.Random, index_A: Sequence[int], outcomes_B: Sequence[int],
                             zeros: bool = True) -> CtxBehaviour:
    """Random behaviour in the contextual set of a random NS-form scenario.

    Rows are ``Q(.|y) + t * delta_{a|x}(.|y)`` with the deltas summing to
    zero over ``b`` and averaging to zero under Alice's weights, and ``t``
    small enough to keep every entry nonnegative.
    """
    p_A = _random_marginal(rng, index_A, zeros)
    sc = _ns_form_scenario(p_A, index_A, outcomes_B)
    table = {}
    for y, By in enumerate(outcomes_B, start=1):
        Q = random_distribution(rng, By)
        for x, Ax in enumerate(index_A, start=1):
            support = [a for a in range(1, Ax + 1) if p_A[a, x] > 0]
            delta = {}
            for a in support:
                d = [Fraction(rng.randint(-5, 5)) for _ in range(By)]
                mean = sum(d) / By
                delta[a] = [v - mean for v in d]
            avg = [sum(p_A[a, x] * delta[a][b] for a in support) for b in range(By)]
            for a in support:
                delta[a] = [v - m for v, m in zip(delta[a], avg)]
            limits = [Q[b] / -delta[a][b] for a in support for b in range(By) if delta[a][b] < 0]
            t = min(limits) * Fraction(rng.randint(0, 4), 4) if limits else ZERO
            for a in support:
                for b in range(1, By + 1):
                    table[prep_label(a, x), y, b] = Q[b - 1] + t * delta[a][b - 1]
    return validate_behaviour(table, sc)


def random_nc_behaviour(rng: random.Random, index_A: Sequence[int], outcomes_B: Sequence[int],
                        zeros: bool = True) -> CtxBehaviour:
    """Random non-contextual behaviour of an NS-form scenario, built from an explicit model.

    A measure ``mu`` over deterministic assignments is split, for every input
    ``x``, by a random stochastic map ``kappa_x(a|lambda)``; each part becomes
    the measure of preparation ``[a|x]``, so the parts average back to ``mu``.
    """
    atlas = list(product_cells(outcomes_B))
    k = rng.randint(1, min(len(atlas), 5))
    chosen = rng.sample(range(len(atlas)), k)
    mu = dict(zip(chosen, random_distribution(rng, k)))
    parts = {}
    p_A = {}
    for x, Ax in enumerate(index_A, start=1):
        for lam in chosen:
            split = random_distribution(rng, Ax, zeros=zeros)
            for a, v in enumerate(split, start=1):
                parts[a, x, lam] = mu[lam] * v
        for a in range(1, Ax + 1):
            p_A[a, x] = sum((parts[a, x, lam] for lam in chosen), ZERO)
    sc = _ns_form_scenario(p_A, index_A, outcomes_B)
    table = {}
    for x, Ax in enumerate(index_A, start=1):
        for a in range(1, Ax + 1):
            if p_A[a, x] == 0:
                continue
            for y, By in enumerate(outcomes_B, start=1):
                for b in range(1, By + 1):
                    mass = sum((parts[a, x, lam] for lam in chosen if atlas[lam][y - 1] == b), ZERO)
                    table[prep_label(a, x), y, b] = mass / p_A[a, x]
    return validate_behaviour(table, sc)
