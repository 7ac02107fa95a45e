"""Exact data model for Bell scenarios and prepare-and-measure scenarios.

All probabilities are :class:`fractions.Fraction` values. ``Fraction`` already
keeps numerator and denominator coprime with a positive denominator, so two
equal probabilities always compare equal and every residual below is exact.

Labels are 1-based everywhere. Preparations are identified by string labels;
a preparation obtained from Alice's outcome ``a`` on input ``x`` is labelled
``"a|x"``, but plain labels such as ``"3"`` are allowed for scenarios that do
not come from a Bell experiment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Iterator, Mapping

from .errors import (
    IndexTooSmall,
    InvalidEquivalence,
    MalformedTable,
    NormalisationError,
    SignallingInput,
    UnknownLabel,
)

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def to_rational(value) -> Fraction:
    """Parse an exact rational from an int, Fraction or ``"num/den"`` string.

    Floats are rejected: a float literal such as ``0.1`` is not the rational
    the user meant, and silently converting it would defeat exact checking.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, _RationalABC):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in ".eE"):
            raise ValueError(f"not an exact rational: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot read {type(value).__name__} as an exact rational")


def fmt_rational(value: Fraction) -> str:
    return str(value)


# --------------------------------------------------------------------------
# preparation labels


def prep_label(a: int, x: int) -> str:
    return f"{a}|{x}"


def parse_prep_label(label: str) -> tuple[int, int] | None:
    """Return ``(a, x)`` for a label of the form ``"a|x"``, else ``None``."""
    head, sep, tail = label.partition("|")
    if not sep:
        return None
    try:
        a, x = int(head), int(tail)
    except ValueError:
        return None
    if a < 1 or x < 1:
        return None
    return a, x


def label_sort_key(label: str):
    parsed = parse_prep_label(label)
    if parsed is not None:
        a, x = parsed
        return (0, x, a, "")
    try:
        return (1, int(label), 0, "")
    except ValueError:
        return (2, 0, 0, label)


# --------------------------------------------------------------------------
# Bell side


@dataclass(frozen=True)
class BellScenario:
    """Shape ``(A, B, X, Y)`` of a bipartite Bell scenario.

    ``outcomes_A[x-1]`` is the number of outcomes of Alice's input ``x``.
    """

    outcomes_A: tuple[int, ...]
    outcomes_B: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes_A", tuple(int(v) for v in self.outcomes_A))
        object.__setattr__(self, "outcomes_B", tuple(int(v) for v in self.outcomes_B))
        if not self.outcomes_A or not self.outcomes_B:
            raise MalformedTable("a Bell scenario needs at least one input per party")
        if any(v < 1 for v in self.outcomes_A + self.outcomes_B):
            raise MalformedTable("outcome counts must be positive integers")

    @property
    def inputs_X(self) -> int:
        return len(self.outcomes_A)

    @property
    def inputs_Y(self) -> int:
        return len(self.outcomes_B)

    @property
    def norm_A(self) -> int:
        return sum(self.outcomes_A)

    @property
    def norm_B(self) -> int:
        return sum(self.outcomes_B)

    def cells(self) -> Iterator[tuple[int, int, int, int]]:
        """All ``(a, b, x, y)`` in canonical order (by x, y, a, b)."""
        for x, Ax in enumerate(self.outcomes_A, start=1):
            for y, By in enumerate(self.outcomes_B, start=1):
                for a in range(1, Ax + 1):
                    for b in range(1, By + 1):
                        yield a, b, x, y

    def num_cells(self) -> int:
        return self.norm_A * self.norm_B


@dataclass(frozen=True, eq=True)
class BellCorrelation:
    """A validated table ``p(a,b|x,y)``. Build it with :func:`validate_correlation`."""

    scenario: BellScenario
    table: Mapping[tuple[int, int, int, int], Fraction] = field(repr=False)

    def __getitem__(self, key: tuple[int, int, int, int]) -> Fraction:
        return self.table[key]

    def __hash__(self):
        return hash((self.scenario, tuple(self.table[c] for c in self.scenario.cells())))

    def values(self) -> list[Fraction]:
        return [self.table[c] for c in self.scenario.cells()]


def _check_distribution_rows(rows: dict, kind: str) -> list[dict]:
    violations = []
    for key, entries in rows.items():
        for cell, v in entries:
            if v < 0:
                violations.append({"kind": "negative", "cell": cell, "value": str(v)})
        total = sum((v for _, v in entries), ZERO)
        if total != 1:
            violations.append({"kind": "normalisation", kind: key, "sum": str(total)})
    return violations


def validate_correlation(raw: Mapping, scenario: BellScenario) -> BellCorrelation:
    """Check ``raw`` against ``scenario`` and return a :class:`BellCorrelation`.

    ``raw`` maps ``(a, b, x, y)`` (or the string ``"a,b,x,y"``) to something
    :func:`to_rational` accepts. Every defect is collected before raising.
    """
    table: dict[tuple[int, int, int, int], Fraction] = {}
    shape_problems = []
    for key, value in raw.items():
        if isinstance(key, str):
            try:
                key = tuple(int(t) for t in key.split(","))
            except ValueError:
                shape_problems.append({"kind": "bad-key", "cell": key})
                continue
        key = tuple(key)
        if len(key) != 4:
            shape_problems.append({"kind": "arity", "cell": list(key)})
            continue
        a, b, x, y = key
        if not (1 <= x <= scenario.inputs_X and 1 <= y <= scenario.inputs_Y
                and 1 <= a <= scenario.outcomes_A[x - 1] and 1 <= b <= scenario.outcomes_B[y - 1]):
            shape_problems.append({"kind": "out-of-range", "cell": list(key)})
            continue
        try:
            table[key] = to_rational(value)
        except (TypeError, ValueError) as exc:
            shape_problems.append({"kind": "unparseable", "cell": list(key), "detail": str(exc)})
    for cell in scenario.cells():
        if cell not in table and not any(v.get("cell") == list(cell) for v in shape_problems):
            shape_problems.append({"kind": "missing", "cell": list(cell)})
    if shape_problems:
        raise MalformedTable("correlation table does not match the scenario", shape_problems)

    rows: dict[tuple[int, int], list] = {}
    for cell in scenario.cells():
        a, b, x, y = cell
        rows.setdefault((x, y), []).append((list(cell), table[cell]))
    violations = _check_distribution_rows(rows, "xy")
    if violations:
        bad = sorted({tuple(v["xy"]) for v in violations if "xy" in v}
                     | {tuple(v["cell"][2:]) for v in violations if "cell" in v})
        raise NormalisationError(f"invalid probabilities at (x,y) in {bad}", violations)
    ordered = {cell: table[cell] for cell in scenario.cells()}
    return BellCorrelation(scenario, ordered)


@dataclass(frozen=True)
class Marginals:
    p_A: Mapping[tuple[int, int], Fraction]
    p_B: Mapping[tuple[int, int], Fraction]
    alice_well_defined: bool
    bob_well_defined: bool

    @property
    def well_defined(self) -> bool:
        return self.alice_well_defined and self.bob_well_defined

    def alice_support(self, x: int) -> list[int]:
        return sorted(a for (a, xx), v in self.p_A.items() if xx == x and v > 0)


def marginals(c: BellCorrelation) -> Marginals:
    """Alice's marginal read at y=1, Bob's at x=1, each flagged if another slice disagrees."""
    sc = c.scenario
    p_A, p_B = {}, {}
    alice_ok = bob_ok = True
    for x, Ax in enumerate(sc.outcomes_A, start=1):
        for a in range(1, Ax + 1):
            slices = [sum((c[a, b, x, y] for b in range(1, By + 1)), ZERO)
                      for y, By in enumerate(sc.outcomes_B, start=1)]
            p_A[a, x] = slices[0]
            alice_ok = alice_ok and all(s == slices[0] for s in slices)
    for y, By in enumerate(sc.outcomes_B, start=1):
        for b in range(1, By + 1):
            slices = [sum((c[a, b, x, y] for a in range(1, Ax + 1)), ZERO)
                      for x, Ax in enumerate(sc.outcomes_A, start=1)]
            p_B[b, y] = slices[0]
            bob_ok = bob_ok and all(s == slices[0] for s in slices)
    return Marginals(p_A, p_B, alice_ok, bob_ok)


@dataclass(frozen=True)
class NSCheck:
    verdict: bool
    residual: Fraction


def check_no_signalling(c: BellCorrelation) -> NSCheck:
    """Largest absolute violation among all pairwise no-signalling constraints."""
    sc = c.scenario
    worst = ZERO
    for x, Ax in enumerate(sc.outcomes_A, start=1):
        for a in range(1, Ax + 1):
            slices = [sum((c[a, b, x, y] for b in range(1, By + 1)), ZERO)
                      for y, By in enumerate(sc.outcomes_B, start=1)]
            worst = max(worst, max(slices) - min(slices))
    for y, By in enumerate(sc.outcomes_B, start=1):
        for b in range(1, By + 1):
            slices = [sum((c[a, b, x, y] for a in range(1, Ax + 1)), ZERO)
                      for x, Ax in enumerate(sc.outcomes_A, start=1)]
            worst = max(worst, max(slices) - min(slices))
    return NSCheck(worst == 0, worst)


# --------------------------------------------------------------------------
# contextuality side


@dataclass(frozen=True)
class PreparationEquivalence:
    """``sum lhs[P] P  ~  sum rhs[P] P`` with both sides probability distributions.

    Zero coefficients are dropped on construction: a preparation with
    coefficient zero does not appear in the equivalence. The single vacuous
    equivalence (both sides empty) is allowed so that normal-form reduction of
    an identity can be represented.
    """

    lhs: Mapping[str, Fraction]
    rhs: Mapping[str, Fraction]

    def __post_init__(self):
        lhs = {str(k): to_rational(v) for k, v in self.lhs.items()}
        rhs = {str(k): to_rational(v) for k, v in self.rhs.items()}
        for side in (lhs, rhs):
            if any(v < 0 for v in side.values()):
                raise InvalidEquivalence("equivalence coefficients must be nonnegative")
        lhs = {k: lhs[k] for k in sorted(lhs, key=label_sort_key) if lhs[k] != 0}
        rhs = {k: rhs[k] for k in sorted(rhs, key=label_sort_key) if rhs[k] != 0}
        if lhs or rhs:
            for name, side in (("lhs", lhs), ("rhs", rhs)):
                if sum(side.values(), ZERO) != 1:
                    raise InvalidEquivalence(f"{name} coefficients sum to {sum(side.values(), ZERO)}, not 1")
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)

    @property
    def is_vacuous(self) -> bool:
        return not self.lhs and not self.rhs

    def labels(self) -> set[str]:
        return set(self.lhs) | set(self.rhs)

    def __hash__(self):
        return hash((tuple(self.lhs.items()), tuple(self.rhs.items())))

    def __str__(self):
        def side(d):
            return " + ".join(f"{v}*P[{k}]" for k, v in d.items()) or "0"
        return f"{side(self.lhs)} ~ {side(self.rhs)}"


@dataclass(frozen=True)
class CtxScenario:
    """Prepare-and-measure scenario with preparation equivalences only.

    ``index_A`` is the Bell-side outcome tuple carried along by the map so that
    the inverse map knows which Bell scenario to land in.
    """

    prep_labels: tuple[str, ...]
    outcomes_B: tuple[int, ...]
    equivalences: tuple[PreparationEquivalence, ...] = ()
    index_A: tuple[int, ...] | None = None

    def __post_init__(self):
        labels = tuple(str(v) for v in self.prep_labels)
        object.__setattr__(self, "prep_labels", labels)
        object.__setattr__(self, "outcomes_B", tuple(int(v) for v in self.outcomes_B))
        object.__setattr__(self, "equivalences", tuple(self.equivalences))
        if self.index_A is not None:
            object.__setattr__(self, "index_A", tuple(int(v) for v in self.index_A))
        if len(set(labels)) != len(labels):
            raise MalformedTable("preparation labels must be unique")
        if not self.outcomes_B or any(v < 1 for v in self.outcomes_B):
            raise MalformedTable("every measurement needs a positive outcome count")
        known = set(labels)
        for eq in self.equivalences:
            missing = eq.labels() - known
            if missing:
                raise UnknownLabel(f"equivalence refers to unknown preparations {sorted(missing)}")
        if self.index_A is not None:
            for label in labels:
                parsed = parse_prep_label(label)
                if parsed is None:
                    continue
                a, x = parsed
                if x > len(self.index_A):
                    raise IndexTooSmall(f"preparation {label} has input {x} beyond index_A of length {len(self.index_A)}")
                if a > self.index_A[x - 1]:
                    raise IndexTooSmall(f"preparation {label} needs A_{x} >= {a}, index_A gives {self.index_A[x - 1]}")

    @property
    def num_preparations(self) -> int:
        return len(self.prep_labels)

    @property
    def num_measurements(self) -> int:
        return len(self.outcomes_B)

    def cells(self) -> Iterator[tuple[str, int, int]]:
        """All ``(prep, y, b)`` in canonical order."""
        for label in self.prep_labels:
            for y, By in enumerate(self.outcomes_B, start=1):
                for b in range(1, By + 1):
                    yield label, y, b


@dataclass(frozen=True)
class CtxBehaviour:
    """A validated table ``q(b|prep, y)``. Build it with :func:`validate_behaviour`."""

    scenario: CtxScenario
    table: Mapping[tuple[str, int, int], Fraction] = field(repr=False)

    def __getitem__(self, key: tuple[str, int, int]) -> Fraction:
        return self.table[key]

    def __hash__(self):
        return hash((self.scenario, tuple(self.table[c] for c in self.scenario.cells())))

    def values(self) -> list[Fraction]:
        return [self.table[c] for c in self.scenario.cells()]


def validate_behaviour(raw: Mapping, scenario: CtxScenario) -> CtxBehaviour:
    """Check ``raw`` (keys ``(prep, y, b)`` or ``"prep,y,b"``) against ``scenario``."""
    table: dict[tuple[str, int, int], Fraction] = {}
    problems = []
    known = set(scenario.prep_labels)
    for key, value in raw.items():
        if isinstance(key, str):
            parts = key.split(",")
            if len(parts) != 3:
                problems.append({"kind": "arity", "cell": key})
                continue
            try:
                key = (parts[0], int(parts[1]), int(parts[2]))
            except ValueError:
                problems.append({"kind": "bad-key", "cell": key})
                continue
        if len(key) != 3:
            problems.append({"kind": "arity", "cell": list(key)})
            continue
        label, y, b = str(key[0]), int(key[1]), int(key[2])
        if label not in known or not (1 <= y <= scenario.num_measurements) or not (1 <= b <= scenario.outcomes_B[y - 1]):
            problems.append({"kind": "out-of-range", "cell": [label, y, b]})
            continue
        try:
            table[label, y, b] = to_rational(value)
        except (TypeError, ValueError) as exc:
            problems.append({"kind": "unparseable", "cell": [label, y, b], "detail": str(exc)})
    for cell in scenario.cells():
        if cell not in table and not any(v.get("cell") == list(cell) for v in problems):
            problems.append({"kind": "missing", "cell": list(cell)})
    if problems:
        raise MalformedTable("behaviour table does not match the scenario", problems)
    rows: dict[tuple[str, int], list] = {}
    for cell in scenario.cells():
        label, y, b = cell
        rows.setdefault((label, y), []).append((list(cell), table[cell]))
    violations = _check_distribution_rows(rows, "prep_y")
    if violations:
        raise NormalisationError("invalid behaviour probabilities", violations)
    return CtxBehaviour(scenario, {cell: table[cell] for cell in scenario.cells()})


def equivalence_residual(q: CtxBehaviour) -> list[Fraction]:
    """For each equivalence, ``max_{b,y} |sum alpha q - sum beta q|``.

    All zero exactly when ``q`` lies in the contextual set of its scenario.
    """
    sc = q.scenario
    known = set(sc.prep_labels)
    out = []
    for eq in sc.equivalences:
        missing = eq.labels() - known
        if missing:
            raise UnknownLabel(f"equivalence refers to unknown preparations {sorted(missing)}")
        worst = ZERO
        for y, By in enumerate(sc.outcomes_B, start=1):
            for b in range(1, By + 1):
                left = sum((w * q[label, y, b] for label, w in eq.lhs.items()), ZERO)
                right = sum((w * q[label, y, b] for label, w in eq.rhs.items()), ZERO)
                worst = max(worst, abs(left - right))
        out.append(worst)
    return out


def canonical_ns_equivalence(p_A: Marginals | Mapping[tuple[int, int], Fraction],
                             support: Mapping[int, Iterable[int]] | None = None,
                             ) -> list[PreparationEquivalence]:
    """The no-signalling equivalence chain, anchored at input 1.

    Returns ``X - 1`` equivalences ``D_1 ~ D_x`` for ``x = 2..X`` where ``D_x``
    is the decomposition ``sum_a p_A(a|x) P_{a|x}`` restricted to outcomes of
    positive probability. A single input gives an empty list.
    """
    if isinstance(p_A, Marginals):
        if not p_A.alice_well_defined:
            raise SignallingInput("Alice's marginal depends on Bob's input")
        p_A = p_A.p_A
    inputs = sorted({x for (_, x) in p_A})
    decomps = []
    for x in inputs:
        allowed = None if support is None else set(support[x])
        decomps.append({prep_label(a, x): v for (a, xx), v in sorted(p_A.items())
                        if xx == x and v > 0 and (allowed is None or a in allowed)})
    return [PreparationEquivalence(decomps[0], d) for d in decomps[1:]]


def product_cells(shape: Iterable[int]) -> Iterator[tuple[int, ...]]:
    """Every tuple of 1-based labels with ``t[i] in [shape[i]]``, lexicographic."""
    return itertools.product(*(range(1, n + 1) for n in shape))
