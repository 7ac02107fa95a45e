"""Worked examples used by the tests, the CLI and the README."""

from __future__ import annotations

from fractions import Fraction as F

from .classicality import OntologicalModel, deterministic_model_assignments
from .core import (
    BellCorrelation,
    BellScenario,
    CtxBehaviour,
    CtxScenario,
    PreparationEquivalence,
    validate_behaviour,
    validate_correlation,
)


def chsh_scenario() -> BellScenario:
    return BellScenario((2, 2), (2, 2))


def pr_box() -> BellCorrelation:
    """``p(a,b|x,y) = 1/2`` when ``a xor b = (x-1)(y-1)`` (outcomes relabelled to 0/1)."""
    sc = chsh_scenario()
    table = {}
    for a, b, x, y in sc.cells():
        table[a, b, x, y] = F(1, 2) if ((a - 1) ^ (b - 1)) == (x - 1) * (y - 1) else F(0)
    return validate_correlation(table, sc)


def white_noise(scenario: BellScenario | None = None) -> BellCorrelation:
    sc = scenario or chsh_scenario()
    table = {cell: F(1, sc.outcomes_A[cell[2] - 1] * sc.outcomes_B[cell[3] - 1]) for cell in sc.cells()}
    return validate_correlation(table, sc)


def five_preparation_scenario() -> CtxScenario:
    """Five preparations, two binary measurements, one hypothetical preparation decomposed three ways.

    ``(P1+P2)/2 ~ (P1+P3+P4)/3 ~ P1/5 + 2(P3+P5)/5``, written as two
    equivalences anchored at the first decomposition.
    """
    d1 = {"1": F(1, 2), "2": F(1, 2)}
    d2 = {"1": F(1, 3), "3": F(1, 3), "4": F(1, 3)}
    d3 = {"1": F(1, 5), "3": F(2, 5), "5": F(2, 5)}
    eqs = (PreparationEquivalence(d1, d2), PreparationEquivalence(d1, d3))
    return CtxScenario(("1", "2", "3", "4", "5"), (2, 2), eqs)


# q(1|x,y) for x = 1..5, y = 1, 2
FIVE_PREP_CONTEXTUAL = (
    F(19, 200), F(1, 2),
    F(127, 200), F(1, 2),
    F(19, 200), F(19, 200),
    F(181, 200), F(181, 200),
    F(77, 100), F(181, 200),
)


def binary_behaviour(scenario: CtxScenario, ones) -> CtxBehaviour:
    """Behaviour of a scenario with binary measurements from its ``q(1|x,y)`` values in (x, y) order."""
    ones = list(ones)
    table = {}
    i = 0
    for label in scenario.prep_labels:
        for y in range(1, scenario.num_measurements + 1):
            table[label, y, 1] = ones[i]
            table[label, y, 2] = 1 - ones[i]
            i += 1
    return validate_behaviour(table, scenario)


def five_preparation_contextual() -> CtxBehaviour:
    return binary_behaviour(five_preparation_scenario(), FIVE_PREP_CONTEXTUAL)


# -q(1|1,2) - 3 q(1|2,1) + 2 q(1|3,1) + 2 q(1|3,2) + 2 >= 0, over the coordinates q(1|x,y)
FIVE_PREP_FACET = ({("1", 2, 1): F(-1), ("2", 1, 1): F(-3), ("3", 1, 1): F(2), ("3", 2, 1): F(2)}, F(2))

# Rows give the outcome-1 indicator of two response functions over four ontic
# states; the first row answers the behaviour's second measurement.
_SPLIT_RESPONSES = ((2, 1, 2, 1), (2, 2, 1, 1))
_SPLIT_MEASURES = (
    (F(1, 2), F(81, 200), F(0), F(19, 200)),
    (F(73, 200), F(0), F(27, 200), F(1, 2)),
    (F(1671, 2000), F(139, 2000), F(139, 2000), F(51, 2000)),
    (F(0), F(19, 200), F(19, 200), F(81, 100)),
    (F(0), F(23, 100), F(19, 200), F(27, 40)),
    (F(81, 200), F(1, 2), F(19, 200), F(0)),
    (F(133, 160), F(59, 800), F(59, 800), F(17, 800)),
)


def split_model(scenario: CtxScenario) -> OntologicalModel:
    """Hand-built non-contextual model for the split five-preparation behaviour.

    ``scenario`` must have seven preparations; the columns of the measure
    table follow its preparation order.
    """
    assignments = deterministic_model_assignments(_SPLIT_RESPONSES, measurement_order=(1, 0))
    return OntologicalModel(assignments, dict(zip(scenario.prep_labels, _SPLIT_MEASURES)))


__all__ = [
    "chsh_scenario",
    "pr_box",
    "white_noise",
    "five_preparation_scenario",
    "FIVE_PREP_CONTEXTUAL",
    "FIVE_PREP_FACET",
    "binary_behaviour",
    "five_preparation_contextual",
    "split_model",
]
