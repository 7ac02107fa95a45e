"""JSON file formats with exact rationals written as ``"num/den"`` strings.

Emission is canonical: cells are written in the scenario's canonical order and
the same value always produces the same text, so ``parse(emit(v)) == v`` and
``emit(parse(text)) == text`` for text produced by this module.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .core import (
    BellCorrelation,
    BellScenario,
    CtxBehaviour,
    CtxScenario,
    Marginals,
    PreparationEquivalence,
    to_rational,
    validate_behaviour,
    validate_correlation,
)
from .errors import MalformedTable
from .mapping import MappedBehaviour, RelabellingRecord


def _q(v: Fraction) -> str:
    return str(v)


def equivalence_to_obj(eq: PreparationEquivalence) -> dict:
    return {"lhs": {k: _q(v) for k, v in eq.lhs.items()},
            "rhs": {k: _q(v) for k, v in eq.rhs.items()}}


def equivalence_from_obj(obj: dict) -> PreparationEquivalence:
    return PreparationEquivalence(obj.get("lhs", {}), obj.get("rhs", {}))


def to_obj(value) -> dict:
    if isinstance(value, BellScenario):
        return {"type": "bell-scenario", "A": list(value.outcomes_A), "B": list(value.outcomes_B)}
    if isinstance(value, BellCorrelation):
        return {
            "type": "bell-correlation",
            "A": list(value.scenario.outcomes_A),
            "B": list(value.scenario.outcomes_B),
            "table": {",".join(map(str, cell)): _q(value[cell]) for cell in value.scenario.cells()},
        }
    if isinstance(value, PreparationEquivalence):
        return {"type": "preparation-equivalence", **equivalence_to_obj(value)}
    if isinstance(value, CtxScenario):
        obj = {
            "type": "ctx-scenario",
            "preps": list(value.prep_labels),
            "B": list(value.outcomes_B),
            "equivalences": [equivalence_to_obj(e) for e in value.equivalences],
        }
        if value.index_A is not None:
            obj["index_A"] = list(value.index_A)
        return obj
    if isinstance(value, CtxBehaviour):
        obj = to_obj(value.scenario)
        obj["type"] = "ctx-behaviour"
        obj["table"] = {f"{label},{y},{b}": _q(value[label, y, b]) for label, y, b in value.scenario.cells()}
        return obj
    if isinstance(value, MappedBehaviour):
        obj = to_obj(value.behaviour)
        obj["index_A"] = list(value.index_A)
        if value.alice_marginal is not None:
            obj["alice_marginal"] = {f"{a},{x}": _q(v) for (a, x), v in sorted(value.alice_marginal.items(),
                                                                             key=lambda t: (t[0][1], t[0][0]))}
        return obj
    if isinstance(value, Marginals):
        return {
            "type": "marginals",
            "p_A": {f"{a},{x}": _q(v) for (a, x), v in value.p_A.items()},
            "p_B": {f"{b},{y}": _q(v) for (b, y), v in value.p_B.items()},
            "alice_well_defined": value.alice_well_defined,
            "bob_well_defined": value.bob_well_defined,
        }
    raise TypeError(f"no file format for {type(value).__name__}")


def _scenario_from_obj(obj: dict) -> CtxScenario:
    try:
        return CtxScenario(
            prep_labels=tuple(obj["preps"]),
            outcomes_B=tuple(obj["B"]),
            equivalences=tuple(equivalence_from_obj(e) for e in obj.get("equivalences", [])),
            index_A=tuple(obj["index_A"]) if obj.get("index_A") is not None else None,
        )
    except KeyError as exc:
        raise MalformedTable(f"missing field {exc.args[0]!r}") from None


def _pair_map(d: dict) -> dict:
    return {tuple(int(t) for t in k.split(",")): to_rational(v) for k, v in d.items()}


def from_obj(obj: dict):
    kind = obj.get("type")
    try:
        if kind == "bell-scenario":
            return BellScenario(tuple(obj["A"]), tuple(obj["B"]))
        if kind == "bell-correlation":
            return validate_correlation(obj["table"], BellScenario(tuple(obj["A"]), tuple(obj["B"])))
        if kind == "preparation-equivalence":
            return equivalence_from_obj(obj)
        if kind == "ctx-scenario":
            return _scenario_from_obj(obj)
        if kind == "ctx-behaviour":
            q = validate_behaviour(obj["table"], _scenario_from_obj(obj))
            if "alice_marginal" in obj:
                if q.scenario.index_A is None:
                    raise MalformedTable("alice_marginal needs index_A")
                return MappedBehaviour(q, q.scenario.index_A, _pair_map(obj["alice_marginal"]))
            return q
        if kind == "marginals":
            return Marginals(_pair_map(obj["p_A"]), _pair_map(obj["p_B"]),
                             bool(obj["alice_well_defined"]), bool(obj["bob_well_defined"]))
    except KeyError as exc:
        raise MalformedTable(f"missing field {exc.args[0]!r} in {kind} file") from None
    raise MalformedTable(f"unknown file type {kind!r}")


def record_to_obj(r: RelabellingRecord) -> dict:
    return {
        "type": "relabelling-record",
        "original_A": list(r.original_A),
        "reduced_A": list(r.reduced_A),
        "B": list(r.outcomes_B),
        "kept_inputs": list(r.kept_inputs),
        "removed_inputs": {str(x): a for x, a in sorted(r.removed_inputs.items())},
        "outcome_permutations": {str(x): list(p) for x, p in sorted(r.outcome_permutations.items())},
        "bob_marginal": {f"{b},{y}": _q(v) for (b, y), v in sorted(r.bob_marginal.items(),
                                                                   key=lambda t: (t[0][1], t[0][0]))},
    }


def record_from_obj(obj: dict) -> RelabellingRecord:
    try:
        return RelabellingRecord(
            original_A=tuple(obj["original_A"]),
            reduced_A=tuple(obj["reduced_A"]),
            outcomes_B=tuple(obj["B"]),
            kept_inputs=tuple(obj["kept_inputs"]),
            removed_inputs={int(x): int(a) for x, a in obj["removed_inputs"].items()},
            outcome_permutations={int(x): tuple(p) for x, p in obj["outcome_permutations"].items()},
            bob_marginal=_pair_map(obj.get("bob_marginal", {})),
        )
    except KeyError as exc:
        raise MalformedTable(f"relabelling record lacks {exc.args[0]!r}") from None


def dumps(value) -> str:
    return json.dumps(to_obj(value), indent=2) + "\n"


def loads(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedTable(f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedTable("top-level JSON value must be an object")
    return from_obj(obj)


def load(path) -> object:
    return loads(Path(path).read_text(encoding="utf-8"))


def dump(value, path) -> None:
    Path(path).write_text(dumps(value), encoding="utf-8")
