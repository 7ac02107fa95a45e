"""JSON form of membership verdicts, so a certificate can be re-checked from a file alone."""

from __future__ import annotations

from fractions import Fraction

from .classicality import BellInequality, LocalVerdict, NCInequality, NCVerdict, OntologicalModel
from .core import BellScenario, to_rational
from .errors import MalformedTable


def _q(v) -> str:
    return str(Fraction(v))


def verdict_to_obj(verdict) -> dict:
    if isinstance(verdict, LocalVerdict):
        if verdict.member:
            return {
                "kind": "local-model",
                "weights": [{"alice": list(sa), "bob": list(sb), "weight": _q(w)} for sa, sb, w in verdict.weights],
            }
        ineq = verdict.inequality
        return {
            "kind": "bell-inequality",
            "form": "constant + sum coefficients[a,b,x,y] * p(a,b|x,y) >= 0",
            "A": list(ineq.scenario.outcomes_A),
            "B": list(ineq.scenario.outcomes_B),
            "coefficients": {",".join(map(str, c)): _q(w) for c, w in ineq.coefficients.items() if w},
            "constant": _q(ineq.constant),
            "violation": _q(ineq.violation),
        }
    if isinstance(verdict, NCVerdict):
        if verdict.member:
            return model_to_obj(verdict.model)
        ineq = verdict.inequality
        return {
            "kind": "nc-inequality",
            "form": "constant + sum coefficients[prep,y,b] * q(b|prep,y) >= 0",
            "coefficients": {f"{p},{y},{b}": _q(w) for (p, y, b), w in ineq.coefficients.items() if w},
            "constant": _q(ineq.constant),
            "violation": _q(ineq.violation),
            "prep_offsets": {k: _q(v) for k, v in ineq.prep_offsets.items()},
            "equivalence_multipliers": {f"{e},{k}": _q(v) for (e, k), v in ineq.equivalence_multipliers.items() if v},
            "assignments": [list(lam) for lam in ineq.assignments],
        }
    if isinstance(verdict, OntologicalModel):
        return model_to_obj(verdict)
    raise TypeError(f"no certificate format for {type(verdict).__name__}")


def model_to_obj(model: OntologicalModel) -> dict:
    return {
        "kind": "ontological-model",
        "assignments": [list(lam) for lam in model.assignments],
        "measures": {label: [_q(w) for w in mu] for label, mu in model.measures.items()},
    }


def _rat_map(d: dict, key):
    return {key(k): to_rational(v) for k, v in d.items()}


def verdict_from_obj(obj: dict):
    kind = obj.get("kind")
    try:
        if kind == "local-model":
            weights = tuple((tuple(w["alice"]), tuple(w["bob"]), to_rational(w["weight"])) for w in obj["weights"])
            return LocalVerdict(True, weights=weights)
        if kind == "bell-inequality":
            sc = BellScenario(tuple(obj["A"]), tuple(obj["B"]))
            coeffs = {c: Fraction(0) for c in sc.cells()}
            coeffs.update(_rat_map(obj["coefficients"], lambda k: tuple(int(t) for t in k.split(","))))
            ineq = BellInequality(sc, coeffs, to_rational(obj["constant"]), to_rational(obj["violation"]))
            return LocalVerdict(False, inequality=ineq)
        if kind == "ontological-model":
            model = OntologicalModel(
                tuple(tuple(lam) for lam in obj["assignments"]),
                {label: tuple(to_rational(w) for w in mu) for label, mu in obj["measures"].items()},
            )
            return NCVerdict(True, model=model)
        if kind == "nc-inequality":
            def cell(k):
                p, y, b = k.rsplit(",", 2)
                return p, int(y), int(b)

            ineq = NCInequality(
                _rat_map(obj["coefficients"], cell),
                to_rational(obj["constant"]),
                to_rational(obj["violation"]),
                _rat_map(obj["prep_offsets"], str),
                _rat_map(obj.get("equivalence_multipliers", {}), lambda k: tuple(int(t) for t in k.split(","))),
                tuple(tuple(lam) for lam in obj["assignments"]),
            )
            return NCVerdict(False, inequality=ineq)
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedTable(f"malformed {kind} certificate: {exc}") from None
    raise MalformedTable(f"unknown certificate kind {kind!r}")
