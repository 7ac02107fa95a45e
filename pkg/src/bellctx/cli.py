"""Command-line front end.

Every command prints one JSON report on stdout and a one-line summary on
stderr. Exit status: 0 when the command produced a verdict (``non-member`` is
a verdict, not a failure), 1 for invalid input, 2 when an enumeration budget
ran out, 3 when an internal consistency check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import quantum as qm
from .certificates import verdict_from_obj, verdict_to_obj
from .classicality import (
    Budget,
    LocalVerdict,
    NCVerdict,
    check_local,
    check_noncontextual,
    coordinate_name,
    local_vertices,
    nc_polytope,
    polytope_self_check,
    verify_certificate,
)
from .core import (
    BellCorrelation,
    BellScenario,
    CtxBehaviour,
    CtxScenario,
    PreparationEquivalence,
    check_no_signalling,
    equivalence_residual,
    marginals,
)
from .errors import BellCtxError, BudgetExceeded, InvariantFailure, MalformedTable, ShapeMismatch
from .mapping import (
    MappedBehaviour,
    bell_to_ctx,
    ctx_to_bell,
    embed_bell,
    embed_repeated_preparations,
    interior_blend,
    reduce_tau,
    single_equivalence_normal_form,
)
from .polytope import convex_hull
from .serialize import from_obj, record_from_obj, record_to_obj, to_obj

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(BellCtxError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2, which is reserved for budgets
        raise UsageError(message)


def _q(v) -> str:
    return str(Fraction(v))


# --------------------------------------------------------------------------
# input handling


class Inputs:
    """Loads JSON files, unwrapping reports, and remembers their bytes for the digest."""

    def __init__(self):
        self.hashes: list[str] = []

    def raw(self, path: str) -> dict:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        self.hashes.append(hashlib.sha256(data).hexdigest())
        try:
            obj = json.loads(data)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise MalformedTable(f"{path} is not valid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise MalformedTable(f"{path}: top-level JSON value must be an object")
        if "command" in obj and "output" in obj:
            obj = obj["output"]
        return obj

    def value(self, path: str):
        return from_obj(self.raw(path))

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.hashes).encode()).hexdigest()


def _expect(value, kinds, what: str):
    if not isinstance(value, kinds):
        raise MalformedTable(f"expected {what}, got {type(value).__name__}")
    return value


def _behaviour(inputs: Inputs, path: str, behaviour_path: str | None) -> CtxBehaviour:
    value = inputs.value(path)
    if behaviour_path is not None:
        scenario = value.scenario if isinstance(value, (CtxBehaviour, MappedBehaviour)) else value
        _expect(scenario, CtxScenario, "a contextuality scenario")
        value = inputs.value(behaviour_path)
        if isinstance(value, MappedBehaviour):
            value = value.behaviour
        _expect(value, CtxBehaviour, "a behaviour")
        if value.scenario.prep_labels != scenario.prep_labels or value.scenario.outcomes_B != scenario.outcomes_B \
                or value.scenario.equivalences != scenario.equivalences:
            raise ShapeMismatch("behaviour file belongs to a different scenario")
        return value
    if isinstance(value, MappedBehaviour):
        value = value.behaviour
    return _expect(value, CtxBehaviour, "a behaviour")


def _scenario(value) -> CtxScenario:
    if isinstance(value, (CtxBehaviour, MappedBehaviour)):
        return value.scenario
    return _expect(value, CtxScenario, "a contextuality scenario")


def _index(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"--index-A expects comma-separated integers, got {text!r}") from None


# --------------------------------------------------------------------------
# commands; each returns a dict with verdict/result/certificate/output/summary


def cmd_validate(args, inputs: Inputs) -> dict:
    obj = inputs.raw(args.file)
    kind = obj.get("type")
    result: dict = {"type": kind}
    if kind == "quantum-realisation":
        r = qm.realisation_from_obj(obj).validate(args.tolerance)
        result["dims"] = list(r.dims)
    elif kind == "assemblage":
        asm = qm.assemblage_from_obj(obj)
        residual = asm.averaging_residual()
        if residual > args.tolerance:
            raise qm.InvalidRealisation(f"assemblage states do not average to rho_B (residual {residual:.3g})")
        result["averaging_residual"] = residual
    elif kind == "relabelling-record":
        record_from_obj(obj)
    else:
        value = from_obj(obj)
        if isinstance(value, BellCorrelation):
            ns = check_no_signalling(value)
            result.update(no_signalling=ns.verdict, ns_residual=_q(ns.residual))
        elif isinstance(value, (CtxBehaviour, MappedBehaviour)):
            q = value.behaviour if isinstance(value, MappedBehaviour) else value
            result["equivalence_residuals"] = [_q(r) for r in equivalence_residual(q)]
    return {"verdict": "valid", "result": result, "summary": f"valid {kind}"}


def cmd_map(args, inputs: Inputs) -> dict:
    p = _expect(inputs.value(args.file), BellCorrelation, "a Bell correlation")
    m = bell_to_ctx(p)
    result = {"index_A": list(m.index_A), "preparations": list(m.scenario.prep_labels),
              "equivalences": [str(e) for e in m.scenario.equivalences]}
    return {"verdict": "mapped", "result": result, "output": to_obj(m),
            "summary": f"mapped to {len(m.scenario.prep_labels)} preparations, index_A {list(m.index_A)}"}


def cmd_unmap(args, inputs: Inputs) -> dict:
    value = inputs.value(args.file)
    index_A = _index(args.index_A)
    if isinstance(value, MappedBehaviour):
        p = ctx_to_bell(value, index_A=index_A)
    else:
        q = _expect(value, CtxBehaviour, "a behaviour")
        if index_A is None and q.scenario.index_A is None:
            raise UsageError("unmap needs --index-A (the file carries no index_A)")
        p = ctx_to_bell(q, index_A=index_A)
    return {"verdict": "unmapped", "result": {"A": list(p.scenario.outcomes_A), "B": list(p.scenario.outcomes_B)},
            "output": to_obj(p), "summary": f"correlation in scenario A={list(p.scenario.outcomes_A)}"}


def cmd_reduce(args, inputs: Inputs) -> dict:
    p = _expect(inputs.value(args.file), BellCorrelation, "a Bell correlation")
    reduced, record = reduce_tau(p)
    out = {"type": "tau-reduction", "correlation": None if reduced is None else to_obj(reduced),
           "record": record_to_obj(record)}
    result = {"reduced_A": list(record.reduced_A), "removed_inputs": {str(k): v for k, v in record.removed_inputs.items()},
              "identity": record.is_identity}
    return {"verdict": "reduced", "result": result, "output": out,
            "summary": f"reduced A {list(record.original_A)} -> {list(record.reduced_A)}"}


def cmd_embed_bell(args, inputs: Inputs) -> dict:
    obj = inputs.raw(args.file)
    if obj.get("type") == "tau-reduction":
        p = None if obj["correlation"] is None else from_obj(obj["correlation"])
        record = record_from_obj(obj["record"])
        out = embed_bell(p, record)
    else:
        p = _expect(from_obj(obj), BellCorrelation, "a Bell correlation")
        if args.record:
            out = embed_bell(p, record_from_obj(inputs.raw(args.record)))
        elif args.target_A:
            out = embed_bell(p, target_A=_index(args.target_A))
        else:
            raise UsageError("embed-bell needs a tau-reduction file, --record or --target-A")
    return {"verdict": "embedded", "result": {"A": list(out.scenario.outcomes_A)}, "output": to_obj(out),
            "summary": f"embedded into A={list(out.scenario.outcomes_A)}"}


def cmd_normal_form(args, inputs: Inputs) -> dict:
    value = inputs.value(args.file)
    if isinstance(value, CtxScenario):
        if len(value.equivalences) != 1:
            raise UsageError(f"normal-form needs exactly one equivalence, the scenario has {len(value.equivalences)}")
        value = value.equivalences[0]
    eq = _expect(value, PreparationEquivalence, "a preparation equivalence")
    nf = single_equivalence_normal_form(eq)
    return {"verdict": "normalised", "result": {"equivalence": str(nf), "vacuous": nf.is_vacuous},
            "output": to_obj(nf), "summary": str(nf)}


def cmd_embed_preps(args, inputs: Inputs) -> dict:
    value = inputs.value(args.file)
    q = None
    if args.behaviour:
        q = _behaviour(inputs, args.file, args.behaviour)
    elif isinstance(value, (CtxBehaviour, MappedBehaviour)):
        q = value.behaviour if isinstance(value, MappedBehaviour) else value
    scenario = q.scenario if q is not None else _scenario(value)
    emb = embed_repeated_preparations(scenario, q)
    clones = {k: v for k, v in emb.label_map.items() if k != v}
    result = {"equivalences": [str(e) for e in emb.scenario.equivalences], "clones": clones,
              "subtracted": {k: _q(v) for k, v in emb.subtracted.items()}}
    out = to_obj(emb.behaviour if emb.behaviour is not None else emb.scenario)
    return {"verdict": "embedded", "result": result, "output": out,
            "summary": f"{len(clones)} cloned preparations"}


def cmd_blend(args, inputs: Inputs) -> dict:
    p = _expect(inputs.value(args.file), BellCorrelation, "a Bell correlation")
    if args.n is None:
        raise UsageError("blend needs --n")
    out = interior_blend(p, args.n)
    return {"verdict": "blended", "result": {"n": args.n}, "output": to_obj(out), "summary": f"blended with n={args.n}"}


def _facet_obj(poly, facet) -> dict:
    return {"coefficients": {coordinate_name(c): v for c, v in zip(poly.coordinates, facet.coefficients) if v},
            "constant": facet.constant, "positivity": facet.positivity, "text": facet.format(poly.coordinates)}


def check_one(kind: str, path: str, args) -> dict:
    inputs = Inputs()
    budget = Budget.from_env(args.budget)
    if kind == "ns":
        p = _expect(inputs.value(path), BellCorrelation, "a Bell correlation")
        ns = check_no_signalling(p)
        m = marginals(p)
        verdict = "no-signalling" if ns.verdict else "signalling"
        return {"verdict": verdict, "residuals": {"no_signalling": _q(ns.residual)},
                "result": {"alice_well_defined": m.alice_well_defined, "bob_well_defined": m.bob_well_defined},
                "summary": f"{verdict} (residual {ns.residual})", "_inputs": inputs.hashes}
    if kind == "local":
        p = _expect(inputs.value(path), BellCorrelation, "a Bell correlation")
        v = check_local(p, budget)
        check = verify_certificate(p, v)
        if not check.ok:
            raise InvariantFailure("local certificate failed its own check: " + "; ".join(check.defects))
        verdict = "member" if v.member else "non-member"
        res = {"verdict": verdict, "certificate": verdict_to_obj(v), "_inputs": inputs.hashes,
               "summary": verdict if v.member else f"non-member, violation {v.inequality.violation}"}
        if not v.member:
            res["violation"] = _q(v.inequality.violation)
        return res
    if kind == "nc":
        q = _behaviour(inputs, path, getattr(args, "behaviour", None))
        poly, note = None, "not needed"
        v = check_noncontextual(q, budget)
        if not v.member and not args.no_facets:
            # swap the Farkas inequality for the most violated facet when enumeration is affordable
            facet_budget = Budget(budget.atlas, min(budget.vertices, args.facet_budget))
            try:
                poly, note = nc_polytope(q.scenario, facet_budget), "enumerated"
                v = check_noncontextual(q, budget, polytope=poly)
            except BudgetExceeded as exc:
                note = f"skipped: {exc}"
        elif args.no_facets:
            note = "disabled"
        check = verify_certificate(q, v, poly.vertices if poly is not None else None)
        if not check.ok:
            raise InvariantFailure("non-contextuality certificate failed its own check: " + "; ".join(check.defects))
        verdict = "member" if v.member else "non-member"
        res = {"verdict": verdict, "certificate": verdict_to_obj(v), "result": {"facet_search": note},
               "_inputs": inputs.hashes,
               "summary": verdict if v.member else f"non-member, violation {v.inequality.violation}"}
        if not v.member:
            res["violation"] = _q(v.inequality.violation)
            if poly is not None:
                res["violated_facets"] = [dict(_facet_obj(poly, f), violation=_q(val)) for f, val in v.violated_facets]
        return res
    if kind == "ctxset":
        q = _behaviour(inputs, path, getattr(args, "behaviour", None))
        residuals = equivalence_residual(q)
        verdict = "member" if all(r == 0 for r in residuals) else "non-member"
        return {"verdict": verdict, "residuals": {"equivalences": [_q(r) for r in residuals]},
                "summary": f"{verdict} of the contextual set", "_inputs": inputs.hashes}
    raise UsageError(f"unknown check {kind!r}")


def cmd_check(args, inputs: Inputs) -> dict:
    if len(args.files) == 1:
        res = check_one(args.kind, args.files[0], args)
        inputs.hashes.extend(res.pop("_inputs"))
        return res
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(check_one, [args.kind] * len(args.files), args.files, [args] * len(args.files)))
    else:
        results = [check_one(args.kind, f, args) for f in args.files]
    batch = []
    for f, res in zip(args.files, results):
        inputs.hashes.extend(res.pop("_inputs"))
        res.pop("summary", None)
        batch.append(dict(res, file=f))
    verdicts = [r["verdict"] for r in batch]
    return {"verdict": "batch", "result": {"batch": batch},
            "summary": ", ".join(f"{v}: {verdicts.count(v)}" for v in sorted(set(verdicts)))}


def cmd_facets(args, inputs: Inputs) -> dict:
    value = inputs.value(args.file)
    budget = Budget.from_env(args.budget)
    if isinstance(value, BellScenario):
        verts = [v.values() for v in local_vertices(value, budget)]
        hull = convex_hull(verts, max_rays=budget.vertices)
        names = [f"p({a},{b}|{x},{y})" for a, b, x, y in value.cells()]
        n = len(names)
        positivity_forms = {hull.canonical([int(i == j) for j in range(n)], 0) for i in range(n)}
        facets = []
        for normal, const in hull.facets:
            terms = {names[i]: c for i, c in enumerate(normal) if c}
            facets.append({"coefficients": terms, "constant": const,
                           "positivity": (normal, const) in positivity_forms})
        pos = sum(f["positivity"] for f in facets)
        result = {"polytope": "local", "dimension": hull.dimension, "facet_count": len(facets),
                  "positivity_facets": pos, "nontrivial_facets": len(facets) - pos,
                  "vertex_count": len(hull.vertices), "facets": facets}
        return {"verdict": "enumerated", "result": result,
                "summary": f"{len(facets)} facets ({pos} positivity) of the local polytope"}
    poly = nc_polytope(_scenario(value), budget)
    result = {
        "polytope": "non-contextual",
        "coordinates": [coordinate_name(c) for c in poly.coordinates],
        "dimension": poly.dimension,
        "facet_count": len(poly.facets),
        "positivity_facets": poly.positivity_count,
        "nontrivial_facets": len(poly.facets) - poly.positivity_count,
        "vertex_count": len(poly.vertices),
        "facets": [_facet_obj(poly, f) for f in poly.facets],
    }
    if args.self_check:
        ok = polytope_self_check(poly, budget)
        if not ok:
            raise InvariantFailure("facets do not give back the vertex list")
        result["self_check"] = ok
    return {"verdict": "enumerated", "result": result,
            "summary": f"{len(poly.facets)} facets ({poly.positivity_count} positivity, "
                       f"{len(poly.facets) - poly.positivity_count} nontrivial), dimension {poly.dimension}"}


def cmd_vertices(args, inputs: Inputs) -> dict:
    value = inputs.value(args.file)
    budget = Budget.from_env(args.budget)
    if isinstance(value, BellScenario):
        verts = local_vertices(value, budget)
        out = [[_q(x) for x in v.values()] for v in verts]
        return {"verdict": "enumerated", "result": {"polytope": "local", "vertex_count": len(out), "vertices": out},
                "summary": f"{len(out)} deterministic vertices"}
    poly = nc_polytope(_scenario(value), budget)
    out = [[_q(x) for x in v] for v in poly.vertices]
    result = {"polytope": "non-contextual", "coordinates": [coordinate_name(c) for c in poly.coordinates],
              "vertex_count": len(out), "vertices": out}
    return {"verdict": "enumerated", "result": result, "summary": f"{len(out)} vertices"}


def _floats(table: dict) -> dict:
    return {",".join(map(str, k)): v for k, v in table.items()}


def cmd_assemblage(args, inputs: Inputs) -> dict:
    r = qm.realisation_from_obj(inputs.raw(args.file))
    asm, behaviour = qm.assemblage_from_bell(r, tol=args.tolerance)
    table = qm.realisation_to_tables(r, args.tolerance)
    residual = asm.averaging_residual()
    result = {"behaviour": _floats(behaviour), "correlation": _floats(table)}
    return {"verdict": "constructed", "result": result, "residuals": {"averaging": residual},
            "output": qm.assemblage_to_obj(asm), "summary": f"assemblage of dimension {asm.dim}, residual {residual:.3g}"}


def _matrix(m) -> list:
    return qm._matrix_to_obj(m)


def cmd_hjw(args, inputs: Inputs) -> dict:
    asm = qm.assemblage_from_obj(inputs.raw(args.file))
    h = qm.hjw_construct(asm, tol=args.tolerance)
    res = qm.verify_steering(h.psi, h.M, asm)
    residuals = {"steering": res.steering, "completeness": res.completeness, "positivity": res.positivity}
    if args.realisation:
        r = qm.realisation_from_obj(inputs.raw(args.realisation))
        before = qm.realisation_to_tables(r, args.tolerance)
        after = qm.correlation_table(h.rho, h.M, r.N, h.dims)
        residuals["round_trip"] = max(abs(before[c] - after[c]) for c in before)
    out = {"type": "hjw-construction", "dims": list(h.dims),
           "psi": [[float(z.real), float(z.imag)] for z in h.psi],
           "M": [[_matrix(m) for m in povm] for povm in h.M],
           "basis": _matrix(h.basis), "eigenvalues": [float(v) for v in h.eigenvalues]}
    ok = all(v <= args.tolerance for v in residuals.values())
    return {"verdict": "verified" if ok else "residual-exceeds-tolerance", "residuals": residuals, "output": out,
            "summary": f"support rank {h.dims[0]}, steering residual {res.steering:.3g}"}


def cmd_verify_cert(args, inputs: Inputs) -> dict:
    value = inputs.value(args.file)
    if isinstance(value, MappedBehaviour):
        value = value.behaviour
    cert_obj = inputs.raw(args.certificate)
    if "certificate" in cert_obj:
        cert_obj = cert_obj["certificate"]
    verdict = verdict_from_obj(cert_obj)
    if isinstance(verdict, LocalVerdict):
        _expect(value, BellCorrelation, "a Bell correlation for a Bell certificate")
    elif isinstance(verdict, NCVerdict):
        _expect(value, CtxBehaviour, "a behaviour for a non-contextuality certificate")
    check = verify_certificate(value, verdict)
    status = "valid" if check.ok else "invalid"
    return {"verdict": status, "result": {"defects": check.defects, "counts": check.counts,
                                          "certificate_kind": cert_obj.get("kind")},
            "summary": status if check.ok else f"invalid: {check.defects[0]}"}


def cmd_snap(args, inputs: Inputs) -> dict:
    obj = inputs.raw(args.file)
    if obj.get("type") == "quantum-realisation":
        r = qm.realisation_from_obj(obj)
        table = qm.realisation_to_tables(r, args.tolerance)
        scenario = r.scenario
    else:
        try:
            scenario = BellScenario(tuple(obj["A"]), tuple(obj["B"]))
            table = {tuple(int(t) for t in k.split(",")): float(Fraction(str(v))) for k, v in obj["table"].items()}
        except (KeyError, ValueError) as exc:
            raise MalformedTable(f"cannot read a numeric correlation table: {exc}") from None
    snap = qm.snap_correlation(table, scenario, args.snap_den, args.snap_tolerance)
    res = {"residuals": {"max_rounding_error": snap.max_error}}
    if snap.correlation is None:
        return dict(res, verdict="not-snapped", result={"reason": snap.reason}, summary=f"not snapped: {snap.reason}")
    return dict(res, verdict="snapped", output=to_obj(snap.correlation),
                summary=f"snapped with denominators <= {args.snap_den}")


COMMANDS = {
    "validate": cmd_validate,
    "map": cmd_map,
    "unmap": cmd_unmap,
    "reduce": cmd_reduce,
    "embed-bell": cmd_embed_bell,
    "normal-form": cmd_normal_form,
    "embed-preps": cmd_embed_preps,
    "blend": cmd_blend,
    "check": cmd_check,
    "facets": cmd_facets,
    "vertices": cmd_vertices,
    "assemblage": cmd_assemblage,
    "hjw": cmd_hjw,
    "verify-cert": cmd_verify_cert,
    "snap": cmd_snap,
}


# --------------------------------------------------------------------------
# parser and driver


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--budget", type=int, help="enumeration budget (atlas size and vertex count)")
    common.add_argument("--tolerance", type=float, default=qm.TOLERANCE, help="floating-point tolerance (quantum commands)")
    common.add_argument("--snap-den", type=int, default=qm.SNAP_DENOMINATOR, help="largest denominator when snapping")
    common.add_argument("--snap-tolerance", type=float, default=qm.SNAP_TOLERANCE)
    common.add_argument("--jobs", type=int, default=1, help="parallel workers for batch checks")
    common.add_argument("--output", help="write the produced object here instead of embedding it in the report")
    common.add_argument("--config", help="JSON file of flag defaults (keys mirror flag names)")

    parser = _Parser(prog="bellctx", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bellctx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    add("validate", "check a file against its format").add_argument("file")
    add("map", "Bell correlation to behaviour").add_argument("file")
    p = add("unmap", "behaviour to Bell correlation")
    p.add_argument("file")
    p.add_argument("--index-A", dest="index_A")
    add("reduce", "remove Alice's deterministic inputs and unused outcomes").add_argument("file")
    p = add("embed-bell", "undo a reduction or pad into a larger Alice scenario")
    p.add_argument("file")
    p.add_argument("--record")
    p.add_argument("--target-A", dest="target_A")
    add("normal-form", "normal form of a single preparation equivalence").add_argument("file")
    p = add("embed-preps", "split repeated preparations into clones")
    p.add_argument("file")
    p.add_argument("--behaviour")
    p = add("blend", "mix with the interior point that keeps Alice's marginals")
    p.add_argument("file")
    p.add_argument("--n", type=int)
    p = add("check", "membership tests")
    p.add_argument("kind", choices=["ns", "local", "nc", "ctxset"])
    p.add_argument("files", nargs="+")
    p.add_argument("--behaviour")
    p.add_argument("--no-facets", action="store_true", help="nc: skip facet enumeration, report the Farkas inequality")
    p.add_argument("--facet-budget", type=int, default=5000,
                   help="nc: vertex budget for the facet search behind a non-member certificate")
    p = add("facets", "H-description of the local or non-contextual polytope")
    p.add_argument("file")
    p.add_argument("--self-check", action="store_true", help="also convert the facets back to vertices")
    add("vertices", "V-description of the local or non-contextual polytope").add_argument("file")
    add("assemblage", "conditional states of Bob from a quantum realisation").add_argument("file")
    p = add("hjw", "state and POVMs steering to an assemblage")
    p.add_argument("file")
    p.add_argument("--realisation", help="compare against this realisation, reusing its Bob measurements")
    p = add("verify-cert", "re-check a certificate by exact arithmetic")
    p.add_argument("file")
    p.add_argument("certificate")
    add("snap", "round a numeric correlation to exact rationals").add_argument("file")
    return parser


def _apply_config(parser, argv):
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    defaults = {k.replace("-", "_"): v for k, v in cfg.items()}
    for action in parser._subparsers._group_actions:
        for subparser in action.choices.values():
            subparser.set_defaults(**defaults)


def _digest(obj) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(text.encode()).hexdigest()


def run(argv=None) -> tuple[int, dict]:
    """Execute one command line; returns the exit status and the report."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    inputs = Inputs()
    start = time.perf_counter()
    command = None
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        command = args.command
        body = COMMANDS[command](args, inputs)
        status = EXIT_OK
        output = body.pop("output", None)
        if output is not None:
            if args.output:
                text = json.dumps(output, indent=2) + "\n"
                Path(args.output).write_text(text, encoding="utf-8")
                body["output_path"] = args.output
            else:
                body["output"] = output
    except BudgetExceeded as exc:
        status, body = EXIT_BUDGET, {"verdict": "budget-exceeded", "error": _error(exc)}
    except InvariantFailure as exc:
        status, body = EXIT_INTERNAL, {"verdict": "internal-error", "error": _error(exc)}
    except BellCtxError as exc:
        status, body = EXIT_INPUT, {"verdict": "invalid-input", "error": _error(exc)}
    except Exception as exc:  # anything unexpected is a bug, not bad input
        status, body = EXIT_INTERNAL, {"verdict": "internal-error", "error": _error(exc)}
    summary = body.pop("summary", None) or body.get("error", {}).get("message", body.get("verdict"))
    report = {"command": command, "tool_version": __version__, "input_digest": inputs.digest(), **body}
    report["report_digest"] = _digest(report)
    report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    report["_summary"] = summary
    return status, report


def _error(exc: Exception) -> dict:
    err = {"type": type(exc).__name__, "message": str(exc)}
    violations = getattr(exc, "violations", None)
    if violations:
        err["violations"] = violations
    return err


def main(argv=None) -> int:
    status, report = run(argv)
    summary = report.pop("_summary")
    sys.stdout.write(json.dumps(report, indent=2, default=_json_default) + "\n")
    sys.stderr.write(f"{report['command'] or 'bellctx'}: {summary}\n")
    return status


def _json_default(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"cannot serialise {type(value).__name__}")


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
