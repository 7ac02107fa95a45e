"""The invertible map between Bell correlations and prepare-and-measure behaviours.

``bell_to_ctx`` turns Alice's outcome ``a`` on input ``x`` into a preparation
``P_{a|x}`` of Bob's system; ``ctx_to_bell`` undoes it. Supporting operations
strip and restore Alice's trivial outcomes (``reduce_tau`` / ``embed_bell``),
rewrite equivalences so that no preparation appears twice, and blend a
correlation with an interior point of the local polytope without moving
Alice's marginals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .core import (
    ONE,
    ZERO,
    BellCorrelation,
    BellScenario,
    CtxBehaviour,
    CtxScenario,
    PreparationEquivalence,
    canonical_ns_equivalence,
    check_no_signalling,
    label_sort_key,
    marginals,
    parse_prep_label,
    prep_label,
    validate_behaviour,
    validate_correlation,
)
from .errors import (
    IndexTooSmall,
    NotNSForm,
    NotOneHypotheticalForm,
    ShapeMismatch,
    SignallingInput,
)


@dataclass(frozen=True)
class MappedBehaviour:
    """Image of a correlation, with what the inverse map needs besides the behaviour.

    ``alice_marginal`` is kept only when the scenario has no equivalence to
    carry Alice's weights (a single input with several possible outcomes).
    """

    behaviour: CtxBehaviour
    index_A: tuple[int, ...]
    alice_marginal: Mapping[tuple[int, int], Fraction] | None = None

    @property
    def scenario(self) -> CtxScenario:
        return self.behaviour.scenario


def bell_to_ctx(p: BellCorrelation, require_ns: bool = True) -> MappedBehaviour:
    """Map a no-signalling correlation to a behaviour ``q(b|[a|x],y) = p(a,b|x,y)/p_A(a|x)``.

    Preparations with ``p_A(a|x) = 0`` are left out of the scenario. With
    ``require_ns=False`` only Alice's marginal has to be well defined; if Bob's
    marginal depends on ``x`` the image then breaks the equivalences, by
    exactly the amount Bob's marginal moves.
    """
    m = marginals(p)
    if require_ns:
        ns = check_no_signalling(p)
        if not ns.verdict:
            raise SignallingInput(f"correlation is signalling (max residual {ns.residual})")
    elif not m.alice_well_defined:
        raise SignallingInput("Alice's marginal depends on Bob's input")
    sc = p.scenario
    labels = []
    table = {}
    for x, Ax in enumerate(sc.outcomes_A, start=1):
        for a in range(1, Ax + 1):
            weight = m.p_A[a, x]
            if weight == 0:
                continue
            label = prep_label(a, x)
            labels.append(label)
            for y, By in enumerate(sc.outcomes_B, start=1):
                for b in range(1, By + 1):
                    table[label, y, b] = p[a, b, x, y] / weight
    scenario = CtxScenario(tuple(labels), sc.outcomes_B, tuple(canonical_ns_equivalence(m)), sc.outcomes_A)
    kept = None
    if not scenario.equivalences and len(labels) > 1:
        kept = {key: v for key, v in m.p_A.items() if v > 0}
    return MappedBehaviour(validate_behaviour(table, scenario), sc.outcomes_A, kept)


class _UnionFind:
    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        self.parent[self.find(i)] = self.find(j)


def ns_decompositions(scenario: CtxScenario) -> dict[int, dict[int, Fraction]]:
    """Recover ``x -> {a: p_A(a|x)}`` from an equivalence set of no-signalling form.

    Every preparation must be labelled ``"a|x"``, every side of every
    equivalence must be the full decomposition of one input ``x``, each input
    must own exactly one decomposition, and all decompositions must be equated
    with each other (possibly through a chain).
    """
    decomps: dict[int, dict[int, Fraction]] = {}
    for label in scenario.prep_labels:
        if parse_prep_label(label) is None:
            raise NotNSForm(f"preparation {label!r} is not labelled as a|x; relabel first")
    edges = []
    for eq in scenario.equivalences:
        if eq.is_vacuous:
            continue
        side_inputs = []
        for side in (eq.lhs, eq.rhs):
            xs = {parse_prep_label(label)[1] for label in side}
            if len(xs) != 1:
                raise NotNSForm(f"one side of {eq} mixes preparations of different inputs")
            x = xs.pop()
            d = {parse_prep_label(label)[0]: w for label, w in side.items()}
            if x in decomps and decomps[x] != d:
                raise NotNSForm(f"input {x} appears with two different decompositions")
            decomps[x] = d
            side_inputs.append(x)
        if side_inputs[0] == side_inputs[1]:
            raise NotNSForm(f"{eq} equates input {side_inputs[0]} with itself")
        edges.append(tuple(side_inputs))
    uf = _UnionFind(decomps)
    for i, j in edges:
        uf.union(i, j)
    if len({uf.find(x) for x in decomps}) > 1:
        raise NotNSForm("decompositions are not all equated with each other")
    for label in scenario.prep_labels:
        a, x = parse_prep_label(label)
        if decomps and a not in decomps.get(x, {}):
            raise NotNSForm(f"preparation {label} does not appear in the equivalences")
    return decomps


def ctx_to_bell(m: MappedBehaviour | CtxBehaviour,
                index_A: tuple[int, ...] | None = None,
                alice_marginal: Mapping[tuple[int, int], Fraction] | None = None,
                ) -> BellCorrelation:
    """Inverse map: ``p(a,b|x,y) = p_A(a|x) q(b|[a|x],y)`` on the support, zero elsewhere.

    ``alice_marginal`` is only needed when the scenario carries no equivalence
    (a single Alice input), because then the weights cannot be read off.
    """
    if isinstance(m, MappedBehaviour):
        q = m.behaviour
        index_A = index_A or m.index_A
        alice_marginal = alice_marginal or m.alice_marginal
    else:
        q = m
        index_A = index_A or q.scenario.index_A
    if index_A is None:
        raise IndexTooSmall("the inverse map needs the Bell-side outcome tuple index_A")
    index_A = tuple(index_A)
    sc = q.scenario
    decomps = ns_decompositions(sc)
    if not decomps:
        if alice_marginal is None:
            if len(sc.prep_labels) == 1:
                a, x = parse_prep_label(sc.prep_labels[0])
                decomps = {x: {a: ONE}}
            else:
                raise NotNSForm("no equivalences: pass alice_marginal to fix the weights")
        else:
            for (a, x), w in alice_marginal.items():
                if w > 0:
                    decomps.setdefault(x, {})[a] = Fraction(w)
    X = len(index_A)
    if set(decomps) != set(range(1, X + 1)):
        raise IndexTooSmall(f"decompositions exist for inputs {sorted(decomps)}, index_A has {X} inputs")
    for x, d in decomps.items():
        if max(d) > index_A[x - 1]:
            raise IndexTooSmall(f"A_{x} = {index_A[x - 1]} is smaller than outcome {max(d)}")
    scenario = BellScenario(index_A, sc.outcomes_B)
    table = {}
    for a, b, x, y in scenario.cells():
        w = decomps[x].get(a)
        table[a, b, x, y] = ZERO if w is None else w * q[prep_label(a, x), y, b]
    return validate_correlation(table, scenario)


def chain_decompositions(equivalences) -> list[dict[str, Fraction]]:
    """Read the decompositions of a single hypothetical preparation.

    Accepts either a chain anchored at the first decomposition
    (``D1~D2, D1~D3, ...``) or a consecutive chain (``D1~D2, D2~D3, ...``).
    """
    eqs = [e for e in equivalences if not e.is_vacuous]
    if not eqs:
        return []
    if all(e.lhs == eqs[0].lhs for e in eqs):
        return [dict(eqs[0].lhs)] + [dict(e.rhs) for e in eqs]
    if all(eqs[i].rhs == eqs[i + 1].lhs for i in range(len(eqs) - 1)):
        return [dict(eqs[0].lhs)] + [dict(e.rhs) for e in eqs]
    raise NotOneHypotheticalForm("equivalences are not decompositions of a single hypothetical preparation")


def simplest_ns_relabelling(scenario: CtxScenario) -> tuple[dict[str, str], tuple[int, ...]]:
    """Relabel the ``k``-th preparation of decomposition ``x`` as ``"k|x"``.

    Requires every preparation to appear in exactly one decomposition.
    Returns the label map and the smallest compatible ``index_A``.
    """
    decomps = chain_decompositions(scenario.equivalences)
    mapping: dict[str, str] = {}
    sizes = []
    for x, d in enumerate(decomps, start=1):
        for k, label in enumerate(sorted(d, key=label_sort_key), start=1):
            if label in mapping:
                raise NotNSForm(f"preparation {label} appears in more than one decomposition")
            mapping[label] = prep_label(k, x)
        sizes.append(len(d))
    missing = set(scenario.prep_labels) - set(mapping)
    if missing:
        raise NotNSForm(f"preparations {sorted(missing, key=label_sort_key)} appear in no decomposition")
    return mapping, tuple(sizes)


def relabel_behaviour(q: CtxBehaviour, mapping: Mapping[str, str],
                      index_A: tuple[int, ...] | None = None) -> CtxBehaviour:
    """Rename preparations (``mapping[old] = new``) and attach ``index_A``."""
    sc = q.scenario
    if set(mapping) != set(sc.prep_labels):
        raise ShapeMismatch("relabelling must cover every preparation exactly once")
    if len(set(mapping.values())) != len(mapping):
        raise ShapeMismatch("relabelling is not injective")
    new_labels = tuple(sorted(mapping.values(), key=label_sort_key))
    eqs = tuple(PreparationEquivalence({mapping[k]: v for k, v in e.lhs.items()},
                                       {mapping[k]: v for k, v in e.rhs.items()})
                for e in sc.equivalences)
    scenario = CtxScenario(new_labels, sc.outcomes_B, eqs, index_A)
    table = {(mapping[label], y, b): v for (label, y, b), v in q.table.items()}
    return validate_behaviour(table, scenario)


# --------------------------------------------------------------------------
# removing and restoring Alice's trivial outcomes


@dataclass(frozen=True)
class RelabellingRecord:
    """Everything needed to undo :func:`reduce_tau`.

    ``outcome_permutations[x]`` lists the original outcome labels of input
    ``x`` in their new order (support first); ``removed_inputs[x]`` is the
    outcome that input ``x`` produced with certainty.
    """

    original_A: tuple[int, ...]
    reduced_A: tuple[int, ...]
    outcomes_B: tuple[int, ...]
    kept_inputs: tuple[int, ...]
    removed_inputs: Mapping[int, int]
    outcome_permutations: Mapping[int, tuple[int, ...]]
    bob_marginal: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    @property
    def fully_deterministic(self) -> bool:
        return not self.kept_inputs

    @property
    def is_identity(self) -> bool:
        return (not self.removed_inputs and self.reduced_A == self.original_A
                and all(perm == tuple(range(1, len(perm) + 1)) for perm in self.outcome_permutations.values()))


def reduce_tau(p: BellCorrelation) -> tuple[BellCorrelation | None, RelabellingRecord]:
    """Drop Alice's deterministic inputs and never-occurring outcomes.

    The surviving correlation has every Alice marginal strictly between 0 and
    1. If every input is deterministic there is nothing left; the correlation
    slot is ``None`` and the record alone (it keeps Bob's marginal) restores
    ``p``.
    """
    ns = check_no_signalling(p)
    if not ns.verdict:
        raise SignallingInput(f"correlation is signalling (max residual {ns.residual})")
    m = marginals(p)
    sc = p.scenario
    kept, removed, perms, reduced_A = [], {}, {}, []
    for x, Ax in enumerate(sc.outcomes_A, start=1):
        support = [a for a in range(1, Ax + 1) if m.p_A[a, x] > 0]
        if len(support) == 1:
            removed[x] = support[0]
            continue
        kept.append(x)
        perms[x] = tuple(support + [a for a in range(1, Ax + 1) if a not in support])
        reduced_A.append(len(support))
    record = RelabellingRecord(sc.outcomes_A, tuple(reduced_A), sc.outcomes_B, tuple(kept),
                               removed, perms, dict(m.p_B))
    if not kept:
        return None, record
    reduced = BellScenario(tuple(reduced_A), sc.outcomes_B)
    table = {}
    for a, b, x, y in reduced.cells():
        ox = kept[x - 1]
        table[a, b, x, y] = p[perms[ox][a - 1], b, ox, y]
    return validate_correlation(table, reduced), record


def embed_bell(p: BellCorrelation | None, record: RelabellingRecord | None = None,
               target_A: tuple[int, ...] | None = None) -> BellCorrelation:
    """Put ``p`` back into a larger Alice scenario.

    With a record this inverts :func:`reduce_tau`. Without one, ``target_A``
    pads each existing input with zero-probability outcomes and appends
    inputs whose outcome 1 occurs with certainty.
    """
    if record is None:
        if p is None or target_A is None:
            raise ShapeMismatch("embedding without a record needs a correlation and target_A")
        sc = p.scenario
        target_A = tuple(target_A)
        if len(target_A) < sc.inputs_X or any(t < s for t, s in zip(target_A, sc.outcomes_A)):
            raise ShapeMismatch(f"target {target_A} does not contain {sc.outcomes_A}")
        X0 = sc.inputs_X
        kept = tuple(range(1, X0 + 1))
        record = RelabellingRecord(
            original_A=target_A, reduced_A=sc.outcomes_A, outcomes_B=sc.outcomes_B,
            kept_inputs=kept,
            removed_inputs={x: 1 for x in range(X0 + 1, len(target_A) + 1)},
            outcome_permutations={x: tuple(range(1, target_A[x - 1] + 1)) for x in kept},
        )
    if p is None:
        if not record.fully_deterministic:
            raise ShapeMismatch("record expects a reduced correlation")
        p_B = record.bob_marginal
    else:
        if p.scenario.outcomes_A != record.reduced_A or p.scenario.outcomes_B != record.outcomes_B:
            raise ShapeMismatch(f"correlation shape {p.scenario.outcomes_A} does not match record {record.reduced_A}")
        p_B = marginals(p).p_B
    target = BellScenario(record.original_A, record.outcomes_B)
    table = {cell: ZERO for cell in target.cells()}
    for new_x, ox in enumerate(record.kept_inputs, start=1):
        perm = record.outcome_permutations[ox]
        for a in range(1, record.reduced_A[new_x - 1] + 1):
            for y, By in enumerate(record.outcomes_B, start=1):
                for b in range(1, By + 1):
                    table[perm[a - 1], b, ox, y] = p[a, b, new_x, y]
    for x, certain in record.removed_inputs.items():
        for y, By in enumerate(record.outcomes_B, start=1):
            for b in range(1, By + 1):
                table[certain, b, x, y] = p_B[b, y]
    return validate_correlation(table, target)


# --------------------------------------------------------------------------
# equivalence normal forms


def single_equivalence_normal_form(eq: PreparationEquivalence) -> PreparationEquivalence:
    """Rewrite ``eq`` so that no preparation appears on both sides.

    Subtracts ``min(lhs[P], rhs[P])`` of each preparation from both sides and
    renormalises by the common leftover mass. An identity (both sides equal)
    collapses to the vacuous equivalence; check ``is_vacuous``.
    """
    shared = {k: min(eq.lhs[k], eq.rhs[k]) for k in set(eq.lhs) & set(eq.rhs)}
    rest = ONE - sum(shared.values(), ZERO)
    if rest == 0:
        return PreparationEquivalence({}, {})
    lhs = {k: (v - shared.get(k, ZERO)) / rest for k, v in eq.lhs.items()}
    rhs = {k: (v - shared.get(k, ZERO)) / rest for k, v in eq.rhs.items()}
    return PreparationEquivalence(lhs, rhs)


@dataclass(frozen=True)
class Embedding:
    scenario: CtxScenario
    behaviour: CtxBehaviour | None
    label_map: Mapping[str, str]  # every new label -> the preparation whose row it copies
    subtracted: Mapping[str, Fraction]
    residual_mass: Fraction


def _fresh_labels(labels):
    numeric = []
    for label in labels:
        try:
            numeric.append(int(label))
        except ValueError:
            pass
    start = max(numeric) if numeric else len(labels)
    n = start
    while True:
        n += 1
        if str(n) not in labels:
            yield str(n)


def embed_repeated_preparations(scenario: CtxScenario, q: CtxBehaviour | None = None) -> Embedding:
    """Split repeated preparations so the equivalences reach no-signalling form.

    For decompositions ``D_1 ~ ... ~ D_X`` of one hypothetical preparation,
    first remove from every decomposition the smallest weight each
    preparation has across all of them, renormalise, then give every further
    occurrence of a preparation a fresh label. The behaviour rows of a clone
    copy the row of its source.
    """
    if q is not None and q.scenario != scenario:
        raise ShapeMismatch("behaviour does not belong to the given scenario")
    decomps = chain_decompositions(scenario.equivalences)
    labels = list(scenario.prep_labels)
    identity = {label: label for label in labels}
    if not decomps:
        return Embedding(scenario, q, identity, {}, ONE)
    everywhere = set.intersection(*(set(d) for d in decomps))
    subtracted = {k: min(d[k] for d in decomps) for k in sorted(everywhere, key=label_sort_key)}
    rest = ONE - sum(subtracted.values(), ZERO)
    if rest == 0:
        raise NotOneHypotheticalForm("all decompositions coincide; the equivalences are vacuous")
    reduced = [{k: (v - subtracted.get(k, ZERO)) / rest for k, v in d.items()} for d in decomps]
    reduced = [{k: v for k, v in d.items() if v != 0} for d in reduced]

    fresh = _fresh_labels(set(labels))
    seen: set[str] = set()
    label_map = dict(identity)
    split = []
    for d in reduced:
        nd = {}
        for label in sorted(d, key=label_sort_key):
            if label in seen:
                clone = next(fresh)
                label_map[clone] = label
                labels.append(clone)
                nd[clone] = d[label]
            else:
                seen.add(label)
                nd[label] = d[label]
        split.append(nd)
    eqs = tuple(PreparationEquivalence(split[0], d) for d in split[1:])
    index_A = scenario.index_A if len(labels) == len(scenario.prep_labels) else None
    new_scenario = CtxScenario(tuple(labels), scenario.outcomes_B, eqs, index_A)
    new_q = None
    if q is not None:
        table = {(label, y, b): q[label_map[label], y, b] for label, y, b in new_scenario.cells()}
        new_q = validate_behaviour(table, new_scenario)
    return Embedding(new_scenario, new_q, label_map, subtracted, rest)


def interior_blend(p: BellCorrelation, n: int) -> BellCorrelation:
    """``(1/n) p_int + (1 - 1/n) p`` with ``p_int(a,b|x,y) = p_A(a|x) / B_y``.

    Alice's marginals are unchanged for every ``n``.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    m = marginals(p)
    if not m.alice_well_defined:
        raise SignallingInput("Alice's marginal depends on Bob's input")
    sc = p.scenario
    w = Fraction(1, int(n))
    table = {}
    for a, b, x, y in sc.cells():
        interior = m.p_A[a, x] / sc.outcomes_B[y - 1]
        table[a, b, x, y] = w * interior + (1 - w) * p[a, b, x, y]
    return validate_correlation(table, sc)
