"""Finite-dimensional quantum realisations in floating point.

Two constructions connect Bell experiments with prepare-and-measure ones:

* :func:`assemblage_from_bell` measures Alice's half of a shared state and
  records Bob's conditional states ``rho_{a|x}`` with their weights.
* :func:`hjw_construct` goes back: from an assemblage whose members average
  to the same ``rho_B`` for every ``x`` it builds a pure state and POVMs for
  Alice that steer Bob to exactly that assemblage.

Everything here is numpy floating point. Exact modules only see these numbers
through :func:`snap_correlation`, which rounds to nearby rationals with a
bounded denominator and refuses when the rounding error is too large.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import BellCorrelation, BellScenario, prep_label, validate_correlation
from .errors import DimensionMismatch, InvalidRealisation, RankDeficientInput, TableError

EPS_RANK = 1e-10
TOLERANCE = 1e-9
SNAP_DENOMINATOR = 10**6
SNAP_TOLERANCE = 1e-9


def partial_trace_A(op: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """``Tr_A`` of an operator on ``C^dA (x) C^dB``."""
    dA, dB = dims
    op = np.asarray(op)
    if op.shape != (dA * dB, dA * dB):
        raise DimensionMismatch(f"operator of shape {op.shape} does not factor as {dA}x{dB}")
    return np.einsum("iaib->ab", op.reshape(dA, dB, dA, dB))


def is_psd(m: np.ndarray, tol: float) -> bool:
    if not np.allclose(m, m.conj().T, atol=tol):
        return False
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2).min()) >= -tol


def _check_povm(povm: Sequence[np.ndarray], d: int, tol: float, name: str) -> None:
    total = np.zeros((d, d), dtype=complex)
    for k, m in enumerate(povm):
        if m.shape != (d, d):
            raise InvalidRealisation(f"{name} element {k + 1} has shape {m.shape}, expected {(d, d)}")
        if not is_psd(m, tol):
            raise InvalidRealisation(f"{name} element {k + 1} is not positive semidefinite")
        total = total + m
    if np.abs(total - np.eye(d)).max() > tol:
        raise InvalidRealisation(f"{name} does not sum to the identity")


@dataclass(frozen=True)
class QuantumBellRealisation:
    """State ``rho`` on ``C^dA (x) C^dB`` with POVMs ``M[x][a]`` for Alice and ``N[y][b]`` for Bob.

    Inputs and outcomes are 0-based positions here; tables built from a
    realisation use the usual 1-based labels.
    """

    dims: tuple[int, int]
    rho: np.ndarray
    M: tuple[tuple[np.ndarray, ...], ...]
    N: tuple[tuple[np.ndarray, ...], ...]

    def validate(self, tol: float = TOLERANCE) -> "QuantumBellRealisation":
        dA, dB = self.dims
        if self.rho.shape != (dA * dB, dA * dB):
            raise DimensionMismatch(f"state of shape {self.rho.shape} does not match dims {self.dims}")
        if not is_psd(self.rho, tol):
            raise InvalidRealisation("state is not positive semidefinite")
        if abs(np.trace(self.rho) - 1) > tol:
            raise InvalidRealisation(f"state has trace {np.trace(self.rho).real:.12g}")
        for x, povm in enumerate(self.M, start=1):
            _check_povm(povm, dA, tol, f"Alice's POVM {x}")
        for y, povm in enumerate(self.N, start=1):
            _check_povm(povm, dB, tol, f"Bob's POVM {y}")
        return self

    @property
    def scenario(self) -> BellScenario:
        return BellScenario(tuple(len(m) for m in self.M), tuple(len(n) for n in self.N))


@dataclass(frozen=True)
class Assemblage:
    """Weights ``weights[x][a]`` and normalised states ``states[x][a]`` averaging to ``rho_B``.

    A state is ``None`` where its weight is below the threshold it was built with.
    """

    weights: tuple[tuple[float, ...], ...]
    states: tuple[tuple[np.ndarray | None, ...], ...]
    rho_B: np.ndarray

    @property
    def dim(self) -> int:
        return self.rho_B.shape[0]

    def averaging_residual(self) -> float:
        """``max_x || sum_a w(a|x) rho_{a|x} - rho_B ||`` in the max-abs entry norm."""
        worst = 0.0
        for ws, sts in zip(self.weights, self.states):
            total = np.zeros_like(self.rho_B)
            for w, s in zip(ws, sts):
                if s is not None:
                    total = total + w * s
            worst = max(worst, float(np.abs(total - self.rho_B).max()))
        return worst


def assemblage_from_bell(r: QuantumBellRealisation, threshold: float = 1e-12, tol: float = TOLERANCE):
    """Bob's conditional states after each of Alice's outcomes.

    Returns ``(assemblage, behaviour)`` where ``behaviour`` maps
    ``(prep_label, y, b)`` to ``Tr(N^y_b rho_{a|x})`` in floating point, for
    the preparations with weight above ``threshold``.
    """
    r.validate(tol)
    dA, dB = r.dims
    eye_B = np.eye(dB)
    weights, states = [], []
    for povm in r.M:
        ws, sts = [], []
        for m in povm:
            conditioned = partial_trace_A(np.kron(m, eye_B) @ r.rho, r.dims)
            w = float(np.trace(conditioned).real)
            ws.append(w)
            sts.append(conditioned / w if w > threshold else None)
        weights.append(tuple(ws))
        states.append(tuple(sts))
    rho_B = partial_trace_A(r.rho, r.dims)
    asm = Assemblage(tuple(weights), tuple(states), rho_B)
    behaviour = {}
    for x, sts in enumerate(asm.states, start=1):
        for a, s in enumerate(sts, start=1):
            if s is None:
                continue
            for y, povm in enumerate(r.N, start=1):
                for b, n in enumerate(povm, start=1):
                    behaviour[prep_label(a, x), y, b] = float(np.trace(n @ s).real)
    return asm, behaviour


def _phase_fixed(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = next(i for i in range(len(col)) if abs(col[i]) > 1e-12)
        out[:, k] = col * (abs(col[idx]) / col[idx])
    return out


@dataclass(frozen=True)
class HJWResult:
    """Pure state ``psi`` on ``C^r (x) C^d`` and Alice's POVMs on ``C^r``.

    ``r`` is the rank of ``rho_B``. Alice's space is identified with the
    support of ``rho_B`` through ``basis`` (columns are the kept eigenvectors,
    eigenvalues descending), so the support projector is the identity on ``C^r``.
    """

    psi: np.ndarray
    M: tuple[tuple[np.ndarray, ...], ...]
    basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        return self.basis.shape[1], self.basis.shape[0]

    @property
    def rho(self) -> np.ndarray:
        return np.outer(self.psi, self.psi.conj())


def hjw_construct(asm: Assemblage, eps_rank: float = EPS_RANK, tol: float = TOLERANCE) -> HJWResult:
    """Build ``|Psi> = sum_n sqrt(l_n) |n>|v_n>`` and ``M^x_a = S (w rho_{a|x})^T S`` on the support.

    ``S = diag(l_n^{-1/2})`` and the transpose is taken in the eigenbasis
    ``{v_n}`` of ``rho_B``. Outcomes whose state is missing get the zero
    operator.
    """
    rho_B = (asm.rho_B + asm.rho_B.conj().T) / 2
    vals, vecs = np.linalg.eigh(rho_B)
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    keep = vals > eps_rank
    lam, V = vals[keep], _phase_fixed(vecs[:, keep])
    r, d = len(lam), rho_B.shape[0]
    if r == 0:
        raise RankDeficientInput("average state has no eigenvalue above the rank threshold")
    outside = np.eye(d) - V @ V.conj().T
    S = np.diag(lam ** -0.5)
    povms = []
    for x, (ws, sts) in enumerate(zip(asm.weights, asm.states), start=1):
        elems = []
        for a, (w, s) in enumerate(zip(ws, sts), start=1):
            if s is None:
                elems.append(np.zeros((r, r), dtype=complex))
                continue
            sub = w * s
            if np.abs(outside @ sub @ outside).max() > tol:
                raise RankDeficientInput(f"state for outcome {a} of input {x} leaves the support of the average")
            R = V.conj().T @ sub @ V
            elems.append(S @ R.T @ S)
        povms.append(tuple(elems))
    psi = np.zeros(r * d, dtype=complex)
    for n in range(r):
        psi += np.sqrt(lam[n]) * np.kron(np.eye(r)[n], V[:, n])
    return HJWResult(psi, tuple(povms), V, lam)


@dataclass(frozen=True)
class SteeringResidual:
    steering: float  # max over (a,x) of the entrywise gap to w(a|x) rho_{a|x}
    completeness: float  # max over x of || sum_a M^x_a - identity on the support ||
    positivity: float  # most negative eigenvalue among the M^x_a, as a nonnegative number


def verify_steering(psi: np.ndarray, M, asm: Assemblage) -> SteeringResidual:
    """Residuals of the steering relation; defects are measured, never raised."""
    d = asm.dim
    r = psi.shape[0] // d
    if r * d != psi.shape[0]:
        raise DimensionMismatch(f"state of length {psi.shape[0]} does not factor with Bob dimension {d}")
    rho = np.outer(psi, psi.conj())
    eye = np.eye(d)
    steering, completeness, negativity = 0.0, 0.0, 0.0
    for povm, ws, sts in zip(M, asm.weights, asm.states):
        total = np.zeros((r, r), dtype=complex)
        for m, w, s in zip(povm, ws, sts):
            total = total + m
            negativity = max(negativity, -float(np.linalg.eigvalsh((m + m.conj().T) / 2).min()))
            target = w * s if s is not None else np.zeros((d, d))
            got = partial_trace_A(np.kron(m, eye) @ rho, (r, d))
            steering = max(steering, float(np.abs(got - target).max()))
        completeness = max(completeness, float(np.abs(total - np.eye(r)).max()))
    return SteeringResidual(steering, completeness, negativity)


def correlation_table(rho: np.ndarray, M, N, dims: tuple[int, int]) -> dict[tuple[int, int, int, int], float]:
    """``p(a,b|x,y) = Tr((M^x_a (x) N^y_b) rho)`` keyed by 1-based ``(a, b, x, y)``."""
    table = {}
    for x, mx in enumerate(M, start=1):
        for y, ny in enumerate(N, start=1):
            for a, m in enumerate(mx, start=1):
                for b, n in enumerate(ny, start=1):
                    table[a, b, x, y] = float(np.trace(np.kron(m, n) @ rho).real)
    return table


def realisation_to_tables(r: QuantumBellRealisation, tol: float = TOLERANCE) -> dict:
    r.validate(tol)
    return correlation_table(r.rho, r.M, r.N, r.dims)


def hjw_realisation(result: HJWResult, N) -> QuantumBellRealisation:
    """The realisation obtained by pairing the constructed state and POVMs with Bob's measurements."""
    return QuantumBellRealisation(result.dims, result.rho, result.M, tuple(tuple(n) for n in N))


@dataclass(frozen=True)
class SnapResult:
    correlation: BellCorrelation | None
    max_error: float
    reason: str = ""


def simplest_rational(lo: Fraction, hi: Fraction) -> Fraction:
    """The fraction with the smallest denominator in ``[lo, hi]``."""
    if lo > hi:
        raise ValueError("empty interval")
    floor = lo.numerator // lo.denominator
    if floor == lo:
        return Fraction(floor)
    if floor + 1 <= hi:
        return Fraction(floor + 1)
    return floor + 1 / simplest_rational(1 / (hi - floor), 1 / (lo - floor))


def snap_value(v: float, denominator: int = SNAP_DENOMINATOR, tolerance: float = SNAP_TOLERANCE) -> Fraction | None:
    """Simplest fraction within ``tolerance`` of ``v``, or None if its denominator is too large."""
    exact, tol = Fraction(v), Fraction(tolerance)
    f = simplest_rational(exact - tol, exact + tol)
    return f if f.denominator <= denominator else None


def snap_correlation(table: dict, scenario: BellScenario, denominator: int = SNAP_DENOMINATOR,
                     tolerance: float = SNAP_TOLERANCE) -> SnapResult:
    """Replace every entry by the simplest fraction within ``tolerance``.

    Succeeds only if every such fraction has denominator at most
    ``denominator`` and the result is an exact correlation. Taking the
    simplest fraction, not the closest, recovers genuinely rational tables
    exactly; irrational entries land on unrelated fractions whose rows no
    longer sum to one, so those tables are refused.
    """
    snapped, worst = {}, 0.0
    for cell in scenario.cells():
        v = table[cell]
        f = snap_value(v, denominator, tolerance)
        if f is None:
            return SnapResult(None, float("nan"), f"entry {cell} has no fraction with denominator <= {denominator} "
                                                  f"within {tolerance:.3g}")
        worst = max(worst, abs(float(f) - v))
        snapped[cell] = f
    try:
        return SnapResult(validate_correlation(snapped, scenario), worst)
    except TableError as exc:
        return SnapResult(None, worst, f"rounded table is not a correlation: {exc}")


def chsh_value(table: dict) -> float:
    """``E11 + E12 + E21 - E22`` for binary inputs and outcomes, ``E = p(same) - p(different)``."""
    total = 0.0
    for x in (1, 2):
        for y in (1, 2):
            e = sum((1 if a == b else -1) * table[a, b, x, y] for a in (1, 2) for b in (1, 2))
            total += -e if (x, y) == (2, 2) else e
    return total


# --------------------------------------------------------------------------
# generators


def _proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def observable_povm(obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the +1 and -1 eigenspaces of a 2x2 observable."""
    eye = np.eye(obs.shape[0])
    return (eye + obs) / 2, (eye - obs) / 2


def singlet() -> np.ndarray:
    return _proj(np.array([0, 1, -1, 0]) / np.sqrt(2))


def tsirelson_realisation() -> QuantumBellRealisation:
    """Singlet, Alice measures Z and X, Bob measures (Z+X)/sqrt2 and (Z-X)/sqrt2; ``|CHSH| = 2 sqrt2``."""
    M = (observable_povm(PAULI_Z), observable_povm(PAULI_X))
    N = (observable_povm((PAULI_Z + PAULI_X) / np.sqrt(2)), observable_povm((PAULI_Z - PAULI_X) / np.sqrt(2)))
    return QuantumBellRealisation((2, 2), singlet(), M, N)


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_povm(d: int, outcomes: int, rng: np.random.Generator) -> tuple[np.ndarray, ...]:
    """Random full-rank POVM: ``S^{-1/2} G_k S^{-1/2}`` for random positive ``G_k`` with sum ``S``."""
    G = []
    for _ in range(outcomes):
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        G.append(A @ A.conj().T)
    total = sum(G)
    vals, vecs = np.linalg.eigh(total)
    inv_sqrt = vecs @ np.diag(vals ** -0.5) @ vecs.conj().T
    return tuple(inv_sqrt @ g @ inv_sqrt for g in G)


def random_pure_full_rank(d: int, rng: np.random.Generator) -> np.ndarray:
    """Pure state on ``C^d (x) C^d`` whose reduced state has full rank (with probability one)."""
    v = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
    return _proj(v / np.linalg.norm(v))


def random_realisation(dims: tuple[int, int], outcomes_A: Sequence[int], outcomes_B: Sequence[int],
                       rng: np.random.Generator, pure: bool = True) -> QuantumBellRealisation:
    dA, dB = dims
    if pure:
        v = rng.normal(size=dA * dB) + 1j * rng.normal(size=dA * dB)
        rho = _proj(v / np.linalg.norm(v))
    else:
        rho = random_state(dA * dB, rng)
    M = tuple(random_povm(dA, n, rng) for n in outcomes_A)
    N = tuple(random_povm(dB, n, rng) for n in outcomes_B)
    return QuantumBellRealisation(dims, rho, M, N)


def random_assemblage(d: int, outcomes_A: Sequence[int], rng: np.random.Generator) -> Assemblage:
    """Steer a random full-rank pure state with random POVMs on Alice's side."""
    rho = random_pure_full_rank(d, rng)
    M = tuple(random_povm(d, n, rng) for n in outcomes_A)
    trivial = ((np.eye(d, dtype=complex),),)
    asm, _ = assemblage_from_bell(QuantumBellRealisation((d, d), rho, M, trivial))
    return asm


# --------------------------------------------------------------------------
# file formats


def _matrix_to_obj(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _matrix_from_obj(obj) -> np.ndarray:
    try:
        return np.array([[complex(re, im) for re, im in row] for row in obj], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InvalidRealisation(f"matrix entries must be [re, im] pairs: {exc}") from None


def realisation_to_obj(r: QuantumBellRealisation) -> dict:
    return {
        "type": "quantum-realisation",
        "dims": list(r.dims),
        "rho": _matrix_to_obj(r.rho),
        "M": [[_matrix_to_obj(m) for m in povm] for povm in r.M],
        "N": [[_matrix_to_obj(n) for n in povm] for povm in r.N],
    }


def realisation_from_obj(obj: dict) -> QuantumBellRealisation:
    try:
        return QuantumBellRealisation(
            tuple(obj["dims"]),
            _matrix_from_obj(obj["rho"]),
            tuple(tuple(_matrix_from_obj(m) for m in povm) for povm in obj["M"]),
            tuple(tuple(_matrix_from_obj(n) for n in povm) for povm in obj["N"]),
        )
    except KeyError as exc:
        raise InvalidRealisation(f"realisation file lacks {exc.args[0]!r}") from None


def _weight_to_str(w) -> str:
    return str(w) if isinstance(w, Fraction) else repr(float(w))


def assemblage_to_obj(asm: Assemblage) -> dict:
    return {
        "type": "assemblage",
        "dim": asm.dim,
        "weights": [[_weight_to_str(w) for w in ws] for ws in asm.weights],
        "states": [[None if s is None else _matrix_to_obj(s) for s in sts] for sts in asm.states],
        "rho_B": _matrix_to_obj(asm.rho_B),
    }


def assemblage_from_obj(obj: dict) -> Assemblage:
    try:
        weights = tuple(tuple(float(Fraction(str(w))) for w in ws) for ws in obj["weights"])
        states = tuple(tuple(None if s is None else _matrix_from_obj(s) for s in sts) for sts in obj["states"])
    except KeyError as exc:
        raise InvalidRealisation(f"assemblage file lacks {exc.args[0]!r}") from None
    except ValueError as exc:
        raise InvalidRealisation(f"bad assemblage weight: {exc}") from None
    if "rho_B" in obj:
        rho_B = _matrix_from_obj(obj["rho_B"])
    else:
        rho_B = sum(w * s for w, s in zip(weights[0], states[0]) if s is not None)
    if len(weights) != len(states) or any(len(w) != len(s) for w, s in zip(weights, states)):
        raise InvalidRealisation("weights and states have different shapes")
    return Assemblage(weights, states, rho_B)
