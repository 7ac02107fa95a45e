from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bellctx.core import BellScenario
from bellctx.errors import DimensionMismatch, InvalidRealisation, RankDeficientInput
from bellctx.quantum import (
    PAULI_X,
    PAULI_Z,
    Assemblage,
    QuantumBellRealisation,
    assemblage_from_bell,
    assemblage_from_obj,
    assemblage_to_obj,
    chsh_value,
    hjw_construct,
    hjw_realisation,
    is_psd,
    observable_povm,
    partial_trace_A,
    random_assemblage,
    random_realisation,
    random_state,
    realisation_from_obj,
    realisation_to_obj,
    realisation_to_tables,
    simplest_rational,
    singlet,
    snap_correlation,
    snap_value,
    tsirelson_realisation,
    verify_steering,
)

KET0, KET1 = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
PLUS, MINUS = (KET0 + KET1) / np.sqrt(2), (KET0 - KET1) / np.sqrt(2)


def proj(v):
    return np.outer(v, v.conj())


def close(a, b, tol=1e-12):
    return np.abs(np.asarray(a) - np.asarray(b)).max() <= tol


seeds = st.integers(0, 2**32 - 1)


# ------------------------------------------------------------ partial trace


def test_partial_trace_of_maximally_entangled_state():
    phi = (np.kron(KET0, KET0) + np.kron(KET1, KET1)) / np.sqrt(2)
    assert close(partial_trace_A(proj(phi), (2, 2)), np.eye(2) / 2)


def test_partial_trace_of_product():
    rng = np.random.default_rng(0)
    sigma, tau = random_state(3, rng), random_state(2, rng)
    assert close(partial_trace_A(np.kron(2 * sigma, tau), (3, 2)), 2 * tau)
    with pytest.raises(DimensionMismatch):
        partial_trace_A(np.eye(6), (2, 2))


@settings(max_examples=50)
@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_partial_trace_preserves_trace(seed, dA, dB):
    rho = random_state(dA * dB, np.random.default_rng(seed))
    assert abs(np.trace(partial_trace_A(rho, (dA, dB))) - np.trace(rho)) <= 1e-12


# --------------------------------------------------------------- assemblages


def _singlet_zx():
    M = (observable_povm(PAULI_Z), observable_povm(PAULI_X))
    return QuantumBellRealisation((2, 2), singlet(), M, (observable_povm(PAULI_Z),))


def test_singlet_steering():
    asm, behaviour = assemblage_from_bell(_singlet_zx())
    assert close(asm.rho_B, np.eye(2) / 2)
    assert np.allclose(asm.weights, 0.5)
    # perfect anticorrelation: Alice's +1 outcome leaves Bob in the opposite eigenstate
    assert close(asm.states[0][0], proj(KET1)) and close(asm.states[0][1], proj(KET0))
    assert close(asm.states[1][0], proj(MINUS)) and close(asm.states[1][1], proj(PLUS))
    assert abs(behaviour["1|1", 1, 2] - 1) <= 1e-12
    assert asm.averaging_residual() <= 1e-12


def test_product_state_does_not_steer():
    rng = np.random.default_rng(1)
    sigma, tau = random_state(2, rng), random_state(3, rng)
    M = (random_povm_pair(rng), random_povm_pair(rng))
    r = QuantumBellRealisation((2, 3), np.kron(sigma, tau), M, ((np.eye(3),),))
    asm, _ = assemblage_from_bell(r)
    for sts in asm.states:
        for s in sts:
            assert close(s, tau, 1e-10)


def random_povm_pair(rng):
    from bellctx.quantum import random_povm
    return random_povm(2, 2, rng)


def test_invalid_realisation_is_refused():
    bad = QuantumBellRealisation((2, 2), singlet(), ((np.eye(2), np.eye(2)),), ((np.eye(2),),))
    with pytest.raises(InvalidRealisation):
        assemblage_from_bell(bad)
    with pytest.raises(InvalidRealisation):
        realisation_to_tables(QuantumBellRealisation((2, 2), 2 * singlet(), bad.N, bad.N))


@settings(max_examples=20)
@given(seeds, st.integers(2, 4))
def test_assemblage_averages_to_bob_state(seed, d):
    rng = np.random.default_rng(seed)
    r = random_realisation((d, d), (2, 3), (2,), rng, pure=bool(seed % 2))
    asm, _ = assemblage_from_bell(r)
    assert asm.averaging_residual() <= 1e-10


# ---------------------------------------------------------------------- HJW


def test_diagonal_assemblage():
    asm = Assemblage(((0.5, 0.5),), ((proj(KET0), proj(KET1)),), np.eye(2) / 2)
    res = hjw_construct(asm)
    phi = (np.kron(KET0, KET0) + np.kron(KET1, KET1)) / np.sqrt(2)
    assert close(res.psi, phi)
    assert close(res.M[0][0], proj(KET0)) and close(res.M[0][1], proj(KET1))
    r = verify_steering(res.psi, res.M, asm)
    assert max(r.steering, r.completeness, r.positivity) <= 1e-10


def test_real_plus_minus_assemblage():
    asm = Assemblage(((0.5, 0.5),), ((proj(PLUS), proj(MINUS)),), np.eye(2) / 2)
    res = hjw_construct(asm)
    assert close(res.M[0][0], proj(PLUS)) and close(res.M[0][1], proj(MINUS))
    r = verify_steering(res.psi, res.M, asm)
    assert max(r.steering, r.completeness, r.positivity) <= 1e-10


def test_rank_one_average():
    asm = Assemblage(((1.0,),), ((proj(KET0),),), proj(KET0))
    res = hjw_construct(asm)
    assert res.dims == (1, 2)
    assert close(res.psi, np.kron([1], KET0)) and close(res.M[0][0], [[1]])
    r = verify_steering(res.psi, res.M, asm)
    assert max(r.steering, r.completeness) <= 1e-10


def test_state_outside_support_is_refused():
    asm = Assemblage(((0.5, 0.5),), ((proj(KET0), proj(KET1)),), proj(KET0))
    with pytest.raises(RankDeficientInput):
        hjw_construct(asm)


def test_planted_steering_error_is_measured():
    rng = np.random.default_rng(5)
    asm = random_assemblage(3, (2, 3), rng)
    res = hjw_construct(asm)
    M = [list(povm) for povm in res.M]
    M[1][2] = 2 * M[1][2]
    r = verify_steering(res.psi, M, asm)
    planted = np.abs(asm.weights[1][2] * asm.states[1][2]).max()
    assert abs(r.steering - planted) <= 1e-10
    assert r.completeness > 1e-3


@settings(max_examples=30)
@given(seeds, st.integers(2, 4))
def test_hjw_invariants(seed, d):
    rng = np.random.default_rng(seed)
    asm = random_assemblage(d, (2, 3, 2), rng)
    res = hjw_construct(asm)
    r = verify_steering(res.psi, res.M, asm)
    assert r.steering <= 1e-9 and r.completeness <= 1e-10 and r.positivity <= 1e-10
    assert all(is_psd(m, 1e-10) for povm in res.M for m in povm)


@settings(max_examples=20)
@given(seeds, st.integers(2, 3))
def test_round_trip_with_mixed_states(seed, d):
    rng = np.random.default_rng(seed)
    r = random_realisation((d, d), (2, 2), (3, 2), rng, pure=False)
    source = realisation_to_tables(r)
    asm, _ = assemblage_from_bell(r)
    rebuilt = realisation_to_tables(hjw_realisation(hjw_construct(asm), r.N))
    assert max(abs(rebuilt[c] - source[c]) for c in source) <= 1e-9


# ------------------------------------------------------------------ tables


def test_singlet_aligned_measurements_snap_exactly():
    r = QuantumBellRealisation((2, 2), singlet(), (observable_povm(PAULI_Z),), (observable_povm(PAULI_Z),))
    snap = snap_correlation(realisation_to_tables(r), r.scenario)
    p = snap.correlation
    assert p[1, 1, 1, 1] == 0 and p[2, 2, 1, 1] == 0
    assert p[1, 2, 1, 1] == F(1, 2) and p[2, 1, 1, 1] == F(1, 2)


def test_tsirelson_value_is_not_snapped():
    r = tsirelson_realisation()
    table = realisation_to_tables(r)
    assert abs(abs(chsh_value(table)) - 2 * np.sqrt(2)) <= 1e-10
    snap = snap_correlation(table, r.scenario)
    assert snap.correlation is None and snap.reason


def test_deterministic_product_snaps_to_vertex():
    M = ((proj(KET0), proj(KET1)),)
    N = ((proj(KET1), proj(KET0)),)
    r = QuantumBellRealisation((2, 2), proj(np.kron(KET0, KET0)), M, N)
    p = snap_correlation(realisation_to_tables(r), r.scenario).correlation
    assert p.values() == [0, 1, 0, 0]


def test_simplest_rational():
    assert simplest_rational(F(1, 3) - F(1, 10**9), F(1, 3) + F(1, 10**9)) == F(1, 3)
    assert snap_value(0.1) == F(1, 10)
    assert snap_value(-1e-17) == 0
    assert snap_value(np.sqrt(2) - 1, denominator=1000) is None


# ------------------------------------------------------------------- codecs


def test_realisation_and_assemblage_codecs():
    r = tsirelson_realisation()
    back = realisation_from_obj(realisation_to_obj(r))
    assert back.dims == r.dims and close(back.rho, r.rho, 0)
    assert all(close(a, b, 0) for pa, pb in zip(back.N, r.N) for a, b in zip(pa, pb))
    asm, _ = assemblage_from_bell(r)
    again = assemblage_from_obj(assemblage_to_obj(asm))
    assert again.weights == asm.weights and close(again.rho_B, asm.rho_B, 0)
    with pytest.raises(InvalidRealisation):
        realisation_from_obj({"dims": [2, 2]})


def test_scenario_of_realisation():
    assert tsirelson_realisation().scenario == BellScenario((2, 2), (2, 2))
