import numpy as np
import pytest

from elastodn import (BoundaryChart, CotangentPoint, LaplaceProbe, MediumJet,
                      StratifiedProfile, assemble_triple, closed_form_factors,
                      closed_form_factorization, companion_block, decay_check,
                      elliptic_dn_solve, principal_dn_symbol,
                      split_boundary_field, splitting_matrices)
from elastodn.symbols import random_triple_draw

FLAT = BoundaryChart.flat()
CONST = StratifiedProfile.constant(2.0, 1.0, 1.0, span=(0.0, 30.0))


def triple_and_fact(jet, point, tau_hat=1.0):
    triple = assemble_triple(jet, FLAT, point, tau_hat)
    fact = closed_form_factorization(
        closed_form_factors(jet, point.eta_prime, tau_hat), triple.nn, FLAT)
    return triple, fact


def test_inverse_identity_and_blocks():
    rng = np.random.default_rng(2)
    for i in range(50):
        jet, point, tau_hat = random_triple_draw(rng, complex_tau=(i % 2 == 0))
        triple, fact = triple_and_fact(jet, point, tau_hat)
        state = splitting_matrices(fact)
        assert np.linalg.norm(state.p @ state.p_inv - np.eye(6)) <= 1e-11
        # displayed block structure of the inverse
        assert np.allclose(state.p_inv[:3, :3], np.eye(3))
        assert np.allclose(state.p_inv[:3, 3:], np.eye(3))
        assert np.allclose(state.p_inv[3:, :3], fact.plus)
        assert np.allclose(state.p_inv[3:, 3:], fact.minus_right)


def test_real_tau_conjugation_relation():
    # with the right-solvent pair the real-tau relation is that complex
    # conjugation swaps the two constituents: conj(P_inv) = P_inv @ blockswap
    rng = np.random.default_rng(3)
    for _ in range(25):
        jet, point, _ = random_triple_draw(rng)
        _, fact = triple_and_fact(jet, point, 1.0)
        state = splitting_matrices(fact)
        swap = np.block([[np.zeros((3, 3)), np.eye(3)], [np.eye(3), np.zeros((3, 3))]])
        assert np.linalg.norm(state.p_inv.conj() - state.p_inv @ swap) <= \
            1e-12 * np.linalg.norm(state.p_inv)
        assert np.linalg.norm(fact.minus_right - fact.plus.conj()) <= \
            1e-10 * np.linalg.norm(fact.plus)


def test_diagonalization_identity_sweep():
    rng = np.random.default_rng(8)
    for i in range(200):
        jet, point, tau_hat = random_triple_draw(rng, complex_tau=(i % 2 == 0))
        triple, fact = triple_and_fact(jet, point, tau_hat)
        state = splitting_matrices(fact)
        block = companion_block(triple)
        target = np.block([[fact.plus, np.zeros((3, 3))],
                           [np.zeros((3, 3)), fact.minus_right]])
        gap = np.linalg.norm(state.p @ block @ state.p_inv - target)
        assert gap <= 1e-10 * max(1.0, np.linalg.norm(target))


def test_spectrum_separation_complex_tau_sweep():
    rng = np.random.default_rng(5)
    for _ in range(200):
        jet, point, tau_hat = random_triple_draw(rng, complex_tau=True)
        _, fact = triple_and_fact(jet, point, tau_hat)
        eig = np.concatenate([fact.eig_plus, fact.eig_minus])
        assert np.min(np.abs(eig.imag)) > 1e-10


def test_first_block_row_recovers_field():
    jet = MediumJet(2.0, 1.0, 1.0)
    point = CotangentPoint(eta_prime=(1.0, 0.0))
    _, fact = triple_and_fact(jet, point)
    state = splitting_matrices(fact)
    rng = np.random.default_rng(4)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    # field with no outgoing component: slope = plus v
    stacked = state.p @ np.concatenate([v, fact.plus @ v])
    assert np.linalg.norm(stacked[:3] - v) <= 1e-12 * np.linalg.norm(v)
    assert np.linalg.norm(stacked[3:]) <= 1e-12 * np.linalg.norm(v)


def test_split_boundary_field_decaying_solution():
    # the trace of the decaying elliptic solution carries only v_plus
    probe = LaplaceProbe(tau=4.0)
    jet = CONST.jet(0.0)
    point = CotangentPoint(eta_prime=(1.0, 0.0))
    triple, fact = triple_and_fact(jet, point)
    state = splitting_matrices(fact)
    lam0 = principal_dn_symbol(fact, triple)
    psi = np.array([0.7, -0.1, 0.9], complex)
    sol = elliptic_dn_solve(CONST, (1.0, 0.0), probe, psi)
    v_plus, v_minus = split_boundary_field(state, psi, sol.traction, triple, probe.h)
    assert np.linalg.norm(v_minus) <= 1e-8 * np.linalg.norm(psi)
    assert np.linalg.norm(v_plus - psi) <= 1e-8 * np.linalg.norm(psi)
    # same split from the analytic DN value
    v_plus2, v_minus2 = split_boundary_field(state, psi, lam0 @ psi, triple, probe.h)
    assert np.linalg.norm(v_minus2) <= 1e-12
    assert np.linalg.norm(v_plus2 - psi) <= 1e-12


def test_split_boundary_field_outgoing_construction():
    # dn data manufactured from the downward solvent: v_plus vanishes
    rng = np.random.default_rng(6)
    jet, point, tau_hat = random_triple_draw(rng)
    triple, fact = triple_and_fact(jet, point, tau_hat)
    state = splitting_matrices(fact)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    # traction of a field governed by the downward solvent
    dn_value = -1j * (triple.nn @ fact.minus_right + triple.mn.T) @ v
    v_plus, v_minus = split_boundary_field(state, v, dn_value, triple, 0.2)
    assert np.linalg.norm(v_plus) <= 1e-10 * np.linalg.norm(v)
    assert np.linalg.norm(v_minus - v) <= 1e-10 * np.linalg.norm(v)


def test_split_zero_field():
    jet = MediumJet(2.0, 1.0, 1.0)
    point = CotangentPoint(eta_prime=(1.0, 0.0))
    triple, fact = triple_and_fact(jet, point)
    state = splitting_matrices(fact)
    v_plus, v_minus = split_boundary_field(state, np.zeros(3), np.zeros(3), triple, 0.25)
    assert np.all(v_plus == 0) and np.all(v_minus == 0)


def test_completeness_exact():
    rng = np.random.default_rng(9)
    for i in range(100):
        jet, point, tau_hat = random_triple_draw(rng, complex_tau=(i % 3 == 0))
        triple, fact = triple_and_fact(jet, point, tau_hat)
        state = splitting_matrices(fact)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        dn_value = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v_plus, v_minus = split_boundary_field(state, v, dn_value, triple, 0.3)
        assert np.linalg.norm(v_plus + v_minus - v) <= 1e-12 * np.linalg.norm(v)


def test_decay_rate_constant_medium():
    probe = LaplaceProbe(tau=4.0)
    report = decay_check(CONST, (1.0, 0.0), probe)
    assert report["rel_gap"] <= 0.05
    # incoming constituent dominates the outgoing remnant everywhere
    assert np.max(report["minus_norm"]) <= 1e-6 * np.max(report["plus_norm"])


def test_decay_rate_doubles_with_tau():
    r2 = decay_check(CONST, (1.0, 0.0), LaplaceProbe(tau=2.0))
    r4 = decay_check(CONST, (1.0, 0.0), LaplaceProbe(tau=4.0))
    assert r4["fitted_rate"] / r2["fitted_rate"] == pytest.approx(2.0, rel=0.05)


def test_decay_check_zero_field():
    probe = LaplaceProbe(tau=4.0)
    report = decay_check(CONST, (1.0, 0.0), probe, psi=np.zeros(3))
    assert report["trivial"]
    assert report["fitted_rate"] == 0.0


def test_ill_conditioned_gap_rejected():
    jet = MediumJet(2.0, 1.0, 1.0)
    point = CotangentPoint(eta_prime=(1.0, 0.0))
    _, fact = triple_and_fact(jet, point)
    from dataclasses import replace
    broken = replace(fact, minus_right=fact.plus + 1e-15 * np.eye(3))
    with pytest.raises(RuntimeError):
        splitting_matrices(broken)
