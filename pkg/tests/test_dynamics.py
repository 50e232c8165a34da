import math
from fractions import Fraction

import numpy as np
import scipy.linalg
import pytest

from mediated_gates.errors import DomainError, LookupFailure
from mediated_gates.services import dynamics
from mediated_gates.services.dynamics import (
    CAYLEY_TABLE,
    S3_ELEMENTS,
    SpinGeometry,
    analytic_periods,
    ancilla_restoration_error,
    build_hamiltonian,
    closed_form_coefficients,
    closed_form_U,
    detect_factorization,
    detuning_fidelity,
    mediated_gate,
    quadratic_coefficient,
    recursion_coefficients,
    refine_period,
    robustness_sweep,
    s3_operators,
    scaling_report,
    scan_mediated_gates,
    total_spin,
    uniqueness_scan,
)
from mediated_gates.services.entanglement import operator_error
from mediated_gates.services.linalg import I2, Propagator, QubitOrdering, haar_unitary, herm_exp, ket, kron, max_abs_diff, random_state


# ---------- geometry ----------
def test_geometry_rejects_zero_coupling():
    with pytest.raises(DomainError):
        SpinGeometry.linear3(0.0, 1.0)


def test_geometry_from_tag():
    g = SpinGeometry.from_tag("linear-3", j=1.3, j_ratio=0.7)
    assert g.couplings == pytest.approx((0.91, 1.3))
    assert SpinGeometry.from_tag("star-5").n_qubits == 5
    with pytest.raises(DomainError):
        SpinGeometry.from_tag("ring-4")


def test_hamiltonian_conserves_total_spin():
    g = SpinGeometry.star(3)
    h = build_hamiltonian(g)
    sz, s2 = total_spin(g.ordering.n)
    assert max_abs_diff(h @ sz, sz @ h) < 1e-12
    assert max_abs_diff(h @ s2, s2 @ h) < 1e-12


# ---------- S3 algebra ----------
def test_s3_operators_follow_cayley_table():
    ops = s3_operators()
    for row in S3_ELEMENTS:
        for k, col in enumerate(S3_ELEMENTS):
            assert max_abs_diff(ops[row] @ ops[col], ops[CAYLEY_TABLE[row][k]]) == 0


def test_transpositions_are_involutions():
    ops = s3_operators()
    assert max_abs_diff(ops["p12"] @ ops["p12"], np.eye(8)) == 0


@pytest.mark.parametrize("j", [2, Fraction(1, 2), Fraction(7, 3)])
def test_closed_form_coefficients_match_recursion(j):
    for n, coeffs in enumerate(recursion_coefficients(j, 30)):
        assert closed_form_coefficients(j, n) == coeffs


@pytest.mark.parametrize("j", [0.37, 1.5, 2.718])
def test_closed_form_coefficients_match_float_recursion(j):
    for n, coeffs in enumerate(recursion_coefficients(j, 30)):
        scale = max(abs(c) for c in coeffs)
        assert closed_form_coefficients(j, n) == pytest.approx(coeffs, rel=1e-9, abs=1e-9 * scale)


def test_closed_form_u_at_zero_is_identity():
    assert max_abs_diff(closed_form_U(1.0, 1.0, 0.0), np.eye(8)) < 1e-14


def test_closed_form_u_first_gate_period():
    ops = s3_operators()
    expected = np.exp(-1j * math.pi / 3) * (0.5 * np.eye(8) - 1j * math.sqrt(3) / 2 * ops["p13"])
    assert max_abs_diff(closed_form_U(1.0, 1.0, 4 * math.pi / 3), expected) < 1e-12


def test_closed_form_u_matches_spectral_exponential(rng):
    for _ in range(200):
        j_ratio, j_b = rng.uniform(0.1, 3.0, size=2)
        t = rng.uniform(0.0, 20.0)
        h = build_hamiltonian(SpinGeometry.linear3(j_ratio * j_b, j_b))
        assert max_abs_diff(closed_form_U(j_ratio, j_b, t), herm_exp(h, t)) < 1e-9


def test_closed_form_u_rejects_zero_coupling():
    with pytest.raises(DomainError):
        closed_form_U(1.0, 0.0, 1.0)


# ---------- factorization ----------
def test_closed_form_gate_factorizes_to_u2():
    ordering = QubitOrdering.for_geometry(2)
    result = detect_factorization(closed_form_U(1.0, 1.0, 4 * math.pi / 3), ordering)
    assert result.factorizes
    assert operator_error(result.qubit_gate, mediated_gate("U2")) < 1e-10


def test_generic_time_does_not_factorize():
    g = SpinGeometry.linear3()
    result = detect_factorization(herm_exp(build_hamiltonian(g), 1.0), g.ordering)
    assert not result.factorizes
    assert result.residual > 1e-2


def test_factorization_survives_gesdd_failure(monkeypatch):
    calls = []

    def flaky_svd(a, *args, lapack_driver="gesdd", **kwargs):
        calls.append(lapack_driver)
        if lapack_driver == "gesdd":
            raise dynamics.LinAlgError("SVD did not converge")
        return scipy.linalg.svd(a, *args, lapack_driver=lapack_driver, **kwargs)

    monkeypatch.setattr(dynamics, "svd", flaky_svd)
    ordering = QubitOrdering.for_geometry(2)
    result = detect_factorization(closed_form_U(1.0, 1.0, 4 * math.pi / 3), ordering)
    assert result.factorizes
    assert "gesvd" in calls
    family = scan_mediated_gates(SpinGeometry.linear3(), t_max=2 * math.pi, grid=64)
    assert [m.tag for m in family.members] == ["U2"]


def test_product_operator_factorizes(rng):
    u = haar_unitary(4, rng)
    result = detect_factorization(kron(u, I2), QubitOrdering.for_geometry(2))
    assert result.factorizes
    assert result.residual <= 1e-12
    assert max_abs_diff(result.phased_gate, u) < 1e-12


# ---------- scans ----------
def test_linear_scan_finds_three_periods():
    family = scan_mediated_gates(SpinGeometry.linear3(), t_max=5 * math.pi)
    periods = [m.t for m in family.members]
    assert periods == pytest.approx([4 * math.pi / 3, 8 * math.pi / 3, 4 * math.pi], rel=1e-12)
    assert [m.tag for m in family.members] == ["U2", "U2^2", "I"]
    assert all(m.residual <= 1e-10 for m in family.members)
    assert family.base_period == pytest.approx(4 * math.pi / 3, rel=1e-12)
    assert operator_error(family.gate("U2"), mediated_gate("U2"), phase_free=False) < 1e-10


def test_scan_window_meets_derive_tolerance():
    family = scan_mediated_gates(SpinGeometry.linear3(), t_max=2 * math.pi, tolerance=1e-10)
    assert [m.tag for m in family.members] == ["U2"]
    assert family.members[0].residual <= 1e-10


def test_refine_period_bisects_slope_crossing():
    propagator = Propagator(build_hamiltonian(SpinGeometry.linear3()))
    period = 4 * math.pi / 3
    assert refine_period(propagator, period - 0.1, period + 0.07) == pytest.approx(period, rel=1e-12)
    # slope falls on both ends: no crossing inside
    assert refine_period(propagator, period + 0.01, period + 0.05) is None


def test_star3_scan_cycles_through_u3_powers():
    family = scan_mediated_gates(SpinGeometry.star(3), t_max=9 * math.pi)
    assert family.base_period == pytest.approx(2 * math.pi, rel=1e-12)
    assert [m.tag for m in family.members] == ["U3", "-I", "-U3", "I"]
    assert [m.t for m in family.members] == pytest.approx(
        [2 * math.pi, 4 * math.pi, 6 * math.pi, 8 * math.pi], rel=1e-12)
    u3 = mediated_gate("U3")
    gates = [m.gate for m in family.members]
    assert operator_error(gates[0], u3, phase_free=False) < 1e-10
    assert max_abs_diff(gates[1], -np.eye(8)) < 1e-10
    assert max_abs_diff(gates[2], -u3) < 1e-10
    assert max_abs_diff(gates[3], np.eye(8)) < 1e-10


def test_scan_rejects_unequal_couplings():
    with pytest.raises(DomainError):
        scan_mediated_gates(SpinGeometry.linear3(2.0, 1.0), t_max=4 * math.pi)


@pytest.mark.parametrize("ratio", [0.5, 2.0, 3.0])
def test_unequal_couplings_have_no_nontrivial_window(ratio):
    family = uniqueness_scan(SpinGeometry.from_tag("linear-3", j_ratio=ratio), t_max=8 * math.pi)
    assert family.members == []
    assert "unequal" in family.note


def test_analytic_periods():
    assert analytic_periods(SpinGeometry.linear3(), 4 * math.pi) == pytest.approx(
        [4 * math.pi / 3, 8 * math.pi / 3, 4 * math.pi])
    assert analytic_periods(SpinGeometry.linear3(2.0, 1.0), 4 * math.pi) == []
    assert analytic_periods(SpinGeometry.star(3), 4 * math.pi) == pytest.approx([2 * math.pi])


# ---------- constants ----------
def test_u2_cubed_is_identity():
    u2 = mediated_gate("U2")
    assert max_abs_diff(np.linalg.matrix_power(u2, 3), np.eye(4)) < 1e-14


def test_u3_first_column():
    assert max_abs_diff(mediated_gate("U3") @ ket("000"), 1j * ket("000")) < 1e-14


def test_unknown_mediated_gate():
    with pytest.raises(LookupFailure):
        mediated_gate("V2")


def test_star5_scan_finds_u5_at_two_pi():
    family = scan_mediated_gates(SpinGeometry.star(5), t_max=2.5 * math.pi)
    assert family.base_period == pytest.approx(2 * math.pi, rel=1e-12)
    window = next(m for m in family.members if m.tag == "U5")
    assert window.t == pytest.approx(2 * math.pi, rel=1e-12)
    assert window.residual <= 1e-10
    u5 = mediated_gate("U5")
    assert max_abs_diff(u5.conj().T @ u5, np.eye(32)) < 1e-10


@pytest.mark.slow
def test_star7_scan_finds_u7_at_two_pi():
    family = scan_mediated_gates(SpinGeometry.star(7), t_max=2.5 * math.pi)
    assert family.base_period == pytest.approx(2 * math.pi, rel=1e-12)
    assert any(m.tag == "U7" for m in family.members)
    u7 = family.gate("U7")
    assert max_abs_diff(u7.conj().T @ u7, np.eye(128)) < 1e-10


# ---------- robustness ----------
def test_detuning_fidelity_at_zero():
    assert detuning_fidelity(0.0) == pytest.approx(1.0, abs=1e-12)


def test_detuning_small_delta_is_quadratic():
    assert 1.0 - detuning_fidelity(0.1) == pytest.approx(0.97e-2, rel=0.1)


def test_detuning_rejects_large_delta():
    with pytest.raises(DomainError):
        detuning_fidelity(1.5)


def test_robustness_sweep_coefficient():
    sweep = robustness_sweep()
    assert sweep.infidelities[0] == pytest.approx(0.0, abs=1e-12)
    assert sweep.coefficient == pytest.approx(0.97, abs=0.02)
    small = sweep.deltas <= 0.1 + 1e-12
    window = quadratic_coefficient(sweep.deltas[small], sweep.infidelities[small])
    assert window == pytest.approx(sweep.coefficient, rel=0.05)


def test_quadratic_fit_needs_nonzero_delta():
    with pytest.raises(DomainError):
        quadratic_coefficient([0.0, 0.0], [0.0, 0.0])


def test_ancilla_is_restored_at_gate_period(rng):
    g = SpinGeometry.linear3()
    for _ in range(50):
        error = ancilla_restoration_error(g, 4 * math.pi / 3, random_state(4, rng), random_state(2, rng))
        assert error < 1e-10


def test_generic_time_disturbs_ancilla():
    g = SpinGeometry.linear3()
    error = ancilla_restoration_error(g, 1.0, ket("01"), ket("0"))
    assert error > 1e-3


# ---------- scaling ----------
def test_scaling_single_spin_bus():
    row = scaling_report(1)
    assert (row.mediated_time_factor, row.mediated_depth, row.pairwise_depth) == (1.0, 2, 4)


@pytest.mark.parametrize("n, factor", [(9, 3.0), (25, 5.0)])
def test_scaling_time_factor(n, factor):
    row = scaling_report(n)
    assert row.mediated_time_factor == pytest.approx(factor)
    assert row.mediated_depth == 2


def test_scaling_rejects_even_bus():
    with pytest.raises(DomainError):
        scaling_report(2)
    with pytest.raises(LookupFailure):
        scaling_report(3, "teleport")
