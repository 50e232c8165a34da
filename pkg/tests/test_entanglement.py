import math

import numpy as np
import pytest

from mediated_gates.errors import DimensionError, DomainError, NotUnitaryError
from mediated_gates.services.dynamics import mediated_gate
from mediated_gates.services.entanglement import (
    WeylPoint,
    canonical_gate,
    concurrence,
    is_perfect_entangler,
    local_equivalence,
    makhlin_from_weyl,
    makhlin_invariants,
    max_concurrence,
    operator_error,
    state_fidelity,
    weyl_coordinates,
    weyl_max_concurrence,
    zyz_angles,
    zyz_matrix,
)
from mediated_gates.services.linalg import SWAP, haar_unitary, ket, max_abs_diff
from mediated_gates.services.registry import B_GATE, CNOT, SQRT_SWAP, bell_minus

PI = math.pi

NAMED = [
    ("identity", np.eye(4), (0.0, 0.0, 0.0)),
    ("cnot", CNOT, (PI / 2, 0.0, 0.0)),
    ("u2", mediated_gate("U2"), (2 * PI / 3, PI / 3, PI / 3)),
    ("swap", SWAP, (PI / 2, PI / 2, PI / 2)),
    ("sqrtswap", SQRT_SWAP, (PI / 4, PI / 4, PI / 4)),
    ("bgate", B_GATE, (PI / 2, PI / 4, 0.0)),
]


def _locals(rng):
    return np.kron(haar_unitary(2, rng), haar_unitary(2, rng))


# ---------- Weyl chamber ----------
@pytest.mark.parametrize("name, gate, point", NAMED, ids=[n for n, _, _ in NAMED])
def test_weyl_coordinates_of_named_gates(name, gate, point):
    c = weyl_coordinates(gate)
    assert c.as_array() == pytest.approx(point, abs=1e-8)
    assert c.in_chamber()


def test_weyl_coordinates_ignore_local_dressing(rng):
    u = mediated_gate("U2")
    dressed = _locals(rng) @ u @ _locals(rng)
    assert weyl_coordinates(dressed).distance(weyl_coordinates(u)) < 1e-8


def test_canonical_gate_round_trip():
    point = WeylPoint(1.1, 0.6, 0.2)
    assert weyl_coordinates(canonical_gate(point)).distance(point) < 1e-9


def test_weyl_rejects_bad_input():
    with pytest.raises(DimensionError):
        weyl_coordinates(np.eye(8))
    with pytest.raises(NotUnitaryError):
        weyl_coordinates(2 * np.eye(4))


# ---------- Makhlin invariants ----------
def test_makhlin_identity_and_cnot():
    ident = makhlin_invariants(np.eye(4))
    assert ident.g1 == pytest.approx(1.0, abs=1e-12)
    assert ident.g2 == pytest.approx(3.0, abs=1e-12)
    cnot = makhlin_invariants(CNOT)
    assert abs(cnot.g1) < 1e-12
    assert cnot.g2 == pytest.approx(1.0, abs=1e-12)


def test_makhlin_local_invariance(rng):
    u = haar_unitary(4, rng)
    dressed = _locals(rng) @ u @ _locals(rng)
    assert makhlin_invariants(dressed).distance(makhlin_invariants(u)) < 1e-9


@pytest.mark.parametrize("name, gate, point", NAMED, ids=[n for n, _, _ in NAMED])
def test_makhlin_from_weyl_agrees(name, gate, point):
    assert makhlin_from_weyl(weyl_coordinates(gate)).distance(makhlin_invariants(gate)) < 1e-8


# ---------- perfect entanglers and concurrence ----------
def test_perfect_entangler_flags():
    assert is_perfect_entangler(CNOT)
    assert not is_perfect_entangler(np.eye(4))
    assert not is_perfect_entangler(mediated_gate("U2"))


def test_concurrence_of_states():
    assert concurrence(bell_minus()) == pytest.approx(1.0)
    assert concurrence(ket("00")) == pytest.approx(0.0)
    theta = PI / 8
    psi = math.cos(theta) * ket("00") + math.sin(theta) * ket("11")
    assert concurrence(psi) == pytest.approx(math.sqrt(2) / 2, abs=1e-12)


def test_concurrence_needs_two_qubits():
    with pytest.raises(DimensionError):
        concurrence(ket("000"))


@pytest.mark.parametrize("gate, expected", [
    (mediated_gate("U2"), math.sqrt(3) / 2),
    (np.eye(4), 0.0),
    (CNOT, 1.0),
])
def test_max_concurrence(gate, expected):
    assert max_concurrence(gate, restarts=16) == pytest.approx(expected, abs=1e-6)
    assert weyl_max_concurrence(weyl_coordinates(gate)) == pytest.approx(expected, abs=1e-9)


# ---------- distances ----------
def test_operator_error_is_phase_free(rng):
    u = haar_unitary(4, rng)
    assert operator_error(np.exp(0.7j) * u, u) < 1e-12
    assert operator_error(np.exp(0.7j) * u, u, phase_free=False) > 0.1


def test_state_fidelity_dimension_mismatch():
    with pytest.raises(DimensionError):
        state_fidelity(ket("0"), ket("00"))


# ---------- single-qubit angles and local equivalence ----------
def test_zyz_angles_reproduce_gate(rng):
    u = haar_unitary(2, rng)
    assert operator_error(zyz_matrix(*zyz_angles(u)), u) < 1e-10


def test_zyz_angles_are_exact_on_su2():
    u = zyz_matrix(0.3, 1.2, -0.8)
    assert max_abs_diff(zyz_matrix(*zyz_angles(u)), u) < 1e-12


def test_local_equivalence_reconstructs_target(rng):
    gate = mediated_gate("U2")
    target = _locals(rng) @ gate @ _locals(rng)
    eq = local_equivalence(target, gate)
    rebuilt = eq.phase * np.kron(*eq.after) @ gate @ np.kron(*eq.before)
    assert max_abs_diff(rebuilt, target) < 1e-8


def test_local_equivalence_of_cnot_and_canonical_point():
    gate = canonical_gate((PI / 2, 0.0, 0.0))
    eq = local_equivalence(CNOT, gate)
    assert eq.residual < 1e-8


def test_local_equivalence_rejects_different_classes():
    with pytest.raises(DomainError):
        local_equivalence(CNOT, SWAP)
