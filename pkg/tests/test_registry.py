import math

import numpy as np
import pytest

from mediated_gates.errors import DomainError, LookupFailure
from mediated_gates.services.circuits import circuit_from_sequence
from mediated_gates.services.linalg import matrix_to_json, state_to_json
from mediated_gates.services.registry import (
    CNOT,
    DEFAULT_W_SIZE,
    lookup_target,
    menu_placements,
    named_gate,
    parse_menu_entry,
    random_mixed_target,
    target_from_payload,
    target_registry,
    w_state,
)
from mediated_gates.services.synthesis import target_objective


def test_registry_reference_depths():
    table = {t.name: (t.reference_depth_mediated, t.reference_depth_pairwise) for t in target_registry()}
    assert table["bell"] == (2, 4)
    assert table["c4"] == (4, 6)
    assert table["swap"] == (5, 3)
    assert table["toffoli"] == (12, 16)
    assert f"w{DEFAULT_W_SIZE}" in table


def test_state_targets_are_normalized():
    for target in target_registry():
        if target.kind == "state":
            assert np.vdot(target.payload, target.payload).real == pytest.approx(1.0)


def test_lookup_target():
    assert lookup_target("Bell").name == "bell"
    assert lookup_target("w7").n_qubits == 7
    assert lookup_target("u2").kind == "gate"
    with pytest.raises(DomainError):
        lookup_target("w4")
    with pytest.raises(LookupFailure):
        lookup_target("teleporter")


def test_named_gate():
    assert np.array_equal(named_gate("CNOT"), CNOT)
    with pytest.raises(LookupFailure):
        named_gate("fredkin")


def test_menu_entries():
    assert len(parse_menu_entry("U2", 3)) == 3
    assert len(parse_menu_entry("U3", 4)) == 4
    (layer,) = parse_menu_entry("U2:1,3", 3)
    assert layer.gates[0].qubits == (0, 2)
    with pytest.raises(DomainError):
        parse_menu_entry("U3", 2)
    with pytest.raises(DomainError):
        parse_menu_entry("U2:1,4", 3)
    with pytest.raises(LookupFailure):
        parse_menu_entry("X2", 3)


def test_menu_placements_deduplicate():
    assert len(menu_placements(["U2", "U2:1,2"], 2)) == 1


def test_w_state_layout():
    w = w_state(3)
    assert np.flatnonzero(w).tolist() == [1, 2, 4]
    assert w[1] == pytest.approx(1 / math.sqrt(3))


def test_target_from_payload():
    gate = target_from_payload("g", matrix_to_json(CNOT))
    assert (gate.kind, gate.n_qubits) == ("gate", 2)
    state = target_from_payload("s", state_to_json(w_state(3)), menu=("U3",))
    assert (state.kind, state.n_qubits, state.menu) == ("state", 3, ("U3",))
    with pytest.raises(DomainError):
        target_from_payload("bad", {"dim": 3, "entries": []})


def test_random_mixed_target_is_reachable():
    target = random_mixed_target(seed=5)
    assert {g.tag for layer in target.sequence for g in layer.gates} == {"U2", "U3"}
    circuit = circuit_from_sequence(target.ordering, target.sequence, target.extras["angles"])
    assert target_objective(circuit, target) < 1e-12
    again = random_mixed_target(seed=5)
    assert np.array_equal(again.payload, target.payload)
