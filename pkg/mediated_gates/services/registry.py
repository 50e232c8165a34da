"""
Named states, named gates and the synthesis targets of the depth comparison
table (mediated vs. pairwise exchange-gate depth).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from mediated_gates.errors import DomainError, LookupFailure
from mediated_gates.services.circuits import (
    EntanglerLayer,
    circuit_from_sequence,
    evaluate_circuit,
)
from mediated_gates.services.dynamics import mediated_gate
from mediated_gates.services.entanglement import XX, YY
from mediated_gates.services.linalg import SWAP, QubitOrdering, ket, matrix_from_json, state_from_json

# Any two-qubit gate is at most two B gates plus locals; each B costs depth 5.
B_GATE_DEPTH_BOUND = 10
DEFAULT_W_SIZE = 5


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def bell_minus() -> np.ndarray:
    return (ket("01") - ket("10")) / math.sqrt(2)


def ghz_state(n: int = 3) -> np.ndarray:
    return (ket("0" * n) + ket("1" * n)) / math.sqrt(2)


def w_state(n: int) -> np.ndarray:
    if n < 2:
        raise DomainError(f"W states need at least two qubits, got {n}")
    v = np.zeros(2 ** n, dtype=complex)
    for k in range(n):
        v[1 << k] = 1.0
    return v / math.sqrt(n)


def cluster_state_c4() -> np.ndarray:
    return 0.5 * (ket("0000") + ket("0011") + ket("1100") - ket("1111"))


def bell_input(n: int) -> np.ndarray:
    """|Psi-> on q1 q2, |0> on the rest."""
    return np.kron(bell_minus(), ket("0" * (n - 2))) if n > 2 else bell_minus()


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------

CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]], dtype=complex,
)

# principal root P_T - i P_S; Weyl point (pi/4, pi/4, pi/4)
SQRT_SWAP = np.array(
    [[1, 0, 0, 0],
     [0, (1 - 1j) / 2, (1 + 1j) / 2, 0],
     [0, (1 + 1j) / 2, (1 - 1j) / 2, 0],
     [0, 0, 0, 1]], dtype=complex,
)

B_GATE = expm(1j * (math.pi / 4 * XX + math.pi / 8 * YY))

TOFFOLI = np.eye(8, dtype=complex)
TOFFOLI[6:, 6:] = [[0, 1], [1, 0]]

_GATES = {
    "identity": lambda: np.eye(4, dtype=complex),
    "cnot": lambda: CNOT.copy(),
    "swap": lambda: SWAP.copy(),
    "sqrtswap": lambda: SQRT_SWAP.copy(),
    "bgate": lambda: B_GATE.copy(),
    "toffoli": lambda: TOFFOLI.copy(),
    "u2": lambda: mediated_gate("U2"),
    "u3": lambda: mediated_gate("U3"),
}


def named_gate(name: str) -> np.ndarray:
    try:
        return _GATES[name.lower()]()
    except KeyError:
        raise LookupFailure(f"unknown gate {name!r}; known: {sorted(_GATES)}") from None


# ---------------------------------------------------------------------------
# Menus
# ---------------------------------------------------------------------------

def parse_menu_entry(entry: str, n: int) -> list[EntanglerLayer]:
    """
    ``U2`` -> U2 on every qubit pair, ``U3`` -> every triple,
    ``U2:1,3`` -> one placement (one-based qubits).
    """
    tag, _, where = entry.partition(":")
    tag = tag.strip()
    size = {"U2": 2, "U3": 3}.get(tag)
    if size is None and tag.startswith("U") and tag[1:].isdigit():
        size = int(tag[1:])
    if size is None:
        raise LookupFailure(f"unknown entangler {tag!r} in menu entry {entry!r}")
    if where:
        try:
            qubits = tuple(int(q) - 1 for q in where.split(","))
        except ValueError:
            raise DomainError(f"cannot parse qubits in menu entry {entry!r}") from None
        if len(qubits) != size or any(q < 0 or q >= n for q in qubits):
            raise DomainError(f"menu entry {entry!r} does not fit {size} of {n} qubits")
        return [EntanglerLayer.single(tag, qubits)]
    if size > n:
        raise DomainError(f"{tag} needs {size} qubits, register has {n}")
    return [EntanglerLayer.single(tag, qubits) for qubits in combinations(range(n), size)]


def menu_placements(menu: Sequence[str], n: int) -> list[EntanglerLayer]:
    placements: list[EntanglerLayer] = []
    for entry in menu:
        for layer in parse_menu_entry(entry, n):
            if layer not in placements:
                placements.append(layer)
    if not placements:
        raise DomainError("gate menu is empty")
    return placements


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SynthesisTarget:
    name: str
    kind: str                       # "state" | "gate"
    payload: np.ndarray
    n_qubits: int
    reference_depth_mediated: int | None = None
    reference_depth_pairwise: int | None = None
    menu: tuple[str, ...] = ("U2",)
    sequence: tuple[EntanglerLayer, ...] | None = None   # fixed placement, if known
    input_state: np.ndarray | None = None
    input_depth: int = 0            # depth spent preparing input_state
    notes: str = ""
    extras: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("state", "gate"):
            raise DomainError(f"target kind must be 'state' or 'gate', got {self.kind!r}")
        dim = 2 ** self.n_qubits
        expected = (dim,) if self.kind == "state" else (dim, dim)
        self.payload = np.asarray(self.payload, dtype=complex)
        if self.payload.shape != expected:
            raise DomainError(f"{self.name}: payload shape {self.payload.shape}, expected {expected}")
        if self.kind == "state" and self.input_state is None:
            self.input_state = ket("0" * self.n_qubits)

    @property
    def ordering(self) -> QubitOrdering:
        return QubitOrdering.qubits(self.n_qubits)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "qubits": self.n_qubits,
            "reference_depth_mediated": self.reference_depth_mediated,
            "reference_depth_pairwise": self.reference_depth_pairwise,
            "menu": list(self.menu),
        }


C4_SEQUENCE = tuple(
    EntanglerLayer.single("U3", qubits) for qubits in ((1, 2, 3), (0, 1, 2), (0, 1, 3), (0, 1, 2))
)

# five U2 and seven U3; the published solution does not list its placements
TOFFOLI_TRIAL_SEQUENCE = tuple(
    EntanglerLayer.single(tag, qubits) for tag, qubits in (
        ("U3", (0, 1, 2)), ("U2", (0, 1)), ("U3", (0, 1, 2)), ("U2", (1, 2)),
        ("U3", (0, 1, 2)), ("U2", (0, 2)), ("U3", (0, 1, 2)), ("U2", (0, 1)),
        ("U3", (0, 1, 2)), ("U2", (1, 2)), ("U3", (0, 1, 2)), ("U3", (0, 1, 2)),
    )
)


def w_target(n: int = DEFAULT_W_SIZE) -> SynthesisTarget:
    """Odd n: the Bell-input route with one U_n; depth 2 + 1."""
    return SynthesisTarget(
        name=f"w{n}",
        kind="state",
        payload=w_state(n),
        n_qubits=n,
        reference_depth_mediated=3,
        reference_depth_pairwise=n - 1,
        menu=(f"U{n}",),
        sequence=(EntanglerLayer.single(f"U{n}", tuple(range(n))),),
        input_state=bell_input(n),
        input_depth=2,
        notes="rotations only on q1 and q2",
    )


def target_registry() -> list[SynthesisTarget]:
    return [
        SynthesisTarget("bell", "state", bell_minus(), 2, 2, 4, menu=("U2",)),
        SynthesisTarget("w3", "state", w_state(3), 3, 2, 2, menu=("U3",)),
        w_target(DEFAULT_W_SIZE),
        SynthesisTarget("ghz3", "state", ghz_state(3), 3, 1, 4, menu=("U3",)),
        SynthesisTarget("c4", "state", cluster_state_c4(), 4, 4, 6, menu=("U3",), sequence=C4_SEQUENCE),
        SynthesisTarget("cnot", "gate", CNOT, 2, 4, 4),
        SynthesisTarget("sqrtswap", "gate", SQRT_SWAP, 2, 4, 3),
        SynthesisTarget("swap", "gate", SWAP, 2, 5, 3),
        SynthesisTarget("bgate", "gate", B_GATE, 2, 5, 5),
        SynthesisTarget(
            "toffoli", "gate", TOFFOLI, 3, 12, 16,
            menu=("U2", "U3"), sequence=TOFFOLI_TRIAL_SEQUENCE,
            notes="long-running; trial placement of five U2 and seven U3",
        ),
    ]


def lookup_target(name: str) -> SynthesisTarget:
    """Registry name, ``w<odd n>``, or a JSON file holding a state or matrix."""
    key = name.lower()
    for target in target_registry():
        if target.name == key:
            return target
    if key.startswith("w") and key[1:].isdigit():
        n = int(key[1:])
        if n % 2 == 0 or n < 3:
            raise DomainError(f"W targets are built for odd sizes >= 3, got {n}")
        return w_target(n)
    if key in ("u2", "u3"):
        gate = named_gate(key)
        return SynthesisTarget(key, "gate", gate, int(math.log2(gate.shape[0])), menu=("U2", "U3"))
    raise LookupFailure(f"unknown target {name!r}")


def target_from_payload(name: str, payload: dict, menu: Sequence[str] = ("U2",)) -> SynthesisTarget:
    """A target read from a ``{dim, entries}`` file: dim**2 entries -> gate, dim -> state."""
    entries = payload.get("entries", []) if isinstance(payload, dict) else []
    dim = int(payload.get("dim", 0)) if isinstance(payload, dict) else 0
    if dim < 2 or dim & (dim - 1):
        raise DomainError(f"{name}: dimension {dim} is not a power of two >= 2")
    n = int(math.log2(dim))
    if len(entries) == dim * dim:
        return SynthesisTarget(name, "gate", matrix_from_json(payload), n, menu=tuple(menu))
    return SynthesisTarget(name, "state", state_from_json(payload), n, menu=tuple(menu))


def random_mixed_target(seed: int, depth: int = 4) -> SynthesisTarget:
    """Three-qubit gate built from a random U2/U3 placement and random angles."""
    rng = np.random.default_rng(seed)
    placements = menu_placements(("U2", "U3"), 3)
    picks = rng.integers(len(placements), size=depth)
    # make sure both gate kinds appear
    picks[0] = len(placements) - 1
    picks[-1] = 0
    sequence = tuple(placements[int(k)] for k in picks)
    ordering = QubitOrdering.qubits(3)
    angles = rng.uniform(-math.pi, math.pi, size=3 * 3 * (depth + 1))
    gate = evaluate_circuit(circuit_from_sequence(ordering, sequence, angles))
    return SynthesisTarget(
        name=f"mixed-{seed}",
        kind="gate",
        payload=gate,
        n_qubits=3,
        reference_depth_mediated=depth,
        menu=("U2", "U3"),
        sequence=sequence,
        notes="self-generated mixed U2/U3 target",
        extras={"angles": angles},
    )
