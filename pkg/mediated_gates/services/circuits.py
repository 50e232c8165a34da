"""
Circuit model for mediated-gate synthesis.

A circuit alternates local layers (one ZYZ rotation per qubit) with entangler
layers (mediated gates on disjoint qubit subsets), always starting and ending
with a local layer:

    L_n E_n ... L_1 E_1 L_0      (time order: L_0 first)

Parameter layout, shared by every optimizer and every report: the angle
vector is flattened as (local layer, free qubit, (alpha, beta, gamma)), so a
q-qubit circuit of depth n has 3 q (n + 1) angles.

Entangler qubits are zero-based internally and one-based in serialized form,
matching the U3(1,2,3) notation of the circuit diagrams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

from mediated_gates.errors import DimensionError, DomainError
from mediated_gates.services.dynamics import mediated_gate
from mediated_gates.services.entanglement import zyz_angles, zyz_matrix
from mediated_gates.services.linalg import QubitOrdering, embed_operator


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rotation:
    """Rz(alpha) Ry(beta) Rz(gamma); always in SU(2)."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        return zyz_matrix(self.alpha, self.beta, self.gamma)

    @property
    def angles(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)

    @classmethod
    def from_matrix(cls, u) -> Rotation:
        return cls(*zyz_angles(u))

    @classmethod
    def rz(cls, theta: float) -> Rotation:
        return cls(theta, 0.0, 0.0)

    @classmethod
    def ry(cls, theta: float) -> Rotation:
        return cls(0.0, theta, 0.0)


@dataclass(frozen=True)
class LocalLayer:
    rotations: tuple[Rotation, ...]

    @classmethod
    def identity(cls, n: int) -> LocalLayer:
        return cls(tuple(Rotation() for _ in range(n)))

    @classmethod
    def on(cls, n: int, placed: dict[int, Rotation]) -> LocalLayer:
        """Identity everywhere except the given zero-based qubits."""
        return cls(tuple(placed.get(q, Rotation()) for q in range(n)))

    def matrix(self) -> np.ndarray:
        return reduce(np.kron, [r.matrix for r in self.rotations])


@dataclass(frozen=True)
class EntanglerSpec:
    tag: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits) or len(self.qubits) < 2:
            raise DomainError(f"entangler {self.tag} needs distinct qubits, got {self.qubits}")

    def to_dict(self) -> dict:
        return {"tag": self.tag, "qubits": [q + 1 for q in self.qubits]}

    @classmethod
    def from_dict(cls, payload: dict) -> EntanglerSpec:
        return cls(str(payload["tag"]), tuple(int(q) - 1 for q in payload["qubits"]))

    def label(self) -> str:
        return f"{self.tag}({','.join(str(q + 1) for q in self.qubits)})"


@dataclass(frozen=True)
class EntanglerLayer:
    """Simultaneous entanglers on disjoint subsets; counts once toward depth."""

    gates: tuple[EntanglerSpec, ...]

    def __post_init__(self) -> None:
        if not self.gates:
            raise DomainError("entangler layer needs at least one gate")
        seen: set[int] = set()
        for gate in self.gates:
            if seen & set(gate.qubits):
                raise DomainError(f"entanglers in one layer must act on disjoint qubits: {self.gates}")
            seen |= set(gate.qubits)

    @classmethod
    def single(cls, tag: str, qubits: Sequence[int]) -> EntanglerLayer:
        return cls((EntanglerSpec(tag, tuple(qubits)),))

    def matrix(self, n: int) -> np.ndarray:
        out = np.eye(2 ** n, dtype=complex)
        for gate in self.gates:
            out = entangler_matrix(gate.tag, gate.qubits, n) @ out
        return out

    def label(self) -> str:
        return " ".join(g.label() for g in self.gates)


Layer = LocalLayer | EntanglerLayer


@lru_cache(maxsize=256)
def entangler_matrix(tag: str, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Qubit-space constant of ``tag`` embedded on ``qubits`` of an n-qubit register."""
    gate = resolve_entangler(tag)
    if gate.shape[0] != 2 ** len(qubits):
        raise DimensionError(f"{tag} acts on {int(math.log2(gate.shape[0]))} qubits, got {len(qubits)}")
    out = embed_operator(gate, n, qubits)
    out.setflags(write=False)
    return out


def resolve_entangler(tag: str) -> np.ndarray:
    return mediated_gate(tag)


# ---------------------------------------------------------------------------
# Circuit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Circuit:
    ordering: QubitOrdering
    layers: tuple[Layer, ...]

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        n = self.ordering.n
        if not layers or not isinstance(layers[0], LocalLayer) or not isinstance(layers[-1], LocalLayer):
            raise DomainError("circuits must start and end with a local layer")
        for prev, layer in zip(layers, layers[1:]):
            if isinstance(prev, EntanglerLayer) and isinstance(layer, EntanglerLayer):
                raise DomainError("adjacent entangler layers need a local layer between them")
        for layer in layers:
            if isinstance(layer, LocalLayer):
                if len(layer.rotations) != n:
                    raise DimensionError(f"local layer has {len(layer.rotations)} rotations for {n} qubits")
            elif isinstance(layer, EntanglerLayer):
                for gate in layer.gates:
                    if any(q < 0 or q >= n for q in gate.qubits):
                        raise DomainError(f"{gate.label()} is outside the {n}-qubit register")
            else:
                raise DomainError(f"unknown layer type {type(layer).__name__}")

    @classmethod
    def identity(cls, n: int) -> Circuit:
        return cls(QubitOrdering.qubits(n), (LocalLayer.identity(n),))

    @property
    def n_qubits(self) -> int:
        return self.ordering.n

    @property
    def depth(self) -> int:
        return sum(isinstance(layer, EntanglerLayer) for layer in self.layers)

    @property
    def local_layers(self) -> list[LocalLayer]:
        return [layer for layer in self.layers if isinstance(layer, LocalLayer)]

    @property
    def entangler_layers(self) -> list[EntanglerLayer]:
        return [layer for layer in self.layers if isinstance(layer, EntanglerLayer)]

    @property
    def angles(self) -> np.ndarray:
        return np.array([r.angles for layer in self.local_layers for r in layer.rotations]).reshape(-1)

    def with_angles(self, vector) -> Circuit:
        """Same layout, rotations replaced from a flattened angle vector."""
        vector = np.asarray(vector, dtype=float).reshape(-1)
        n = self.n_qubits
        if vector.size != 3 * n * len(self.local_layers):
            raise DimensionError(f"expected {3 * n * len(self.local_layers)} angles, got {vector.size}")
        triples = iter(vector.reshape(-1, 3))
        layers: list[Layer] = []
        for layer in self.layers:
            if isinstance(layer, LocalLayer):
                layers.append(LocalLayer(tuple(Rotation(*map(float, next(triples))) for _ in range(n))))
            else:
                layers.append(layer)
        return Circuit(self.ordering, tuple(layers))


def evaluate_circuit(c: Circuit) -> np.ndarray:
    """Compose the layers in time order into one unitary on the qubits."""
    n = c.n_qubits
    u = np.eye(2 ** n, dtype=complex)
    for layer in c.layers:
        step = layer.matrix() if isinstance(layer, LocalLayer) else layer.matrix(n)
        u = step @ u
    return u


def collapse_local_layers(c: Circuit) -> Circuit:
    """Merge runs of adjacent local layers into one; depth is unchanged."""
    layers: list[Layer] = []
    for layer in c.layers:
        if layers and isinstance(layer, LocalLayer) and isinstance(layers[-1], LocalLayer):
            merged = tuple(
                Rotation.from_matrix(later.matrix @ earlier.matrix)
                for earlier, later in zip(layers[-1].rotations, layer.rotations)
            )
            layers[-1] = LocalLayer(merged)
        else:
            layers.append(layer)
    return Circuit(c.ordering, tuple(layers))


def circuit_from_sequence(ordering: QubitOrdering, sequence: Sequence[EntanglerLayer], angles=None) -> Circuit:
    """Local / entangler alternation around ``sequence``, identity rotations unless angles are given."""
    n = ordering.n
    layers: list[Layer] = [LocalLayer.identity(n)]
    for entangler in sequence:
        layers.extend([entangler, LocalLayer.identity(n)])
    circuit = Circuit(ordering, tuple(layers))
    return circuit if angles is None else circuit.with_angles(angles)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def circuit_to_dict(c: Circuit) -> dict:
    layers = []
    for layer in c.layers:
        if isinstance(layer, LocalLayer):
            layers.append({"kind": "local", "rotations": [list(map(float, r.angles)) for r in layer.rotations]})
        else:
            layers.append({"kind": "entangler", "gates": [g.to_dict() for g in layer.gates]})
    return {"qubits": c.n_qubits, "depth": c.depth, "layers": layers}


def circuit_from_dict(payload: dict) -> Circuit:
    try:
        n = int(payload["qubits"])
        layers: list[Layer] = []
        for entry in payload["layers"]:
            if entry["kind"] == "local":
                layers.append(LocalLayer(tuple(Rotation(*map(float, r)) for r in entry["rotations"])))
            elif entry["kind"] == "entangler":
                layers.append(EntanglerLayer(tuple(EntanglerSpec.from_dict(g) for g in entry["gates"])))
            else:
                raise DomainError(f"unknown layer kind {entry['kind']!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed circuit payload: {exc}") from exc
    return Circuit(QubitOrdering.qubits(n), tuple(layers))


# ---------------------------------------------------------------------------
# Parameterized skeleton (optimizer hot path)
# ---------------------------------------------------------------------------

def rotation_matrices(angles) -> np.ndarray:
    """Vectorized zyz_matrix over a (k, 3) angle array -> (k, 2, 2)."""
    a = np.asarray(angles, dtype=float).reshape(-1, 3)
    alpha, beta, gamma = a[:, 0], a[:, 1], a[:, 2]
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    plus, minus = np.exp(-0.5j * (alpha + gamma)), np.exp(-0.5j * (alpha - gamma))
    out = np.empty((a.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = plus * c
    out[:, 0, 1] = -minus * s
    out[:, 1, 0] = minus.conj() * s
    out[:, 1, 1] = plus.conj() * c
    return out


@dataclass
class CircuitSkeleton:
    """
    A fixed entangler sequence with free local rotations.

    ``free_qubits`` restricts which qubits carry parameters; the others keep
    identity rotations in every local layer.
    """

    ordering: QubitOrdering
    sequence: tuple[EntanglerLayer, ...]
    free_qubits: tuple[int, ...] | None = None
    _entanglers: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.sequence = tuple(self.sequence)
        n = self.ordering.n
        self.free_qubits = tuple(range(n)) if self.free_qubits is None else tuple(sorted(self.free_qubits))
        if any(q < 0 or q >= n for q in self.free_qubits) or not self.free_qubits:
            raise DomainError(f"free qubits {self.free_qubits} invalid for {n} qubits")
        # validates the layout once
        circuit_from_sequence(self.ordering, self.sequence)
        self._entanglers = [layer.matrix(n) for layer in self.sequence]

    @property
    def depth(self) -> int:
        return len(self.sequence)

    @property
    def n_params(self) -> int:
        return 3 * len(self.free_qubits) * (self.depth + 1)

    def _local_matrices(self, params) -> list[np.ndarray]:
        params = np.asarray(params, dtype=float).reshape(-1)
        if params.size != self.n_params:
            raise DimensionError(f"expected {self.n_params} angles, got {params.size}")
        rots = rotation_matrices(params).reshape(self.depth + 1, len(self.free_qubits), 2, 2)
        eye = np.eye(2, dtype=complex)
        out = []
        for layer in rots:
            factors = [eye] * self.ordering.n
            for k, q in enumerate(self.free_qubits):
                factors[q] = layer[k]
            out.append(reduce(np.kron, factors))
        return out

    def unitary(self, params) -> np.ndarray:
        locals_ = self._local_matrices(params)
        u = locals_[0]
        for entangler, local in zip(self._entanglers, locals_[1:]):
            u = local @ (entangler @ u)
        return u

    def apply(self, params, state) -> np.ndarray:
        locals_ = self._local_matrices(params)
        psi = locals_[0] @ np.asarray(state, dtype=complex)
        for entangler, local in zip(self._entanglers, locals_[1:]):
            psi = local @ (entangler @ psi)
        return psi

    def expand(self, params) -> np.ndarray:
        """Free-qubit parameters -> the full 3 q (n + 1) vector of the circuit."""
        params = np.asarray(params, dtype=float).reshape(self.depth + 1, len(self.free_qubits), 3)
        full = np.zeros((self.depth + 1, self.ordering.n, 3))
        full[:, list(self.free_qubits), :] = params
        return full.reshape(-1)

    def circuit(self, params) -> Circuit:
        return circuit_from_sequence(self.ordering, self.sequence, self.expand(params))

    def sequence_labels(self) -> list[str]:
        return [layer.label() for layer in self.sequence]


def circuit_skeleton(
    ordering: QubitOrdering,
    sequence: Iterable[EntanglerLayer],
    free_qubits: Sequence[int] | None = None,
) -> CircuitSkeleton:
    return CircuitSkeleton(ordering, tuple(sequence), None if free_qubits is None else tuple(free_qubits))
