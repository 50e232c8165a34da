"""
Dense complex linear algebra for small spin registers (at most 2**10 states).

Conventions used everywhere in the package:

* the first label of a ``QubitOrdering`` is the most significant bit of the
  computational basis index;
* the mediating ancilla, when present, is stored last, so a mediated gate
  factorizes literally as ``kron(qubit_gate, I2)``;
* complex equality is always judged by the max-norm of the difference.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

from mediated_gates.config import TOLERANCE
from mediated_gates.errors import DimensionError, DomainError, LookupFailure, NotUnitaryError

MAX_QUBITS = 10
ANCILLA_LABEL = "c"
HERMITICITY_TOLERANCE = 1e-10


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex,
)


# ---------------------------------------------------------------------------
# Qubit ordering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitOrdering:
    """Ordered spin labels; ``ancilla`` (if any) must be the last label."""

    labels: tuple[str, ...]
    ancilla: str | None = None

    def __post_init__(self) -> None:
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise DomainError("ordering needs at least one label")
        if len(set(labels)) != len(labels):
            raise DomainError(f"duplicate labels in ordering {labels}")
        if len(labels) > MAX_QUBITS:
            raise DimensionError(f"{len(labels)} spins exceed the {MAX_QUBITS}-spin limit")
        if self.ancilla is not None and labels[-1] != self.ancilla:
            raise DomainError(f"ancilla {self.ancilla!r} must be the last label")

    @classmethod
    def qubits(cls, n: int, with_ancilla: bool = False) -> QubitOrdering:
        labels = tuple(f"q{k}" for k in range(1, n + 1))
        if with_ancilla:
            return cls(labels + (ANCILLA_LABEL,), ancilla=ANCILLA_LABEL)
        return cls(labels)

    @classmethod
    def for_geometry(cls, n_qubits: int) -> QubitOrdering:
        return cls.qubits(n_qubits, with_ancilla=True)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 2 ** len(self.labels)

    @property
    def qubit_labels(self) -> tuple[str, ...]:
        return self.labels[:-1] if self.ancilla is not None else self.labels

    def index(self, label: str | int) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise LookupFailure(f"unknown label {label!r}; ordering is {self.labels}") from None

    def indices(self, labels: Iterable[str | int]) -> list[int]:
        return [self.index(label) for label in labels]


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------

def as_square(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


def as_state(s, name: str = "state", tolerance: float = TOLERANCE) -> np.ndarray:
    v = np.asarray(s, dtype=complex).reshape(-1)
    if v.size < 2 or v.size & (v.size - 1):
        raise DimensionError(f"{name} length {v.size} is not a power of two")
    norm = np.vdot(v, v).real
    if abs(norm - 1.0) > tolerance:
        raise DomainError(f"{name} is not normalized (norm^2 = {norm:.3e})")
    return v


def n_qubits_of(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2 ** n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def max_abs_diff(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def is_hermitian(h, tolerance: float = HERMITICITY_TOLERANCE) -> bool:
    h = as_square(h)
    return max_abs_diff(h, h.conj().T) <= tolerance


def is_unitary(u, tolerance: float = TOLERANCE) -> bool:
    u = as_square(u)
    return max_abs_diff(u.conj().T @ u, np.eye(u.shape[0])) <= tolerance


def require_unitary(u, tolerance: float = TOLERANCE, name: str = "matrix") -> np.ndarray:
    u = as_square(u, name)
    err = max_abs_diff(u.conj().T @ u, np.eye(u.shape[0]))
    if err > tolerance:
        raise NotUnitaryError(f"{name} is not unitary: max|U^dag U - I| = {err:.3e}")
    return u


# ---------------------------------------------------------------------------
# Products and exponentials
# ---------------------------------------------------------------------------

def kron(a, b) -> np.ndarray:
    return np.kron(as_square(a, "left factor"), as_square(b, "right factor"))


def kron_all(*ops) -> np.ndarray:
    if not ops:
        return np.eye(1, dtype=complex)
    return reduce(kron, ops)


class Propagator:
    """
    Spectral exponential of a fixed Hermitian matrix.

    The eigendecomposition is computed once; ``self(t)`` returns exp(-i h t).
    Scans evaluate thousands of times on one Hamiltonian, so this is the
    workhorse behind ``herm_exp`` as well.
    """

    def __init__(self, h):
        h = as_square(h, "Hamiltonian")
        if not is_hermitian(h):
            raise DomainError("Hamiltonian is not Hermitian")
        self.energies, self.vectors = np.linalg.eigh(h)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * self.energies * t)
        return (self.vectors * phases) @ self.vectors.conj().T

    def derivative(self, t: float) -> np.ndarray:
        """d/dt exp(-i h t) = -i h exp(-i h t)."""
        phases = -1j * self.energies * np.exp(-1j * self.energies * t)
        return (self.vectors * phases) @ self.vectors.conj().T


def herm_exp(h, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h."""
    return Propagator(h)(t)


# ---------------------------------------------------------------------------
# Permutations and embeddings
# ---------------------------------------------------------------------------

def transposition(ordering: QubitOrdering, i: str | int, j: str | int) -> np.ndarray:
    """Permutation matrix exchanging the tensor factors of spins i and j."""
    a, b = ordering.index(i), ordering.index(j)
    if a == b:
        raise DomainError("transposition needs two distinct labels")
    n = ordering.n
    shift_a, shift_b = n - 1 - a, n - 1 - b
    idx = np.arange(ordering.dim)
    flip = ((idx >> shift_a) ^ (idx >> shift_b)) & 1
    swapped = idx ^ (flip << shift_a) ^ (flip << shift_b)
    p = np.zeros((ordering.dim, ordering.dim), dtype=complex)
    p[swapped, idx] = 1.0
    return p


def embed_operator(op, n: int, targets: Sequence[int]) -> np.ndarray:
    """Place a k-qubit operator on the ordered qubit positions ``targets`` of n qubits."""
    op = as_square(op, "operator")
    targets = [int(t) for t in targets]
    k = len(targets)
    if op.shape[0] != 2 ** k:
        raise DimensionError(f"operator of dimension {op.shape[0]} cannot act on {k} qubits")
    if len(set(targets)) != k or any(t < 0 or t >= n for t in targets):
        raise DomainError(f"invalid target qubits {targets} for a {n}-qubit register")
    rest = [q for q in range(n) if q not in targets]
    order = targets + rest
    full = np.kron(op, np.eye(2 ** (n - k), dtype=complex)).reshape([2] * (2 * n))
    inverse = list(np.argsort(order))
    full = full.transpose(inverse + [n + axis for axis in inverse])
    return full.reshape(2 ** n, 2 ** n)


def partial_trace(u_or_state, ordering: QubitOrdering, keep: Iterable[str | int]) -> np.ndarray:
    """
    Reduce a state vector (as |psi><psi|) or a matrix onto the ``keep`` labels.

    Kept factors stay in ordering order.
    """
    keep_idx = sorted(set(ordering.indices(keep)))
    if not keep_idx:
        raise DomainError("partial_trace needs a non-empty keep set")
    arr = np.asarray(u_or_state, dtype=complex)
    rho = np.outer(arr, arr.conj()) if arr.ndim == 1 else as_square(arr)
    if rho.shape[0] != ordering.dim:
        raise DimensionError(f"operand dimension {rho.shape[0]} does not match ordering {ordering.labels}")
    n = ordering.n
    drop_idx = [q for q in range(n) if q not in keep_idx]
    dk, dd = 2 ** len(keep_idx), 2 ** len(drop_idx)
    t = rho.reshape([2] * (2 * n))
    t = t.transpose(keep_idx + drop_idx + [n + q for q in keep_idx] + [n + q for q in drop_idx])
    return np.einsum("ijkj->ik", t.reshape(dk, dd, dk, dd))


# ---------------------------------------------------------------------------
# States and random samples
# ---------------------------------------------------------------------------

def ket(bits: str) -> np.ndarray:
    if not bits or set(bits) - {"0", "1"}:
        raise DomainError(f"basis label must be a bit string, got {bits!r}")
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# JSON codec  {dim, entries: [[re, im], ...]} row-major
# ---------------------------------------------------------------------------

def matrix_to_json(m) -> dict:
    m = as_square(m)
    return {
        "dim": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def state_to_json(s) -> dict:
    v = np.asarray(s, dtype=complex).reshape(-1)
    return {"dim": int(v.size), "entries": [[float(z.real), float(z.imag)] for z in v]}


def _entries(payload: dict, count: int) -> np.ndarray:
    try:
        entries = np.asarray(payload["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"cannot parse entries: {exc}") from exc
    if entries.shape != (count, 2):
        raise DimensionError(f"expected {count} [re, im] pairs, got shape {entries.shape}")
    return entries[:, 0] + 1j * entries[:, 1]


def matrix_from_json(payload: dict) -> np.ndarray:
    try:
        dim = int(payload["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"cannot parse matrix dimension: {exc}") from exc
    if dim < 1:
        raise DimensionError(f"invalid dimension {dim}")
    return _entries(payload, dim * dim).reshape(dim, dim)


def state_from_json(payload: dict) -> np.ndarray:
    try:
        dim = int(payload["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"cannot parse state dimension: {exc}") from exc
    return _entries(payload, dim)
