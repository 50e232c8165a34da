"""
Two-qubit gate characterization and state-overlap measures.

Weyl coordinates use the convention

    A(c) = exp(i/2 (c1 XX + c2 YY + c3 ZZ)),   pi - c2 >= c1 >= c2 >= c3 >= 0

so CNOT sits at (pi/2, 0, 0) and SWAP at (pi/2, pi/2, pi/2).  All local
invariants are computed in the magic basis, where local gates become real
orthogonal matrices.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from mediated_gates.config import RESTARTS, SEED, TOLERANCE
from mediated_gates.errors import DimensionError, DomainError
from mediated_gates.services.linalg import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    as_square,
    as_state,
    max_abs_diff,
    require_unitary,
)

logger = logging.getLogger(__name__)

MAGIC = (1.0 / math.sqrt(2.0)) * np.array(
    [[1, 0, 0, 1j],
     [0, 1j, 1, 0],
     [0, 1j, -1, 0],
     [1, 0, 0, -1j]], dtype=complex,
)

XX = np.kron(SIGMA_X, SIGMA_X)
YY = np.kron(SIGMA_Y, SIGMA_Y)
ZZ = np.kron(SIGMA_Z, SIGMA_Z)

# Sign patterns of (XX, YY, ZZ) on the four magic-basis vectors; c_i = 1/2 sum_k s_ki lambda_k.
_PATTERNS = np.array(
    [[1, 1, -1],
     [1, -1, 1],
     [-1, 1, 1],
     [-1, -1, -1]], dtype=float,
)

CHAMBER_TOLERANCE = 1e-9
# irrational mixing weights; diagonalize the commuting Re/Im parts together
_MIX_WEIGHTS = (math.sqrt(2.0) - 0.5, math.pi / 7.0, math.e / 3.0)


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeylPoint:
    c1: float
    c2: float
    c3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])

    def in_chamber(self, tolerance: float = CHAMBER_TOLERANCE) -> bool:
        c1, c2, c3 = self.c1, self.c2, self.c3
        return (
            math.pi - c2 >= c1 - tolerance
            and c1 >= c2 - tolerance
            and c2 >= c3 - tolerance
            and c3 >= -tolerance
        )

    def distance(self, other: WeylPoint) -> float:
        return float(np.max(np.abs(self.as_array() - other.as_array())))

    def to_dict(self) -> dict:
        return {"c1": float(self.c1), "c2": float(self.c2), "c3": float(self.c3)}


@dataclass(frozen=True)
class MakhlinInvariants:
    g1: complex
    g2: float

    def distance(self, other: MakhlinInvariants) -> float:
        return max(abs(self.g1 - other.g1), abs(self.g2 - other.g2))

    def to_dict(self) -> dict:
        return {"g1re": float(self.g1.real), "g1im": float(self.g1.imag), "g2": float(self.g2)}


@dataclass
class LocalEquivalence:
    """target = phase * kron(*after) @ gate @ kron(*before)."""

    before: tuple[np.ndarray, np.ndarray]
    after: tuple[np.ndarray, np.ndarray]
    phase: complex
    residual: float


# ---------------------------------------------------------------------------
# Magic basis helpers
# ---------------------------------------------------------------------------

def _special(u: np.ndarray) -> np.ndarray:
    """Scale a unitary to determinant one (principal fourth root)."""
    det = np.linalg.det(u)
    return u / det ** (1.0 / u.shape[0])


def to_magic(u: np.ndarray) -> np.ndarray:
    return MAGIC.conj().T @ u @ MAGIC


def from_magic(u: np.ndarray) -> np.ndarray:
    return MAGIC @ u @ MAGIC.conj().T


def _two_qubit_unitary(u, name: str = "gate") -> np.ndarray:
    u = as_square(u, name)
    if u.shape != (4, 4):
        raise DimensionError(f"{name} must be 4x4, got {u.shape}")
    return require_unitary(u, max(TOLERANCE, 1e-8), name)


def canonical_gate(point: WeylPoint | tuple[float, float, float]) -> np.ndarray:
    c1, c2, c3 = point.as_array() if isinstance(point, WeylPoint) else point
    return expm(0.5j * (c1 * XX + c2 * YY + c3 * ZZ))


# ---------------------------------------------------------------------------
# Weyl coordinates
# ---------------------------------------------------------------------------

def _fold(c: np.ndarray) -> WeylPoint:
    """Fold a candidate c-vector into the chamber with shifts by pi, pair sign flips and permutations."""
    c = np.mod(c, math.pi)
    c[np.abs(c - math.pi) < 1e-12] = 0.0
    half = math.pi / 2
    while np.sum(c > half + 1e-12) >= 2:
        i, j = np.argsort(c)[-2:]
        c[i], c[j] = math.pi - c[i], math.pi - c[j]
    c = np.sort(c)[::-1]
    if c[0] + c[1] > math.pi + 1e-12:
        c[0], c[1] = math.pi - c[0], math.pi - c[1]
        c = np.sort(c)[::-1]
    # chamber base: (c1, c2, 0) and (pi - c1, c2, 0) are the same class
    if abs(c[2]) < 1e-9 and c[0] > half + 1e-12:
        c[0] = math.pi - c[0]
        c = np.sort(c)[::-1]
    c[np.abs(c) < 1e-13] = 0.0
    return WeylPoint(float(c[0]), float(c[1]), float(c[2]))


def weyl_coordinates(u) -> WeylPoint:
    u = _special(_two_qubit_unitary(u))
    ub = to_magic(u)
    m = ub.T @ ub
    lam = np.angle(np.linalg.eigvals(m)) / 2.0
    # the true half-phases sum to a multiple of 2pi
    if int(round(lam.sum() / math.pi)) % 2:
        lam[np.argmax(lam)] -= math.pi
    return _fold(0.5 * _PATTERNS.T @ lam)


def makhlin_invariants(u) -> MakhlinInvariants:
    u = _two_qubit_unitary(u)
    ub = to_magic(u)
    det = np.linalg.det(ub)
    m = ub.T @ ub
    tr = np.trace(m)
    g1 = tr ** 2 / (16.0 * det)
    g2 = (tr ** 2 - np.trace(m @ m)) / (4.0 * det)
    return MakhlinInvariants(g1=complex(g1), g2=float(g2.real))


def makhlin_from_weyl(point: WeylPoint) -> MakhlinInvariants:
    c1, c2, c3 = point.as_array()
    re = (math.cos(c1) ** 2 * math.cos(c2) ** 2 * math.cos(c3) ** 2
          - math.sin(c1) ** 2 * math.sin(c2) ** 2 * math.sin(c3) ** 2)
    im = 0.25 * math.sin(2 * c1) * math.sin(2 * c2) * math.sin(2 * c3)
    g2 = 4 * re - math.cos(2 * c1) * math.cos(2 * c2) * math.cos(2 * c3)
    return MakhlinInvariants(g1=complex(re, im), g2=g2)


def point_is_perfect_entangler(point: WeylPoint, tolerance: float = CHAMBER_TOLERANCE) -> bool:
    c1, c2, c3 = point.as_array()
    half = math.pi / 2
    return (
        c1 + c2 >= half - tolerance
        and c1 - c2 <= half + tolerance
        and c2 + c3 <= half + tolerance
    )


def is_perfect_entangler(u) -> bool:
    return point_is_perfect_entangler(weyl_coordinates(u))


def weyl_max_concurrence(point: WeylPoint) -> float:
    """Largest concurrence the gate can produce from a product input."""
    if point_is_perfect_entangler(point):
        return 1.0
    c = point.as_array()
    shifted = np.roll(c, 1)
    return float(np.max(np.abs(np.sin(np.concatenate([c - shifted, c + shifted])))))


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def concurrence(s) -> float:
    psi = as_state(s)
    if psi.size != 4:
        raise DimensionError(f"concurrence needs a two-qubit state, got dimension {psi.size}")
    return float(min(1.0, 2.0 * abs(psi[0] * psi[3] - psi[1] * psi[2])))


def bloch_state(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)], dtype=complex)


def max_concurrence(u, restarts: int = RESTARTS, seed: int = SEED) -> float:
    """
    max over |a>|b> of concurrence(u |a>|b>), by multistart Nelder-Mead on
    the two Bloch-sphere angle pairs.  Ties keep the lowest restart index.
    """
    u = _two_qubit_unitary(u)
    if restarts < 1:
        raise DomainError("restarts must be positive")

    def negative(x: np.ndarray) -> float:
        psi = u @ np.kron(bloch_state(x[0], x[1]), bloch_state(x[2], x[3]))
        return -2.0 * abs(psi[0] * psi[3] - psi[1] * psi[2])

    rng = np.random.default_rng(seed)
    starts = rng.uniform(0.0, 2 * math.pi, size=(restarts, 4))
    best = 0.0
    for k, x0 in enumerate(starts):
        res = minimize(negative, x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        value = -float(res.fun)
        if value > best:
            best = value
            logger.debug("restart %d improved max concurrence to %.15f", k, value)
    return min(best, 1.0)


def state_fidelity(a, b) -> float:
    a = as_state(a, "first state")
    b = as_state(b, "second state")
    if a.size != b.size:
        raise DimensionError(f"state dimensions differ: {a.size} vs {b.size}")
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def operator_error(a, b, phase_free: bool = True) -> float:
    """Frobenius norm of a - b, minimized over a global phase on b when phase_free."""
    a = as_square(a, "first operator")
    b = as_square(b, "second operator")
    if a.shape != b.shape:
        raise DimensionError(f"operator dimensions differ: {a.shape} vs {b.shape}")
    if phase_free:
        overlap = np.vdot(b, a)
        if abs(overlap) > 0:
            b = b * (overlap / abs(overlap))
    return float(np.linalg.norm(a - b))


# ---------------------------------------------------------------------------
# Single-qubit angles and local equivalence
# ---------------------------------------------------------------------------

def zyz_angles(u) -> tuple[float, float, float]:
    """
    (alpha, beta, gamma) with Rz(alpha) Ry(beta) Rz(gamma) equal to u up to a
    global phase; exact (no sign flip) when u is already in SU(2).
    """
    u = as_square(u, "single-qubit gate")
    if u.shape != (2, 2):
        raise DimensionError(f"expected a 2x2 matrix, got {u.shape}")
    su = u / np.sqrt(np.linalg.det(u))
    beta = 2.0 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    total = 2.0 * float(np.angle(su[1, 1])) if abs(su[1, 1]) > 1e-12 else 0.0
    diff = 2.0 * float(np.angle(su[1, 0])) if abs(su[1, 0]) > 1e-12 else 0.0
    if abs(su[1, 0]) <= 1e-12:
        alpha, gamma = total, 0.0
    elif abs(su[1, 1]) <= 1e-12:
        alpha, gamma = diff, 0.0
    else:
        alpha, gamma = (total + diff) / 2.0, (total - diff) / 2.0
    if max_abs_diff(zyz_matrix(alpha, beta, gamma), su) > max_abs_diff(zyz_matrix(alpha, beta, gamma), -su):
        alpha += 2.0 * math.pi
    return alpha, beta, gamma


def zyz_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    return np.array(
        [[np.exp(-0.5j * (alpha + gamma)) * c, -np.exp(-0.5j * (alpha - gamma)) * s],
         [np.exp(0.5j * (alpha - gamma)) * s, np.exp(0.5j * (alpha + gamma)) * c]],
        dtype=complex,
    )


def split_local(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor a 4x4 product operator into a (x) b via the realigned SVD."""
    realigned = u.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    left, sing, right = np.linalg.svd(realigned)
    a = math.sqrt(sing[0]) * left[:, 0].reshape(2, 2)
    b = math.sqrt(sing[0]) * right[0, :].reshape(2, 2)
    return a, b


def _real_orthogonal_eigenbasis(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Re(m) and Im(m) commute for symmetric unitary m
    for weight in _MIX_WEIGHTS:
        _, vecs = np.linalg.eigh(m.real + weight * m.imag)
        if np.linalg.det(vecs) < 0:
            vecs[:, 0] = -vecs[:, 0]
        diag = vecs.T @ m @ vecs
        if max_abs_diff(diag, np.diag(np.diag(diag))) < 1e-9:
            return vecs, np.diag(diag)
    raise DomainError("could not diagonalize the magic-basis invariant")


def _match_spectra(eig_t: np.ndarray, eig_g: np.ndarray, tolerance: float = 1e-6) -> list[int] | None:
    """Column order of eig_g reproducing eig_t, or None."""
    order: list[int] = []
    for e in eig_t:
        free = [k for k in range(len(eig_g)) if k not in order]
        k = min(free, key=lambda idx: abs(eig_g[idx] - e))
        if abs(eig_g[k] - e) > tolerance:
            return None
        order.append(k)
    return order


def local_equivalence(target, gate, tolerance: float = 1e-8) -> LocalEquivalence:
    """
    Single-qubit factors with target = phase * (A1 x A2) gate (B1 x B2).

    Both gates are taken to the magic basis, where m = U_B^T U_B is
    diagonalized by a real rotation; matching the two rotations gives the
    local layers.  Raises DomainError if the gates are not locally equivalent.
    """
    t = _special(_two_qubit_unitary(target, "target"))
    g0 = _special(_two_qubit_unitary(gate, "gate"))
    tb = to_magic(t)
    p_t, eig_t = _real_orthogonal_eigenbasis(tb.T @ tb)
    # det-one normalization leaves a factor i^k; i^2 only flips m's sign
    for scale in (1.0, 1j):
        gb = to_magic(scale * g0)
        p_g, eig_g = _real_orthogonal_eigenbasis(gb.T @ gb)
        order = _match_spectra(eig_t, eig_g)
        if order is None:
            continue
        p_g = p_g[:, order]
        if np.linalg.det(p_g) < 0:
            # column signs leave the diagonalization intact
            p_g[:, 0] = -p_g[:, 0]
        right = p_g @ p_t.T
        left = tb @ np.linalg.inv(gb @ right)
        after = split_local(from_magic(left.real))
        before = split_local(from_magic(right))
        dressed = np.kron(*after) @ gate @ np.kron(*before)
        overlap = np.vdot(dressed, np.asarray(target, dtype=complex))
        phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
        residual = max_abs_diff(phase * dressed, target)
        if residual <= tolerance:
            return LocalEquivalence(before=before, after=after, phase=complex(phase), residual=residual)
    raise DomainError("gates are not locally equivalent (Weyl points differ)")
