"""
Heisenberg dynamics of qubits coupled through a shared ancilla spin.

Two geometries are supported:

* **linear-3** - q1 - c - q2, H = J1 s1.sc + J2 s2.sc
* **star-N**   - N qubits all coupled to c with a common J

A *mediated gate* is the qubit factor of exp(-iHt) at a time where the
evolution factorizes as (qubit gate) x (identity on the ancilla).  This module
finds those times numerically, tags the gates they produce, and carries the
closed-form S3 expansion of the linear geometry as an independent oracle.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, svd

from mediated_gates.config import SCAN_GRID
from mediated_gates.errors import DimensionError, DomainError, LookupFailure
from mediated_gates.services.linalg import (
    I2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SWAP,
    Propagator,
    QubitOrdering,
    as_square,
    as_state,
    embed_operator,
    kron,
    max_abs_diff,
    partial_trace,
    transposition,
)

logger = logging.getLogger(__name__)

SCAN_TOLERANCE = 1e-9
# coarse residuals above this never refine to a factorization at sane grids
COARSE_CUTOFF = 0.25
# relative width at which the period bisection stops
PERIOD_RESOLUTION = 1e-13
# s_i . s_j on a pair of spin-1/2 = (2 SWAP - I) / 4
EXCHANGE = (2.0 * SWAP - np.eye(4)) / 4.0


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpinGeometry:
    """Qubits q1..qN, each coupled only to the ancilla ``c`` with strength J_k."""

    couplings: tuple[float, ...]
    topology: str

    def __post_init__(self) -> None:
        couplings = tuple(float(j) for j in self.couplings)
        object.__setattr__(self, "couplings", couplings)
        if not couplings:
            raise DomainError("geometry needs at least one coupled qubit")
        if any(not math.isfinite(j) or j <= 0 for j in couplings):
            raise DomainError(f"couplings must be strictly positive, got {couplings}")
        if self.topology == "linear-3":
            if len(couplings) != 2:
                raise DomainError("linear-3 couples exactly two qubits to the ancilla")
        elif self.topology.startswith("star-"):
            if self.topology != f"star-{len(couplings)}":
                raise DomainError(f"topology {self.topology!r} does not match {len(couplings)} couplings")
        else:
            raise DomainError(f"unknown topology {self.topology!r}")

    @classmethod
    def linear3(cls, j1: float = 1.0, j2: float = 1.0) -> SpinGeometry:
        return cls((j1, j2), "linear-3")

    @classmethod
    def star(cls, n: int, j: float = 1.0) -> SpinGeometry:
        return cls(tuple([j] * n), f"star-{n}")

    @classmethod
    def from_tag(cls, tag: str, j: float = 1.0, j_ratio: float = 1.0) -> SpinGeometry:
        """``linear-3`` uses J_a = j_ratio * J_b on q1 and J_b = j on q2."""
        if tag == "linear-3":
            return cls.linear3(j_ratio * j, j)
        if tag.startswith("star-"):
            try:
                n = int(tag.split("-", 1)[1])
            except ValueError:
                raise DomainError(f"unknown geometry {tag!r}") from None
            return cls.star(n, j)
        raise DomainError(f"unknown geometry {tag!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.couplings)

    @property
    def ordering(self) -> QubitOrdering:
        return QubitOrdering.for_geometry(self.n_qubits)

    @property
    def coupling_map(self) -> dict[str, float]:
        return dict(zip(self.ordering.qubit_labels, self.couplings))

    @property
    def equal_couplings(self) -> bool:
        return max(self.couplings) - min(self.couplings) <= 1e-12 * max(self.couplings)

    def to_dict(self) -> dict:
        return {"topology": self.topology, "couplings": self.coupling_map}


def build_hamiltonian(g: SpinGeometry) -> np.ndarray:
    """H = sum_k J_k s_k . s_c with s = sigma / 2."""
    n = g.ordering.n
    ancilla = n - 1
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for k, j in enumerate(g.couplings):
        h += j * embed_operator(EXCHANGE, n, [k, ancilla])
    return h


def total_spin(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Total S_z and S^2 on n spins."""
    components = []
    for pauli in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        components.append(sum(embed_operator(pauli / 2.0, n, [k]) for k in range(n)))
    s_squared = sum(s @ s for s in components)
    return components[2], s_squared


# ---------------------------------------------------------------------------
# Closed-form evolution of the linear geometry (S3 expansion)
# ---------------------------------------------------------------------------

S3_ELEMENTS = ("I", "p12", "p13", "p23", "p231", "p312")

# row . column, spins labelled 1 (q1), 2 (ancilla), 3 (q2)
CAYLEY_TABLE: dict[str, tuple[str, ...]] = {
    "I":    ("I", "p12", "p13", "p23", "p231", "p312"),
    "p12":  ("p12", "I", "p231", "p312", "p13", "p23"),
    "p13":  ("p13", "p312", "I", "p231", "p23", "p12"),
    "p23":  ("p23", "p231", "p312", "I", "p12", "p13"),
    "p231": ("p231", "p23", "p12", "p13", "p312", "I"),
    "p312": ("p312", "p13", "p23", "p12", "I", "p231"),
}

LINEAR_SPINS = ("q1", "c", "q2")


def s3_operators(
    ordering: QubitOrdering | None = None,
    spins: Sequence[str] = LINEAR_SPINS,
) -> dict[str, np.ndarray]:
    """The six permutation operators of three spins, named as in CAYLEY_TABLE."""
    ordering = ordering or QubitOrdering.qubits(2, with_ancilla=True)
    if len(spins) != 3:
        raise DomainError("S3 operators need exactly three spins")
    s1, s2, s3 = spins
    p12 = transposition(ordering, s1, s2)
    p23 = transposition(ordering, s2, s3)
    p13 = transposition(ordering, s1, s3)
    return {
        "I": np.eye(ordering.dim, dtype=complex),
        "p12": p12,
        "p13": p13,
        "p23": p23,
        "p231": p23 @ p12,
        "p312": p12 @ p23,
    }


def transfer_matrix(j):
    """T with v_{n+1} = T v_n, v = [f, c, e, a, b, d]."""
    return (
        (0, j, 1, 0, 0, 0),
        (j, 0, 0, 1, 0, 0),
        (1, 0, 0, 0, j, 0),
        (0, 1, 0, 0, 0, j),
        (0, 0, j, 0, 0, 1),
        (0, 0, 0, j, 1, 0),
    )


def recursion_coefficients(j, n_max: int) -> list[tuple]:
    """
    Coefficients of Q^n = f I + c p12 + e p23 + a p231 + b p312 + d p13,
    Q = p23 + J p12, for n = 0..n_max.

    Plain Python arithmetic: integer or ``Fraction`` J stays exact.
    """
    t = transfer_matrix(j)
    v = (1, 0, 0, 0, 0, 0)
    out = [v]
    for _ in range(n_max):
        v = tuple(sum(row[k] * v[k] for k in range(6)) for row in t)
        out.append(v)
    return out


def closed_form_coefficients(j, n: int) -> tuple:
    """(f, c, e, a, b, d) of Q^n from the even/odd closed forms."""
    if n < 0:
        raise DomainError("power must be non-negative")
    exact = isinstance(j, (int, Fraction))
    third = Fraction(1, 3) if exact else 1.0 / 3.0
    sigma = 1 + j
    r_squared = 1 - j + j * j
    zero = 0
    if n % 2 == 0:
        r_n = r_squared ** (n // 2)
        f = third * (sigma ** n + 2 * r_n)
        a = third * (sigma ** n - r_n)
        return (f, zero, zero, a, a, zero)
    r_nm1 = r_squared ** ((n - 1) // 2)
    c = third * (sigma ** n + (2 * j - 1) * r_nm1)
    d = third * (sigma ** n - (1 + j) * r_nm1)
    e = third * (sigma ** n + (2 - j) * r_nm1)
    return (zero, c, e, zero, zero, d)


def closed_form_U(j_ratio: float, j_b: float, t: float) -> np.ndarray:
    """
    exp(-iHt) of the linear geometry from the summed S3 expansion.

    J_a = j_ratio * J_b couples q1, J_b couples q2; result is 8x8 in the
    (q1, q2, c) ordering.
    """
    if j_b == 0:
        raise DomainError("J_b = 0: the evolution is the identity, use it directly")
    j = float(j_ratio)
    sigma = 1.0 + j
    r = math.sqrt(1.0 - j + j * j)
    tau = j_b * t / 2.0
    cos_s, cos_r = math.cos(sigma * tau), math.cos(r * tau)
    sin_s, sin_r = math.sin(sigma * tau), math.sin(r * tau) / r
    coeff = {
        "I": (cos_s + 2.0 * cos_r) / 3.0,
        "p231": (cos_s - cos_r) / 3.0,
        "p312": (cos_s - cos_r) / 3.0,
        "p12": -1j * (sin_s + (2.0 * j - 1.0) * sin_r) / 3.0,
        "p13": -1j * (sin_s - (1.0 + j) * sin_r) / 3.0,
        "p23": -1j * (sin_s + (2.0 - j) * sin_r) / 3.0,
    }
    ops = _linear_s3_operators()
    u = sum(coeff[name] * ops[name] for name in S3_ELEMENTS)
    return np.exp(1j * j_b * t * sigma / 4.0) * u


@lru_cache(maxsize=1)
def _linear_s3_operators() -> dict[str, np.ndarray]:
    return s3_operators()


def gate_period_solutions(j_ratio: float) -> tuple[float, ...]:
    """Values of J_b T_g in [0, 4pi] at which the linear evolution factorizes."""
    if abs(j_ratio - 1.0) > 1e-12:
        return ()
    return (0.0, 4 * math.pi / 3, 8 * math.pi / 3, 4 * math.pi)


# ---------------------------------------------------------------------------
# Mediated gate constants
# ---------------------------------------------------------------------------

def _u2() -> np.ndarray:
    d = -(1 + 1j * math.sqrt(3)) / 2
    p = (1 - 1j * math.sqrt(3)) / 4
    q = -(3 + 1j * math.sqrt(3)) / 4
    return np.array(
        [[d, 0, 0, 0],
         [0, p, q, 0],
         [0, q, p, 0],
         [0, 0, 0, d]], dtype=complex,
    )


def symmetric_projector(n: int) -> np.ndarray:
    """Projector onto the permutation-symmetric (Dicke) subspace of n qubits."""
    weights = np.array([bin(k).count("1") for k in range(2 ** n)])
    p = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for excitations in range(n + 1):
        dicke = (weights == excitations).astype(complex)
        dicke /= np.linalg.norm(dicke)
        p += np.outer(dicke, dicke)
    return p


def _u3() -> np.ndarray:
    return 1j * (2.0 * symmetric_projector(3) - np.eye(8))


_CONSTANTS = {
    "U2": _u2,
    "U3": _u3,
    "U2_sq": lambda: _u2() @ _u2(),
    "U3_cubed": lambda: np.linalg.matrix_power(_u3(), 3),
}


def mediated_gate_constant(tag: str) -> np.ndarray:
    try:
        return _CONSTANTS[tag]()
    except KeyError:
        raise LookupFailure(f"unknown mediated gate {tag!r}; known: {sorted(_CONSTANTS)}") from None


# ---------------------------------------------------------------------------
# Factorization detection
# ---------------------------------------------------------------------------

@dataclass
class FactorizationResult:
    factorizes: bool
    qubit_gate: np.ndarray | None
    residual: float
    global_phase: complex

    @property
    def phased_gate(self) -> np.ndarray | None:
        """qubit_gate with the global phase folded back in."""
        if self.qubit_gate is None:
            return None
        return self.global_phase * self.qubit_gate

    def to_dict(self) -> dict:
        return {
            "factorizes": bool(self.factorizes),
            "residual": float(self.residual),
            "global_phase": [float(self.global_phase.real), float(self.global_phase.imag)],
        }


def _ancilla_projection(u: np.ndarray) -> np.ndarray:
    dq = u.shape[0] // 2
    return np.einsum("iaja->ij", u.reshape(dq, 2, dq, 2)) / 2.0


def detect_factorization(u, ordering: QubitOrdering, tolerance: float = SCAN_TOLERANCE) -> FactorizationResult:
    """
    Nearest (qubit gate) x I2 to ``u`` with the ancilla last.

    The qubit block is the projection of the realigned operator onto the
    ancilla identity, pushed to the nearest unitary (polar factor).  The
    global phase is the principal root of its determinant, so that
    ``global_phase * kron(qubit_gate, I2)`` is the reported product form.
    """
    u = as_square(u)
    if ordering.ancilla is None:
        raise DomainError("factorization needs an ordering with an ancilla")
    if u.shape[0] != ordering.dim:
        raise DimensionError(f"operator dimension {u.shape[0]} does not match {ordering.labels}")
    w, _ = _nearest_unitary(_ancilla_projection(u))
    dq = w.shape[0]
    global_phase = np.exp(1j * np.angle(np.linalg.det(w)) / dq)
    residual = max_abs_diff(u, kron(w, I2))
    factorizes = residual <= tolerance
    return FactorizationResult(
        factorizes=factorizes,
        qubit_gate=w / global_phase,
        residual=residual,
        global_phase=complex(global_phase),
    )


def _nearest_unitary(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar factor of ``p`` and its singular values."""
    try:
        left, s, right = svd(p, lapack_driver="gesdd")
    except LinAlgError:
        # gesdd gives up on some large, nearly degenerate blocks
        left, s, right = svd(p, lapack_driver="gesvd")
    return left @ right, s


def _residual(propagator: Propagator, t: float) -> float:
    u = propagator(t)
    try:
        w, _ = _nearest_unitary(_ancilla_projection(u))
    except LinAlgError:
        logger.warning("SVD failed at t=%.15g; treated as no window", t)
        return math.inf
    return max_abs_diff(u, kron(w, I2))


def _overlap_slope(propagator: Propagator, t: float) -> float:
    """
    d/dt of the nuclear norm of the ancilla-averaged block.

    The norm peaks (at half the full dimension) exactly where the evolution
    factorizes, and its derivative crosses zero linearly there.
    """
    w, _ = _nearest_unitary(_ancilla_projection(propagator(t)))
    rate = _ancilla_projection(propagator.derivative(t))
    return float(np.real(np.vdot(w, rate)))


def refine_period(propagator: Propagator, lo: float, hi: float) -> float | None:
    """
    Bisect the slope sign change inside [lo, hi].

    Returns None when the slope does not fall from positive to negative
    across the bracket.
    """
    s_lo, s_hi = _overlap_slope(propagator, lo), _overlap_slope(propagator, hi)
    if not (s_lo > 0.0 > s_hi):
        return None
    for _ in range(200):
        if hi - lo <= PERIOD_RESOLUTION * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if _overlap_slope(propagator, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Gate-period scan
# ---------------------------------------------------------------------------

@dataclass
class GateWindow:
    t: float
    residual: float
    tag: str
    gate: np.ndarray          # phase-bearing qubit gate
    global_phase: complex

    def to_dict(self) -> dict:
        return {
            "t": float(self.t),
            "t_over_pi": float(self.t / math.pi),
            "residual": float(self.residual),
            "gate_tag": self.tag,
            "global_phase": [float(self.global_phase.real), float(self.global_phase.imag)],
        }


@dataclass
class GatePeriodFamily:
    geometry: SpinGeometry
    base_period: float | None
    members: list[GateWindow] = field(default_factory=list)
    grid: int = SCAN_GRID
    t_max: float = 0.0
    note: str = ""

    def gate(self, tag: str) -> np.ndarray:
        for member in self.members:
            if member.tag == tag:
                return member.gate
        raise LookupFailure(f"no window tagged {tag!r}")

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry.to_dict(),
            "base_period": self.base_period,
            "grid": self.grid,
            "t_max": self.t_max,
            "members": [m.to_dict() for m in self.members],
            "note": self.note,
        }


def find_factorization_windows(
    propagator: Propagator,
    ordering: QubitOrdering,
    t_max: float,
    grid: int = SCAN_GRID,
    tolerance: float = SCAN_TOLERANCE,
) -> list[tuple[float, FactorizationResult]]:
    """
    Times in (0, t_max] where the evolution factorizes.

    Coarse grid, then a bisection of the overlap slope inside each
    local-minimum bracket, down to PERIOD_RESOLUTION relative width.
    Returns sorted (t, FactorizationResult).
    """
    if t_max <= 0 or grid < 3:
        raise DomainError("scan needs t_max > 0 and at least three grid points")
    ts = np.linspace(t_max / grid, t_max, grid)
    coarse = np.array([_residual(propagator, t) for t in ts])
    windows: list[tuple[float, FactorizationResult]] = []
    for k in range(grid):
        left = coarse[k - 1] if k > 0 else np.inf
        right = coarse[k + 1] if k + 1 < grid else np.inf
        if coarse[k] > left or coarse[k] > right or coarse[k] > COARSE_CUTOFF:
            continue
        lo = ts[k - 1] if k > 0 else ts[0] / 2.0
        hi = ts[k + 1] if k + 1 < grid else t_max
        try:
            t_best = refine_period(propagator, lo, hi)
        except LinAlgError:
            t_best = None
        if t_best is None:
            # no interior crossing: the period sits on the bracket edge (t_max) or nowhere
            t_best = float(min((lo, ts[k], hi), key=lambda t: _residual(propagator, t)))
        try:
            result = detect_factorization(propagator(t_best), ordering, tolerance)
        except LinAlgError:
            continue
        if not result.factorizes:
            continue
        if windows and abs(windows[-1][0] - t_best) < 1e-6:
            if result.residual < windows[-1][1].residual:
                windows[-1] = (t_best, result)
            continue
        logger.debug("factorization at t=%.15g (residual %.2e)", t_best, result.residual)
        windows.append((t_best, result))
    return windows


def _power_tags(base_name: str, base: np.ndarray, gate: np.ndarray, tolerance: float) -> str:
    power = np.eye(base.shape[0], dtype=complex)
    for p in range(0, 5):
        for sign, prefix in ((1, ""), (-1, "-")):
            if max_abs_diff(gate, sign * power) <= tolerance:
                if p == 0:
                    return f"{prefix}I"
                return f"{prefix}{base_name}" if p == 1 else f"{prefix}{base_name}^{p}"
        power = power @ base
    return "unidentified"


def _is_identity_up_to_phase(gate: np.ndarray, tolerance: float) -> bool:
    phase = gate[0, 0] / abs(gate[0, 0]) if abs(gate[0, 0]) > 0.5 else 1.0
    return max_abs_diff(gate, phase * np.eye(gate.shape[0])) <= tolerance


def base_gate_name(g: SpinGeometry) -> str:
    return "U2" if g.topology == "linear-3" else f"U{g.n_qubits}"


def tag_windows(
    windows: list[tuple[float, FactorizationResult]],
    base_name: str,
    tolerance: float,
) -> list[GateWindow]:
    """Tag each gate as +-(first nontrivial gate)^p."""
    tolerance = max(tolerance, 1e-8)
    base = None
    members = []
    for t, result in windows:
        gate = result.phased_gate
        if base is None and not _is_identity_up_to_phase(gate, 1e-6):
            base = gate
        if base is None:
            identity = np.eye(gate.shape[0])
            if max_abs_diff(gate, identity) <= tolerance:
                tag = "I"
            elif max_abs_diff(gate, -identity) <= tolerance:
                tag = "-I"
            else:
                tag = "phase*I"
        else:
            tag = _power_tags(base_name, base, gate, tolerance)
        members.append(GateWindow(t=t, residual=result.residual, tag=tag, gate=gate,
                                  global_phase=result.global_phase))
    return members


def scan_mediated_gates(
    g: SpinGeometry,
    t_max: float,
    grid: int = SCAN_GRID,
    tolerance: float = SCAN_TOLERANCE,
) -> GatePeriodFamily:
    if not g.equal_couplings:
        raise DomainError(
            "mediated gates require equal couplings: for the linear geometry the "
            "factorization conditions only have solutions at J_a = J_b, and the "
            "star results hold for equal J"
        )
    propagator = Propagator(build_hamiltonian(g))
    windows = find_factorization_windows(propagator, g.ordering, t_max, grid, tolerance)
    members = tag_windows(windows, base_gate_name(g), tolerance)
    base_period = next((m.t for m in members if m.tag not in ("I", "-I")), None)
    logger.info("%s: %d factorization windows on (0, %.6g]", g.topology, len(members), t_max)
    return GatePeriodFamily(geometry=g, base_period=base_period, members=members, grid=grid, t_max=t_max)


def uniqueness_scan(
    g: SpinGeometry,
    t_max: float,
    grid: int = SCAN_GRID,
    tolerance: float = SCAN_TOLERANCE,
) -> GatePeriodFamily:
    """
    Residual scan for unequal couplings.  Only windows whose qubit gate is
    not a multiple of the identity are kept; the expected list is empty.
    """
    propagator = Propagator(build_hamiltonian(g))
    windows = find_factorization_windows(propagator, g.ordering, t_max, grid, tolerance)
    members = [m for m in tag_windows(windows, base_gate_name(g), tolerance)
               if not _is_identity_up_to_phase(m.gate, 1e-6)]
    note = (
        f"couplings {g.couplings} are unequal: the factorization conditions only "
        f"admit nontrivial solutions at equal couplings; {len(members)} nontrivial windows found"
    )
    logger.info("%s unequal couplings: %d nontrivial windows", g.topology, len(members))
    return GatePeriodFamily(geometry=g, base_period=None, members=members, grid=grid, t_max=t_max, note=note)


def analytic_periods(g: SpinGeometry, t_max: float) -> list[float]:
    """Closed-form gate periods inside (0, t_max]."""
    j = min(g.couplings)
    if g.topology == "linear-3":
        ratio = g.couplings[0] / g.couplings[1]
        periods = [t / g.couplings[1] for t in gate_period_solutions(ratio) if t > 0]
    elif g.topology == "star-3" and g.equal_couplings:
        periods = [(8 * m + 2) * math.pi / j for m in range(int(t_max * j / (8 * math.pi)) + 1)]
    else:
        periods = []
    return [t for t in periods if t <= t_max * (1 + 1e-12)]


@lru_cache(maxsize=8)
def star_mediated_gate(m: int, grid: int = 512) -> np.ndarray:
    """U_M from the first nontrivial window of the equal-J star-M scan."""
    if m < 3 or m % 2 == 0:
        raise DomainError(f"star mediated gates are defined here for odd M >= 3, got {m}")
    family = scan_mediated_gates(SpinGeometry.star(m), t_max=2.5 * math.pi, grid=grid)
    if family.base_period is None:
        raise DomainError(f"no mediated gate found for star-{m}")
    gate = family.gate(f"U{m}")
    gate.setflags(write=False)
    return gate


def mediated_gate(tag: str) -> np.ndarray:
    """Constants by tag, plus ``U<M>`` for odd star sizes M >= 5."""
    if tag in _CONSTANTS:
        return mediated_gate_constant(tag)
    if tag.startswith("U") and tag[1:].isdigit():
        return np.array(star_mediated_gate(int(tag[1:])))
    raise LookupFailure(f"unknown entangler {tag!r}")


# ---------------------------------------------------------------------------
# Robustness, restoration, scaling
# ---------------------------------------------------------------------------

def detuning_fidelity(delta: float, j1: float = 1.0) -> float:
    """
    F = |Tr U(delta)^dag U(0)| / Tr U(0)^dag U(0) with J2 = J1 (1 + delta),
    both evolved for the unperturbed period 4pi / (3 J1).
    """
    if abs(delta) > 1.0:
        raise DomainError("detuning must satisfy |delta| <= 1")
    period = 4 * math.pi / (3 * j1)
    u0 = Propagator(build_hamiltonian(SpinGeometry.linear3(j1, j1)))(period)
    ud = Propagator(build_hamiltonian(SpinGeometry.linear3(j1, j1 * (1 + delta))))(period)
    return float(abs(np.trace(ud.conj().T @ u0)) / np.trace(u0.conj().T @ u0).real)


@dataclass
class RobustnessSweep:
    deltas: np.ndarray
    infidelities: np.ndarray
    coefficient: float

    def rows(self) -> list[dict]:
        return [{"delta": float(d), "infidelity": float(v)} for d, v in zip(self.deltas, self.infidelities)]

    def to_dict(self) -> dict:
        return {"coefficient": float(self.coefficient), "points": self.rows()}


def quadratic_coefficient(deltas, values) -> float:
    """Least-squares a in values ~ a delta^2 (fit through the origin)."""
    d2 = np.asarray(deltas, dtype=float) ** 2
    denom = float(np.sum(d2 * d2))
    if denom == 0.0:
        raise DomainError("quadratic fit needs at least one nonzero detuning")
    return float(np.sum(d2 * np.asarray(values, dtype=float)) / denom)


def robustness_sweep(delta_max: float = 0.4, points: int = 41, j1: float = 1.0) -> RobustnessSweep:
    if not 0.0 < delta_max <= 1.0 or points < 2:
        raise DomainError("sweep needs 0 < delta_max <= 1 and at least two points")
    deltas = np.linspace(0.0, delta_max, points)
    infidelities = np.array([1.0 - detuning_fidelity(float(d), j1) for d in deltas])
    return RobustnessSweep(deltas, infidelities, quadratic_coefficient(deltas, infidelities))


def ancilla_restoration_error(g: SpinGeometry, t: float, qubit_state, ancilla_state) -> float:
    """Trace distance of the ancilla's reduced state after evolution from |chi><chi|."""
    chi = as_state(ancilla_state, "ancilla state")
    qubits = as_state(qubit_state, "qubit state")
    if chi.size != 2 or qubits.size != 2 ** g.n_qubits:
        raise DimensionError("state sizes do not match the geometry")
    out = Propagator(build_hamiltonian(g))(t) @ np.kron(qubits, chi)
    rho = partial_trace(out, g.ordering, [g.ordering.ancilla])
    gap = np.linalg.eigvalsh(rho - np.outer(chi, chi.conj()))
    return float(0.5 * np.sum(np.abs(gap)))


# Table I depths for the protocols a scaling report can be asked about.
SCALING_PROTOCOLS = {
    "bell": (2, 4),
    "ghz3": (1, 4),
    "w3": (2, 2),
    "cnot": (4, 4),
}


@dataclass
class ScalingRow:
    n_bus: int
    protocol: str
    mediated_depth: int
    mediated_time_factor: float
    pairwise_depth: int

    def to_dict(self) -> dict:
        return {
            "N": self.n_bus,
            "protocol": self.protocol,
            "mediated_depth": self.mediated_depth,
            "mediated_time_factor": self.mediated_time_factor,
            "pairwise_depth": self.pairwise_depth,
        }


def scaling_report(n_bus: int, protocol: str = "bell") -> ScalingRow:
    """
    Spin-bus scaling: J* ~ J / sqrt(N) stretches the mediated gate period by
    sqrt(N) while the mediated depth stays fixed; the pairwise protocol adds
    one nearest-neighbour SWAP pulse per extra bus spin.
    """
    if n_bus < 1 or n_bus % 2 == 0:
        raise DomainError(f"spin bus length must be a positive odd integer, got {n_bus}")
    try:
        mediated, pairwise = SCALING_PROTOCOLS[protocol]
    except KeyError:
        raise LookupFailure(f"unknown protocol {protocol!r}; known: {sorted(SCALING_PROTOCOLS)}") from None
    return ScalingRow(
        n_bus=n_bus,
        protocol=protocol,
        mediated_depth=mediated,
        mediated_time_factor=math.sqrt(n_bus),
        pairwise_depth=pairwise + (n_bus - 1),
    )
