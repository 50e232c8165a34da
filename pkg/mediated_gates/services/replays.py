"""
Recorded circuits and the odd/even W-state constructions.

Closed-form circuits (fig3a, fig4a, fig6) are rebuilt exactly.  The
remaining figures only publish three-decimal angles without the layout of
their rotations; those replays drop the published angles into the beta
slots in layer order (angle k -> local layer k // q, qubit k % q) and score
that seed as ``seeded_objective``.  The circuit that is reported is a
polished solution at the same depth, recorded once with ``record_replays``
and read back from the fixture file; ``caption_reproduces`` says whether the
published angles alone meet the bound.
"""
from __future__ import annotations

import json
import logging
import math
import time
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from mediated_gates import config
from mediated_gates.errors import DimensionError, DomainError, LookupFailure
from mediated_gates.models.schemas import OptimizerConfig
from mediated_gates.services.circuits import (
    Circuit,
    CircuitSkeleton,
    EntanglerLayer,
    LocalLayer,
    Rotation,
    evaluate_circuit,
)
from mediated_gates.services.entanglement import local_equivalence
from mediated_gates.services.linalg import MAX_QUBITS, QubitOrdering
from mediated_gates.services.optimizer import multistart_minimize
from mediated_gates.services.registry import (
    B_GATE,
    CNOT,
    SQRT_SWAP,
    SWAP,
    SynthesisTarget,
    bell_input,
    bell_minus,
    lookup_target,
    w_state,
    w_target,
)
from mediated_gates.services.synthesis import (
    CircuitObjective,
    SynthesisReport,
    report_from_run,
    synthesize,
    target_objective,
)

logger = logging.getLogger(__name__)

EXACT_BOUND = 1e-10
CAPTION_BOUND = 1e-6

FIGURE_BOUNDS = {
    "fig3a": EXACT_BOUND,
    "fig4a": 1e-8,
    "fig4c": CAPTION_BOUND,
    "fig4e": CAPTION_BOUND,
    "fig4g": CAPTION_BOUND,
    "fig5b": EXACT_BOUND,
    "fig5c": CAPTION_BOUND,
    "fig5d": CAPTION_BOUND,
    "fig6": 1e-8,
}

U2_PAIR = EntanglerLayer.single("U2", (0, 1))
U3_ALL = EntanglerLayer.single("U3", (0, 1, 2))


# ---------------------------------------------------------------------------
# Exact circuits
# ---------------------------------------------------------------------------

def _fig3a_circuit() -> Circuit:
    theta1 = -math.acos(1.0 / 3.0)
    theta2 = -math.pi / 6 - math.atan((4 * math.sqrt(2) - 3 * math.sqrt(3)) / 5)
    layers = (
        LocalLayer.on(2, {0: Rotation.ry(math.pi)}),
        U2_PAIR,
        LocalLayer.on(2, {1: Rotation.rz(theta1)}),
        U2_PAIR,
        LocalLayer.on(2, {0: Rotation.rz(theta2)}),
    )
    return Circuit(QubitOrdering.qubits(2), layers)


def _fig4a_core() -> Circuit:
    b = -math.acos(-1.0 / 3.0)
    flip = LocalLayer.on(2, {0: Rotation(math.pi, math.pi, 0.0)})
    layers = (
        flip, U2_PAIR,
        flip, U2_PAIR,
        LocalLayer.on(2, {0: Rotation(b, math.pi, 0.0)}), U2_PAIR,
        flip, U2_PAIR,
        LocalLayer.identity(2),
    )
    return Circuit(QubitOrdering.qubits(2), layers)


def _fig4a_circuit() -> Circuit:
    """Four U2 with the b rotation, dressed by the local layers that make it CNOT."""
    core = _fig4a_core()
    dressing = local_equivalence(CNOT, evaluate_circuit(core))
    first, *middle, _ = core.layers
    b1, b2 = dressing.before
    a1, a2 = dressing.after
    x1 = first.rotations[0].matrix
    layers = (
        LocalLayer((Rotation.from_matrix(x1 @ b1), Rotation.from_matrix(b2))),
        *middle,
        LocalLayer((Rotation.from_matrix(a1), Rotation.from_matrix(a2))),
    )
    return Circuit(QubitOrdering.qubits(2), layers)


def _fig6_circuit() -> Circuit:
    theta = math.acos(0.25)
    layers = (
        LocalLayer.on(3, {0: Rotation.rz(theta)}),
        U3_ALL,
        LocalLayer.on(3, {0: Rotation.rz(-theta), 1: Rotation.rz(theta)}),
    )
    return Circuit(QubitOrdering.qubits(3), layers)


def _state_target(name: str, state, n: int, input_state=None, input_depth: int = 0) -> SynthesisTarget:
    return SynthesisTarget(name, "state", state, n, input_state=input_state, input_depth=input_depth)


def _exact_report(figure_id: str, circuit: Circuit, target: SynthesisTarget, cfg: OptimizerConfig) -> SynthesisReport:
    started = time.perf_counter()
    objective = target_objective(circuit, target)
    return SynthesisReport(
        target=target.name,
        kind=target.kind,
        n_qubits=circuit.n_qubits,
        depth=circuit.depth,
        gate_sequence=tuple(circuit.entangler_layers),
        angles=circuit.angles,
        objective=objective,
        seed=cfg.seed,
        restarts_used=0,
        wall_time_ms=(time.perf_counter() - started) * 1000.0,
        converged=objective < cfg.convergence_threshold,
        bound=FIGURE_BOUNDS[figure_id],
        input_depth=target.input_depth,
        notes=f"{figure_id}: closed-form angles",
    )


# ---------------------------------------------------------------------------
# Caption-seeded circuits
# ---------------------------------------------------------------------------

def _pi(values) -> list[float]:
    return [v * math.pi for v in values]


# figure id -> (target, sequence, beta-slot angles, extra (slot, angle) placements)
_SEEDED: dict[str, Callable[[], tuple]] = {
    "fig4c": lambda: (
        SynthesisTarget("sqrtswap", "gate", SQRT_SWAP, 2),
        (U2_PAIR,) * 4,
        _pi([0.524, 0.549, 1.015, 0.100, 0.392, -0.305, -0.437, 0.626, -0.906, -0.174]),
        {},
    ),
    "fig4e": lambda: (
        SynthesisTarget("swap", "gate", SWAP, 2),
        (U2_PAIR,) * 5,
        _pi([-0.737, -0.465, -0.543, 0.700, 0.807, 0.009, -0.278, 0.369, 0.274, -0.325]),
        {},
    ),
    "fig4g": lambda: (
        SynthesisTarget("bgate", "gate", B_GATE, 2),
        (U2_PAIR,) * 5,
        _pi([0.297, 0.788, 0.660, -1.092, 0.579]),
        {},
    ),
    # phi: z rotation on q1 in the last local layer (layer 2, qubit 0, alpha)
    "fig5c": lambda: (
        _state_target("w3", w_state(3), 3),
        (U2_PAIR, U3_ALL),
        _pi([-0.262, 0.730, -1.356, 0.349, 1.193, 0.270]),
        {3 * (2 * 3 + 0): 1.299 * math.pi},
    ),
    "fig5d": lambda: (
        _state_target("w3", w_state(3), 3),
        (U3_ALL, U3_ALL),
        _pi([0.529, 0.725, -0.608, -0.137]),
        {},
    ),
}


def caption_seed(skeleton: CircuitSkeleton, betas, extra: dict[int, float]) -> np.ndarray:
    seed = np.zeros(skeleton.n_params)
    if len(betas) > skeleton.n_params // 3:
        raise DimensionError(f"{len(betas)} angles exceed the {skeleton.n_params // 3} rotation slots")
    for k, beta in enumerate(betas):
        seed[3 * k + 1] = beta
    for slot, value in extra.items():
        seed[slot] = value
    return seed


SEEDED_FIGURES = tuple(sorted(_SEEDED))


def load_recorded_angles(path: Path | str | None = None) -> dict[str, dict]:
    """Recorded polished solutions, keyed by figure id; empty when nothing was recorded."""
    path = Path(path) if path is not None else config.FIXTURES_PATH
    if not path.is_file():
        return {}
    try:
        recorded = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid fixture file ({exc})") from exc
    if not isinstance(recorded, dict):
        raise DomainError(f"{path}: fixtures must map figure ids to entries")
    return recorded


def _seeded_setup(figure_id: str):
    target, sequence, betas, extra = _SEEDED[figure_id]()
    skeleton = CircuitSkeleton(target.ordering, sequence)
    objective = CircuitObjective(skeleton, target)
    seed = caption_seed(skeleton, betas, extra)
    return target, skeleton, objective, seed


def polish_figure(figure_id: str, cfg: OptimizerConfig) -> SynthesisReport:
    """Minimize from the caption seed at the published depth (slow)."""
    started = time.perf_counter()
    target, skeleton, objective, seed = _seeded_setup(figure_id)
    seeded_objective = float(objective(seed))
    run = multistart_minimize(objective, skeleton.n_params, cfg, rng_key=(skeleton.depth, 0), seeds=[seed])
    report = report_from_run(
        target, skeleton, run, cfg, started,
        figure_derived=True,
        seeded_objective=seeded_objective,
        bound=FIGURE_BOUNDS[figure_id],
    )
    report.notes = f"{figure_id}: no recorded angles, polished from the caption seed at depth {skeleton.depth}"
    logger.info("%s seeded %.3e -> polished %.3e", figure_id, seeded_objective, report.objective)
    return report


def _recorded_report(figure_id: str, entry: dict, cfg: OptimizerConfig) -> SynthesisReport:
    """Evaluate recorded angles as they are; no optimizer run."""
    started = time.perf_counter()
    target, skeleton, objective, seed = _seeded_setup(figure_id)
    try:
        params = np.asarray(entry["params"], dtype=float).reshape(skeleton.n_params)
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"{figure_id}: recorded entry needs {skeleton.n_params} params ({exc})") from exc
    angles = skeleton.expand(params)
    value = float(objective(params))
    report = SynthesisReport(
        target=target.name,
        kind=target.kind,
        n_qubits=target.n_qubits,
        depth=skeleton.depth,
        gate_sequence=skeleton.sequence,
        angles=angles,
        objective=value,
        seed=int(entry.get("seed", cfg.seed)),
        restarts_used=0,
        wall_time_ms=(time.perf_counter() - started) * 1000.0,
        converged=value < cfg.convergence_threshold,
        figure_derived=True,
        seeded_objective=float(objective(seed)),
        bound=FIGURE_BOUNDS[figure_id],
        input_depth=target.input_depth,
        notes=f"{figure_id}: recorded polished angles at depth {skeleton.depth}",
        params=params,
    )
    return report


def record_replays(
    figure_ids: Sequence[str] = SEEDED_FIGURES,
    cfg: OptimizerConfig | None = None,
    path: Path | str | None = None,
) -> dict[str, dict]:
    """Polish each figure once and merge the solutions into the fixture file."""
    cfg = cfg or OptimizerConfig()
    path = Path(path) if path is not None else config.FIXTURES_PATH
    recorded = load_recorded_angles(path)
    for figure_id in figure_ids:
        key = figure_id.lower()
        if key not in _SEEDED:
            raise LookupFailure(f"{figure_id!r} has no caption seed to record; known: {list(SEEDED_FIGURES)}")
        report = polish_figure(key, cfg)
        recorded[key] = {
            "params": [float(p) for p in report.params],
            "objective": report.objective,
            "seed": cfg.seed,
            "restarts": cfg.restarts,
        }
        if not report.passed:
            logger.warning("%s recorded outside its bound (%.3e)", key, report.objective)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(recorded, indent=2, sort_keys=True))
    logger.info("recorded %d figure solutions in %s", len(figure_ids), path)
    return recorded


def _seeded_report(figure_id: str, cfg: OptimizerConfig, recorded: dict[str, dict]) -> SynthesisReport:
    if figure_id in recorded:
        return _recorded_report(figure_id, recorded[figure_id], cfg)
    return polish_figure(figure_id, cfg)


def replay_figure(
    figure_id: str,
    cfg: OptimizerConfig | None = None,
    recorded: dict[str, dict] | None = None,
) -> SynthesisReport:
    """
    Rebuild one published circuit.  Caption-seeded figures use the recorded
    solution from ``recorded`` (default: the fixture file) and fall back to a
    fresh polish when there is none.
    """
    cfg = cfg or OptimizerConfig()
    key = figure_id.lower()
    if key == "fig3a":
        return _exact_report(key, _fig3a_circuit(), _state_target("bell", bell_minus(), 2), cfg)
    if key == "fig4a":
        return _exact_report(key, _fig4a_circuit(), SynthesisTarget("cnot", "gate", CNOT, 2), cfg)
    if key == "fig6":
        target = _state_target("w3", w_state(3), 3, input_state=bell_input(3), input_depth=2)
        return _exact_report(key, _fig6_circuit(), target, cfg)
    if key == "fig5b":
        fixed = cfg.model_copy(update={"depth_policy": "fixed", "depth": 1})
        report = synthesize(lookup_target("ghz3"), ("U3",), fixed)
        report.bound = FIGURE_BOUNDS[key]
        report.notes = "fig5b: no published angles, fresh depth-1 synthesis with U3"
        return report
    if key in _SEEDED:
        return _seeded_report(key, cfg, load_recorded_angles() if recorded is None else recorded)
    raise LookupFailure(f"unknown figure {figure_id!r}; known: {sorted(FIGURE_BOUNDS)}")


# ---------------------------------------------------------------------------
# Odd and even W states
# ---------------------------------------------------------------------------

VERIFIED_W_RANGE = (1, 2, 3)


def _w_skeleton(m: int) -> CircuitSkeleton:
    return CircuitSkeleton(
        QubitOrdering.qubits(m),
        (EntanglerLayer.single(f"U{m}", tuple(range(m))),),
        free_qubits=(0, 1),
    )


def odd_w_reference_angles(m: int) -> np.ndarray:
    """
    Free angles (q1, q2 over two local layers) that turn |Psi->|0..0> into
    |W_m> with one U_m: Rz(theta) on q1 before, cos(theta) = 1 - m/4, then
    z rotations on q1 and q2 that line up the excitation phases.
    """
    if m < 3 or m % 2 == 0:
        raise DomainError(f"odd W construction needs odd m >= 3, got {m}")
    cos_theta = 1.0 - m / 4.0
    if abs(cos_theta) > 1.0:
        raise DomainError(f"no pre-rotation balances the amplitudes for m = {m}")
    skeleton = _w_skeleton(m)
    params = np.zeros(skeleton.n_params)
    params[0] = math.acos(cos_theta)
    psi = skeleton.apply(params, bell_input(m))
    a1, a2, ak = psi[1 << (m - 1)], psi[1 << (m - 2)], psi[1 << (m - 3)]
    params[6] = float(np.angle(ak) - np.angle(a1))
    params[9] = float(np.angle(ak) - np.angle(a2))
    return params


def synthesize_w_odd(n: int, cfg: OptimizerConfig | None = None) -> SynthesisReport:
    """|W_{2n+1}> from a Bell pair with a single U_{2n+1}; only q1 and q2 rotate."""
    cfg = cfg or OptimizerConfig()
    m = 2 * n + 1
    if n < 1 or m + 1 > MAX_QUBITS:
        raise DimensionError(f"W_{m} with its ancilla exceeds the {MAX_QUBITS}-spin limit")
    target = w_target(m)
    try:
        seeds = [odd_w_reference_angles(m)]
    except DomainError:
        seeds = []
    report = synthesize(target, cfg=cfg, free_qubits=(0, 1), seeds=seeds)
    report.verified = n in VERIFIED_W_RANGE
    if not report.verified:
        report.notes = f"W_{m}: outside the numerically verified range N = 1..3"
    return report


def project_even_w(n: int, measured_qubit: str | int, outcome: int) -> tuple[np.ndarray, float]:
    """
    Z-measure one qubit of |W_{2n+1}>.  Outcome 0 leaves |W_{2n}> (probability
    2n/(2n+1)); outcome 1 leaves |0...0> (probability 1/(2n+1)).
    """
    if n < 1:
        raise DomainError(f"N must be positive, got {n}")
    if outcome not in (0, 1):
        raise DomainError(f"measurement outcome must be 0 or 1, got {outcome}")
    m = 2 * n + 1
    ordering = QubitOrdering.qubits(m)
    label = f"q{measured_qubit}" if isinstance(measured_qubit, int) else measured_qubit
    axis = ordering.index(label)
    branch = np.take(w_state(m).reshape([2] * m), outcome, axis=axis).reshape(-1)
    probability = float(np.vdot(branch, branch).real)
    return branch / math.sqrt(probability), probability


