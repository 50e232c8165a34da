"""
Flags and plumbing shared by every command.
"""
from __future__ import annotations

import argparse
import json
import math
from pathlib import Path

from mediated_gates import config
from mediated_gates.errors import EXIT_NOT_CONVERGED, EXIT_OK, CommandError, DomainError
from mediated_gates.models.schemas import OptimizerConfig, RunConfig, SynthesisReportOut
from mediated_gates.services.reports import write_report
from mediated_gates.services.synthesis import SynthesisReport


def global_flags() -> argparse.ArgumentParser:
    """Parent parser; every subcommand accepts these after its name."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=config.SEED)
    parent.add_argument("--workers", type=int, default=config.WORKERS)
    parent.add_argument("--output", default=str(config.OUTPUT_DIR),
                        help="report directory, or a .json/.csv file path")
    parent.add_argument("--format", choices=("json", "csv"), default=None)
    parent.add_argument("--tolerance", type=float, default=config.TOLERANCE)
    parent.add_argument("--log-level", default=config.LOG_LEVEL)
    parent.add_argument("--angles-in-pi", action="store_true")
    return parent


def _seconds(value: str) -> float | None:
    return None if value.lower() == "none" else float(value)


def add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--restarts", type=int, default=config.RESTARTS)
    parser.add_argument("--depth", type=int, default=None, help="fixed depth (default: increment from 1)")
    parser.add_argument("--max-depth", type=int, default=6)
    parser.add_argument("--time-budget", type=float, default=None, help="seconds per depth and placement")
    parser.add_argument("--target-budget", type=_seconds, default=config.TARGET_BUDGET,
                        help="seconds for the whole search of one target, or none")
    parser.add_argument("--require-converged", action="store_true")


def run_config(args: argparse.Namespace, default_format: str = "json", **options) -> RunConfig:
    return RunConfig(
        command=args.command,
        seed=args.seed,
        workers=args.workers,
        output=args.output,
        format=args.format or default_format,
        tolerance=args.tolerance,
        angles_in_pi=args.angles_in_pi,
        options=options,
    )


def optimizer_config(args: argparse.Namespace) -> OptimizerConfig:
    fixed = getattr(args, "depth", None) is not None
    return OptimizerConfig(
        restarts=args.restarts,
        seed=args.seed,
        workers=args.workers,
        depth_policy="fixed" if fixed else "increment",
        depth=args.depth if fixed else 1,
        max_depth=args.max_depth,
        time_budget=args.time_budget,
        target_budget=args.target_budget,
    )


def load_json(path: str) -> dict:
    file = Path(path)
    if not file.is_file():
        raise CommandError(2, f"{path}: not a known name and not a readable file")
    try:
        return json.loads(file.read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc})") from exc


def emit(run: RunConfig, stem: str, payload: dict, line: str, rows=None, summary=None) -> None:
    path = write_report(run, stem, payload, rows=rows, summary=summary)
    print(f"{line} -> {path}")


def convergence_exit(converged: bool, required: bool) -> int:
    if required and not converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def synthesis_rows(report: SynthesisReport, angles_in_pi: bool = False) -> list[dict]:
    """One CSV row per angle: local layer, one-based qubit, Euler slot."""
    scale = 1.0 / math.pi if angles_in_pi else 1.0
    per_layer = 3 * report.n_qubits
    rows = []
    for k, value in enumerate(report.angles):
        layer, rest = divmod(k, per_layer)
        rows.append({"layer": layer, "qubit": rest // 3 + 1, "slot": "abg"[rest % 3], "angle": float(value) * scale})
    return rows


def synthesis_summary(report: SynthesisReport) -> dict:
    payload = report.to_dict()
    return {
        key: payload[key]
        for key in ("target", "kind", "depth", "total_depth", "objective", "converged", "seed", "restarts",
                    "wall_time_ms", "figure_derived", "seeded_objective", "caption_reproduces", "bound",
                    "verified", "notes")
    } | {"gate_sequence": " ".join(layer.label() for layer in report.gate_sequence)}


def synthesis_payload(report: SynthesisReport, angles_in_pi: bool) -> dict:
    """Validated report body; extra keys (total_depth) survive the round trip."""
    payload = report.to_dict(angles_in_pi)
    checked = SynthesisReportOut(**payload).model_dump()
    return {**payload, **checked}
