"""synth: search a mediated-gate circuit for a target state or gate."""
from __future__ import annotations

import argparse
from pathlib import Path

from mediated_gates.commands.common import (
    add_optimizer_flags,
    convergence_exit,
    emit,
    load_json,
    optimizer_config,
    run_config,
    synthesis_payload,
    synthesis_rows,
    synthesis_summary,
)
from mediated_gates.errors import LookupFailure
from mediated_gates.services.registry import SynthesisTarget, lookup_target, target_from_payload
from mediated_gates.services.synthesis import synthesize


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("synth", parents=parents, help="synthesize a circuit")
    parser.add_argument("--target", required=True, help="registry name (bell, w3, cnot, ...) or a JSON file")
    parser.add_argument("--menu", nargs="+", default=None,
                        help="entanglers: U2, U3, U5 (all placements) or U2:1,3 (one placement)")
    add_optimizer_flags(parser)
    parser.set_defaults(handler=run)


def resolve_target(source: str, menu) -> SynthesisTarget:
    try:
        return lookup_target(source)
    except LookupFailure:
        if not Path(source).is_file():
            raise
    return target_from_payload(Path(source).stem, load_json(source), menu or ("U2",))


def run(args: argparse.Namespace) -> int:
    cfg = optimizer_config(args)
    target = resolve_target(args.target, args.menu)
    report = synthesize(target, gate_menu=args.menu, cfg=cfg)

    run_cfg = run_config(args, target=args.target, menu=args.menu, optimizer=cfg.model_dump())
    payload = synthesis_payload(report, args.angles_in_pi)
    status = "converged" if report.converged else "NOT converged"
    line = f"synth {report.target}: n={report.depth} objective={report.objective:.3e} {status}"
    emit(run_cfg, f"synth-{report.target}", payload, line,
         rows=synthesis_rows(report, args.angles_in_pi), summary=synthesis_summary(report))
    return convergence_exit(report.converged, args.require_converged)
