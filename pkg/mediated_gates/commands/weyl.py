"""weyl: Weyl-chamber point, Makhlin invariants and entangling power of a gate."""
from __future__ import annotations

import argparse

from mediated_gates import config
from mediated_gates.commands.common import emit, load_json, run_config
from mediated_gates.errors import EXIT_OK, LookupFailure
from mediated_gates.models.schemas import WeylReportOut
from mediated_gates.services.entanglement import (
    makhlin_invariants,
    max_concurrence,
    point_is_perfect_entangler,
    weyl_coordinates,
    weyl_max_concurrence,
)
from mediated_gates.services.linalg import matrix_from_json, require_unitary
from mediated_gates.services.registry import named_gate


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("weyl", parents=parents, help="characterize a two-qubit gate")
    parser.add_argument("gate", help="gate name (cnot, u2, sqrtswap, ...) or a {dim, entries} JSON file")
    parser.add_argument("--restarts", type=int, default=config.RESTARTS,
                        help="multistart restarts for the concurrence search")
    parser.set_defaults(handler=run)


def load_gate(source: str, tolerance: float):
    try:
        u = named_gate(source)
    except LookupFailure:
        u = matrix_from_json(load_json(source))
    return require_unitary(u, tolerance, source)


def run(args: argparse.Namespace) -> int:
    u = load_gate(args.gate, max(args.tolerance, 1e-8))
    point = weyl_coordinates(u)
    perfect = point_is_perfect_entangler(point)
    report = WeylReportOut(
        gate=args.gate,
        weyl=point.to_dict(),
        makhlin=makhlin_invariants(u).to_dict(),
        perfect_entangler=perfect,
        max_concurrence=max_concurrence(u, restarts=args.restarts, seed=args.seed),
        analytic_max_concurrence=weyl_max_concurrence(point),
    )
    payload = report.model_dump()
    run_cfg = run_config(args, gate=args.gate, restarts=args.restarts)
    summary = {**{f"weyl.{k}": v for k, v in report.weyl.items()},
               **{f"makhlin.{k}": v for k, v in report.makhlin.items()}}
    rows = [{
        "gate": args.gate, **report.weyl, **report.makhlin,
        "perfect_entangler": perfect,
        "max_concurrence": report.max_concurrence,
        "analytic_max_concurrence": report.analytic_max_concurrence,
    }]
    line = (f"weyl {args.gate}: ({point.c1:.6f}, {point.c2:.6f}, {point.c3:.6f}) "
            f"perfect_entangler={str(perfect).lower()} C_max={report.max_concurrence:.6f}")
    emit(run_cfg, f"weyl-{_stem(args.gate)}", payload, line, rows=rows, summary=summary)
    return EXIT_OK


def _stem(source: str) -> str:
    return source.rsplit("/", 1)[-1].removesuffix(".json")
