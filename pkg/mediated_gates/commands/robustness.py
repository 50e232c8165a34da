"""robustness: gate fidelity under coupling detuning J2 = J1 (1 + delta)."""
from __future__ import annotations

import argparse

from mediated_gates.commands.common import emit, run_config
from mediated_gates.errors import EXIT_OK
from mediated_gates.services.dynamics import quadratic_coefficient, robustness_sweep


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("robustness", parents=parents, help="detuning sweep of the U2 gate")
    parser.add_argument("--delta-max", type=float, default=0.4)
    parser.add_argument("--points", type=int, default=41)
    parser.add_argument("--window", type=float, default=0.1, help="upper delta of the small-detuning fit")
    parser.add_argument("--J", dest="j", type=float, default=1.0)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    sweep = robustness_sweep(args.delta_max, args.points, args.j)
    inside = sweep.deltas <= args.window + 1e-12
    window_coefficient = (
        quadratic_coefficient(sweep.deltas[inside], sweep.infidelities[inside])
        if inside.sum() > 1 else None
    )
    summary = {"coefficient": sweep.coefficient, "window": args.window, "window_coefficient": window_coefficient}
    payload = {**sweep.to_dict(), "window": args.window, "window_coefficient": window_coefficient}

    run_cfg = run_config(args, default_format="csv", delta_max=args.delta_max, points=args.points,
                         window=args.window, J=args.j)
    emit(run_cfg, "robustness", payload, f"robustness: 1-F ~ {sweep.coefficient:.4f} delta^2",
         rows=sweep.rows(), summary=summary)
    return EXIT_OK
