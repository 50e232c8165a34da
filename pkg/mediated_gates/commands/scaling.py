"""scaling: mediated vs pairwise depth and time along a spin bus."""
from __future__ import annotations

import argparse

from mediated_gates.commands.common import emit, run_config
from mediated_gates.errors import EXIT_OK
from mediated_gates.services.dynamics import SCALING_PROTOCOLS, scaling_report


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("scaling", parents=parents, help="spin-bus scaling table")
    parser.add_argument("--n", dest="sizes", type=int, nargs="+", default=[1, 9, 25], help="odd bus lengths")
    parser.add_argument("--protocol", choices=sorted(SCALING_PROTOCOLS), default="bell")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    rows = [scaling_report(n, args.protocol).to_dict() for n in args.sizes]
    run_cfg = run_config(args, default_format="csv", sizes=args.sizes, protocol=args.protocol)
    factors = ", ".join(f"{r['mediated_time_factor']:g}" for r in rows)
    emit(run_cfg, f"scaling-{args.protocol}", {"protocol": args.protocol, "rows": rows},
         f"scaling {args.protocol}: time factors {factors}", rows=rows, summary={"protocol": args.protocol})
    return EXIT_OK
