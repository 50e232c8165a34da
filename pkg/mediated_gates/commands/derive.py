"""derive: scan a spin geometry for mediated-gate windows."""
from __future__ import annotations

import argparse
import math

from mediated_gates import config
from mediated_gates.commands.common import emit, run_config
from mediated_gates.errors import EXIT_OK
from mediated_gates.models.schemas import ScanReportOut
from mediated_gates.services.dynamics import SpinGeometry, analytic_periods, scan_mediated_gates, uniqueness_scan
from mediated_gates.services.linalg import matrix_to_json

GEOMETRIES = ("linear-3", "star-3", "star-5", "star-7")


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("derive", parents=parents, help="find gate periods of a geometry")
    parser.add_argument("--geometry", choices=GEOMETRIES, required=True)
    parser.add_argument("--J", dest="j", type=float, default=1.0)
    parser.add_argument("--J-ratio", dest="j_ratio", type=float, default=1.0, help="J_a / J_b (linear-3 only)")
    parser.add_argument("--t-max", type=float, default=None, help="scan end time (default 4pi/J)")
    parser.add_argument("--grid", type=int, default=config.SCAN_GRID)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    g = SpinGeometry.from_tag(args.geometry, j=args.j, j_ratio=args.j_ratio)
    t_max = args.t_max if args.t_max is not None else 4 * math.pi / args.j
    if g.equal_couplings:
        family = scan_mediated_gates(g, t_max, args.grid, args.tolerance)
    else:
        family = uniqueness_scan(g, t_max, args.grid, args.tolerance)

    body = family.to_dict()
    body["members"] = [{**m.to_dict(), "gate": matrix_to_json(m.gate)} for m in family.members]
    body["analytic_periods"] = analytic_periods(g, t_max)
    payload = ScanReportOut(**body).model_dump()

    run_cfg = run_config(args, geometry=args.geometry, J=args.j, J_ratio=args.j_ratio, t_max=t_max, grid=args.grid)
    rows = [m.to_dict() for m in family.members]
    summary = {"geometry": args.geometry, "base_period": family.base_period, "note": family.note}
    tags = ", ".join(f"{m.tag}@{m.t / math.pi:.6g}pi" for m in family.members) or "no windows"
    emit(run_cfg, f"derive-{args.geometry}", payload, f"derive {args.geometry}: {tags}", rows=rows, summary=summary)
    return EXIT_OK
