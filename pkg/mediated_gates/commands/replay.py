"""replay: rebuild a published circuit and score it against its bound."""
from __future__ import annotations

import argparse

from mediated_gates import config
from mediated_gates.commands.common import (
    convergence_exit,
    emit,
    run_config,
    synthesis_payload,
    synthesis_rows,
    synthesis_summary,
)
from mediated_gates.models.schemas import OptimizerConfig
from mediated_gates.services.replays import (
    FIGURE_BOUNDS,
    SEEDED_FIGURES,
    load_recorded_angles,
    record_replays,
    replay_figure,
)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("replay", parents=parents, help="replay a circuit with published angles")
    parser.add_argument("figure", choices=sorted(FIGURE_BOUNDS))
    parser.add_argument("--restarts", type=int, default=config.RESTARTS)
    parser.add_argument("--fixtures", default=str(config.FIXTURES_PATH),
                        help="recorded solutions of the caption-seeded figures")
    parser.add_argument("--record", action="store_true",
                        help=f"polish and store the solution ({', '.join(SEEDED_FIGURES)} only)")
    parser.add_argument("--require-converged", action="store_true", help="exit 4 when the bound is missed")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed, workers=args.workers)
    if args.record:
        recorded = record_replays([args.figure], cfg, args.fixtures)
    else:
        recorded = load_recorded_angles(args.fixtures)
    report = replay_figure(args.figure, cfg, recorded)
    run_cfg = run_config(args, figure=args.figure, fixtures=args.fixtures, record=args.record,
                         optimizer=cfg.model_dump())
    status = "within bound" if report.passed else "OUTSIDE bound"
    line = f"replay {args.figure}: objective={report.objective:.3e} bound={report.bound:.0e} {status}"
    if report.caption_reproduces is not None:
        line += f" (caption angles {report.seeded_objective:.3e})"
    emit(run_cfg, f"replay-{args.figure}", synthesis_payload(report, args.angles_in_pi), line,
         rows=synthesis_rows(report, args.angles_in_pi), summary=synthesis_summary(report))
    return convergence_exit(report.passed, args.require_converged)
