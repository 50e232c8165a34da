"""wodd: |W_{2N+1}> from a Bell pair and one star gate, plus the even-W projections."""
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
from mediated_gates.services.linalg import state_to_json
from mediated_gates.services.replays import project_even_w, synthesize_w_odd


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("wodd", parents=parents, help="odd W state with a single star gate")
    parser.add_argument("--n", dest="n", type=int, default=2, help="N in W_{2N+1}")
    parser.add_argument("--measure-qubit", default="q1", help="qubit measured for the even-W projection")
    parser.add_argument("--restarts", type=int, default=config.RESTARTS)
    parser.add_argument("--time-budget", type=float, default=None)
    parser.add_argument("--require-converged", action="store_true")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed, workers=args.workers, time_budget=args.time_budget)
    report = synthesize_w_odd(args.n, cfg)
    projections = []
    for outcome in (0, 1):
        state, probability = project_even_w(args.n, args.measure_qubit, outcome)
        projections.append({"outcome": outcome, "probability": probability, "state": state_to_json(state)})

    payload = {**synthesis_payload(report, args.angles_in_pi), "measured_qubit": args.measure_qubit,
               "projections": projections}
    summary = {**synthesis_summary(report), "measured_qubit": args.measure_qubit,
               **{f"p{p['outcome']}": p["probability"] for p in projections}}
    run_cfg = run_config(args, n=args.n, measure_qubit=args.measure_qubit, optimizer=cfg.model_dump())
    m = 2 * args.n + 1
    line = (f"wodd W_{m}: objective={report.objective:.3e} "
            f"P(W_{m - 1})={projections[0]['probability']:.6f}")
    emit(run_cfg, f"wodd-w{m}", payload, line, rows=synthesis_rows(report, args.angles_in_pi), summary=summary)
    return convergence_exit(report.converged, args.require_converged)
