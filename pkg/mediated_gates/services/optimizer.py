"""
Two-stage global minimizer: multistart clustering, then Nelder-Mead polish.

Stage 1 runs a short simplex probe from every start (seed vectors first,
then uniform samples in [-pi, pi]).  Probed points closer than
``cluster_radius`` share a basin; only the best point of each basin moves
on.  Stage 2 polishes the best basins with long adaptive simplex runs,
restarting from the endpoint while it improves and from a perturbed copy of
the best point when it stalls.  A basin is dropped after ``stall_rounds``
rounds without relative progress or once it has spent ``basin_evaluations``.

With ``workers > 1`` the probes are farmed out to a process pool; results
come back in start order, so the outcome matches the single-worker run.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from mediated_gates.models.schemas import OptimizerConfig

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    converged: bool
    starts_used: int
    clusters: int
    nfev: int
    trace: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "fun": float(self.fun),
            "converged": bool(self.converged),
            "starts_used": int(self.starts_used),
            "clusters": int(self.clusters),
            "nfev": int(self.nfev),
        }


def _simplex(objective: Objective, x0: np.ndarray, cfg: OptimizerConfig, maxiter: int):
    return minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "xatol": cfg.xatol,
            "fatol": cfg.fatol,
            "maxiter": maxiter,
            "maxfev": 2 * maxiter,
            "adaptive": True,
        },
    )


def _probe(args) -> tuple[np.ndarray, float, int]:
    objective, x0, cfg = args
    res = _simplex(objective, x0, cfg, cfg.probe_iterations)
    return np.asarray(res.x, dtype=float), float(res.fun), int(res.nfev)


def sample_starts(dim: int, cfg: OptimizerConfig, rng: np.random.Generator, seeds: Sequence = ()) -> np.ndarray:
    seeded = [np.asarray(s, dtype=float).reshape(dim) for s in seeds]
    uniform = rng.uniform(-math.pi, math.pi, size=(cfg.restarts, dim))
    return np.vstack(seeded + [uniform]) if seeded else uniform


def cluster_points(points: Sequence[np.ndarray], values: Sequence[float], radius: float) -> list[int]:
    """Indices of one representative per basin, best first (ties by start order)."""
    order = sorted(range(len(points)), key=lambda k: (values[k], k))
    representatives: list[int] = []
    for k in order:
        if all(np.linalg.norm(points[k] - points[r]) >= radius for r in representatives):
            representatives.append(k)
    return representatives


def multistart_minimize(
    objective: Objective,
    dim: int,
    cfg: OptimizerConfig,
    rng_key: Sequence[int] = (),
    seeds: Sequence = (),
) -> MinimizeResult:
    """
    Minimize ``objective`` over R^dim.

    ``rng_key`` extends ``cfg.seed`` into the sampling stream, so callers can
    run independent deterministic searches (one per depth and placement).
    A ``time_budget`` cuts the polish stage short and makes results depend on
    machine speed; leave it unset for bit-identical reruns.
    """
    started = time.perf_counter()
    rng = np.random.default_rng([cfg.seed, *rng_key])
    starts = sample_starts(dim, cfg, rng, seeds)
    jobs = [(objective, x0, cfg) for x0 in starts]
    if cfg.workers > 1 and len(jobs) > 1:
        with Pool(min(cfg.workers, len(jobs))) as pool:
            probes = pool.map(_probe, jobs)
    else:
        probes = []
        for job in jobs:
            probes.append(_probe(job))
            if probes[-1][1] < cfg.convergence_threshold:
                break
    # both paths keep the probes up to the first converged one
    for k, probe in enumerate(probes):
        if probe[1] < cfg.convergence_threshold:
            probes = probes[: k + 1]
            break

    trace: list[float] = []
    best_x, best_f = None, math.inf
    nfev = 0
    for x, f, count in probes:
        nfev += count
        if f < best_f:
            best_x, best_f = x, f
        trace.append(best_f)

    points = [p[0] for p in probes]
    values = [p[1] for p in probes]
    representatives = cluster_points(points, values, cfg.cluster_radius)
    logger.debug("%d starts -> %d basins (best probe %.3e)", len(starts), len(representatives), best_f)

    for rank, k in enumerate(representatives[: cfg.polish_candidates]):
        if best_f < cfg.convergence_threshold or _out_of_time(started, cfg):
            break
        kick = np.random.default_rng([cfg.seed, *rng_key, k])
        cand_x, cand_f = points[k], values[k]
        x_start = cand_x
        basin_nfev, stalled = 0, 0
        for _ in range(cfg.polish_rounds):
            budget = max(1, min(cfg.max_iterations, (cfg.basin_evaluations - basin_nfev) // 2))
            res = _simplex(objective, x_start, cfg, budget)
            basin_nfev += int(res.nfev)
            improved = res.fun < cand_f - cfg.stall_margin * cand_f
            if res.fun < cand_f:
                cand_x, cand_f = np.asarray(res.x, dtype=float), float(res.fun)
            if cand_f < best_f:
                best_x, best_f = cand_x, cand_f
            trace.append(best_f)
            stalled = 0 if improved else stalled + 1
            if best_f < cfg.convergence_threshold or _out_of_time(started, cfg):
                break
            if stalled >= cfg.stall_rounds or basin_nfev >= cfg.basin_evaluations:
                break
            x_start = cand_x if improved else cand_x + cfg.perturbation * kick.normal(size=dim)
        nfev += basin_nfev
        logger.debug("basin %d (start %d) polished to %.3e in %d evaluations", rank, k, cand_f, basin_nfev)

    return MinimizeResult(
        x=best_x,
        fun=best_f,
        converged=best_f < cfg.convergence_threshold,
        starts_used=len(probes),
        clusters=len(representatives),
        nfev=nfev,
        trace=trace,
    )


def _out_of_time(started: float, cfg: OptimizerConfig) -> bool:
    return cfg.time_budget is not None and time.perf_counter() - started > cfg.time_budget
