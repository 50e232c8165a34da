from __future__ import annotations
import math
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from mediated_gates import config


# ---------- Optimizer ----------
class OptimizerConfig(BaseModel):
    restarts: int = Field(config.RESTARTS, ge=1)
    cluster_radius: float = Field(math.pi / 4, gt=0)
    xatol: float = Field(1e-12, gt=0)
    fatol: float = Field(1e-16, gt=0)
    max_iterations: int = Field(100_000, ge=1)
    probe_iterations: int = Field(600, ge=1)     # short simplex run per start
    polish_candidates: int = Field(8, ge=1)      # best clusters sent to the long simplex stage
    polish_rounds: int = Field(16, ge=1)
    stall_rounds: int = Field(3, ge=1)          # rounds without progress before a basin is dropped
    stall_margin: float = Field(1e-3, ge=0)     # relative drop that counts as progress
    basin_evaluations: int = Field(200_000, ge=1)
    perturbation: float = Field(0.05, gt=0)      # kick size when a polish round stalls
    seed: int = config.SEED
    depth_policy: Literal["fixed", "increment"] = "increment"
    depth: int = Field(1, ge=0)                  # fixed depth, or first depth tried
    max_depth: int = Field(6, ge=0)
    convergence_threshold: float = Field(config.CONVERGENCE_THRESHOLD, gt=0)
    workers: int = Field(config.WORKERS, ge=1)
    max_sequences: int = Field(64, ge=1)         # entangler placements tried per depth
    time_budget: Optional[float] = Field(None, gt=0)   # seconds per (depth, placement)
    target_budget: Optional[float] = Field(config.TARGET_BUDGET, gt=0)   # seconds per synthesize call

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _depth_range(self) -> OptimizerConfig:
        if self.depth_policy == "increment" and self.max_depth < self.depth:
            raise ValueError(f"max_depth {self.max_depth} is below the starting depth {self.depth}")
        return self


# ---------- Run ----------
class RunConfig(BaseModel):
    command: str
    seed: int = config.SEED
    workers: int = Field(config.WORKERS, ge=1)
    output: str = str(config.OUTPUT_DIR)
    format: Literal["json", "csv"] = "json"
    tolerance: float = Field(config.TOLERANCE, gt=0)
    angles_in_pi: bool = False
    options: dict = {}           # command-specific flags, echoed verbatim


# ---------- Linear algebra ----------
class MatrixOut(BaseModel):
    dim: int
    entries: list[list[float]]   # row-major [re, im]


# ---------- Dynamics ----------
class WindowOut(BaseModel):
    t: float
    t_over_pi: float
    residual: float
    gate_tag: str
    global_phase: list[float]
    gate: MatrixOut


class ScanReportOut(BaseModel):
    geometry: dict
    base_period: Optional[float] = None
    grid: int
    t_max: float
    members: list[WindowOut]
    analytic_periods: list[float] = []
    note: str = ""


# ---------- Entanglement ----------
class WeylReportOut(BaseModel):
    gate: str
    weyl: dict[str, float]
    makhlin: dict[str, float]
    perfect_entangler: bool
    max_concurrence: float
    analytic_max_concurrence: float


# ---------- Synthesis ----------
class GateStepOut(BaseModel):
    tag: str
    qubits: list[int]            # one-based
    layer: int                   # entangler layer index; equal values run in parallel


class SynthesisReportOut(BaseModel):
    target: str
    kind: Literal["state", "gate"]
    depth: int
    gate_sequence: list[GateStepOut]
    angles: list[float]
    angles_unit: Literal["rad", "pi"] = "rad"
    objective: float
    seed: int
    restarts: int
    wall_time_ms: float
    converged: bool
    norm: str = "frobenius"
    trace: list[float] = []
    figure_derived: bool = False
    seeded_objective: Optional[float] = None
    caption_reproduces: Optional[bool] = None
    bound: Optional[float] = None
    input_depth: int = 0
    verified: bool = True
    notes: str = ""
