from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Scheme(str, Enum):
    EULER = "euler"  # first-order U = 1 - i H dt
    RK4 = "rk4"


class Command(str, Enum):
    GROUND_STATE = "ground-state"
    EVOLVE_VAR = "evolve-var"
    EVOLVE_GRID = "evolve-grid"
    COMPARE = "compare"
    HAMILTONIAN_SCAN = "hamiltonian-scan"


class GridSettings(BaseModel):
    """Time stepping and monitoring of the lattice engine."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: float = Field(default=2e-3, gt=0.0)
    scheme: Scheme = Scheme.RK4
    norm_monitor_interval: int = Field(default=100, ge=1)
    norm_drift_bound: float = Field(default=1e-3, gt=0.0)
    # lattice radiation from collisions reaches the wall at ~1e-6; soliton tails
    # only cross 1e-4 within ~35 length units of it
    boundary_tolerance: float = Field(default=1e-4, gt=0.0)
    # 0.0 switches the |psi|^2 term off (free dispersion)
    interaction: float = 1.0


class GridDomain(BaseModel):
    """Uniform lattice x_j = x_min + j dx covering [x_min, x_max]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    x_min: float = -100.0
    x_max: float = 100.0
    dx: float = Field(default=0.1, gt=0.0)

    @model_validator(mode="after")
    def _check_extent(self) -> "GridDomain":
        if not self.x_max > self.x_min:
            raise ValueError("x_max must be larger than x_min")
        if self.n_points < 3:
            raise ValueError("the lattice needs at least 3 points")
        return self

    @property
    def n_points(self) -> int:
        return int(round((self.x_max - self.x_min) / self.dx)) + 1


class SolitonSpec(BaseModel):
    """Initial position, momentum and phase of one soliton."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    x0: float = 0.0
    p: float = 0.0
    phase: float = 0.0
    gaussians: int = Field(default=1, ge=1)


class Scenario(BaseModel):
    """
    Everything both engines need to run one experiment.

    Reason:
    - The variational and lattice runs must start from the same solitons on the same schedule.

    Benefit:
    - One frozen model is shared by both engines and the comparison.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    solitons: List[SolitonSpec] = Field(min_length=1)
    domain: GridDomain = Field(default_factory=GridDomain)
    grid: GridSettings = Field(default_factory=GridSettings)
    tolerance: float = Field(default=1e-10, gt=0.0)
    schedule: List[float] = Field(default_factory=lambda: [0.0], min_length=1)
    overlap_tolerance: float = Field(default=5e-2, gt=0.0)

    @field_validator("schedule")
    @classmethod
    def _check_schedule(cls, value: List[float]) -> List[float]:
        if any(not math.isfinite(t) or t < 0.0 for t in value):
            raise ValueError("schedule times must be finite and non-negative")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("schedule must be strictly increasing")
        return value

    @property
    def t_end(self) -> float:
        return self.schedule[-1]

    @property
    def total_gaussians(self) -> int:
        return sum(s.gaussians for s in self.solitons)


class ComparisonMetrics(BaseModel):
    """Density mismatch between the two engines at one scheduled time."""

    time: float
    l2_density_mismatch: float = Field(ge=0.0)
    sup_mismatch: float = Field(ge=0.0)
    norm_variational: float
    energy_variational: float
    norm_grid: float
    energy_grid: float

    @model_validator(mode="after")
    def _check_finite(self) -> "ComparisonMetrics":
        for name, value in self.model_dump().items():
            if not math.isfinite(value):
                raise ValueError(f"{name} is not finite")
        return self


class ObservableRecord(BaseModel):
    """Time-stamped observables of one engine (and mismatch when comparing)."""

    time: float
    norm: float
    energy: float
    positions: List[float] = Field(default_factory=list)
    momenta: List[float] = Field(default_factory=list)
    regularized_count: int = Field(default=0, ge=0)


class RunConfig(BaseModel):
    """
    One CLI invocation after parsing and validation.

    Reason:
    - Command options live next to the scenario in one file.

    Benefit:
    - Runners receive typed values only; nothing re-parses strings downstream.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    config_path: Optional[Path] = None
    out_dir: Path = Path("out")
    overrides: Dict[str, str] = Field(default_factory=dict)

    n_gaussians: int = Field(default=1, ge=1)
    snapshot_stride: int = Field(default=1, ge=1)

    q_min: float = Field(default=1.0, gt=0.0)
    q_max: float = Field(default=15.0, gt=0.0)
    q_points: int = Field(default=281, ge=2)
    p_scan: float = 0.0

    @model_validator(mode="after")
    def _check_scan(self) -> "RunConfig":
        if not self.q_max > self.q_min:
            raise ValueError("q_max must be larger than q_min")
        return self
