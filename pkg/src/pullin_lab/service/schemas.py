"""Request and response models for the HTTP service and CLI.

The defaults of BeamIn are the reference cantilever, so an empty request body
solves the documented default device.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..model import VACUUM_PERMITTIVITY, BeamParams
from ..static_solver import SolverOptions


class BeamIn(BaseModel):
    """Beam definition in SI units."""

    model_config = ConfigDict(extra="forbid")

    length_L: float = Field(default=300e-6, gt=0, description="beam length, m")
    width_b: float = Field(default=50e-6, gt=0, description="beam width, m")
    thickness_h: float = Field(default=3e-6, gt=0, description="beam thickness, m")
    gap_G: float = Field(default=3e-6, gt=0, description="electrode gap, m")
    youngs_E: float = Field(default=160e9, gt=0, description="Young's modulus, Pa")
    density_rho: float = Field(default=2330.0, gt=0, description="density, kg/m^3")
    permittivity_eps: float = Field(default=VACUUM_PERMITTIVITY, gt=0)
    tip_mass_M: float = Field(default=0.0, ge=0, description="tip proof mass, kg")

    def to_params(self) -> BeamParams:
        return BeamParams(**self.model_dump())


class SolverIn(BaseModel):
    """Iteration and grid controls."""

    model_config = ConfigDict(extra="forbid")

    grid_n: int = Field(default=201, ge=7)
    rel_tolerance: float = Field(default=1e-3, gt=0)
    max_iterations: int = Field(default=500, ge=1)
    relaxation: float = Field(default=1.0, gt=0, le=1)

    def to_options(self) -> SolverOptions:
        return SolverOptions(
            rel_tolerance=self.rel_tolerance,
            max_iterations=self.max_iterations,
            relaxation=self.relaxation,
        )


class StaticRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beam: BeamIn = BeamIn()
    voltage_V: float = Field(default=0.0, ge=0)
    solver: SolverIn = SolverIn()


class StaticResponse(BaseModel):
    voltage_V: float
    tip_deflection_m: float
    converged: bool
    iterations: int
    final_relative_change: float
    x_m: list[float]
    deflection_m: list[float]


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beam: BeamIn = BeamIn()
    voltages_V: list[float] = Field(min_length=1)
    solver: SolverIn = SolverIn()


class SweepPoint(BaseModel):
    voltage_V: float
    tip_deflection_m: float
    converged: bool


class SweepResponse(BaseModel):
    points: list[SweepPoint]


class PullInRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beam: BeamIn = BeamIn()
    tol_V: float = Field(default=0.01, gt=0)
    v_max_hint: Optional[float] = Field(default=None, gt=0)
    solver: SolverIn = SolverIn()


class PullInResponse(BaseModel):
    v_lower_V: float
    v_upper_V: float
    bracket_width_V: float
    tip_at_lower_m: float
    tip_over_gap: float


class ModalRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beam: BeamIn = BeamIn()
    bias_voltage_V: float = Field(default=0.0, ge=0)
    n_modes: int = Field(default=3, ge=1, le=5)
    include_shapes: bool = False
    solver: SolverIn = SolverIn()


class ModalResponse(BaseModel):
    bias_voltage_V: float
    frequencies_rad_s: list[float]
    frequencies_hz: list[float]
    mode_shapes: Optional[list[list[float]]] = None


class DynamicRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beam: BeamIn = BeamIn()
    dc_Vp: float = Field(default=0.0, ge=0)
    ac_amplitude: float = Field(default=0.0, ge=0)
    ac_frequency: float = 0.0
    ac_phase: float = 0.0
    duration_s: float = Field(gt=0)
    dt_s: Optional[float] = Field(default=None, gt=0)
    solver: SolverIn = SolverIn()


class DynamicResponse(BaseModel):
    step_dt_s: float
    times_s: list[float]
    tip_m: list[float]
    diverged_at: Optional[int]


class LumpedRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    spring_Km: float = Field(gt=0, description="spring constant, N/m")
    area_A: float = Field(gt=0, description="plate area, m^2")
    gap_G: float = Field(gt=0, description="rest gap, m")
    permittivity_eps: float = Field(default=VACUUM_PERMITTIVITY, gt=0)
    gamma: float = Field(default=1.0, gt=0)
    voltage_V: Optional[float] = Field(default=None, ge=0)


class LumpedResponse(BaseModel):
    pullin_voltage_V: float
    pullin_position_m: float
    equilibrium_m: Optional[float] = None


class StudyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beam: BeamIn = BeamIn()
    vary: Literal["length", "thickness", "gap", "width"]
    values_m: list[float] = Field(min_length=1)
    voltage_grid_V: Optional[list[float]] = None
    outputs: list[Literal["curves", "pullin", "profile"]] = ["curves", "pullin"]
    pullin_tol_V: float = Field(default=0.01, gt=0)
    solver: SolverIn = SolverIn()


class StudyResponse(BaseModel):
    """Full study snapshot, identical to the JSON export payload."""

    study: dict


class ErrorBody(BaseModel):
    code: str
    message: str
