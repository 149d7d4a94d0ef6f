"""Electrostatic micro-cantilever toolkit.

Static deflection, pull-in voltage, vibration modes and transient response of
a clamped-free beam over a ground electrode, on a shared finite-difference
grid, plus the classic one-dimensional spring-capacitor reduction and a
parametric study engine with CSV/SVG/JSON outputs.
"""

from ._version import __version__
from .errors import (
    GapClosedError,
    NoPullInError,
    NotConvergedError,
    PastPullInError,
    PullinLabError,
    SchemaVersionError,
)
from .model import (
    BeamParams,
    DimensionlessGroup,
    SectionProps,
    VACUUM_PERMITTIVITY,
    default_params,
    derived_properties,
    electrostatic_load,
    linearized_stiffness_density,
    nondimensionalize,
)
from .static_solver import (
    Grid,
    SolverOptions,
    StaticSolution,
    apply_bending_operator,
    build_grid,
    eliminate_ghosts,
    residual_norm,
    solve_static,
    with_ghosts,
)
from .pullin import (
    CurvePoint,
    DeflectionCurve,
    PullInResult,
    compare_stability,
    find_pullin,
    sdof_stability_limit,
    sweep_voltage,
)
from .modal import ModalResult, ModalSystem, assemble_modal_system, lowest_modes
from .dynamic import (
    Drive,
    DynamicTrace,
    advance_step,
    backward_second_derivative,
    default_timestep,
    recommended_timestep,
    simulate,
)
from .lumped import (
    LumpedModel,
    electric_force_and_stiffness,
    equilibrium_1d,
    pullin_position,
    pullin_voltage_1d,
)
from .study import StudyResult, StudySpec, ValueRecord, export, load, run_study

__all__ = [
    "__version__",
    "PullinLabError",
    "GapClosedError",
    "NoPullInError",
    "PastPullInError",
    "NotConvergedError",
    "SchemaVersionError",
    "BeamParams",
    "SectionProps",
    "DimensionlessGroup",
    "VACUUM_PERMITTIVITY",
    "default_params",
    "derived_properties",
    "electrostatic_load",
    "linearized_stiffness_density",
    "nondimensionalize",
    "Grid",
    "SolverOptions",
    "StaticSolution",
    "build_grid",
    "eliminate_ghosts",
    "with_ghosts",
    "apply_bending_operator",
    "solve_static",
    "residual_norm",
    "CurvePoint",
    "DeflectionCurve",
    "PullInResult",
    "sweep_voltage",
    "find_pullin",
    "sdof_stability_limit",
    "compare_stability",
    "ModalSystem",
    "ModalResult",
    "assemble_modal_system",
    "lowest_modes",
    "Drive",
    "DynamicTrace",
    "backward_second_derivative",
    "advance_step",
    "simulate",
    "default_timestep",
    "recommended_timestep",
    "LumpedModel",
    "electric_force_and_stiffness",
    "pullin_position",
    "pullin_voltage_1d",
    "equilibrium_1d",
    "StudySpec",
    "StudyResult",
    "ValueRecord",
    "run_study",
    "export",
    "load",
]
