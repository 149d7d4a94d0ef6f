"""Request handlers shared by the HTTP app and the in-process CLI path.

Each handler converts a request model into core calls and packs the result
into a response model. Domain errors propagate; the app layer translates
them to HTTP, the CLI to exit codes.
"""

from __future__ import annotations

import math

import numpy as np

from .. import dynamic, lumped, modal, pullin, static_solver, study
from ..model import BeamParams
from . import schemas as s


def handle_static(req: s.StaticRequest) -> s.StaticResponse:
    params = req.beam.to_params()
    grid = static_solver.build_grid(req.solver.grid_n, params)
    sol = static_solver.solve_static(params, req.voltage_V, grid, req.solver.to_options())
    x = np.arange(grid.n_interior) * grid.spacing_h
    return s.StaticResponse(
        voltage_V=req.voltage_V,
        tip_deflection_m=sol.tip_deflection_m,
        converged=sol.converged,
        iterations=sol.iterations,
        final_relative_change=float(sol.final_relative_change)
        if math.isfinite(sol.final_relative_change)
        else -1.0,
        x_m=[float(v) for v in x],
        deflection_m=[float(v) for v in sol.deflection],
    )


def handle_sweep(req: s.SweepRequest) -> s.SweepResponse:
    params = req.beam.to_params()
    grid = static_solver.build_grid(req.solver.grid_n, params)
    curve = pullin.sweep_voltage(params, req.voltages_V, grid, req.solver.to_options())
    return s.SweepResponse(
        points=[
            s.SweepPoint(
                voltage_V=p.voltage_V,
                tip_deflection_m=p.tip_deflection_m,
                converged=p.converged,
            )
            for p in curve.points
        ]
    )


def handle_pullin(req: s.PullInRequest) -> s.PullInResponse:
    params = req.beam.to_params()
    grid = static_solver.build_grid(req.solver.grid_n, params)
    result = pullin.find_pullin(
        params, v_max_hint=req.v_max_hint, tol=req.tol_V, grid=grid,
        opts=req.solver.to_options(),
    )
    return s.PullInResponse(
        v_lower_V=result.v_lower,
        v_upper_V=result.v_upper,
        bracket_width_V=result.bracket_width,
        tip_at_lower_m=result.tip_at_lower,
        tip_over_gap=pullin.compare_stability(result, params),
    )


def handle_modal(req: s.ModalRequest) -> s.ModalResponse:
    params = req.beam.to_params()
    grid = static_solver.build_grid(req.solver.grid_n, params)
    sol = static_solver.solve_static(
        params, req.bias_voltage_V, grid, req.solver.to_options()
    )
    system = modal.assemble_modal_system(sol, params, grid)
    result = modal.lowest_modes(system, req.n_modes)
    shapes = None
    if req.include_shapes:
        shapes = [[float(v) for v in shape] for shape in result.mode_shapes]
    return s.ModalResponse(
        bias_voltage_V=req.bias_voltage_V,
        frequencies_rad_s=list(result.frequencies),
        frequencies_hz=[f / (2.0 * math.pi) for f in result.frequencies],
        mode_shapes=shapes,
    )


def handle_dynamic(req: s.DynamicRequest) -> s.DynamicResponse:
    params = req.beam.to_params()
    grid = static_solver.build_grid(req.solver.grid_n, params)
    drive = dynamic.Drive(
        dc_Vp=req.dc_Vp,
        ac_amplitude=req.ac_amplitude,
        ac_frequency=req.ac_frequency,
        ac_phase=req.ac_phase,
    )
    trace = dynamic.simulate(
        params, drive, req.duration_s, dt=req.dt_s, grid=grid,
        opts=req.solver.to_options(),
    )
    return s.DynamicResponse(
        step_dt_s=trace.step_dt,
        times_s=[float(t) for t in trace.times],
        tip_m=[float(y) for y in trace.tip_history],
        diverged_at=trace.diverged_at,
    )


def handle_lumped(req: s.LumpedRequest) -> s.LumpedResponse:
    model = lumped.LumpedModel(
        spring_Km=req.spring_Km,
        area_A=req.area_A,
        gap_G=req.gap_G,
        permittivity_eps=req.permittivity_eps,
        gamma=req.gamma,
    )
    equilibrium = None
    if req.voltage_V is not None:
        equilibrium = lumped.equilibrium_1d(model, req.voltage_V)
    return s.LumpedResponse(
        pullin_voltage_V=lumped.pullin_voltage_1d(model),
        pullin_position_m=lumped.pullin_position(model),
        equilibrium_m=equilibrium,
    )


def handle_study(req: s.StudyRequest) -> s.StudyResponse:
    spec = study.StudySpec(
        base=req.beam.to_params(),
        vary=req.vary,
        values=tuple(req.values_m),
        voltage_grid=(
            study.AUTO_GRID if req.voltage_grid_V is None else tuple(req.voltage_grid_V)
        ),
        outputs=frozenset(req.outputs),
        grid_n=req.solver.grid_n,
        rel_tolerance=req.solver.rel_tolerance,
        max_iterations=req.solver.max_iterations,
        pullin_tol_V=req.pullin_tol_V,
    )
    result = study.run_study(spec)
    return s.StudyResponse(study=study._result_to_dict(result))
