"""Transient integrator: stencil algebra, drive handling, stability traits."""

import numpy as np
import pytest

from pullin_lab import (
    Drive,
    advance_step,
    assemble_modal_system,
    backward_second_derivative,
    build_grid,
    default_params,
    default_timestep,
    lowest_modes,
    nondimensionalize,
    recommended_timestep,
    simulate,
    solve_static,
)


def t_star_of(params):
    return nondimensionalize(params, 0.0).t_star


def fit_offset_and_tone(times, signal, omega):
    """Least-squares a + b sin(omega t) + c cos(omega t); returns (a, rms residual)."""
    basis = np.column_stack(
        [np.ones_like(times), np.sin(omega * times), np.cos(omega * times)]
    )
    coef, *_ = np.linalg.lstsq(basis, signal, rcond=None)
    resid = signal - basis @ coef
    return coef[0], float(np.sqrt(np.mean(resid**2)))


def test_second_derivative_recovers_quadratic_exactly():
    # y = t^2 sampled at t = -4..0 with unit step; y'' = 2 and the integer
    # weights make the evaluation exact in floating point.
    assert backward_second_derivative((16.0, 9.0, 4.0, 1.0, 0.0), 1.0) == 2.0


@pytest.mark.parametrize("t_end, k", [(0.0, 1.0), (2.5, 0.5), (-1.0, 0.25), (7.0, 2.0)])
def test_second_derivative_exact_through_quartics(t_end, k):
    coeffs = (5.0, -1.0, 2.0, -3.0, 1.0)  # 5 - t + 2t^2 - 3t^3 + t^4

    def poly(t):
        return sum(c * t**i for i, c in enumerate(coeffs))

    def poly_dd(t):
        return 2 * coeffs[2] + 6 * coeffs[3] * t + 12 * coeffs[4] * t**2

    samples = [poly(t_end - (4 - i) * k) for i in range(5)]
    got = backward_second_derivative(samples, k)
    assert got == pytest.approx(poly_dd(t_end), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize(
    "history, k, message",
    [
        ((1.0, 2.0, 3.0), 1.0, "exactly 5"),
        ((1.0,) * 6, 1.0, "exactly 5"),
        ((1.0,) * 5, 0.0, "must be > 0"),
        ((1.0,) * 5, -0.1, "must be > 0"),
    ],
)
def test_second_derivative_rejects_bad_input(history, k, message):
    with pytest.raises(ValueError, match=message):
        backward_second_derivative(history, k)


def test_drive_voltage_program():
    drive = Drive(dc_Vp=3.0, ac_amplitude=0.5, ac_frequency=2.0, ac_phase=np.pi / 2)
    assert drive.voltage(0.0) == pytest.approx(3.5)
    assert Drive(dc_Vp=4.0).voltage(123.0) == 4.0


@pytest.mark.parametrize("kwargs", [dict(dc_Vp=-1.0), dict(dc_Vp=1.0, ac_amplitude=-0.1)])
def test_drive_rejects_negative_magnitudes(kwargs):
    with pytest.raises(ValueError):
        Drive(**kwargs)


def test_zero_drive_stays_exactly_flat(reference_beam):
    dt = t_star_of(reference_beam) / 100
    trace = simulate(reference_beam, Drive(dc_Vp=0.0), 30 * dt, dt=dt)
    assert trace.diverged_at is None
    assert np.array_equal(trace.tip_history, np.zeros_like(trace.tip_history))
    assert np.array_equal(trace.times, np.arange(31) * dt)


def test_first_five_rows_are_rest_states(reference_beam):
    dt = t_star_of(reference_beam) / 100
    trace = simulate(reference_beam, Drive(dc_Vp=10.0), 20 * dt, dt=dt)
    assert np.array_equal(trace.tip_history[:5], np.zeros(5))
    assert np.any(trace.tip_history[5:] != 0.0)


def test_phase_shifted_by_full_turn_matches(reference_beam):
    ts = t_star_of(reference_beam)
    omega = 2.0 * np.pi / ts
    dt = ts / 100

    def run(phase):
        drive = Drive(dc_Vp=3.0, ac_amplitude=1.0, ac_frequency=omega, ac_phase=phase)
        return simulate(reference_beam, drive, 2 * ts, dt=dt).tip_history

    a = run(0.7)
    b = run(0.7 + 2.0 * np.pi)
    # sin(x + 2 pi) differs from sin(x) only by argument roundoff; the traces
    # agree to ~1e-17 m in practice, far below this bound.
    assert np.max(np.abs(a - b)) < 1e-13


def test_step_response_midline_matches_static_equilibrium(reference_beam, grid201):
    volts = 5.0
    ts = t_star_of(reference_beam)
    dt = ts / 100
    trace = simulate(reference_beam, Drive(dc_Vp=volts), 4 * ts, dt=dt)
    assert trace.diverged_at is None

    sol = solve_static(reference_beam, volts, grid=grid201)
    static_tip = sol.tip_deflection_m
    omega1 = lowest_modes(assemble_modal_system(sol, reference_beam, grid201), 1).frequencies[0]
    midline, _ = fit_offset_and_tone(trace.times[5:], trace.tip_history[5:], omega1)
    # The abrupt switch-on rings several beam modes, so only the midline of
    # the undamped oscillation is pinned down, not the waveform itself.
    assert midline == pytest.approx(static_tip, rel=0.01)
    assert np.max(np.abs(trace.tip_history)) < 0.05 * reference_beam.gap_G


def test_tip_mass_sets_the_transient_frequency(reference_beam, grid201):
    from pullin_lab import derived_properties

    sect = derived_properties(reference_beam)
    loaded = reference_beam.with_(tip_mass_M=sect.line_mass_m * reference_beam.length_L)
    volts = 1.0
    ts = t_star_of(loaded)
    dt = recommended_timestep(loaded)
    trace = simulate(loaded, Drive(dc_Vp=volts), 10 * ts, dt=dt)
    assert trace.diverged_at is None

    sol = solve_static(loaded, volts, grid=grid201)
    omega_loaded = lowest_modes(assemble_modal_system(sol, loaded, grid201), 1).frequencies[0]
    sol_bare = solve_static(reference_beam, volts, grid=grid201)
    omega_bare = lowest_modes(
        assemble_modal_system(sol_bare, reference_beam, grid201), 1
    ).frequencies[0]

    static_tip = sol.tip_deflection_m
    midline, rms_loaded = fit_offset_and_tone(
        trace.times[5:], trace.tip_history[5:], omega_loaded
    )
    _, rms_bare = fit_offset_and_tone(trace.times[5:], trace.tip_history[5:], omega_bare)
    assert midline == pytest.approx(static_tip, rel=0.01)
    # The end mass drops the ring frequency by ~2.3x; fitting at the unloaded
    # frequency must fail badly where the loaded one succeeds.
    assert rms_loaded < 0.2 * rms_bare


def test_contact_truncates_trace_above_pull_in(reference_beam):
    ts = t_star_of(reference_beam)
    dt = ts / 100
    trace = simulate(reference_beam, Drive(dc_Vp=30.0), 4 * ts, dt=dt)
    assert trace.diverged_at is not None
    assert len(trace.times) == trace.diverged_at
    assert len(trace.tip_history) == trace.diverged_at
    assert np.all(np.abs(trace.tip_history) < reference_beam.gap_G)


def test_growing_iteration_count_warns_near_pull_in(reference_beam):
    ts = t_star_of(reference_beam)
    with pytest.warns(RuntimeWarning, match="iteration count is growing"):
        trace = simulate(reference_beam, Drive(dc_Vp=21.2), 6 * ts, dt=ts / 50)
    assert trace.diverged_at is not None


def test_recommended_step_outlives_the_historic_default(reference_beam):
    # The legacy fine step pushes intermediate beam modes into the stencil's
    # weakly amplified band: at 5 V the ringing reaches the gap within half a
    # characteristic time. The recommended step runs the same drive cleanly
    # for four characteristic times.
    ts = t_star_of(reference_beam)
    drive = Drive(dc_Vp=5.0)

    fine = simulate(reference_beam, drive, 0.5 * ts, dt=default_timestep(reference_beam))
    assert fine.diverged_at is not None

    coarse = simulate(reference_beam, drive, 4 * ts, dt=recommended_timestep(reference_beam))
    assert coarse.diverged_at is None
    assert np.max(np.abs(coarse.tip_history)) < 0.5 * reference_beam.gap_G


def test_halving_the_step_tightens_the_endpoint(reference_beam):
    ts = t_star_of(reference_beam)
    tips = []
    for divisor in (25, 50, 100, 200):
        trace = simulate(reference_beam, Drive(dc_Vp=5.0), ts, dt=ts / divisor)
        assert trace.diverged_at is None
        tips.append(trace.tip_history[-1])
    diffs = [abs(b - a) for a, b in zip(tips, tips[1:])]
    assert diffs[0] > diffs[1] > diffs[2]


def test_advance_step_reproduces_simulate(reference_beam, grid201):
    ts = t_star_of(reference_beam)
    dt = ts / 100
    drive = Drive(dc_Vp=10.0)
    trace = simulate(reference_beam, drive, 9 * dt, dt=dt, snapshot_stride=1)
    by_step = dict(trace.full_field_snapshots)

    rows = [np.zeros(grid201.n_interior) for _ in range(4)]
    for j in range(5, 10):
        result = advance_step(rows, drive, j * dt, dt, reference_beam, grid=grid201)
        assert not result.contact
        assert result.field[0] == 0.0
        np.testing.assert_allclose(result.field, by_step[j], rtol=0.0, atol=1e-18)
        assert result.field[-1] == trace.tip_history[j]
        rows = rows[1:] + [result.field]


def test_snapshot_stride_decimates(reference_beam, grid201):
    dt = t_star_of(reference_beam) / 100
    trace = simulate(reference_beam, Drive(dc_Vp=10.0), 12 * dt, dt=dt, snapshot_stride=3)
    steps = [step for step, _ in trace.full_field_snapshots]
    assert steps == [0, 3, 6, 9, 12]
    for _, field in trace.full_field_snapshots:
        assert len(field) == grid201.n_interior
        assert field[0] == 0.0


def test_timestep_helpers_are_consistent(reference_beam):
    ts = t_star_of(reference_beam)
    assert default_timestep(reference_beam) == pytest.approx(ts / 2000)
    rec = recommended_timestep(reference_beam)
    # About 0.04 rad of fundamental phase per step, i.e. near t_star/88.
    assert ts / 150 < rec < ts / 50


def test_simulate_rejects_bad_arguments(reference_beam):
    dt = t_star_of(reference_beam) / 100
    with pytest.raises(ValueError, match="at least 5 steps"):
        simulate(reference_beam, Drive(dc_Vp=1.0), 3 * dt, dt=dt)
    with pytest.raises(ValueError, match="dt must be > 0"):
        simulate(reference_beam, Drive(dc_Vp=1.0), 10 * dt, dt=0.0)
    with pytest.raises(ValueError, match="snapshot_stride"):
        simulate(reference_beam, Drive(dc_Vp=1.0), 10 * dt, dt=dt, snapshot_stride=0)


def test_advance_step_rejects_bad_history(reference_beam, grid201):
    dt = t_star_of(reference_beam) / 100
    good = [np.zeros(grid201.n_interior) for _ in range(4)]
    with pytest.raises(ValueError, match="exactly 4"):
        advance_step(good[:3], Drive(dc_Vp=1.0), 5 * dt, dt, reference_beam, grid=grid201)
    bad = good[:3] + [np.zeros(grid201.n_interior - 1)]
    with pytest.raises(ValueError, match="do not match the grid"):
        advance_step(bad, Drive(dc_Vp=1.0), 5 * dt, dt, reference_beam, grid=grid201)
