"""Vibration modes about biased equilibria.

Oracle: the unbiased clamped-free beam has omega_i = (beta_i L)^2
sqrt(EI / (m L^4)) with beta_1 L = 1.875104 and beta_2 L = 4.694091
(roots of 1 + cos(bL) cosh(bL) = 0). Bias introduces a negative diagonal
stiffness, so every frequency must drop as voltage rises.
"""

import numpy as np
import pytest

from pullin_lab import (
    NotConvergedError,
    PastPullInError,
    StaticSolution,
    assemble_modal_system,
    build_grid,
    derived_properties,
    lowest_modes,
    solve_static,
)

_BETA_L = (1.875104, 4.694091, 7.854757)


def analytic_frequency(params, mode: int) -> float:
    sect = derived_properties(params)
    return _BETA_L[mode] ** 2 * np.sqrt(
        sect.bending_EI / (sect.line_mass_m * params.length_L**4)
    )


def modes_at(params, voltage, grid, n_modes=1, opts=None):
    sol = solve_static(params, voltage, grid=grid, opts=opts)
    return lowest_modes(assemble_modal_system(sol, params, grid), n_modes)


def test_unbiased_fundamental_matches_beam_theory(reference_beam, grid201):
    result = modes_at(reference_beam, 0.0, grid201)
    expected = analytic_frequency(reference_beam, 0)
    assert result.frequencies[0] == pytest.approx(expected, rel=0.01), (
        f"omega_1 {result.frequencies[0]:.1f} vs analytic {expected:.1f} rad/s"
    )


def test_unbiased_overtones_match_beam_theory(reference_beam, grid201):
    result = modes_at(reference_beam, 0.0, grid201, n_modes=3)
    for i in range(3):
        expected = analytic_frequency(reference_beam, i)
        assert result.frequencies[i] == pytest.approx(expected, rel=0.01), (
            f"mode {i + 1}: {result.frequencies[i]:.1f} vs {expected:.1f} rad/s"
        )


def test_frequencies_sorted_ascending(reference_beam, grid201):
    result = modes_at(reference_beam, 5.0, grid201, n_modes=4)
    freqs = result.frequencies
    assert all(a < b for a, b in zip(freqs, freqs[1:]))


def test_bias_softens_the_fundamental(reference_beam, grid201, tight_opts):
    freqs = [
        modes_at(reference_beam, v, grid201, opts=tight_opts).frequencies[0]
        for v in (0.0, 5.0, 10.0, 15.0)
    ]
    assert all(a > b for a, b in zip(freqs, freqs[1:])), (
        f"fundamental must drop with bias, got {[f'{f:.0f}' for f in freqs]}"
    )


def test_softening_is_strong_near_the_fold(reference_beam, grid201, tight_opts):
    low = modes_at(reference_beam, 0.0, grid201, opts=tight_opts).frequencies[0]
    near = modes_at(reference_beam, 21.0, grid201, opts=tight_opts).frequencies[0]
    assert near < 0.6 * low


def test_eigen_residual_at_the_representable_floor(reference_beam, grid201):
    # A float64 eigenvector carries rounding-level components along the
    # stiffest grid modes, so its relative residual bottoms out near
    # eps * lambda_max / lambda. Demand 1e-8 wherever that floor allows it,
    # and the floor itself elsewhere (the fundamental on a fine grid).
    sol = solve_static(reference_beam, 10.0, grid=grid201)
    system = assemble_modal_system(sol, reference_beam, grid201)
    result = lowest_modes(system, 3)
    lam_max = np.max(np.sum(np.abs(system.stiffness), axis=1)) / np.min(
        np.diagonal(system.mass)
    )
    for freq, shape in zip(result.frequencies, result.mode_shapes):
        v = shape[1:]  # strip the clamp node to match the operator size
        kv = system.stiffness @ v
        residual = np.linalg.norm(kv - freq**2 * (system.mass @ v)) / np.linalg.norm(kv)
        floor = np.finfo(float).eps * lam_max / freq**2
        assert residual <= max(1e-8, floor), (
            f"mode at {freq:.1f} rad/s has residual {residual:.2e}, floor {floor:.2e}"
        )


def test_mode_shapes_clamped_discretely(reference_beam, grid201):
    result = modes_at(reference_beam, 0.0, grid201, n_modes=2)
    h = grid201.spacing_h
    for shape in result.mode_shapes:
        assert shape[0] == 0.0
        # one-sided second-order slope at the clamp
        slope = (-3.0 * shape[0] + 4.0 * shape[1] - shape[2]) / (2.0 * h)
        peak_slope = np.max(np.abs(np.gradient(shape, h)))
        assert abs(slope) < 5e-3 * peak_slope


def test_mode_shapes_peak_normalized(reference_beam, grid201):
    result = modes_at(reference_beam, 0.0, grid201, n_modes=3)
    for shape in result.mode_shapes:
        assert np.max(np.abs(shape)) == pytest.approx(1.0)
        assert shape[np.argmax(np.abs(shape))] == pytest.approx(1.0), (
            "normalization should make the extremum positive"
        )


def test_fundamental_shape_is_monotone(reference_beam, grid201):
    shape = modes_at(reference_beam, 0.0, grid201).mode_shapes[0]
    assert np.all(np.diff(shape) > 0), "first mode of a cantilever has no interior node"


def test_tip_mass_lowers_the_fundamental(reference_beam, grid201, tight_opts):
    sect = derived_properties(reference_beam)
    beam_mass = sect.line_mass_m * reference_beam.length_L
    bare = modes_at(reference_beam, 0.0, grid201).frequencies[0]
    loaded_params = reference_beam.with_(tip_mass_M=beam_mass)
    loaded = modes_at(loaded_params, 0.0, build_grid(201, loaded_params)).frequencies[0]
    assert loaded < 0.6 * bare
    # Rayleigh estimate with effective mass 0.2427 m L + M at tip stiffness 3EI/L^3
    k_tip = 3.0 * sect.bending_EI / reference_beam.length_L**3
    estimate = np.sqrt(k_tip / (0.2427 * beam_mass + beam_mass))
    assert loaded == pytest.approx(estimate, rel=0.02)


def test_rejects_non_converged_input(reference_beam, grid201):
    runaway = solve_static(reference_beam, 30.0, grid=grid201)
    assert not runaway.converged
    with pytest.raises(NotConvergedError):
        assemble_modal_system(runaway, reference_beam, grid201)


def test_unstable_linearization_is_past_pullin(reference_beam, grid201):
    # A converged shape re-labeled with a far higher voltage produces a
    # stiffness with a negative branch: that must surface as an error.
    sol = solve_static(reference_beam, 21.0, grid=grid201)
    forged = StaticSolution(
        deflection=sol.deflection,
        voltage_V=40.0,
        iterations=sol.iterations,
        converged=True,
        final_relative_change=sol.final_relative_change,
    )
    system = assemble_modal_system(forged, reference_beam, grid201)
    with pytest.raises(PastPullInError):
        lowest_modes(system, 1)


def test_mode_count_validation(reference_beam, grid201):
    sol = solve_static(reference_beam, 0.0, grid=grid201)
    system = assemble_modal_system(sol, reference_beam, grid201)
    with pytest.raises(ValueError):
        lowest_modes(system, 0)
    with pytest.raises(ValueError):
        lowest_modes(system, 6)
