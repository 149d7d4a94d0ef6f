"""One-degree-of-freedom spring-against-capacitor pull-in model.

Everything here has a closed form, so the oracles are exact:
    y_PI = G/3
    V_PI = sqrt((8/27) G^3 K_m / (eps A))
and at (y_PI, V_PI) the mechanical and electric force AND stiffness balance
simultaneously, which is precisely the fold condition.
"""

import math

import pytest
from hypothesis import given, strategies as st

from pullin_lab import (
    GapClosedError,
    LumpedModel,
    PastPullInError,
    VACUUM_PERMITTIVITY,
    electric_force_and_stiffness,
    equilibrium_1d,
    pullin_position,
    pullin_voltage_1d,
)


@pytest.fixture
def unit_model() -> LumpedModel:
    """1 N/m spring, 1e-8 m^2 plate, 2 um gap: the module's worked example."""
    return LumpedModel(spring_Km=1.0, area_A=1e-8, gap_G=2e-6)


def test_pullin_position_is_exactly_one_third(unit_model):
    assert pullin_position(unit_model) == unit_model.gap_G / 3.0


def test_pullin_voltage_worked_example(unit_model):
    expected = math.sqrt(
        (8.0 / 27.0) * (2e-6) ** 3 * 1.0 / (VACUUM_PERMITTIVITY * 1e-8)
    )
    got = pullin_voltage_1d(unit_model)
    assert got == pytest.approx(expected, rel=1e-12)
    assert round(got, 3) == 5.174


def test_force_example_value(unit_model):
    fs = electric_force_and_stiffness(unit_model, 5.0, 0.5e-6)
    assert fs.force_N == pytest.approx(4.918993e-7, rel=1e-6)


@given(
    y_frac=st.floats(min_value=0.0, max_value=0.9),
    v=st.floats(min_value=0.0, max_value=30.0),
)
def test_stiffness_is_twice_force_over_remaining_gap(y_frac, v):
    model = LumpedModel(spring_Km=2.5, area_A=4e-9, gap_G=1.5e-6)
    y = y_frac * model.gap_G
    fs = electric_force_and_stiffness(model, v, y)
    assert fs.stiffness_N_per_m * (model.gap_G - y) == pytest.approx(
        2.0 * fs.force_N, rel=1e-12, abs=1e-30
    )


def test_equilibrium_balances_forces(unit_model):
    v = 3.0
    y = equilibrium_1d(unit_model, v)
    fs = electric_force_and_stiffness(unit_model, v, y)
    assert unit_model.spring_Km * y == pytest.approx(fs.force_N, rel=1e-9)


def test_equilibrium_zero_at_zero_volts(unit_model):
    assert equilibrium_1d(unit_model, 0.0) == 0.0


def test_equilibrium_increases_with_voltage(unit_model):
    v_pi = pullin_voltage_1d(unit_model)
    voltages = [f * v_pi for f in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99)]
    displacements = [equilibrium_1d(unit_model, v) for v in voltages]
    assert all(a < b for a, b in zip(displacements, displacements[1:]))


def test_fold_point_balances_force_and_stiffness(unit_model):
    # At the fold both equations hold at once: K_m y = F_e and K_m = K_e.
    v_pi = pullin_voltage_1d(unit_model)
    y_pi = pullin_position(unit_model)
    fs = electric_force_and_stiffness(unit_model, v_pi, y_pi)
    assert unit_model.spring_Km * y_pi == pytest.approx(fs.force_N, rel=1e-9)
    assert unit_model.spring_Km == pytest.approx(fs.stiffness_N_per_m, rel=1e-9)


def test_equilibrium_approaches_third_of_gap_at_pullin(unit_model):
    v_pi = pullin_voltage_1d(unit_model)
    y = equilibrium_1d(unit_model, v_pi)
    assert y == pytest.approx(unit_model.gap_G / 3.0, rel=1e-6)


def test_past_pullin_is_an_error(unit_model):
    with pytest.raises(PastPullInError):
        equilibrium_1d(unit_model, 1.0001 * pullin_voltage_1d(unit_model))


def test_negative_voltage_rejected(unit_model):
    with pytest.raises(ValueError):
        equilibrium_1d(unit_model, -1.0)


def test_gap_closure_rejected(unit_model):
    with pytest.raises(GapClosedError):
        electric_force_and_stiffness(unit_model, 1.0, unit_model.gap_G)


def test_nonlinear_elasticity_unsupported():
    model = LumpedModel(spring_Km=1.0, area_A=1e-8, gap_G=2e-6, gamma=1.3)
    with pytest.raises(NotImplementedError):
        pullin_position(model)


@pytest.mark.parametrize("field", ["spring_Km", "area_A", "gap_G", "permittivity_eps", "gamma"])
def test_model_validation(field):
    kwargs = dict(spring_Km=1.0, area_A=1e-8, gap_G=2e-6)
    kwargs[field] = 0.0
    with pytest.raises(ValueError, match=field):
        LumpedModel(**kwargs)
