"""One-dimensional spring against a parallel-plate capacitor.

The classic reduced model of electrostatic pull-in: a linear spring K_m holds
a rigid plate of area A at gap G; the electrostatic attraction stiffens as
the gap closes and the stable equilibrium disappears at one third of the gap.
Everything here is closed form or a single scalar root find.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.optimize import brentq

from .errors import GapClosedError, PastPullInError
from .model import VACUUM_PERMITTIVITY


@dataclass(frozen=True)
class LumpedModel:
    """Spring-capacitor system.

    Attributes:
        spring_Km: mechanical spring constant, N/m.
        area_A: plate area, m^2.
        gap_G: rest gap, m.
        permittivity_eps: gap medium permittivity, F/m.
        gamma: elasticity nonlinearity factor. Only the linear case
            (gamma = 1) has supported semantics; the field exists so model
            files can carry the value through.
    """

    spring_Km: float
    area_A: float
    gap_G: float
    permittivity_eps: float = VACUUM_PERMITTIVITY
    gamma: float = 1.0

    def __post_init__(self) -> None:
        for name in ("spring_Km", "area_A", "gap_G", "permittivity_eps", "gamma"):
            value = getattr(self, name)
            if not (value > 0.0) or not math.isfinite(value):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")


class ForceStiffness(NamedTuple):
    """Electrostatic force and its displacement derivative."""

    force_N: float
    stiffness_N_per_m: float


def electric_force_and_stiffness(model: LumpedModel, V: float, y: float) -> ForceStiffness:
    """Plate attraction and electric spring constant at displacement y.

    F_e = eps*A*V^2 / (2 (G - y)^2) and K_e = dF_e/dy = eps*A*V^2/(G - y)^3,
    so K_e (G - y) = 2 F_e identically.

    Raises:
        GapClosedError: if y >= G.
    """
    remaining = model.gap_G - y
    if remaining <= 0.0:
        raise GapClosedError(f"displacement {y!r} m closes the gap {model.gap_G!r} m")
    if y < 0.0:
        raise ValueError(f"displacement must be >= 0, got {y!r}")
    force = model.permittivity_eps * model.area_A * V * V / (2.0 * remaining**2)
    stiffness = model.permittivity_eps * model.area_A * V * V / remaining**3
    return ForceStiffness(force_N=force, stiffness_N_per_m=stiffness)


def pullin_position(model: LumpedModel) -> float:
    """Displacement at which the stable equilibrium vanishes: G/3 exactly.

    Independent of spring, area and permittivity; one third of the gap is the
    characteristic travel of the linear-spring model.

    Raises:
        NotImplementedError: for gamma != 1 (nonlinear elasticity has no
            supported closed form here).
    """
    if model.gamma != 1.0:
        raise NotImplementedError("pull-in position is only defined for gamma = 1")
    return model.gap_G / 3.0


def pullin_voltage_1d(model: LumpedModel) -> float:
    """Closed-form pull-in voltage sqrt((8/27) G^3 K_m / (eps A)), volts."""
    return math.sqrt(
        (8.0 / 27.0)
        * model.gap_G**3
        * model.spring_Km
        / (model.permittivity_eps * model.area_A)
    )


def equilibrium_1d(model: LumpedModel, V: float) -> float:
    """Stable plate displacement at voltage V, m.

    Solves the force balance K_m y (G - y)^2 = eps*A*V^2/2 on the stable
    branch y in [0, G/3]. The left side increases monotonically up to G/3, so
    a bracketed root find is unconditionally safe.

    Raises:
        PastPullInError: if V exceeds the pull-in voltage (no stable root).
    """
    if V < 0:
        raise ValueError(f"voltage must be >= 0, got {V!r}")
    if V == 0.0:
        return 0.0
    v_pi = pullin_voltage_1d(model)
    if V > v_pi:
        raise PastPullInError(f"{V!r} V exceeds the pull-in voltage {v_pi:.6g} V")

    drive = 0.5 * model.permittivity_eps * model.area_A * V * V

    def balance(y: float) -> float:
        return model.spring_Km * y * (model.gap_G - y) ** 2 - drive

    upper = model.gap_G / 3.0
    if balance(upper) <= 0.0:
        # V is within roundoff of pull-in; the root is the branch endpoint.
        return upper
    return float(brentq(balance, 0.0, upper, xtol=1e-12 * model.gap_G))
