"""Physical parameters and pointwise physics kernels.

Everything here is a pure function of its arguments. Public values are SI;
the dimensionless recasting used internally by the solvers is exposed through
:func:`nondimensionalize`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

from .errors import GapClosedError

#: Permittivity of free space, F/m.
VACUUM_PERMITTIVITY = 8.8541878e-12


@dataclass(frozen=True)
class BeamParams:
    """Geometry and material of a clamped-free rectangular micro-cantilever.

    Attributes:
        length_L: beam length, m.
        width_b: beam width (electrode width), m.
        thickness_h: beam thickness, m.
        gap_G: initial electrode gap under the undeflected beam, m.
        youngs_E: Young's modulus, Pa.
        density_rho: material density, kg/m^3.
        permittivity_eps: dielectric permittivity of the gap medium, F/m.
        tip_mass_M: lumped proof mass carried at the free end, kg.
    """

    length_L: float
    width_b: float
    thickness_h: float
    gap_G: float
    youngs_E: float
    density_rho: float
    permittivity_eps: float = VACUUM_PERMITTIVITY
    tip_mass_M: float = 0.0

    def __post_init__(self) -> None:
        positive = {
            "length_L": self.length_L,
            "width_b": self.width_b,
            "thickness_h": self.thickness_h,
            "gap_G": self.gap_G,
            "youngs_E": self.youngs_E,
            "density_rho": self.density_rho,
            "permittivity_eps": self.permittivity_eps,
        }
        for name, value in positive.items():
            if not (value > 0.0) or not math.isfinite(value):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.tip_mass_M < 0.0 or not math.isfinite(self.tip_mass_M):
            raise ValueError(f"tip_mass_M must be >= 0, got {self.tip_mass_M!r}")
        if self.thickness_h >= self.length_L:
            # Slender-beam model; a stubby section is allowed but suspicious.
            warnings.warn(
                "thickness_h >= length_L: outside the slender-beam regime",
                RuntimeWarning,
                stacklevel=2,
            )

    def with_(self, **changes: float) -> "BeamParams":
        """Return a copy with the given fields replaced."""
        return replace(self, **changes)


@dataclass(frozen=True)
class SectionProps:
    """Derived cross-section quantities.

    Attributes:
        inertia_I: area moment of the rectangular section, m^4.
        line_mass_m: mass per unit length, kg/m.
        bending_EI: flexural rigidity, N m^2.
    """

    inertia_I: float
    line_mass_m: float
    bending_EI: float


@dataclass(frozen=True)
class DimensionlessGroup:
    """Scale-free groups governing the deflection problem.

    Attributes:
        lam: electrostatic load number, eps*b*L^4*V^2 / (2*EI*G^3).
        mu: tip mass ratio M/(m*L).
        t_star: characteristic time L^2*sqrt(m/EI), s.
    """

    lam: float
    mu: float
    t_star: float


def default_params() -> BeamParams:
    """Reference silicon cantilever used throughout the docs and CLI defaults.

    300 um x 50 um x 3 um beam over a 3 um gap, E = 160 GPa, rho = 2330 kg/m^3,
    vacuum permittivity, no tip mass.
    """
    return BeamParams(
        length_L=300e-6,
        width_b=50e-6,
        thickness_h=3e-6,
        gap_G=3e-6,
        youngs_E=160e9,
        density_rho=2330.0,
    )


def derived_properties(params: BeamParams) -> SectionProps:
    """Section inertia, line mass and flexural rigidity for a rectangular beam."""
    inertia = params.width_b * params.thickness_h**3 / 12.0
    line_mass = params.density_rho * params.width_b * params.thickness_h
    return SectionProps(
        inertia_I=inertia,
        line_mass_m=line_mass,
        bending_EI=params.youngs_E * inertia,
    )


def electrostatic_load(y: float, V: float, params: BeamParams) -> float:
    """Electrostatic force per unit length on a beam element, N/m.

    The parallel-plate attraction under a deflected element is
    eps*b*V^2 / (2*(G - y)^2). It grows without bound as the local gap closes.

    Args:
        y: local deflection toward the electrode, m. Must satisfy 0 <= y < G.
        V: applied voltage, V. Enters squared, so the sign is irrelevant.
        params: beam definition.

    Raises:
        GapClosedError: if y >= G (contact).
    """
    remaining = params.gap_G - y
    if remaining <= 0.0:
        raise GapClosedError(f"deflection {y!r} m reaches the gap {params.gap_G!r} m")
    if y < 0.0:
        raise ValueError(f"deflection must be >= 0, got {y!r}")
    return params.permittivity_eps * params.width_b * V * V / (2.0 * remaining * remaining)


def linearized_stiffness_density(y_s: float, V_p: float, params: BeamParams) -> float:
    """First-order electrostatic stiffness about a biased equilibrium, N/m^2.

    Expanding the load about y_s gives a term eps*b*V_p^2/(G - y_s)^3 times the
    perturbation; it acts as a negative (softening) stiffness per unit length.

    Raises:
        GapClosedError: if y_s >= G.
    """
    remaining = params.gap_G - y_s
    if remaining <= 0.0:
        raise GapClosedError(f"equilibrium {y_s!r} m reaches the gap {params.gap_G!r} m")
    if y_s < 0.0:
        raise ValueError(f"equilibrium deflection must be >= 0, got {y_s!r}")
    return params.permittivity_eps * params.width_b * V_p * V_p / remaining**3


def nondimensionalize(params: BeamParams, V: float) -> DimensionlessGroup:
    """Collapse a beam and voltage into the governing dimensionless groups.

    With w = y/G and xi = x/L the static problem reads w'''' = lam/(1 - w)^2,
    so lam alone fixes the solution. Width cancels out of lam because the
    section inertia is proportional to b.
    """
    sect = derived_properties(params)
    lam = (
        params.permittivity_eps
        * params.width_b
        * params.length_L**4
        * V
        * V
        / (2.0 * sect.bending_EI * params.gap_G**3)
    )
    mu = params.tip_mass_M / (sect.line_mass_m * params.length_L)
    t_star = params.length_L**2 * math.sqrt(sect.line_mass_m / sect.bending_EI)
    return DimensionlessGroup(lam=lam, mu=mu, t_star=t_star)
