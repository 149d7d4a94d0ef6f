"""Pull-in voltage location by bracketing the loss of static convergence.

The static substitution iteration stops converging exactly where the stable
deflection branch folds, so "no longer converges" is the instability
detector. The search seeds its first probe from the one-dimensional
closed-form estimate, expands the bracket by doubling, then bisects to the
requested voltage tolerance, warm-starting every probe from the nearest
converged field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import NoPullInError
from .lumped import LumpedModel, pullin_voltage_1d
from .model import BeamParams, derived_properties
from .static_solver import Grid, SolverOptions, StaticSolution, build_grid, solve_static

#: Bound on bracket expansions past the caller's ceiling hint.
_MAX_DOUBLINGS = 24


class CurvePoint(NamedTuple):
    """One probed voltage on a deflection curve."""

    voltage_V: float
    tip_deflection_m: float
    converged: bool


@dataclass(frozen=True)
class DeflectionCurve:
    """Tip deflection versus applied voltage, including failed probes."""

    points: tuple[CurvePoint, ...]

    def converged_points(self) -> tuple[CurvePoint, ...]:
        return tuple(p for p in self.points if p.converged)


@dataclass(frozen=True)
class PullInResult:
    """Bracket around the pull-in voltage.

    Attributes:
        v_lower: last voltage with a converged static solution, V.
        v_upper: first voltage where the iteration ran away, V.
        tip_at_lower: tip deflection at v_lower, m.
        bracket_width: v_upper - v_lower, V.
    """

    v_lower: float
    v_upper: float
    tip_at_lower: float
    bracket_width: float


def sweep_voltage(
    params: BeamParams,
    voltages: Sequence[float],
    grid: Optional[Grid] = None,
    opts: Optional[SolverOptions] = None,
) -> DeflectionCurve:
    """Solve the static problem at each voltage, chaining warm starts.

    Every requested voltage produces a point; losing convergence is recorded
    (converged=False), never raised. Probes are evaluated in the given order
    and each one starts from the most recent converged field, which keeps the
    iteration on the stable branch near the fold.

    Args:
        params: beam definition.
        voltages: non-empty sequence of non-negative probe voltages.
        grid: spatial grid, default 201 nodes.
        opts: iteration controls.
    """
    if len(voltages) == 0:
        raise ValueError("voltages must be non-empty")
    if any(v < 0 for v in voltages):
        raise ValueError("voltages must be non-negative")
    grid = grid or build_grid(201, params)
    points = []
    warm: Optional[np.ndarray] = None
    for v in voltages:
        sol = solve_static(params, v, grid, opts, initial=warm)
        if sol.converged:
            warm = sol.deflection
        points.append(CurvePoint(float(v), sol.tip_deflection_m, sol.converged))
    return DeflectionCurve(points=tuple(points))


def _seed_voltage(params: BeamParams) -> float:
    """Order-of-magnitude pull-in seed from the one-dimensional model.

    Uses the tip stiffness of a clamped-free beam under an end load,
    8*EI/L^3 against a plate of area b*L. Crude on purpose; the bracket
    expansion corrects it.
    """
    sect = derived_properties(params)
    km = 8.0 * sect.bending_EI / params.length_L**3
    model = LumpedModel(
        spring_Km=km,
        area_A=params.width_b * params.length_L,
        gap_G=params.gap_G,
        permittivity_eps=params.permittivity_eps,
    )
    return pullin_voltage_1d(model)


def find_pullin(
    params: BeamParams,
    v_max_hint: Optional[float] = None,
    tol: float = 0.01,
    grid: Optional[Grid] = None,
    opts: Optional[SolverOptions] = None,
    max_doublings: int = _MAX_DOUBLINGS,
) -> PullInResult:
    """Bracket the pull-in voltage to the requested width.

    Args:
        params: beam definition.
        v_max_hint: initial search ceiling, V; defaults to twice the
            one-dimensional seed estimate. If everything below it converges
            the ceiling doubles a bounded number of times before giving up.
        tol: target bracket width, V.
        grid: spatial grid, default 201 nodes.
        opts: static iteration controls.
        max_doublings: bound on ceiling expansions.

    Returns:
        PullInResult with bracket_width <= tol.

    Raises:
        NoPullInError: no loss of convergence found below the expanded ceiling.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol!r}")
    if v_max_hint is not None and v_max_hint <= 0:
        raise ValueError(f"v_max_hint must be > 0, got {v_max_hint!r}")
    grid = grid or build_grid(201, params)

    ceiling = v_max_hint if v_max_hint is not None else 2.0 * _seed_voltage(params)

    # Expand upward until a probe fails to converge.
    v_lo = 0.0
    warm: Optional[np.ndarray] = None
    tip_lo = 0.0
    v_hi = None
    probe = ceiling
    for _ in range(max_doublings + 1):
        sol = solve_static(params, probe, grid, opts, initial=warm)
        if sol.converged:
            v_lo, tip_lo, warm = probe, sol.tip_deflection_m, sol.deflection
            probe *= 2.0
        else:
            v_hi = probe
            break
    if v_hi is None:
        raise NoPullInError(
            f"no loss of convergence up to {probe / 2.0:.6g} V "
            f"({max_doublings} expansions past the ceiling hint)"
        )

    # The failed probe may sit far above the fold; bisect down to tolerance,
    # always warm-starting from the best converged field so probes just under
    # the fold are not misclassified by a cold start.
    while v_hi - v_lo > tol:
        mid = 0.5 * (v_lo + v_hi)
        sol = solve_static(params, mid, grid, opts, initial=warm)
        if sol.converged:
            v_lo, tip_lo, warm = mid, sol.tip_deflection_m, sol.deflection
        else:
            v_hi = mid

    if v_lo == 0.0:
        # Bracket never found a converged point above zero volts; the fold sits
        # below the first probe, so tighten from zero explicitly.
        sol = solve_static(params, 0.0, grid, opts)
        tip_lo = sol.tip_deflection_m
    return PullInResult(
        v_lower=v_lo,
        v_upper=v_hi,
        tip_at_lower=tip_lo,
        bracket_width=v_hi - v_lo,
    )


def sdof_stability_limit(G: float) -> float:
    """Single-degree-of-freedom pull-in deflection, exactly G/3."""
    if not G > 0:
        raise ValueError(f"gap must be > 0, got {G!r}")
    return G / 3.0


def compare_stability(result: PullInResult, params: BeamParams) -> float:
    """Tip deflection at the last stable point as a fraction of the gap.

    The one-dimensional model predicts 1/3; the distributed cantilever lets
    the tip travel noticeably farther before folding, which is the point of
    comparing the two.
    """
    return result.tip_at_lower / params.gap_G
