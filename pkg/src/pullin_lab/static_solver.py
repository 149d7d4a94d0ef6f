"""Static deflection of the biased cantilever on a finite-difference grid.

The beam occupies physical nodes 0..N-1 (clamp through tip) with two ghost
nodes beyond each end. Boundary conditions eliminate the ghosts so the
unknowns are the N-1 deflections away from the clamp. The nonlinear
electrostatic load is handled by successive substitution: freeze the load at
the previous iterate, solve the linear bending problem exactly with a banded
elimination, repeat until the relative change is below tolerance. Loss of
convergence is reported, not raised, because it is the pull-in signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import solve_banded

from .model import BeamParams, nondimensionalize

#: Fraction of the gap at which an iterate is declared to have run away.
_GAP_FRACTION_LIMIT = 0.99
#: Consecutive growing-change sweeps that mark a diverging iteration.
_GROWTH_STREAK_LIMIT = 10


@dataclass(frozen=True)
class Grid:
    """Uniform grid over the beam with ghost nodes at both ends.

    Attributes:
        n_interior: number of physical nodes, clamp through tip inclusive.
        spacing_h: node spacing, m.
        ghost_left: ghost nodes beyond the clamp (always 2).
        ghost_right: ghost nodes beyond the tip (always 2).
    """

    n_interior: int
    spacing_h: float
    ghost_left: int = 2
    ghost_right: int = 2

    @property
    def total_nodes(self) -> int:
        """Physical plus ghost node count."""
        return self.n_interior + self.ghost_left + self.ghost_right


@dataclass(frozen=True)
class SolverOptions:
    """Iteration controls for the successive-substitution loop.

    Attributes:
        rel_tolerance: stop when the max relative change between sweeps falls
            below this (default 1e-3, i.e. 0.1 percent).
        max_iterations: sweep budget before declaring non-convergence.
        relaxation: mixing factor in (0, 1]; 1.0 is plain substitution,
            smaller values damp the update near the stability boundary.
    """

    rel_tolerance: float = 1e-3
    max_iterations: int = 500
    relaxation: float = 1.0

    def __post_init__(self) -> None:
        if not self.rel_tolerance > 0.0:
            raise ValueError(f"rel_tolerance must be > 0, got {self.rel_tolerance!r}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations!r}")
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError(f"relaxation must be in (0, 1], got {self.relaxation!r}")


@dataclass(frozen=True, eq=False)
class StaticSolution:
    """Converged (or abandoned) static deflection field.

    Attributes:
        deflection: deflection at each physical node, m; index 0 is the clamp.
        voltage_V: DC voltage the field was solved at.
        iterations: substitution sweeps performed.
        converged: False when the iteration ran away or the budget expired.
        final_relative_change: last max relative change between sweeps.
    """

    deflection: np.ndarray
    voltage_V: float
    iterations: int
    converged: bool
    final_relative_change: float

    @property
    def tip_deflection_m(self) -> float:
        """Deflection of the free end, m."""
        return float(self.deflection[-1])


class GhostValues(NamedTuple):
    """Ghost node values, ordered outward-left to outward-right."""

    left_outer: float
    left_inner: float
    right_inner: float
    right_outer: float


def build_grid(n_interior: int, params: BeamParams) -> Grid:
    """Lay out a uniform grid with two ghost nodes beyond each boundary.

    Args:
        n_interior: physical node count, at least 7 so every stencil has
            support.
        params: beam definition (supplies the length).
    """
    if n_interior < 7:
        raise ValueError(f"need at least 7 physical nodes, got {n_interior}")
    return Grid(n_interior=n_interior, spacing_h=params.length_L / (n_interior - 1))


def eliminate_ghosts(field: np.ndarray, params: BeamParams, grid: Grid) -> GhostValues:
    """Ghost values implied by the boundary conditions for a given field.

    Clamped end: the zero-slope condition is enforced by even reflection
    about the clamp node, which satisfies the second-order and fourth-order
    central slope stencils simultaneously. Free end: zero moment (fourth-order
    central second derivative) and zero shear (second-order central third
    derivative) are solved jointly for the two right ghosts, giving

        g1 = (y[T-2] - 9 y[T-1] + 15 y[T]) / 7
        g2 = (9 y[T-2] - 32 y[T-1] + 30 y[T]) / 7

    where T is the tip node.

    Args:
        field: deflections at the physical nodes (length grid.n_interior).
        params: beam definition (unused by the homogeneous conditions but kept
            so inhomogeneous variants stay signature-compatible).
        grid: grid the field lives on.

    Returns:
        The four ghost values (left outer, left inner, right inner, right outer).
    """
    if len(field) != grid.n_interior:
        raise ValueError(
            f"field has {len(field)} nodes, grid expects {grid.n_interior}"
        )
    y = np.asarray(field, dtype=float)
    left_inner = y[1]
    left_outer = y[2]
    right_inner = (y[-3] - 9.0 * y[-2] + 15.0 * y[-1]) / 7.0
    right_outer = (9.0 * y[-3] - 32.0 * y[-2] + 30.0 * y[-1]) / 7.0
    return GhostValues(float(left_outer), float(left_inner), float(right_inner), float(right_outer))


def with_ghosts(field: np.ndarray, params: BeamParams, grid: Grid) -> np.ndarray:
    """Field padded to total_nodes with boundary-consistent ghost values."""
    g = eliminate_ghosts(field, params, grid)
    return np.concatenate(([g.left_outer, g.left_inner], np.asarray(field, dtype=float),
                           [g.right_inner, g.right_outer]))


def apply_bending_operator(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Discrete fourth derivative at every physical node.

    Args:
        field: ghost-padded array of length grid.total_nodes. Callers either
            sample an analytic function at ghost coordinates or use
            :func:`with_ghosts`.
        grid: supplies the spacing.

    Returns:
        (f[i-2] - 4 f[i-1] + 6 f[i] - 4 f[i+1] + f[i+2]) / h^4 at each of the
        n_interior physical nodes.
    """
    f = np.asarray(field, dtype=float)
    if len(f) != grid.total_nodes:
        raise ValueError(
            f"field has {len(f)} entries, expected {grid.total_nodes} (with ghosts)"
        )
    h4 = grid.spacing_h**4
    return (f[:-4] - 4.0 * f[1:-3] + 6.0 * f[2:-2] - 4.0 * f[3:-1] + f[4:]) / h4


def _bending_matrix(n_interior: int) -> np.ndarray:
    """Ghost-eliminated fourth-derivative coefficient matrix.

    Rows correspond to the physical nodes 1..T (clamp excluded, its value is
    pinned to zero); the entries are the raw stencil coefficients, so callers
    scale by 1/h^4 for whatever spacing they use. The first and last two rows
    fold in the ghost eliminations of :func:`eliminate_ghosts`.
    """
    t = n_interior - 1
    a = np.zeros((t, t))
    # Node 1 sits next to the clamp: ghost reflection turns the outer
    # coefficient back onto the node itself (1 + 6 = 7).
    a[0, 0:3] = (7.0, -4.0, 1.0)
    a[1, 0:4] = (-4.0, 6.0, -4.0, 1.0)
    for i in range(2, t - 2):
        a[i, i - 2 : i + 3] = (1.0, -4.0, 6.0, -4.0, 1.0)
    # Last two rows absorb the free-end ghost eliminations.
    a[t - 2, t - 4 : t] = (1.0, -27.0 / 7.0, 33.0 / 7.0, -13.0 / 7.0)
    a[t - 1, t - 3 : t] = (12.0 / 7.0, -24.0 / 7.0, 12.0 / 7.0)
    return a


def _to_banded(a: np.ndarray) -> np.ndarray:
    """Pack a pentadiagonal matrix into solve_banded's (2, 2) layout."""
    t = a.shape[0]
    ab = np.zeros((5, t))
    for offset in range(-2, 3):
        diag = np.diagonal(a, offset)
        ab[2 - offset, max(offset, 0) : t + min(offset, 0)] = diag
    return ab


def solve_static(
    params: BeamParams,
    V: float,
    grid: Optional[Grid] = None,
    opts: Optional[SolverOptions] = None,
    initial: Optional[np.ndarray] = None,
) -> StaticSolution:
    """Solve the static deflection under a DC voltage.

    The problem is solved in dimensionless form, w'''' = lam/(1 - w)^2 with
    w = y/G, so conditioning is independent of the physical scales. Iteration
    starts from zero (or from `initial`) and lags the load one sweep behind.

    Args:
        params: beam definition.
        V: applied DC voltage. Only V^2 matters.
        grid: spatial grid, default 201 physical nodes.
        opts: iteration controls, default SolverOptions().
        initial: optional warm-start deflection in meters over the physical
            nodes (shape and grid must match).

    Returns:
        StaticSolution with converged=False when the substitution ran away
        (an iterate crossed 99 percent of the gap, the change grew for 10
        consecutive sweeps, or the budget expired). Non-convergence is data:
        it marks voltages beyond the fold.
    """
    grid = grid or build_grid(201, params)
    opts = opts or SolverOptions()
    lam = nondimensionalize(params, V).lam
    n = grid.n_interior
    t = n - 1

    if lam == 0.0:
        return StaticSolution(
            deflection=np.zeros(n),
            voltage_V=V,
            iterations=1,
            converged=True,
            final_relative_change=0.0,
        )

    delta4 = (1.0 / (n - 1)) ** 4
    ab = _to_banded(_bending_matrix(n) / delta4)

    if initial is not None:
        if len(initial) != n:
            raise ValueError("warm-start field does not match the grid")
        w = np.asarray(initial[1:], dtype=float) / params.gap_G
    else:
        w = np.zeros(t)

    converged = False
    rel_change = np.inf
    growth_streak = 0
    iterations = 0
    for iterations in range(1, opts.max_iterations + 1):
        load = lam / (1.0 - w) ** 2
        w_new = solve_banded((2, 2), ab, load)
        if opts.relaxation < 1.0:
            w_new = (1.0 - opts.relaxation) * w + opts.relaxation * w_new
        if not np.all(np.isfinite(w_new)) or np.max(w_new) >= _GAP_FRACTION_LIMIT:
            w = w_new
            break
        prev_change = rel_change
        rel_change = float(np.max(np.abs(w_new - w)) / max(np.max(np.abs(w_new)), 1e-300))
        w = w_new
        if rel_change <= opts.rel_tolerance:
            converged = True
            break
        growth_streak = growth_streak + 1 if rel_change > prev_change else 0
        if growth_streak >= _GROWTH_STREAK_LIMIT:
            break

    if not np.all(np.isfinite(w)):
        w = np.where(np.isfinite(w), w, np.nan)
    deflection = np.empty(n)
    deflection[0] = 0.0
    deflection[1:] = w * params.gap_G
    return StaticSolution(
        deflection=deflection,
        voltage_V=V,
        iterations=iterations,
        converged=converged,
        final_relative_change=rel_change if np.isfinite(rel_change) else np.inf,
    )


def residual_norm(sol: StaticSolution, params: BeamParams, grid: Grid) -> float:
    """Max-norm imbalance of the discrete equilibrium equation, dimensionless.

    Measured in the scale-free form w'''' - lam/(1 - w)^2 over the nodes away
    from the clamp, so a zero field at voltage V scores exactly lam.
    """
    lam = nondimensionalize(params, sol.voltage_V).lam
    w = np.asarray(sol.deflection, dtype=float) / params.gap_G
    n = grid.n_interior
    delta = 1.0 / (n - 1)
    dimensionless_grid = Grid(n_interior=n, spacing_h=delta)
    padded = with_ghosts(w, params, dimensionless_grid)
    fourth = apply_bending_operator(padded, dimensionless_grid)
    res = fourth[1:] - lam / (1.0 - w[1:]) ** 2
    return float(np.max(np.abs(res)))
