"""Natural frequencies and mode shapes about a biased equilibrium.

Linearizing the electrostatic load about a converged static field leaves a
bending operator softened by a diagonal term. Small perturbations u then obey
a generalized eigenproblem K u = omega^2 M u on the ghost-eliminated grid.
The boundary eliminations make the last two rows of K unsymmetric, so the
solver runs two-sided (left and right) inverse iteration with deflation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from .errors import NotConvergedError, PastPullInError
from .model import BeamParams, derived_properties, linearized_stiffness_density
from .static_solver import Grid, StaticSolution, _bending_matrix, _to_banded

_EIGENVALUE_RTOL = 1e-10
_RESIDUAL_RTOL = 1e-9
_MAX_SWEEPS = 300


class ModalSystem(NamedTuple):
    """Discrete operator pair (plus the bias it was linearized at)."""

    stiffness: np.ndarray
    mass: np.ndarray
    bias_voltage_V: float


@dataclass(frozen=True, eq=False)
class ModalResult:
    """Lowest vibration modes about a static equilibrium.

    Attributes:
        frequencies: angular frequencies in rad/s, ascending.
        mode_shapes: one array per mode over the physical nodes (clamp
            included), scaled to unit maximum amplitude.
        bias_voltage: DC bias the linearization was taken at, V.
    """

    frequencies: tuple[float, ...]
    mode_shapes: tuple[np.ndarray, ...]
    bias_voltage: float


def assemble_modal_system(
    sol: StaticSolution, params: BeamParams, grid: Grid
) -> ModalSystem:
    """Stiffness and mass operators of the linearized dynamics.

    The stiffness is the ghost-eliminated bending operator minus the diagonal
    electrostatic softening evaluated on the static field. The mass carries
    the line density per node; a proof mass enters through the tip shear
    balance rather than as a plain lumped entry. Pushing the inertial shear
    condition through the same ghost elimination the stiffness rows use puts
    (12/7) M/h on the tip diagonal and (1/7) M/h on the coupling of the
    next-to-tip row to the tip. A bare M/h tip entry looks natural but leaves
    the discrete free-end condition at zero shear, which understates the tip
    inertia by a grid-independent factor (about 29 percent high in frequency
    when M equals the beam mass).

    Args:
        sol: converged static solution at the bias voltage.
        params: beam definition.
        grid: grid the solution lives on.

    Raises:
        NotConvergedError: if sol.converged is False (linearizing about a
            runaway iterate is meaningless).
    """
    if not sol.converged:
        raise NotConvergedError("cannot linearize about a non-converged field")
    if len(sol.deflection) != grid.n_interior:
        raise ValueError("solution and grid sizes do not match")
    sect = derived_properties(params)
    n = grid.n_interior
    h = grid.spacing_h
    bending = sect.bending_EI * _bending_matrix(n) / h**4
    softening = np.array(
        [
            linearized_stiffness_density(float(y), sol.voltage_V, params)
            for y in sol.deflection[1:]
        ]
    )
    stiffness = bending - np.diag(softening)
    mass = np.diag(np.full(n - 1, sect.line_mass_m))
    if params.tip_mass_M > 0.0:
        lump = params.tip_mass_M / h
        mass[-1, -1] += (12.0 / 7.0) * lump
        mass[-2, -1] += (1.0 / 7.0) * lump
    return ModalSystem(
        stiffness=stiffness, mass=mass, bias_voltage_V=sol.voltage_V
    )


def _deflate(vec: np.ndarray, basis: list[np.ndarray], duals: list[np.ndarray],
             mass: np.ndarray) -> np.ndarray:
    """Remove converged eigendirections, bi-orthogonally against the duals."""
    for b, d in zip(basis, duals):
        vec = vec - b * (d @ (mass @ vec)) / (d @ (mass @ b))
    return vec


def lowest_modes(system: ModalSystem, n_modes: int) -> ModalResult:
    """Smallest n_modes generalized eigenpairs of (K, M).

    Two-sided inverse iteration: right vectors against K, left vectors
    against K transpose, both reusing the banded structure. Each new mode is
    deflated against the already-converged pairs. Iteration stops when the
    two-sided Rayleigh quotient is stationary and the explicit residual
    ||K v - lambda M v|| / ||K v|| is driven to 1e-9 or to the double
    precision floor for that eigenvalue, whichever is larger. The floor is
    real: a float64 vector carries rounding-level components along the
    stiffest grid modes, so its residual cannot drop below roughly
    eps * lambda_max / lambda (about 5e-7 for the fundamental on the default
    grid). Iterating past that floor buys nothing.

    Args:
        system: operators from assemble_modal_system.
        n_modes: how many modes, 1 to 5.

    Raises:
        PastPullInError: the smallest eigenvalue is negative, meaning the
            bias point is beyond pull-in and not a stable equilibrium.
    """
    if not 1 <= n_modes <= 5:
        raise ValueError(f"n_modes must be in 1..5, got {n_modes}")
    K = system.stiffness
    mass = system.mass
    t = K.shape[0]
    if n_modes >= t:
        raise ValueError("grid too coarse for the requested mode count")
    ab = _to_banded(K)
    ab_t = _to_banded(K.T)
    # Largest generalized eigenvalue scale, for the representation floor.
    stiff_scale = float(
        np.max(np.sum(np.abs(K), axis=1)) / np.min(np.diagonal(mass))
    )
    eps = float(np.finfo(float).eps)

    rng = np.random.default_rng(20240117)
    rights: list[np.ndarray] = []
    lefts: list[np.ndarray] = []
    eigenvalues: list[float] = []
    for _ in range(n_modes):
        v = _deflate(rng.standard_normal(t), rights, lefts, mass)
        w = _deflate(rng.standard_normal(t), lefts, rights, mass.T)
        lam_prev = np.inf
        lam = np.inf
        for _ in range(_MAX_SWEEPS):
            v = solve_banded((2, 2), ab, mass @ v)
            w = solve_banded((2, 2), ab_t, mass.T @ w)
            v = _deflate(v, rights, lefts, mass)
            w = _deflate(w, lefts, rights, mass.T)
            v /= np.linalg.norm(v)
            w /= np.linalg.norm(w)
            kv = K @ v
            mv = mass @ v
            denom = w @ mv
            if denom == 0.0:
                continue
            lam = float((w @ kv) / denom)
            residual = float(
                np.linalg.norm(kv - lam * mv) / np.linalg.norm(kv)
            )
            floor = eps * stiff_scale / max(abs(lam), 1e-300)
            if (
                abs(lam - lam_prev) <= _EIGENVALUE_RTOL * abs(lam)
                and residual <= max(_RESIDUAL_RTOL, floor)
            ):
                break
            lam_prev = lam
        rights.append(v)
        lefts.append(w)
        eigenvalues.append(lam)

    if eigenvalues[0] < 0.0:
        raise PastPullInError(
            "smallest eigenvalue is negative: the bias point is not a stable equilibrium"
        )

    order = np.argsort(eigenvalues)
    freqs = []
    shapes = []
    for idx in order:
        lam = eigenvalues[idx]
        if lam < 0.0:
            raise PastPullInError(
                "negative eigenvalue among requested modes: bias beyond pull-in"
            )
        freqs.append(float(np.sqrt(lam)))
        shape = np.concatenate(([0.0], rights[idx]))
        peak = np.argmax(np.abs(shape))
        shapes.append(shape / shape[peak])
    return ModalResult(
        frequencies=tuple(freqs),
        mode_shapes=tuple(shapes),
        bias_voltage=system.bias_voltage_V,
    )
