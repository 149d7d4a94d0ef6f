"""Shared fixtures: the reference device and commonly reused solver objects."""

import pytest

from pullin_lab import BeamParams, SolverOptions, build_grid, default_params


@pytest.fixture
def reference_beam() -> BeamParams:
    """The reference silicon cantilever: 300 x 50 x 3 um over a 3 um gap."""
    return default_params()


@pytest.fixture
def grid201(reference_beam):
    return build_grid(201, reference_beam)


@pytest.fixture
def tight_opts() -> SolverOptions:
    """Iteration tolerance far below discretization error, for oracle comparisons."""
    return SolverOptions(rel_tolerance=1e-10, max_iterations=2000)
