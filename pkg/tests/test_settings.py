import dataclasses

import pytest

from settings import DEFAULT_GRID, DEFAULT_TOL, SolverOptions, get_solver_options, solver_profile


def test_defaults_come_from_profile():
    opts = get_solver_options()
    assert opts.tol == DEFAULT_TOL
    assert opts.grid == DEFAULT_GRID
    assert opts.as_dict() == solver_profile


def test_overrides_skip_none():
    opts = get_solver_options(grid=11, tol=None, allow_boundary=True)
    assert opts.grid == 11
    assert opts.tol == DEFAULT_TOL
    assert opts.allow_boundary


def test_unknown_override_is_a_type_error():
    with pytest.raises(TypeError):
        get_solver_options(tolerance=1e-3)


def test_options_are_frozen():
    opts = SolverOptions()
    with pytest.raises(dataclasses.FrozenInstanceError):
        opts.grid = 3
    assert opts.with_overrides(seed=4).seed == 4
    assert opts.seed == 0
