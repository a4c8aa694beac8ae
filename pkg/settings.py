# settings.py
from __future__ import annotations

from dataclasses import dataclass, replace, asdict
from typing import Any, Dict

# ========= Numerical defaults =========

DEFAULT_TOL = 1e-10             # feasibility residual / eigenvalue tolerance
DEFAULT_MAX_ITER = 50_000       # Dykstra iterations
DEFAULT_GRID = 41               # phases per variable in grid sweeps
DEFAULT_SEED = 0

LURKING_RESIDUAL_LIMIT = 1e-6   # certificates worse than this can't give an isometry
RANK_TOL_REL = 1e-10            # gram_factor rank cut, relative to the top eigenvalue
SINGULAR_RCOND = 1e-13          # resolvent is "singular" below this reciprocal condition
CONTRACTION_BAND = 1e-10        # |norm - 1| within this band is "boundary"
COEFF_CLEANUP_REL = 1e-11       # det_poly zeroes coefficients below this * max
MEMBERSHIP_MARGIN = 1e-12       # |root| < 1 - margin counts as inside the open disk
GRAM_MISMATCH_TOL = 1e-8        # solve_on_span warns above this Gram residual


solver_profile: Dict[str, Any] = {
    "tol": DEFAULT_TOL,
    "max_iter": DEFAULT_MAX_ITER,
    "grid": DEFAULT_GRID,
    "seed": DEFAULT_SEED,
    "allow_boundary": False,
    "lurking_residual_limit": LURKING_RESIDUAL_LIMIT,
    "rank_tol_rel": RANK_TOL_REL,
}


@dataclass(frozen=True)
class SolverOptions:
    """
    Knobs shared by the interpolation pipeline and the grid sweeps.
    Built from solver_profile; the CLI overrides single fields from flags.
    """
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    grid: int = DEFAULT_GRID
    seed: int = DEFAULT_SEED
    allow_boundary: bool = False
    lurking_residual_limit: float = LURKING_RESIDUAL_LIMIT
    rank_tol_rel: float = RANK_TOL_REL

    def with_overrides(self, **overrides: Any) -> "SolverOptions":
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **clean)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def get_solver_options(**overrides: Any) -> SolverOptions:
    """
    Options from the profile, with any non-None override applied on top.
    Unknown keys are a programming error and raise TypeError.
    """
    base = SolverOptions(**solver_profile)
    return base.with_overrides(**overrides)
