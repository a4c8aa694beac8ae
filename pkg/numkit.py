# numkit.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import scipy.linalg as la
from scipy.stats import unitary_group

from errors import DimensionMismatch, InputError, NotPositiveSemidefinite
from settings import GRAM_MISMATCH_TOL, RANK_TOL_REL

log = logging.getLogger(__name__)


# ========= Matrix carrier =========

def as_matrix(obj: Any, name: str = "matrix") -> np.ndarray:
    """
    Coerce to a finite complex128 2-D array (a fresh, read-only copy).
    Scalars become 1x1; 1-D input is rejected because row/column intent is ambiguous.
    """
    arr = np.array(obj, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name}: expected a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: entries must be finite")
    arr.setflags(write=False)
    return arr


def _require_square(M: np.ndarray, name: str) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name}: expected a square matrix, got shape {M.shape}")


def hermitian_part(H: np.ndarray) -> np.ndarray:
    return (H + H.conj().T) / 2


# ========= Norms and spectra =========

def op_norm(M: np.ndarray) -> float:
    """
    Largest singular value; 0 for an empty matrix.
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0:
        return 0.0
    return float(la.svdvals(M)[0])


def eig_min(H: np.ndarray) -> float:
    H = np.asarray(H, dtype=np.complex128)
    _require_square(H, "eig_min")
    if H.size == 0:
        return 0.0
    return float(la.eigh(hermitian_part(H), eigvals_only=True)[0])


def psd_project(H: np.ndarray) -> np.ndarray:
    """
    Nearest positive semidefinite matrix in Frobenius norm: symmetrize,
    then clip negative eigenvalues to zero.
    """
    H = np.asarray(H, dtype=np.complex128)
    _require_square(H, "psd_project")
    if H.size == 0:
        return H.copy()
    w, Q = la.eigh(hermitian_part(H))
    w = np.clip(w, 0.0, None)
    P = (Q * w) @ Q.conj().T
    return hermitian_part(P)


def gram_factor(K: np.ndarray, tol: Optional[float] = None, rel: float = RANK_TOL_REL) -> np.ndarray:
    """
    Factor a PSD matrix as K = U* U with U of shape (r, n), r the numerical rank.

    tol:
        eigenvalues above tol count towards the rank; eigenvalues below -tol
        mean K is not PSD. Defaults to rel * (largest |eigenvalue|).

    U is only determined up to a left unitary factor.
    """
    K = np.asarray(K, dtype=np.complex128)
    _require_square(K, "gram_factor")
    n = K.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)

    w, Q = la.eigh(hermitian_part(K))
    if tol is None:
        tol = rel * float(np.max(np.abs(w)))

    if w[0] < -tol:
        raise NotPositiveSemidefinite(
            f"gram_factor: eigenvalue {w[0]:.3e} below -tol={tol:.3e}",
            {"eig_min": float(w[0]), "tol": tol},
        )

    keep = w > tol
    # largest eigenvalue first
    w_kept = w[keep][::-1]
    Q_kept = Q[:, keep][:, ::-1]
    U = np.sqrt(w_kept)[:, None] * Q_kept.conj().T
    return U


# ========= Lurking-contraction extension =========

@dataclass(frozen=True, eq=False)
class SpanMap:
    """
    Result of solve_on_span.

    matrix:
        V = Y X^+ after singular-value clipping
    gram_residual:
        max entrywise |X*X - Y*Y|
    clipped:
        how far the largest singular value exceeded 1 before clipping (0 if it didn't)
    warning:
        set when the Gram matrices disagree beyond tolerance
    """
    matrix: np.ndarray
    gram_residual: float
    clipped: float
    warning: Optional[str] = None


def solve_on_span(X: np.ndarray, Y: np.ndarray, gram_tol: float = GRAM_MISMATCH_TOL) -> SpanMap:
    """
    The map sending column x_j of X to column y_j of Y, extended by zero on
    the orthogonal complement of span(X).
    """
    X = np.asarray(X, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(
            f"solve_on_span: column counts differ (X {X.shape}, Y {Y.shape})"
        )

    gram_residual = 0.0
    if X.shape[1] > 0:
        gram_residual = float(np.max(np.abs(X.conj().T @ X - Y.conj().T @ Y)))

    warning = None
    if gram_residual > gram_tol:
        warning = f"Gram mismatch {gram_residual:.3e} exceeds {gram_tol:.1e}; map is not an isometry on the span"
        log.warning("⚠️ solve_on_span: %s", warning)

    V = Y @ la.pinv(X)

    clipped = 0.0
    if V.size:
        Uv, s, Wh = la.svd(V)
        top = float(s[0]) if s.size else 0.0
        if top > 1.0:
            clipped = top - 1.0
            s = np.minimum(s, 1.0)
            S = np.zeros((Uv.shape[1], Wh.shape[0]))
            S[: s.size, : s.size] = np.diag(s)
            V = Uv @ S @ Wh
            log.info("🔄 solve_on_span: clipped singular values by %.3e", clipped)

    return SpanMap(matrix=V, gram_residual=gram_residual, clipped=clipped, warning=warning)


# ========= Random test data =========

def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_contraction(rows: int, cols: int, rng: np.random.Generator, norm: Optional[float] = None) -> np.ndarray:
    """
    Random complex matrix with operator norm `norm` (default: uniform in [0.3, 1]).
    """
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=np.complex128)
    G = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    target = rng.uniform(0.3, 1.0) if norm is None else norm
    return G * (target / op_norm(G))


# ========= Sampling meshes =========

def polar_mesh(grid: int, r_max: float = 1.0, n_radii: Optional[int] = None) -> np.ndarray:
    """
    Points r e^{i theta} of the closed disk of radius r_max: `grid` equispaced
    phases times n_radii equispaced radii (origin counted once).
    """
    if grid < 2:
        raise InputError(f"grid must be >= 2, got {grid}")
    if n_radii is None:
        n_radii = max(2, grid // 5)
    radii = np.linspace(0.0, r_max, n_radii)[1:]
    phases = np.exp(2j * np.pi * np.arange(grid) / grid)
    ring = (radii[:, None] * phases[None, :]).ravel()
    return np.concatenate([[0.0 + 0.0j], ring])
