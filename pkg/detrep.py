# detrep.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from errors import DimensionMismatch, InputError, NotContractive
from numkit import as_matrix, op_norm
from poly2 import Coords, DetForm, Poly2, change_sigma_e, coefficient_residual, det_poly
from realize import contraction_class
from settings import CONTRACTION_BAND

log = logging.getLogger(__name__)

_TARGET_COORDS = {DetForm.D2: Coords.ZZETA, DetForm.G: Coords.SP}


# ========= Types =========

@dataclass(frozen=True, eq=False)
class DetRep:
    """
    constant * det(I - [[A1, A2], [A2, A1]] diag(z I, zeta I))     (form d2)
    constant * det(I - s A1 + p (A1 + A2)(A1 - A2))                (form g)

    The constant is the value at the origin and must be non-zero.
    """
    form: DetForm
    A1: np.ndarray
    A2: np.ndarray
    constant: complex = 1.0

    def __post_init__(self) -> None:
        form = DetForm(self.form)
        if form not in _TARGET_COORDS:
            raise InputError(f"DetRep form must be d2 or g, got {form.value}")
        A1 = as_matrix(self.A1, "A1")
        A2 = as_matrix(self.A2, "A2")
        if A1.shape != A2.shape or A1.shape[0] != A1.shape[1]:
            raise DimensionMismatch(f"A1 and A2 must be square of equal size, got {A1.shape} and {A2.shape}")
        constant = complex(self.constant)
        if constant == 0:
            raise InputError("constant (value at the origin) must be non-zero")
        object.__setattr__(self, "form", form)
        object.__setattr__(self, "A1", A1)
        object.__setattr__(self, "A2", A2)
        object.__setattr__(self, "constant", constant)

    @property
    def size(self) -> int:
        return self.A1.shape[0]


@dataclass(frozen=True, eq=False)
class KBlocks:
    """
    An (n + m) x (n + m) contraction K = [[K11, K12], [K21, K22]] with K11 of size n x n,
    standing for q(sigma, e) = det(I - K diag(sigma I_n, e I_m)).
    """
    K: np.ndarray
    n: int
    m: int

    def __post_init__(self) -> None:
        K = as_matrix(self.K, "K") if np.size(self.K) else np.zeros((0, 0), dtype=np.complex128)
        n, m = int(self.n), int(self.m)
        if n < 0 or m < 0 or K.shape != (n + m, n + m):
            raise DimensionMismatch(f"K must be {(n + m, n + m)} for n={n}, m={m}; got {K.shape}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)

    @property
    def K11(self) -> np.ndarray:
        return self.K[: self.n, : self.n]

    @property
    def K12(self) -> np.ndarray:
        return self.K[: self.n, self.n:]

    @property
    def K21(self) -> np.ndarray:
        return self.K[self.n:, : self.n]

    @property
    def K22(self) -> np.ndarray:
        return self.K[self.n:, self.n:]

    @property
    def norm(self) -> float:
        return op_norm(self.K)


# ========= Construction =========

def from_K(k: KBlocks, constant: complex = 1.0) -> DetRep:
    """
    Pencil pair of size n + 2m (block sizes n, m, m):

        A1 = [[K11/2, 0,      -K12/2],        A2 = same, except the
              [K21/2, 0,      -K22/2],             (3, 2) block is +I_m/2
              [0,     -I_m/2,  0    ]]

    so that det(I - s A1 + p (A1 + A2)(A1 - A2)) = q(s/2, s^2/4 - p).
    """
    norm = k.norm
    if norm > 1.0 + CONTRACTION_BAND:
        raise NotContractive(f"K is not a contraction (norm={norm:.12g})", norm)

    n, m = k.n, k.m
    ell = n + 2 * m
    A1 = np.zeros((ell, ell), dtype=np.complex128)
    A1[:n, :n] = k.K11 / 2
    A1[:n, n + m:] = -k.K12 / 2
    A1[n:n + m, :n] = k.K21 / 2
    A1[n:n + m, n + m:] = -k.K22 / 2
    A2 = A1.copy()
    A1[n + m:, n:n + m] = -np.eye(m) / 2
    A2[n + m:, n:n + m] = np.eye(m) / 2
    return DetRep(DetForm.G, A1, A2, constant)


def g_rep_to_d2_rep(r: DetRep) -> DetRep:
    """
    The same pencil pair read on the bidisk: det(I - [[A1, A2], [A2, A1]] diag(z, zeta))
    equals the g-form determinant at (z + zeta, z zeta).
    """
    if r.form != DetForm.G:
        raise InputError(f"g_rep_to_d2_rep expects a g-form representation, got {r.form.value}")
    return DetRep(DetForm.D2, r.A1, r.A2, r.constant)


def strict_rescale(r: DetRep, R: float) -> DetRep:
    """
    If r represents h(s, p) = g(R s, R^2 p) (or h(z, zeta) = p(R z, R zeta)),
    (A1/R, A2/R) represents g (or p) itself, with the block norm shrunk by 1/R.
    """
    R = float(R)
    if not R > 1.0:
        raise InputError(f"rescaling factor must be > 1, got {R}")
    return DetRep(r.form, r.A1 / R, r.A2 / R, r.constant)


def block_matrix(r: DetRep) -> np.ndarray:
    return np.block([[r.A1, r.A2], [r.A2, r.A1]])


def sigma_e_target(k: KBlocks) -> Poly2:
    """
    q(sigma, e) = det(I - K diag(sigma I_n, e I_m)), rewritten in (s, p).
    """
    return change_sigma_e(det_poly(k, DetForm.SIGMAE), Coords.SP)


def quadratic_pencil_value(k: KBlocks, s: Any, p: Any) -> Any:
    """
    det(I - [[K11/2, -K12], [K21/2, -K22]] diag(s I_n, p I_m) - s^2/4 [[0, K12], [0, K22]]),
    the (n + m)-sized form of the g-polynomial before linearization.
    """
    ss, pp = np.broadcast_arrays(np.asarray(s, dtype=np.complex128), np.asarray(p, dtype=np.complex128))
    shape = ss.shape
    ss = ss.ravel()[:, None, None]
    pp = pp.ravel()[:, None, None]
    n = k.n
    left = np.concatenate([k.K11 / 2, k.K21 / 2], axis=0)
    right = np.concatenate([k.K12, k.K22], axis=0)
    stack = (
        np.eye(n + k.m)
        - np.concatenate([left * ss, -right * pp], axis=2)
        - (ss ** 2 / 4) * np.concatenate([np.zeros_like(left), right], axis=1)[None, :, :]
    )
    vals = np.linalg.det(stack).reshape(shape)
    if vals.ndim == 0:
        return complex(vals)
    return vals


# ========= Verification =========

@dataclass(frozen=True)
class DetRepReport:
    """
    residual:
        max coefficient mismatch relative to the largest target coefficient
    norm_sum / norm_diff:
        ||A1 + A2||, ||A1 - A2||; the block matrix norm is their maximum
    classification:
        "strict" / "boundary" / "expanding" for the block matrix norm
    """
    residual: float
    norm_sum: float
    norm_diff: float
    block_norm: float
    classification: str
    strict: bool


def verify(r: DetRep, target: Poly2) -> DetRepReport:
    expected = _TARGET_COORDS[r.form]
    if target.coords != expected:
        raise InputError(f"{r.form.value}-form representations are compared with {expected.value} polynomials, got {target.coords.value}")

    residual = coefficient_residual(det_poly(r, r.form), target.cleaned())
    norm_sum = op_norm(r.A1 + r.A2)
    norm_diff = op_norm(r.A1 - r.A2)
    block_norm = op_norm(block_matrix(r))
    klass = contraction_class(block_norm)
    if residual > 1e-9:
        log.warning("⚠️ determinantal representation misses its target (residual=%.3e)", residual)
    return DetRepReport(
        residual=residual,
        norm_sum=norm_sum,
        norm_diff=norm_diff,
        block_norm=block_norm,
        classification=klass,
        strict=klass == "strict",
    )


def rep_for(obj: Union[DetRep, KBlocks], form: Union[DetForm, str]) -> Union[DetRep, KBlocks]:
    """
    Resolve what det_poly should see for a requested form: K-blocks may be asked
    for any form (g and d2 go through from_K); representations only for their own
    form or the d2 reading of a g-form pair.
    """
    form = DetForm(form)
    if isinstance(obj, KBlocks):
        if form == DetForm.SIGMAE:
            return obj
        rep = from_K(obj)
        return rep if form == DetForm.G else g_rep_to_d2_rep(rep)
    if form == DetForm.SIGMAE:
        raise InputError("sigmae determinants need K blocks, not an (A1, A2) pair")
    if obj.form == form:
        return obj
    if obj.form == DetForm.G and form == DetForm.D2:
        return g_rep_to_d2_rep(obj)
    return DetRep(DetForm.G, obj.A1, obj.A2, obj.constant)
