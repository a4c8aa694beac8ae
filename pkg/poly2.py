# poly2.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Any, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d

from errors import InputError
from numkit import polar_mesh
from settings import COEFF_CLEANUP_REL

if TYPE_CHECKING:
    from detrep import DetRep, KBlocks

log = logging.getLogger(__name__)

Number = Union[int, float, complex]


class Coords(str, Enum):
    ZZETA = "zzeta"     # (z, zeta) on the bidisk
    SP = "sp"           # (s, p) = (z + zeta, z zeta)
    SIGMAE = "sigmae"   # (sigma, e) = (s/2, s^2/4 - p)


class DetForm(str, Enum):
    D2 = "d2"
    G = "g"
    SIGMAE = "sigmae"


class Domain(str, Enum):
    CLOSED_BIDISK = "closed_bidisk"
    CLOSED_G = "closed_g"


_FORM_COORDS = {DetForm.D2: Coords.ZZETA, DetForm.G: Coords.SP, DetForm.SIGMAE: Coords.SIGMAE}


# ========= Bivariate polynomial =========

@dataclass(frozen=True, eq=False)
class Poly2:
    """
    Dense bivariate polynomial: coeffs[i, j] multiplies x^i y^j, where (x, y)
    are the variables named by `coords`. Trailing all-zero rows and columns are
    trimmed on construction, so equal polynomials have equal shapes.
    """
    coords: Coords
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim == 0:
            c = c.reshape(1, 1)
        if c.ndim != 2 or c.size == 0:
            raise InputError(f"Poly2 coefficients must be a non-empty 2-D array, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InputError("Poly2 coefficients must be finite")
        c = _trim(c)
        c.setflags(write=False)
        object.__setattr__(self, "coords", Coords(self.coords))
        object.__setattr__(self, "coeffs", c)

    @property
    def deg(self) -> Tuple[int, int]:
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    @classmethod
    def constant(cls, value: Number, coords: Coords) -> "Poly2":
        return cls(coords, np.array([[value]], dtype=np.complex128))

    @classmethod
    def monomial(cls, i: int, j: int, coords: Coords, value: Number = 1.0) -> "Poly2":
        c = np.zeros((i + 1, j + 1), dtype=np.complex128)
        c[i, j] = value
        return cls(coords, c)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    # ---------- arithmetic ----------

    def _check_coords(self, other: "Poly2") -> None:
        if other.coords != self.coords:
            raise InputError(f"coordinate mismatch: {self.coords.value} vs {other.coords.value}")

    def __add__(self, other: Union["Poly2", Number]) -> "Poly2":
        if not isinstance(other, Poly2):
            other = Poly2.constant(other, self.coords)
        self._check_coords(other)
        a, b = _pad_common(self.coeffs, other.coeffs)
        return Poly2(self.coords, a + b)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2(self.coords, -self.coeffs)

    def __sub__(self, other: Union["Poly2", Number]) -> "Poly2":
        return self + (-other)

    def __rsub__(self, other: Number) -> "Poly2":
        return (-self) + other

    def __mul__(self, other: Union["Poly2", Number]) -> "Poly2":
        if not isinstance(other, Poly2):
            return Poly2(self.coords, self.coeffs * complex(other))
        self._check_coords(other)
        return Poly2(self.coords, convolve2d(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, scalar: Number) -> "Poly2":
        return Poly2(self.coords, self.coeffs / complex(scalar))

    def __pow__(self, k: int) -> "Poly2":
        out = Poly2.constant(1.0, self.coords)
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x: Any, y: Any) -> Any:
        return eval_poly(self, x, y)

    def cleaned(self, rel: float = COEFF_CLEANUP_REL) -> "Poly2":
        """
        Zero real and imaginary parts below rel * (largest coefficient modulus).
        """
        c = np.array(self.coeffs)
        scale = float(np.max(np.abs(c)))
        if scale == 0.0:
            return self
        cut = rel * scale
        re = np.where(np.abs(c.real) < cut, 0.0, c.real)
        im = np.where(np.abs(c.imag) < cut, 0.0, c.imag)
        return Poly2(self.coords, re + 1j * im)


def _trim(c: np.ndarray) -> np.ndarray:
    rows = np.flatnonzero(np.any(c != 0, axis=1))
    cols = np.flatnonzero(np.any(c != 0, axis=0))
    if rows.size == 0:
        return np.zeros((1, 1), dtype=np.complex128)
    return np.array(c[: rows[-1] + 1, : cols[-1] + 1])


def _pad_common(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
    pa = np.zeros(shape, dtype=np.complex128)
    pb = np.zeros(shape, dtype=np.complex128)
    pa[: a.shape[0], : a.shape[1]] = a
    pb[: b.shape[0], : b.shape[1]] = b
    return pa, pb


def coefficient_residual(f: Poly2, target: Poly2) -> float:
    """
    Max coefficient difference relative to the largest target coefficient
    (absolute when the target is zero).
    """
    a, b = _pad_common(f.coeffs, target.coeffs)
    scale = max(1e-300, float(np.max(np.abs(b))))
    diff = float(np.max(np.abs(a - b)))
    return diff / scale if np.any(b) else diff


# ========= Evaluation =========

def eval_poly(f: Poly2, x: Any, y: Any) -> Any:
    """
    Horner evaluation of sum c_ij x^i y^j; x and y broadcast like numpy arrays.
    """
    xs, ys = np.broadcast_arrays(np.asarray(x, dtype=np.complex128), np.asarray(y, dtype=np.complex128))
    val = npoly.polyval2d(xs, ys, f.coeffs)
    if np.ndim(val) == 0:
        return complex(val)
    return val


def is_symmetric(f: Poly2, atol: float = 1e-14) -> bool:
    if f.coords != Coords.ZZETA:
        raise InputError(f"is_symmetric expects zzeta coordinates, got {f.coords.value}")
    n = max(f.coeffs.shape)
    c, _ = _pad_common(f.coeffs, np.zeros((n, n)))
    scale = max(1.0, float(np.max(np.abs(c))))
    return bool(np.max(np.abs(c - c.T)) <= atol * scale)


def swap(f: Poly2) -> Poly2:
    """f(y, x)."""
    return Poly2(f.coords, f.coeffs.T)


def symmetric_average(f: Poly2) -> Poly2:
    """
    (f(z, zeta) + f(zeta, z)) / 2, which is symmetric and agrees with f on
    any data set closed under swapping where f already takes swap-invariant values.
    """
    if f.coords != Coords.ZZETA:
        raise InputError(f"symmetric_average expects zzeta coordinates, got {f.coords.value}")
    return (f + swap(f)) / 2


def substitute(f: Poly2, X: Poly2, Y: Poly2) -> Poly2:
    """
    f(X, Y) with X, Y polynomials in a common coordinate system; exact
    coefficient expansion by Horner's scheme in the first variable.
    """
    if X.coords != Y.coords:
        raise InputError("substitute: X and Y must share coordinates")
    coords = X.coords
    d1, d2 = f.deg

    y_pows = [Poly2.constant(1.0, coords)]
    for _ in range(d2):
        y_pows.append(y_pows[-1] * Y)

    def row(i: int) -> Poly2:
        acc = Poly2.constant(0.0, coords)
        for j in range(d2 + 1):
            if f.coeffs[i, j] != 0:
                acc = acc + y_pows[j] * f.coeffs[i, j]
        return acc

    out = row(d1)
    for i in range(d1 - 1, -1, -1):
        out = out * X + row(i)
    return out


# ========= Symmetric basis conversion =========

def _zz_s() -> Poly2:
    return Poly2(Coords.ZZETA, np.array([[0, 1], [1, 0]], dtype=np.complex128))


def _zz_p() -> Poly2:
    return Poly2.monomial(1, 1, Coords.ZZETA)


def compose_sym(g: Poly2) -> Poly2:
    """
    f(z, zeta) = g(z + zeta, z zeta).
    """
    if g.coords != Coords.SP:
        raise InputError(f"compose_sym expects sp coordinates, got {g.coords.value}")
    return substitute(g, _zz_s(), _zz_p())


def power_sums(k_max: int) -> list:
    """
    h_k = z^k + zeta^k written in (s, p): h_0 = 2, h_1 = s, h_k = s h_{k-1} - p h_{k-2}.
    """
    s = Poly2.monomial(1, 0, Coords.SP)
    p = Poly2.monomial(0, 1, Coords.SP)
    h = [Poly2.constant(2.0, Coords.SP), s]
    for _ in range(2, k_max + 1):
        h.append(s * h[-1] - p * h[-2])
    return h[: k_max + 1]


def to_sp_basis(f: Poly2) -> Poly2:
    """
    Inverse of compose_sym on symmetric polynomials:
    z^a zeta^b + z^b zeta^a = p^b h_{a-b} for a > b, and (z zeta)^a = p^a.
    """
    if not is_symmetric(f):
        raise InputError("to_sp_basis needs a symmetric polynomial")
    c = f.coeffs
    n = max(c.shape)
    c, _ = _pad_common(c, np.zeros((n, n)))
    h = power_sums(n)

    g = Poly2.constant(0.0, Coords.SP)
    for a in range(n):
        for b in range(a + 1):
            cab = c[a, b]
            if cab == 0:
                continue
            pb = Poly2.monomial(0, b, Coords.SP)
            if a == b:
                g = g + pb * cab
            else:
                g = g + pb * h[a - b] * cab
    return g


def change_sigma_e(f: Poly2, target: Union[Coords, str]) -> Poly2:
    """
    sp -> sigmae:  s = 2 sigma, p = sigma^2 - e
    sigmae -> sp:  sigma = s / 2, e = s^2 / 4 - p
    """
    target = Coords(target)
    if f.coords == Coords.SP and target == Coords.SIGMAE:
        sigma = Poly2.monomial(1, 0, Coords.SIGMAE)
        e = Poly2.monomial(0, 1, Coords.SIGMAE)
        return substitute(f, sigma * 2, sigma * sigma - e)
    if f.coords == Coords.SIGMAE and target == Coords.SP:
        s = Poly2.monomial(1, 0, Coords.SP)
        p = Poly2.monomial(0, 1, Coords.SP)
        return substitute(f, s / 2, s * s / 4 - p)
    raise InputError(f"change_sigma_e: cannot go from {f.coords.value} to {target.value}")


def convert(f: Poly2, target: Union[Coords, str]) -> Poly2:
    """
    Any supported change of coordinates, routed through sp.
    """
    target = Coords(target)
    if f.coords == target:
        return f
    if f.coords == Coords.ZZETA:
        g = to_sp_basis(f)
        return g if target == Coords.SP else change_sigma_e(g, target)
    if f.coords == Coords.SIGMAE:
        g = change_sigma_e(f, Coords.SP)
        return g if target == Coords.SP else compose_sym(g)
    # sp
    return compose_sym(f) if target == Coords.ZZETA else change_sigma_e(f, target)


# ========= Determinant polynomials =========

def _pencil_stack(rep: Any, form: DetForm, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, complex]:
    x = x[:, None, None]
    y = y[:, None, None]
    if form == DetForm.SIGMAE:
        K = np.asarray(rep.K, dtype=np.complex128)
        n = rep.n
        size = K.shape[0]
        stack = np.eye(size) - np.concatenate([K[:, :n] * x, K[:, n:] * y], axis=2)
        return stack, 1.0

    A1 = np.asarray(rep.A1, dtype=np.complex128)
    A2 = np.asarray(rep.A2, dtype=np.complex128)
    ell = A1.shape[0]
    if form == DetForm.D2:
        top = np.concatenate([A1 * x, A2 * y], axis=2)
        bottom = np.concatenate([A2 * x, A1 * y], axis=2)
        stack = np.eye(2 * ell) - np.concatenate([top, bottom], axis=1)
    else:
        prod = (A1 + A2) @ (A1 - A2)
        stack = np.eye(ell) - A1 * x + prod * y
    return stack, complex(rep.constant)


def det_value(rep: Union["DetRep", "KBlocks"], form: Union[DetForm, str], x: Any, y: Any) -> Any:
    """
    Direct determinant evaluation:
      d2:     constant * det(I - [[A1, A2], [A2, A1]] diag(x I, y I))
      g:      constant * det(I - x A1 + y (A1 + A2)(A1 - A2))
      sigmae: det(I - K diag(x I_n, y I_m))
    """
    form = DetForm(form)
    xs, ys = np.broadcast_arrays(np.asarray(x, dtype=np.complex128), np.asarray(y, dtype=np.complex128))
    shape = xs.shape
    stack, const = _pencil_stack(rep, form, xs.ravel(), ys.ravel())
    vals = const * np.linalg.det(stack)
    vals = vals.reshape(shape)
    if vals.ndim == 0:
        return complex(vals)
    return vals


def det_degrees(rep: Union["DetRep", "KBlocks"], form: Union[DetForm, str]) -> Tuple[int, int]:
    form = DetForm(form)
    if form == DetForm.SIGMAE:
        return rep.n, rep.m
    ell = np.asarray(rep.A1).shape[0]
    return ell, ell


def det_poly(rep: Union["DetRep", "KBlocks"], form: Union[DetForm, str], cleanup_rel: float = COEFF_CLEANUP_REL) -> Poly2:
    """
    Coefficients of the determinant polynomial, recovered from its values on a
    tensor grid of roots of unity ((degree + 1) points per variable) by a 2-D DFT.
    """
    form = DetForm(form)
    d1, d2 = det_degrees(rep, form)
    n1, n2 = d1 + 1, d2 + 1
    w1 = np.exp(2j * np.pi * np.arange(n1) / n1)
    w2 = np.exp(2j * np.pi * np.arange(n2) / n2)
    X, Y = np.meshgrid(w1, w2, indexing="ij")
    values = det_value(rep, form, X, Y)
    coeffs = np.fft.fft2(values) / (n1 * n2)
    return Poly2(_FORM_COORDS[form], coeffs).cleaned(cleanup_rel)


# ========= Root-freeness sampling =========

@dataclass(frozen=True)
class RootScan:
    """
    min_modulus / argmin:
        smallest sampled |f| and where (in f's domain coordinates)
    argmin_bidisk:
        the bidisk point that produced it (same as argmin on the bidisk)
    samples:
        number of points evaluated
    """
    min_modulus: float
    argmin: Tuple[complex, complex]
    argmin_bidisk: Tuple[complex, complex]
    samples: int


def no_roots_grid(f: Poly2, domain: Union[Domain, str], grid: int) -> RootScan:
    """
    Sample |f| on the closed bidisk, or on the closed symmetrized bidisk via
    its parametrization (z + zeta, z zeta). A sampling heuristic, not a proof.
    """
    domain = Domain(domain)
    mesh = polar_mesh(grid, 1.0)

    if domain == Domain.CLOSED_G:
        if f.coords == Coords.ZZETA:
            raise InputError("closed_g sampling needs a polynomial in sp or sigmae coordinates")
        h = compose_sym(convert(f, Coords.SP))
    else:
        h = f

    values = np.abs(npoly.polygrid2d(mesh, mesh, h.coeffs))
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    z, zeta = complex(mesh[i]), complex(mesh[j])
    if domain == Domain.CLOSED_G:
        arg = (z + zeta, z * zeta)
    else:
        arg = (z, zeta)
    return RootScan(
        min_modulus=float(values[i, j]),
        argmin=arg,
        argmin_bidisk=(z, zeta),
        samples=int(values.size),
    )
