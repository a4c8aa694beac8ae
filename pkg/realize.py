# realize.py
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from errors import DimensionMismatch, EvaluationSingularity, InputError, OutsideDomain
from numkit import as_matrix, op_norm, polar_mesh
from settings import CONTRACTION_BAND, MEMBERSHIP_MARGIN, SINGULAR_RCOND

log = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


# ========= Block helpers =========

def _block(rows: list) -> np.ndarray:
    """np.block that tolerates zero-size blocks."""
    return np.block([[np.asarray(b, dtype=np.complex128) for b in r] for r in rows])


def _dim(*candidates: int) -> int:
    for c in candidates:
        if c:
            return c
    return 0


def _shaped(M: np.ndarray, rows: int, cols: int, name: str) -> np.ndarray:
    """
    Zero-size blocks (JSON `[]`) are re-shaped to the expected empty shape;
    anything else must already match.
    """
    if M.size == 0 and (rows == 0 or cols == 0):
        return as_matrix(np.zeros((rows, cols)), name)
    if M.shape != (rows, cols):
        raise DimensionMismatch(f"{name}: expected shape {(rows, cols)}, got {M.shape}")
    return M


def contraction_class(norm: float, band: float = CONTRACTION_BAND) -> str:
    """
    "strict" below 1 - band, "boundary" within the band, "expanding" above it.
    """
    if norm < 1.0 - band:
        return "strict"
    if norm <= 1.0 + band:
        return "boundary"
    return "expanding"


# ========= Colligation types =========

@dataclass(frozen=True, eq=False)
class GeneralColligation:
    """
    Two-variable colligation with state space H1 (+) H2:

        M^ = [[A11, A12, B1],
              [A21, A22, B2],
              [C1,  C2,  D ]]

    f(z, zeta) = D + [C1 C2] Z (I - A Z)^{-1} [B1; B2],  Z = diag(z I_h1, zeta I_h2).
    Contractivity is not enforced here; see check_colligation.
    """
    A11: np.ndarray
    A12: np.ndarray
    A21: np.ndarray
    A22: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    D: np.ndarray

    def __post_init__(self) -> None:
        m = {k: as_matrix(getattr(self, k), k) for k in ("A11", "A12", "A21", "A22", "B1", "B2", "C1", "C2", "D")}
        y, u = m["D"].shape
        h1 = _dim(m["A11"].shape[0], m["A12"].shape[0], m["B1"].shape[0], m["C1"].shape[1], m["A21"].shape[1])
        h2 = _dim(m["A22"].shape[0], m["A21"].shape[0], m["B2"].shape[0], m["C2"].shape[1], m["A12"].shape[1])
        shapes = {
            "A11": (h1, h1), "A12": (h1, h2), "A21": (h2, h1), "A22": (h2, h2),
            "B1": (h1, u), "B2": (h2, u), "C1": (y, h1), "C2": (y, h2),
        }
        for k, (r, c) in shapes.items():
            object.__setattr__(self, k, _shaped(m[k], r, c, k))
        object.__setattr__(self, "D", m["D"])

    @property
    def h1(self) -> int:
        return self.A11.shape[0]

    @property
    def h2(self) -> int:
        return self.A22.shape[0]

    @property
    def io_dims(self) -> Tuple[int, int]:
        """(output y, input u)."""
        return self.D.shape

    def state_matrix(self) -> np.ndarray:
        return _block([[self.A11, self.A12], [self.A21, self.A22]])

    def input_matrix(self) -> np.ndarray:
        return _block([[self.B1], [self.B2]])

    def output_matrix(self) -> np.ndarray:
        return _block([[self.C1, self.C2]])

    def assembled(self) -> np.ndarray:
        return _block([
            [self.A11, self.A12, self.B1],
            [self.A21, self.A22, self.B2],
            [self.C1, self.C2, self.D],
        ])


@dataclass(frozen=True, eq=False)
class SymmetricColligation:
    """
    M = [[A1, A2, B],
         [A2, A1, B],
         [C,  C,  D]]
    """
    A1: np.ndarray
    A2: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self) -> None:
        m = {k: as_matrix(getattr(self, k), k) for k in ("A1", "A2", "B", "C", "D")}
        y, u = m["D"].shape
        h = _dim(m["A1"].shape[0], m["A2"].shape[0], m["B"].shape[0], m["C"].shape[1])
        for k, (r, c) in {"A1": (h, h), "A2": (h, h), "B": (h, u), "C": (y, h)}.items():
            object.__setattr__(self, k, _shaped(m[k], r, c, k))
        object.__setattr__(self, "D", m["D"])

    @property
    def h(self) -> int:
        return self.A1.shape[0]

    def assembled(self) -> np.ndarray:
        return _block([
            [self.A1, self.A2, self.B],
            [self.A2, self.A1, self.B],
            [self.C, self.C, self.D],
        ])

    def as_general(self) -> GeneralColligation:
        return GeneralColligation(
            A11=self.A1, A12=self.A2, A21=self.A2, A22=self.A1,
            B1=self.B, B2=self.B, C1=self.C, C2=self.C, D=self.D,
        )


@dataclass(frozen=True, eq=False)
class GammaColligation:
    """
    M~ = [[alpha1, 0,      beta ],
          [0,      alpha2, 0    ],
          [gamma,  0,      delta]]

    g(s, p) = delta + 1/2 gamma (s I - 2 p alpha2)(I - s/2 (alpha1 + alpha2) + p alpha1 alpha2)^{-1} beta
    """
    alpha1: np.ndarray
    alpha2: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray

    def __post_init__(self) -> None:
        m = {k: as_matrix(getattr(self, k), k) for k in ("alpha1", "alpha2", "beta", "gamma", "delta")}
        y, u = m["delta"].shape
        h = _dim(m["alpha1"].shape[0], m["alpha2"].shape[0], m["beta"].shape[0], m["gamma"].shape[1])
        for k, (r, c) in {"alpha1": (h, h), "alpha2": (h, h), "beta": (h, u), "gamma": (y, h)}.items():
            object.__setattr__(self, k, _shaped(m[k], r, c, k))
        object.__setattr__(self, "delta", m["delta"])

    @property
    def h(self) -> int:
        return self.alpha1.shape[0]

    def assembled(self) -> np.ndarray:
        h = self.h
        y, u = self.delta.shape
        zh = np.zeros((h, h))
        return _block([
            [self.alpha1, zh, self.beta],
            [zh, self.alpha2, np.zeros((h, u))],
            [self.gamma, np.zeros((y, h)), self.delta],
        ])


AnyColligation = Union[GeneralColligation, SymmetricColligation, GammaColligation]


def from_lurking_matrix(V: Any, h1: int, h2: int, u: int = 1, y: int = 1) -> GeneralColligation:
    """
    Read a lurking contraction V = [[D, C1, C2], [B1, A11, A12], [B2, A21, A22]]
    (input/output channel first) as a general colligation with state dims (h1, h2).
    """
    V = as_matrix(V, "V")
    if V.shape != (y + h1 + h2, u + h1 + h2):
        raise DimensionMismatch(
            f"lurking matrix: expected shape {(y + h1 + h2, u + h1 + h2)}, got {V.shape}"
        )
    r0, r1 = y, y + h1
    c0, c1 = u, u + h1
    return GeneralColligation(
        A11=V[r0:r1, c0:c1], A12=V[r0:r1, c1:], A21=V[r1:, c0:c1], A22=V[r1:, c1:],
        B1=V[r0:r1, :c0], B2=V[r1:, :c0],
        C1=V[:r0, c0:c1], C2=V[:r0, c1:],
        D=V[:r0, :c0],
    )


# ========= Pointwise evaluation =========

def _check_disk(z: complex, allow_boundary: bool, name: str) -> None:
    r = abs(z)
    if r < 1.0:
        return
    if allow_boundary and r <= 1.0 + MEMBERSHIP_MARGIN:
        return
    raise OutsideDomain(
        f"{name}={z} is outside the open unit disk" + ("" if allow_boundary else " (pass allow_boundary for |.|=1)"),
        {name: [z.real, z.imag]},
    )


def _lu_solve(M: np.ndarray, rhs: np.ndarray, point: Any) -> np.ndarray:
    """
    Dense LU with partial pivoting; a reciprocal condition estimate below
    SINGULAR_RCOND is reported as an evaluation singularity.
    """
    if M.shape[0] == 0:
        return np.zeros((0, rhs.shape[1]), dtype=np.complex128)
    anorm = float(np.linalg.norm(M, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", la.LinAlgWarning)
        lu, piv = la.lu_factor(M, check_finite=False)
    rcond = 0.0
    if anorm > 0.0:
        rcond, _ = lapack.zgecon(lu, anorm, norm="1")
        rcond = float(rcond)
    if not np.isfinite(rcond) or rcond < SINGULAR_RCOND:
        raise EvaluationSingularity(f"singular resolvent at {point}", point=point, rcond=rcond)
    return la.lu_solve((lu, piv), rhs, check_finite=False)


def _point_payload(*xs: complex) -> list:
    return [[complex(x).real, complex(x).imag] for x in xs]


def eval_general(c: GeneralColligation, z: complex, zeta: complex, allow_boundary: bool = False) -> np.ndarray:
    z, zeta = complex(z), complex(zeta)
    _check_disk(z, allow_boundary, "z")
    _check_disk(zeta, allow_boundary, "zeta")
    if c.h1 + c.h2 == 0:
        return np.array(c.D)

    zdiag = np.concatenate([np.full(c.h1, z), np.full(c.h2, zeta)])
    A = c.state_matrix()
    M = np.eye(A.shape[0]) - A * zdiag[None, :]
    X = _lu_solve(M, c.input_matrix(), _point_payload(z, zeta))
    return c.D + c.output_matrix() @ (zdiag[:, None] * X)


def eval_symmetric(c: SymmetricColligation, z: complex, zeta: complex, allow_boundary: bool = False) -> np.ndarray:
    return eval_general(c.as_general(), z, zeta, allow_boundary)


def eval_gamma(c: GammaColligation, s: complex, p: complex, allow_boundary: bool = False) -> np.ndarray:
    from pick import lift_point

    s, p = complex(s), complex(p)
    lift = lift_point(s, p)
    if not lift.in_G:
        on_closure = max(abs(lift.z), abs(lift.zeta)) <= 1.0 + MEMBERSHIP_MARGIN
        if not (allow_boundary and on_closure):
            raise OutsideDomain(f"(s, p) = ({s}, {p}) is outside the symmetrized bidisk", {"s": [s.real, s.imag], "p": [p.real, p.imag]})
    if c.h == 0:
        return np.array(c.delta)

    a1, a2 = c.alpha1, c.alpha2
    middle = np.eye(c.h) - (s / 2) * (a1 + a2) + p * (a1 @ a2)
    Y = _lu_solve(middle, c.beta, _point_payload(s, p))
    return c.delta + 0.5 * c.gamma @ (s * Y - 2 * p * (a2 @ Y))


def eval_gamma_resolvent_form(c: GammaColligation, z: complex, zeta: complex) -> np.ndarray:
    """
    The same transfer function written through s^ = 1/z + 1/zeta, d^ = 1/z - 1/zeta:

        delta + gamma (s^/2 - alpha1 - d^^2/4 (s^/2 - alpha2)^{-1})^{-1} beta

    Requires z, zeta != 0; equals eval_gamma(c, z + zeta, z zeta).
    """
    z, zeta = complex(z), complex(zeta)
    if z == 0 or zeta == 0:
        raise OutsideDomain("resolvent form needs z != 0 and zeta != 0", {"point": _point_payload(z, zeta)})
    if c.h == 0:
        return np.array(c.delta)
    s_hat = 1 / z + 1 / zeta
    d_hat = 1 / z - 1 / zeta
    eye = np.eye(c.h)
    point = _point_payload(z, zeta)
    inner = _lu_solve(s_hat / 2 * eye - c.alpha2, eye, point)
    outer = s_hat / 2 * eye - c.alpha1 - (d_hat ** 2 / 4) * inner
    return c.delta + c.gamma @ _lu_solve(outer, c.beta, point)


def evaluate(c: AnyColligation, x: complex, y: complex, allow_boundary: bool = False) -> np.ndarray:
    if isinstance(c, GammaColligation):
        return eval_gamma(c, x, y, allow_boundary)
    if isinstance(c, SymmetricColligation):
        return eval_symmetric(c, x, y, allow_boundary)
    return eval_general(c, x, y, allow_boundary)


# ========= Structure conversions =========

def symmetrize(c: GeneralColligation) -> SymmetricColligation:
    """
    Symmetric colligation whose transfer function is (f(z, zeta) + f(zeta, z)) / 2:
    A1 = diag(A11, A22), A2 = [[0, A12], [A21, 0]], B = [B1; B2]/sqrt2, C = [C1 C2]/sqrt2.
    """
    h1, h2 = c.h1, c.h2
    A1 = _block([[c.A11, np.zeros((h1, h2))], [np.zeros((h2, h1)), c.A22]])
    A2 = _block([[np.zeros((h1, h1)), c.A12], [c.A21, np.zeros((h2, h2))]])
    return SymmetricColligation(
        A1=A1,
        A2=A2,
        B=c.input_matrix() / SQRT2,
        C=c.output_matrix() / SQRT2,
        D=c.D,
    )


def to_gamma(c: SymmetricColligation) -> GammaColligation:
    return GammaColligation(
        alpha1=c.A1 + c.A2,
        alpha2=c.A1 - c.A2,
        beta=SQRT2 * c.B,
        gamma=SQRT2 * c.C,
        delta=c.D,
    )


def general_to_gamma(c: GeneralColligation) -> GammaColligation:
    """
    Direct formulas for to_gamma(symmetrize(c)):
    alpha1 = [[A11, A12], [A21, A22]], alpha2 = [[A11, -A12], [-A21, A22]],
    beta = [B1; B2], gamma = [C1 C2], delta = D.
    """
    return GammaColligation(
        alpha1=c.state_matrix(),
        alpha2=_block([[c.A11, -c.A12], [-c.A21, c.A22]]),
        beta=c.input_matrix(),
        gamma=c.output_matrix(),
        delta=c.D,
    )


# ---------- conjugation identities ----------

def symmetrizing_isometries(h1: int, h2: int, u: int, y: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    (V_in, V_out) with symmetrize(c).assembled() = V_out* diag(M^, M^) V_in.
    Column blocks of V_in: (H1, H2 | H1, H2 | U); row blocks: the two copies
    of (H1, H2, U).
    """
    def build(w: int) -> np.ndarray:
        h = h1 + h2
        V = np.zeros((2 * (h + w), 2 * h + w), dtype=np.complex128)
        c_h1a, c_h2a, c_h1b, c_h2b, c_w = 0, h1, h, h + h1, 2 * h
        r_h1, r_h2, r_w = 0, h1, h
        off = h + w
        V[r_h1:r_h1 + h1, c_h1a:c_h1a + h1] = np.eye(h1)
        V[r_h2:r_h2 + h2, c_h2b:c_h2b + h2] = np.eye(h2)
        V[r_w:r_w + w, c_w:c_w + w] = np.eye(w) / SQRT2
        V[off + r_h1:off + r_h1 + h1, c_h1b:c_h1b + h1] = np.eye(h1)
        V[off + r_h2:off + r_h2 + h2, c_h2a:c_h2a + h2] = np.eye(h2)
        V[off + r_w:off + r_w + w, c_w:c_w + w] = np.eye(w) / SQRT2
        return V

    return build(u), build(y)


def symmetrize_identity_residual(c: GeneralColligation) -> float:
    y, u = c.io_dims
    V_in, V_out = symmetrizing_isometries(c.h1, c.h2, u, y)
    M_hat = c.assembled()
    doubled = la.block_diag(M_hat, M_hat)
    conj = V_out.conj().T @ doubled @ V_in
    return float(np.max(np.abs(conj - symmetrize(c).assembled()), initial=0.0))


def gamma_unitary(h: int) -> np.ndarray:
    """U = 1/sqrt2 [[I, I], [I, -I]] on H (+) H."""
    eye = np.eye(h)
    return _block([[eye, eye], [eye, -eye]]) / SQRT2


def gamma_identity_residual(c: SymmetricColligation) -> float:
    """
    max |V* M V - M~| with V = U (+) I, i.e. how exactly to_gamma(c) is a
    unitary conjugate of c.
    """
    y, u = c.D.shape
    U = gamma_unitary(c.h)
    V_in = la.block_diag(U, np.eye(u))
    V_out = la.block_diag(U, np.eye(y))
    conj = V_out.conj().T @ c.assembled() @ V_in
    return float(np.max(np.abs(conj - to_gamma(c).assembled()), initial=0.0))


# ========= Diagnostics =========

@dataclass(frozen=True)
class ColligationReport:
    kind: str
    norm: float
    classification: str
    contractive: bool
    dims: Dict[str, int]
    identity_residual: Optional[float] = None


def _kind(c: AnyColligation) -> str:
    if isinstance(c, GammaColligation):
        return "gamma"
    if isinstance(c, SymmetricColligation):
        return "symmetric"
    if isinstance(c, GeneralColligation):
        return "general"
    raise InputError(f"not a colligation: {type(c).__name__}")


def check_colligation(c: AnyColligation) -> ColligationReport:
    """
    Operator norm of the assembled colligation matrix plus structural dims.
    For general colligations the symmetrization identity residual is included,
    for symmetric ones the Gamma-conjugation residual.
    """
    kind = _kind(c)
    norm = op_norm(c.assembled())
    klass = contraction_class(norm)
    if kind == "general":
        y, u = c.io_dims
        dims = {"h1": c.h1, "h2": c.h2, "u": u, "y": y}
        residual = symmetrize_identity_residual(c)
    elif kind == "symmetric":
        y, u = c.D.shape
        dims = {"h": c.h, "u": u, "y": y}
        residual = gamma_identity_residual(c)
    else:
        y, u = c.delta.shape
        dims = {"h": c.h, "u": u, "y": y}
        residual = None
    if klass == "expanding":
        log.warning("⚠️ colligation is not contractive (norm=%.6g)", norm)
    return ColligationReport(
        kind=kind,
        norm=norm,
        classification=klass,
        contractive=klass != "expanding",
        dims=dims,
        identity_residual=residual,
    )


@dataclass(frozen=True)
class SupNormReport:
    max_norm: float
    argmax: Tuple[complex, complex]
    samples: int
    skipped: int
    within_schur_bound: bool
    domain: str = field(default="bidisk")


def _batched_values(c: AnyColligation, z: complex, zetas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Transfer-function values at (z, zeta_k) for all k, shape (N, y, u),
    plus a mask of points whose resolvent was numerically singular.
    For Gamma colligations the point is (z + zeta, z zeta).
    """
    N = zetas.size
    if isinstance(c, GammaColligation):
        s = z + zetas
        p = z * zetas
        if c.h == 0:
            return np.broadcast_to(c.delta, (N,) + c.delta.shape), np.zeros(N, dtype=bool)
        a1, a2 = c.alpha1, c.alpha2
        M = np.eye(c.h) - (s / 2)[:, None, None] * (a1 + a2) + p[:, None, None] * (a1 @ a2)
        rhs = c.beta
    else:
        g = c.as_general() if isinstance(c, SymmetricColligation) else c
        if g.h1 + g.h2 == 0:
            return np.broadcast_to(g.D, (N,) + g.D.shape), np.zeros(N, dtype=bool)
        zdiag = np.concatenate([np.full((N, g.h1), z), np.repeat(zetas[:, None], g.h2, axis=1)], axis=1)
        M = np.eye(g.h1 + g.h2) - g.state_matrix()[None, :, :] * zdiag[:, None, :]
        rhs = g.input_matrix()

    sv = np.linalg.svd(M, compute_uv=False)
    singular = sv[:, -1] < SINGULAR_RCOND * sv[:, 0]
    if np.any(singular):
        M = M.copy()
        M[singular] = np.eye(M.shape[1])
    X = np.linalg.solve(M, np.broadcast_to(rhs, (N,) + rhs.shape))

    if isinstance(c, GammaColligation):
        T = s[:, None, None] * X - 2 * p[:, None, None] * (c.alpha2 @ X)
        F = c.delta + 0.5 * (c.gamma @ T)
    else:
        F = g.D + g.output_matrix() @ (zdiag[:, :, None] * X)
    return F, singular


def sup_norm_grid(c: AnyColligation, grid: int, allow_boundary: bool = False) -> SupNormReport:
    """
    Largest singular value of the transfer function over a polar sample of the
    bidisk (or its image in the symmetrized bidisk for Gamma colligations).
    Singular sample points are counted and skipped.
    """
    _kind(c)
    r_max = 1.0 if allow_boundary else 1.0 - 1.0 / (2 * grid)
    mesh = polar_mesh(grid, r_max)

    best = -1.0
    best_at: Tuple[complex, complex] = (0j, 0j)
    skipped = 0
    for z in mesh:
        F, singular = _batched_values(c, complex(z), mesh)
        skipped += int(np.count_nonzero(singular))
        if F.shape[1] == 1 and F.shape[2] == 1:
            norms = np.abs(F[:, 0, 0])
        else:
            norms = np.linalg.svd(F, compute_uv=False)[:, 0]
        norms = np.where(singular, -np.inf, norms)
        k = int(np.argmax(norms))
        if norms[k] > best:
            best = float(norms[k])
            zeta = complex(mesh[k])
            best_at = (complex(z) + zeta, complex(z) * zeta) if isinstance(c, GammaColligation) else (complex(z), zeta)

    if skipped:
        log.warning("⚠️ sup_norm_grid skipped %d singular sample points", skipped)
    return SupNormReport(
        max_norm=best,
        argmax=best_at,
        samples=int(mesh.size ** 2),
        skipped=skipped,
        within_schur_bound=best <= 1.0 + 1e-9,
        domain="G" if isinstance(c, GammaColligation) else "bidisk",
    )
