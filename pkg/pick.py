# pick.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from errors import (
    CertificateTooWeak,
    DimensionMismatch,
    InconsistentData,
    OutsideDomain,
    SchurToolError,
    StageFailure,
)
from numkit import SpanMap, eig_min, gram_factor, psd_project, solve_on_span
from realize import (
    GammaColligation,
    GeneralColligation,
    SupNormReport,
    SymmetricColligation,
    eval_gamma,
    eval_symmetric,
    from_lurking_matrix,
    sup_norm_grid,
    symmetrize,
    to_gamma,
)
from settings import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    LURKING_RESIDUAL_LIMIT,
    MEMBERSHIP_MARGIN,
    RANK_TOL_REL,
    SolverOptions,
    get_solver_options,
)

log = logging.getLogger(__name__)

NODE_MATCH_TOL = 1e-12

T = TypeVar("T")


# ========= Points of the symmetrized bidisk =========

@dataclass(frozen=True)
class Lift:
    """
    The roots (z, zeta) of t^2 - s t + p, ordered by (real, imag);
    in_G is True when both lie strictly inside the unit disk.
    """
    z: complex
    zeta: complex
    in_G: bool

    @property
    def coincident(self) -> bool:
        return self.z == self.zeta


def _order_key(t: complex) -> Tuple[float, float]:
    return round(t.real, 12), round(t.imag, 12)


def lift_point(s: complex, p: complex) -> Lift:
    s, p = complex(s), complex(p)
    disc = s * s - 4 * p
    if abs(disc) <= 1e-12 * max(1.0, abs(s) ** 2):
        disc = 0j
    root = np.sqrt(disc)
    # larger-modulus root first, the other from the product to avoid cancellation
    big = (s + root) / 2 if abs(s + root) >= abs(s - root) else (s - root) / 2
    if big == 0:
        small = 0j
    elif disc == 0:
        small = big
    else:
        small = p / big
    z, zeta = sorted([complex(big), complex(small)], key=_order_key)
    in_G = max(abs(z), abs(zeta)) < 1.0 - MEMBERSHIP_MARGIN
    return Lift(z=z, zeta=zeta, in_G=in_G)


# ========= Problems =========

@dataclass(frozen=True)
class PickProblemG:
    """
    Find g in the Schur class of G with g(s_i, p_i) = w_i.
    """
    nodes: Tuple[Tuple[complex, complex], ...]
    values: Tuple[complex, ...]

    def __post_init__(self) -> None:
        nodes = tuple((complex(s), complex(p)) for s, p in self.nodes)
        values = tuple(complex(w) for w in self.values)
        if len(nodes) != len(values):
            raise DimensionMismatch(f"{len(nodes)} nodes but {len(values)} values")
        for i, (s, p) in enumerate(nodes):
            if not lift_point(s, p).in_G:
                raise OutsideDomain(f"node {i} (s={s}, p={p}) is not in the symmetrized bidisk", {"node": i})
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class PickProblemD2:
    """
    Bidisk data closed under swapping: orbits group node indices that are
    swaps of each other (one index for z = zeta, two otherwise) and must share a value.
    """
    nodes: Tuple[Tuple[complex, complex], ...]
    values: Tuple[complex, ...]
    orbits: Tuple[Tuple[int, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        nodes = tuple((complex(z), complex(zeta)) for z, zeta in self.nodes)
        values = tuple(complex(w) for w in self.values)
        if len(nodes) != len(values):
            raise DimensionMismatch(f"{len(nodes)} nodes but {len(values)} values")
        for i, (z, zeta) in enumerate(nodes):
            if max(abs(z), abs(zeta)) >= 1.0:
                raise OutsideDomain(f"node {i} ({z}, {zeta}) is not in the open bidisk", {"node": i})

        orbits = tuple(tuple(int(k) for k in o) for o in self.orbits) or tuple((i,) for i in range(len(nodes)))
        seen = sorted(k for o in orbits for k in o)
        if seen != list(range(len(nodes))):
            raise InconsistentData("orbits must partition the node indices")
        for o in orbits:
            if len(o) == 2:
                (a, b) = o
                za, zetaa = nodes[a]
                zb, zetab = nodes[b]
                if abs(za - zetab) > NODE_MATCH_TOL or abs(zetaa - zb) > NODE_MATCH_TOL:
                    raise InconsistentData(f"orbit {o} does not pair a node with its swap")
                if abs(values[a] - values[b]) > NODE_MATCH_TOL:
                    raise InconsistentData(f"orbit {o} carries different values")
            elif len(o) != 1:
                raise InconsistentData(f"orbit {o} must have one or two nodes")

        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "orbits", orbits)

    def __len__(self) -> int:
        return len(self.nodes)


def _find_node(nodes: List[Tuple[complex, complex]], node: Tuple[complex, complex]) -> Optional[int]:
    for i, (z, zeta) in enumerate(nodes):
        if abs(z - node[0]) <= NODE_MATCH_TOL and abs(zeta - node[1]) <= NODE_MATCH_TOL:
            return i
    return None


def build_symm_data(g: PickProblemG) -> PickProblemD2:
    """
    Lift every node to its root pair; non-coincident pairs contribute both
    orders with the same value. Repeated bidisk nodes merge when their values
    agree and are rejected otherwise.
    """
    nodes: List[Tuple[complex, complex]] = []
    values: List[complex] = []
    orbits: List[Tuple[int, ...]] = []

    for (s, p), w in zip(g.nodes, g.values):
        lift = lift_point(s, p)
        pairs = [(lift.z, lift.zeta)]
        if not lift.coincident:
            pairs.append((lift.zeta, lift.z))

        orbit: List[int] = []
        for pair in pairs:
            k = _find_node(nodes, pair)
            if k is None:
                nodes.append(pair)
                values.append(w)
                orbit.append(len(nodes) - 1)
            elif abs(values[k] - w) > NODE_MATCH_TOL:
                raise InconsistentData(
                    f"bidisk node {pair} receives values {values[k]} and {w}",
                    {"node": k},
                )
            else:
                log.info("🔄 merged repeated bidisk node %s", pair)
        if orbit:
            orbits.append(tuple(orbit))

    return PickProblemD2(tuple(nodes), tuple(values), tuple(orbits))


# ========= Kernels and the Agler decomposition =========

@dataclass(frozen=True, eq=False)
class Kernels:
    """W = (1 - conj(w_i) w_j), Pz = (1 - conj(z_i) z_j), Pzeta = (1 - conj(zeta_i) zeta_j)."""
    W: np.ndarray
    Pz: np.ndarray
    Pzeta: np.ndarray

    def __post_init__(self) -> None:
        shapes = {self.W.shape, self.Pz.shape, self.Pzeta.shape}
        if len(shapes) != 1 or self.W.ndim != 2 or self.W.shape[0] != self.W.shape[1]:
            raise DimensionMismatch(f"kernel matrices must be square of equal size, got {sorted(shapes)}")

    @property
    def n(self) -> int:
        return self.W.shape[0]


def _one_minus_outer(v: np.ndarray) -> np.ndarray:
    return 1.0 - np.conj(v)[:, None] * v[None, :]


def kernel_matrices(d: PickProblemD2) -> Kernels:
    z = np.array([n[0] for n in d.nodes], dtype=np.complex128)
    zeta = np.array([n[1] for n in d.nodes], dtype=np.complex128)
    w = np.array(d.values, dtype=np.complex128)
    return Kernels(W=_one_minus_outer(w), Pz=_one_minus_outer(z), Pzeta=_one_minus_outer(zeta))


@dataclass(frozen=True, eq=False)
class AglerCertificate:
    K1: np.ndarray
    K2: np.ndarray
    residual: float
    eig_min: float


@dataclass(frozen=True)
class CertificateReport:
    residual: float
    eig_min_K1: float
    eig_min_K2: float

    @property
    def eig_min(self) -> float:
        return min(self.eig_min_K1, self.eig_min_K2)


def _residual(K1: np.ndarray, K2: np.ndarray, k: Kernels) -> float:
    if k.n == 0:
        return 0.0
    return float(np.max(np.abs(k.W - K1 * k.Pz - K2 * k.Pzeta)))


def check_certificate(K1: np.ndarray, K2: np.ndarray, kernels: Kernels) -> CertificateReport:
    K1 = np.asarray(K1, dtype=np.complex128)
    K2 = np.asarray(K2, dtype=np.complex128)
    if K1.shape != kernels.W.shape or K2.shape != kernels.W.shape:
        raise DimensionMismatch(f"certificate shapes {K1.shape}, {K2.shape} vs kernels {kernels.W.shape}")
    return CertificateReport(
        residual=_residual(K1, K2, kernels),
        eig_min_K1=eig_min(K1),
        eig_min_K2=eig_min(K2),
    )


def _certificate(K1: np.ndarray, K2: np.ndarray, kernels: Kernels) -> AglerCertificate:
    rep = check_certificate(K1, K2, kernels)
    return AglerCertificate(K1=K1, K2=K2, residual=rep.residual, eig_min=rep.eig_min)


@dataclass(frozen=True)
class FeasibilityResult:
    status: str                      # "feasible" | "infeasible" | "undetermined"
    certificate: Optional[AglerCertificate]
    iterations: int
    explanation: str = ""


def _scalar_separation(k: Kernels, tol: float) -> Optional[str]:
    """
    Diagonal entries force K1_ii Pz_ii + K2_ii Pzeta_ii >= 0 whenever both
    kernel diagonals are nonnegative, so a negative W_ii is a certificate
    of infeasibility.
    """
    for i in range(k.n):
        w = k.W[i, i].real
        if k.Pz[i, i].real >= 0 and k.Pzeta[i, i].real >= 0 and w < -tol:
            return (
                f"node {i}: 1 - |w|^2 = {w:.6g} < 0, but K1, K2 >= 0 and the diagonal kernel "
                f"entries ({k.Pz[i, i].real:.6g}, {k.Pzeta[i, i].real:.6g}) are nonnegative"
            )
    return None


def feasibility(kernels: Kernels, max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL) -> FeasibilityResult:
    """
    Look for PSD (K1, K2) with W = K1 o Pz + K2 o Pzeta by Dykstra's alternating
    projections between the product PSD cone and the affine constraint set.
    The affine projection is a closed-form two-unknown, one-equation update per entry.
    """
    n = kernels.n
    separation = _scalar_separation(kernels, tol)
    if separation is not None:
        log.info("🗑️ infeasible by scalar separation: %s", separation)
        return FeasibilityResult("infeasible", None, 0, separation)
    if n == 0:
        empty = np.zeros((0, 0), dtype=np.complex128)
        return FeasibilityResult("feasible", AglerCertificate(empty, empty, 0.0, 0.0), 0)

    W, Pz, Pzeta = kernels.W, kernels.Pz, kernels.Pzeta
    denom = np.abs(Pz) ** 2 + np.abs(Pzeta) ** 2

    def affine(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        r = (W - a * Pz - b * Pzeta) / denom
        return a + np.conj(Pz) * r, b + np.conj(Pzeta) * r

    zero = np.zeros((n, n), dtype=np.complex128)
    x1, x2 = zero, zero
    p1, p2 = zero, zero
    q1, q2 = zero, zero
    best = np.inf

    for it in range(1, max_iter + 1):
        y1 = psd_project(x1 + p1)
        y2 = psd_project(x2 + p2)
        p1, p2 = x1 + p1 - y1, x2 + p2 - y2

        x1, x2 = affine(y1 + q1, y2 + q2)
        q1, q2 = y1 + q1 - x1, y2 + q2 - x2

        res_y = _residual(y1, y2, kernels)
        best = min(best, res_y)
        if res_y <= tol:
            log.info("✅ feasible after %d Dykstra iterations (PSD iterate)", it)
            return FeasibilityResult("feasible", _certificate(y1, y2, kernels), it)

        if min(eig_min(x1), eig_min(x2)) >= -tol:
            log.info("✅ feasible after %d Dykstra iterations (affine iterate)", it)
            return FeasibilityResult("feasible", _certificate(x1, x2, kernels), it)

    log.warning("⚠️ Dykstra stopped after %d iterations (best residual %.3e)", max_iter, best)
    return FeasibilityResult(
        "undetermined",
        None,
        max_iter,
        f"no certificate within {max_iter} iterations (best residual {best:.3e}); infeasibility is not certified",
    )


# ========= Lurking contraction =========

@dataclass(frozen=True, eq=False)
class LurkingMap:
    """
    X columns (1; z_j u1_j; zeta_j u2_j), Y columns (w_j; u1_j; u2_j) and the
    contraction V = Y X^+ that maps one family onto the other.
    """
    X: np.ndarray
    Y: np.ndarray
    span: SpanMap
    r1: int
    r2: int


def lurking_map(
    cert: AglerCertificate,
    d: PickProblemD2,
    residual_limit: float = LURKING_RESIDUAL_LIMIT,
    rank_tol_rel: float = RANK_TOL_REL,
) -> LurkingMap:
    kernels = kernel_matrices(d)
    rep = check_certificate(cert.K1, cert.K2, kernels)
    if rep.residual > residual_limit:
        raise CertificateTooWeak(
            f"certificate residual {rep.residual:.3e} exceeds {residual_limit:.1e}",
            {"residual": rep.residual},
        )

    n = len(d)
    U1 = gram_factor(psd_project(cert.K1), rel=rank_tol_rel) if n else np.zeros((0, 0))
    U2 = gram_factor(psd_project(cert.K2), rel=rank_tol_rel) if n else np.zeros((0, 0))
    z = np.array([node[0] for node in d.nodes], dtype=np.complex128)
    zeta = np.array([node[1] for node in d.nodes], dtype=np.complex128)
    w = np.array(d.values, dtype=np.complex128)

    X = np.vstack([np.ones((1, n)), U1 * z[None, :], U2 * zeta[None, :]])
    Y = np.vstack([w[None, :], U1, U2])
    span = solve_on_span(X, Y)
    return LurkingMap(X=X, Y=Y, span=span, r1=U1.shape[0], r2=U2.shape[0])


def lurking(cert: AglerCertificate, d: PickProblemD2, residual_limit: float = LURKING_RESIDUAL_LIMIT) -> GeneralColligation:
    """
    General colligation read off the lurking contraction
    V = [[D, C1, C2], [B1, A11, A12], [B2, A21, A22]], state dims (rank K1, rank K2).
    """
    lm = lurking_map(cert, d, residual_limit)
    return from_lurking_matrix(lm.span.matrix, lm.r1, lm.r2)


# ========= End-to-end solving =========

@dataclass(frozen=True)
class PickSolution:
    status: str
    explanation: str = ""
    gamma: Optional[GammaColligation] = None
    symmetric: Optional[SymmetricColligation] = None
    certificate: Optional[AglerCertificate] = None
    iterations: int = 0
    clipped: float = 0.0
    interp_errors: Tuple[float, ...] = ()
    sup_norm: Optional[SupNormReport] = None
    symmetry_defect: Optional[float] = None


def _stage(name: str, fn: Callable[[], T]) -> T:
    try:
        return fn()
    except SchurToolError as e:
        log.warning("⚠️ stage %s failed: %s", name, e)
        raise StageFailure(name, e) from e


def random_bidisk_points(count: int, seed: int, radius: float = 0.95) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random((count, 2)))
    theta = 2 * np.pi * rng.random((count, 2))
    return r * np.exp(1j * theta)


def symmetry_defect(c: SymmetricColligation, points: Sequence[Sequence[complex]]) -> float:
    worst = 0.0
    for z, zeta in points:
        a = eval_symmetric(c, z, zeta)
        b = eval_symmetric(c, zeta, z)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def solve_D2_symm(d: PickProblemD2, opts: Optional[SolverOptions] = None) -> PickSolution:
    """
    Symmetric bidisk problem: Agler certificate, lurking contraction, then the
    symmetric average of the resulting colligation.
    """
    opts = opts or get_solver_options()
    kernels = _stage("kernel_matrices", lambda: kernel_matrices(d))
    feas = _stage("feasibility", lambda: feasibility(kernels, opts.max_iter, opts.tol))
    if feas.status != "feasible":
        return PickSolution(status=feas.status, explanation=feas.explanation, iterations=feas.iterations)

    lm = _stage("lurking", lambda: lurking_map(feas.certificate, d, opts.lurking_residual_limit, opts.rank_tol_rel))
    general = from_lurking_matrix(lm.span.matrix, lm.r1, lm.r2)
    sym = _stage("symmetrize", lambda: symmetrize(general))
    errs = _stage("diagnostics", lambda: tuple(
        float(np.max(np.abs(eval_symmetric(sym, z, zeta) - w)))
        for (z, zeta), w in zip(d.nodes, d.values)
    ))
    return PickSolution(
        status="feasible",
        symmetric=sym,
        certificate=feas.certificate,
        iterations=feas.iterations,
        clipped=lm.span.clipped,
        interp_errors=errs,
    )


def solve_G(g: PickProblemG, opts: Optional[SolverOptions] = None) -> PickSolution:
    """
    build_symm_data -> kernel_matrices -> feasibility -> lurking -> symmetrize -> to_gamma,
    with per-node interpolation errors, a sampled sup norm over G and a symmetry
    check at seeded random bidisk points.
    """
    opts = opts or get_solver_options()
    d = _stage("build_symm_data", lambda: build_symm_data(g))
    sol = solve_D2_symm(d, opts)
    if sol.status != "feasible":
        return sol

    gamma = _stage("to_gamma", lambda: to_gamma(sol.symmetric))

    def diagnostics() -> Tuple[Tuple[float, ...], SupNormReport, float]:
        errs = tuple(
            float(np.max(np.abs(eval_gamma(gamma, s, p) - w)))
            for (s, p), w in zip(g.nodes, g.values)
        )
        sup = sup_norm_grid(gamma, opts.grid, opts.allow_boundary)
        defect = symmetry_defect(sol.symmetric, random_bidisk_points(25, opts.seed))
        return errs, sup, defect

    errs, sup, defect = _stage("diagnostics", diagnostics)
    if errs and max(errs) > 1e-8:
        log.warning("⚠️ interpolation error %.3e above 1e-8", max(errs))
    log.info("✅ solved %d-node problem on G (sup norm %.12g)", len(g), sup.max_norm)
    return PickSolution(
        status="feasible",
        gamma=gamma,
        symmetric=sol.symmetric,
        certificate=sol.certificate,
        iterations=sol.iterations,
        clipped=sol.clipped,
        interp_errors=errs,
        sup_norm=sup,
        symmetry_defect=defect,
    )
