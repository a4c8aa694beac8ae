# cli.py
from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Mapping, Optional, TextIO

import numpy as np

import jsonio
from detrep import (
    DetRep,
    from_K,
    g_rep_to_d2_rep,
    rep_for,
    sigma_e_target,
    strict_rescale,
    verify,
)
from errors import InputError, NumericalFailure, SchurToolError
from pick import (
    AglerCertificate,
    PickSolution,
    build_symm_data,
    check_certificate,
    feasibility,
    kernel_matrices,
    lift_point,
    lurking_map,
    solve_D2_symm,
    solve_G,
)
from poly2 import Coords, DetForm, Domain, compose_sym, convert, det_poly, no_roots_grid
from realize import (
    GeneralColligation,
    SymmetricColligation,
    check_colligation,
    eval_gamma,
    evaluate,
    from_lurking_matrix,
    general_to_gamma,
    sup_norm_grid,
    symmetrize,
    to_gamma,
)
from settings import SolverOptions, get_solver_options

log = logging.getLogger("schurtool")

Handler = Callable[[Any, argparse.Namespace, SolverOptions], Any]


# ========= Input helpers =========

def _read_input(args: argparse.Namespace) -> Any:
    if args.json is not None:
        return jsonio.loads(args.json)
    if args.input is None:
        raise InputError("no input: pass a file path, '-' for stdin, or --json")
    if args.input == "-":
        return jsonio.loads(sys.stdin.read())
    try:
        return jsonio.load_path(args.input)
    except OSError as e:
        raise InputError(f"cannot read {args.input}: {e.strerror or e}") from e


def _value_payload(F: np.ndarray) -> Any:
    """1 x 1 transfer values print as a single [re, im] pair."""
    if F.shape == (1, 1):
        return jsonio.encode_complex(F[0, 0])
    return jsonio.encode_matrix(F)


def _require_kind(c: Any, kinds: tuple, command: str) -> None:
    if not isinstance(c, kinds):
        names = " or ".join(k.__name__.replace("Colligation", "").lower() for k in kinds)
        raise InputError(f"{command} needs a {names} colligation")


def _at(args: argparse.Namespace) -> tuple:
    if args.at is None:
        raise InputError("--at RE1 IM1 RE2 IM2 is required")
    a, b, c, d = args.at
    return complex(a, b), complex(c, d)


def _problem_d2(doc: Any):
    if isinstance(doc, Mapping) and isinstance(doc.get("problem"), Mapping):
        doc = doc["problem"]
    if jsonio.is_d2_problem(doc):
        return jsonio.decode_problem_d2(doc)
    return build_symm_data(jsonio.decode_problem_g(doc))


# ========= Subcommands =========

def cmd_eval_d2(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Evaluate a general or symmetric colligation at (z, zeta) in the bidisk."""
    c = jsonio.decode_colligation(doc)
    _require_kind(c, (GeneralColligation, SymmetricColligation), "eval-d2")
    z, zeta = _at(args)
    F = evaluate(c, z, zeta, opts.allow_boundary)
    return {"point": {"z": z, "zeta": zeta}, "value": _value_payload(F)}


def cmd_eval_g(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Evaluate a colligation at (s, p) in the symmetrized bidisk."""
    c = jsonio.decode_colligation(doc)
    if isinstance(c, SymmetricColligation):
        c = to_gamma(c)
    elif isinstance(c, GeneralColligation):
        c = general_to_gamma(c)
    s, p = _at(args)
    F = eval_gamma(c, s, p, opts.allow_boundary)
    return {"point": {"s": s, "p": p}, "value": _value_payload(F)}


def cmd_symmetrize(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Symmetrize a general colligation."""
    c = jsonio.decode_colligation(doc)
    _require_kind(c, (GeneralColligation,), "symmetrize")
    return jsonio.encode_colligation(symmetrize(c))


def cmd_to_gamma(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Convert a symmetric colligation to gamma form."""
    c = jsonio.decode_colligation(doc)
    _require_kind(c, (SymmetricColligation,), "to-gamma")
    return jsonio.encode_colligation(to_gamma(c))


def cmd_general_to_gamma(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Symmetrize a general colligation and convert it to gamma form."""
    c = jsonio.decode_colligation(doc)
    _require_kind(c, (GeneralColligation,), "general-to-gamma")
    return jsonio.encode_colligation(general_to_gamma(c))


def cmd_check_colligation(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Report contractivity and symmetry defects of a colligation."""
    return check_colligation(jsonio.decode_colligation(doc))


def cmd_supnorm(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Grid estimate of the sup norm of a transfer function."""
    return sup_norm_grid(jsonio.decode_colligation(doc), opts.grid, opts.allow_boundary)


def cmd_detrep_from_k(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Build a determinantal representation from K blocks."""
    k = jsonio.decode_kblocks(doc)
    constant = jsonio.decode_complex(doc.get("constant", 1.0), "constant")
    rep = from_K(k, constant)
    if args.form == DetForm.D2.value:
        rep = g_rep_to_d2_rep(rep)
    elif args.form not in (None, DetForm.G.value):
        raise InputError(f"detrep-from-k produces d2 or g forms, not {args.form}")
    return jsonio.encode_detrep(rep)


def _rep_doc(doc: Any) -> DetRep:
    if isinstance(doc, Mapping) and isinstance(doc.get("rep"), Mapping):
        doc = doc["rep"]
    return jsonio.decode_detrep(doc)


def cmd_detrep_verify(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """
    Check a determinantal representation against its target polynomial.

    Either K blocks alone (the g-form built from them is checked against the
    (sigma, e)-determinant in (s, p)) or {"rep": ..., "target": poly | K blocks}.
    """
    if jsonio.is_kblocks(doc):
        k = jsonio.decode_kblocks(doc)
        rep = from_K(k)
        target_doc: Any = doc
    else:
        rep = _rep_doc(doc)
        target_doc = jsonio.require(doc, "target", "detrep-verify")

    if jsonio.is_kblocks(target_doc):
        target = sigma_e_target(jsonio.decode_kblocks(target_doc)) * rep.constant
        if rep.form == DetForm.D2:
            target = compose_sym(target)
    else:
        target = jsonio.decode_poly(target_doc)
    return {"form": rep.form, "size": rep.size, "report": verify(rep, target)}


def cmd_detrep_rescale(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Rescale a determinantal representation by a factor R > 1."""
    if args.factor is None:
        raise InputError("--factor R (> 1) is required")
    return jsonio.encode_detrep(strict_rescale(_rep_doc(doc), args.factor))


def cmd_poly_convert(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Change the coordinates of a two-variable polynomial."""
    if args.to is None:
        raise InputError("--to zzeta|sp|sigmae is required")
    return jsonio.encode_poly(convert(jsonio.decode_poly(doc), Coords(args.to)))


def cmd_det_poly(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Expand the determinant of a representation as a polynomial."""
    if jsonio.is_kblocks(doc):
        obj: Any = jsonio.decode_kblocks(doc)
        form = DetForm(args.form or DetForm.SIGMAE.value)
    else:
        obj = _rep_doc(doc)
        form = DetForm(args.form or obj.form.value)
    return jsonio.encode_poly(det_poly(rep_for(obj, form), form))


def cmd_no_roots(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Scan a polynomial for zeros on a closed domain."""
    f = jsonio.decode_poly(doc)
    domain = Domain(args.domain or Domain.CLOSED_BIDISK.value)
    scan = no_roots_grid(f, domain, opts.grid)
    return {"domain": domain, "grid": opts.grid, "scan": scan}


def cmd_pick_lift(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Lift (s, p) nodes to (z, zeta) pairs."""
    if isinstance(doc, Mapping) and "nodes" in doc:
        g = jsonio.decode_problem_g(doc)
        lifts = [lift_point(s, p) for s, p in g.nodes]
        return {"lifts": lifts, "problem": jsonio.encode_problem_d2(build_symm_data(g))}
    s = jsonio.decode_complex(jsonio.require(doc, "s", "point"), "s")
    p = jsonio.decode_complex(jsonio.require(doc, "p", "point"), "p")
    return lift_point(s, p)


def cmd_pick_kernels(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Build the Pick kernel matrices of a problem."""
    d = _problem_d2(doc)
    return {"problem": jsonio.encode_problem_d2(d), "kernels": jsonio.encode_kernels(kernel_matrices(d))}


def cmd_pick_feas(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Search for a positive certificate for a Pick problem."""
    out: Dict[str, Any] = {}
    if isinstance(doc, Mapping) and ("W" in doc or "kernels" in doc):
        kernels = jsonio.decode_kernels(doc)
        if isinstance(doc.get("problem"), Mapping):
            out["problem"] = doc["problem"]
    else:
        d = _problem_d2(doc)
        kernels = kernel_matrices(d)
        out["problem"] = jsonio.encode_problem_d2(d)

    result = feasibility(kernels, opts.max_iter, opts.tol)
    head = {
        "status": result.status,
        "iterations": result.iterations,
        "explanation": result.explanation,
        "certificate": jsonio.encode_certificate(result.certificate),
        "kernels": jsonio.encode_kernels(kernels),
    }
    head.update(out)
    return head


def cmd_pick_check(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Check a certificate against the kernel identity."""
    K1, K2 = jsonio.decode_certificate_pair(doc)
    if isinstance(doc, Mapping) and "W" not in doc and "kernels" not in doc and "problem" in doc:
        kernels = kernel_matrices(_problem_d2(doc))
    else:
        kernels = jsonio.decode_kernels(doc)
    rep = check_certificate(K1, K2, kernels)
    return {
        "residual": rep.residual,
        "eig_min_K1": rep.eig_min_K1,
        "eig_min_K2": rep.eig_min_K2,
        "eig_min": rep.eig_min,
        "passes": rep.residual <= opts.tol and rep.eig_min >= -opts.tol,
    }


def cmd_pick_lurk(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Build a colligation from a certificate by the lurking isometry."""
    K1, K2 = jsonio.decode_certificate_pair(doc)
    d = _problem_d2(doc)
    rep = check_certificate(K1, K2, kernel_matrices(d))
    cert = AglerCertificate(K1=K1, K2=K2, residual=rep.residual, eig_min=rep.eig_min)
    lm = lurking_map(cert, d, opts.lurking_residual_limit, opts.rank_tol_rel)
    return {
        "colligation": jsonio.encode_colligation(from_lurking_matrix(lm.span.matrix, lm.r1, lm.r2)),
        "V": jsonio.encode_matrix(lm.span.matrix),
        "gram_residual": lm.span.gram_residual,
        "clipped": lm.span.clipped,
        "warning": lm.span.warning,
    }


def _solution_doc(sol: PickSolution) -> Dict[str, Any]:
    realization = sol.gamma if sol.gamma is not None else sol.symmetric
    out: Dict[str, Any] = {
        "status": sol.status,
        "explanation": sol.explanation,
        "iterations": sol.iterations,
        "colligation": jsonio.encode_colligation(realization) if realization is not None else None,
        "certificate": jsonio.encode_certificate(sol.certificate),
    }
    if sol.status == "feasible":
        out["diagnostics"] = {
            "interp_errors": list(sol.interp_errors),
            "clipped": sol.clipped,
            "sup_norm": sol.sup_norm,
            "symmetry_defect": sol.symmetry_defect,
        }
    return out


def cmd_pick_solve(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Solve a Pick problem on the symmetrized bidisk."""
    return _solution_doc(solve_G(jsonio.decode_problem_g(doc), opts))


def cmd_pick_solve_d2(doc: Any, args: argparse.Namespace, opts: SolverOptions) -> Any:
    """Solve a symmetric Pick problem on the bidisk."""
    return _solution_doc(solve_D2_symm(_problem_d2(doc), opts))


COMMANDS: Dict[str, Handler] = {
    "eval-d2": cmd_eval_d2,
    "eval-g": cmd_eval_g,
    "symmetrize": cmd_symmetrize,
    "to-gamma": cmd_to_gamma,
    "general-to-gamma": cmd_general_to_gamma,
    "check-colligation": cmd_check_colligation,
    "supnorm": cmd_supnorm,
    "detrep-from-k": cmd_detrep_from_k,
    "detrep-verify": cmd_detrep_verify,
    "detrep-rescale": cmd_detrep_rescale,
    "poly-convert": cmd_poly_convert,
    "det-poly": cmd_det_poly,
    "no-roots": cmd_no_roots,
    "pick-lift": cmd_pick_lift,
    "pick-kernels": cmd_pick_kernels,
    "pick-feas": cmd_pick_feas,
    "pick-check": cmd_pick_check,
    "pick-lurk": cmd_pick_lurk,
    "pick-solve": cmd_pick_solve,
    "pick-solve-d2": cmd_pick_solve_d2,
}


# ========= Parser =========

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", help="JSON input file, or '-' for stdin")
    common.add_argument("--json", help="inline JSON input instead of a file")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    common.add_argument("--grid", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--allow-boundary", dest="allow_boundary", action="store_true")
    common.add_argument("--verbose", "-v", action="store_true")
    common.add_argument("--at", nargs=4, type=float, metavar=("RE1", "IM1", "RE2", "IM2"),
                        help="evaluation point: (z, zeta) for eval-d2, (s, p) for eval-g")
    common.add_argument("--to", choices=[c.value for c in Coords])
    common.add_argument("--form", choices=[f.value for f in DetForm])
    common.add_argument("--factor", type=float, default=None)
    common.add_argument("--domain", choices=[d.value for d in Domain])

    parser = argparse.ArgumentParser(
        prog="schurtool",
        description="Schur-class realizations, determinantal representations and Pick interpolation on the symmetrized bidisk.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        doc = (fn.__doc__ or "").strip().splitlines()
        sub.add_parser(name, parents=[common], help=doc[0] if doc else None)
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _options(args: argparse.Namespace) -> SolverOptions:
    opts = get_solver_options(
        tol=args.tol,
        max_iter=args.max_iter,
        grid=args.grid,
        seed=args.seed,
        allow_boundary=True if args.allow_boundary else None,
    )
    if not opts.tol > 0:
        raise InputError(f"--tol must be positive, got {opts.tol}")
    if opts.max_iter < 1:
        raise InputError(f"--max-iter must be >= 1, got {opts.max_iter}")
    if opts.grid < 2:
        raise InputError(f"--grid must be >= 2, got {opts.grid}")
    return opts


def run(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """
    Parse argv, run one subcommand, print its JSON result (or an error object)
    to stdout and return the exit status: 0 ok, 1 domain error, 2 input error.
    """
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    _configure_logging(args.verbose)
    try:
        opts = _options(args)
        doc = _read_input(args)
        result = COMMANDS[args.command](doc, args, opts)
    except SchurToolError as e:
        err: SchurToolError = e
    except np.linalg.LinAlgError as e:
        err = NumericalFailure(str(e))
    except ValueError as e:
        # enum lookups and numpy shape errors on malformed documents
        err = InputError(str(e))
    else:
        out.write(jsonio.dumps(result) + "\n")
        return 0

    log.warning("⚠️ %s: %s", args.command, err.message)
    out.write(jsonio.dumps({"error": err.to_payload()}) + "\n")
    return err.exit_status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
