"""Command-line interface.

Exit codes: 0 success, 1 failed report, 2 usage or input error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from typing import Optional, Sequence

import numpy as np

from . import experiments as ex
from .dispersion import NoInvasionError, dispersion_curve, spreading_speed
from .gridfn import (
    ExpressionError,
    GridFn1D,
    GridFn2D,
    GridSpec1D,
    GridSpec2D,
    load_gridfn,
    sample,
    sample2d,
    save_gridfn,
)
from .operators import (
    CoefficientSet1D,
    CoefficientSet2D,
    SolverError,
    adjoint_consistency,
    assemble,
    principal_eig,
)
from .rearrange import harmonic_rearrange, schwarz, steiner
from .varforms import (
    J_functional,
    effective_diffusivity_1d,
    effective_diffusivity_nd,
    holland_max_check,
    holland_transform,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# argument helpers


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _is2d(args) -> bool:
    if getattr(args, "n2", None) is not None or getattr(args, "L2", None) is not None:
        return True
    for name in ("mu", "a"):
        v = getattr(args, name, None)
        if isinstance(v, str) and v.startswith("@"):
            return isinstance(load_gridfn(v[1:]), GridFn2D)
    return False


def _grid(args):
    """Grid from the first ``@file`` coefficient, else from ``--L/--n/--L2/--n2``."""
    for name in ("mu", "a", "q"):
        v = getattr(args, name, None)
        if isinstance(v, str) and v.startswith("@"):
            return load_gridfn(v[1:]).spec
    if _is2d(args):
        n2 = args.n2 if args.n2 is not None else args.n
        L2 = args.L2 if args.L2 is not None else args.L
        return GridSpec2D(args.L, L2, args.n, n2)
    return GridSpec1D(args.L, args.n)


def _field(text: str, spec):
    if text.startswith("@"):
        f = load_gridfn(text[1:])
        if f.spec != spec:
            raise UsageError(f"{text[1:]}: grid {f.spec} does not match {spec}")
        return f
    return sample2d(text, spec) if isinstance(spec, GridSpec2D) else sample(text, spec)


def _coefficients(args, mu: Optional[str] = None):
    spec = _grid(args)
    mu = _field(mu if mu is not None else args.mu, spec)
    a = _field(args.a, spec)
    if isinstance(spec, GridSpec1D):
        return CoefficientSet1D.build(mu, a, _field(args.q, spec))
    parts = [p for p in args.q.split(";")]
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise UsageError("2D drift is given as 'q1;q2'")
    q1, q2 = (_field(p.strip(), spec) for p in parts)
    return CoefficientSet2D.scalar(a, mu, (q1, q2))


def _direction(args, c):
    if isinstance(c, CoefficientSet1D):
        if args.e is None:
            return 1.0
        v = _floats(args.e)
        if len(v) != 1:
            raise UsageError("1D direction is a single number")
        return v[0]
    v = _floats(args.e) if args.e is not None else [1.0, 0.0]
    if len(v) != 2:
        raise UsageError("2D direction is given as 'e1,e2'")
    return tuple(v)


def _emit(args, payload: dict, text_lines: Sequence[str]):
    if args.format == "json":
        out = json.dumps(payload, indent=2, allow_nan=False) + "\n"
    else:
        out = "\n".join(text_lines) + "\n"
    if getattr(args, "out", None):
        ex.atomic_write(args.out, out)
    else:
        sys.stdout.write(out)


# --------------------------------------------------------------------------
# subcommands


def cmd_eig(args) -> int:
    c = _coefficients(args)
    e = _direction(args, c)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        M = assemble(c, args.lam, e)
    p = principal_eig(M, args.tol, adjoint=args.command == "adjoint")
    payload = {"k": p.k, "residual": p.residual_direct, "iterations": p.iterations,
               "lambda": args.lam, "stencil_positive": M.stencil_positive}
    lines = [f"k = {p.k:.12g}", f"residual = {p.residual_direct:.3e}", f"iterations = {p.iterations}"]
    if args.command == "adjoint":
        d = adjoint_consistency(p)
        payload.update({"k_adjoint": p.k_adjoint, "adjoint_gap": d, "residual_adjoint": p.residual_adjoint})
        lines += [f"k_adjoint = {p.k_adjoint:.12g}", f"|k - k_adjoint| = {d:.3e}"]
    if caught:
        lines.append("warning: stencil positivity violated")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_rearrange(args) -> int:
    spec = _grid(args)
    f = _field(args.mu if args.kind != "harmonic" else args.a, spec)
    if isinstance(f, GridFn2D):
        if args.kind != "steiner":
            raise UsageError("2D input supports only --kind steiner")
        order = tuple(args.order)
        g = steiner(f, order)
    elif args.kind == "harmonic":
        g = harmonic_rearrange(f)
    elif args.kind == "schwarz":
        g = schwarz(f)
    else:
        raise UsageError("--kind steiner needs a 2D function")
    if args.out:
        save_gridfn(g, args.out)
    else:
        vals = g.flat() if isinstance(g, GridFn2D) else g.values
        sys.stdout.write("\n".join(repr(float(v)) for v in vals) + "\n")
    return EXIT_OK


def cmd_dispersion(args) -> int:
    c = _coefficients(args)
    lams = _floats(args.lambda_list)
    curve = dispersion_curve(c, _direction(args, c), lams, args.tol)
    if args.format == "json":
        payload = {"lambda": list(curve.lams), "k": [_finite(k) for k in curve.ks],
                   "residual": [_finite(r) for r in curve.residuals],
                   "concavity_defect": curve.concavity_defect()}
        _emit(args, payload, [])
    else:
        lines = ["lambda,k,residual"] + [f"{l!r},{k!r},{r!r}" for l, k, r in
                                         zip(curve.lams, curve.ks, curve.residuals)]
        _emit(args, {}, lines)
    return EXIT_OK


def _finite(v):
    return v if math.isfinite(v) else None


def cmd_speed(args) -> int:
    c = _coefficients(args)
    tol = 1e-8 if args.tol is None else args.tol
    r = spreading_speed(c, _direction(args, c), tol=tol)
    payload = {"c_star": r.c_star, "lambda_star": r.lambda_star, "bracket": list(r.bracket),
               "evaluations": r.evaluations}
    _emit(args, payload, [f"c* = {r.c_star:.12g}", f"lambda* = {r.lambda_star:.12g}"])
    return EXIT_OK


def cmd_deff(args) -> int:
    spec = _grid(args)
    a = _field(args.a, spec)
    if isinstance(a, GridFn1D):
        D = effective_diffusivity_1d(a)
        payload, lines = {"D": D}, [f"D = {D:.12g}"]
    else:
        z = GridFn2D.constant(spec, 0.0)
        c = CoefficientSet2D.scalar(a, z)
        sol = effective_diffusivity_nd(c, _direction(args, c))
        payload = {"D": sol.D, "residual": sol.residual}
        lines = [f"D = {sol.D:.12g}", f"residual = {sol.residual:.3e}"]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_holland(args) -> int:
    c = _coefficients(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = principal_eig(assemble(c, 0.0), args.tol)
    hp = holland_transform(p)
    F = holland_max_check(c, hp.beta, tol=args.tol)
    J = J_functional(c, hp.alpha, hp.beta)
    payload = {"k0": p.k, "F_beta_opt": F, "J": J, "residual": hp.residual}
    lines = [f"k = {p.k:.12g}", f"F(beta_opt) = {F:.12g}", f"J(alpha, beta) = {J:.12g}",
             f"transform residual = {hp.residual:.3e}"]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_verify(args) -> int:
    name = args.experiment
    lams = _floats(args.lambda_list) if args.lambda_list else None
    kw = {}
    if name == "rearrangement":
        if lams is not None:
            kw["lam_list"] = lams
        rep = ex.verify_rearrangement([args.mu] if args.mu else None, n=args.n or 128,
                                      cases=args.cases, seed=args.seed, jobs=args.jobs, **kw)
    elif name == "holland":
        rep = ex.verify_holland(cases_1d=args.cases if args.cases is not None else 20,
                                n=args.n or 128, seed=args.seed)
    elif name == "period":
        rep = ex.period_scan(a=args.a, mu=args.mu or "1 + cos(2*pi*x)", q=args.q,
                             lam=args.lam if args.lam is not None else 1.0,
                             L_list=_floats(args.L_list) if args.L_list else (0.01, 0.1, 0.5, 1, 2, 4),
                             n=args.n or 256)
    elif name == "counterexample":
        if lams is not None:
            kw["lam_list"] = lams
        if args.tol is not None:
            kw["eig_tol"] = args.tol
        rep = ex.counterexample_2d(mu0=args.mu or "5 + 4*cos(2*pi*x)", n=args.n or 48, **kw)
    elif name in ("diffusion", "conjecture"):
        if lams is not None:
            kw["lam_list"] = lams
        fn = ex.verify_diffusion_rearrangement if name == "diffusion" else ex.conjecture_scan
        a_list = [args.a] if args.a != "1" or args.mu else None
        rep = fn(a_list, [args.mu] if args.mu else None, n=args.n or 128,
                 cases=args.cases if args.cases is not None else 30, seed=args.seed, jobs=args.jobs, **kw)
    else:  # equivalence
        args.n = args.n or (48 if _is2d(args) else 128)
        c1 = _coefficients(args, args.mu or "1 + cos(2*pi*x)")
        c2 = _coefficients(args, args.mu2)
        if lams is not None:
            kw["lam_grid"] = lams
        if args.M_list:
            kw["M_grid"] = _floats(args.M_list)
        if args.tol is not None:
            kw["eig_tol"] = args.tol
        rep = ex.equivalence_check(c1, c2, _direction(args, c1), **kw)
    if args.out:
        rep.write(args.out, args.format)
    elif args.format == "csv":
        sys.stdout.write(rep.to_csv())
    elif args.format == "json":
        sys.stdout.write(rep.to_json())
    print(rep.summary(), file=sys.stderr if not args.out and args.format else sys.stdout)
    if name == "conjecture":
        return EXIT_OK
    return EXIT_OK if rep.passed else EXIT_FAIL


# --------------------------------------------------------------------------
# parser


def _add_coeffs(p, mu_default="0"):
    p.add_argument("--mu", default=mu_default, help="growth rate: expression or @file")
    p.add_argument("--a", default="1", help="diffusion coefficient: expression or @file")
    p.add_argument("--q", default="0", help="drift: expression (2D: 'q1;q2') or @file")


def _add_grid(p, n_default=128):
    p.add_argument("--L", type=float, default=1.0, help="period (first axis)")
    p.add_argument("--L2", type=float, default=None, help="second period; selects 2D")
    p.add_argument("--n", type=int, default=n_default, help="grid points (first axis)")
    p.add_argument("--n2", type=int, default=None, help="grid points on the second axis; selects 2D")


def _add_out(p):
    p.add_argument("--out", default=None, help="output file (written atomically)")
    p.add_argument("--format", choices=("json", "csv", "text"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schwarzeig",
        description="Periodic principal eigenvalues, rearrangements and spreading speeds.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    for name, hlp in (("eig", "principal eigenvalue k"),
                      ("adjoint", "principal eigenvalue of the operator and of its adjoint")):
        p = sub.add_parser(name, help=hlp, description=hlp)
        _add_coeffs(p)
        _add_grid(p)
        p.add_argument("--lambda", dest="lam", type=float, default=0.0)
        p.add_argument("--e", default=None, help="drift direction ('e1,e2' in 2D)")
        p.add_argument("--tol", type=float, default=None)
        _add_out(p)
        p.set_defaults(func=cmd_eig)

    p = sub.add_parser("rearrange", help="Schwarz, harmonic or Steiner rearrangement")
    _add_coeffs(p)
    _add_grid(p)
    p.add_argument("--kind", choices=("schwarz", "harmonic", "steiner"), default="schwarz",
                   help="schwarz and steiner act on --mu, harmonic on --a")
    p.add_argument("--order", default="xy", choices=("xy", "yx"), help="Steiner axis order")
    p.add_argument("--out", default=None, help="gridfn output file")
    p.set_defaults(func=cmd_rearrange)

    p = sub.add_parser("dispersion", help="k over a list of lambda (CSV by default)")
    _add_coeffs(p)
    _add_grid(p)
    p.add_argument("--lambda-list", dest="lambda_list", default="0,0.25,0.5,1,2,5")
    p.add_argument("--e", default=None)
    p.add_argument("--tol", type=float, default=None)
    _add_out(p)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("speed", help="spreading speed c* and its minimizer lambda*")
    _add_coeffs(p)
    _add_grid(p)
    p.add_argument("--e", default=None)
    p.add_argument("--tol", type=float, default=None, help="relative bracket width (default 1e-8)")
    _add_out(p)
    p.set_defaults(func=cmd_speed)

    p = sub.add_parser("deff", help="effective diffusivity of a scalar diffusion field")
    _add_coeffs(p)
    _add_grid(p)
    p.add_argument("--e", default=None)
    _add_out(p)
    p.set_defaults(func=cmd_deff)

    p = sub.add_parser("holland", help="Holland transform and the max formula at lambda = 0")
    _add_coeffs(p)
    _add_grid(p)
    p.add_argument("--tol", type=float, default=None)
    _add_out(p)
    p.set_defaults(func=cmd_holland)

    p = sub.add_parser("verify", help="run a verification experiment and emit a report")
    p.add_argument("experiment", choices=tuple(ex.EXPERIMENTS))
    _add_coeffs(p, mu_default=None)
    p.add_argument("--mu2", default="1", help="second growth rate (equivalence)")
    _add_grid(p, n_default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--lambda-list", dest="lambda_list", default=None)
    p.add_argument("--L-list", dest="L_list", default=None, help="periods for the period scan")
    p.add_argument("--M-list", dest="M_list", default=None, help="growth shifts (equivalence)")
    p.add_argument("--e", default=None)
    p.add_argument("--tol", type=float, default=None, help="eigen tolerance (counterexample, equivalence)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--cases", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    _add_out(p)
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.command == "verify":
        if args.format == "text":
            args.format = None
        elif args.format is None and args.out:
            args.format = "csv" if args.out.lower().endswith(".csv") else "json"
        if args.cases is None and args.experiment == "rearrangement":
            args.cases = 50
    elif getattr(args, "format", None) == "csv" and args.command not in ("dispersion",):
        args.format = "text"
    try:
        return args.func(args)
    except (UsageError, ExpressionError, FileNotFoundError, NoInvasionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
