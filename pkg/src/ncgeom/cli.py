"""Command-line entry point: ``ncgeom``.

Exit codes: 0 success, 2 parse/validation error, 3 non-unique solve,
4 tolerance failure. Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys

from .curvature import ricci, scalar, torus_closed_form_ric_scal
from .errors import NonUniqueError, ToleranceError, ValidationError
from .expr import parse_element
from .levi_civita import (
    SOLVER_TOL,
    compatibility_residual,
    reference_connection,
    solve_conformal,
    solve_koszul,
    solve_truncated,
    torsion_residual,
    torus_christoffel_closed_form,
)
from .metric import ConformalMetric
from .presets import PRESET_IDS, heisenberg, nc_torus
from .report import Check, ReportDocument, render_table, serialize
from .suite import AGREE_TOL, EXACT_TOL, heisenberg_checks, selftest_checks, torus_checks

EXIT_OK, EXIT_INVALID, EXIT_NONUNIQUE, EXIT_TOLERANCE = 0, 2, 3, 4
METHODS = ("koszul", "conformal", "truncated")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _positive_float(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _window(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ncgeom", description="Levi-Civita connections and curvature on noncommutative spaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fmt = dict(choices=("json", "table"), default="json")

    torus = sub.add_parser("torus", help="noncommutative 2-torus").add_subparsers(dest="action", required=True, parser_class=_Parser)
    tc = torus.add_parser("curvature", help="curvature of k * identity")
    tc.add_argument("--theta", type=float, required=True)
    tc.add_argument("--k", required=True, help='conformal factor, e.g. "3 + U + U^-1"')
    tc.add_argument("--method", choices=METHODS + ("all",), default="koszul")
    tc.add_argument("--window", type=_window, default=32)
    tc.add_argument("--neumann-eps", type=_positive_float, default=1e-12)
    tc.add_argument("--format", **fmt)

    heis = sub.add_parser("heisenberg", help="quantum Heisenberg manifold").add_subparsers(dest="action", required=True, parser_class=_Parser)
    hc = heis.add_parser("curvature")
    hc.add_argument("--convention", choices=("paper", "strict"), default="paper")
    hc.add_argument("--format", **fmt)

    ver = sub.add_parser("verify", help="residual suite for a preset")
    ver.add_argument("--preset", choices=PRESET_IDS, required=True)
    ver.add_argument("--theta", type=float, default=0.0)
    ver.add_argument("--k", default="1")
    ver.add_argument("--convention", choices=("paper", "strict"), default="paper")
    ver.add_argument("--window", type=_window, default=32)
    ver.add_argument("--neumann-eps", type=_positive_float, default=1e-12)
    ver.add_argument("--format", **fmt)

    st = sub.add_parser("selftest", help="full invariant suite")
    st.add_argument("--format", **fmt)
    return p


def _residual_checks(residuals, tol):
    return [Check(name, residuals[name], tol, residuals[name] <= tol) for name in ("torsion", "compatibility")]


def _gamma_list(c):
    return c.gamma.tolist()


def _torus_curvature(args) -> ReportDocument:
    space, g0 = nc_torus(args.theta)
    k = parse_element(args.k, space)
    gk = ConformalMetric(k, g0, args.neumann_eps)
    nabla0 = reference_connection(space)
    methods = METHODS if args.method == "all" else (args.method,)
    sols = {}
    for m in methods:
        if m == "koszul":
            sols[m] = solve_koszul(space, gk, nabla0)
        elif m == "conformal":
            sols[m] = solve_conformal(space, g0, k, nabla0, args.neumann_eps)
        else:
            sols[m] = solve_truncated(space, gk, nabla0, window=args.window)
    primary = sols[methods[0]]
    ric = ricci(space, primary)
    scal = scalar(space, gk, ric)
    residuals = {
        "torsion": torsion_residual(space, primary),
        "compatibility": compatibility_residual(space, gk, primary),
        "inversion": gk.inverse_residual(),
        "inversion_tail": gk.inverse_tail,
    }
    agreement = {}
    for i, a in enumerate(methods):
        for b in methods[i + 1:]:
            agreement[f"{a}-{b}"] = sols[a].distance(sols[b])
    if args.method == "all":
        ric_cf, scal_cf = torus_closed_form_ric_scal(space, k, args.neumann_eps)
        agreement["christoffel-closed-form"] = primary.distance(torus_christoffel_closed_form(space, k, args.neumann_eps))
        agreement["ricci-closed-form"] = ric.distance(ric_cf)
        agreement["scal-closed-form"] = (scal - scal_cf).l1norm()
    checks = _residual_checks(residuals, SOLVER_TOL)
    checks.append(Check("inversion", residuals["inversion"], args.neumann_eps + gk.inverse_tail,
                        residuals["inversion"] <= args.neumann_eps + gk.inverse_tail))
    checks += [Check(f"agreement {name}", v, AGREE_TOL, v <= AGREE_TOL) for name, v in agreement.items()]
    return ReportDocument(
        request={"command": "torus curvature", "preset": "nc-torus", "theta": args.theta, "k": args.k,
                 "method": args.method, "window": args.window, "neumann_eps": args.neumann_eps},
        ambient=space.theta,
        gamma=_gamma_list(primary),
        ric=ric.ric.tolist(),
        scal=scal,
        residuals=residuals,
        backends=list(methods),
        agreement=agreement,
        checks=checks,
    )


def _heisenberg_curvature(args) -> ReportDocument:
    space, g, nabla0 = heisenberg()
    c = solve_koszul(space, g, nabla0, args.convention)
    ric = ricci(space, c)
    residuals = {
        "torsion": torsion_residual(space, c),
        "compatibility": compatibility_residual(space, g, c, args.convention),
    }
    return ReportDocument(
        request={"command": "heisenberg curvature", "preset": "heisenberg", "convention": args.convention},
        ambient=space.theta,
        gamma=_gamma_list(c),
        ric=ric.ric.tolist(),
        scal=scalar(space, g, ric),
        residuals=residuals,
        backends=["koszul"],
        checks=_residual_checks(residuals, EXACT_TOL),
    )


def _verify(args) -> ReportDocument:
    request = {"command": "verify", "preset": args.preset}
    if args.preset == "heisenberg":
        checks = heisenberg_checks(args.convention)
        request["convention"] = args.convention
        amb = heisenberg()[0].theta
    else:
        theta = 0.0 if args.preset == "classical-torus" else args.theta
        space, _ = nc_torus(theta)
        k = parse_element(args.k, space)
        checks = torus_checks(theta, k, args.window, args.neumann_eps)
        request.update(theta=theta, k=args.k, window=args.window, neumann_eps=args.neumann_eps)
        amb = space.theta
    return ReportDocument(request=request, ambient=amb, checks=checks)


def _selftest(args) -> ReportDocument:
    return ReportDocument(request={"command": "selftest"}, ambient=nc_torus(0.0)[0].theta, checks=selftest_checks())


def _dispatch(args) -> tuple[int, ReportDocument]:
    if args.command == "torus":
        doc = _torus_curvature(args)
    elif args.command == "heisenberg":
        doc = _heisenberg_curvature(args)
    elif args.command == "verify":
        doc = _verify(args)
    else:
        doc = _selftest(args)
    return (EXIT_OK if doc.ok else EXIT_TOLERANCE), doc


def run_command(argv) -> tuple[int, ReportDocument]:
    """Parse and execute; returns (exit status, report). Errors propagate."""
    return _dispatch(build_parser().parse_args(argv))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(argv)
        status, doc = _dispatch(args)
    except ToleranceError as exc:
        print(f"ncgeom: tolerance failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except NonUniqueError as exc:
        print(f"ncgeom: non-unique solution: {exc}", file=sys.stderr)
        return EXIT_NONUNIQUE
    except ValidationError as exc:
        print(f"ncgeom: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(render_table(doc) if args.format == "table" else serialize(doc))
    if status != EXIT_OK:
        failed = [c.name for c in doc.checks if not c.passed]
        print(f"ncgeom: failed checks: {', '.join(failed)}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
