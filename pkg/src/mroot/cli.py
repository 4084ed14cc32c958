"""Command-line interface: ``mroot <command> [options] FILE``.

Exit codes: 0 computed or check passed, 1 check failed, 2 input error,
3 undecidable (independence screen).
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import curvature, numerics, transforms
from .aexpr import IndependenceError, VerdictMismatch
from .metric import ConformalBetaChange, GeneralizedMRoot, MetricError, MRootMetric, identity_suite, screen
from .metricfile import MetricFileError, parse_metric_file
from .verdict import FAIL, PASS, UNDECIDABLE

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNDECIDABLE = 0, 1, 2, 3
_CODE = {PASS: EXIT_OK, FAIL: EXIT_FAIL, UNDECIDABLE: EXIT_UNDECIDABLE}


class InputError(Exception):
    pass


def _fmt(v):
    return f"{v:.6e}"


def _vec(v):
    return "(" + ", ".join(_fmt(float(a)) for a in v) + ")"


def _load(path):
    mf = parse_metric_file(path)
    return mf, mf.to_metric(name=str(path))


def _plain(M):
    """The m-th root metric behind ``M`` or an input error."""
    if isinstance(M, ConformalBetaChange):
        if not M.is_trivial():
            raise InputError("this command needs an m-th root metric (no alpha/beta blocks)")
        M = M.base
    if isinstance(M, GeneralizedMRoot):
        if not M.B.is_zero():
            raise InputError("this command needs an m-th root metric (no B block)")
        return MRootMetric(M.A, M.m, name=M.name)
    return M


def _describe(M):
    lines = [f"kind: {M.kind}", f"dim: {M.n}", f"root: {M.m}"]
    if isinstance(M, ConformalBetaChange):
        lines.append(f"A: {M.A.render()}")
        if not M.B.is_zero():
            lines.append(f"B: {M.B.render()}")
        lines.append(f"alpha: {M.alpha.render()}")
        lines.append("beta: " + ", ".join(b.render() for b in M.b))
    else:
        lines.append(f"A: {M.A.render()}")
        if isinstance(M, GeneralizedMRoot):
            lines.append(f"B: {M.B.render()}")
    return lines


# --- commands -------------------------------------------------------------------

def cmd_validate(args, out):
    mf, M = _load(args.file)
    out.extend(_describe(M))
    base = M.base if isinstance(M, ConformalBetaChange) else M
    res = screen(base, seed=args.seed)
    out.append(f"screen: {'ok' if res.ok else 'failed'}, {res.admissible} of {res.total} sampled points admissible")
    if res.reason:
        out.append(f"reason: {res.reason}")
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_identities(args, out):
    _, M = _load(args.file)
    if not isinstance(M, MRootMetric) or isinstance(M, GeneralizedMRoot):
        base = M.base if isinstance(M, ConformalBetaChange) else M
        M = MRootMetric(base.A, base.m)
        out.append("note: identities checked for the m-th root part A")
    v = identity_suite(M)
    out.append(v.render())
    return _CODE[v.status]


def cmd_spray(args, out):
    _, M = _load(args.file)
    M = _plain(M)
    sp = curvature.spray_mroot(M)
    for i, g in enumerate(sp.G):
        out.append(f"G^{i + 1} = {g.render()}")
    if args.crosscheck:
        v = curvature.spray_crosscheck(M)
        out.append(v.render())
        if v.passed:
            out.append("closed form spray == definitional spray")
        return _CODE[v.status]
    return EXIT_OK


def cmd_curvature(args, out):
    _, M = _load(args.file)
    M = _plain(M)
    which = args.which
    if which == "berwald":
        rep = curvature.berwald_E(M)
    elif which == "E":
        rep = curvature.E_report(M)
    elif which == "cartan":
        rep = curvature.cartan_mean(M)
    elif which in ("landsberg", "J"):
        rep = curvature.landsberg_mean(M)
    else:
        rep = curvature.riemann_flag(M)
    out.append(rep.render())
    return EXIT_OK


def cmd_check(args, out):
    _, M = _load(args.file)
    what = args.what
    if what == "dually-flat":
        res = transforms.dually_flat_residual(M, seed=args.seed)
        out.append(res.render())
        if res.status == PASS:
            out.append("D == 0")
        status = res.status
        try:
            v = transforms.check_dually_flat_conditions(M, seed=args.seed)
            out.append(v.render())
        except ValueError as exc:
            out.append(f"note: condition form not applicable: {exc}")
        return _CODE[status]
    if what == "proj-flat":
        R, H, P, v = transforms.rapcsak_hamel(M, seed=args.seed)
        out.append(R.render())
        out.append(H.render())
        out.append(f"projective factor P = {P.render()}")
        out.append(v.render())
        return _CODE[v.status]
    if what == "isotropy":
        P = _plain(M)
        v = curvature.isotropy_reduction(P, args.target, convention=args.convention)
        out.append(v.render())
        return _CODE[v.status]
    if what == "cascade":
        v = transforms.berwald_reduction_cascade(M, seed=args.seed)
        out.append(v.render())
        if v.passed:
            mv = transforms.minkowski_verdict(M, seed=args.seed)
            out.append(mv.render())
            return _CODE[mv.status]
        return _CODE[v.status]
    raise InputError(f"unknown check {what!r}")


def cmd_geodesic(args, out):
    _, M = _load(args.file)
    if len(args.x0) != M.n or len(args.y0) != M.n:
        raise InputError(f"--x0 and --y0 need {M.n} values")
    try:
        tr = numerics.geodesic_integrate(M, args.x0, args.y0, args.steps, args.dt)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out.append(f"method: rk4, dt = {_fmt(args.dt)}, steps = {len(tr.t) - 1}")
    out.append(f"x(T) = {_vec(tr.X[-1])}")
    out.append(f"v(T) = {_vec(tr.V[-1])}")
    out.append(f"F drift = {_fmt(tr.drift)}")
    if tr.truncated:
        out.append(f"truncated: {tr.truncated}")
    if args.out:
        tr.to_csv(args.out)
        out.append(f"wrote {args.out}")
    return EXIT_OK


def cmd_scurv(args, out):
    _, M = _load(args.file)
    y = args.y if args.y else [M.n ** -0.5] * M.n
    if len(args.x) != M.n or len(y) != M.n:
        raise InputError(f"--x and --y need {M.n} values")
    try:
        s = numerics.s_curvature_numeric(M, np.array(args.x), np.array(y))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out.append(f"S = {_fmt(s.S)}")
    out.append(f"divergence term = {_fmt(s.divergence)}")
    out.append(f"volume term = {_fmt(s.volume_term)}")
    out.append(f"tau = {_fmt(s.tau)}")
    out.append(f"estimated error = {_fmt(s.error)}" + (" (flagged)" if s.flagged else ""))
    return EXIT_OK


def cmd_funk(args, out):
    res = numerics.funk_validate(points=args.points, seed=args.seed)
    ok = True
    for k in sorted(res):
        good = res[k] < 1e-9
        ok &= good
        out.append(f"{k}: max residual {_fmt(res[k])} {'ok' if good else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


# --- parser ---------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="mroot", description="Exact checks for m-th root Finsler metrics.")
    p.add_argument("--seed", type=int, default=0, help="seed for numeric confirmations")
    p.add_argument("--timings", action="store_true", help="append wall-clock time to the report")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)
    s = sub.add_parser("identities")
    s.add_argument("file")
    s.set_defaults(func=cmd_identities)
    s = sub.add_parser("spray")
    s.add_argument("file")
    s.add_argument("--crosscheck", action="store_true")
    s.set_defaults(func=cmd_spray)
    s = sub.add_parser("curvature")
    s.add_argument("file")
    s.add_argument("--which", required=True, choices=["berwald", "E", "cartan", "landsberg", "J", "riemann"])
    s.set_defaults(func=cmd_curvature)

    s = sub.add_parser("check")
    s.add_argument("what", choices=["dually-flat", "proj-flat", "isotropy", "cascade"])
    s.add_argument("file")
    s.add_argument("--target", choices=list(curvature.TARGETS), default="S")
    s.add_argument("--convention", choices=["Finv", "F"], default="Finv")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("geodesic")
    s.add_argument("file")
    s.add_argument("--x0", type=float, nargs="+", required=True)
    s.add_argument("--y0", type=float, nargs="+", required=True)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--out")
    s.set_defaults(func=cmd_geodesic)

    s = sub.add_parser("scurv")
    s.add_argument("file")
    s.add_argument("--x", type=float, nargs="+", required=True)
    s.add_argument("--y", type=float, nargs="+")
    s.set_defaults(func=cmd_scurv)

    s = sub.add_parser("funk-validate")
    s.add_argument("--points", type=int, default=100)
    s.set_defaults(func=cmd_funk)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    out = ["$ mroot " + " ".join(sys.argv[1:] if argv is None else argv)]
    t0 = time.perf_counter()
    try:
        code = args.func(args, out)
    except (MetricFileError, InputError, MetricError, OSError) as exc:
        print(f"mroot: error: {exc}", file=stderr)
        return EXIT_INPUT
    except (IndependenceError, VerdictMismatch) as exc:
        out.append(f"undecidable: {exc}")
        code = EXIT_UNDECIDABLE
    if args.timings:
        out.append(f"time: {time.perf_counter() - t0:.3f} s")
    print("\n".join(out), file=stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
