"""Acceptance criteria 1-9.  Each test records a single PASS/FAIL line."""
import io
import time

import numpy as np
import pytest

from mroot import curvature as cv
from mroot import generate as gen
from mroot import numerics as nu
from mroot import transforms as tr
from mroot.cli import main
from mroot.metric import identity_suite
from mroot.polyalg import RatFn, Ring

# pinned tolerances
FUNK_TOL = 1e-9
FUNK_BUDGET_S = 10.0
FLAG_TOL = 1e-6
FD_TOL = {1: 1e-6, 2: 1e-6, 3: 1e-4}
POLY_FD_TOL = 1e-8
GEODESIC_TOL = 1e-10
SIGMA_TOL = 1e-8
S_TOL = 1e-6
RANDOM_BUDGET_S = 300.0
N_RANDOM, SEED = 100, 2024


@pytest.fixture(scope="module")
def random_metrics():
    t0 = time.perf_counter()
    Ms = gen.random_metrics(N_RANDOM, seed=SEED)
    return Ms, time.perf_counter() - t0


@pytest.fixture(scope="module")
def timings():
    return {}


def test_criterion_1_identities(random_metrics, timings, report):
    Ms, t_gen = random_metrics
    t0 = time.perf_counter()
    bad = [i for i, M in enumerate(Ms) if not identity_suite(M).passed]
    dims = {(M.n, M.m) for M in Ms}
    timings[1] = t_gen + time.perf_counter() - t0
    ok = not bad and len(Ms) == N_RANDOM and dims == {(n, m) for n in (2, 3) for m in (3, 4, 5)}
    report(1, ok, f"{len(Ms) - len(bad)}/{len(Ms)} metrics with empty residuals over (n,m) {sorted(dims)}")
    assert ok, bad


def test_criterion_2_spray(random_metrics, timings, report):
    Ms, _ = random_metrics
    t0 = time.perf_counter()
    bad = [i for i, M in enumerate(Ms) if not cv.spray_crosscheck(M).passed]
    C = gen.conformal_riemannian()
    R = C.ring
    x1 = R.xs()[0]
    y1, y2 = R.ys()
    u, q = 1 + x1, y1 ** 2 + y2 ** 2
    G = cv.spray_mroot(C).G
    christoffel = [RatFn(y1 * y1, 2 * u) - RatFn(q, 4 * u), RatFn(y1 * y2, 2 * u)]
    regression = cv.spray_crosscheck(C).passed and all(a == b for a, b in zip(G, christoffel))
    timings[2] = time.perf_counter() - t0
    ok = not bad and regression
    report(2, ok, f"{len(Ms) - len(bad)}/{len(Ms)} exact crosschecks; Christoffel regression "
                  f"{'exact' if regression else 'MISMATCH'}")
    assert ok


def test_criterion_3_rationality(random_metrics, timings, report):
    Ms, _ = random_metrics
    t0 = time.perf_counter()
    fails = []
    for i, M in enumerate(Ms):
        b = cv.berwald_E(M)
        e = cv.E_report(M)
        if b.classes != [0] and b.classes != []:
            fails.append((i, "B classes", b.classes))
        if e.classes != [0] and e.classes != []:
            fails.append((i, "E classes", e.classes))
        for target in cv.TARGETS:
            v = cv.isotropy_reduction(M, target)
            if not (v.passed and v.witnesses.get("forced") == "c = 0"):
                fails.append((i, target, v.status))
    deicke = []
    for M in (gen.euclidean(), gen.euclidean(3), gen.conformal_riemannian(), gen.conformal_riemannian(3)):
        for target in cv.TARGETS:
            v = cv.isotropy_reduction(M, target)
            deicke.append(v.witnesses.get("branch") == "Deicke")
    timings[3] = time.perf_counter() - t0
    ok = not fails and all(deicke)
    report(3, ok, f"B/E class 0 and c = 0 forced for all 4 targets on {len(Ms)} metrics "
                  f"({len(fails)} failures); Deicke branch on {sum(deicke)}/{len(deicke)} m=2 checks")
    assert ok, fails[:5]


def test_criterion_4_nullities(random_metrics, timings, report):
    Ms, _ = random_metrics
    t0 = time.perf_counter()
    keys = ("B.y = 0", "E.y = 0", "C.y = 0", "L.y = 0", "J.y = 0")
    fails = []
    for i, M in enumerate(Ms):
        b, c, l = cv.berwald_E(M), cv.cartan_mean(M), cv.landsberg_mean(M)
        verdicts = {**b.verdicts, **c.verdicts, **l.verdicts}
        fails += [(i, k) for k in keys if not verdicts[k]]
        T = M.tensor
        ys = M.ring.ys()
        for r in range(M.n):
            acc = M.ctx.zero
            for s in range(M.n):
                acc = acc + T.h[r][s] * ys[s]
            if not acc.is_zero():
                fails.append((i, "h.y = 0"))
    timings[4] = time.perf_counter() - t0
    total = sum(timings.get(k, 0) for k in (1, 2, 3, 4))
    ok = not fails and total < RANDOM_BUDGET_S
    report(4, ok, f"B.y, E.y, C.y, L.y, J.y, h.y exact zero on {len(Ms)} metrics ({len(fails)} failures); "
                  f"criteria 1-4 runtime {total:.1f} s (budget {RANDOM_BUDGET_S:.0f} s)")
    assert ok, fails[:5]


def test_criterion_5_dually_flat_equivalence(report):
    cases = [("instance", gen.dually_flat_instance())] + gen.dually_flat_mutations()
    agree, passing = 0, []
    for label, M in cases:
        res = tr.dually_flat_residual(M)
        cond = tr.check_dually_flat_conditions(M)
        zero = res.status == "pass"
        agree += zero == cond.passed
        if zero:
            passing.append(label)
    ok = agree == len(cases) == 21 and passing == ["instance"]
    report(5, ok, f"conditions agree with residual on {agree}/{len(cases)} cases; "
                  f"residual vanishes on {passing}")
    assert ok


def test_criterion_6_funk(report):
    t0 = time.perf_counter()
    res = nu.funk_validate(points=100, seed=0)
    dt = time.perf_counter() - t0
    worst = max(res.values())
    ok = worst < FUNK_TOL and dt < FUNK_BUDGET_S and set(res) == {
        "identity", "dually_flat", "rapcsak", "projective_factor"}
    report(6, ok, ", ".join(f"{k} {v:.1e}" for k, v in sorted(res.items()))
           + f" (tol {FUNK_TOL:g}); {dt:.2f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="instance is a conformal rescaling of a Minkowski metric; "
                                       "see decisions ledger")
def test_criterion_7_cascade_instance(report):
    m = 5
    C = gen.cascade_instance(m=m, v_power=2)
    v = tr.berwald_reduction_cascade(C)
    R = C.ring
    x1 = R.xs()[0]
    y1 = R.ys()[0]
    expected = RatFn(y1, 2 * m * (1 + x1))
    w = tr.theta_extract(C.base, "two_m")
    theta_ok = w is not None and w.theta == expected
    G_ok = v.item("G^i = theta y^i") is not None and v.item("G^i = theta y^i").ok
    Ks = [abs(nu.flag_curvature_numeric(C, x, y, np.array([-y[1], y[0]])))
          for x, y in nu.admissible_points(C, 50, 0)]
    failing = [it.name for it in v.items if not it.ok]
    ok = v.passed and theta_ok and G_ok and max(Ks) < FLAG_TOL
    report(7, ok, f"cascade {v.status} (failing: {', '.join(failing) or 'none'}); theta = "
                  f"{w.theta.render() if w else 'none'} vs expected {expected.render()}; "
                  f"|K| at 50 flags: median {np.median(Ks):.2e}, max {max(Ks):.2e} (tol {FLAG_TOL:g})")
    assert ok


def test_criterion_8_numeric_oracles(report):
    worst = {1: 0.0, 2: 0.0, 3: 0.0, "poly": 0.0}
    # first order: A_i (polynomial) and F for random metrics; (A^(1/m))_{x^l} for u Q
    for M in gen.random_metrics(6, seed=SEED) + [gen.uq(), gen.quartic_x()]:
        first = [(f"{v}{i + 1}",) for v in "xy" for i in range(M.n)]
        for x, y in nu.admissible_points(M, 10, 3):
            worst["poly"] = max(worst["poly"], nu.finite_diff_check(M.A, x, y, first))
            worst[1] = max(worst[1], nu.finite_diff_check(M.F, x, y, first))
    # second order: the dually-flat ingredient (F^2)_{x^k y^l} y^k
    import mpmath
    M = gen.quartic_x()
    X = M.F * M.F
    for x, y in nu.admissible_points(M, 10, 4):
        with mpmath.workdps(40):
            xm, ym = [mpmath.mpf(float(a)) for a in x], [mpmath.mpf(float(b)) for b in y]
            for l in range(M.n):
                sym = (X.contract_x().dy(l) - X.dx(l)).eval_mp(xm, ym)
                num = sum(ym[k] * nu.fd_partial(X.eval_mp, xm, ym, [f"x{k + 1}", f"y{l + 1}"],
                                                mpmath.mpf("1e-4")) for k in range(M.n))
                worst[2] = max(worst[2], float(abs(sym - num) / max(abs(sym), 1)))
    # third order: Berwald curvature against third differences of G
    from mroot.polyalg import Derivation
    M = gen.uq()
    G = cv.spray_mroot(M).G
    Bs = cv.berwald_E(M).entries
    for x, y in nu.admissible_points(M, 10, 5):
        for (i, j, k, l), b in Bs.items():
            seq = (Derivation("y", j), Derivation("y", k), Derivation("y", l))
            worst[3] = max(worst[3], nu.finite_diff_check(G[i], x, y, [seq], symbolic={seq: b}))
    # geodesics of Minkowski metrics
    dev = 0.0
    for M in (gen.quartic(), gen.quartic(3), gen.euclidean()):
        x0 = np.full(M.n, 0.1)
        y0 = np.linspace(0.5, 0.9, M.n)
        t = nu.geodesic_integrate(M, x0, y0, 1000, 1e-3)
        dev = max(dev, float(np.max(np.abs(t.X - (x0 + np.outer(t.t, y0))))))
    sig = max(abs(nu.bh_volume_sigma(gen.euclidean(n), np.zeros(n)).sigma - 1) for n in (2, 3))
    S = max(abs(nu.s_curvature_numeric(M, [0.1, -0.05], [0.6, 0.8]).S)
            for M in (gen.quartic(), gen.minkowski_beta(), gen.minkowski_generalized()))
    ok = (worst["poly"] < POLY_FD_TOL and worst[1] < FD_TOL[1] and worst[2] < FD_TOL[2]
          and worst[3] < FD_TOL[3] and dev < GEODESIC_TOL and sig < SIGMA_TOL and S < S_TOL)
    report(8, ok, f"fd A_i {worst['poly']:.1e}, order1 {worst[1]:.1e}, order2 {worst[2]:.1e}, "
                  f"order3 {worst[3]:.1e}; geodesic dev {dev:.1e}; |sigma-1| {sig:.1e}; |S| {S:.1e}")
    assert ok


def test_criterion_9_cli(fixtures, report):
    from cli_grid import GRID, argv_for
    mism = []
    for cmd, row in GRID.items():
        for f, code in row.items():
            argv = argv_for(cmd, fixtures / f"{f}.fm")
            got = main(argv, stdout=io.StringIO(), stderr=io.StringIO())
            if got != code:
                mism.append((cmd, f, got, code))
    for name in ("bad_degree", "bad_dim", "bad_syntax"):
        got = main(["validate", str(fixtures / f"{name}.fm")], stdout=io.StringIO(), stderr=io.StringIO())
        if got != 2:
            mism.append(("validate", name, got, 2))
    same = 0
    runs = [["check", "dually-flat", str(fixtures / "quartic_x.fm")],
            ["curvature", str(fixtures / "uq.fm"), "--which", "riemann"],
            ["scurv", str(fixtures / "uq.fm"), "--x", "0.1", "0.1"],
            ["check", "cascade", str(fixtures / "closed_beta.fm")]]
    for argv in runs:
        a, b = io.StringIO(), io.StringIO()
        main(argv, stdout=a)
        main(argv, stdout=b)
        same += a.getvalue() == b.getvalue()
    n = sum(len(r) for r in GRID.values()) + 3
    ok = not mism and same == len(runs)
    report(9, ok, f"{n - len(mism)}/{n} grid cells honor the exit-code contract; "
                  f"{same}/{len(runs)} reports byte-identical across two runs")
    assert ok, mism
