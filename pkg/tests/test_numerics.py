import csv
import math
import time
from fractions import Fraction

import mpmath

import numpy as np
import pytest

from mroot import curvature as cv
from mroot import generate as gen
from mroot import numerics as nu
from mroot.metric import MRootMetric
from mroot.polyalg import Derivation, Ring


def test_eval_at_examples():
    q = gen.quartic()
    assert nu.eval_at(q.F, [0, 0], [1, 1]) == pytest.approx(2 ** 0.25)
    assert nu.eval_at(q.F, nu.EvalPoint([0, 0], [1, 1])) == pytest.approx(1.189207, abs=1e-6)
    assert np.allclose(nu.eval_at(gen.euclidean().tensor.g, [0.3, 0.1], [0.2, 0.7]), np.eye(2))
    G = nu.eval_at(cv.spray_mroot(gen.uq()).G, [0, 0], [1, 0])
    assert G == pytest.approx([1 / 8, 0])


def test_eval_at_rejects_unknown():
    with pytest.raises(TypeError):
        nu.eval_at("A", [0, 0], [1, 0])


def test_fd_first_order_polynomial():
    A = gen.uq().A
    err = nu.finite_diff_check(A, [0.1, 0.2], [0.8, 0.6], [("y1",), ("y2",), ("x1",)])
    assert err < 1e-8


def test_fd_dually_flat_ingredients():
    M = gen.quartic_x()
    X = M.ctx.power(Fraction(2, M.m))
    with mpmath.workdps(40):
        x = [mpmath.mpf("0.1"), mpmath.mpf("-0.1")]
        y = [mpmath.mpf("0.6"), mpmath.mpf("0.8")]
        for l in range(2):
            sym = X.contract_x().dy(l) - X.dx(l)
            num = sum(y[k] * nu.fd_partial(X.eval_mp, x, y, [f"x{k + 1}", f"y{l + 1}"],
                                           mpmath.mpf("1e-4")) for k in range(2))
            s = sym.eval_mp(x, y)
            assert abs(num - s) <= 1e-6 * max(1, abs(s))


@pytest.mark.parametrize("M", gen.random_metrics(4, seed=11), ids=lambda M: f"n{M.n}m{M.m}")
def test_fd_every_derivative_class(M):
    F = M.F
    n = M.n
    pts = nu.admissible_points(M, 10, 2)
    first = [(f"{v}{i + 1}",) for v in "xy" for i in range(n)]
    second = [(f"x{i + 1}", f"y{j + 1}") for i in range(n) for j in range(n)]
    for x, y in pts:
        assert nu.finite_diff_check(F, x, y, first) < 1e-6
        # default step 1e-4 leaves an O(h^2) error near 1e-6 close to the axes;
        # the smaller step shows it is truncation, not a wrong symbolic partial
        assert nu.finite_diff_check(F * F, x, y, second) < 1e-5
        assert nu.finite_diff_check(F * F, x, y, second, h=1e-6) < 1e-9


def test_geodesic_minkowski_straight():
    M = gen.quartic()
    x0, y0 = np.array([0.1, -0.2]), np.array([0.7, 0.4])
    tr = nu.geodesic_integrate(M, x0, y0, 1000, 1e-3)
    dev = np.max(np.abs(tr.X - (x0 + np.outer(tr.t, y0))))
    assert dev < 1e-10
    assert tr.truncated is None


def test_geodesic_euclidean_straight():
    M = gen.euclidean()
    tr = nu.geodesic_integrate(M, [0, 0], [1, 2], 200, 1e-3)
    assert np.allclose(tr.X[-1], [0.2, 0.4], atol=1e-12)


@pytest.mark.parametrize("M", [gen.uq(), gen.quartic_x(), gen.conformal_riemannian(),
                               gen.minkowski_beta(), gen.closed_beta_minkowski()],
                         ids=["uq", "quartic_x", "conformal", "minkowski_beta", "closed_beta"])
def test_geodesic_conserves_F(M):
    tr = nu.geodesic_integrate(M, [0.05, 0.02], [0.8, 0.6], 1000, 1e-3)
    assert tr.truncated is None
    assert tr.drift < 1e-7


def test_geodesic_exact_one_form_is_reparametrized_line():
    M = gen.closed_beta_minkowski()
    x0, y0 = np.array([0.0, 0.1]), np.array([0.6, 0.8])
    tr = nu.geodesic_integrate(M, x0, y0, 500, 1e-3)
    # same straight lines, reparametrized: check collinearity with y0
    d = tr.X - x0
    assert np.max(np.abs(d[:, 0] * y0[1] - d[:, 1] * y0[0])) < 1e-9
    assert np.all(np.diff(d @ y0) > 0)


def test_geodesic_truncation():
    M = gen.uq()
    tr = nu.geodesic_integrate(M, [-0.9, 0.0], [-50.0, 3.0], 2000, 1e-3)
    assert tr.truncated is not None and "admissible" in tr.truncated
    assert len(tr.t) < 2001


def test_geodesic_rejects_bad_start():
    with pytest.raises(ValueError):
        nu.geodesic_integrate(gen.uq(), [-2.0, 0], [1, 0], 10, 1e-3)


def test_geodesic_csv(tmp_path):
    tr = nu.geodesic_integrate(gen.uq(), [0, 0], [1, 0.3], 5, 1e-3)
    p = tmp_path / "g.csv"
    tr.to_csv(p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["t", "x1", "x2", "v1", "v2", "F"]
    assert len(rows) == 7
    assert float(rows[-1][1]) == tr.X[-1][0]  # 17 significant digits round-trip


def test_sigma_euclidean():
    assert nu.bh_volume_sigma(gen.euclidean(), [0.2, 0.1]).sigma == pytest.approx(1, abs=1e-8)
    assert nu.bh_volume_sigma(gen.euclidean(3), [0, 0, 0]).sigma == pytest.approx(1, abs=1e-8)


def test_sigma_scaling():
    M = gen.quartic()
    base = nu.bh_volume_sigma(M, [0, 0])
    lam = 1.7
    scaled = nu.bh_volume_sigma(M, [0, 0], Ffun=lambda y: lam * M.F_value([0, 0], y))
    assert scaled.volume == pytest.approx(base.volume * lam ** -2, rel=1e-10)


def test_sigma_quartic_monte_carlo():
    M = gen.quartic()
    vol = nu.bh_volume_sigma(M, [0, 0]).volume
    rng = np.random.default_rng(0)
    N = 10 ** 7
    y = rng.uniform(-1, 1, size=(N, 2))
    p = np.mean(y[:, 0] ** 4 + y[:, 1] ** 4 < 1)
    est, se = 4 * p, 4 * math.sqrt(p * (1 - p) / N)
    assert abs(vol - est) < 3 * se


def test_sigma_rotation_invariance():
    M = gen.quartic()
    th = 0.37
    Rm = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    a = nu.bh_volume_sigma(M, [0, 0]).sigma
    b = nu.bh_volume_sigma(M, [0, 0], Ffun=lambda y: M.F_value([0, 0], Rm @ y)).sigma
    assert a == pytest.approx(b, rel=1e-6)


def test_sigma_rejects_non_positive():
    with pytest.raises(ValueError):
        nu.bh_volume_sigma(gen.cubic(), [0, 0])


def test_s_curvature_minkowski():
    for M in (gen.quartic(), gen.euclidean(), gen.minkowski_beta()):
        s = nu.s_curvature_numeric(M, [0.1, 0.0], [0.6, 0.8])
        assert abs(s.S) < 1e-6


def test_s_curvature_uq_consistency():
    # F = u^(1/m) F0 gives sigma = u^(n/m) sigma0, so y^i d_i ln sigma = (n/m) u_0 / u
    M = gen.uq()
    eta = cv.spray_divergence(M)
    for x, y in M.ctx.sample_points(10, 4):
        s = nu.s_curvature_numeric(M, x, y)
        assert s.divergence == pytest.approx(eta.eval_float(x, y), rel=1e-12)
        assert s.volume_term == pytest.approx(0.5 * y[0] / (1 + x[0]), rel=1e-6, abs=1e-9)
        assert not s.flagged


def test_distortion_euclidean():
    assert nu.distortion(gen.euclidean(), [0, 0], [0.3, 0.4]) == pytest.approx(0, abs=1e-12)


class TestFunk:
    def test_origin(self):
        assert nu.funk_builtin([0, 0], [3, 4]).F == pytest.approx(5)

    def test_homogeneity(self):
        a = nu.funk_builtin([0.2, -0.3], [0.5, 0.1]).F
        b = nu.funk_builtin([0.2, -0.3], [1.5, 0.3]).F
        assert b == pytest.approx(3 * a)

    def test_domain(self):
        with pytest.raises(ValueError):
            nu.funk_builtin([0.8, 0.6], [1, 0])
        with pytest.raises(ValueError):
            nu.funk_builtin([0.1, 0.1], [0, 0])

    def test_first_derivatives_against_fd(self):
        x, y = np.array([0.3, -0.2]), np.array([0.4, 0.9])
        fv = nu.funk_builtin(x, y)
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fx = (nu.funk_builtin(x + e, y).F - nu.funk_builtin(x - e, y).F) / (2 * h)
            fy = (nu.funk_builtin(x, y + e).F - nu.funk_builtin(x, y - e).F) / (2 * h)
            assert fv.Fx[i] == pytest.approx(fx, rel=1e-7)
            assert fv.Fy[i] == pytest.approx(fy, rel=1e-7)

    def test_validate(self):
        t0 = time.perf_counter()
        res = nu.funk_validate(100)
        assert time.perf_counter() - t0 < 10
        assert max(res.values()) < 1e-9


def test_flag_curvature_numeric_generalized_minkowski():
    M = gen.minkowski_generalized()
    K = nu.flag_curvature_numeric(M, [0.1, 0.0], [0.6, 0.8], [1.0, -0.3])
    assert abs(K) < 1e-8


def test_admissible_points_are_well_conditioned():
    M = gen.uq()
    pts = nu.admissible_points(M, 20, 5)
    assert len(pts) == 20
    for x, y in pts:
        ev = np.linalg.eigvalsh(M.g_value(x, y))
        assert M.admissible(x, y) and ev[0] > 1e-3 * ev[-1]
    # the raw sampler can land next to the degenerate line y1 = 0
    assert any(abs(y[0]) < 1e-3 for _, y in M.ctx.sample_points(10, 5))
