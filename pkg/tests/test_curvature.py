from fractions import Fraction

import numpy as np
import pytest

from mroot import curvature as cv
from mroot import generate as gen
from mroot.metric import MRootMetric
from mroot.numerics import finite_diff_check, flag_curvature_numeric
from mroot.polyalg import Derivation, RatFn, Ring

R = Ring(2)
x1, x2 = R.xs()
y1, y2 = R.ys()


def test_uq_spray_closed_form():
    # A = u Q with Q = y1^4 + y2^4 and Q^{ij} diagonal:
    # G^i = (1/2u)[u_0 y^i/(m-1) - u_j Q Q^{ij}]
    M = gen.uq()
    u = 1 + x1
    G = cv.spray_mroot(M).G
    assert G[0] == RatFn(3 * y1 ** 4 - y2 ** 4, 24 * u * y1 ** 2)
    assert G[1] == RatFn(y1 * y2, 6 * u)
    x, y = [0.0, 0.0], [1.0, 0.0]
    assert cv.spray_mroot(M).eval(x, y) == pytest.approx([1 / 8, 0.0])


def test_christoffel_regression():
    M = gen.conformal_riemannian()
    u = 1 + x1
    q = y1 ** 2 + y2 ** 2
    G = cv.spray_mroot(M).G
    assert G[0] == RatFn(y1 * y1, 2 * u) - RatFn(q, 4 * u)
    assert G[1] == RatFn(y1 * y2, 2 * u)
    assert cv.spray_crosscheck(M).passed


@pytest.mark.parametrize("name", ["quartic", "quartic_x", "uq", "euclidean", "cubic"])
def test_spray_crosscheck(name):
    assert cv.spray_crosscheck(getattr(gen, name)()).passed


def test_minkowski_flat():
    M = gen.quartic()
    assert all(g.is_zero() for g in cv.spray_mroot(M).G)
    assert cv.berwald_E(M).verdicts["is_berwald"]
    assert cv.riemann_flag(M).verdicts["R vanishes"]


@pytest.mark.parametrize("name", ["quartic_x", "uq", "cubic", "conformal_riemannian"])
def test_contractions_vanish(name):
    M = getattr(gen, name)()
    b = cv.berwald_E(M)
    c = cv.cartan_mean(M)
    l = cv.landsberg_mean(M)
    assert b.verdicts["B.y = 0"] and b.verdicts["E.y = 0"]
    assert c.verdicts["C.y = 0"] and c.verdicts["I.y = 0"]
    assert l.verdicts["L.y = 0"] and l.verdicts["J.y = 0"]
    assert b.verdicts["rational (class 0 only)"]


def test_berwald_rational_but_nonzero():
    b = cv.berwald_E(gen.uq())
    assert not b.verdicts["is_berwald"]
    assert b.classes == [0]


def test_mean_cartan_closed_form():
    M = gen.quartic_x()
    c = cv.cartan_mean(M)
    assert c.verdicts["I = closed form with 1/(2m)"]
    assert not c.verdicts["I = closed form with printed 1/m"]
    assert c.I_classes == [0]


def test_cartan_vanishes_for_riemannian():
    assert cv.cartan_mean(gen.conformal_riemannian()).verdicts["C vanishes (Riemannian)"]
    assert not cv.cartan_mean(gen.quartic()).verdicts["C vanishes (Riemannian)"]


def test_berwald_against_third_differences():
    M = gen.uq()
    G = cv.spray_mroot(M).G
    Bs = cv.berwald_E(M).entries
    x, y = [0.1, 0.05], [0.8, 0.6]
    for (i, j, k, l), b in Bs.items():
        seq = (Derivation("y", j), Derivation("y", k), Derivation("y", l))
        assert finite_diff_check(G[i], x, y, [seq], symbolic={seq: b}) < 1e-4


def test_riemann_against_numeric():
    M = gen.uq()
    rep = cv.riemann_flag(M)
    rng = np.random.default_rng(5)
    for x, y in M.ctx.sample_points(10, 1):
        u = rng.normal(size=2)
        k_sym = rep.flag(x, y, u)
        k_num = flag_curvature_numeric(M, x, y, u)
        assert k_num == pytest.approx(k_sym, rel=1e-4, abs=1e-10)


def test_euclidean_flag_zero():
    M = gen.euclidean()
    assert cv.riemann_flag(M).flag([0.1, 0.2], [1, 0], [0, 1]) == 0


class TestIsotropy:
    def test_quartic_E(self):
        v = cv.isotropy_reduction(gen.quartic(), "E")
        assert v.passed
        assert v.witnesses["forced"] == "c = 0"
        assert v.witnesses["class"] == "1/4"
        assert "exponent -7/4" in v.item("c forced to 0").detail

    def test_quartic_E_F_convention(self):
        v = cv.isotropy_reduction(gen.quartic(), "E", convention="F")
        assert v.witnesses["class"] == "3/4"
        assert "exponent -5/4" in v.item("c forced to 0").detail

    @pytest.mark.parametrize("target", cv.TARGETS)
    def test_forced_on_non_riemannian(self, target):
        for M in (gen.quartic_x(), gen.uq(), gen.cubic()):
            v = cv.isotropy_reduction(M, target)
            assert v.passed and v.witnesses["forced"] == "c = 0", v.render()

    def test_deicke_branch(self):
        for M in (gen.euclidean(), gen.conformal_riemannian()):
            v = cv.isotropy_reduction(M, "J")
            assert v.witnesses["branch"] == "Deicke"
            assert v.witnesses["forced"] == "no"

    def test_perfect_power_still_decided(self):
        # A = P^2 has power index 2, yet the forced class 1/6 is independent of class 0
        P = y1 ** 3 + y2 ** 3 + x1 * y1 * y2 ** 2
        M = MRootMetric(P * P, 6)
        assert M.ctx.power_index == 2
        v = cv.isotropy_reduction(M, "S")
        assert v.passed and v.witnesses["class"] == "1/6"

    def test_unknown_target(self):
        with pytest.raises(ValueError):
            cv.isotropy_reduction(gen.quartic(), "K")
