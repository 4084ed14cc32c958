from fractions import Fraction

import pytest

from mroot import generate as gen
from mroot import transforms as tr
from mroot.metric import ConformalBetaChange, GeneralizedMRoot, MRootMetric
from mroot.polyalg import RatFn, Ring

R = Ring(2)
x1, x2 = R.xs()
y1, y2 = R.ys()


@pytest.fixture(scope="module")
def mutations():
    return gen.dually_flat_mutations()


def test_as_change_wraps_plain_metrics():
    C = tr.as_change(gen.quartic())
    assert isinstance(C, ConformalBetaChange) and C.is_trivial()


def test_dually_flat_instance_passes():
    M = gen.dually_flat_instance()
    D = tr.dually_flat_residual(M)
    assert D.vanishes
    v = tr.check_dually_flat_conditions(M)
    assert v.passed, v.render()
    assert v.item("agrees with residual").ok


def test_mutations_fail_both_ways(mutations):
    assert len(mutations) == 20
    for label, M in mutations:
        D = tr.dually_flat_residual(M)
        v = tr.check_dually_flat_conditions(M)
        assert not D.vanishes, label
        assert v.status == "fail", label
        assert v.item("agrees with residual").ok, label


def test_residual_numeric_consistency():
    _, M = gen.dually_flat_mutations()[0]
    D = tr.dually_flat_residual(M, samples=50)
    assert D.samples == 50 and D.max_sample > 1e-6


def test_x_dependent_m_root_not_dually_flat():
    v = tr.check_dually_flat_conditions(gen.uq())
    assert not v.passed
    assert v.item("agrees with residual").ok


def test_theta_normalisations():
    M = gen.uq(5)
    t5 = tr.theta_extract(M, "unit")
    t6 = tr.theta_extract(M, "two_m")
    assert t5.theta == RatFn(y1, 1 + x1)
    assert t6.theta * 10 == t5.theta
    assert tr.theta_extract(gen.quartic_x()) is None
    with pytest.raises(ValueError):
        tr.theta_extract(M, "other")


def test_printed_conditions_are_reported():
    out = tr.printed_dually_flat_conditions(gen.dually_flat_instance())
    assert set(out) <= {"printed A condition", "printed Upsilon condition"}


def test_printed_conditions_on_mutations(mutations):
    for label, M in mutations:
        printed = tr.printed_dually_flat_conditions(M)
        v = tr.check_dually_flat_conditions(M)
        assert printed["printed Upsilon condition"] is False
        if "printed A condition" in printed:
            assert printed["printed A condition"] == v.item("A condition with theta").ok, label


def test_projective_flatness_minkowski():
    R_, H, P, v = tr.rapcsak_hamel(gen.quartic())
    assert R_.vanishes and H.vanishes and v.passed
    assert v.item("closed-form spray equals P y").ok


def test_projective_flatness_fails_for_uq():
    R_, H, P, v = tr.rapcsak_hamel(gen.uq())
    assert not R_.vanishes and not H.vanishes
    assert v.item("equivalence of the three systems").ok


@pytest.mark.parametrize("M", [gen.uq(), gen.minkowski_beta(), gen.closed_beta_minkowski(), gen.cascade_instance()])
def test_hamel_equals_rapcsak(M):
    v = tr.conformal_hamel_condition(M)
    assert v.item("(Ham) residual equals the Rapcsak residual of Fbar").ok


def test_exact_one_form_keeps_projective_flatness():
    R_, H, P, v = tr.rapcsak_hamel(gen.closed_beta_minkowski())
    assert v.passed


@pytest.mark.parametrize("M", [gen.minkowski_generalized(), gen.closed_beta_minkowski()])
def test_cascade_passes_on_flat_instances(M):
    v = tr.berwald_reduction_cascade(M)
    assert v.passed, v.render()
    assert v.witnesses["theta"] == "0"
    mv = tr.minkowski_verdict(M)
    assert mv.passed


def test_cascade_preconditions():
    v = tr.berwald_reduction_cascade(gen.uq(5))
    assert v.item("preconditions").status == "fail"
    G = GeneralizedMRoot(y1 ** 4 + y2 ** 4, y1 ** 2 + y2 ** 2, 4)
    assert "m > 4" in tr.berwald_reduction_cascade(G).item("preconditions").detail


def test_cascade_instance_partial():
    v = tr.berwald_reduction_cascade(gen.cascade_instance())
    assert not v.passed
    assert v.item("B_0 = 4 B theta").ok
    assert v.witnesses["theta"] == RatFn(y1, 2 * (1 + x1)).render()
    assert not v.item("G^i = theta y^i").ok
    assert v.item("split reproduces the projective condition").ok
    assert tr.minkowski_verdict(gen.cascade_instance()).item("cascade gate").status == "fail"


def test_cascade_nonclosed_beta_fails():
    base = gen.minkowski_generalized().base
    C = ConformalBetaChange(base, None, [x2, R.zero])
    v = tr.berwald_reduction_cascade(C)
    assert not v.item("beta closed: (b_i)_{x^l} y^i = (b_l)_0").ok
