import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regmod.geometry import HalfSpace, SetCollection
from regmod.moduli import (
    RadiusSchedule, check_metric_inequality, classify_trace, critical_exponent, modulus,
    sub_quotient, theta_rho, zeta_rho_delta,
)
from regmod.presets import preset

R2 = 1 / math.sqrt(2)


def _trace(values, rho0=0.5):
    return [(rho0 * 0.5 ** k, v) for k, v in enumerate(values)]


class TestClassifyTrace:
    def test_flat_trace_is_positive(self):
        verdict, value, unc, _ = classify_trace(_trace([0.7, 0.71, 0.7, 0.7, 0.7, 0.7]))
        assert verdict == "positive"
        assert value == pytest.approx(0.7)
        assert unc == pytest.approx(0.014)

    def test_vanishing_trace_is_zero(self):
        verdict, value, _, notes = classify_trace(_trace([0.5 ** k for k in range(8)]))
        assert verdict == "zero" and value == 0.0
        assert "slope" in notes[0]

    def test_exact_zeros(self):
        assert classify_trace(_trace([0.3, 0.1, 0.0, 0.0, 0.0, 0.0]))[0] == "zero"

    def test_blowup_is_divergent(self):
        verdict, value, _, _ = classify_trace(_trace([2.0 ** k for k in range(8)]))
        assert verdict == "divergent" and math.isinf(value)

    def test_all_infinite_means_empty_domain(self):
        verdict, value, _, notes = classify_trace(_trace([math.inf] * 5))
        assert math.isinf(value) and notes == ["empty sampled domain"]

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.05, 20.0), st.lists(st.floats(-0.01, 0.01), min_size=7, max_size=7))
    def test_noisy_constant_is_recovered(self, c, noise):
        verdict, value, _, _ = classify_trace(_trace([c * (1 + e) for e in noise]))
        assert verdict == "positive"
        assert value == pytest.approx(c, rel=0.02)


def test_radius_schedule_validation():
    assert RadiusSchedule(steps=4).radii().tolist() == [0.5, 0.25, 0.125, 0.0625, 0.03125]
    with pytest.raises(ValueError):
        RadiusSchedule(shrink=1.0)
    with pytest.raises(ValueError):
        RadiusSchedule(steps=2)
    with pytest.raises(ValueError):
        RadiusSchedule(rho0=1e-10, shrink=0.1, steps=9)


def test_modulus_rejects_bad_arguments():
    with pytest.raises(ValueError):
        modulus(preset("2.1"), 0.0)
    with pytest.raises(ValueError):
        modulus(preset("2.1"), 1.0, "nonsense")


@pytest.mark.parametrize("kind", ["semi", "sub", "uniform"])
def test_orthogonal_halfspaces_constant(kind, fast_cfg):
    est = modulus(preset("orth"), 1.0, kind, fast_cfg)
    assert est.verdict == "positive"
    assert est.value == pytest.approx(R2, rel=0.02)
    assert est.witness is not None


def test_example_2_1_values(fast_cfg):
    coll = preset("2.1")
    assert modulus(coll, 0.5, "semi", fast_cfg).value == pytest.approx(R2, rel=0.05)
    assert modulus(coll, 1.0, "semi", fast_cfg).verdict == "zero"
    assert modulus(coll, 1.0, "sub", fast_cfg).value == pytest.approx(1.0, rel=0.05)


def test_uniform_never_exceeds_semi_or_sub(fast_cfg):
    for name in ("2.1", "2.3", "orth"):
        coll = preset(name)
        u = modulus(coll, 1.0, "uniform", fast_cfg)
        for kind in ("semi", "sub"):
            other = modulus(coll, 1.0, kind, fast_cfg)
            assert u.value <= other.value + other.uncertainty + u.uncertainty or other.verdict == "divergent"


def test_interior_point_gives_infinite_constant(fast_cfg):
    coll = SetCollection((HalfSpace([0.0, 1.0]), HalfSpace([1.0, 0.0])), np.ones(2))
    est = modulus(coll, 1.0, "semi", fast_cfg)
    assert math.isinf(est.value) and est.holds
    assert est.notes == ["interior point"]


def test_estimates_are_deterministic(fast_cfg):
    a = modulus(preset("2.3"), 1.0, "semi", fast_cfg).to_dict()
    b = modulus(preset("2.3"), 1.0, "semi", fast_cfg).to_dict()
    assert a == b


def test_thread_count_does_not_change_results(fast_cfg, monkeypatch):
    coll = preset("2.1")
    monkeypatch.setenv("REGMOD_THREADS", "1")
    one = modulus(coll, 0.5, "uniform", fast_cfg).to_dict()
    monkeypatch.setenv("REGMOD_THREADS", "3")
    three = modulus(coll, 0.5, "uniform", fast_cfg).to_dict()
    assert one == three


def test_sub_quotient_at_known_points():
    coll = preset("2.2")
    a = 0.1
    x = 2 * a ** 3 + a
    assert sub_quotient(coll, [x, 0.0]) == pytest.approx(math.sqrt(4 * a ** 6 + a ** 4) / x, rel=1e-6)
    assert math.isinf(sub_quotient(coll, [0.0, 0.0]))
    vals = sub_quotient(preset("orth"), [[-1.0, -1.0], [-2.0, 0.0]])
    np.testing.assert_allclose(vals, [R2, 1.0])


class TestMetricInequality:
    def test_semi_half_passes(self, fast_cfg):
        rep = check_metric_inequality(preset("2.1"), 0.5, "semi", gamma=0.5, delta=0.1, cfg=fast_cfg)
        assert rep.passed

    def test_semi_one_fails(self, fast_cfg):
        rep = check_metric_inequality(preset("2.1"), 1.0, "semi", gamma=0.1, delta=0.1, cfg=fast_cfg)
        assert not rep.passed
        assert rep.witness is not None

    def test_equal_halfplanes_sub(self, fast_cfg):
        h = HalfSpace([0.0, 1.0])  # {v >= 0}
        rep = check_metric_inequality(SetCollection((h, h), np.zeros(2)), 1.0, "sub", 1.0, 1.0, cfg=fast_cfg)
        assert rep.passed

    def test_arguments_validated(self):
        with pytest.raises(ValueError):
            check_metric_inequality(preset("2.1"), 1.0, "sub", 0.0, 0.1)


class TestThetaRho:
    @pytest.mark.parametrize("rho", [0.2, 0.6])
    def test_example_2_1_closed_form(self, rho, fast_cfg):
        assert theta_rho(preset("2.1"), rho, cfg=fast_cfg) == pytest.approx(math.sqrt(1 + rho * rho) - 1, rel=1e-4)

    def test_orthogonal_halfspaces_linear(self, fast_cfg):
        est = theta_rho(preset("orth"), 0.3, cfg=fast_cfg, full=True)
        assert est.value == pytest.approx(0.3 * R2, rel=1e-4)
        assert est.uncertainty < 1e-4

    def test_union_form_agrees(self, fast_cfg):
        coll = preset("2.1")
        a = theta_rho(coll, 0.4, "definition", fast_cfg, full=True)
        b = theta_rho(coll, 0.4, "union_form", fast_cfg, full=True)
        assert abs(a.value - b.value) <= a.uncertainty + b.uncertainty + 1e-6

    def test_translation_disjoint_sets(self, fast_cfg):
        assert theta_rho(preset("2.2"), 0.2, cfg=fast_cfg) <= 1e-6

    def test_bad_method(self):
        with pytest.raises(ValueError):
            theta_rho(preset("2.1"), 0.2, "other")


def test_zeta_rho_delta_orthogonal(fast_cfg):
    assert zeta_rho_delta(preset("orth"), 0.1, 0.5, fast_cfg) == pytest.approx(0.1 * R2, rel=0.02)


def test_slope_modulus_orthogonal(fast_cfg):
    est = modulus(preset("orth"), 1.0, "slope", fast_cfg)
    assert est.value == pytest.approx(R2, rel=0.05)


def test_critical_exponent_example_2_4(fast_cfg):
    q_star, rows = critical_exponent(preset("2.4"), "semi", (1.0, 2.0, 2.5), fast_cfg)
    assert q_star == 2.0
    assert [r.verdict for r in rows] == ["divergent", "positive", "zero"]


def test_critical_exponent_flags_inconsistent_rows():
    class Fake:
        def __init__(self, holds):
            self.holds, self.verdict = holds, "positive" if holds else "zero"

    q_star, rows = critical_exponent(None, q_grid=(1.0, 2.0, 3.0),
                                     estimator=lambda q: Fake(q != 2.0))
    assert q_star == 1.0
    assert rows[2].verdict == "inconclusive"
    with pytest.raises(ValueError):
        critical_exponent(None, q_grid=(2.0, 1.0), estimator=lambda q: Fake(True))


def test_slope_is_a_lower_estimate_of_sub(fast_cfg):
    assert modulus(preset("2.1"), 0.5, "slope", fast_cfg).holds
    assert modulus(preset("2.2"), 1.0, "slope", fast_cfg).verdict == "zero"
    h = HalfSpace([0.0, -1.0])
    est = modulus(SetCollection((h, h), np.zeros(2)), 1.0, "slope", fast_cfg)
    assert 0 < est.value <= 1.0 + est.uncertainty
