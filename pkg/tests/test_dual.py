import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regmod.dual import (
    NormalCone, duality_map_check, duality_map_sample, dual_modulus, frechet_normal_cone,
    limsup_check, proximal_normals,
)
from regmod.geometry import (
    HalfSpace, Intersection, NoAnalyticOracleError, PolyGraph, PolySublevel, SetCollection, WholeSpace,
)
from regmod.moduli import RadiusSchedule, modulus
from regmod.presets import preset

R2 = 1 / math.sqrt(2)
ORIGIN = np.zeros(2)


class TestFrechetCone:
    def test_halfspace_boundary_is_outer_normal_ray(self):
        cone = frechet_normal_cone(HalfSpace([0.0, 1.0]), ORIGIN)   # {v >= 0}
        assert cone.tag == "ray"
        np.testing.assert_allclose(cone.generators[0].direction, [0.0, -1.0], atol=1e-12)
        assert cone.contains([0.0, -3.0]) and not cone.contains([0.1, -3.0])

    def test_interior_point_has_trivial_cone(self):
        cone = frechet_normal_cone(HalfSpace([0.0, 1.0]), [0.0, 1.0])
        assert cone.trivial and cone.tag == "trivial"

    def test_graph_cone_is_a_line(self):
        cone = frechet_normal_cone(PolyGraph(1.0, 1.0), ORIGIN)
        assert cone.tag == "line"
        assert cone.contains([0.0, 1.0]) and cone.contains([0.0, -2.0])
        assert not cone.contains([1.0, 0.0])

    def test_sublevel_boundary_ray_follows_gradient(self):
        s = PolySublevel([0.0, 0.0, 1.0], sense="le")   # {v <= u^2}
        cone = frechet_normal_cone(s, [1.0, 1.0])
        g = np.array([-2.0, 1.0]) / math.sqrt(5)
        assert cone.tag == "ray" and cone.contains(g)

    def test_example_2_4_set_has_trivial_cone_at_origin(self):
        assert frechet_normal_cone(preset("2.4").sets[0], ORIGIN).trivial

    def test_intersection_of_halfplanes_is_a_sector(self):
        box = Intersection([HalfSpace([1.0, 0.0]), HalfSpace([0.0, 1.0])])
        cone = frechet_normal_cone(box, ORIGIN)
        assert cone.tag == "sector"
        assert cone.contains([-1.0, -1.0]) and not cone.contains([1.0, -1.0])

    def test_whole_space_trivial(self):
        assert frechet_normal_cone(WholeSpace(2), [3.0, 4.0]).trivial

    def test_point_outside_raises(self):
        with pytest.raises(ValueError, match="not in the set"):
            frechet_normal_cone(HalfSpace([0.0, 1.0]), [0.0, -1.0])

    def test_higher_dimensional_halfspace(self):
        cone = frechet_normal_cone(HalfSpace([0.0, 0.0, 2.0]), np.zeros(3))
        np.testing.assert_allclose(cone.generators[0].direction, [0.0, 0.0, -1.0])
        with pytest.raises(NoAnalyticOracleError):
            frechet_normal_cone(WholeSpace(3), np.zeros(3))

    def test_cone_distance(self):
        cone = frechet_normal_cone(HalfSpace([0.0, 1.0]), ORIGIN)
        np.testing.assert_allclose(cone.distance([[3.0, -4.0], [0.0, 2.0], [0.0, -5.0]]), [3.0, 2.0, 0.0])


@pytest.mark.parametrize("name, point", [("2.1", ORIGIN), ("2.3", ORIGIN), ("2.1", [0.5, 0.25])])
def test_cone_generators_pass_limsup_test(name, point):
    for s in preset(name).sets:
        if not bool(s.contains(np.asarray(point, dtype=float))):
            continue
        cone = frechet_normal_cone(s, point)
        for g in cone.generators:
            assert limsup_check(s, np.asarray(point, dtype=float), g.direction)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 2 * math.pi))
def test_directions_outside_cone_fail_limsup(angle):
    s = PolySublevel([0.0, 0.0, 1.0], sense="le")
    d = np.array([math.cos(angle), math.sin(angle)])
    cone = frechet_normal_cone(s, ORIGIN)
    if cone.distance(d[None])[0] > 0.05:
        assert not limsup_check(s, ORIGIN, d)


class TestProximalNormals:
    def test_halfspace(self):
        normals = proximal_normals(HalfSpace([0.0, -1.0]), ORIGIN)   # {v <= 0}
        assert len(normals) == 1
        np.testing.assert_allclose(normals[0].direction, [0.0, 1.0], atol=1e-12)
        assert normals[0].witness_r == pytest.approx(1.0)

    def test_example_2_4_has_none(self):
        assert proximal_normals(preset("2.4").sets[0], ORIGIN) == []

    def test_parabola_graph_has_both_vertical_directions(self):
        normals = proximal_normals(PolyGraph(1.0, 1.0), ORIGIN)
        dirs = sorted(float(n.direction[1]) for n in normals)
        assert dirs == pytest.approx([-1.0, 1.0])


class TestDualityMap:
    def test_single_maximal_component(self):
        xhat = np.array([[3.0, 4.0], [1.0, 0.0]])
        (s,) = duality_map_sample(xhat)
        np.testing.assert_allclose(s, [[0.6, 0.8], [0.0, 0.0]])
        assert duality_map_check(xhat, s)
        assert not duality_map_check(xhat, [[0.0, 0.0], [1.0, 0.0]])

    def test_ties_give_mixture(self):
        xhat = np.array([[1.0, 0.0], [0.0, 1.0]])
        samples = duality_map_sample(xhat)
        assert len(samples) == 3
        assert all(duality_map_check(xhat, s) for s in samples)

    def test_zero_raises(self):
        with pytest.raises(ValueError):
            duality_map_sample(np.zeros((2, 2)))

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=6, max_size=6), st.floats(0.01, 0.99))
    def test_convex_combinations_of_extremes_stay_in_map(self, c, t):
        xhat = np.array(c).reshape(3, 2)
        if np.linalg.norm(xhat, axis=1).max() < 1e-3:
            return
        samples = duality_map_sample(xhat)
        for s in samples:
            assert duality_map_check(xhat, s, tol=1e-7)
        mix = t * samples[0] + (1 - t) * samples[-1]
        assert duality_map_check(xhat, mix, tol=1e-7)
        # scaling breaks the unit-sum condition
        assert not duality_map_check(xhat, 2 * samples[0])


@pytest.fixture(scope="module")
def cfg():
    return RadiusSchedule(rho0=0.5, shrink=0.5, steps=5, samples_per_radius=400, seed=3)


class TestDualModulus:
    def test_orthogonal_uniform(self, cfg):
        rep = dual_modulus(preset("orth"), "uniform_q1", cfg=cfg)
        assert rep.infimum_estimate == pytest.approx(R2, rel=0.02)
        assert rep.verdict == "positive" and rep.holds
        assert rep.witness is not None

    def test_tangent_sets_zero(self, cfg):
        rep = dual_modulus(preset("2.1"), "uniform_q1", cfg=cfg)
        assert rep.verdict == "zero" and rep.infimum_estimate < 1e-2

    def test_whole_space_pair_is_infinite(self, cfg):
        coll = SetCollection((WholeSpace(2), WholeSpace(2)), ORIGIN)
        rep = dual_modulus(coll, "uniform_q1", cfg=cfg)
        assert math.isinf(rep.infimum_estimate)

    def test_subreg_positive_for_example_2_4(self, cfg):
        rep = dual_modulus(preset("2.4"), "subreg_q", 1.0, cfg=cfg)
        assert rep.holds
        assert any("tested" in n for n in rep.notes)

    def test_subreg_zero_for_example_2_2(self, cfg):
        assert dual_modulus(preset("2.2"), "subreg_q", 1.0, cfg=cfg).verdict == "zero"

    def test_subreg_needs_q_at_most_one(self, cfg):
        with pytest.raises(ValueError):
            dual_modulus(preset("2.1"), "subreg_q", 1.5, cfg=cfg)

    def test_unknown_kind(self, cfg):
        with pytest.raises(ValueError):
            dual_modulus(preset("2.1"), "nonsense", cfg=cfg)

    def test_dual_positivity_implies_sub(self, cfg):
        coll = preset("2.1")
        rep = dual_modulus(coll, "subreg_q", 1.0, cfg=cfg)
        assert rep.holds
        assert modulus(coll, 1.0, "sub", cfg).holds

    def test_report_serialises(self, cfg):
        d = dual_modulus(preset("orth"), "uniform_q1", cfg=cfg).to_dict()
        assert d["kind"] == "uniform_q1" and d["radii"] == {"delta": 0.2}
