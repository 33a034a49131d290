import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from regmod.geometry import NoAnalyticOracleError, PolyGraph
from regmod.mappings import (
    SetValuedMap, bridge_check, collection_to_map, map_modulus, map_to_collection, sandwich,
)
from regmod.moduli import modulus, sub_quotient
from regmod.presets import preset

SQUARE = SetValuedMap.single_valued_poly([0.0, 0.0, 1.0])
IDENTITY = SetValuedMap.single_valued_poly([0.0, 1.0])


class TestOracles:
    def test_polynomial_forward_and_inverse(self):
        assert SQUARE.forward_distance([2.0], [3.0])[0] == pytest.approx(1.0)
        assert SQUARE.inverse_distance([0.5], [4.0])[0] == pytest.approx(1.5)
        assert math.isinf(SQUARE.inverse_distance([0.0], [-1.0])[0])
        assert SQUARE.in_graph([3.0], [9.0])[0]

    def test_constant_map_inverse(self):
        F = SetValuedMap.single_valued_poly([2.0])
        assert F.inverse_distance([5.0], [2.0])[0] == 0.0
        assert math.isinf(F.inverse_distance([5.0], [1.0])[0])

    def test_graph_oracle_base_pair_checked(self):
        with pytest.raises(ValueError):
            SetValuedMap.graph_oracle(PolyGraph(1.0, 1.0), 1.0, 0.0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-2, 2), st.floats(-1, 4))
    def test_graph_oracle_matches_polynomial(self, x, y):
        # the graph oracle accepts points within its membership tolerance
        assume(not -1e-6 < y < 0.0)
        G = SetValuedMap.graph_oracle(PolyGraph(1.0, 1.0), 0.0, 0.0)
        assert G.forward_distance([x], [y])[0] == pytest.approx(SQUARE.forward_distance([x], [y])[0], abs=1e-7)
        a, b = G.inverse_distance([x], [y])[0], SQUARE.inverse_distance([x], [y])[0]
        assert (math.isinf(a) and math.isinf(b)) or a == pytest.approx(b, abs=1e-6)

    def test_product_map_reproduces_collection_distances(self):
        coll = preset("2.1")
        F = collection_to_map(coll)
        X = np.random.default_rng(0).normal(scale=0.3, size=(25, 2))
        Y = np.zeros((25, 4))
        np.testing.assert_allclose(F.forward_distance(X, Y), coll.set_distances(X).max(axis=1))
        sq = sub_quotient(coll, X, 1.0)
        inv = F.inverse_distance(X, Y)
        off = inv > 0
        np.testing.assert_allclose(F.forward_distance(X, Y)[off] / inv[off], sq[off], rtol=1e-9)
        assert np.all(np.isinf(sq[~off]))

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-0.5, 0.5), min_size=6, max_size=6))
    def test_product_map_graph_membership(self, c):
        F = collection_to_map(preset("orth"))
        x, y = np.array(c[:2]), np.array(c[2:])
        inside = F.in_graph(x, y)[0]
        # (x, y) is on the graph exactly when x + y_i lies in Ω_i for each i
        coll = F.collection
        expect = all(bool(s.contains(x + y[2 * i:2 * i + 2], 1e-9)) for i, s in enumerate(coll.sets))
        assert inside == expect


class TestMapModulus:
    @pytest.mark.parametrize("kind", ["map_semi", "map_sub", "map_reg"])
    def test_identity_is_one(self, kind, fast_cfg):
        est = map_modulus(IDENTITY, 1.0, kind, fast_cfg)
        assert est.value == pytest.approx(1.0, rel=0.02)

    def test_square_subregular_of_order_half(self, fast_cfg):
        assert map_modulus(SQUARE, 0.5, "map_sub", fast_cfg).value == pytest.approx(1.0, rel=0.05)
        assert map_modulus(SQUARE, 1.0, "map_sub", fast_cfg).verdict == "zero"

    def test_unknown_kind(self, fast_cfg):
        with pytest.raises(ValueError):
            map_modulus(IDENTITY, 1.0, "map_other", fast_cfg)

    @pytest.mark.parametrize("name", ["2.1", "2.3"])
    def test_collection_equalities(self, name, fast_cfg):
        coll = preset(name)
        F = collection_to_map(coll)
        for kind, ckind in (("map_semi", "semi"), ("map_sub", "sub"), ("map_reg", "uniform")):
            a, b = map_modulus(F, 1.0, kind, fast_cfg), modulus(coll, 1.0, ckind, fast_cfg)
            assert a.verdict == b.verdict
            assert a.value == pytest.approx(b.value, abs=a.uncertainty + b.uncertainty + 1e-9) or a.verdict == "zero"


class TestBridge:
    def test_sandwich_bounds(self):
        assert sandwich(1.0, 1.0) == pytest.approx((1 / 3, 1 / 2))
        assert sandwich(math.inf, 0.5) == (1.0, math.inf)

    def test_map_to_collection_uses_graph_and_axis(self):
        coll = map_to_collection(SQUARE)
        assert coll.space.metric == "linf"
        assert coll.set_distances(np.array([[0.0, 1.0]]))[0, 1] == pytest.approx(1.0)
        with pytest.raises(NoAnalyticOracleError):
            map_to_collection(collection_to_map(preset("2.1")))

    def test_identity_bridge(self, fast_cfg):
        rep = bridge_check(IDENTITY, 1.0, fast_cfg)
        assert rep.passed, rep.to_dict()

    def test_square_bridge_sub(self, fast_cfg):
        rep = bridge_check(SQUARE, 0.5, fast_cfg, kinds=("map_sub",))
        row = rep.rows[0]
        assert row.lower == pytest.approx(math.sqrt(2) - 1, rel=0.05)
        assert row.upper == pytest.approx(1 / math.sqrt(2), rel=0.05)
        assert rep.passed
