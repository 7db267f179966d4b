"""Spatial sampling, multiplex RGG construction and empirical degrees."""
import json
import math

import numpy as np
import pytest

from d2dnet import NetworkParams, Region, build_rgg, empirical_degrees, sample_graph, sample_ppp
from d2dnet.geometry import TYPE_I, TYPE_II, EmptyGraphError, dump_graph, graph_to_dict


PARAMS = NetworkParams(p=0.4, lam=50.0, r1=1.0, r2=0.5)
REGION = Region(10.0, 10.0)


class TestSamplePpp:
    def test_count_statistics(self):
        counts = [len(sample_ppp(PARAMS, REGION, seed)[0]) for seed in range(50)]
        expected = PARAMS.lam * REGION.area
        sigma = math.sqrt(expected / len(counts))
        assert abs(np.mean(counts) - expected) < 3 * sigma

    def test_type_thinning_fraction(self):
        positions, types = sample_ppp(PARAMS, REGION, seed=3)
        n = len(types)
        frac = np.mean(types == TYPE_I)
        sigma = math.sqrt(0.4 * 0.6 / n)
        assert abs(frac - 0.4) < 3 * sigma

    def test_zero_area_region_is_empty(self):
        positions, types = sample_ppp(PARAMS, Region(0.0, 10.0), seed=0)
        assert len(positions) == 0 and len(types) == 0

    def test_positions_inside_window(self):
        positions, _ = sample_ppp(PARAMS, REGION, seed=1)
        assert np.all(positions >= 0.0)
        assert np.all(positions[:, 0] <= REGION.width)
        assert np.all(positions[:, 1] <= REGION.height)

    def test_determinism(self):
        a = sample_ppp(PARAMS, REGION, seed=7)
        b = sample_ppp(PARAMS, REGION, seed=7)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


class TestBuildRgg:
    def test_close_dual_radio_pair_connected_in_both_layers(self):
        positions = np.array([[1.0, 1.0], [1.0, 1.09]])
        types = np.array([TYPE_I, TYPE_I], dtype=np.int8)
        params = NetworkParams(p=1.0, lam=1.0, r1=0.5, r2=0.1)
        graph = build_rgg(positions, types, params, REGION)
        assert list(graph.adj1[0]) == [1]
        assert list(graph.adj2[0]) == [1]

    def test_single_radio_devices_have_no_layer1_edges(self):
        graph = sample_graph(PARAMS, REGION, seed=11)
        for i in np.flatnonzero(graph.types == TYPE_II):
            assert len(graph.adj1[i]) == 0

    def test_layer2_mean_degree(self):
        means = []
        for seed in range(20):
            graph = sample_graph(PARAMS, REGION, seed)
            means.append(graph.degree2().mean())
        expected = PARAMS.lam * math.pi * PARAMS.r2**2
        # Degrees are positively correlated within a sample; allow 3 sigma
        # of the naive CLT estimate scaled by a small safety factor.
        n_typical = PARAMS.lam * REGION.area * len(means)
        sigma = math.sqrt(expected / n_typical)
        assert abs(np.mean(means) - expected) < 9 * sigma

    def test_torus_wrap_connects_opposite_edges(self):
        positions = np.array([[0.05, 5.0], [9.95, 5.0]])
        types = np.array([TYPE_II, TYPE_II], dtype=np.int8)
        params = NetworkParams(p=0.0, lam=1.0, r1=0.5, r2=0.2)
        wrapped = build_rgg(positions, types, params, Region(10.0, 10.0, wrap=True))
        flat = build_rgg(positions, types, params, Region(10.0, 10.0, wrap=False))
        assert list(wrapped.adj2[0]) == [1]
        assert list(flat.adj2[0]) == []

    def test_combined_degree_is_layer_sum(self):
        graph = sample_graph(PARAMS, REGION, seed=4)
        assert np.array_equal(
            graph.degree_combined(), graph.degree1() + graph.degree2()
        )


class TestEmpiricalDegrees:
    def test_single_node_graph(self):
        positions = np.array([[2.0, 2.0]])
        types = np.array([TYPE_I], dtype=np.int8)
        graph = build_rgg(positions, types, PARAMS, REGION)
        emp = empirical_degrees(graph)
        assert emp.mean1 == emp.mean2 == emp.meanc == 0.0

    def test_empty_graph_raises(self):
        graph = sample_graph(PARAMS, Region(0.0, 5.0), seed=0)
        with pytest.raises(EmptyGraphError):
            empirical_degrees(graph)

    def test_histograms_sum_to_node_count(self):
        graph = sample_graph(PARAMS, REGION, seed=2)
        emp = empirical_degrees(graph)
        assert emp.hist1.sum() == graph.n
        assert emp.hist2.sum() == graph.n
        assert emp.histc.sum() == graph.n
        assert emp.joint_kl.sum() == graph.n

    def test_joint_marginals_match_histograms(self):
        graph = sample_graph(PARAMS, REGION, seed=2)
        emp = empirical_degrees(graph)
        assert np.array_equal(emp.joint_kl.sum(axis=1), emp.hist1)
        assert np.array_equal(emp.joint_kl.sum(axis=0), emp.hist2)


class TestSerialization:
    def test_round_trip_through_json(self, tmp_path):
        graph = sample_graph(NetworkParams(p=0.3, lam=5.0, r1=0.8, r2=0.4),
                             Region(4.0, 4.0), seed=9)
        path = tmp_path / "graph.json"
        dump_graph(graph, path)
        loaded = json.loads(path.read_text())
        assert len(loaded["types"]) == graph.n
        assert loaded == graph_to_dict(graph)

    def test_region_rejects_negative_dimensions(self):
        with pytest.raises(ValueError):
            Region(-1.0, 5.0)
