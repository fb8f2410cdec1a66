"""Max-flow / min-cut solver and the binary energy reduction."""

import itertools

import numpy as np
import pytest

import structsvm as ss
from conftest import brute_force_min_cut, cut_capacity, random_flow_network


class TestFlowNetwork:
    def test_rejects_negative_capacity(self):
        net = ss.FlowNetwork(2)
        with pytest.raises(ValueError):
            net.add_arc(0, 1, -1.0)

    def test_rejects_terminal_to_terminal(self):
        net = ss.FlowNetwork(2)
        with pytest.raises(ValueError):
            net.add_arc(net.source, net.sink, 1.0)

    def test_rejects_self_loop_and_bad_ids(self):
        net = ss.FlowNetwork(2)
        with pytest.raises(ValueError):
            net.add_arc(1, 1, 1.0)
        with pytest.raises(ValueError):
            net.add_arc(0, 7, 1.0)


class TestMaxFlow:
    def test_empty_network(self):
        net = ss.FlowNetwork(3)
        flow, source_side = ss.max_flow(net)
        assert flow == 0.0
        assert not source_side.any()  # canonical cut: unreachable nodes are sink-side

    def test_single_path_bottleneck(self):
        net = ss.FlowNetwork(1)
        net.add_arc(net.source, 0, 3.0)
        net.add_arc(0, net.sink, 2.0)
        flow, source_side = ss.max_flow(net)
        assert flow == pytest.approx(2.0, abs=1e-12)
        assert source_side[0]  # the saturated arc is node->sink

    def test_flow_bounded_by_source_capacity(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            net = random_flow_network(rng, max_nodes=8)
            flow, _ = ss.max_flow(net)
            out_of_source = sum(c for tail, _, c in net.arcs() if tail == net.source)
            assert flow <= out_of_source + 1e-12

    def test_matches_brute_force_and_duality(self):
        rng = np.random.default_rng(5)
        for _ in range(150):
            net = random_flow_network(rng, max_nodes=9)
            flow, source_side = ss.max_flow(net)
            assert abs(flow - brute_force_min_cut(net)) <= 1e-9
            assert abs(cut_capacity(net, source_side) - flow) <= 1e-9


class TestBinaryEnergy:
    def test_rejects_negative_pairwise_weight(self):
        with pytest.raises(ValueError):
            ss.BinaryEnergy(unary=np.zeros((2, 2)), pairwise=((0, 1, -0.5),))

    def test_rejects_bad_pairs(self):
        with pytest.raises(ValueError):
            ss.BinaryEnergy(unary=np.zeros((2, 2)), pairwise=((0, 0, 1.0),))
        with pytest.raises(ValueError):
            ss.BinaryEnergy(unary=np.zeros((2, 2)), pairwise=((0, 5, 1.0),))

    def test_energy_of_counts_disagreements(self):
        energy = ss.BinaryEnergy(unary=np.array([[1.0, 0.0], [0.0, 2.0]]), pairwise=((0, 1, 0.5),))
        assert ss.energy_of(energy, np.array([1, 0])) == pytest.approx(0.5, abs=0)
        assert ss.energy_of(energy, np.array([0, 0])) == pytest.approx(1.0, abs=0)


class TestEnergyToNetwork:
    def test_cut_equals_energy_plus_constant(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            count = int(rng.integers(1, 6))
            pairs = tuple(
                (k, l, float(rng.random()))
                for k, l in itertools.combinations(range(count), 2)
                if rng.random() < 0.5
            )
            energy = ss.BinaryEnergy(unary=rng.standard_normal((count, 2)), pairwise=pairs)
            net, constant = ss.energy_to_network(energy)
            for labels in itertools.product((0, 1), repeat=count):
                labels = np.array(labels)
                induced = cut_capacity(net, labels.astype(bool))  # label 1 = source side
                assert induced + constant == pytest.approx(ss.energy_of(energy, labels), abs=1e-9)

    def test_single_node_prefers_cheaper_label(self):
        energy = ss.BinaryEnergy(unary=np.array([[5.0, 3.0]]), pairwise=())
        labels, value = ss.minimize_binary_energy(energy)
        assert labels.tolist() == [1]
        assert value == pytest.approx(3.0, abs=0)

    def test_all_zero_energy_has_defined_labeling(self):
        energy = ss.BinaryEnergy(unary=np.zeros((3, 2)), pairwise=((0, 1, 0.0),))
        labels, value = ss.minimize_binary_energy(energy)
        assert labels.tolist() == [0, 0, 0]  # all sink-side under the canonical cut
        assert value == 0.0


class TestMinimizeBinaryEnergy:
    def test_edgeless_is_per_node_argmin(self):
        rng = np.random.default_rng(7)
        unary = rng.standard_normal((6, 2))
        labels, value = ss.minimize_binary_energy(ss.BinaryEnergy(unary=unary, pairwise=()))
        assert labels.tolist() == np.argmin(unary, axis=1).tolist()
        assert value == pytest.approx(unary.min(axis=1).sum(), abs=1e-12)

    def test_strong_coupling_forces_agreement(self):
        energy = ss.BinaryEnergy(
            unary=np.array([[0.0, 0.5], [0.6, 0.0]]), pairwise=((0, 1, 10.0),)
        )
        labels, value = ss.minimize_binary_energy(energy)
        assert labels.tolist() == [1, 1]  # cheaper of the two constant labelings
        assert value == pytest.approx(0.5, abs=1e-12)

    def test_strong_pairwise_picks_cheaper_constant_side(self):
        rng = np.random.default_rng(8)
        unary = rng.uniform(-1, 1, size=(5, 2))
        pairs = tuple((k, k + 1, 100.0) for k in range(4))
        labels, value = ss.minimize_binary_energy(ss.BinaryEnergy(unary=unary, pairwise=pairs))
        constant = int(unary.sum(axis=0).argmin())
        assert labels.tolist() == [constant] * 5
        assert value == pytest.approx(unary[:, constant].sum(), abs=1e-12)

    def test_matches_exhaustive_search_on_grids(self):
        rng = np.random.default_rng(9)
        pairs = tuple(
            (r * 3 + c, r * 3 + c + 1, 0.5) for r in range(3) for c in range(2)
        ) + tuple((r * 3 + c, (r + 1) * 3 + c, 0.5) for r in range(2) for c in range(3))
        for _ in range(30):
            energy = ss.BinaryEnergy(unary=rng.uniform(-1, 1, size=(9, 2)), pairwise=pairs)
            _, value = ss.minimize_binary_energy(energy)
            exhaustive = min(
                ss.energy_of(energy, np.array(labels))
                for labels in itertools.product((0, 1), repeat=9)
            )
            assert value == pytest.approx(exhaustive, abs=1e-9)
