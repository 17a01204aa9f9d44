import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from chargenet.core import DecodingPartition, NetworkSpec, NeuronSpec, Slice, SynapseSpec, ActivationTable
from chargenet.engine import ledger_audit, run
from chargenet.fuzz import random_input, random_network, random_qann, realization_config
from chargenet.qann import (NotAcyclic, NotRealizable, QANNNode, QANNSpec, is_fixed_point,
                            probe_points, qann_eval, qann_to_snn, quantized_relu,
                            same_activation, snn_to_qann, synthesize_levels)
from chargenet.realizer import derive_seed, realize

from oracles import topo_eval


def unit_chain(delay=F(0)):
    return NetworkSpec([NeuronSpec.unit("n1"), NeuronSpec.unit("n2")],
                       [SynapseSpec("n1", "n2", F(1), delay)])


@pytest.mark.parametrize("x, expected", [
    (F(3, 5), 0), (F(11, 10), 1), (F(-5), 0), (F(7, 2), 3), (F(0), 0), (F(2), 2),
])
def test_quantized_relu(x, expected):
    assert quantized_relu(x) == expected


def test_quantized_relu_clip():
    assert quantized_relu(F(17, 2), clip=3) == 3


def test_eval_single_node():
    q = snn_to_qann(NetworkSpec([NeuronSpec.unit("n1")]))
    assert qann_eval(q, {"n1": F(27, 10)}) == ({"n1": 2}, {"n1": F(27, 10)})


def test_eval_chain():
    kappa, z = qann_eval(snn_to_qann(unit_chain()), {"n1": F(27, 10), "n2": F(0)})
    assert kappa == {"n1": 2, "n2": 2} and z == {"n1": F(27, 10), "n2": 2}


def test_eval_zero_input():
    kappa, _ = qann_eval(snn_to_qann(unit_chain()), {})
    assert kappa == {"n1": 0, "n2": 0}


def test_eval_rejects_cycle():
    net = NetworkSpec([NeuronSpec.unit(1), NeuronSpec.unit(2)],
                      [SynapseSpec(1, 2, F(1)), SynapseSpec(2, 1, F(1))])
    with pytest.raises(NotAcyclic):
        snn_to_qann(net)
    q = QANNSpec([QANNNode.from_pieces(1, [], [0]), QANNNode.from_pieces(2, [], [0])],
                 {(1, 2): F(1), (2, 1): F(1)})
    with pytest.raises(NotAcyclic):
        qann_eval(q, {})


def test_unit_neuron_is_clamped_floor():
    node = snn_to_qann(unit_chain()).node("n1")
    clamp = lambda z: min(max(F(math.floor(z)), F(0)), F(3))  # noqa: E731
    assert same_activation(node, clamp, [F(0), F(1), F(2), F(3)], extra=[F(-7, 3), F(27, 10)])


def test_delays_not_part_of_representation():
    assert snn_to_qann(unit_chain(F(5))) == snn_to_qann(unit_chain())


def test_synthesis_quantized_relu():
    node = QANNNode.from_pieces("x", [1, 2, 3], [0, 1, 2, 3])
    assert same_activation(node, lambda z: quantized_relu(z, 3), [F(1), F(2), F(3)], extra=[F(-5)])
    levels, sigma, _ = synthesize_levels(node)
    assert list(levels) == [0, 1, 2, 3]
    assert sigma.as_dict() == {0: 0, 1: 1, 2: 2, 3: 3}


def test_synthesis_with_sentinel():
    node = QANNNode.from_pieces("x", [F(1, 2), F(3, 2)], [0, 4, 9])
    levels, sigma, sentinel = synthesize_levels(node)
    assert sentinel == F(-1, 2)
    assert list(levels) == [F(-1, 2), 0, F(1, 2), F(3, 2)]
    assert [sigma[q] for q in levels] == [0, 0, 4, 9]
    neuron = NeuronSpec("x", F(1), levels, sigma)
    assert same_activation(neuron.terminal_map, node, [F(1, 2), F(3, 2)], extra=[F(0), F(-1, 2)])


def test_synthesis_constant_activation():
    node = QANNNode.from_pieces("x", [], [F(7, 3)])
    levels, sigma, sentinel = synthesize_levels(node)
    assert sentinel is None and set(sigma.as_dict().values()) == {F(7, 3)}


def test_not_realizable_gap():
    bad = QANNNode("x", DecodingPartition([Slice(F(0), None, F(0)), Slice(F(1), F(1), None)]),
                   ActivationTable({0: 0, 1: 1}))
    with pytest.raises(NotRealizable):
        qann_to_snn(QANNSpec([bad]))


@given(st.integers(0, 2**32))
@settings(max_examples=40)
def test_eval_matches_relaxation_oracle(seed):
    q = random_qann(seed)
    u = random_input(seed, q.ids)
    kappa, z = qann_eval(q, u)
    ref_kappa, ref_z = topo_eval(q.ids, q.weights, {n.id: n for n in q.nodes}, u)
    assert kappa == ref_kappa and z == ref_z
    assert is_fixed_point(q, u, kappa)


@given(st.integers(0, 2**32))
@settings(max_examples=30)
def test_activation_round_trip(seed):
    q = random_qann(seed)
    net, _ = qann_to_snn(q)
    back = snn_to_qann(net)
    for node in q.nodes:
        bps = node.partition.breakpoints + back.node(node.id).partition.breakpoints
        assert same_activation(node, back.node(node.id), bps, extra=probe_points([], [F(n, 7) for n in range(-40, 60)]))
    assert back.weights == q.weights


@given(st.integers(0, 2**32))
@settings(max_examples=15)
def test_snn_matches_extracted_qann(seed):
    net, u = random_network(seed, 10)
    expected, _ = qann_eval(snn_to_qann(net), u)
    for r in range(4):
        real = realize(net, u, realization_config(derive_seed(seed, r)))
        report, trace = run(net, None, real, debug=True)
        assert report.kappa == expected
        assert ledger_audit(report, trace, net, real.episode) == []


@given(st.integers(0, 2**32))
@settings(max_examples=15)
def test_qann_round_trip_through_engine(seed):
    q = random_qann(seed)
    net, _ = qann_to_snn(q)
    u = random_input(seed, q.ids)
    expected, _ = qann_eval(q, u)
    for r in range(3):
        real = realize(net, u, realization_config(derive_seed(seed, r)))
        assert run(net, None, real)[0].kappa == expected
