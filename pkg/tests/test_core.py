from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from chargenet.core import (ActivationTable, DecodingPartition, InvalidLevelSet,
                            InvalidNetwork, LevelSet, NetworkSpec, NeuronSpec, NoSuccessor,
                            Slice, SynapseSpec, build_partition, check_acyclic, decode,
                            validate_partition, v_thr, as_rational)

from conftest import level_sets, rationals, capacitances
from oracles import brute_decode


def slices_of(p):
    return [(s.lower, s.upper, s.label) for s in p.slices]


@pytest.mark.parametrize("levels, C, expected", [
    ([0, 1, 2, 3], 1, [(None, 1, 0), (1, 2, 1), (2, 3, 2), (3, None, 3)]),
    ([-1, 0, 2], 1, [(None, 0, -1), (0, 2, 0), (2, None, 2)]),
    ([0, 1], 2, [(None, 1, 0), (1, None, 1)]),
])
def test_build_partition_examples(levels, C, expected):
    p = build_partition(LevelSet(levels), F(C))
    assert slices_of(p) == expected
    assert validate_partition(p) is None


@pytest.mark.parametrize("levels", [[0], [], [1, 2], [0, 0, 1], [2, 0]])
def test_bad_level_sets(levels):
    with pytest.raises(InvalidLevelSet):
        LevelSet(levels)


def test_validate_overlap_and_gap():
    overlap = DecodingPartition([Slice(F(0), None, F(1)), Slice(F(1), F(1), F(3)),
                                 Slice(F(2), F(2), F(4)), Slice(F(4), F(4), None)])
    v = validate_partition(overlap)
    assert v.kind == "overlap" and v.point == 2

    gap = DecodingPartition([Slice(F(-1), None, F(0)), Slice(F(0), F(0), F(1)),
                             Slice(F(2), F(2), F(3)), Slice(F(3), F(3), None)])
    v = validate_partition(gap)
    assert v.kind == "gap" and v.point == 1


def test_validate_uncovered_ends():
    v = validate_partition(DecodingPartition([Slice(F(0), F(0), None)]))
    assert v.kind == "uncovered-below"
    v = validate_partition(DecodingPartition([Slice(F(0), None, F(1))]))
    assert v.kind == "uncovered-above" and v.point == 1


@pytest.mark.parametrize("z, expected", [(F(5, 2), 2), (F(-7, 10), 0), (F(9), 3),
                                         (F(1), 1), (F(3), 3), (F(0), 0)])
def test_decode_examples(z, expected):
    assert decode(z, build_partition(LevelSet([0, 1, 2, 3]), F(1))) == expected


@pytest.mark.parametrize("q, levels, C, expected", [
    (0, [0, 1, 2, 3], 1, F(1)),
    (0, [0, 1], 2, F(1, 2)),
    (-1, [-1, 0, 2], 1, F(1)),
])
def test_v_thr(q, levels, C, expected):
    assert v_thr(F(q), LevelSet(levels), F(C)) == expected


def test_v_thr_at_top():
    with pytest.raises(NoSuccessor):
        v_thr(F(3), LevelSet([0, 1, 2, 3]), F(1))


@given(level_sets(), capacitances, rationals())
def test_partition_valid_and_decode_matches_scan(levels, C, z):
    p = build_partition(levels, C)
    assert validate_partition(p) is None
    assert decode(z, p) == brute_decode(z, levels)


@given(level_sets(), rationals(), rationals())
def test_decode_monotone(levels, a, b):
    p = build_partition(levels, F(1))
    if a <= b:
        assert decode(a, p) <= decode(b, p)


@given(level_sets())
def test_decode_idempotent_on_levels(levels):
    p = build_partition(levels, F(1))
    for q in list(levels)[1:]:
        assert decode(q, p) == q
    # the minimal level owns everything below succ(Q_m), including itself
    assert decode(levels.lowest, p) == levels.lowest


@given(level_sets(), rationals())
def test_decode_unique_slice(levels, z):
    p = build_partition(levels, F(1))
    owners = [s.label for s in p.slices if s.contains(z)]
    assert owners == [decode(z, p)]


@given(st.integers(-10**30, 10**30), st.integers(1, 10**30),
       st.integers(-10**30, 10**30), st.integers(1, 10**30))
def test_rational_exactness(an, ad, bn, bd):
    a, b = F(an, ad), F(bn, bd)
    assert (a + b) - b == a
    if b:
        assert (a * b) / b == a


def test_floats_refused():
    with pytest.raises(TypeError):
        as_rational(2.7)
    with pytest.raises(TypeError):
        LevelSet([0, 1.5])


def chain(*edges, ids=None):
    ids = ids or sorted({x for e in edges for x in e})
    neurons = [NeuronSpec.unit(i) for i in ids]
    return NetworkSpec(neurons, [SynapseSpec(a, b, F(1)) for a, b in edges])


def test_check_acyclic_chain():
    assert check_acyclic(chain((1, 2), (2, 3))).order == [1, 2, 3]


def test_check_acyclic_reachability_gap_cycle():
    topo = check_acyclic(chain((1, 2), (1, 3), (3, 2), (2, 3)))
    assert not topo.acyclic
    assert topo.cycle == [2, 3]


def test_check_acyclic_empty():
    assert check_acyclic(NetworkSpec([], [])).order == []


def test_topological_tie_break_by_id():
    net = chain((3, 10), (2, 10), ids=[10, 3, 2, 7])
    assert check_acyclic(net).order == [2, 3, 7, 10]


def test_self_loop_is_a_cycle():
    assert check_acyclic(chain((1, 1))).cycle == [1]


def test_network_validation():
    n = [NeuronSpec.unit("a"), NeuronSpec.unit("b")]
    with pytest.raises(InvalidNetwork):
        NetworkSpec(n, [SynapseSpec("a", "c", F(1))])
    with pytest.raises(InvalidNetwork):
        NetworkSpec(n, [SynapseSpec("a", "b", F(1)), SynapseSpec("a", "b", F(2))])
    with pytest.raises(InvalidNetwork):
        NetworkSpec([NeuronSpec.unit("a"), NeuronSpec.unit("a")])


def test_kernel_must_be_normalized():
    with pytest.raises(ValueError):
        SynapseSpec("a", "b", F(1), F(0), ((F(0), F(1, 2)),))
    with pytest.raises(ValueError):
        SynapseSpec("a", "b", F(1), F(-1))


def test_sigma_must_cover_levels():
    with pytest.raises(ValueError):
        NeuronSpec("a", F(1), LevelSet([0, 1]), ActivationTable({0: 0}))
    with pytest.raises(ValueError):
        NeuronSpec("a", F(0), LevelSet([0, 1]), ActivationTable({0: 0, 1: 1}))
