from dataclasses import replace
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from chargenet.core import LevelSet, NeuronSpec
from chargenet.neuron import (Direction, IllegalTransition, NeuronState, apply_spike,
                              delta_min, integrate_and_fire, is_silent, ledger_holds, phi,
                              pre_decision_potential, spike_decision, strict_progress_holds)

from conftest import neuron_specs, rationals
from oracles import brute_decode


def at(V, level, **kw):
    return NeuronState(V=F(V), level=F(level), **kw)


@pytest.mark.parametrize("V, dq, C, expected", [
    (0, F(27, 10), 1, F(27, 10)),
    (F(1, 2), 0, 1, F(1, 2)),
    (0, 3, 2, F(3, 2)),
])
def test_pre_decision_potential(V, dq, C, expected):
    s = at(V, 0)
    assert pre_decision_potential(s, F(dq), F(C)) == expected
    assert s.V == F(V)


@pytest.mark.parametrize("v_hat, level, expected", [
    (F(1), 0, Direction.UP),
    (F(-1, 4), 0, None),
    (F(-1, 4), 2, Direction.DOWN),
    (F(1, 2), 3, None),
    (F(0), 2, None),
    (F(999, 1000), 1, None),
])
def test_spike_decision(unit, v_hat, level, expected):
    assert spike_decision(v_hat, F(level), unit) is expected


def test_apply_spike_up(unit):
    s, rec = apply_spike(at(F(27, 10), 0), Direction.UP, unit, 0)
    assert (s.level, s.V, rec.q_dis, rec.q_out) == (1, F(17, 10), 1, 1)
    assert s.spike_count == 1 and s.cum_output == 1
    # both distances measured against the silent set [0, 1) of the new level
    assert (rec.phi_before, rec.phi_after) == (F(17, 10), F(7, 10))


def test_apply_spike_down(unit):
    s, rec = apply_spike(at(F(-1, 4), 2, cum_output=F(2)), Direction.DOWN, unit, 0)
    assert (s.level, s.V, rec.q_dis, rec.q_out) == (1, F(3, 4), -1, -1)
    assert rec.silent_after


def test_apply_spike_sigma_increment():
    spec = NeuronSpec("n", F(1), LevelSet([0, 1]), {0: 0, 1: 5})
    _, rec = apply_spike(at(1, 0), Direction.UP, spec, 0)
    assert rec.q_out == 5


def test_illegal_transitions(unit):
    with pytest.raises(IllegalTransition):
        apply_spike(at(5, 3), Direction.UP, unit, 0)
    with pytest.raises(IllegalTransition):
        apply_spike(at(-5, 0), Direction.DOWN, unit, 0)


@pytest.mark.parametrize("dq, n_spikes, level, V", [
    (F(27, 10), 2, 2, F(7, 10)),
    (F(-3, 10), 0, 0, F(-3, 10)),
    (F(10), 3, 3, F(7)),
])
def test_integrate_and_fire(unit, dq, n_spikes, level, V):
    s, spikes = integrate_and_fire(NeuronState.initial(unit), dq, unit, 0)
    assert (len(spikes), s.level, s.V) == (n_spikes, level, V)
    assert ledger_holds(s, unit)


def test_integrate_blocked_by_refractory(unit):
    s, spikes = integrate_and_fire(NeuronState.initial(unit), F(5), unit, 0, allowed=False)
    assert spikes == [] and s.V == 5 and s.level == 0 and s.cum_input == 5


def test_integrate_max_spikes(unit):
    s, spikes = integrate_and_fire(NeuronState.initial(unit), F(5), unit, 0, max_spikes=1)
    assert len(spikes) == 1 and s.level == 1 and not is_silent(s, unit)


@pytest.mark.parametrize("V, level, silent", [
    (F(7, 10), 2, True),
    (F(-3, 10), 0, True),
    (F(1), 1, False),
    (F(-1, 10), 1, False),
    (F(100), 3, True),
])
def test_is_silent(unit, V, level, silent):
    assert is_silent(at(V, level), unit) is silent


@pytest.mark.parametrize("V, level, expected", [
    (F(5, 2), 0, F(3, 2)),
    (F(-3, 4), 2, F(3, 4)),
    (F(1, 2), 1, F(0)),
    (F(-7), 0, F(0)),
    (F(7), 3, F(0)),
])
def test_phi(unit, V, level, expected):
    assert phi(at(V, level), unit) == expected


@pytest.mark.parametrize("levels, C, expected", [
    ([0, 1, 2, 3], 1, F(1)),
    ([-1, 0, 2], 1, F(1)),
    ([0, 1], 2, F(1, 2)),
])
def test_delta_min(levels, C, expected):
    assert delta_min(LevelSet(levels), F(C)) == expected


charges = st.lists(rationals(-15, 15, 16), min_size=1, max_size=12)


@given(neuron_specs(), charges)
def test_impulse_train_invariants(spec, train):
    s = NeuronState.initial(spec)
    for t, dq in enumerate(train):
        s, spikes = integrate_and_fire(s, dq, spec, t)
        assert ledger_holds(s, spec)
        assert s.level in spec.levels
        assert s.cum_output == spec.sigma[s.level]
        assert is_silent(s, spec)
        for rec in spikes:
            assert strict_progress_holds(rec, spec)
            assert (rec.q_dis > 0) == (rec.direction is Direction.UP)
    z = sum(train, F(0))
    assert s.level == brute_decode(z, spec.levels)
    assert s.cum_output == spec.sigma[brute_decode(z, spec.levels)]


@given(neuron_specs(), charges, st.randoms(use_true_random=False))
def test_terminal_map_order_free(spec, train, rnd):
    shuffled = list(train)
    rnd.shuffle(shuffled)
    finals = []
    for order in (train, shuffled):
        s = NeuronState.initial(spec)
        for dq in order:
            s, _ = integrate_and_fire(s, dq, spec, 0)
        finals.append((s.level, s.V))
    assert finals[0] == finals[1]


@given(neuron_specs(), charges)
def test_deferred_decisions_reach_same_state(spec, train):
    """Integrating everything while refractory and deciding once at release
    ends in the same state as deciding after every impulse."""
    eager = NeuronState.initial(spec)
    lazy = NeuronState.initial(spec)
    for dq in train:
        eager, _ = integrate_and_fire(eager, dq, spec, 0)
        lazy, _ = integrate_and_fire(lazy, dq, spec, 0, allowed=False)
    lazy, _ = integrate_and_fire(lazy, 0, spec, 1)
    assert (eager.level, eager.V) == (lazy.level, lazy.V)


@given(neuron_specs(), rationals(-30, 30, 16))
def test_one_spike_at_a_time(spec, v_hat):
    """Single-step chains (the refractory path) still make strict progress."""
    s = replace(NeuronState.initial(spec), V=v_hat, cum_input=spec.C * v_hat)
    while True:
        s, spikes = integrate_and_fire(s, 0, spec, 0, max_spikes=1)
        if not spikes:
            break
        assert strict_progress_holds(spikes[0], spec)
        assert ledger_holds(s, spec)
    assert s.level == brute_decode(spec.C * v_hat, spec.levels)
