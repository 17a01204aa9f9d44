"""Event mechanics of the generalized ST-BIF neuron.

A neuron integrates impulsive input charge into its membrane potential and
emits spikes that step its discharge level one position along the level set.
All transitions are pure: a state goes in, a new state comes out.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .core import NeuronSpec, LevelSet, as_rational


class IllegalTransition(RuntimeError):
    pass


class Direction(enum.Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class NeuronState:
    V: Fraction = Fraction(0)
    level: Fraction = Fraction(0)
    cum_input: Fraction = Fraction(0)
    cum_output: Fraction = Fraction(0)
    spike_count: int = 0
    refractory_until: Optional[Fraction] = None

    @classmethod
    def initial(cls, spec: NeuronSpec) -> "NeuronState":
        return cls(cum_output=spec.sigma[Fraction(0)])


@dataclass(frozen=True)
class SpikeRecord:
    time: Fraction
    neuron: object
    direction: Direction
    q_dis: Fraction
    q_out: Fraction
    phi_before: Fraction
    phi_after: Fraction
    silent_after: bool


def pre_decision_potential(state: NeuronState, dq_in, C) -> Fraction:
    return state.V + as_rational(dq_in) / as_rational(C)


def spike_decision(v_hat, level, spec: NeuronSpec) -> Optional[Direction]:
    levels = spec.levels
    if level < levels.highest and v_hat >= (levels.succ(level) - level) / spec.C:
        return Direction.UP
    if level > levels.lowest and v_hat < 0:
        return Direction.DOWN
    return None


def silent_interval(level, spec: NeuronSpec) -> tuple[Optional[Fraction], Optional[Fraction]]:
    """Bounds of the half-open silent set ``[lo, hi)``; ``None`` is infinite."""
    levels = spec.levels
    hi = None if level == levels.highest else (levels.succ(level) - level) / spec.C
    lo = None if level == levels.lowest else Fraction(0)
    return lo, hi


def phi_at(V, level, spec: NeuronSpec) -> Fraction:
    """Distance from ``V`` to the closure of the silent set at ``level``."""
    lo, hi = silent_interval(level, spec)
    if hi is not None and V > hi:
        return V - hi
    if lo is not None and V < lo:
        return lo - V
    return Fraction(0)


def phi(state: NeuronState, spec: NeuronSpec) -> Fraction:
    return phi_at(state.V, state.level, spec)


def is_silent(state: NeuronState, spec: NeuronSpec) -> bool:
    return spike_decision(state.V, state.level, spec) is None


def delta_min(levels: LevelSet, C) -> Fraction:
    """Smallest adjacent level gap, in potential units."""
    return min(levels.gaps()) / as_rational(C)


def integrate(state: NeuronState, dq_in, spec: NeuronSpec) -> NeuronState:
    dq_in = as_rational(dq_in)
    if not dq_in:
        return state
    return replace(state, V=state.V + dq_in / spec.C, cum_input=state.cum_input + dq_in)


def apply_spike(state: NeuronState, direction: Direction, spec: NeuronSpec, time,
                neuron=None) -> tuple[NeuronState, SpikeRecord]:
    """Fire one spike from ``state``, whose ``V`` already holds the
    pre-decision potential."""
    levels = spec.levels
    old = state.level
    if direction is Direction.UP:
        if old == levels.highest:
            raise IllegalTransition(f"upward spike at maximal level {old}")
        new = levels.succ(old)
    else:
        if old == levels.lowest:
            raise IllegalTransition(f"downward spike at minimal level {old}")
        new = levels.pred(old)
    q_dis = new - old
    q_out = spec.sigma[new] - spec.sigma[old]
    v_after = state.V - q_dis / spec.C
    after = replace(
        state,
        V=v_after,
        level=new,
        cum_output=state.cum_output + q_out,
        spike_count=state.spike_count + 1,
    )
    record = SpikeRecord(
        time=as_rational(time),
        neuron=spec.id if neuron is None else neuron,
        direction=direction,
        q_dis=q_dis,
        q_out=q_out,
        phi_before=phi_at(state.V, new, spec),
        phi_after=phi_at(v_after, new, spec),
        silent_after=spike_decision(v_after, new, spec) is None,
    )
    return after, record


def integrate_and_fire(state: NeuronState, dq_in, spec: NeuronSpec, time,
                       allowed: bool = True,
                       max_spikes: Optional[int] = None) -> tuple[NeuronState, list[SpikeRecord]]:
    """Integrate ``dq_in`` then fire until silent.

    With ``allowed=False`` (refractory) only the potential is updated.
    ``max_spikes`` caps the chain; the engine uses 1 when a refractory period
    follows every spike.
    """
    state = integrate(state, dq_in, spec)
    spikes: list[SpikeRecord] = []
    if not allowed:
        return state, spikes
    # each iteration moves one level toward a boundary, so this bound is loose but safe
    bound = len(spec.levels) + 1 + int(abs(as_rational(dq_in)) / spec.C / delta_min(spec.levels, spec.C)) + 1
    while max_spikes is None or len(spikes) < max_spikes:
        d = spike_decision(state.V, state.level, spec)
        if d is None:
            break
        if len(spikes) > bound:  # pragma: no cover - would mean a logic error
            raise IllegalTransition("spike chain failed to terminate")
        state, rec = apply_spike(state, d, spec, time)
        spikes.append(rec)
    return state, spikes


def ledger_holds(state: NeuronState, spec: NeuronSpec) -> bool:
    """Charge conservation from rest: ``C V = Q_in - Q``."""
    return spec.C * state.V == state.cum_input - state.level


def strict_progress_holds(rec: SpikeRecord, spec: NeuronSpec) -> bool:
    return rec.silent_after or rec.phi_after <= rec.phi_before - delta_min(spec.levels, spec.C)
