"""Deterministic discrete-event simulation of charge-conserving networks.

Events are processed in ``(time, seq)`` order, where ``seq`` is the insertion
counter.  ``tie_break="lifo"`` reverses the order among simultaneous events,
which must not change the terminal outputs of an acyclic network.
"""

from __future__ import annotations

import enum
import heapq
import json
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .core import NetworkSpec, as_rational, decode
from .neuron import (NeuronState, SpikeRecord, integrate_and_fire, is_silent,
                     ledger_holds, strict_progress_holds)
from .realizer import InputEpisode, Realization, SynapseTiming

DEFAULT_EVENT_BUDGET = 10**7


class InvalidEpisode(ValueError):
    pass


class InvariantViolation(AssertionError):
    """``kind`` is ``"ledger"``, ``"progress"`` or ``"silence"``."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class EventBudgetExceeded(RuntimeError):
    """Raised when a run processes more events than its budget allows.

    ``sim`` holds the simulator at the moment of interruption so callers can
    still inspect states and audit invariants.
    """

    def __init__(self, budget: int, sim: "Simulator"):
        super().__init__(f"event budget of {budget} exceeded at t={sim.now}")
        self.budget = budget
        self.sim = sim


class EventKind(enum.Enum):
    INPUT = "input"
    SYNAPTIC = "synaptic"
    RELEASE = "release"


@dataclass(frozen=True)
class Event:
    time: Fraction
    seq: int
    kind: EventKind
    neuron: object
    charge: Fraction = Fraction(0)
    synapse: Optional[int] = None  # index into NetworkSpec.synapses; None for baseline-free kinds

    def to_json(self) -> dict:
        d = {"t": fmt(self.time), "seq": self.seq, "kind": self.kind.value,
             "neuron": self.neuron, "charge": fmt(self.charge)}
        if self.synapse is not None:
            d["synapse"] = self.synapse
        return d


def fmt(q: Fraction) -> str:
    return str(q)


class EventQueue:
    def __init__(self, tie_break: str = "fifo"):
        if tie_break not in ("fifo", "lifo"):
            raise ValueError(f"unknown tie break {tie_break!r}")
        self._sign = 1 if tie_break == "fifo" else -1
        self._heap: list = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, time, kind: EventKind, neuron, charge=Fraction(0), synapse=None) -> Event:
        time = as_rational(time)
        if time < 0:
            raise InvalidEpisode(f"event at negative time {time}")
        ev = Event(time, self._seq, kind, neuron, as_rational(charge), synapse)
        self._seq += 1
        heapq.heappush(self._heap, (ev.time, self._sign * ev.seq, ev))
        return ev

    def pop(self) -> Event:
        return heapq.heappop(self._heap)[2]


@dataclass
class TraceEntry:
    event: Event
    spikes: list[SpikeRecord]

    def to_json(self) -> dict:
        d = self.event.to_json()
        d["spikes"] = [
            {"neuron": s.neuron, "dir": s.direction.value, "q_dis": fmt(s.q_dis),
             "q_out": fmt(s.q_out), "phi_before": fmt(s.phi_before), "phi_after": fmt(s.phi_after)}
            for s in self.spikes
        ]
        return d


@dataclass
class Trace:
    entries: list[TraceEntry] = field(default_factory=list)
    # per neuron: [(time, cumulative output just after that time)], starting at t=0
    output_samples: dict = field(default_factory=dict)

    def spikes(self) -> list[SpikeRecord]:
        return [s for e in self.entries for s in e.spikes]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_json()) + "\n" for e in self.entries)

    def output_at(self, nid, t) -> Fraction:
        """Right-continuous cumulative output of ``nid`` at time ``t``."""
        value = self.output_samples[nid][0][1]
        for ts, v in self.output_samples[nid]:
            if ts > t:
                break
            value = v
        return value


@dataclass(frozen=True)
class TerminalReport:
    kappa: dict
    z: dict
    levels: dict
    V: dict
    spike_counts: dict
    termination_time: Fraction
    total_events: int


def schedule_episode(episode: InputEpisode, queue: Optional[EventQueue] = None) -> EventQueue:
    queue = queue if queue is not None else EventQueue()
    for nid, imps in episode.impulses.items():
        for t, q in imps:
            if t < 0:
                raise InvalidEpisode(f"impulse for {nid} at negative time {t}")
            queue.push(t, EventKind.INPUT, nid, q)
    return queue


def default_timing(net: NetworkSpec) -> tuple[SynapseTiming, ...]:
    return tuple(SynapseTiming(s.delay, s.kernel) for s in net.synapses)


def emit_baseline_charges(net: NetworkSpec, queue: Optional[EventQueue] = None,
                          timing: Optional[tuple[SynapseTiming, ...]] = None) -> EventQueue:
    """Schedule the resting output ``sigma(0)`` of every presynaptic neuron."""
    queue = queue if queue is not None else EventQueue()
    timing = timing if timing is not None else default_timing(net)
    specs = {n.id: n for n in net.neurons}
    for k, s in enumerate(net.synapses):
        q0 = specs[s.pre].sigma[Fraction(0)]
        if q0 == 0:
            continue
        tm = timing[k]
        for offset, frac in tm.kernel:
            queue.push(tm.delay + offset, EventKind.SYNAPTIC, s.post, s.weight * q0 * frac, k)
    return queue


def event_budget_from_env(default: int = DEFAULT_EVENT_BUDGET) -> int:
    raw = os.environ.get("SNN_EVENT_BUDGET")
    return int(raw) if raw else default


class Simulator:
    """Single-run simulation state.  Use :func:`run` for the common case."""

    def __init__(self, net: NetworkSpec, realization: Realization, *,
                 tie_break: str = "fifo", debug: bool = False, record_trace: bool = True):
        self.net = net
        self.specs = {n.id: n for n in net.neurons}
        self.timing = realization.timing or default_timing(net)
        if len(self.timing) != len(net.synapses):
            raise ValueError("realization timing does not match the network's synapses")
        self.refractory = dict(realization.refractory)
        self.out_syn = net.outgoing()
        self.states = {n.id: NeuronState.initial(n) for n in net.neurons}
        self.queue = EventQueue(tie_break)
        self.debug = debug
        self.record_trace = record_trace
        self.trace = Trace(output_samples={n.id: [(Fraction(0), self.states[n.id].cum_output)]
                                           for n in net.neurons})
        self.now = Fraction(0)
        self.processed = 0
        self.u = {nid: Fraction(0) for nid in self.specs}
        for nid, q in realization.episode.aggregate().items():
            if nid not in self.specs:
                raise InvalidEpisode(f"input for unknown neuron {nid!r}")
            self.u[nid] += q
        schedule_episode(realization.episode, self.queue)
        emit_baseline_charges(net, self.queue, self.timing)

    def deliver(self, ev: Event) -> list[SpikeRecord]:
        nid = ev.neuron
        spec = self.specs[nid]
        st = self.states[nid]
        period = self.refractory.get(nid, Fraction(0))
        blocked = st.refractory_until is not None and ev.time < st.refractory_until
        if ev.kind is EventKind.RELEASE and blocked:
            # a newer refractory window superseded this release; its own release is queued
            return []
        st, spikes = integrate_and_fire(st, ev.charge, spec, ev.time, allowed=not blocked,
                                        max_spikes=1 if period > 0 else None)
        if spikes and period > 0:
            until = ev.time + period
            st = replace(st, refractory_until=until)
            self.queue.push(until, EventKind.RELEASE, nid)
        self.states[nid] = st
        for rec in spikes:
            self.trace.output_samples[nid].append((ev.time, st.cum_output))
            self._propagate(nid, rec)
        return spikes

    def _propagate(self, nid, rec: SpikeRecord) -> None:
        if rec.q_out == 0:
            return
        for k in self.out_syn[nid]:
            s = self.net.synapses[k]
            tm = self.timing[k]
            for offset, frac in tm.kernel:
                self.queue.push(rec.time + tm.delay + offset, EventKind.SYNAPTIC, s.post,
                                s.weight * rec.q_out * frac, k)

    def step(self) -> TraceEntry:
        ev = self.queue.pop()
        self.now = ev.time
        spikes = self.deliver(ev)
        self.processed += 1
        if self.debug:
            self._check(ev.neuron, spikes)
        entry = TraceEntry(ev, spikes)
        if self.record_trace:
            self.trace.entries.append(entry)
        return entry

    def _check(self, nid, spikes) -> None:
        spec = self.specs[nid]
        if not ledger_holds(self.states[nid], spec):
            raise InvariantViolation("ledger", f"charge ledger broken for {nid} at t={self.now}")
        for rec in spikes:
            if not strict_progress_holds(rec, spec):
                raise InvariantViolation("progress", f"strict progress broken for {nid} at t={self.now}")

    def run(self, budget: int = DEFAULT_EVENT_BUDGET) -> TerminalReport:
        while self.queue:
            if self.processed >= budget:
                raise EventBudgetExceeded(budget, self)
            self.step()
        unsettled = [nid for nid, st in self.states.items() if not is_silent(st, self.specs[nid])]
        if unsettled:  # pragma: no cover - refractory deferral always queues a release
            raise InvariantViolation("silence", f"queue drained with non-silent neurons {unsettled}")
        return self.report()

    def report(self) -> TerminalReport:
        ids = self.net.ids
        return TerminalReport(
            kappa={i: self.specs[i].sigma[self.states[i].level] for i in ids},
            z={i: self.states[i].cum_input for i in ids},
            levels={i: self.states[i].level for i in ids},
            V={i: self.states[i].V for i in ids},
            spike_counts={i: self.states[i].spike_count for i in ids},
            termination_time=self.now,
            total_events=self.processed,
        )


def run(net: NetworkSpec, episode, realization: Optional[Realization] = None, *,
        budget: Optional[int] = None, tie_break: str = "fifo", debug: bool = False,
        record_trace: bool = True) -> tuple[TerminalReport, Trace]:
    """Simulate ``net`` until quiescence.

    ``episode`` may be an :class:`InputEpisode` (delays/kernels taken from the
    network) or ``None`` when ``realization`` carries everything.
    """
    if realization is None:
        realization = Realization(episode if episode is not None else InputEpisode())
    elif episode is not None:
        realization = Realization(episode, realization.timing, realization.refractory)
    sim = Simulator(net, realization, tie_break=tie_break, debug=debug, record_trace=record_trace)
    report = sim.run(budget if budget is not None else event_budget_from_env())
    return report, sim.trace


@dataclass(frozen=True)
class LedgerViolation:
    neuron: object
    message: str


def ledger_audit(report: TerminalReport, trace: Trace, net: NetworkSpec,
                 episode: InputEpisode) -> list[LedgerViolation]:
    """Recheck charge conservation from the trace alone.  Empty list means ok."""
    out = []
    delivered = {nid: Fraction(0) for nid in net.ids}
    for e in trace.entries:
        delivered[e.event.neuron] += e.event.charge
    u = {nid: Fraction(0) for nid in net.ids}
    for nid, q in episode.aggregate().items():
        u[nid] += q
    W = net.weight_map()
    for n in net.neurons:
        i = n.id
        if n.C * report.V[i] != delivered[i] - report.levels[i]:
            out.append(LedgerViolation(i, f"C*V = {n.C * report.V[i]} but z - Q = {delivered[i] - report.levels[i]}"))
        if delivered[i] != report.z[i]:
            out.append(LedgerViolation(i, f"trace inflow {delivered[i]} differs from state inflow {report.z[i]}"))
        expected = u[i] + sum((w * report.kappa[j] for (j, k), w in W.items() if k == i), Fraction(0))
        if delivered[i] != expected:
            out.append(LedgerViolation(i, f"z = {delivered[i]} but u + W kappa = {expected}"))
        if report.kappa[i] != n.sigma[report.levels[i]]:
            out.append(LedgerViolation(i, "kappa differs from sigma(level)"))
        if n.terminal_map(delivered[i]) != report.kappa[i]:
            out.append(LedgerViolation(i, f"terminal level {report.levels[i]} != decode({delivered[i]}) = {decode(delivered[i], n.partition)}"))
    for s in trace.spikes():
        spec = net.neuron(s.neuron)
        if not strict_progress_holds(s, spec):
            out.append(LedgerViolation(s.neuron, f"strict progress broken at t={s.time}"))
    return out
