"""Quantized ANNs and their exact correspondence with charge-conserving SNNs.

A QANN node applies ``sigma(decode(z))``: a piecewise-constant activation on
half-open slices.  Evaluation runs along a topological order; the result is
then re-checked against the fixed-point equation ``kappa = act(u + W kappa)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .core import (ActivationTable, DecodingPartition, LevelSet, NetworkSpec,
                   NeuronSpec, Slice, SynapseSpec, as_rational, decode,
                   topological_order, validate_partition)


class NotAcyclic(ValueError):
    def __init__(self, cycle):
        super().__init__(f"interaction graph has a cycle: {cycle}")
        self.cycle = cycle


class NotRealizable(ValueError):
    pass


@dataclass(frozen=True)
class QANNNode:
    id: object
    partition: DecodingPartition
    sigma: ActivationTable

    def __call__(self, z) -> Fraction:
        return self.sigma[decode(z, self.partition)]

    @classmethod
    def from_pieces(cls, nid, breakpoints: Sequence, values: Sequence) -> "QANNNode":
        """Activation equal to ``values[k]`` on the k-th slice cut by ``breakpoints``.

        Slices are labeled by their lower bound; the unbounded-below slice is
        labeled ``breakpoints[0] - 1`` (or 0 when there are no breakpoints).
        """
        bps = [as_rational(b) for b in breakpoints]
        vals = [as_rational(v) for v in values]
        if len(vals) != len(bps) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        bottom = bps[0] - 1 if bps else Fraction(0)
        lowers = [None] + bps
        uppers = bps + [None]
        labels = [bottom] + bps
        slices = [Slice(lab, lo, up) for lab, lo, up in zip(labels, lowers, uppers)]
        return cls(nid, DecodingPartition(slices), ActivationTable(zip(labels, vals)))


@dataclass(frozen=True)
class QANNSpec:
    nodes: tuple[QANNNode, ...]
    weights: Mapping[tuple, Fraction] = field(default_factory=dict)  # (pre, post) -> w

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "weights", {k: as_rational(w) for k, w in self.weights.items()})
        ids = {n.id for n in self.nodes}
        if len(ids) != len(self.nodes):
            raise ValueError("duplicate node id")
        for pre, post in self.weights:
            if pre not in ids or post not in ids:
                raise ValueError(f"weight {pre}->{post} references unknown node")

    @property
    def ids(self) -> list:
        return [n.id for n in self.nodes]

    def node(self, nid) -> QANNNode:
        for n in self.nodes:
            if n.id == nid:
                return n
        raise KeyError(nid)

    def order(self) -> list:
        topo = topological_order(self.ids, (k for k, w in self.weights.items()))
        if not topo.acyclic:
            raise NotAcyclic(topo.cycle)
        return topo.order


def _inflow(q: QANNSpec, u: Mapping, kappa: Mapping) -> dict:
    z = {i: as_rational(u.get(i, 0)) for i in q.ids}
    for (pre, post), w in q.weights.items():
        z[post] += w * kappa[pre]
    return z


def is_fixed_point(q: QANNSpec, u: Mapping, kappa: Mapping) -> bool:
    z = _inflow(q, u, kappa)
    return all(n(z[n.id]) == kappa[n.id] for n in q.nodes)


def qann_eval(q: QANNSpec, u: Mapping) -> tuple[dict, dict]:
    """Return ``(kappa, z)`` with ``z = u + W kappa`` and ``kappa = act(z)``."""
    incoming = {i: [] for i in q.ids}
    for (pre, post), w in q.weights.items():
        incoming[post].append((pre, w))
    kappa, z = {}, {}
    for i in q.order():
        zi = as_rational(u.get(i, 0))
        for pre, w in incoming[i]:
            zi += w * kappa[pre]
        z[i] = zi
        kappa[i] = q.node(i)(zi)
    kappa = {i: kappa[i] for i in q.ids}
    z = {i: z[i] for i in q.ids}
    if not is_fixed_point(q, u, kappa):  # pragma: no cover - topological evaluation is exact
        raise AssertionError("topological evaluation is not a fixed point")
    return kappa, z


def snn_to_qann(net: NetworkSpec) -> QANNSpec:
    """Keep weights and each neuron's ``sigma o decode``; timing is dropped."""
    topo = topological_order(net.ids, ((s.pre, s.post) for s in net.synapses))
    if not topo.acyclic:
        raise NotAcyclic(topo.cycle)
    nodes = [QANNNode(n.id, n.partition, n.sigma) for n in net.neurons]
    return QANNSpec(nodes, net.weight_map())


@dataclass(frozen=True)
class SynthesisRecord:
    node: object
    levels: tuple[Fraction, ...]
    sentinel: Optional[Fraction]
    sigma: tuple[tuple[Fraction, Fraction], ...]


def synthesize_levels(node: QANNNode) -> tuple[LevelSet, ActivationTable, Optional[Fraction]]:
    """Levels whose decoding slices refine the node's slices.

    Every finite breakpoint becomes a level, 0 is always added, and a
    sentinel one below the lowest breakpoint supplies the unbounded-below
    slice.  Sigma then takes the node's activation at each level.
    """
    bad = validate_partition(node.partition)
    if bad is not None:
        raise NotRealizable(f"node {node.id}: {bad.message}")
    bps = node.partition.breakpoints
    if bps:
        sentinel = bps[0] - 1
        levels = sorted({Fraction(0), sentinel, *bps})
    else:
        sentinel = None
        levels = [Fraction(0), Fraction(1)]
    levelset = LevelSet(levels)
    sigma = ActivationTable({L: node(L) for L in levels})
    return levelset, sigma, sentinel


def qann_to_snn(q: QANNSpec, C=1, delay=0, kernel=None) -> tuple[NetworkSpec, list[SynthesisRecord]]:
    q.order()  # raises NotAcyclic
    C = as_rational(C)
    neurons, log = [], []
    for node in q.nodes:
        levels, sigma, sentinel = synthesize_levels(node)
        neurons.append(NeuronSpec(node.id, C, levels, sigma))
        log.append(SynthesisRecord(node.id, levels.levels, sentinel, sigma.entries))
    kw = {} if kernel is None else {"kernel": kernel}
    synapses = [SynapseSpec(pre, post, w, as_rational(delay), **kw)
                for (pre, post), w in q.weights.items()]
    return NetworkSpec(neurons, synapses), log


def quantized_relu(x, clip=None) -> Fraction:
    """``floor(max(x, 0))``, optionally clipped from above."""
    x = as_rational(x)
    y = Fraction(math.floor(x)) if x > 0 else Fraction(0)
    if clip is not None:
        y = min(y, as_rational(clip))
    return y


def probe_points(breakpoints: Sequence[Fraction], extra: Sequence[Fraction] = ()) -> list[Fraction]:
    """Boundaries, boundary +/- a tiny epsilon, and midpoints: enough to
    distinguish any two piecewise-constant maps cut at these points."""
    bps = sorted(set(breakpoints))
    eps = Fraction(1, 10**9)
    pts = set(extra)
    for b in bps:
        pts.update((b, b - eps, b + eps))
    for a, b in zip(bps, bps[1:]):
        pts.add((a + b) / 2)
    if bps:
        pts.update((bps[0] - 10, bps[-1] + 10))
    else:
        pts.update((Fraction(-10), Fraction(0), Fraction(10)))
    return sorted(pts)


def same_activation(a, b, breakpoints: Sequence[Fraction], extra=()) -> bool:
    return all(a(x) == b(x) for x in probe_points(breakpoints, extra))
