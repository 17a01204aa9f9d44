"""Exact-arithmetic building blocks: level sets, decoding partitions,
activation tables and network topology.

Every real-valued quantity in the package is a :class:`fractions.Fraction`.
Floats are never accepted where a rational is expected.
"""

from __future__ import annotations

import bisect
import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Optional, Sequence, Union

Rational = Fraction
NeuronId = Hashable


class ModelError(ValueError):
    """Base class for invalid model construction."""


class InvalidLevelSet(ModelError):
    pass


class NoSuccessor(ModelError):
    pass


class NoPredecessor(ModelError):
    pass


class InvalidNetwork(ModelError):
    pass


def as_rational(x) -> Fraction:
    """Coerce ints/Fractions to Fraction; refuse floats (exactness contract)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"refusing inexact value {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def id_key(nid) -> tuple:
    """Sort key for neuron ids: integers (or digit strings) numerically, then strings."""
    if isinstance(nid, int):
        return (0, nid, "")
    s = str(nid)
    if s.lstrip("-").isdigit():
        return (0, int(s), s)
    return (1, 0, s)


# ---------------------------------------------------------------------------
# Level sets


@dataclass(frozen=True)
class LevelSet:
    """Strictly increasing finite set of discharge levels containing 0."""

    levels: tuple[Fraction, ...]

    def __init__(self, levels: Iterable):
        vals = tuple(as_rational(q) for q in levels)
        if len(vals) < 2:
            raise InvalidLevelSet("a level set needs at least two levels")
        if any(a >= b for a, b in zip(vals, vals[1:])):
            raise InvalidLevelSet(f"levels must be strictly increasing: {vals}")
        if Fraction(0) not in vals:
            raise InvalidLevelSet("level set must contain 0 (initial discharge level)")
        object.__setattr__(self, "levels", vals)

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def __contains__(self, q) -> bool:
        i = bisect.bisect_left(self.levels, q)
        return i < len(self.levels) and self.levels[i] == q

    @property
    def lowest(self) -> Fraction:
        return self.levels[0]

    @property
    def highest(self) -> Fraction:
        return self.levels[-1]

    def index(self, q) -> int:
        i = bisect.bisect_left(self.levels, q)
        if i == len(self.levels) or self.levels[i] != q:
            raise InvalidLevelSet(f"{q} is not a level")
        return i

    def succ(self, q) -> Fraction:
        i = self.index(q)
        if i == len(self.levels) - 1:
            raise NoSuccessor(f"{q} is the maximal level")
        return self.levels[i + 1]

    def pred(self, q) -> Fraction:
        i = self.index(q)
        if i == 0:
            raise NoPredecessor(f"{q} is the minimal level")
        return self.levels[i - 1]

    def gaps(self) -> list[Fraction]:
        return [b - a for a, b in zip(self.levels, self.levels[1:])]


# ---------------------------------------------------------------------------
# Partitions of the real line into half-open slices


@dataclass(frozen=True)
class Slice:
    """Half-open interval ``[lower, upper)``; ``None`` stands for an infinite end.

    A slice with ``lower=None`` is ``(-inf, upper)``.
    """

    label: Fraction
    lower: Optional[Fraction]
    upper: Optional[Fraction]

    def contains(self, z) -> bool:
        if self.lower is not None and z < self.lower:
            return False
        if self.upper is not None and z >= self.upper:
            return False
        return True


@dataclass(frozen=True)
class PartitionViolation:
    kind: str  # "gap" | "overlap" | "empty" | "uncovered-below" | "uncovered-above"
    point: Optional[Fraction]
    message: str


@dataclass(frozen=True)
class DecodingPartition:
    slices: tuple[Slice, ...]

    def __init__(self, slices: Iterable[Slice]):
        ordered = sorted(
            slices,
            key=lambda s: (s.lower is not None, s.lower if s.lower is not None else 0),
        )
        object.__setattr__(self, "slices", tuple(ordered))

    @property
    def labels(self) -> list[Fraction]:
        return [s.label for s in self.slices]

    @property
    def breakpoints(self) -> list[Fraction]:
        """Finite lower bounds, in increasing order."""
        return [s.lower for s in self.slices if s.lower is not None]


def build_partition(levels: LevelSet, C) -> DecodingPartition:
    """Input-charge slices of a neuron at rest.

    Interior level ``q`` owns ``[q, succ(q))``; the minimal level owns
    ``(-inf, succ(Q_m))`` and the maximal level ``[Q_M, +inf)``.  The slices
    do not depend on ``C``.
    """
    if not isinstance(levels, LevelSet):
        levels = LevelSet(levels)
    if as_rational(C) <= 0:
        raise ModelError("capacitance must be positive")
    qs = levels.levels
    slices = []
    for i, q in enumerate(qs):
        lower = None if i == 0 else q
        upper = qs[i + 1] if i + 1 < len(qs) else None
        slices.append(Slice(q, lower, upper))
    return DecodingPartition(slices)


def validate_partition(p: DecodingPartition) -> Optional[PartitionViolation]:
    """Return ``None`` if the slices cover the real line disjointly, else the
    first violation found scanning from -inf upward."""
    ss = p.slices
    if not ss:
        return PartitionViolation("uncovered-below", None, "partition has no slices")
    for s in ss:
        if s.lower is not None and s.upper is not None and s.lower >= s.upper:
            return PartitionViolation("empty", s.lower, f"slice [{s.lower}, {s.upper}) is empty")
    if ss[0].lower is not None:
        return PartitionViolation(
            "uncovered-below", ss[0].lower, f"nothing covers values below {ss[0].lower}"
        )
    for a, b in zip(ss, ss[1:]):
        if b.lower is None:
            return PartitionViolation("overlap", None, "two slices extend to -inf")
        if a.upper is None:
            return PartitionViolation("overlap", b.lower, f"slices overlap from {b.lower}")
        if a.upper < b.lower:
            return PartitionViolation("gap", a.upper, f"gap [{a.upper}, {b.lower})")
        if a.upper > b.lower:
            return PartitionViolation("overlap", b.lower, f"slices overlap on [{b.lower}, {a.upper})")
    if ss[-1].upper is not None:
        return PartitionViolation(
            "uncovered-above", ss[-1].upper, f"nothing covers values from {ss[-1].upper}"
        )
    return None


def decode(z, p: DecodingPartition) -> Fraction:
    """Label of the unique slice containing ``z``."""
    z = as_rational(z)
    i = bisect.bisect_right(p.breakpoints, z)
    # slices[0] is the (-inf, .) slice; breakpoints[k] is slices[k+1].lower
    return p.slices[i].label


def v_thr(q, levels: LevelSet, C) -> Fraction:
    """Upward threshold potential ``(succ(q) - q) / C``."""
    q = as_rational(q)
    return (levels.succ(q) - q) / as_rational(C)


# ---------------------------------------------------------------------------
# Activation tables


@dataclass(frozen=True)
class ActivationTable:
    """Output charge per level (the sigma table); need not be injective."""

    entries: tuple[tuple[Fraction, Fraction], ...]

    def __init__(self, entries: Union[Mapping, Iterable]):
        items = entries.items() if isinstance(entries, Mapping) else entries
        pairs = tuple(sorted((as_rational(k), as_rational(v)) for k, v in items))
        keys = [k for k, _ in pairs]
        if len(set(keys)) != len(keys):
            raise ModelError("duplicate level in activation table")
        object.__setattr__(self, "entries", pairs)
        object.__setattr__(self, "_lookup", dict(pairs))

    def __getitem__(self, q) -> Fraction:
        return self._lookup[q]

    def __call__(self, q) -> Fraction:
        return self._lookup[q]

    def keys(self):
        return self._lookup.keys()

    def as_dict(self) -> dict:
        return dict(self._lookup)

    @classmethod
    def identity(cls, levels: Iterable) -> "ActivationTable":
        return cls({q: q for q in levels})


# ---------------------------------------------------------------------------
# Neurons, synapses, networks


@dataclass(frozen=True)
class RefractorySpec:
    """Uniform range of refractory periods a neuron may draw from."""

    min: Fraction
    max: Fraction

    def __post_init__(self):
        object.__setattr__(self, "min", as_rational(self.min))
        object.__setattr__(self, "max", as_rational(self.max))
        if self.min < 0 or self.max < self.min:
            raise ModelError(f"bad refractory range [{self.min}, {self.max}]")


@dataclass(frozen=True)
class NeuronSpec:
    id: NeuronId
    C: Fraction
    levels: LevelSet
    sigma: ActivationTable
    refractory: Optional[RefractorySpec] = None
    partition: DecodingPartition = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "C", as_rational(self.C))
        if not isinstance(self.levels, LevelSet):
            object.__setattr__(self, "levels", LevelSet(self.levels))
        if not isinstance(self.sigma, ActivationTable):
            object.__setattr__(self, "sigma", ActivationTable(self.sigma))
        if self.C <= 0:
            raise ModelError(f"neuron {self.id}: capacitance must be positive")
        missing = [q for q in self.levels if q not in self.sigma.keys()]
        if missing:
            raise ModelError(f"neuron {self.id}: sigma undefined on levels {missing}")
        p = build_partition(self.levels, self.C)
        if validate_partition(p) is not None:  # pragma: no cover - build_partition is total
            raise ModelError(f"neuron {self.id}: invalid partition")
        object.__setattr__(self, "partition", p)

    @classmethod
    def unit(cls, nid, top: int = 3, C=1) -> "NeuronSpec":
        """Levels ``{0..top}`` with identity sigma."""
        levels = LevelSet(range(top + 1))
        return cls(nid, as_rational(C), levels, ActivationTable.identity(levels))

    def terminal_map(self, z) -> Fraction:
        """sigma(decode(z)): the neuron's terminal output for total inflow z."""
        return self.sigma[decode(z, self.partition)]


def delta_kernel() -> tuple[tuple[Fraction, Fraction], ...]:
    return ((Fraction(0), Fraction(1)),)


@dataclass(frozen=True)
class SynapseSpec:
    pre: NeuronId
    post: NeuronId
    weight: Fraction
    delay: Fraction = Fraction(0)
    kernel: tuple[tuple[Fraction, Fraction], ...] = field(default_factory=delta_kernel)

    def __post_init__(self):
        object.__setattr__(self, "weight", as_rational(self.weight))
        object.__setattr__(self, "delay", as_rational(self.delay))
        kernel = tuple((as_rational(o), as_rational(f)) for o, f in self.kernel)
        object.__setattr__(self, "kernel", kernel)
        validate_kernel(kernel, self.delay)


def validate_kernel(kernel: Sequence[tuple[Fraction, Fraction]], delay=Fraction(0)) -> None:
    if delay < 0:
        raise ModelError(f"negative synaptic delay {delay}")
    if not kernel:
        raise ModelError("kernel needs at least one atom")
    if any(o < 0 for o, _ in kernel):
        raise ModelError("kernel offsets must be nonnegative")
    if sum(f for _, f in kernel) != 1:
        raise ModelError("kernel fractions must sum exactly to 1")


@dataclass(frozen=True)
class NetworkSpec:
    neurons: tuple[NeuronSpec, ...]
    synapses: tuple[SynapseSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "neurons", tuple(self.neurons))
        object.__setattr__(self, "synapses", tuple(self.synapses))
        ids = [n.id for n in self.neurons]
        if len(set(ids)) != len(ids):
            raise InvalidNetwork("duplicate neuron id")
        known = set(ids)
        seen = set()
        for s in self.synapses:
            if s.pre not in known or s.post not in known:
                raise InvalidNetwork(f"synapse {s.pre}->{s.post} references unknown neuron")
            if (s.pre, s.post) in seen:
                raise InvalidNetwork(f"duplicate synapse {s.pre}->{s.post}")
            seen.add((s.pre, s.post))

    @property
    def ids(self) -> list:
        return [n.id for n in self.neurons]

    def neuron(self, nid) -> NeuronSpec:
        for n in self.neurons:
            if n.id == nid:
                return n
        raise KeyError(nid)

    def outgoing(self) -> dict:
        out = {n.id: [] for n in self.neurons}
        for k, s in enumerate(self.synapses):
            out[s.pre].append(k)
        return out

    def weight_map(self) -> dict:
        """``{(pre, post): weight}``."""
        return {(s.pre, s.post): s.weight for s in self.synapses}


@dataclass(frozen=True)
class TopoResult:
    order: Optional[list]
    cycle: Optional[list]

    @property
    def acyclic(self) -> bool:
        return self.order is not None


def topological_order(ids: Iterable, edges: Iterable[tuple]) -> TopoResult:
    """Kahn's algorithm with smallest-id-first tie breaking; on failure returns
    a directed cycle found by DFS from the smallest blocked node."""
    ids = list(ids)
    succ = {i: set() for i in ids}
    indeg = {i: 0 for i in ids}
    for a, b in edges:
        if b not in succ[a]:
            succ[a].add(b)
            indeg[b] += 1
    heap = [(id_key(i), i) for i in ids if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, i = heapq.heappop(heap)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (id_key(j), j))
    if len(order) == len(ids):
        return TopoResult(order, None)

    remaining = {i for i in ids if indeg[i] > 0}
    start = min(remaining, key=id_key)
    path, on_path = [start], {start: 0}
    node = start
    # every remaining node has a remaining predecessor, so walk predecessors
    pred = {i: sorted((a for a in remaining if i in succ[a]), key=id_key) for i in remaining}
    while True:
        nxt = pred[node][0]
        if nxt in on_path:
            cyc = path[on_path[nxt]:]
            cyc.reverse()
            k = cyc.index(min(cyc, key=id_key))
            return TopoResult(None, cyc[k:] + cyc[:k])
        on_path[nxt] = len(path)
        path.append(nxt)
        node = nxt


def check_acyclic(net: NetworkSpec) -> TopoResult:
    return topological_order(net.ids, ((s.pre, s.post) for s in net.synapses))
