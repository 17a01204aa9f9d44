"""Synchronous decoded dynamics ``kappa -> act(W kappa + b)`` on cyclic graphs.

Used to reproduce the counterexamples showing that acyclicity is what makes
the terminal output unique and reachable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .core import as_rational
from .qann import quantized_relu

Vector = tuple[Fraction, ...]

DEFAULT_BOX_LIMIT = 10**7


class BoxTooLarge(ValueError):
    pass


def _vec(xs) -> Vector:
    return tuple(as_rational(x) for x in xs)


@dataclass(frozen=True)
class DecodedSystem:
    W: tuple[Vector, ...]
    b: Vector
    activation: Union[Callable, Sequence[Callable]] = quantized_relu
    box: Optional[tuple[tuple[Fraction, ...], ...]] = None

    def __post_init__(self):
        W = tuple(_vec(row) for row in self.W)
        b = _vec(self.b)
        n = len(b)
        if len(W) != n or any(len(r) != n for r in W):
            raise ValueError("W must be square and match b")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        if self.box is not None:
            object.__setattr__(self, "box", tuple(tuple(as_rational(v) for v in comp) for comp in self.box))

    @property
    def n(self) -> int:
        return len(self.b)

    def act(self, i: int) -> Callable:
        if callable(self.activation):
            return self.activation
        return self.activation[i]

    def update(self, kappa: Sequence) -> Vector:
        out = []
        for i, row in enumerate(self.W):
            pre = self.b[i] + sum((w * k for w, k in zip(row, kappa) if w), Fraction(0))
            out.append(as_rational(self.act(i)(pre)))
        return tuple(out)

    def in_box(self, kappa: Sequence) -> bool:
        if self.box is None:
            return True
        return all(k in comp for k, comp in zip(kappa, self.box))


def int_box(lo: int, hi: int, n: int) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(v) for v in range(lo, hi + 1)) for _ in range(n))


@dataclass(frozen=True)
class OrbitResult:
    trajectory: tuple[Vector, ...]
    kind: str  # "fixed_point" | "cycle" | "budget_exceeded" | "box_escape"
    period: Optional[int] = None
    states: tuple[Vector, ...] = ()

    @property
    def fixed_point(self) -> Optional[Vector]:
        return self.states[0] if self.kind == "fixed_point" else None


def sync_iterate(sys: DecodedSystem, kappa0: Sequence, max_steps: int = 1000) -> OrbitResult:
    """Iterate until a state repeats; classify as fixed point or cycle."""
    state = _vec(kappa0)
    if not sys.in_box(state):
        raise ValueError("initial state outside the box")
    traj = [state]
    seen = {state: 0}
    for _ in range(max_steps):
        state = sys.update(state)
        traj.append(state)
        if not sys.in_box(state):
            return OrbitResult(tuple(traj), "box_escape")
        if state in seen:
            start = seen[state]
            cycle = tuple(traj[start:-1])
            kind = "fixed_point" if len(cycle) == 1 else "cycle"
            return OrbitResult(tuple(traj), kind, len(cycle), cycle)
        seen[state] = len(traj) - 1
    return OrbitResult(tuple(traj), "budget_exceeded")


def enumerate_fixed_points(sys: DecodedSystem, box=None, limit: int = DEFAULT_BOX_LIMIT) -> set[Vector]:
    box = box if box is not None else sys.box
    if box is None:
        box = int_box(0, 5, sys.n)
    box = tuple(tuple(as_rational(v) for v in comp) for comp in box)
    size = math.prod(len(c) for c in box)
    if size > limit:
        raise BoxTooLarge(f"box has {size} points, limit is {limit}")
    return {k for k in itertools.product(*box) if sys.update(k) == k}


def check_cycle_closure(sys: DecodedSystem, states: Sequence[Vector]) -> bool:
    return all(sys.update(s) == states[(i + 1) % len(states)] for i, s in enumerate(states))


# ---------------------------------------------------------------------------
# Golden counterexamples

F = Fraction


def positive_self_loop() -> DecodedSystem:
    return DecodedSystem(((F(1, 2),),), (F(3, 5),))


def negative_self_loop() -> DecodedSystem:
    return DecodedSystem(((F(-1, 2),),), (F(6, 5),))


def reachability_gap() -> DecodedSystem:
    W = ((0, 0, 0), (1, 0, -2), (1, -2, 0))
    return DecodedSystem(W, (1, 0, 0))


@dataclass(frozen=True)
class ExampleResult:
    name: str
    passed: bool
    detail: str


def counterexample_suite(box_range: tuple[int, int] = (0, 5)) -> list[ExampleResult]:
    lo, hi = box_range
    results = []

    sys = positive_self_loop()
    fps = enumerate_fixed_points(sys, int_box(lo, hi, 1))
    want = {(F(0),), (F(1),)}
    results.append(ExampleResult(
        "single-positive", fps == want,
        f"fixed points {sorted(_show(p) for p in fps)}, expected {sorted(_show(p) for p in want)}"))

    sys = negative_self_loop()
    orbit = sync_iterate(sys, (0,))
    ok = (orbit.kind == "cycle" and orbit.period == 2
          and set(orbit.states) == {(F(0),), (F(1),)}
          and orbit.trajectory[:3] == ((F(0),), (F(1),), (F(0),)))
    results.append(ExampleResult(
        "single-negative", ok,
        f"orbit {[_show(s) for s in orbit.trajectory]} classified {orbit.kind} period {orbit.period}"))

    sys = reachability_gap()
    fps = enumerate_fixed_points(sys, int_box(lo, hi, 3))
    orbit = sync_iterate(sys, (0, 0, 0))
    a, b_ = (F(1), F(0), F(0)), (F(1), F(1), F(1))
    ok = ((F(1), F(1), F(0)) in fps and (F(1), F(0), F(1)) in fps
          and orbit.trajectory[1:4] == (a, b_, a)
          and orbit.kind == "cycle" and orbit.period == 2 and set(orbit.states) == {a, b_}
          and all(s not in fps for s in orbit.states))
    results.append(ExampleResult(
        "reachability-gap", ok,
        f"fixed points {sorted(_show(p) for p in fps)}; orbit from 0: "
        f"{[_show(s) for s in orbit.trajectory]} ({orbit.kind}, period {orbit.period})"))
    return results


def _show(v: Vector) -> str:
    return "(" + ",".join(str(x) for x in v) + ")"


def from_qann(q, u) -> DecodedSystem:
    """Decoded system of a QANN: rows are postsynaptic nodes, ``b = u``."""
    ids = q.ids
    pos = {nid: k for k, nid in enumerate(ids)}
    W = [[Fraction(0)] * len(ids) for _ in ids]
    for (pre, post), w in q.weights.items():
        W[pos[post]][pos[pre]] = w
    return DecodedSystem(W, [u.get(nid, 0) for nid in ids], [q.node(nid) for nid in ids])
