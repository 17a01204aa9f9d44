"""Seeded temporal realizations of aggregate-charge episodes.

Everything random flows from one splitmix64 stream, so a seed pins down
impulse splittings, synaptic delays, kernel atoms and refractory periods
exactly.  Random rationals are dyadic: ``value / 2**64`` in lowest terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .core import NetworkSpec, as_rational

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
TWO64 = 1 << 64


def prng_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(output, new_state)``."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31), state


class SplitMix64:
    """Stateful wrapper around :func:`prng_next`.

    Derived draws:
      * ``unit()``  -> Fraction(v, 2**64) in [0, 1)
      * ``uniform(lo, hi)`` -> lo + (hi - lo) * unit()
      * ``integer(lo, hi)`` -> lo + v % (hi - lo + 1)
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        value, self.state = prng_next(self.state)
        return value

    def unit(self) -> Fraction:
        return Fraction(self.next(), TWO64)

    def uniform(self, lo, hi) -> Fraction:
        lo, hi = as_rational(lo), as_rational(hi)
        return lo + (hi - lo) * self.unit()

    def integer(self, lo: int, hi: int) -> int:
        return lo + self.next() % (hi - lo + 1)

    def grid(self, lo, hi, step) -> Fraction:
        """Uniform draw from ``{lo, lo+step, ..., hi}``."""
        lo, hi, step = as_rational(lo), as_rational(hi), as_rational(step)
        n = int((hi - lo) / step)
        return lo + step * self.integer(0, n)

    def choice(self, seq):
        return seq[self.integer(0, len(seq) - 1)]


def derive_seed(*parts: int) -> int:
    """Mix integers into one 64-bit seed (first splitmix output of each fold)."""
    state = 0
    for p in parts:
        state, _ = prng_next((state ^ (p & MASK64)) & MASK64)
    return state


@dataclass(frozen=True)
class RealizationConfig:
    seed: int = 0
    splits_per_input: tuple[int, int] = (1, 4)
    time_horizon: Fraction = Fraction(10)
    delay_range: tuple[Fraction, Fraction] = (Fraction(0), Fraction(2))
    kernel_atoms: tuple[int, int] = (1, 3)
    kernel_span: tuple[Fraction, Fraction] = (Fraction(0), Fraction(2))
    refractory_range: Optional[tuple[Fraction, Fraction]] = None

    def __post_init__(self):
        object.__setattr__(self, "time_horizon", as_rational(self.time_horizon))
        for name in ("delay_range", "kernel_span", "refractory_range"):
            r = getattr(self, name)
            if r is not None:
                object.__setattr__(self, name, (as_rational(r[0]), as_rational(r[1])))
        for name in ("splits_per_input", "kernel_atoms"):
            lo, hi = getattr(self, name)
            if not (1 <= lo <= hi):
                raise ValueError(f"{name} must be a nonempty range of positive integers")
        if self.time_horizon <= 0:
            raise ValueError("time horizon must be positive")
        for name in ("delay_range", "kernel_span", "refractory_range"):
            r = getattr(self, name)
            if r is not None and not (0 <= r[0] <= r[1]):
                raise ValueError(f"{name} must be a nonempty nonnegative interval")


@dataclass(frozen=True)
class InputEpisode:
    impulses: Mapping[object, tuple[tuple[Fraction, Fraction], ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for nid, imps in self.impulses.items():
            clean[nid] = tuple((as_rational(t), as_rational(q)) for t, q in imps)
        object.__setattr__(self, "impulses", clean)

    def aggregate(self) -> dict:
        return {nid: sum((q for _, q in imps), Fraction(0)) for nid, imps in self.impulses.items()}

    @classmethod
    def single_shot(cls, u: Mapping, time=0) -> "InputEpisode":
        """Each nonzero aggregate delivered as one impulse at ``time``."""
        t = as_rational(time)
        return cls({nid: ((t, as_rational(q)),) for nid, q in u.items() if as_rational(q) != 0})


@dataclass(frozen=True)
class SynapseTiming:
    delay: Fraction
    kernel: tuple[tuple[Fraction, Fraction], ...]


@dataclass(frozen=True)
class Realization:
    episode: InputEpisode
    timing: tuple[SynapseTiming, ...] = ()  # indexed like NetworkSpec.synapses
    refractory: Mapping[object, Fraction] = field(default_factory=dict)


def split_charge(total: Fraction, k: int, rng: SplitMix64) -> list[Fraction]:
    """Stick-breaking split into ``k`` same-sign parts; the last part is the
    exact remainder."""
    parts = []
    remaining = total
    for _ in range(k - 1):
        p = remaining * rng.unit()
        parts.append(p)
        remaining -= p
    parts.append(remaining)
    return parts


def realize_episode(u: Mapping, cfg: RealizationConfig, rng: Optional[SplitMix64] = None) -> InputEpisode:
    rng = rng if rng is not None else SplitMix64(cfg.seed)
    impulses = {}
    for nid, total in u.items():
        total = as_rational(total)
        if total == 0:
            continue
        k = rng.integer(*cfg.splits_per_input)
        charges = split_charge(total, k, rng)
        impulses[nid] = tuple((rng.uniform(0, cfg.time_horizon), q) for q in charges)
    return InputEpisode(impulses)


def sample_kernel(n_atoms: int, span: tuple[Fraction, Fraction], rng: SplitMix64):
    if n_atoms == 1:
        return ((Fraction(0), Fraction(1)),)
    offsets = [rng.uniform(*span) for _ in range(n_atoms)]
    fractions = split_charge(Fraction(1), n_atoms, rng)
    return tuple(zip(offsets, fractions))


def sample_delays_and_kernels(net: NetworkSpec, cfg: RealizationConfig,
                              rng: Optional[SplitMix64] = None) -> tuple[SynapseTiming, ...]:
    rng = rng if rng is not None else SplitMix64(cfg.seed)
    out = []
    for _ in net.synapses:
        delay = rng.uniform(*cfg.delay_range)
        kernel = sample_kernel(rng.integer(*cfg.kernel_atoms), cfg.kernel_span, rng)
        out.append(SynapseTiming(delay, kernel))
    return tuple(out)


def sample_refractory(net: NetworkSpec, cfg: RealizationConfig,
                      rng: Optional[SplitMix64] = None) -> dict:
    """Per-neuron refractory period; a neuron's own range wins over the config's."""
    rng = rng if rng is not None else SplitMix64(cfg.seed)
    out = {}
    for n in net.neurons:
        if n.refractory is not None:
            out[n.id] = rng.uniform(n.refractory.min, n.refractory.max)
        elif cfg.refractory_range is not None:
            out[n.id] = rng.uniform(*cfg.refractory_range)
    return out


def realize(net: NetworkSpec, u: Mapping, cfg: RealizationConfig) -> Realization:
    """Full realization drawn from one stream: episode, then synapses, then
    refractory periods."""
    rng = SplitMix64(cfg.seed)
    episode = realize_episode({nid: u.get(nid, 0) for nid in net.ids}, cfg, rng)
    timing = sample_delays_and_kernels(net, cfg, rng)
    refractory = sample_refractory(net, cfg, rng)
    return Realization(episode, timing, refractory)
