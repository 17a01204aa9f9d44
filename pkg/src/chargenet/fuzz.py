"""Random acyclic networks and QANNs, and the timing-invariance harness.

Generated values sit on coarse dyadic grids so inflows regularly land
exactly on slice boundaries, where off-by-one spike rules would show up.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .core import ActivationTable, LevelSet, NetworkSpec, NeuronSpec, SynapseSpec
from .engine import DEFAULT_EVENT_BUDGET, EventBudgetExceeded, InvariantViolation, run, ledger_audit
from .qann import QANNNode, QANNSpec, qann_eval, qann_to_snn, snn_to_qann
from .realizer import RealizationConfig, SplitMix64, derive_seed, realize

log = logging.getLogger(__name__)

F = Fraction
CAPACITANCES = (F(1), F(1, 2), F(2), F(3, 4), F(3, 2))


def _layer_sizes(rng: SplitMix64, n_layers: int, n: int) -> list[int]:
    sizes = [1] * n_layers
    for _ in range(n - n_layers):
        sizes[rng.integer(0, n_layers - 1)] += 1
    return sizes


def _layered_edges(rng: SplitMix64, layers: list[list]) -> list[tuple]:
    edges = []
    for li in range(1, len(layers)):
        earlier = [x for layer in layers[:li] for x in layer]
        for post in layers[li]:
            pres = [p for p in earlier if rng.integer(0, 1)]
            anchor = rng.choice(layers[li - 1])
            if anchor not in pres:
                pres.append(anchor)
            edges.extend((p, post) for p in pres)
    return edges


def random_levels(rng: SplitMix64) -> LevelSet:
    top = rng.integer(1, 4)
    bottom = -rng.integer(1, 2) if rng.integer(0, 3) == 0 else 0
    levels = list(range(bottom, top + 1))
    if rng.integer(0, 3) == 0:
        # non-uniform gaps, still integral at 0
        levels = [q * rng.integer(1, 3) if q else 0 for q in levels]
        levels = sorted(set(levels))
        if len(levels) < 2:
            levels = [0, 1]
    return LevelSet(levels)


def random_sigma(rng: SplitMix64, levels: LevelSet) -> ActivationTable:
    if rng.integer(0, 1):
        return ActivationTable.identity(levels)
    v = rng.grid(-1, 1, F(1, 2))
    table = {}
    for q in levels:
        table[q] = v
        v += rng.grid(0, 2, F(1, 4))
    return ActivationTable(table)


def random_network(seed: int, max_neurons: int = 20) -> tuple[NetworkSpec, dict]:
    """Layered DAG (2-5 layers) with random inputs; returns ``(net, u)``."""
    rng = SplitMix64(seed)
    max_neurons = max(1, max_neurons)
    n_layers = min(rng.integer(2, 5), max_neurons)
    n = rng.integer(n_layers, max(n_layers, max_neurons))
    sizes = _layer_sizes(rng, n_layers, n)
    ids, layers = [], []
    for li, size in enumerate(sizes):
        layer = [f"n{len(ids) + k}" for k in range(size)]
        ids.extend(layer)
        layers.append(layer)
    neurons = []
    for nid in ids:
        levels = random_levels(rng)
        neurons.append(NeuronSpec(nid, rng.choice(CAPACITANCES), levels, random_sigma(rng, levels)))
    synapses = [SynapseSpec(pre, post, rng.grid(-3, 3, F(1, 8)))
                for pre, post in _layered_edges(rng, layers)]
    u = {}
    for nid in ids:
        if nid in layers[0]:
            u[nid] = rng.grid(-2, 6, F(1, 8))
        elif rng.integer(0, 3) == 0:
            u[nid] = rng.grid(-2, 3, F(1, 8))
    return NetworkSpec(neurons, synapses), u


def random_qann(seed: int, max_nodes: int = 12, max_slices: int = 6) -> QANNSpec:
    """Layered acyclic QANN with arbitrary (not necessarily monotone)
    piecewise-constant activations of at most ``max_slices`` slices."""
    rng = SplitMix64(seed)
    n_layers = min(rng.integer(2, 4), max_nodes)
    n = rng.integer(n_layers, max(n_layers, max_nodes))
    sizes = _layer_sizes(rng, n_layers, n)
    ids, layers = [], []
    for size in sizes:
        layer = [f"q{len(ids) + k}" for k in range(size)]
        ids.extend(layer)
        layers.append(layer)
    nodes = []
    for nid in ids:
        k = rng.integer(1, max_slices)
        bps = sorted({rng.grid(-4, 6, F(1, 4)) for _ in range(k - 1)})
        vals = [rng.grid(-2, 4, F(1, 2)) for _ in range(len(bps) + 1)]
        nodes.append(QANNNode.from_pieces(nid, bps, vals))
    weights = {e: rng.grid(-2, 2, F(1, 8)) for e in _layered_edges(rng, layers)}
    return QANNSpec(nodes, weights)


def random_input(seed: int, ids, lo=-4, hi=8) -> dict:
    rng = SplitMix64(seed)
    return {nid: rng.grid(lo, hi, F(1, 8)) for nid in ids}


def realization_config(seed: int, refractory: bool = True) -> RealizationConfig:
    rng = SplitMix64(seed ^ 0x5DEECE66D)
    return RealizationConfig(
        seed=seed,
        splits_per_input=(1, rng.integer(1, 4)),
        time_horizon=F(rng.integer(1, 10)),
        delay_range=(F(0), rng.grid(0, 3, F(1, 2))),
        kernel_atoms=(1, rng.integer(1, 3)),
        kernel_span=(F(0), rng.grid(0, 2, F(1, 2))),
        refractory_range=(F(0), rng.grid(0, 1, F(1, 4))) if refractory and rng.integer(0, 1) else None,
    )


@dataclass
class CaseResult:
    net_seed: int
    neurons: int
    synapses: int
    runs: int = 0
    events: int = 0
    spikes: int = 0
    failures: list = field(default_factory=list)  # (realization seed or None, reason)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_run(net, realization, expected: dict, *, tie_break="fifo", budget=DEFAULT_EVENT_BUDGET):
    """Run one realization with per-event checks; return ``(report, trace, problems)``."""
    problems = []
    try:
        report, trace = run(net, None, realization, budget=budget, tie_break=tie_break, debug=True)
    except InvariantViolation as exc:
        return None, None, [f"invariant: {exc}"]
    except EventBudgetExceeded as exc:
        return None, None, [f"budget: {exc}"]
    for v in ledger_audit(report, trace, net, realization.episode):
        problems.append(f"ledger {v.neuron}: {v.message}")
    if report.kappa != expected:
        diff = {k: (str(report.kappa[k]), str(expected[k])) for k in expected if report.kappa[k] != expected[k]}
        problems.append(f"kappa mismatch (engine, qann): {diff}")
    return report, trace, problems


def fuzz_case(net_seed: int, realizations: int, max_neurons: int = 20,
              budget: int = DEFAULT_EVENT_BUDGET) -> CaseResult:
    """All realizations of one random net must agree with each other and with
    the extracted QANN."""
    net, u = random_network(net_seed, max_neurons)
    res = CaseResult(net_seed, len(net.neurons), len(net.synapses))
    expected, _ = qann_eval(snn_to_qann(net), u)
    first = None
    for r in range(realizations):
        rseed = derive_seed(net_seed, r)
        real = realize(net, u, realization_config(rseed))
        modes = ("fifo", "lifo") if r == 0 else ("fifo",)
        for mode in modes:
            report, trace, problems = check_run(net, real, expected, tie_break=mode, budget=budget)
            res.runs += 1
            if problems:
                res.failures.extend((rseed, f"[{mode}] {p}") for p in problems)
                continue
            res.events += report.total_events
            res.spikes += sum(report.spike_counts.values())
            if first is None:
                first = report.kappa
            elif report.kappa != first:
                res.failures.append((rseed, f"[{mode}] kappa differs from first realization"))
    return res


def qann_case(seed: int, inputs: int = 5, realizations: int = 5,
              budget: int = DEFAULT_EVENT_BUDGET) -> CaseResult:
    """QANN -> SNN round trip: engine output must equal QANN evaluation."""
    q = random_qann(seed)
    net, _ = qann_to_snn(q)
    res = CaseResult(seed, len(net.neurons), len(net.synapses))
    for j in range(inputs):
        u = random_input(derive_seed(seed, 1000 + j), q.ids)
        expected, _ = qann_eval(q, u)
        for r in range(realizations):
            rseed = derive_seed(seed, j, r)
            real = realize(net, u, realization_config(rseed))
            report, _, problems = check_run(net, real, expected, budget=budget)
            res.runs += 1
            if problems:
                res.failures.extend((rseed, p) for p in problems)
            else:
                res.events += report.total_events
                res.spikes += sum(report.spike_counts.values())
    return res


def net_seeds(seed: int, count: int) -> list[int]:
    rng = SplitMix64(seed)
    return [rng.next() for _ in range(count)]


def _fuzz_case_args(args):
    return fuzz_case(*args)


def fuzz_invariance(nets: int, realizations: int, seed: int = 42, max_neurons: int = 20,
                    workers: int = 1, budget: int = DEFAULT_EVENT_BUDGET) -> list[CaseResult]:
    """Results are returned in seed order regardless of worker scheduling."""
    jobs = [(s, realizations, max_neurons, budget) for s in net_seeds(seed, nets)]
    if workers <= 1 or len(jobs) <= 1:
        return [fuzz_case(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_fuzz_case_args, jobs))


def summarize(results: list[CaseResult]) -> dict:
    return {
        "cases": len(results),
        "runs": sum(r.runs for r in results),
        "events": sum(r.events for r in results),
        "spikes": sum(r.spikes for r in results),
        "passed": sum(r.ok for r in results),
        "failed": sum(not r.ok for r in results),
        "failures": [{"net_seed": r.net_seed, "realization_seed": s, "reason": why}
                     for r in results for s, why in r.failures],
    }
