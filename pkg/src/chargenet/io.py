"""JSON file formats.  Rationals are always strings (``"p/q"`` or ``"n"``)."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .core import (ActivationTable, DecodingPartition, LevelSet, NetworkSpec,
                   NeuronSpec, RefractorySpec, Slice, SynapseSpec)
from .engine import TerminalReport
from .qann import QANNNode, QANNSpec
from .realizer import InputEpisode, RealizationConfig

_RATIONAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class FormatError(ValueError):
    """Input file violates the schema; ``field`` names the offending path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def parse_rational(text: Any, field: str = "value") -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise FormatError(field, f"expected a rational string like \"3/2\", got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    m = _RATIONAL.match(text)
    if not m:
        raise FormatError(field, f"not an exact rational: {text!r} (decimals are rejected)")
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise FormatError(field, "zero denominator")
    return Fraction(num, den)


def fmt(q: Fraction) -> str:
    return str(q)


def _opt(q: Optional[Fraction]):
    return None if q is None else fmt(q)


def _get(d: dict, key: str, field: str):
    if not isinstance(d, dict) or key not in d:
        raise FormatError(field, f"missing {key!r}")
    return d[key]


# ---------------------------------------------------------------------------
# networks


def network_to_json(net: NetworkSpec) -> dict:
    neurons = []
    for n in net.neurons:
        d = {"id": n.id, "C": fmt(n.C), "levels": [fmt(q) for q in n.levels],
             "sigma": {fmt(k): fmt(v) for k, v in n.sigma.entries}}
        if n.refractory is not None:
            d["refractory"] = {"min": fmt(n.refractory.min), "max": fmt(n.refractory.max)}
        neurons.append(d)
    synapses = [{"pre": s.pre, "post": s.post, "weight": fmt(s.weight), "delay": fmt(s.delay),
                 "kernel": [[fmt(o), fmt(f)] for o, f in s.kernel]} for s in net.synapses]
    return {"neurons": neurons, "synapses": synapses}


def network_from_json(doc: dict) -> NetworkSpec:
    neurons = []
    for k, d in enumerate(_get(doc, "neurons", "neurons")):
        f = f"neurons[{k}]"
        levels = [parse_rational(q, f"{f}.levels[{j}]") for j, q in enumerate(_get(d, "levels", f))]
        sigma = {parse_rational(a, f"{f}.sigma key"): parse_rational(b, f"{f}.sigma[{a}]")
                 for a, b in _get(d, "sigma", f).items()}
        refr = None
        if d.get("refractory") is not None:
            r = d["refractory"]
            refr = RefractorySpec(parse_rational(_get(r, "min", f + ".refractory"), f + ".refractory.min"),
                                  parse_rational(_get(r, "max", f + ".refractory"), f + ".refractory.max"))
        try:
            neurons.append(NeuronSpec(_get(d, "id", f), parse_rational(_get(d, "C", f), f + ".C"),
                                      LevelSet(levels), ActivationTable(sigma), refr))
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f, str(exc)) from exc
    synapses = []
    for k, d in enumerate(doc.get("synapses", [])):
        f = f"synapses[{k}]"
        kernel = [(parse_rational(o, f"{f}.kernel[{j}][0]"), parse_rational(fr, f"{f}.kernel[{j}][1]"))
                  for j, (o, fr) in enumerate(d.get("kernel", [["0", "1"]]))]
        try:
            synapses.append(SynapseSpec(_get(d, "pre", f), _get(d, "post", f),
                                        parse_rational(_get(d, "weight", f), f + ".weight"),
                                        parse_rational(d.get("delay", "0"), f + ".delay"),
                                        tuple(kernel)))
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f, str(exc)) from exc
    try:
        return NetworkSpec(neurons, synapses)
    except ValueError as exc:
        raise FormatError("network", str(exc)) from exc


# ---------------------------------------------------------------------------
# episodes


def _key(nid):
    return str(nid)


def episode_to_json(ep: InputEpisode) -> dict:
    return {"impulses": {_key(nid): [[fmt(t), fmt(q)] for t, q in imps]
                         for nid, imps in ep.impulses.items()}}


def aggregate_to_json(u: dict) -> dict:
    return {"aggregate": {_key(nid): fmt(q) for nid, q in u.items()}}


def _resolve_ids(keys, net: Optional[NetworkSpec]) -> dict:
    """Map JSON object keys back to the network's (possibly int) ids."""
    if net is None:
        return {k: k for k in keys}
    by_str = {str(i): i for i in net.ids}
    out = {}
    for k in keys:
        if k not in by_str:
            raise FormatError(f"episode[{k!r}]", "unknown neuron id")
        out[k] = by_str[k]
    return out


def episode_from_json(doc: dict, net: Optional[NetworkSpec] = None):
    """Return ``("aggregate", u)`` or ``("impulses", InputEpisode)``."""
    if "aggregate" in doc:
        agg = doc["aggregate"]
        ids = _resolve_ids(agg.keys(), net)
        return "aggregate", {ids[k]: parse_rational(v, f"aggregate[{k}]") for k, v in agg.items()}
    if "impulses" in doc:
        imps = doc["impulses"]
        ids = _resolve_ids(imps.keys(), net)
        out = {}
        for k, lst in imps.items():
            pairs = []
            for j, pair in enumerate(lst):
                if not isinstance(pair, list) or len(pair) != 2:
                    raise FormatError(f"impulses[{k}][{j}]", "expected [time, charge]")
                t = parse_rational(pair[0], f"impulses[{k}][{j}][0]")
                if t < 0:
                    raise FormatError(f"impulses[{k}][{j}][0]", "negative time")
                pairs.append((t, parse_rational(pair[1], f"impulses[{k}][{j}][1]")))
            out[ids[k]] = tuple(pairs)
        return "impulses", InputEpisode(out)
    raise FormatError("episode", "expected an 'aggregate' or 'impulses' object")


# ---------------------------------------------------------------------------
# realization config


def config_to_json(cfg: RealizationConfig) -> dict:
    d = {"seed": cfg.seed,
         "splits_per_input": list(cfg.splits_per_input),
         "time_horizon": fmt(cfg.time_horizon),
         "delay_range": [fmt(x) for x in cfg.delay_range],
         "kernel_atoms": list(cfg.kernel_atoms),
         "kernel_span": [fmt(x) for x in cfg.kernel_span]}
    if cfg.refractory_range is not None:
        d["refractory_range"] = [fmt(x) for x in cfg.refractory_range]
    return d


def config_from_json(doc: dict) -> RealizationConfig:
    def rng(key):
        v = doc[key]
        return (parse_rational(v[0], key), parse_rational(v[1], key))
    kw = {}
    if "seed" in doc:
        kw["seed"] = int(doc["seed"])
    for key in ("splits_per_input", "kernel_atoms"):
        if key in doc:
            kw[key] = (int(doc[key][0]), int(doc[key][1]))
    if "time_horizon" in doc:
        kw["time_horizon"] = parse_rational(doc["time_horizon"], "time_horizon")
    for key in ("delay_range", "kernel_span", "refractory_range"):
        if doc.get(key) is not None:
            kw[key] = rng(key)
    return RealizationConfig(**kw)


# ---------------------------------------------------------------------------
# QANNs


def qann_to_json(q: QANNSpec) -> dict:
    nodes = []
    for n in q.nodes:
        nodes.append({
            "id": n.id,
            "slices": [{"level": fmt(s.label), "lower": _opt(s.lower), "upper": _opt(s.upper)}
                       for s in n.partition.slices],
            "sigma": {fmt(k): fmt(v) for k, v in n.sigma.entries},
        })
    weights = [{"pre": pre, "post": post, "weight": fmt(w)} for (pre, post), w in q.weights.items()]
    return {"nodes": nodes, "weights": weights}


def qann_from_json(doc: dict) -> QANNSpec:
    nodes = []
    for k, d in enumerate(_get(doc, "nodes", "nodes")):
        f = f"nodes[{k}]"
        slices = []
        for j, s in enumerate(_get(d, "slices", f)):
            g = f"{f}.slices[{j}]"
            lo = None if s.get("lower") is None else parse_rational(s["lower"], g + ".lower")
            up = None if s.get("upper") is None else parse_rational(s["upper"], g + ".upper")
            slices.append(Slice(parse_rational(_get(s, "level", g), g + ".level"), lo, up))
        sigma = {parse_rational(a, f + ".sigma key"): parse_rational(b, f"{f}.sigma[{a}]")
                 for a, b in _get(d, "sigma", f).items()}
        try:
            nodes.append(QANNNode(_get(d, "id", f), DecodingPartition(slices), ActivationTable(sigma)))
        except ValueError as exc:
            raise FormatError(f, str(exc)) from exc
    weights = {}
    for k, w in enumerate(doc.get("weights", [])):
        f = f"weights[{k}]"
        weights[(_get(w, "pre", f), _get(w, "post", f))] = parse_rational(_get(w, "weight", f), f + ".weight")
    try:
        return QANNSpec(nodes, weights)
    except ValueError as exc:
        raise FormatError("qann", str(exc)) from exc


# ---------------------------------------------------------------------------
# reports


def report_to_json(report: TerminalReport, ledger="ok") -> dict:
    def vec(d):
        return {_key(k): fmt(v) for k, v in d.items()}
    return {
        "kappa": vec(report.kappa),
        "z": vec(report.z),
        "levels": vec(report.levels),
        "V": vec(report.V),
        "spike_counts": {_key(k): v for k, v in report.spike_counts.items()},
        "termination_time": fmt(report.termination_time),
        "total_events": report.total_events,
        "ledger": ledger,
    }


def report_from_json(doc: dict) -> tuple[TerminalReport, Any]:
    def vec(key):
        return {k: parse_rational(v, f"{key}[{k}]") for k, v in doc[key].items()}
    rep = TerminalReport(
        kappa=vec("kappa"), z=vec("z"), levels=vec("levels"), V=vec("V"),
        spike_counts={k: int(v) for k, v in doc["spike_counts"].items()},
        termination_time=parse_rational(doc["termination_time"], "termination_time"),
        total_events=int(doc["total_events"]),
    )
    return rep, doc.get("ledger", "ok")


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(str(path), f"invalid JSON: {exc}") from exc


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")
