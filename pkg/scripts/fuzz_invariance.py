"""Timing-invariance fuzz run at acceptance scale, with a per-net summary.

    python scripts/fuzz_invariance.py --nets 100 --realizations 20 --workers 4
"""

import argparse
import json
import time

from chargenet.fuzz import fuzz_invariance, summarize


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nets", type=int, default=100)
    ap.add_argument("--realizations", type=int, default=20)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--max-neurons", type=int, default=20)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    t0 = time.perf_counter()
    results = fuzz_invariance(args.nets, args.realizations, args.seed, args.max_neurons, args.workers)
    elapsed = time.perf_counter() - t0
    for r in results:
        status = "ok" if r.ok else f"FAIL ({len(r.failures)})"
        print(f"net {r.net_seed:#018x}  neurons={r.neurons:2d} synapses={r.synapses:3d} "
              f"runs={r.runs} spikes={r.spikes:6d}  {status}")
    summary = summarize(results)
    summary["seconds"] = round(elapsed, 2)
    print(json.dumps({k: v for k, v in summary.items() if k != "failures"}, indent=2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(summary, fh, indent=2)


if __name__ == "__main__":
    main()
