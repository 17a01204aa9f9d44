"""Drive the reachability-gap topology through the event engine.

The decoded dynamics of this network have fixed points that synchronous
iteration never reaches.  Here we look at what the asynchronous engine does
under different timing realizations: some runs settle (and on which fixed
point), others keep oscillating until the event budget runs out.
"""

import argparse
from collections import Counter
from pathlib import Path

from chargenet import io
from chargenet.cyclic import enumerate_fixed_points, int_box, reachability_gap
from chargenet.engine import EventBudgetExceeded, ledger_audit, run
from chargenet.fuzz import realization_config
from chargenet.realizer import derive_seed, realize

DATA = Path(__file__).resolve().parent.parent / "data"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--budget", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    net = io.network_from_json(io.load_json(DATA / "reachability_gap.json"))
    _, u = io.episode_from_json(io.load_json(DATA / "reachability_gap_u.json"), net)
    fixed = enumerate_fixed_points(reachability_gap(), int_box(0, 5, 3))
    print("decoded fixed points in {0..5}^3:", sorted(tuple(map(str, p)) for p in fixed))

    outcomes = Counter()
    for r in range(args.runs):
        real = realize(net, u, realization_config(derive_seed(args.seed, r)))
        try:
            rep, trace = run(net, None, real, budget=args.budget, debug=True)
        except EventBudgetExceeded:
            outcomes["budget exceeded"] += 1
            continue
        assert not ledger_audit(rep, trace, net, real.episode)
        kappa = tuple(rep.kappa[i] for i in net.ids)
        tag = "fixed point" if kappa in fixed else "not a decoded fixed point"
        outcomes[f"terminated at {tuple(map(str, kappa))} ({tag})"] += 1
    for what, n in outcomes.most_common():
        print(f"{n:4d}  {what}")


if __name__ == "__main__":
    main()
