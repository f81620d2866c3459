"""Hidden-unit selection study: how often each penalty recovers a known k=2 network.

    python3 scripts/selection_study.py [--trials 20] [--n 1000] [--max-k 5]

Data: two U[-2, 2] inputs, a fixed two-unit tanh network plus N(0, 0.1^2)
noise. Prints the chosen k per trial and the recovery rate per penalty.
"""

import argparse
import time
from collections import Counter

import numpy as np

from neurocomplex.mlp import MlpParams, TrainConfig, mlp_forward
from neurocomplex.selection import PenaltySpec, parameter_scaled_penalty, select_hidden_units

TRUE = MlpParams([[2.0, 0.5], [-1.0, 2.0]], [0.5, -0.5], [1.5, -1.0], 0.2)

PENALTIES = {
    "logOverN": PenaltySpec("logOverN"),
    "sqrtOverN": PenaltySpec("sqrtOverN"),
    "paramLogOverN": PenaltySpec("custom", 1.0, parameter_scaled_penalty),
}


def make_data(seed, n, noise=0.1):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, size=(n, 2))
    return X, mlp_forward(TRUE, X) + noise * rng.standard_normal(n)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--max-k", type=int, default=5)
    args = ap.parse_args()
    for name, pen in PENALTIES.items():
        t0 = time.perf_counter()
        chosen = []
        for trial in range(args.trials):
            trace, _ = select_hidden_units(make_data(trial, args.n), args.max_k, pen, TrainConfig(), seed=trial)
            chosen.append(trace.chosen_k)
        hits = sum(k == 2 for k in chosen)
        dist = dict(sorted(Counter(chosen).items()))
        print(f"{name:>14}: k=2 in {hits}/{args.trials}  chosen-k counts {dist}  "
              f"({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
