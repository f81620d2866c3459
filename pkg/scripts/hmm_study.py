"""Regime-switching autoregression: simulate, refit by GEM, compare.

    python3 scripts/hmm_study.py [--runs 10] [--length 500]

For each run the two-state model is simulated, refitted from scratch, and
the fitted states are matched to the true ones by noise scale. Reports the
relative noise-scale error, Viterbi state accuracy and the smallest change
of the log-likelihood trace (negative would mean a GEM step decreased it).
"""

import argparse
import time

import numpy as np

from neurocomplex.hmm_mlp import GemConfig, HmmMlpParams, gem_fit, simulate, viterbi_decode
from neurocomplex.mlp import MlpParams

TRUE = HmmMlpParams(
    [[0.95, 0.05], [0.1, 0.9]], [0.5, 0.5],
    [MlpParams([[0.8]], [0.0], [1.0], 2.0), MlpParams([[-0.8]], [0.0], [1.0], -2.0)],
    [0.2, 0.6],
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--length", type=int, default=500)
    ap.add_argument("--iterations", type=int, default=50)
    args = ap.parse_args()
    cfg = GemConfig(iterations=args.iterations, hidden_count=2)
    print("run  sigma_err(0)  sigma_err(1)  state_acc  min_dLL     seconds")
    for run in range(args.runs):
        t0 = time.perf_counter()
        y, states = simulate(TRUE, args.length + 1, [0.0], seed=run)
        fit, trace = gem_fit(y, 2, 1, cfg, seed=run)
        order = np.argsort(fit.noise_scales)
        fit = fit.permuted(order)
        err = np.abs(fit.noise_scales - TRUE.noise_scales) / TRUE.noise_scales
        path = viterbi_decode(fit, y[1:], y[:1])
        acc = float(np.mean(path == states[1:]))
        print(f"{run:3d}  {err[0]:12.3f}  {err[1]:12.3f}  {acc:9.3f}  {np.min(np.diff(trace)):9.2e}  "
              f"{time.perf_counter() - t0:7.2f}")


if __name__ == "__main__":
    main()
