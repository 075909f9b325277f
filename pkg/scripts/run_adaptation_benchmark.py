#!/usr/bin/env python3
"""Run the two-domain adaptation benchmark over several seeds.

Trains a baseline and a loss-reversal tagger on the synthetic two-domain
corpus, then reports cross-domain strict F1 for both, the loss-reversal
model's own discriminator accuracy, and the accuracy of a domain head
refit on the baseline's frozen features.

Usage: python scripts/run_adaptation_benchmark.py [--seeds 0 1 2 3 4]
"""

import argparse

import numpy as np

from histner.synthetic import run_adaptation_trial


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--lambda", dest="lam", type=float, default=0.1)
    args = parser.parse_args()

    header = f"{'seed':>4}  {'baseline F1':>11}  {'loss_rev F1':>11}  {'gain':>7}  {'lr D acc':>8}  {'probe D acc':>11}"
    print(header)
    print("-" * len(header))
    trials = []
    for seed in args.seeds:
        trial = run_adaptation_trial(seed, epochs=args.epochs, lam=args.lam)
        trials.append(trial)
        print(
            f"{seed:>4}  {100 * trial.baseline_f1:>11.2f}  {100 * trial.lossrev_f1:>11.2f}  "
            f"{100 * trial.gain:>+7.2f}  {trial.lossrev_domain_acc:>8.3f}  "
            f"{trial.baseline_domain_probe_acc:>11.3f}"
        )
    print("-" * len(header))
    print(
        f"mean  {100 * np.mean([t.baseline_f1 for t in trials]):>11.2f}  "
        f"{100 * np.mean([t.lossrev_f1 for t in trials]):>11.2f}  "
        f"{100 * np.mean([t.gain for t in trials]):>+7.2f}  "
        f"{np.mean([t.lossrev_domain_acc for t in trials]):>8.3f}  "
        f"{np.mean([t.baseline_domain_probe_acc for t in trials]):>11.3f}"
    )


if __name__ == "__main__":
    main()
