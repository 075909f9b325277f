#!/usr/bin/env python3
"""Train one tagger per region on the coupled synthetic corpus and print
the 4x4 inter-regional strict F1 matrix.

Bessarabia and Moldavia share a rendering, so their off-diagonal entries
should dominate every other off-diagonal cell.

Usage: python scripts/run_crossregion_matrix.py [--seed 0] [--epochs 8]
"""

import argparse

from histner.synthetic import run_coupled_matrix_trial


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=8)
    args = parser.parse_args()
    result = run_coupled_matrix_trial(args.seed, epochs=args.epochs)
    print(result.render_text())


if __name__ == "__main__":
    main()
