#!/usr/bin/env python
"""Threshold visibilities for N = 2..7 next to the published table.

Also reports the two-mode CHSH optimum inside the restricted family where
each party's first setting sits at the origin, which is where the printed
N = 2 oscillator entry comes from.
"""

from __future__ import annotations

import argparse
import logging

from cvbell.bell import chsh_form
from cvbell.core import SqueezedParams
from cvbell.optimizer import OptimizerConfig, optimize_bell, visibility_table

PRINTED_ME = (0.707, 0.5, 0.354, 0.25, 0.177, 0.125)
PRINTED_OSC = (0.913, 0.667, 0.544, 0.4, 0.318, 0.229)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    config = OptimizerConfig(restarts=args.restarts, seed=args.seed)
    rows = visibility_table(range(2, 8), config)
    print(f"{'N':>2} {'v_me':>7} {'printed':>7} {'v_osc':>7} {'printed':>7}  form     argmax_r")
    for row, me, osc in zip(rows, PRINTED_ME, PRINTED_OSC):
        print(f"{row.n:>2} {row.v_me:7.4f} {me:7.3f} {row.v_osc:7.4f} {osc:7.3f}  {row.form_used:<8} {row.argmax_r:7.3f}")

    restricted = optimize_bell(
        SqueezedParams(2, -5.0), chsh_form(), OptimizerConfig(restarts=16, seed=args.seed, anchor_first_setting=True)
    )
    free = optimize_bell(SqueezedParams(2, -5.0), chsh_form(), OptimizerConfig(restarts=16, seed=args.seed))
    print(f"\nN=2 CHSH, first settings at origin: {restricted.best_value:.4f} -> V = {2 / restricted.best_value:.4f}")
    print(f"N=2 CHSH, unrestricted:             {free.best_value:.4f} -> V = {2 / free.best_value:.4f}")


if __name__ == "__main__":
    main()
