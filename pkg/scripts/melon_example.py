"""Melon of a few Brownian lines, and the passage value read off both sides.

    python scripts/melon_example.py [--lines 4] [--knots 64] [--seed 0]
"""
import argparse

import numpy as np

from melonlpp import EndpointPair, Grid, lpp_multi
from melonlpp.sampler import RngState, brownian_melon, sample_bm_ensemble


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--lines", type=int, default=4)
    p.add_argument("--knots", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    grid = Grid.uniform(0.0, 1.0 / args.knots, args.knots)
    B = sample_bm_ensemble(args.lines, grid, RngState(args.seed))
    W = brownian_melon(args.lines, grid, RngState(args.seed))
    print("melon at time 1:", np.round(W.at(1.0), 4))
    print("line sums agree:", np.isclose(W.at(1.0).sum(), B.values[:, -1].sum()))
    # the k-path state space grows like knots^k, so stay at k <= 3
    for k in range(1, min(args.lines, 3) + 1):
        pair = EndpointPair(np.full(k, 0.5), args.lines, np.ones(k), 1)
        print(f"k={k}: ensemble {lpp_multi(B, pair):.6f}  melon {lpp_multi(W.lines, pair):.6f}")


if __name__ == "__main__":
    main()
