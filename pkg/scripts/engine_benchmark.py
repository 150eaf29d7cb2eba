#!/usr/bin/env python3
"""Benchmark the three engines across dataset sizes.

Times exact 2D enumeration, sample-partitioning get-next, and Monte-Carlo
get-next on seeded synthetic data, printing wall-clock seconds per stage.

Usage:
    python3 scripts/engine_benchmark.py [--sizes 100,1000,10000] [--d 3]
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

from stablerank.exact2d import get_next_2d, ray_sweep
from stablerank.exactmd import get_next_md, init_md_state
from stablerank.model import generate_synthetic
from stablerank.randomized import get_next_fixed_budget, init_mc_state


@dataclass(frozen=True)
class Config:
    sizes: tuple[int, ...] = (100, 1_000, 10_000)
    d: int = 3
    mode: str = "independent"
    samples: int = 50_000
    budget: int = 5_000
    k: int = 10
    seed: int = 1


def parse_args(argv=None) -> Config:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,1000,10000",
                        help="comma-separated dataset sizes")
    parser.add_argument("--d", type=int, default=Config.d,
                        help="attribute count for the d-dimensional engines")
    parser.add_argument("--mode", default=Config.mode,
                        choices=("independent", "correlated", "anti_correlated"))
    parser.add_argument("--samples", type=int, default=Config.samples,
                        help="sample-store size for the partitioning engine")
    parser.add_argument("--budget", type=int, default=Config.budget,
                        help="Monte-Carlo samples per get-next call")
    parser.add_argument("--k", type=int, default=Config.k, help="top-k size")
    parser.add_argument("--seed", type=int, default=Config.seed)
    args = parser.parse_args(argv)
    sizes = tuple(int(s) for s in args.sizes.split(","))
    return Config(sizes, args.d, args.mode, args.samples, args.budget, args.k, args.seed)


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def main(argv=None) -> int:
    cfg = parse_args(argv)
    header = f"{'n':>8}  {'exact2d sweep':>14}  {'exact2d next':>13}  " \
             f"{'md init':>9}  {'md next':>9}  {'mc full next':>13}  {'mc topk next':>13}"
    print(header)
    print("-" * len(header))
    for n in cfg.sizes:
        flat = generate_synthetic(n, 2, cfg.mode, cfg.seed)
        heap, t_sweep = timed(lambda: ray_sweep(flat))
        _, t_next2d = timed(lambda: get_next_2d(heap, flat))

        deep = generate_synthetic(n, cfg.d, cfg.mode, cfg.seed)
        md_state, t_md_init = timed(
            lambda: init_md_state(deep, n_samples=cfg.samples, seed=cfg.seed)
        )
        _, t_md_next = timed(lambda: get_next_md(md_state))

        mc_full = init_mc_state(seed=cfg.seed)
        _, t_mc_full = timed(
            lambda: get_next_fixed_budget(mc_full, deep, budget=cfg.budget)
        )
        mc_topk = init_mc_state("topk_set", cfg.k, seed=cfg.seed)
        _, t_mc_topk = timed(
            lambda: get_next_fixed_budget(mc_topk, deep, budget=cfg.budget)
        )

        print(f"{n:>8}  {t_sweep:>13.3f}s  {t_next2d:>12.3f}s  "
              f"{t_md_init:>8.3f}s  {t_md_next:>8.3f}s  "
              f"{t_mc_full:>12.3f}s  {t_mc_topk:>12.3f}s")
    print(f"\nd={cfg.d} mode={cfg.mode} samples={cfg.samples} "
          f"budget={cfg.budget} k={cfg.k} seed={cfg.seed}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
