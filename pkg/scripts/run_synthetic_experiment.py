#!/usr/bin/env python3
"""Desk-scale synthetic experiment: oracle voting vs proxy-agent voting vs random.

Runs the 20x20 domain-wall grid over a batch of seeds with the default loop
settings (10 init samples, 20 init comparisons, q=3, 20 iterations), for both
a fully scripted oracle voter and the proxy agent with oracle-backed
validation, and compares final incumbent quality against random sampling at
the same measurement budget.

Usage: python scripts/run_synthetic_experiment.py [--seeds N] [--out DIR]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from pxbo.agents import VoterConfig, VoterKind
from pxbo.dataset import generate_domain_wall_grid
from pxbo.orchestrator import (
    SessionConfig,
    initialize,
    random_sampling_best_score,
    run_to_completion,
)


def run_mode(grid, seed, kind):
    cfg = SessionConfig(
        rng_seed=seed,
        voter=VoterConfig(kind=kind, validator=VoterKind.ORACLE),
    )
    state = run_to_completion(initialize(grid, cfg))
    return state.metrics.iterations[-1]["incumbent_oracle_score"]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    rows = []
    for seed in range(args.seeds):
        grid = generate_domain_wall_grid(20, 20, 16, 0.05, seed=seed)
        threshold = float(np.sort(grid.oracle_score)[-20])
        rows.append(
            {
                "seed": seed,
                "top5_threshold": threshold,
                "oracle_final": run_mode(grid, seed, VoterKind.ORACLE),
                "proxy_final": run_mode(grid, seed, VoterKind.PROXY_AGENT),
                "random_final": random_sampling_best_score(grid, 30, seed),
            }
        )

    summary = {
        "seeds": args.seeds,
        "oracle_top5_hits": sum(r["oracle_final"] >= r["top5_threshold"] for r in rows),
        "proxy_top5_hits": sum(r["proxy_final"] >= r["top5_threshold"] for r in rows),
        "oracle_median": float(np.median([r["oracle_final"] for r in rows])),
        "proxy_median": float(np.median([r["proxy_final"] for r in rows])),
        "random_median": float(np.median([r["random_final"] for r in rows])),
    }
    print(json.dumps(summary, indent=2))
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "synthetic_experiment.json").write_text(
            json.dumps({"summary": summary, "rows": rows}, indent=2)
        )


if __name__ == "__main__":
    main()
