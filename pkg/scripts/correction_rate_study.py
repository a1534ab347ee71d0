#!/usr/bin/env python3
"""Correction-rate study: how often the reviewer overturns the proxy agent.

Proxy-agent runs on a 50x50 synthetic grid with noisy oracle validation
(wrong call probability 0.1) at validation periods m in {5, 10}, 50 loop
iterations.  Emits the per-event correction-rate trace for each period and
the run averages.

Usage: python scripts/correction_rate_study.py [--out DIR] [--seed K]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from pxbo.agents import VoterConfig, VoterKind
from pxbo.dataset import generate_domain_wall_grid
from pxbo.orchestrator import SessionConfig, initialize, run_to_completion


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=31)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    traces = {}
    for period in (5, 10):
        grid = generate_domain_wall_grid(50, 50, 16, 0.05, seed=args.seed)
        cfg = SessionConfig(
            validation_period=period,
            max_iterations=50,
            rng_seed=args.seed,
            voter=VoterConfig(
                kind=VoterKind.PROXY_AGENT,
                validator=VoterKind.ORACLE,
                oracle_flip_prob=0.1,
            ),
        )
        state = run_to_completion(initialize(grid, cfg))
        rows = state.metrics.validations
        traces[f"m={period}"] = {
            "events": rows,
            "mean_rate": float(np.mean([r["rate"] for r in rows])),
        }
        print(f"m={period}: mean correction rate "
              f"{traces[f'm={period}']['mean_rate']:.1%} over {len(rows)} events")

    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "correction_rate_study.json").write_text(
            json.dumps(traces, indent=2)
        )


if __name__ == "__main__":
    main()
