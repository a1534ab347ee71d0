"""Headless command-line entry points.

Defaults follow the reference experiment settings (10 initial samples, 20
initial comparisons, q=3, xi=0.01).  Flags may also be supplied through a JSON
config file with identical field names (--config); explicit flags win over the
file, the file wins over defaults.  PXBO_SEED serves as a fallback seed when
neither source sets one.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys
from pathlib import Path

import numpy as np

from .agents import VoterConfig, VoterKind
from .dataset import generate_domain_wall_grid, load_bundle, write_bundle
from .errors import PxboError
from .orchestrator import (
    Phase,
    SessionConfig,
    export_session,
    initialize,
    posterior_maps,
    random_sampling_best_score,
    run_to_completion,
)
from .surrogate import SurrogateMode

RUN_DEFAULTS = {
    "voter": "oracle",
    "flip_prob": 0.0,
    "init_samples": 10,
    "init_comparisons": 20,
    "q": 3,
    "m": 4,
    "iters": 20,
    "surrogate": "coord",
    "xi": 0.01,
    "seed": None,
}


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}") from None


def _parse_listen(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected ADDR:PORT, got {text!r}")
    return host, int(port)


def _resolve_run_options(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit CLI flags; PXBO_SEED as last-resort seed."""
    options = dict(RUN_DEFAULTS)
    if args.config is not None:
        file_cfg = json.loads(Path(args.config).read_text())
        for key, value in file_cfg.items():
            if key not in options:
                raise PxboError(f"unknown config field '{key}' in {args.config}")
            options[key] = value
    for key in options:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            options[key] = cli_value
    if options["seed"] is None:
        options["seed"] = int(os.environ.get("PXBO_SEED", "0"))
    return options


def _session_config(options: dict) -> SessionConfig:
    kind = VoterKind.ORACLE if options["voter"] == "oracle" else VoterKind.PROXY_AGENT
    return SessionConfig(
        init_samples=int(options["init_samples"]),
        init_comparisons=int(options["init_comparisons"]),
        q=int(options["q"]),
        validation_period=int(options["m"]),
        max_iterations=int(options["iters"]),
        xi=float(options["xi"]),
        voter=VoterConfig(
            kind=kind,
            oracle_flip_prob=float(options["flip_prob"]),
            validator=VoterKind.ORACLE,
        ),
        surrogate_mode=SurrogateMode(options["surrogate"]),
        rng_seed=int(options["seed"]),
    )


def _write_grid_csv(path: Path, values, height: int, width: int) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        for r in range(height):
            writer.writerow([repr(v) for v in values[r * width : (r + 1) * width]])


def cmd_gen_synthetic(args) -> int:
    h, w = args.grid
    grid = generate_domain_wall_grid(h, w, args.image_side, args.noise, args.seed)
    out = write_bundle(grid, args.out)
    print(f"wrote {h}x{w} domain-wall bundle with oracle scores to {out}")
    return 0


def cmd_run(args) -> int:
    options = _resolve_run_options(args)
    config = _session_config(options)
    grid = load_bundle(args.dataset)
    state = initialize(grid, config)
    run_to_completion(state)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "run.json").write_text(
        json.dumps(
            {
                "dataset": str(Path(args.dataset).resolve()),
                "config": config.to_json(),
                "seed": options["seed"],
            },
            indent=2,
            sort_keys=True,
        )
    )
    export_session(state, out / "session.json")
    (out / "metrics.json").write_bytes(state.metrics.to_bytes())
    (out / "metrics_iterations.csv").write_text(state.metrics.iterations_csv())
    (out / "metrics_validations.csv").write_text(state.metrics.validations_csv())
    maps = posterior_maps(state)
    if maps["mean"] is not None:
        _write_grid_csv(out / "posterior_mean.csv", maps["mean"], grid.height, grid.width)
        _write_grid_csv(
            out / "posterior_variance.csv", maps["variance"], grid.height, grid.width
        )
    if maps["baseline"] is not None:
        _write_grid_csv(out / "baseline.csv", maps["baseline"], grid.height, grid.width)

    final = state.metrics.iterations[-1]
    print(
        f"run finished: k={state.k - 1} iterations, incumbent {final['incumbent']}, "
        f"oracle score {final['incumbent_oracle_score']}"
    )
    return 0 if state.phase is Phase.DONE else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, port = args.listen
    app = create_app(datasets_root=args.datasets, console_origin=args.console_origin)
    uvicorn.run(app, host=host, port=port)
    return 0


def _load_run(run_dir: Path) -> dict:
    run = json.loads((run_dir / "run.json").read_text())
    metrics = json.loads((run_dir / "metrics.json").read_text())
    return {"dir": run_dir, "run": run, "metrics": metrics}


def cmd_compare(args) -> int:
    runs = [_load_run(Path(d)) for d in args.runs]
    if not runs:
        raise PxboError("no runs supplied")

    # median incumbent-score trace across runs, by iteration index
    n_rows = min(len(r["metrics"]["iterations"]) for r in runs)
    score_trace = []
    for i in range(n_rows):
        scores = [r["metrics"]["iterations"][i]["incumbent_oracle_score"] for r in runs]
        if any(s is None for s in scores):
            score_trace = []
            break
        score_trace.append(
            {"k": runs[0]["metrics"]["iterations"][i]["k"], "median_score": statistics.median(scores)}
        )

    # correction-rate trace (mean across runs per validation ordinal)
    n_val = max(len(r["metrics"]["validations"]) for r in runs)
    rate_trace = []
    for i in range(n_val):
        rates = [
            r["metrics"]["validations"][i]["rate"]
            for r in runs
            if i < len(r["metrics"]["validations"])
        ]
        rate_trace.append({"event": i + 1, "mean_rate": statistics.fmean(rates)})
    all_rates = [
        row["rate"] for r in runs for row in r["metrics"]["validations"]
    ]

    # random-sampling baseline at the same measurement budget, paired by seed
    finals, randoms = [], []
    for r in runs:
        cfg = r["run"]["config"]
        budget = cfg["init_samples"] + cfg["max_iterations"]
        grid = load_bundle(r["run"]["dataset"])
        randoms.append(random_sampling_best_score(grid, budget, r["run"]["seed"]))
        final_score = r["metrics"]["iterations"][-1]["incumbent_oracle_score"]
        finals.append(final_score)

    report = {
        "runs": len(runs),
        "median_score_trace": score_trace,
        "correction_rate_trace": rate_trace,
        "mean_correction_rate": statistics.fmean(all_rates) if all_rates else None,
        "median_final_score": (
            statistics.median(finals) if all(f is not None for f in finals) else None
        ),
        "median_random_baseline": statistics.median(randoms),
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "compare.json").write_text(json.dumps(report, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pxbo")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-synthetic", help="write a synthetic domain-wall bundle")
    gen.add_argument("--grid", type=_parse_grid, default=(20, 20), metavar="HxW")
    gen.add_argument("--image-side", type=int, default=16)
    gen.add_argument("--noise", type=float, default=0.05)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen_synthetic)

    run = sub.add_parser("run", help="headless preference-BO run")
    run.add_argument("--dataset", required=True, help="dataset bundle directory")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--config", help="JSON config file with flag-named fields")
    run.add_argument("--voter", choices=["oracle", "proxy"], default=None)
    run.add_argument("--flip-prob", dest="flip_prob", type=float, default=None)
    run.add_argument("--init-samples", dest="init_samples", type=int, default=None)
    run.add_argument(
        "--init-comparisons", dest="init_comparisons", type=int, default=None
    )
    run.add_argument("--q", type=int, default=None)
    run.add_argument("--m", type=int, default=None)
    run.add_argument("--iters", type=int, default=None)
    run.add_argument("--surrogate", choices=["coord", "feature"], default=None)
    run.add_argument("--xi", type=float, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.set_defaults(func=cmd_run)

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--datasets", required=True, help="directory of dataset bundles")
    serve.add_argument(
        "--listen", type=_parse_listen, default=("127.0.0.1", 8000), metavar="ADDR:PORT"
    )
    serve.add_argument("--console-origin", dest="console_origin", default=None)
    serve.set_defaults(func=cmd_serve)

    compare = sub.add_parser("compare", help="aggregate metrics across seeded runs")
    compare.add_argument("--runs", nargs="+", required=True)
    compare.add_argument("--out", default=None)
    compare.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PxboError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
