"""Command-line front end: flags overlay a JSON config file, the harness
does the rest."""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    EXPERIMENTS,
    CheckpointError,
    ConfigError,
    load_config,
    run,
)
from .idx import IdxFormatError


def parse_schedule(text: str) -> dict:
    """Parse kind:T0[:T_final[:duration]] into a schedule map."""
    parts = text.split(":")
    if not 2 <= len(parts) <= 4:
        raise ValueError(
            f"schedule must be kind:T0[:T_final[:duration]], got {text!r}")
    sched = {"kind": parts[0]}
    try:
        sched["t0"] = float(parts[1])
        if len(parts) > 2:
            sched["t_final"] = float(parts[2])
        if len(parts) > 3:
            sched["duration"] = float(parts[3])
    except ValueError:
        raise ValueError(f"schedule numbers must be numeric in {text!r}") \
            from None
    return sched


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synsampler",
        description="Run a reward-driven sampling experiment or the "
                    "verification oracle suite.",
    )
    parser.add_argument("--experiment", "-e", choices=EXPERIMENTS,
                        help="which experiment to run")
    parser.add_argument("--config", "-c", metavar="PATH",
                        help="JSON config file; flags override its fields")
    parser.add_argument("--seed", type=int, help="base seed; trial k runs "
                        "with seed+k")
    parser.add_argument("--trials", type=int, help="number of trials")
    parser.add_argument("--mode", help="sampler arm where selectable "
                        "(hamiltonian or langevin)")
    parser.add_argument("--schedule", metavar="KIND:T0[:TF[:DUR]]",
                        help="temperature schedule, e.g. linear:0.5:0.01")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--log-stride", type=int, metavar="N",
                        help="record every N presentations or updates")
    parser.add_argument("--max-ticks", type=int, metavar="N",
                        help="per-trial simulation budget cap")
    parser.add_argument("--resume", metavar="CKPT",
                        help="checkpoint file to continue from")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config) if args.config else {}
        if args.experiment:
            config["experiment"] = args.experiment
        if args.seed is not None:
            config["seed"] = args.seed
        if args.trials is not None:
            config["n_trials"] = args.trials
        if args.mode is not None:
            sampler = dict(config.get("sampler") or {})
            sampler["mode"] = args.mode
            config["sampler"] = sampler
        if args.schedule is not None:
            config["schedule"] = parse_schedule(args.schedule)
        if args.out is not None:
            config["output_dir"] = args.out
        if args.log_stride is not None:
            config["log_stride"] = args.log_stride
        if args.max_ticks is not None:
            config["max_ticks"] = args.max_ticks
        if "experiment" not in config:
            parser.error("an experiment is required, via --experiment "
                         "or the config file")

        result = run(config, resume=args.resume)
    except (ConfigError, CheckpointError, IdxFormatError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    summary = result["summary"]
    if summary.get("experiment") == "oracle-suite":
        for name, entry in sorted(summary["oracles"].items()):
            flag = "pass" if entry["passed"] else "FAIL"
            print(f"{flag}  {name}")
        print(f"report: {result['summary_path']}")
        return 0 if summary["all_passed"] else 1

    for rec in result["records"]:
        if rec.error is not None:
            print(f"seed {rec.seed}: aborted ({rec.error})")
        elif rec.suspended:
            print(f"seed {rec.seed}: suspended at checkpoint "
                  f"{rec.checkpoint_path}")
        else:
            metrics = ", ".join(f"{k}={v}" for k, v in sorted(rec.final.items())
                                if not isinstance(v, list))
            print(f"seed {rec.seed}: {metrics}")
    print(f"summary: {result['summary_path']}")
    print(json.dumps(summary["aggregate"], sort_keys=True))
    n_failed = summary["n_failed"]
    return 1 if n_failed == len(result["records"]) else 0


if __name__ == "__main__":
    raise SystemExit(main())
