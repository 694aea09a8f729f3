"""Command-line entry point.

Subcommands: generate-path, run-trial, run-experiment, analyze, predict,
serve. Configuration comes from a JSON file with the sections trial / sim /
partner / surrogate; unknown keys are rejected.
"""
from __future__ import annotations

import argparse
import csv
import glob
import json
import os
import sys

from .errors import ConfigError
from .harness import (CONDITIONS, HRP, ExperimentConfig, generate_script,
                      load_config, load_log, run_experiment, run_trial,
                      save_log, write_report)
from .metrics import analysis_report, records_from_logs
from .pathgen import script_to_json
from .predictors import report_rows, run_suite, windows_from_log


def _load_cfg(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = ExperimentConfig(**{**cfg.__dict__, "seed": args.seed})
    if getattr(args, "out", None):
        cfg = ExperimentConfig(**{**cfg.__dict__, "out_dir": args.out})
    if getattr(args, "decimate", None):
        cfg = ExperimentConfig(**{**cfg.__dict__, "decimate": args.decimate})
    return cfg


def _collect_logs(paths: list[str]):
    files = []
    for p in paths:
        if os.path.isdir(p):
            files.extend(sorted(glob.glob(os.path.join(p, "*.jsonl"))))
        else:
            files.append(p)
    if not files:
        raise ConfigError("no log files found")
    return [load_log(f) for f in files]


def cmd_generate_path(args) -> int:
    cfg = _load_cfg(args)
    script = generate_script(args.seed if args.seed is not None else cfg.seed,
                             cfg.trial)
    text = script_to_json(script)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"script_{script.seed}.json")
        with open(path, "w") as fh:
            fh.write(text + "\n")
        print(path)
    else:
        print(text)
    return 0


def cmd_run_trial(args) -> int:
    cfg = _load_cfg(args)
    script = generate_script(cfg.seed, cfg.trial)
    log = run_trial(args.condition, script, cfg.sim, cfg.partner, cfg.surrogate,
                    seed=cfg.seed)
    out_dir = args.out or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"trial_{args.condition}_{cfg.seed}.jsonl")
    save_log(log, path, decimate=args.decimate or cfg.decimate)
    print(path)
    return 0


def cmd_run_experiment(args) -> int:
    cfg = _load_cfg(args)
    report = run_experiment(cfg)
    print(json.dumps({"out_dir": cfg.out_dir,
                      "n_choices": report["n_choices"],
                      "choice_counts": report["choice_counts"]}, sort_keys=True))
    return 0


def cmd_analyze(args) -> int:
    logs = _collect_logs(args.logs)
    if any(log.decimate != 1 for log in logs):
        raise ConfigError("analyze requires full-rate logs (decimate=1)")
    report = analysis_report(records_from_logs(logs))
    out_dir = args.out or "out"
    os.makedirs(out_dir, exist_ok=True)
    for p in write_report(report, out_dir):
        print(p)
    return 0


def cmd_predict(args) -> int:
    logs = _collect_logs(args.logs)
    if any(log.decimate != 1 for log in logs):
        raise ConfigError("predict requires full-rate logs (decimate=1)")
    windows = []
    for log in logs:
        windows.extend(windows_from_log(log))
    if not windows:
        raise ConfigError("no decided choices in the given logs")
    rows = report_rows(run_suite(windows))
    out_dir = args.out or "out"
    os.makedirs(out_dir, exist_ok=True)
    jpath = os.path.join(out_dir, "predictors.json")
    with open(jpath, "w") as fh:
        json.dump({"n_choices": len(windows), "predictors": rows}, fh,
                  sort_keys=True, indent=2)
        fh.write("\n")
    cpath = os.path.join(out_dir, "predictors.csv")
    with open(cpath, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["name", "accuracy",
                                           "mean_decision_time_s", "call_rate", "n"])
        w.writeheader()
        w.writerows(rows)
    for row in rows:
        print(f"{row['name']:>4s}  accuracy={row['accuracy']:.4f}  "
              f"mean_t={row['mean_decision_time_s']:.3f}s  "
              f"call_rate={row['call_rate']:.2f}")
    print(jpath)
    print(cpath)
    return 0


def cmd_serve(args) -> int:  # pragma: no cover - long-running network entry
    from .server import SessionConfig, serve
    cfg = _load_cfg(args)
    scfg = SessionConfig(condition=args.condition or HRP,
                         human_lanes=tuple(args.human_lanes),
                         out_dir=args.out or cfg.out_dir,
                         decimate=args.decimate or cfg.decimate)
    serve(cfg, port=args.port, scfg=scfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyadsim",
                                description="1-DOF haptic co-manipulation test-bed")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, condition=False):
        sp.add_argument("--config", help="experiment config JSON")
        sp.add_argument("--seed", type=int, help="master seed override")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--decimate", type=int, help="store every n-th frame")
        if condition:
            sp.add_argument("--condition", choices=CONDITIONS, default=HRP)

    sp = sub.add_parser("generate-path", help="emit a scripted path as JSON")
    common(sp)
    sp.set_defaults(fn=cmd_generate_path)

    sp = sub.add_parser("run-trial", help="simulate one trial and write its log")
    common(sp, condition=True)
    sp.set_defaults(fn=cmd_run_trial)

    sp = sub.add_parser("run-experiment",
                        help="run the 6-trial schedule and write report files")
    common(sp)
    sp.set_defaults(fn=cmd_run_experiment)

    sp = sub.add_parser("analyze", help="analysis report from saved logs")
    sp.add_argument("logs", nargs="+", help="log files or directories")
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("predict", help="run the predictor suite over saved logs")
    sp.add_argument("logs", nargs="+", help="log files or directories")
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(fn=cmd_predict)

    sp = sub.add_parser("serve", help="start the realtime session server")
    common(sp, condition=True)
    sp.add_argument("--port", type=int, default=8700)
    sp.add_argument("--human-lanes", type=int, nargs="+", default=[1],
                    help="handle lanes played by connected clients")
    sp.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
