#!/usr/bin/env python3
"""Sweep surrogate parameters and print the acceptance-relevant aggregates."""
import dataclasses
import sys
import time

import numpy as np

sys.path.insert(0, "src")

import dyadsim as ds
from dyadsim.harness import ExperimentConfig, run_batch
from dyadsim.metrics import dominance, records_from_logs
from dyadsim.predictors import run_suite, windows_from_log


def probe(tag, surrogate_kwargs, seed=11, n_corpus=13, n_cond=8, n_hrp=13):
    sur = ds.SurrogateConfig(**surrogate_kwargs)
    cfg = ExperimentConfig(seed=seed, surrogate=sur)
    t0 = time.perf_counter()
    logs = run_batch("HFOP", n_corpus, cfg)
    windows = []
    for lg in logs:
        windows.extend(windows_from_log(lg))
    reports = {r.kind: r for r in run_suite(windows)}
    rms = {}
    for cond in ("ALONE", "ROBOT_ALONE", "HFOP"):
        lgs = logs if cond == "HFOP" else run_batch(cond, n_cond, cfg)
        rms[cond] = float(np.mean([c.rms_mm for lg in lgs for c in lg.choices]))
    hrp = run_batch("HRP", n_hrp, cfg)
    dom = dominance(records_from_logs(hrp))
    # first-crossing lead time vs motion completion
    leads = []
    from dyadsim.pathgen import actual_direction
    from dyadsim.predictors import extract_window, first_crossing
    n_called = n_lead_ok = 0
    for lg in logs:
        for c in lg.script.choices:
            truth = actual_direction(lg, c)
            if truth == 0:
                continue
            w = extract_window(lg, c)
            p = first_crossing(w)
            if not p.called:
                continue
            n_called += 1
            k0 = int(round(c.t0_s / lg.dt_s))
            k1 = int(round((c.t0_s + c.pre_s + c.branch_s) / lg.dt_s))
            cur = np.abs(lg.cursor[k0:k1 + 1])
            hit = np.nonzero(cur >= 0.9 * 25.0)[0]
            if len(hit) == 0:
                continue
            lead = hit[0] * lg.dt_s - p.decision_time_s
            leads.append(lead)
            if lead >= 0.1:
                n_lead_ok += 1
    el = time.perf_counter() - t0
    print(f"[{tag}] ({el:.0f}s, {len(windows)} ch) "
          f"1C={reports['1C'].accuracy:.3f} XT={reports['XT'].accuracy:.3f} "
          f"SRMS={reports['SRMS'].accuracy:.3f} | "
          f"rms A/R/H={rms['ALONE']:.2f}/{rms['ROBOT_ALONE']:.2f}/{rms['HFOP']:.2f} | "
          f"dom={dom:.3f} | lead_ok={n_lead_ok}/{n_called} "
          f"mean_lead={np.mean(leads) if leads else float('nan'):.2f}")


if __name__ == "__main__":
    variants = {
        "base": {},
        "A": dict(sway_std_mm=4.0, hesitation_prob=0.35, hesitation_amp_mm=7.0,
                  challenge_stubbornness_scale=0.45, stubbornness_s=0.40),
    }
    name = sys.argv[1] if len(sys.argv) > 1 else None
    for tag, kw in variants.items():
        if name and tag != name:
            continue
        for seed in (11, 23):
            probe(f"{tag}/s{seed}", kw, seed=seed)
