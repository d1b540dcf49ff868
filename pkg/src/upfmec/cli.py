"""Command line front end.

Subcommands: `run` simulates one scenario and writes its reports,
`compare` runs several schemes over a common seed set, `capex` sweeps
deployment sizes, and `oracle-gap` scores the sequential bestfit
heuristic against the exhaustive batch optimum on random instances.

Scenario arguments take either a YAML file path or the name of a bundled
scenario (see upfmec/scenarios/).  All output files are deterministic
for a fixed scenario and seed.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from importlib import resources
from typing import List, Optional, Sequence

import numpy as np

from . import metrics
from .engine import run_to_completion
from .model import QosClass, RequestStatus, Scenario, ScenarioError, Scheme, load_scenario
from .oracle import MAX_UPFS, minmax_batch_optimum, sequential_heuristic_batch

ALL_SCHEMES = [s.value for s in Scheme]


def _resolve_scenario(ref: str) -> Scenario:
    try:
        return load_scenario(ref)
    except FileNotFoundError:
        pass
    bundled = resources.files("upfmec").joinpath(f"scenarios/{ref}.yaml")
    if bundled.is_file():
        return load_scenario(str(bundled))
    raise FileNotFoundError(f"no scenario file or bundled scenario named {ref!r}")


def _parse_int_list(text: str) -> List[int]:
    """Accept '1,2,5' and '1-10' (inclusive range), or a mix."""
    out: List[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"empty list: {text!r}")
    return out


def _ensure_out(path: str) -> str:
    import os

    os.makedirs(path, exist_ok=True)
    return path


def cmd_run(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    if args.scheme:
        scenario = replace(scenario, scheme=Scheme(args.scheme))
    seed = args.seed if args.seed is not None else scenario.seed
    try:
        result = run_to_completion(scenario, seed=seed, drain_cap=args.drain_cap)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 2
    report = metrics.summarize(result)
    out = _ensure_out(args.out)
    name, scheme = scenario.name, scenario.scheme.value
    paths = []
    p = metrics.report_path(out, name, scheme, seed, "summary", "csv")
    metrics.write_summary_csv(report, p)
    paths.append(p)
    p = metrics.report_path(out, name, scheme, seed, "summary", "json")
    metrics.write_summary_json(report, p)
    paths.append(p)
    e2e = [r.d_e2e for r in result.requests if r.status is RequestStatus.COMPLETED]
    p = metrics.report_path(out, name, scheme, seed, "cdf", "csv")
    metrics.write_cdf_csv(metrics.build_cdf(e2e), p)
    paths.append(p)
    if args.trace:
        p = metrics.report_path(out, name, scheme, seed, "trace", "csv")
        metrics.write_trace_csv(result, p)
        paths.append(p)
        p = metrics.report_path(out, name, scheme, seed, "events", "csv")
        metrics.write_events_csv(result, p)
        paths.append(p)
    print(
        f"{name} scheme={scheme} seed={seed}: generated={result.generated} "
        f"completed={result.completed} dropped={result.dropped} "
        f"epochs={result.epochs_run} truncated={result.truncated}"
    )
    if report.e2e_overall:
        d = report.e2e_overall
        print(
            f"e2e ms: mean={d.mean:.3f} p50={d.percentiles[50.0]:.3f} "
            f"p99={d.percentiles[99.0]:.3f} max={d.max:.3f}"
        )
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_compare(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    schemes = ALL_SCHEMES if args.schemes == "all" else [s.strip() for s in args.schemes.split(",")]
    for s in schemes:
        if s not in ALL_SCHEMES:
            print(f"unknown scheme {s!r}; valid: {', '.join(ALL_SCHEMES)}", file=sys.stderr)
            return 2
    seeds = _parse_int_list(args.seeds)
    out = _ensure_out(args.out)
    rows = []
    agg = {}
    for scheme in schemes:
        variant = replace(scenario, scheme=Scheme(scheme))
        pooled_e2e: List[float] = []
        maxima, means = [], []
        for seed in seeds:
            try:
                result = run_to_completion(variant, seed=seed, drain_cap=args.drain_cap)
            except ScenarioError as exc:
                print(f"invalid scenario: {exc}", file=sys.stderr)
                return 2
            rep = metrics.summarize(result)
            d = rep.e2e_overall
            rows.append([
                scheme, seed, rep.generated, rep.completed, rep.dropped,
                repr(d.max) if d else "", repr(d.percentiles[99.0]) if d else "",
                repr(d.mean) if d else "", rep.peak_upf_queue, rep.peak_mec_queue,
            ])
            if d:
                maxima.append(d.max)
                means.append(d.mean)
            pooled_e2e.extend(
                r.d_e2e for r in result.requests if r.status is RequestStatus.COMPLETED
            )
        cdf_path = metrics.report_path(out, scenario.name, scheme, "pooled", "cdf", "csv")
        metrics.write_cdf_csv(metrics.build_cdf(sorted(pooled_e2e)), cdf_path)
        agg[scheme] = {
            "mean_of_max": float(np.mean(maxima)) if maxima else None,
            "mean_of_mean": float(np.mean(means)) if means else None,
        }
    base_max = agg.get(Scheme.BASELINE.value, {}).get("mean_of_max")
    table = metrics.report_path(out, scenario.name, "compare", "pooled", "summary", "csv")
    with open(table, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([
            "scheme", "seed", "generated", "completed", "dropped",
            "max_e2e_ms", "p99_e2e_ms", "mean_e2e_ms",
            "peak_upf_queue", "peak_mec_queue",
        ])
        w.writerows(rows)
        w.writerow([])
        w.writerow(["scheme", "mean_of_max_e2e_ms", "mean_e2e_ms", "reduction_vs_baseline_pct"])
        for scheme in schemes:
            m = agg[scheme]["mean_of_max"]
            red = ""
            if base_max and m is not None and scheme != Scheme.BASELINE.value:
                red = repr(100.0 * (base_max - m) / base_max)
            w.writerow([scheme, repr(m) if m is not None else "",
                        repr(agg[scheme]["mean_of_mean"]) if agg[scheme]["mean_of_mean"] is not None else "", red])
    for scheme in schemes:
        m = agg[scheme]["mean_of_max"]
        label = f"{m:.3f}" if m is not None else "n/a"
        print(f"{scheme}: mean-of-max e2e {label} ms over seeds {seeds}")
    print(f"wrote {table}")
    return 0


def cmd_capex(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    pairs = _parse_int_list(args.pairs)
    seeds = _parse_int_list(args.seeds)
    out = _ensure_out(args.out)
    try:
        points = metrics.capex_sweep(scenario, pairs, seeds)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 2
    csv_path = f"{out}/{scenario.name}.capex.csv"
    metrics.write_capex_csv(points, csv_path)
    print(f"wrote {csv_path}")
    import json

    for qos in sorted(scenario.thresholds_ms, key=lambda q: q.value):
        analysis = metrics.capex_analysis(points, qos=qos)
        a_path = f"{out}/{scenario.name}.capex_analysis.{qos.value}.json"
        with open(a_path, "w", encoding="utf-8") as fh:
            json.dump(analysis, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        gain = analysis["connectivity_gain"].get(max(analysis["pair_counts"]))
        gain_s = f"{gain:.2f}x" if gain else "n/a"
        print(
            f"{qos.value}: breakeven at {analysis['breakeven_pairs']} pairs, "
            f"gain at {max(analysis['pair_counts'])} pairs {gain_s}"
        )
        print(f"wrote {a_path}")
    return 0


def cmd_oracle_gap(args) -> int:
    if args.upfs > MAX_UPFS:
        print(f"--upfs must be <= {MAX_UPFS} for exhaustive search", file=sys.stderr)
        return 2
    rng = np.random.default_rng(args.seed)
    out = _ensure_out(args.out)
    path = f"{out}/oracle_gap.u{args.upfs}.n{args.n_max}.seed{args.seed}.csv"
    exact = 0
    worst_ratio = 1.0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["instance", "n", "optimum_epochs", "heuristic_epochs", "ratio"])
        for t in range(args.trials):
            caps = rng.integers(1, 9, size=args.upfs)
            in_service = np.array([rng.integers(0, c + 1) for c in caps])
            queues = rng.integers(0, 21, size=args.upfs)
            buckets = [
                (float(q), float(c - s), float(c))
                for q, s, c in zip(queues, in_service, caps)
            ]
            n = int(rng.integers(1, args.n_max + 1))
            _, opt = minmax_batch_optimum(n, buckets)
            _, heur = sequential_heuristic_batch(n, buckets)
            if heur == opt:
                exact += 1
                ratio = 1.0
            elif opt > 0.0:
                ratio = heur / opt
            else:
                ratio = float("inf")
            worst_ratio = max(worst_ratio, ratio)
            w.writerow([t, n, repr(opt), repr(heur), repr(ratio)])
    print(
        f"{args.trials} instances (U={args.upfs}, n<= {args.n_max}): "
        f"{exact} exact, worst heuristic/optimum ratio {worst_ratio:.4f}"
    )
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="upfmec",
        description="Flow-level simulator of a private-5G UPF/MEC data plane.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario and write reports")
    p.add_argument("--scenario", default="campus5", help="YAML path or bundled name")
    p.add_argument("--scheme", choices=ALL_SCHEMES, help="override the scenario's scheme")
    p.add_argument("--seed", type=int, help="override the scenario's seed")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--trace", action="store_true", help="also write per-epoch trace and event log")
    p.add_argument("--drain-cap", type=int, help="max extra epochs after the horizon")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several schemes over a common seed set")
    p.add_argument("--scenario", default="campus5")
    p.add_argument("--schemes", "--scheme", default="all",
                   help="comma list of schemes, or 'all'")
    p.add_argument("--seeds", default="1-10", help="comma list or range, e.g. 1-10")
    p.add_argument("--out", default="out")
    p.add_argument("--drain-cap", type=int)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("capex", help="sweep deployment sizes for baseline vs load-aware")
    p.add_argument("--scenario", default="campus5")
    p.add_argument("--pairs", default="1-10", help="pair counts, e.g. 1-10 or 2,4,8")
    p.add_argument("--seeds", default="1-5")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_capex)

    p = sub.add_parser("oracle-gap", help="sequential heuristic vs exhaustive optimum")
    p.add_argument("--upfs", type=int, default=3)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_oracle_gap)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
