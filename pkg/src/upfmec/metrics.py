"""Post-processing of finished runs: summaries, CDFs, CapEx sweeps.

Percentiles use the nearest-rank convention on the sorted sample (the
p-th percentile is the value at index ceil(p/100 * n) - 1), so every
reported figure is an observed delay.  Standard deviations are
population standard deviations.  Emitted files follow the naming scheme
<scenario>.<scheme>.<seed>.<report>.<ext> with stable column layouts.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .engine import RunResult, run_to_completion
from .model import QosClass, RequestStatus, Scenario, Scheme

PERCENTILES = (50.0, 80.0, 95.0, 99.0, 99.9)


@dataclass(frozen=True)
class Stats:
    """Mean / population std / sample count of one delay slice."""

    mean: float
    std: float
    count: int


@dataclass(frozen=True)
class DistSummary:
    """Distribution summary of one delay population."""

    count: int
    mean: float
    std: float
    percentiles: Dict[float, float]
    max: float


@dataclass
class SummaryReport:
    """Per-run delay statistics, broken down by entity and QoS."""

    scenario_name: str
    scheme: str
    seed: int
    generated: int
    completed: int
    dropped: int
    residual: int
    epochs_run: int
    truncated: bool
    per_upf_qos: Dict[Tuple[int, QosClass], Stats] = field(default_factory=dict)
    per_mec: Dict[int, Stats] = field(default_factory=dict)
    e2e_overall: Optional[DistSummary] = None
    e2e_per_qos: Dict[QosClass, DistSummary] = field(default_factory=dict)
    peak_upf_queue: int = 0
    peak_mec_queue: int = 0


def percentile_nearest_rank(sorted_samples: Sequence[float], p: float) -> float:
    """Nearest-rank percentile of an ascending sample."""
    if not sorted_samples:
        raise ValueError("empty sample")
    if not 0.0 < p <= 100.0:
        raise ValueError(f"percentile must be in (0, 100], got {p}")
    idx = max(0, math.ceil(p / 100.0 * len(sorted_samples)) - 1)
    return sorted_samples[idx]


def _stats(values: Sequence[float]) -> Stats:
    arr = np.asarray(values, dtype=float)
    return Stats(mean=float(arr.mean()), std=float(arr.std()), count=int(arr.size))


def _dist(values: Sequence[float]) -> DistSummary:
    arr = np.sort(np.asarray(values, dtype=float))
    samples = arr.tolist()
    return DistSummary(
        count=len(samples),
        mean=float(arr.mean()),
        std=float(arr.std()),
        percentiles={p: percentile_nearest_rank(samples, p) for p in PERCENTILES},
        max=samples[-1],
    )


def summarize(result: RunResult) -> SummaryReport:
    """Reduce a run to its delay statistics (measured delays, completed requests)."""
    report = SummaryReport(
        scenario_name=result.scenario.name,
        scheme=result.scheme,
        seed=result.seed,
        generated=result.generated,
        completed=result.completed,
        dropped=result.dropped,
        residual=result.residual,
        epochs_run=result.epochs_run,
        truncated=result.truncated,
    )
    done = [r for r in result.requests if r.status is RequestStatus.COMPLETED]
    by_upf_qos: Dict[Tuple[int, QosClass], List[float]] = {}
    by_mec: Dict[int, List[float]] = {}
    by_qos: Dict[QosClass, List[float]] = {}
    e2e: List[float] = []
    for r in done:
        by_upf_qos.setdefault((r.assigned_upf, r.qos), []).append(r.d_upf)
        if r.assigned_mec is not None:
            by_mec.setdefault(r.assigned_mec, []).append(r.d_mec)
        by_qos.setdefault(r.qos, []).append(r.d_e2e)
        e2e.append(r.d_e2e)
    report.per_upf_qos = {k: _stats(v) for k, v in sorted(by_upf_qos.items(), key=lambda kv: (kv[0][0], kv[0][1].value))}
    report.per_mec = {k: _stats(v) for k, v in sorted(by_mec.items())}
    report.e2e_per_qos = {q: _dist(by_qos[q]) for q in QosClass if q in by_qos}
    if e2e:
        report.e2e_overall = _dist(e2e)
    series_peaks = [max(s) for s in result.upf_queue_series.values() if s]
    report.peak_upf_queue = max(series_peaks, default=0)
    mec_peaks = [max(s) for s in result.mec_queue_series.values() if s]
    report.peak_mec_queue = max(mec_peaks, default=0)
    return report


@dataclass(frozen=True)
class CdfTable:
    """Empirical CDF: unique sorted values and cumulative probabilities."""

    values: Tuple[float, ...]
    cum_probs: Tuple[float, ...]


def build_cdf(samples: Sequence[float]) -> CdfTable:
    """Empirical CDF of a sample; empty input gives an empty table."""
    if len(samples) == 0:
        return CdfTable((), ())
    arr = np.sort(np.asarray(samples, dtype=float))
    values, counts = np.unique(arr, return_counts=True)
    cum = np.cumsum(counts) / arr.size
    return CdfTable(tuple(float(v) for v in values), tuple(float(c) for c in cum))


# ---------------------------------------------------------------- CapEx sweep


@dataclass(frozen=True)
class CapexPoint:
    """Threshold-compliance of one scheme at one deployment size."""

    pairs: int
    scheme: str
    completed: int
    dropped: int
    pct_under_threshold: Dict[QosClass, float]


def build_pair_scenario(base: Scenario, pairs: int) -> Scenario:
    """Scale the deployment to `pairs` UPF-MEC pairs, cycling the base patterns.

    Capacities, bandwidths and the traffic skew repeat the base vectors;
    the skew is renormalized to sum to one.  Total offered traffic stays
    unchanged, so smaller deployments are proportionally more loaded.
    """
    if pairs < 1:
        raise ValueError(f"pairs must be >= 1, got {pairs}")
    doc_upfs = []
    doc_mecs = []
    u0, m0 = base.num_upfs, base.num_mecs
    for i in range(pairs):
        src = base.upfs[i % u0]
        doc_upfs.append(
            type(src)(
                id=i + 1,
                capacity=dict(src.capacity) if src.capacity is not None else None,
                etpb=src.etpb,
                bytes_per_ue=src.bytes_per_ue,
                alpha=dict(src.alpha) if src.alpha is not None else None,
                queue_cap=dict(src.queue_cap) if src.queue_cap is not None else None,
            )
        )
    for j in range(pairs):
        src = base.mecs[j % m0]
        doc_mecs.append(
            type(src)(
                id=j + 1,
                capacity=src.capacity,
                etpb=src.etpb,
                bytes_per_ue=src.bytes_per_ue,
                queue_cap=src.queue_cap,
            )
        )
    raw_skew = [base.traffic.skew[i % u0] for i in range(pairs)]
    total = sum(raw_skew)
    skew = [s / total for s in raw_skew]
    bw = [
        [base.link_bandwidth_mbps[i % u0][j % m0] for j in range(pairs)]
        for i in range(pairs)
    ]
    traffic = type(base.traffic)(
        mean_arrivals_per_epoch=base.traffic.mean_arrivals_per_epoch,
        skew=skew,
        qos_mix=dict(base.traffic.qos_mix),
        process=base.traffic.process,
    )
    return Scenario(
        name=f"{base.name}-p{pairs}",
        num_upfs=pairs,
        num_mecs=pairs,
        delta_ms=base.delta_ms,
        horizon_epochs=base.horizon_epochs,
        seed=base.seed,
        scheme=base.scheme,
        traffic=traffic,
        upfs=doc_upfs,
        mecs=doc_mecs,
        link_bandwidth_mbps=bw,
        thresholds_ms=dict(base.thresholds_ms),
        headroom_factor=base.headroom_factor,
        drain_cap_epochs=base.drain_cap_epochs,
    )


def _sweep_task(args: Tuple[Scenario, int]) -> Tuple[Dict[QosClass, Tuple[int, int]], int, int]:
    """Run one (scenario, seed) cell; count threshold hits per QoS."""
    scenario, seed = args
    result = run_to_completion(scenario, seed=seed)
    hits: Dict[QosClass, Tuple[int, int]] = {}
    for q, thr in scenario.thresholds_ms.items():
        done = [
            r.d_e2e
            for r in result.requests
            if r.status is RequestStatus.COMPLETED and r.qos is q
        ]
        hits[q] = (sum(1 for d in done if d < thr), len(done))
    return hits, result.completed, result.dropped


def _max_workers() -> int:
    raw = os.environ.get("UPFMEC_MAX_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def capex_sweep(
    base: Scenario,
    pair_counts: Sequence[int],
    seeds: Sequence[int],
    schemes: Sequence[Scheme] = (Scheme.BASELINE, Scheme.BESTFIT_UPF_MEC),
) -> List[CapexPoint]:
    """Run every (pairs, scheme) cell over the seeds and pool the results.

    Results are independent of worker count; UPFMEC_MAX_WORKERS > 1
    parallelizes the runs across processes.
    """
    tasks: List[Tuple[Scenario, int]] = []
    cells: List[Tuple[int, Scheme]] = []
    for pairs in pair_counts:
        scaled = build_pair_scenario(base, pairs)
        for scheme in schemes:
            cells.append((pairs, scheme))
            variant = replace(scaled, scheme=scheme)
            for seed in seeds:
                tasks.append((variant, seed))
    workers = _max_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_task, tasks))
    else:
        outcomes = [_sweep_task(t) for t in tasks]

    points: List[CapexPoint] = []
    per_cell = len(seeds)
    for idx, (pairs, scheme) in enumerate(cells):
        chunk = outcomes[idx * per_cell : (idx + 1) * per_cell]
        pct: Dict[QosClass, float] = {}
        for q in base.thresholds_ms:
            under = sum(h[q][0] for h, _, _ in chunk)
            total = sum(h[q][1] for h, _, _ in chunk)
            pct[q] = 100.0 * under / total if total else 0.0
        points.append(
            CapexPoint(
                pairs=pairs,
                scheme=scheme.value,
                completed=sum(c for _, c, _ in chunk),
                dropped=sum(d for _, _, d in chunk),
                pct_under_threshold=pct,
            )
        )
    return points


def capex_analysis(
    points: Sequence[CapexPoint],
    qos: QosClass = QosClass.URLLC,
    baseline: str = Scheme.BASELINE.value,
    mecia: str = Scheme.BESTFIT_UPF_MEC.value,
) -> dict:
    """Connectivity gain per deployment size and the CapEx break-even size.

    The break-even is the smallest pair count at which the load-aware
    scheme matches what the baseline only reaches at the largest size.
    """
    base_pts = {p.pairs: p for p in points if p.scheme == baseline}
    mec_pts = {p.pairs: p for p in points if p.scheme == mecia}
    sizes = sorted(set(base_pts) & set(mec_pts))
    if not sizes:
        raise ValueError("no common pair counts between the two schemes")
    gains = {}
    for k in sizes:
        b = base_pts[k].pct_under_threshold.get(qos, 0.0)
        m = mec_pts[k].pct_under_threshold.get(qos, 0.0)
        gains[k] = (m / b) if b > 0.0 else None
    k_max = sizes[-1]
    target = base_pts[k_max].pct_under_threshold.get(qos, 0.0)
    breakeven = None
    for k in sizes:
        if mec_pts[k].pct_under_threshold.get(qos, 0.0) >= target:
            breakeven = k
            break
    return {
        "qos": qos.value,
        "pair_counts": sizes,
        "baseline_pct": {k: base_pts[k].pct_under_threshold.get(qos, 0.0) for k in sizes},
        "mecia_pct": {k: mec_pts[k].pct_under_threshold.get(qos, 0.0) for k in sizes},
        "connectivity_gain": gains,
        "baseline_pct_at_max": target,
        "breakeven_pairs": breakeven,
    }


# ---------------------------------------------------------------- file output


def report_path(out_dir: str, scenario: str, scheme: str, seed: int, report: str, ext: str) -> str:
    return os.path.join(out_dir, f"{scenario}.{scheme}.{seed}.{report}.{ext}")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_summary_csv(report: SummaryReport, path: str) -> None:
    """One wide table: count/mean/std rows per slice plus distribution rows."""
    cols = [
        "scope", "entity", "qos", "count", "mean_ms", "std_ms",
        "p50_ms", "p80_ms", "p95_ms", "p99_ms", "p99.9_ms", "max_ms",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for (upf_id, qos), st in report.per_upf_qos.items():
            w.writerow(["upf", upf_id, qos.value, st.count, _fmt(st.mean), _fmt(st.std),
                        "", "", "", "", "", ""])
        for mec_id, st in report.per_mec.items():
            w.writerow(["mec", mec_id, "", st.count, _fmt(st.mean), _fmt(st.std),
                        "", "", "", "", "", ""])
        def dist_row(scope, entity, qos, d: DistSummary):
            w.writerow([
                scope, entity, qos, d.count, _fmt(d.mean), _fmt(d.std),
                _fmt(d.percentiles[50.0]), _fmt(d.percentiles[80.0]),
                _fmt(d.percentiles[95.0]), _fmt(d.percentiles[99.0]),
                _fmt(d.percentiles[99.9]), _fmt(d.max),
            ])
        if report.e2e_overall is not None:
            dist_row("e2e", "", "", report.e2e_overall)
        for qos, d in report.e2e_per_qos.items():
            dist_row("e2e_qos", "", qos.value, d)
        w.writerow(["counts", "", "", report.generated, "", "", "", "", "", "", "", ""])


def summary_to_dict(report: SummaryReport) -> dict:
    def stats_d(st: Stats) -> dict:
        return {"mean_ms": st.mean, "std_ms": st.std, "count": st.count}

    def dist_d(d: DistSummary) -> dict:
        return {
            "count": d.count,
            "mean_ms": d.mean,
            "std_ms": d.std,
            "max_ms": d.max,
            "percentiles_ms": {f"p{p:g}": v for p, v in d.percentiles.items()},
        }

    return {
        "scenario": report.scenario_name,
        "scheme": report.scheme,
        "seed": report.seed,
        "counts": {
            "generated": report.generated,
            "completed": report.completed,
            "dropped": report.dropped,
            "residual": report.residual,
        },
        "epochs_run": report.epochs_run,
        "truncated": report.truncated,
        "peak_upf_queue": report.peak_upf_queue,
        "peak_mec_queue": report.peak_mec_queue,
        "upf_delay": {
            f"upf{upf_id}.{qos.value}": stats_d(st)
            for (upf_id, qos), st in report.per_upf_qos.items()
        },
        "mec_delay": {f"mec{mec_id}": stats_d(st) for mec_id, st in report.per_mec.items()},
        "e2e": dist_d(report.e2e_overall) if report.e2e_overall else None,
        "e2e_per_qos": {q.value: dist_d(d) for q, d in report.e2e_per_qos.items()},
    }


def write_summary_json(report: SummaryReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_cdf_csv(cdf: CdfTable, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["d_e2e_ms", "cum_prob"])
        for v, p in zip(cdf.values, cdf.cum_probs):
            w.writerow([_fmt(v), _fmt(p)])


def write_events_csv(result: RunResult, path: str) -> None:
    cols = [
        "id", "qos", "origin_upf", "arrival_epoch", "assigned_upf", "assigned_mec",
        "status", "d_upf_ms", "d_net_ms", "d_mec_ms", "d_e2e_ms",
        "proj_upf_ms", "proj_net_ms", "proj_mec_ms", "proj_e2e_ms",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in result.requests:
            proj = r.projected
            done = r.status is RequestStatus.COMPLETED
            w.writerow([
                r.id, r.qos.value, r.origin_upf, r.arrival_epoch,
                _fmt(r.assigned_upf), _fmt(r.assigned_mec), r.status.name.lower(),
                _fmt(r.d_upf if done or r.upf_serve_epoch is not None else None),
                _fmt(r.d_net if done or r.mec_due_epoch is not None else None),
                _fmt(r.d_mec if done else None),
                _fmt(r.d_e2e),
                _fmt(proj.d_upf if proj else None),
                _fmt(proj.d_net if proj else None),
                _fmt(proj.d_mec if proj else None),
                _fmt(proj.d_e2e if proj else None),
            ])


def write_trace_csv(result: RunResult, path: str) -> None:
    """Per-epoch counters and end-of-epoch queue lengths."""
    upf_keys = sorted(result.upf_queue_series, key=lambda k: (k[0], k[1].value))
    mec_keys = sorted(result.mec_queue_series)
    cols = (
        ["epoch", "arrivals", "admitted", "dropped", "served_upf", "served_mec",
         "completed", "in_flight"]
        + [f"upf{i}.{q.value}.queue" for i, q in upf_keys]
        + [f"mec{j}.queue" for j in mec_keys]
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for rep in result.epoch_reports:
            e = rep.epoch
            row = [rep.epoch, rep.arrivals, rep.admitted, rep.dropped,
                   rep.served_upf, rep.served_mec, rep.completed, rep.in_flight]
            row += [result.upf_queue_series[k][e] for k in upf_keys]
            row += [result.mec_queue_series[k][e] for k in mec_keys]
            w.writerow(row)


def write_capex_csv(points: Sequence[CapexPoint], path: str) -> None:
    qos_cols = sorted({q for p in points for q in p.pct_under_threshold}, key=lambda q: q.value)
    cols = ["pairs", "scheme", "completed", "dropped"] + [
        f"pct_{q.value}_under_threshold" for q in qos_cols
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for p in sorted(points, key=lambda p: (p.pairs, p.scheme)):
            row = [p.pairs, p.scheme, p.completed, p.dropped]
            row += [_fmt(p.pct_under_threshold.get(q)) for q in qos_cols]
            w.writerow(row)
