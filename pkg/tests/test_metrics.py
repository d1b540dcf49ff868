from __future__ import annotations

import copy
import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from upfmec.engine import RunResult, run_to_completion
from upfmec.metrics import (
    CapexPoint,
    build_cdf,
    build_pair_scenario,
    capex_analysis,
    capex_sweep,
    percentile_nearest_rank,
    report_path,
    summarize,
    write_capex_csv,
    write_cdf_csv,
    write_events_csv,
    write_summary_csv,
    write_summary_json,
    write_trace_csv,
)
from upfmec.model import QosClass, RequestStatus, Scheme, UeRequest

from conftest import make_scenario

ALL_URLLC = {QosClass.URLLC: 1.0, QosClass.EMBB: 0.0, QosClass.MMTC: 0.0, QosClass.REGULAR: 0.0}


def completed_request(rid: int, d_upf: float, d_mec: float = 0.0, d_net: float = 0.0,
                      qos: QosClass = QosClass.URLLC, upf: int = 1, mec=None) -> UeRequest:
    r = UeRequest(id=rid, qos=qos, origin_upf=upf, arrival_epoch=0)
    r.assigned_upf = upf
    r.assigned_mec = mec
    r.d_upf, r.d_net, r.d_mec = d_upf, d_net, d_mec
    r.d_e2e = d_upf + d_net + d_mec
    r.status = RequestStatus.COMPLETED
    return r


def make_result(requests) -> RunResult:
    return RunResult(
        scenario=make_scenario(num_upfs=1),
        scheme="baseline",
        seed=1,
        epochs_run=1,
        truncated=False,
        requests=list(requests),
        epoch_reports=[],
        upf_queue_series={},
        mec_queue_series={},
        generated=len(requests),
        completed=len(requests),
        dropped=0,
    )


# ----------------------------------------------------------------- statistics


def test_nearest_rank_percentiles():
    assert percentile_nearest_rank([2.0, 4.0], 50.0) == 2.0
    assert percentile_nearest_rank([2.0, 4.0], 80.0) == 4.0
    assert percentile_nearest_rank([2.0, 4.0], 100.0) == 4.0
    assert percentile_nearest_rank([7.0], 99.0) == 7.0


def test_nearest_rank_rejects_bad_inputs():
    with pytest.raises(ValueError):
        percentile_nearest_rank([], 50.0)
    with pytest.raises(ValueError):
        percentile_nearest_rank([1.0], 0.0)
    with pytest.raises(ValueError):
        percentile_nearest_rank([1.0], 100.1)


def test_single_request_summary():
    rep = summarize(make_result([completed_request(0, 2.5)]))
    st_ = rep.per_upf_qos[(1, QosClass.URLLC)]
    assert st_.mean == 2.5 and st_.std == 0.0 and st_.count == 1
    assert rep.e2e_overall.max == 2.5


def test_two_request_summary_uses_population_std():
    rep = summarize(make_result([completed_request(0, 2.0), completed_request(1, 4.0)]))
    d = rep.e2e_overall
    assert d.mean == 3.0
    assert d.std == 1.0  # population convention, not the n-1 sample form
    assert d.percentiles[50.0] == 2.0
    assert d.max == 4.0


def test_summary_is_order_independent():
    reqs = [completed_request(i, float(i % 7) + 1.0) for i in range(40)]
    a = summarize(make_result(reqs))
    b = summarize(make_result(list(reversed(reqs))))
    assert a == b


def test_summary_skips_unfinished_requests():
    done = completed_request(0, 2.0)
    pending = UeRequest(id=1, qos=QosClass.URLLC, origin_upf=1, arrival_epoch=0)
    res = make_result([done, pending])
    res.completed = 1
    rep = summarize(res)
    assert rep.e2e_overall.count == 1


def test_percentiles_are_ordered():
    rng = np.random.default_rng(3)
    reqs = [completed_request(i, float(v)) for i, v in enumerate(rng.gamma(2.0, 3.0, size=200))]
    d = summarize(make_result(reqs)).e2e_overall
    assert d.percentiles[80.0] <= d.percentiles[95.0] <= d.percentiles[99.0] <= d.max


def test_empty_run_yields_empty_report():
    rep = summarize(make_result([]))
    assert rep.e2e_overall is None
    assert rep.per_upf_qos == {} and rep.per_mec == {}


def test_cdf_steps():
    cdf = build_cdf([1.0, 1.0, 3.0])
    assert cdf.values == (1.0, 3.0)
    assert cdf.cum_probs == (2.0 / 3.0, 1.0)


def test_cdf_empty():
    assert build_cdf([]) == build_cdf(())


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=1, max_size=50))
def test_cdf_is_a_distribution(samples):
    cdf = build_cdf(samples)
    assert cdf.cum_probs[-1] == 1.0
    assert all(a < b for a, b in zip(cdf.values, cdf.values[1:]))
    assert all(a <= b for a, b in zip(cdf.cum_probs, cdf.cum_probs[1:]))


# ---------------------------------------------------------------- pair scaling


def test_pair_scenario_cycles_base_patterns(campus5):
    scaled = build_pair_scenario(campus5, 7)
    assert scaled.name == "campus5-p7"
    assert scaled.num_upfs == scaled.num_mecs == 7
    assert scaled.upfs[5].capacity == campus5.upfs[0].capacity
    assert scaled.mecs[6].capacity == campus5.mecs[1].capacity
    assert scaled.link_bandwidth_mbps[6][3] == campus5.link_bandwidth_mbps[1][3]
    assert sum(scaled.traffic.skew) == pytest.approx(1.0, abs=1e-12)
    assert scaled.traffic.mean_arrivals_per_epoch == campus5.traffic.mean_arrivals_per_epoch


def test_pair_scenario_keeps_explicit_queue_caps(metro):
    scaled = build_pair_scenario(metro, 8)
    assert scaled.upfs[7].queue_cap == metro.upfs[2].queue_cap
    assert scaled.mecs[5].queue_cap == metro.mecs[0].queue_cap


def test_pair_scenario_shrinks_too(campus5):
    scaled = build_pair_scenario(campus5, 2)
    assert scaled.num_upfs == 2
    raw = campus5.traffic.skew[:2]
    expected = [x / sum(raw) for x in raw]
    assert scaled.traffic.skew == pytest.approx(expected)


def test_pair_counts_must_be_positive(campus5):
    with pytest.raises(ValueError):
        build_pair_scenario(campus5, 0)


# ----------------------------------------------------------------- capex sweep


def sweep_base():
    return make_scenario(
        num_upfs=2, lam=6.0, horizon=10, qos_mix=ALL_URLLC,
        upf_capacity=2.0, upf_queue_cap=6, mec_queue_cap=20,
        thresholds={QosClass.URLLC: 5.0}, scheme=Scheme.BASELINE,
    )


def test_capex_sweep_runs_both_schemes():
    points = capex_sweep(sweep_base(), [1, 2], [1, 2])
    assert len(points) == 4
    assert {p.scheme for p in points} == {"baseline", "bestfit_upf_mec"}
    for p in points:
        assert 0.0 <= p.pct_under_threshold[QosClass.URLLC] <= 100.0
        assert p.completed > 0


def test_capex_sweep_is_deterministic():
    assert capex_sweep(sweep_base(), [1, 2], [1]) == capex_sweep(sweep_base(), [1, 2], [1])


def test_capex_sweep_counts_drops_separately():
    points = capex_sweep(sweep_base(), [1], [1])
    assert all(p.dropped > 0 for p in points)


def test_capex_analysis_gain_and_breakeven():
    points = [
        CapexPoint(1, "baseline", 10, 0, {QosClass.URLLC: 50.0}),
        CapexPoint(2, "baseline", 10, 0, {QosClass.URLLC: 60.0}),
        CapexPoint(1, "bestfit_upf_mec", 10, 0, {QosClass.URLLC: 55.0}),
        CapexPoint(2, "bestfit_upf_mec", 10, 0, {QosClass.URLLC: 90.0}),
    ]
    ana = capex_analysis(points)
    assert ana["connectivity_gain"] == {1: pytest.approx(1.1), 2: pytest.approx(1.5)}
    assert ana["baseline_pct_at_max"] == 60.0
    assert ana["breakeven_pairs"] == 2


def test_capex_analysis_handles_degenerate_columns():
    points = [
        CapexPoint(1, "baseline", 10, 0, {QosClass.URLLC: 0.0}),
        CapexPoint(1, "bestfit_upf_mec", 10, 0, {QosClass.URLLC: 40.0}),
    ]
    ana = capex_analysis(points)
    assert ana["connectivity_gain"][1] is None
    assert ana["breakeven_pairs"] == 1
    with pytest.raises(ValueError):
        capex_analysis([points[0]])


# ---------------------------------------------------------------- file output


def test_report_path_naming():
    assert (
        report_path("out", "campus5", "baseline", 3, "summary", "csv")
        == "out/campus5.baseline.3.summary.csv"
    )


def test_writers_are_byte_stable(tmp_path):
    s = make_scenario(num_upfs=2, lam=3.0, horizon=6, upf_queue_cap=10, mec_queue_cap=10)
    result = run_to_completion(s)
    rep = summarize(result)
    cdf = build_cdf([r.d_e2e for r in result.requests if r.status is RequestStatus.COMPLETED])
    points = capex_sweep(sweep_base(), [1], [1])
    for name, writer, payload in [
        ("summary.csv", write_summary_csv, rep),
        ("summary.json", write_summary_json, rep),
        ("cdf.csv", write_cdf_csv, cdf),
        ("events.csv", write_events_csv, result),
        ("trace.csv", write_trace_csv, result),
        ("capex.csv", write_capex_csv, points),
    ]:
        a, b = tmp_path / f"a_{name}", tmp_path / f"b_{name}"
        writer(payload, str(a))
        writer(copy.deepcopy(payload), str(b))
        assert a.read_bytes() == b.read_bytes()
        assert a.stat().st_size > 0


def test_summary_json_structure(tmp_path):
    s = make_scenario(num_upfs=1, lam=2.0, horizon=4, upf_queue_cap=10, mec_queue_cap=10)
    rep = summarize(run_to_completion(s))
    path = tmp_path / "s.json"
    write_summary_json(rep, str(path))
    doc = json.loads(path.read_text())
    assert doc["scenario"] == s.name
    assert doc["counts"]["generated"] == rep.generated
    assert "e2e" in doc and "upf_delay" in doc and "mec_delay" in doc


def test_summary_reflects_drops():
    s = make_scenario(
        num_upfs=1, lam=10.0, horizon=3, qos_mix=ALL_URLLC,
        upf_capacity=2.0, upf_queue_cap=3, mec_queue_cap=100,
    )
    rep = summarize(run_to_completion(s))
    assert rep.dropped > 0
    assert rep.generated == rep.completed + rep.dropped
    assert rep.residual == 0
