from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from upfmec.delay import (
    DelayBreakdown,
    mec_capacity,
    mec_projected_delay,
    net_delay,
    transit_epochs,
    upf_capacity,
    upf_headroom,
    upf_projected_delay,
    worst_case_batch_delay,
)

finite = st.floats(allow_nan=False, allow_infinity=False)
pos = st.floats(min_value=0.01, max_value=1e6, allow_nan=False)
nonneg = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


# -------------------------------------------------------------- frozen values


def test_projected_delay_saturated_queue():
    # 7 queued, no free slots, rate 4/epoch: (7+1-0)/4 + 1 epoch of service
    assert upf_projected_delay(7.0, 0.0, 4.0, 1.0) == 3.0


def test_projected_delay_fast_path():
    assert upf_projected_delay(0.0, 2.0, 4.0, 1.0) == 1.0


def test_projected_delay_boundary_takes_slow_branch():
    # q == headroom is not strictly less, so the queueing branch applies
    assert upf_projected_delay(2.0, 2.0, 4.0, 1.0) == (1.0 / 4.0) * 1.0 + 1.0


def test_mec_projected_delay_values():
    assert mec_projected_delay(5.0, 0.0, 2.0, 1.0) == 4.0
    assert mec_projected_delay(0.0, 1.0, 2.0, 1.0) == 1.0


def test_net_delay_shared_link():
    # 10 sharers x 1500 B x 8 over 150 Mbps = 150e3 bits/ms
    assert net_delay(10, 1500.0, 150e3, 1.0) == 0.8


def test_net_delay_empty_link_is_free():
    assert net_delay(0, 1500.0, 150e3, 1.0) == 0.0


def test_worst_case_batch_delay_values():
    assert worst_case_batch_delay(3.0, 5.0, 0.0, 4.0) == 2.0
    assert worst_case_batch_delay(1.0, 0.0, 2.0, 4.0) == 0.0


def test_upf_capacity_arithmetic():
    # 0.25 ms/bit x 2 B x 8 bits/B x 1.0 / 1 ms
    assert upf_capacity(0.25, 2.0, 1.0, 1.0) == 4.0


def test_transit_epochs_rounds_up():
    assert transit_epochs(0.0, 1.0) == 0
    assert transit_epochs(0.8, 1.0) == 1
    assert transit_epochs(2.0, 1.0) == 2
    assert transit_epochs(2.1, 1.0) == 3


def test_headroom_arithmetic():
    assert upf_headroom(4.0, 4.0) == 0.0
    assert upf_headroom(4.0, 1.0) == 3.0
    assert upf_headroom(6.0, 0.0) == 6.0


def test_compose_sums_components():
    b = DelayBreakdown.compose(1.0, 0.5, 2.0)
    assert b.d_e2e == 3.5
    assert (b.d_upf, b.d_net, b.d_mec) == (1.0, 0.5, 2.0)


# ------------------------------------------------------------- domain errors


def test_capacity_rejects_disabled_bucket():
    with pytest.raises(ValueError):
        upf_capacity(0.25, 2.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        upf_capacity(0.0, 2.0, 0.5, 1.0)


def test_headroom_rejects_overcommit():
    with pytest.raises(ValueError):
        upf_headroom(4.0, 5.0)
    with pytest.raises(ValueError):
        upf_headroom(4.0, -1.0)


def test_projected_delay_rejects_bad_inputs():
    with pytest.raises(ValueError):
        upf_projected_delay(1.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        upf_projected_delay(1.0, 0.0, 4.0, 0.0)
    with pytest.raises(ValueError):
        upf_projected_delay(-1.0, 0.0, 4.0, 1.0)


def test_net_delay_rejects_bad_inputs():
    with pytest.raises(ValueError):
        net_delay(-1, 1500.0, 150e3, 1.0)
    with pytest.raises(ValueError):
        net_delay(1, 1500.0, 0.0, 1.0)


def test_transit_epochs_rejects_negative():
    with pytest.raises(ValueError):
        transit_epochs(-0.1, 1.0)


# ---------------------------------------------------------------- properties


@settings(max_examples=200, deadline=None)
@given(q=nonneg, h=nonneg, c=pos, delta=pos)
def test_projected_delay_never_below_delta(q, h, c, delta):
    assert upf_projected_delay(q, h, c, delta) >= delta


@settings(max_examples=200, deadline=None)
@given(q=nonneg, dq=nonneg, h=nonneg, c=pos)
def test_projected_delay_monotone_in_queue(q, dq, h, c):
    assert upf_projected_delay(q + dq, h, c, 1.0) >= upf_projected_delay(q, h, c, 1.0)


@settings(max_examples=200, deadline=None)
@given(q=nonneg, h=nonneg, dh=nonneg, c=pos)
def test_projected_delay_antitone_in_headroom(q, h, dh, c):
    assert upf_projected_delay(q, h + dh, c, 1.0) <= upf_projected_delay(q, h, c, 1.0)


@settings(max_examples=200, deadline=None)
@given(q=nonneg, h=nonneg, c=pos, dc=pos)
def test_projected_delay_antitone_in_capacity(q, h, c, dc):
    assert upf_projected_delay(q, h, c + dc, 1.0) <= upf_projected_delay(q, h, c, 1.0)


@settings(max_examples=200, deadline=None)
@given(q=nonneg, h=nonneg, c=pos, delta=pos)
def test_mec_delay_shares_the_upf_law(q, h, c, delta):
    assert mec_projected_delay(q, h, c, delta) == upf_projected_delay(q, h, c, delta)


@settings(max_examples=200, deadline=None)
@given(a=st.integers(0, 1000), b=st.integers(0, 1000), bw=pos)
def test_net_delay_linear_in_share(a, b, bw):
    total = net_delay(a + b, 1500.0, bw, 1.0)
    assert total == pytest.approx(net_delay(a, 1500.0, bw, 1.0) + net_delay(b, 1500.0, bw, 1.0))


@settings(max_examples=200, deadline=None)
@given(q=nonneg, x=nonneg, dx=nonneg, h=nonneg, c=pos)
def test_worst_case_monotone_in_batch(q, x, dx, h, c):
    assert worst_case_batch_delay(q, x + dx, h, c) >= worst_case_batch_delay(q, x, h, c) >= 0.0


@settings(max_examples=100, deadline=None)
@given(etpb=pos, by=pos, alpha=st.floats(min_value=0.01, max_value=0.5))
def test_capacity_linear_in_alpha(etpb, by, alpha):
    assert upf_capacity(etpb, by, 2 * alpha, 1.0) == pytest.approx(
        2 * upf_capacity(etpb, by, alpha, 1.0)
    )


@settings(max_examples=100, deadline=None)
@given(etpb=pos, by=pos)
def test_mec_capacity_is_whole_host_bucket(etpb, by):
    assert mec_capacity(etpb, by, 1.0) == upf_capacity(etpb, by, 1.0, 1.0)
    assert mec_capacity(etpb, by, 0.5) == pytest.approx(2 * mec_capacity(etpb, by, 1.0))
