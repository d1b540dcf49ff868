"""Delay and capacity arithmetic for the two-tier data plane.

All functions are pure.  Times are milliseconds, capacities are requests
per epoch, bandwidths are bits per ms.  The projected queueing delay is
piecewise: a request that fits into the free service slots of the current
epoch completes within one epoch; otherwise it waits for the excess queue
ahead of it to drain at the bucket's service rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class DelayBreakdown:
    """End-to-end delay split into its three stages, ms."""

    d_upf: float
    d_net: float
    d_mec: float
    d_e2e: float

    @classmethod
    def compose(cls, d_upf: float, d_net: float, d_mec: float) -> "DelayBreakdown":
        return cls(d_upf, d_net, d_mec, d_upf + d_net + d_mec)


def upf_capacity(etpb: float, bytes_per_ue: float, alpha: float, delta: float) -> float:
    """Requests/epoch a QoS bucket can serve, from the per-bit execution budget.

    etpb is in ms per bit, bytes_per_ue in bytes, alpha the share of the
    UPF granted to this bucket, delta the epoch length in ms.
    """
    if etpb <= 0.0 or bytes_per_ue <= 0.0 or delta <= 0.0:
        raise ValueError("etpb, bytes_per_ue and delta must be > 0")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    return etpb * bytes_per_ue * 8.0 * alpha / delta


def mec_capacity(etpb: float, bytes_per_ue: float, delta: float) -> float:
    """Requests/epoch a MEC host can serve; the whole host is one bucket."""
    return upf_capacity(etpb, bytes_per_ue, 1.0, delta)


def upf_headroom(capacity: float, in_service: float) -> float:
    """Free service slots this epoch: capacity minus requests in service.

    The same arithmetic gives MEC headroom.
    """
    if in_service < 0.0:
        raise ValueError(f"in_service must be >= 0, got {in_service}")
    if in_service > capacity:
        raise ValueError(
            f"in_service {in_service} exceeds capacity {capacity}"
        )
    return capacity - in_service


def _projected(queue_len: float, headroom: float, capacity: float, delta: float) -> float:
    if capacity <= 0.0:
        raise ValueError(f"capacity must be > 0, got {capacity}")
    if delta <= 0.0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if queue_len < 0.0 or headroom < 0.0:
        raise ValueError("queue_len and headroom must be >= 0")
    if queue_len < headroom:
        return delta
    return ((queue_len + 1.0 - headroom) / capacity) * delta + delta


def upf_projected_delay(queue_len: float, headroom: float, capacity: float, delta: float) -> float:
    """Expected completion delay for a request joining a UPF QoS bucket now.

    If the queue fits into the headroom the request completes this epoch
    (delta); otherwise the excess ahead of it drains at the service rate
    and its own epoch of service is added on top.
    """
    return _projected(queue_len, headroom, capacity, delta)


def mec_projected_delay(queue_len: float, headroom: float, capacity: float, delta: float) -> float:
    """Expected completion delay at a MEC host; same law as the UPF bucket."""
    return _projected(queue_len, headroom, capacity, delta)


def net_delay(n_share: int, bytes_per_ue: float, bandwidth: float, delta: float) -> float:
    """Transfer delay on a UPF->MEC link shared by n_share requests, ms.

    bandwidth is in bits per ms; every sharer moves bytes_per_ue bytes.
    """
    if n_share < 0:
        raise ValueError(f"n_share must be >= 0, got {n_share}")
    if bytes_per_ue <= 0.0 or bandwidth <= 0.0 or delta <= 0.0:
        raise ValueError("bytes_per_ue, bandwidth and delta must be > 0")
    return n_share * bytes_per_ue * 8.0 / (bandwidth * delta)


def worst_case_batch_delay(
    queue_len: float, batch: float, headroom: float, capacity: float
) -> float:
    """Epochs until the last of `batch` requests placed on one bucket clears.

    Zero when the queue plus the batch still fits into the headroom.
    """
    if capacity <= 0.0:
        raise ValueError(f"capacity must be > 0, got {capacity}")
    if queue_len < 0.0 or batch < 0.0 or headroom < 0.0:
        raise ValueError("queue_len, batch and headroom must be >= 0")
    return max(0.0, (queue_len + batch - headroom) / capacity)


def transit_epochs(d_net: float, delta: float) -> int:
    """Whole epochs a transfer occupies the link: d_net rounded up."""
    if delta <= 0.0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if d_net < 0.0:
        raise ValueError(f"d_net must be >= 0, got {d_net}")
    return int(math.ceil(d_net / delta))
