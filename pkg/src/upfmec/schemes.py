"""Request-to-resource assignment policies.

Each scheme inspects a read-only snapshot of the current queue state and
returns an AssignmentDecision; the engine applies it.  Decisions never
mutate state.  The bestfit search is a plain argmin over projected
delays with ties broken toward the lowest index, so results are
deterministic for identical snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .delay import (
    DelayBreakdown,
    mec_projected_delay,
    net_delay,
    upf_headroom,
    upf_projected_delay,
)

# a bucket snapshot is (queue_len, headroom, capacity)
Bucket = Tuple[float, float, float]


@dataclass(frozen=True)
class AssignmentDecision:
    """Where a request should go, with the delay the scheme expects."""

    upf_id: int
    mec_id: Optional[int]
    projected: DelayBreakdown


def upf_bucket_snapshot(upfs, qos) -> List[Bucket]:
    """Per-UPF (queue_len, headroom, capacity) for one QoS class, id order."""
    return [
        (
            float(len(u.queue[qos])),
            upf_headroom(u.capacity[qos], u.in_service[qos]),
            u.capacity[qos],
        )
        for u in upfs
    ]


def mec_snapshot(mecs) -> List[Bucket]:
    """Per-MEC (queue_len, headroom, capacity), id order.

    The effective queue length counts pending commitments: requests already
    assigned to the MEC but still upstream.  Without them every decision in
    an epoch would see the same stale queue and pile onto one host.
    """
    return [
        (
            float(len(m.queue) + m.pending),
            upf_headroom(m.capacity, m.in_service),
            m.capacity,
        )
        for m in mecs
    ]


def find_bestfit_upf(buckets: Sequence[Bucket], delta: float) -> Tuple[int, float]:
    """Index of the bucket with the lowest projected delay, and that delay."""
    if not buckets:
        raise ValueError("no UPF buckets to choose from")
    best_idx = 0
    best = upf_projected_delay(*buckets[0], delta)
    for idx in range(1, len(buckets)):
        cost = upf_projected_delay(*buckets[idx], delta)
        if cost < best:
            best, best_idx = cost, idx
    return best_idx, best


def find_bestfit_mec(buckets: Sequence[Bucket], delta: float) -> Tuple[int, float]:
    """Same argmin over MEC hosts; the delay law is shared with the UPF tier."""
    if not buckets:
        raise ValueError("no MECs to choose from")
    return find_bestfit_upf(buckets, delta)


def _projected_for(run, req, upf_id: int, mec_id: Optional[int], pc_upf: float) -> DelayBreakdown:
    if mec_id is None:
        return DelayBreakdown.compose(pc_upf, 0.0, 0.0)
    mec = run.mecs[mec_id - 1]
    link = run.link(upf_id, mec_id)
    d_net = net_delay(link.n_share, mec.bytes_per_ue, link.bandwidth, run.delta)
    pc_mec = mec_projected_delay(
        float(len(mec.queue) + mec.pending),
        upf_headroom(mec.capacity, mec.in_service),
        mec.capacity,
        run.delta,
    )
    return DelayBreakdown.compose(pc_upf, d_net, pc_mec)


def assign_baseline(req, run) -> AssignmentDecision:
    """SMF default: origin UPF and its co-located MEC, no load awareness."""
    upf = run.upfs[req.origin_upf - 1]
    pc_upf = upf_projected_delay(
        float(len(upf.queue[req.qos])),
        upf_headroom(upf.capacity[req.qos], upf.in_service[req.qos]),
        upf.capacity[req.qos],
        run.delta,
    )
    mec_id = req.origin_upf if req.qos.uses_mec else None
    return AssignmentDecision(upf.id, mec_id, _projected_for(run, req, upf.id, mec_id, pc_upf))


def assign_bestfit_no_pe(req, run) -> AssignmentDecision:
    """Bestfit UPF, but the data path still ends at the origin's MEC."""
    idx, pc_upf = find_bestfit_upf(upf_bucket_snapshot(run.upfs, req.qos), run.delta)
    upf_id = run.upfs[idx].id
    mec_id = req.origin_upf if req.qos.uses_mec else None
    return AssignmentDecision(upf_id, mec_id, _projected_for(run, req, upf_id, mec_id, pc_upf))


def assign_bestfit_pe(req, run) -> AssignmentDecision:
    """Bestfit UPF with path extension to that UPF's co-located MEC."""
    idx, pc_upf = find_bestfit_upf(upf_bucket_snapshot(run.upfs, req.qos), run.delta)
    upf_id = run.upfs[idx].id
    mec_id = None
    if req.qos.uses_mec:
        if upf_id > len(run.mecs):
            raise ValueError(
                f"path extension needs a MEC co-located with UPF {upf_id}, "
                f"but only {len(run.mecs)} MECs exist"
            )
        mec_id = upf_id
    return AssignmentDecision(upf_id, mec_id, _projected_for(run, req, upf_id, mec_id, pc_upf))


def assign_bestfit_upf_mec(req, run) -> AssignmentDecision:
    """Bestfit UPF and bestfit MEC, each chosen on its own tier's state."""
    idx, pc_upf = find_bestfit_upf(upf_bucket_snapshot(run.upfs, req.qos), run.delta)
    upf_id = run.upfs[idx].id
    mec_id = None
    if req.qos.uses_mec:
        midx, _ = find_bestfit_mec(mec_snapshot(run.mecs), run.delta)
        mec_id = run.mecs[midx].id
    return AssignmentDecision(upf_id, mec_id, _projected_for(run, req, upf_id, mec_id, pc_upf))


SCHEME_FUNCS = {
    "baseline": assign_baseline,
    "bestfit_upf_no_pe": assign_bestfit_no_pe,
    "bestfit_upf_pe": assign_bestfit_pe,
    "bestfit_upf_mec": assign_bestfit_upf_mec,
}
