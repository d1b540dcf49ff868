"""Discrete-epoch flow simulation of the UPF/MEC data plane.

Every epoch runs the same fixed order: generate arrivals, admit them one
at a time through the configured assignment scheme (each decision sees
the queues left by the decisions before it, including same-epoch ones),
serve the UPF buckets, move served traffic across the links, deliver
finished transfers to their MEC queues, serve the MECs, then advance the
clock.  After the arrival horizon the run keeps stepping without new
traffic until every admitted request has completed or a drain cap is hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .delay import mec_capacity, net_delay, transit_epochs, upf_capacity
from .model import (
    EpochClock,
    Link,
    MecState,
    QosClass,
    RequestStatus,
    Scenario,
    ScenarioError,
    TrafficSpec,
    UeRequest,
    UpfState,
    validate_scenario,
)
from .schemes import SCHEME_FUNCS

DEFAULT_DRAIN_FACTOR = 10  # drain cap defaults to this many horizons

_QOS_LIST = list(QosClass)


class InvariantError(RuntimeError):
    """A structural invariant broke mid-run; the run is aborted."""


def generate_arrivals(
    traffic: TrafficSpec,
    rng: np.random.Generator,
    epoch: int,
    num_upfs: int,
    start_id: int = 0,
) -> List[UeRequest]:
    """Draw one epoch of requests: count, then origin and QoS per request.

    The deterministic process emits floor((epoch+1)*rate) - floor(epoch*rate)
    requests so the long-run rate is exact even for fractional rates.
    """
    lam = traffic.mean_arrivals_per_epoch
    if traffic.process == "poisson":
        count = int(rng.poisson(lam))
    elif traffic.process == "deterministic":
        count = int(math.floor((epoch + 1) * lam) - math.floor(epoch * lam))
    else:
        raise ValueError(f"unknown arrival process {traffic.process!r}")
    if count == 0:
        return []
    skew = np.asarray(traffic.skew, dtype=float)
    origins = rng.choice(num_upfs, size=count, p=skew / skew.sum())
    mix = np.asarray([traffic.qos_mix[q] for q in _QOS_LIST], dtype=float)
    classes = rng.choice(len(_QOS_LIST), size=count, p=mix / mix.sum())
    return [
        UeRequest(
            id=start_id + k,
            qos=_QOS_LIST[classes[k]],
            origin_upf=int(origins[k]) + 1,
            arrival_epoch=epoch,
        )
        for k in range(count)
    ]


@dataclass
class EpochReport:
    """Counters for one simulated epoch."""

    epoch: int
    arrivals: int
    admitted: int
    dropped: int
    served_upf: int
    served_mec: int
    completed: int
    in_flight: int


@dataclass
class RunResult:
    """Everything a finished run produced."""

    scenario: Scenario
    scheme: str
    seed: int
    epochs_run: int
    truncated: bool
    requests: List[UeRequest]
    epoch_reports: List[EpochReport]
    # queue length at the end of each epoch, per UPF bucket / per MEC
    upf_queue_series: Dict[Tuple[int, QosClass], List[int]]
    mec_queue_series: Dict[int, List[int]]
    generated: int = 0
    completed: int = 0
    dropped: int = 0

    @property
    def residual(self) -> int:
        return self.generated - self.completed - self.dropped


def _build_upf(spec, scenario: Scenario) -> UpfState:
    delta = scenario.delta_ms
    if spec.capacity is not None:
        capacity = dict(spec.capacity)
    else:
        capacity = {
            q: upf_capacity(spec.etpb, spec.bytes_per_ue, spec.alpha[q], delta)
            for q in QosClass
        }
    if spec.alpha is not None:
        alpha = dict(spec.alpha)
    else:
        total = sum(capacity.values())
        alpha = {q: capacity[q] / total for q in QosClass}
    lam = scenario.traffic.mean_arrivals_per_epoch
    skew = scenario.traffic.skew[spec.id - 1]
    mix = scenario.traffic.qos_mix
    if spec.queue_cap is not None:
        queue_cap = {q: int(spec.queue_cap[q]) for q in QosClass}
    else:
        # buffer sized proportionally to this bucket's offered load / service rate
        queue_cap = {
            q: max(1, math.ceil(scenario.headroom_factor * lam * mix[q] * skew / capacity[q]))
            for q in QosClass
        }
    return UpfState(
        id=spec.id,
        capacity=capacity,
        alpha=alpha,
        queue_cap=queue_cap,
        bytes_per_ue=spec.bytes_per_ue,
    )


def _build_mec(spec, scenario: Scenario) -> MecState:
    if spec.capacity is not None:
        capacity = float(spec.capacity)
    else:
        capacity = mec_capacity(spec.etpb, spec.bytes_per_ue, scenario.delta_ms)
    if spec.queue_cap is not None:
        queue_cap = int(spec.queue_cap)
    else:
        lam = scenario.traffic.mean_arrivals_per_epoch
        nonreg = lam * (1.0 - scenario.traffic.qos_mix[QosClass.REGULAR])
        if scenario.num_mecs == scenario.num_upfs:
            weight = scenario.traffic.skew[spec.id - 1]
        else:
            weight = 1.0 / scenario.num_mecs
        queue_cap = max(1, math.ceil(scenario.headroom_factor * nonreg * weight / capacity))
    return MecState(
        id=spec.id, capacity=capacity, queue_cap=queue_cap, bytes_per_ue=spec.bytes_per_ue
    )


class SimulationRun:
    """Mutable state of one simulation run."""

    def __init__(
        self,
        scenario: Scenario,
        seed: Optional[int] = None,
        drain_cap: Optional[int] = None,
    ) -> None:
        violations = validate_scenario(scenario)
        if violations:
            raise ScenarioError("; ".join(violations))
        self.scenario = scenario
        self.delta = scenario.delta_ms
        self.seed = scenario.seed if seed is None else seed
        self.rng = np.random.default_rng(self.seed)
        self._assign = SCHEME_FUNCS[scenario.scheme.value]
        self.upfs = [_build_upf(u, scenario) for u in scenario.upfs]
        self.mecs = [_build_mec(m, scenario) for m in scenario.mecs]
        self.links: Dict[Tuple[int, int], Link] = {}
        for i in range(1, scenario.num_upfs + 1):
            for j in range(1, scenario.num_mecs + 1):
                # Mbps -> bits per ms
                bw = scenario.link_bandwidth_mbps[i - 1][j - 1] * 1e3
                self.links[(i, j)] = Link(upf_id=i, mec_id=j, bandwidth=bw)
        self._link_order = sorted(self.links)
        self.clock = EpochClock(0, self.delta)
        if drain_cap is not None:
            self.drain_cap = drain_cap
        elif scenario.drain_cap_epochs is not None:
            self.drain_cap = scenario.drain_cap_epochs
        else:
            self.drain_cap = DEFAULT_DRAIN_FACTOR * max(1, scenario.horizon_epochs)
        self.requests: List[UeRequest] = []
        self.epoch_reports: List[EpochReport] = []
        self.upf_queue_series = {(u.id, q): [] for u in self.upfs for q in QosClass}
        self.mec_queue_series = {m.id: [] for m in self.mecs}
        self.generated = 0
        self.completed = 0
        self.dropped = 0
        self._next_id = 0
        self._upf_credit = {(u.id, q): 0.0 for u in self.upfs for q in QosClass}
        self._mec_credit = {m.id: 0.0 for m in self.mecs}

    def link(self, upf_id: int, mec_id: int) -> Link:
        return self.links[(upf_id, mec_id)]

    @property
    def in_flight(self) -> int:
        return self.generated - self.completed - self.dropped

    # ------------------------------------------------------------- stepping

    def step_epoch(self, generate: bool = True) -> EpochReport:
        epoch = self.clock.epoch_index
        for u in self.upfs:
            u.reset_in_service()
        for m in self.mecs:
            m.reset_in_service()

        arrivals: List[UeRequest] = []
        if generate:
            arrivals = generate_arrivals(
                self.scenario.traffic, self.rng, epoch, self.scenario.num_upfs, self._next_id
            )
            self._next_id += len(arrivals)
            self.requests.extend(arrivals)
            self.generated += len(arrivals)

        admitted = dropped_now = 0
        for req in arrivals:
            decision = self._assign(req, self)
            req.assigned_upf = decision.upf_id
            req.assigned_mec = decision.mec_id
            req.projected = decision.projected
            upf = self.upfs[decision.upf_id - 1]
            if len(upf.queue[req.qos]) >= upf.queue_cap[req.qos]:
                req.advance_status(RequestStatus.DROPPED)
                self.dropped += 1
                dropped_now += 1
            else:
                req.advance_status(RequestStatus.IN_UPF_QUEUE)
                upf.queue[req.qos].append(req)
                admitted += 1
                if decision.mec_id is not None:
                    self.mecs[decision.mec_id - 1].pending += 1
        if admitted + dropped_now != len(arrivals):
            raise InvariantError(
                f"epoch {epoch}: admissions {admitted}+{dropped_now} != arrivals {len(arrivals)}"
            )

        served_upf = 0
        for u in self.upfs:
            for q in _QOS_LIST:
                queue = u.queue[q]
                credit = self._upf_credit[(u.id, q)] + u.capacity[q]
                n = min(len(queue), int(credit))
                for _ in range(n):
                    req = queue.popleft()
                    req.upf_serve_epoch = epoch
                    req.d_upf = (epoch + 1 - req.arrival_epoch) * self.delta
                    if req.qos.uses_mec:
                        self._enter_link(req, epoch)
                    else:
                        self._complete(req)
                u.in_service[q] = n
                served_upf += n
                self._upf_credit[(u.id, q)] = credit - n if queue else 0.0
                if n > math.ceil(u.capacity[q]):
                    raise InvariantError(
                        f"epoch {epoch}: upf {u.id} {q.value} served {n} "
                        f"over capacity {u.capacity[q]}"
                    )

        for key in self._link_order:
            link = self.links[key]
            if not link.in_transit:
                continue
            still: List[UeRequest] = []
            mec = self.mecs[link.mec_id - 1]
            for req in link.in_transit:
                if req.mec_due_epoch <= epoch:
                    mec.pending -= 1
                    if len(mec.queue) >= mec.queue_cap:
                        req.advance_status(RequestStatus.DROPPED)
                        self.dropped += 1
                        dropped_now += 1
                    else:
                        req.mec_arrival_epoch = epoch
                        req.advance_status(RequestStatus.IN_MEC_QUEUE)
                        mec.queue.append(req)
                else:
                    still.append(req)
            link.in_transit = still

        served_mec = completed_now = 0
        for m in self.mecs:
            credit = self._mec_credit[m.id] + m.capacity
            n = min(len(m.queue), int(credit))
            for _ in range(n):
                req = m.queue.popleft()
                req.mec_serve_epoch = epoch
                req.d_mec = (epoch + 1 - req.mec_arrival_epoch) * self.delta
                self._complete(req)
                completed_now += 1
            m.in_service = n
            served_mec += n
            self._mec_credit[m.id] = credit - n if m.queue else 0.0
            if n > math.ceil(m.capacity):
                raise InvariantError(
                    f"epoch {epoch}: mec {m.id} served {n} over capacity {m.capacity}"
                )

        for u in self.upfs:
            for q in _QOS_LIST:
                self.upf_queue_series[(u.id, q)].append(len(u.queue[q]))
        for m in self.mecs:
            self.mec_queue_series[m.id].append(len(m.queue))

        report = EpochReport(
            epoch=epoch,
            arrivals=len(arrivals),
            admitted=admitted,
            dropped=dropped_now,
            served_upf=served_upf,
            served_mec=served_mec,
            completed=completed_now,
            in_flight=self.in_flight,
        )
        self.epoch_reports.append(report)
        self.clock.advance()
        return report

    def _enter_link(self, req: UeRequest, epoch: int) -> None:
        link = self.links[(req.assigned_upf, req.assigned_mec)]
        link.in_transit.append(req)
        mec = self.mecs[req.assigned_mec - 1]
        # the entering request shares the link with everything already on it
        req.d_net = net_delay(link.n_share, mec.bytes_per_ue, link.bandwidth, self.delta)
        req.mec_due_epoch = epoch + transit_epochs(req.d_net, self.delta)
        req.advance_status(RequestStatus.IN_TRANSIT)

    def _complete(self, req: UeRequest) -> None:
        req.d_e2e = req.d_upf + req.d_net + req.d_mec
        req.advance_status(RequestStatus.COMPLETED)
        self.completed += 1

    # ------------------------------------------------------------- full run

    def run(self) -> RunResult:
        while self.clock.epoch_index < self.scenario.horizon_epochs:
            self.step_epoch(generate=True)
        drained = 0
        while self.in_flight > 0 and drained < self.drain_cap:
            self.step_epoch(generate=False)
            drained += 1
        if self.generated != self.completed + self.dropped + self.in_flight:
            raise InvariantError("request conservation broken at end of run")
        if self.in_flight == 0 and any(m.pending for m in self.mecs):
            raise InvariantError("pending MEC commitments left after full drain")
        return RunResult(
            scenario=self.scenario,
            scheme=self.scenario.scheme.value,
            seed=self.seed,
            epochs_run=self.clock.epoch_index,
            truncated=self.in_flight > 0,
            requests=self.requests,
            epoch_reports=self.epoch_reports,
            upf_queue_series=self.upf_queue_series,
            mec_queue_series=self.mec_queue_series,
            generated=self.generated,
            completed=self.completed,
            dropped=self.dropped,
        )


def run_to_completion(
    scenario: Scenario, seed: Optional[int] = None, drain_cap: Optional[int] = None
) -> RunResult:
    """Simulate the scenario through its horizon plus drain and return the result."""
    return SimulationRun(scenario, seed=seed, drain_cap=drain_cap).run()
