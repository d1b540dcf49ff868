"""Domain model for a two-tier private-5G data plane.

A deployment is a set of user plane functions (UPFs) and co-located edge
compute hosts (MECs) joined by a full mesh of links.  Each UPF partitions
its packet-processing capacity into per-QoS buckets; each MEC serves a
single FCFS queue.  A Scenario is the static description (topology,
capacities, traffic law); the *State classes carry the mutable queue
state that the engine evolves epoch by epoch.

Scenario files are single YAML documents.  ``load_scenario`` and
``save_scenario`` round-trip a Scenario losslessly.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional

import yaml

from .delay import DelayBreakdown


class ScenarioError(ValueError):
    """Raised when a scenario fails validation."""


class QosClass(enum.Enum):
    """Service classes. Regular traffic is handled entirely at the UPF."""

    URLLC = "urllc"
    EMBB = "embb"
    MMTC = "mmtc"
    REGULAR = "regular"

    @property
    def uses_mec(self) -> bool:
        return self is not QosClass.REGULAR


class Scheme(enum.Enum):
    """Request-to-resource assignment policies."""

    BASELINE = "baseline"
    BESTFIT_UPF_NO_PE = "bestfit_upf_no_pe"
    BESTFIT_UPF_PE = "bestfit_upf_pe"
    BESTFIT_UPF_MEC = "bestfit_upf_mec"


# schemes that route a request to the MEC co-located with some UPF and
# therefore only make sense when the deployment pairs them one-to-one
CO_LOCATED_SCHEMES = (Scheme.BASELINE, Scheme.BESTFIT_UPF_NO_PE, Scheme.BESTFIT_UPF_PE)


class RequestStatus(enum.IntEnum):
    """Lifecycle of a request; transitions are monotone."""

    PENDING = 0
    IN_UPF_QUEUE = 1
    IN_TRANSIT = 2
    IN_MEC_QUEUE = 3
    COMPLETED = 4
    DROPPED = 5


@dataclass
class EpochClock:
    """Discrete simulation clock; delta is the epoch length in ms."""

    epoch_index: int = 0
    delta: float = 1.0

    def advance(self) -> None:
        self.epoch_index += 1

    @property
    def now_ms(self) -> float:
        return self.epoch_index * self.delta


@dataclass(slots=True)
class UeRequest:
    """One UE connection request flowing through UPF, link and MEC."""

    id: int
    qos: QosClass
    origin_upf: int
    arrival_epoch: int
    status: RequestStatus = RequestStatus.PENDING
    assigned_upf: Optional[int] = None
    assigned_mec: Optional[int] = None
    upf_serve_epoch: Optional[int] = None
    mec_due_epoch: Optional[int] = None
    mec_arrival_epoch: Optional[int] = None
    mec_serve_epoch: Optional[int] = None
    # measured delay components, ms
    d_upf: float = 0.0
    d_net: float = 0.0
    d_mec: float = 0.0
    d_e2e: Optional[float] = None
    # what the assignment scheme predicted at admission time
    projected: Optional[DelayBreakdown] = None

    def advance_status(self, new: RequestStatus) -> None:
        if new < self.status:
            raise ValueError(
                f"request {self.id}: illegal status transition "
                f"{self.status.name} -> {new.name}"
            )
        self.status = new


@dataclass
class TrafficSpec:
    """Arrival law: global rate, origin skew and per-QoS composition."""

    mean_arrivals_per_epoch: float
    skew: List[float]
    qos_mix: Dict[QosClass, float]
    process: str = "poisson"  # poisson | deterministic


@dataclass
class UpfSpec:
    """Static description of one UPF as read from a scenario file."""

    id: int
    # direct mode: requests/epoch per QoS bucket
    capacity: Optional[Dict[QosClass, float]] = None
    # derived mode: capacity[q] = etpb * bytes_per_ue * 8 * alpha[q] / delta
    etpb: Optional[float] = None
    bytes_per_ue: float = 256.0
    alpha: Optional[Dict[QosClass, float]] = None
    queue_cap: Optional[Dict[QosClass, int]] = None


@dataclass
class MecSpec:
    """Static description of one MEC host."""

    id: int
    capacity: Optional[float] = None
    etpb: Optional[float] = None
    bytes_per_ue: float = 1500.0
    queue_cap: Optional[int] = None


@dataclass
class Scenario:
    """Complete experiment description; everything a run needs."""

    name: str
    num_upfs: int
    num_mecs: int
    delta_ms: float
    horizon_epochs: int
    seed: int
    scheme: Scheme
    traffic: TrafficSpec
    upfs: List[UpfSpec]
    mecs: List[MecSpec]
    # bandwidth of link (upf i, mec j) in Mbps, row per UPF
    link_bandwidth_mbps: List[List[float]]
    thresholds_ms: Dict[QosClass, float] = field(default_factory=dict)
    headroom_factor: float = 10.0
    drain_cap_epochs: Optional[int] = None


# ---------------------------------------------------------------- runtime state


@dataclass
class UpfState:
    """Mutable per-UPF state: one FCFS queue per QoS bucket."""

    id: int
    capacity: Dict[QosClass, float]
    alpha: Dict[QosClass, float]
    queue_cap: Dict[QosClass, int]
    bytes_per_ue: float
    queue: Dict[QosClass, Deque[UeRequest]] = field(init=False)
    in_service: Dict[QosClass, int] = field(init=False)

    def __post_init__(self) -> None:
        self.queue = {q: deque() for q in QosClass}
        self.in_service = {q: 0 for q in QosClass}

    def reset_in_service(self) -> None:
        for q in QosClass:
            self.in_service[q] = 0


@dataclass
class MecState:
    """Mutable per-MEC state: a single FCFS queue shared by all classes."""

    id: int
    capacity: float
    queue_cap: int
    bytes_per_ue: float
    queue: Deque[UeRequest] = field(init=False)
    in_service: int = field(init=False)
    # requests assigned here and admitted upstream but not yet in this queue
    # (waiting at a UPF or crossing a link); counted so later assignment
    # decisions see commitments that have not physically arrived yet
    pending: int = field(init=False)

    def __post_init__(self) -> None:
        self.queue = deque()
        self.in_service = 0
        self.pending = 0

    def reset_in_service(self) -> None:
        self.in_service = 0


@dataclass
class Link:
    """Directed UPF->MEC link; bandwidth in bits per ms."""

    upf_id: int
    mec_id: int
    bandwidth: float
    in_transit: List[UeRequest] = field(default_factory=list)

    @property
    def n_share(self) -> int:
        return len(self.in_transit)


# ---------------------------------------------------------------- validation

_QOS_ORDER = [q.value for q in QosClass]
_SUM_TOL = 1e-9


def _check_dist(values: List[float], what: str, out: List[str]) -> None:
    if any(v < 0.0 for v in values):
        out.append(f"{what} has negative entries")
    total = sum(values)
    if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-6):
        out.append(f"{what} sums to {total:g}, expected 1.0")


def validate_scenario(s: Scenario) -> List[str]:
    """Return the full list of violated invariants; empty means valid."""
    v: List[str] = []
    if s.num_upfs < 1:
        v.append("num_upfs must be >= 1")
    if s.num_mecs < 1:
        v.append("num_mecs must be >= 1")
    if s.delta_ms <= 0.0:
        v.append("delta_ms must be > 0")
    if s.horizon_epochs < 0:
        v.append("horizon_epochs must be >= 0")
    if s.headroom_factor <= 0.0:
        v.append("headroom_factor must be > 0")
    if s.drain_cap_epochs is not None and s.drain_cap_epochs < 0:
        v.append("drain_cap_epochs must be >= 0")

    t = s.traffic
    if t.mean_arrivals_per_epoch < 0.0:
        v.append("traffic.mean_arrivals_per_epoch must be >= 0")
    if t.process not in ("poisson", "deterministic"):
        v.append(f"traffic.process {t.process!r} unknown (poisson|deterministic)")
    if len(t.skew) != s.num_upfs:
        v.append(f"traffic.skew has {len(t.skew)} entries, expected num_upfs={s.num_upfs}")
    else:
        _check_dist(t.skew, "traffic.skew", v)
    if set(t.qos_mix) != set(QosClass):
        v.append("traffic.qos_mix must cover exactly the four QoS classes")
    else:
        _check_dist([t.qos_mix[q] for q in QosClass], "traffic.qos_mix", v)

    if [u.id for u in s.upfs] != list(range(1, s.num_upfs + 1)):
        v.append("upfs must carry ids 1..num_upfs in order")
    for u in s.upfs:
        if u.capacity is None and (u.etpb is None or u.alpha is None):
            v.append(f"upf {u.id}: needs capacity or (etpb, alpha) to derive it")
        if u.capacity is not None:
            if set(u.capacity) != set(QosClass):
                v.append(f"upf {u.id}: capacity must cover all four QoS classes")
            elif any(c <= 0.0 for c in u.capacity.values()):
                v.append(f"upf {u.id}: capacity entries must be > 0")
        if u.alpha is not None:
            if set(u.alpha) != set(QosClass):
                v.append(f"upf {u.id}: alpha must cover all four QoS classes")
            else:
                bad = [q.value for q in QosClass if not 0.0 < u.alpha[q] <= 1.0]
                if bad:
                    v.append(f"upf {u.id}: alpha entries out of (0, 1]: {', '.join(bad)}")
                total = sum(u.alpha.values())
                if total > 1.0 + _SUM_TOL:
                    v.append(f"upf {u.id}: alpha sums to {total:g}, expected <= 1.0")
        if u.etpb is not None and u.etpb <= 0.0:
            v.append(f"upf {u.id}: etpb must be > 0")
        if u.bytes_per_ue <= 0.0:
            v.append(f"upf {u.id}: bytes_per_ue must be > 0")
        if u.queue_cap is not None and any(c < 1 for c in u.queue_cap.values()):
            v.append(f"upf {u.id}: queue_cap entries must be >= 1")

    if [m.id for m in s.mecs] != list(range(1, s.num_mecs + 1)):
        v.append("mecs must carry ids 1..num_mecs in order")
    for m in s.mecs:
        if m.capacity is None and m.etpb is None:
            v.append(f"mec {m.id}: needs capacity or etpb to derive it")
        if m.capacity is not None and m.capacity <= 0.0:
            v.append(f"mec {m.id}: capacity must be > 0")
        if m.etpb is not None and m.etpb <= 0.0:
            v.append(f"mec {m.id}: etpb must be > 0")
        if m.bytes_per_ue <= 0.0:
            v.append(f"mec {m.id}: bytes_per_ue must be > 0")
        if m.queue_cap is not None and m.queue_cap < 1:
            v.append(f"mec {m.id}: queue_cap must be >= 1")

    bw = s.link_bandwidth_mbps
    if len(bw) != s.num_upfs or any(len(row) != s.num_mecs for row in bw):
        v.append(
            f"link_bandwidth_mbps must be a {s.num_upfs}x{s.num_mecs} matrix "
            "(row per UPF, column per MEC)"
        )
    elif any(b <= 0.0 for row in bw for b in row):
        v.append("link bandwidths must be > 0")

    for q, thr in s.thresholds_ms.items():
        if thr <= 0.0:
            v.append(f"thresholds_ms[{q.value}] must be > 0")

    if s.scheme in CO_LOCATED_SCHEMES and s.num_upfs != s.num_mecs:
        v.append(
            f"scheme {s.scheme.value} routes through co-located MECs and "
            f"requires num_upfs == num_mecs (got {s.num_upfs} != {s.num_mecs})"
        )
    return v


# ---------------------------------------------------------------- serialization


def _qos_map_to_dict(m: Optional[Dict[QosClass, float]]) -> Optional[dict]:
    if m is None:
        return None
    return {q.value: m[q] for q in QosClass if q in m}


def _qos_map_from_dict(d: Optional[dict]) -> Optional[dict]:
    if d is None:
        return None
    return {QosClass(k): v for k, v in d.items()}


def scenario_to_dict(s: Scenario) -> dict:
    """Plain-dict form of a scenario, ready for YAML emission."""
    doc = {
        "name": s.name,
        "num_upfs": s.num_upfs,
        "num_mecs": s.num_mecs,
        "delta_ms": s.delta_ms,
        "horizon_epochs": s.horizon_epochs,
        "seed": s.seed,
        "scheme": s.scheme.value,
        "headroom_factor": s.headroom_factor,
        "drain_cap_epochs": s.drain_cap_epochs,
        "traffic": {
            "mean_arrivals_per_epoch": s.traffic.mean_arrivals_per_epoch,
            "process": s.traffic.process,
            "skew": list(s.traffic.skew),
            "qos_mix": _qos_map_to_dict(s.traffic.qos_mix),
        },
        "thresholds_ms": _qos_map_to_dict(s.thresholds_ms) or {},
        "upfs": [],
        "mecs": [],
        "links": {"bandwidth_mbps": [list(row) for row in s.link_bandwidth_mbps]},
    }
    for u in s.upfs:
        entry: dict = {"id": u.id, "bytes_per_ue": u.bytes_per_ue}
        if u.capacity is not None:
            entry["capacity"] = _qos_map_to_dict(u.capacity)
        if u.etpb is not None:
            entry["etpb"] = u.etpb
        if u.alpha is not None:
            entry["alpha"] = _qos_map_to_dict(u.alpha)
        if u.queue_cap is not None:
            entry["queue_cap"] = _qos_map_to_dict(u.queue_cap)
        doc["upfs"].append(entry)
    for m in s.mecs:
        entry = {"id": m.id, "bytes_per_ue": m.bytes_per_ue}
        if m.capacity is not None:
            entry["capacity"] = m.capacity
        if m.etpb is not None:
            entry["etpb"] = m.etpb
        if m.queue_cap is not None:
            entry["queue_cap"] = m.queue_cap
        doc["mecs"].append(entry)
    return doc


def scenario_from_dict(doc: dict) -> Scenario:
    """Inverse of scenario_to_dict; tolerates omitted optional keys."""
    traffic = doc["traffic"]
    mix = _qos_map_from_dict(traffic.get("qos_mix"))
    if mix is None:
        mix = {q: 0.25 for q in QosClass}
    upfs = [
        UpfSpec(
            id=u["id"],
            capacity=_qos_map_from_dict(u.get("capacity")),
            etpb=u.get("etpb"),
            bytes_per_ue=u.get("bytes_per_ue", 256.0),
            alpha=_qos_map_from_dict(u.get("alpha")),
            queue_cap=_qos_map_from_dict(u.get("queue_cap")),
        )
        for u in doc["upfs"]
    ]
    mecs = [
        MecSpec(
            id=m["id"],
            capacity=m.get("capacity"),
            etpb=m.get("etpb"),
            bytes_per_ue=m.get("bytes_per_ue", 1500.0),
            queue_cap=m.get("queue_cap"),
        )
        for m in doc["mecs"]
    ]
    links = doc["links"]
    bw = links.get("bandwidth_mbps")
    if bw is not None and bw and not isinstance(bw[0], list):
        # per-MEC list shorthand: same bandwidth from every UPF
        bw = [list(bw) for _ in range(doc["num_upfs"])]
    return Scenario(
        name=doc["name"],
        num_upfs=doc["num_upfs"],
        num_mecs=doc["num_mecs"],
        delta_ms=doc["delta_ms"],
        horizon_epochs=doc["horizon_epochs"],
        seed=doc.get("seed", 0),
        scheme=Scheme(doc.get("scheme", "baseline")),
        traffic=TrafficSpec(
            mean_arrivals_per_epoch=traffic["mean_arrivals_per_epoch"],
            skew=list(traffic["skew"]),
            qos_mix=mix,
            process=traffic.get("process", "poisson"),
        ),
        upfs=upfs,
        mecs=mecs,
        link_bandwidth_mbps=bw,
        thresholds_ms=_qos_map_from_dict(doc.get("thresholds_ms")) or {},
        headroom_factor=doc.get("headroom_factor", 10.0),
        drain_cap_epochs=doc.get("drain_cap_epochs"),
    )


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: not a scenario document")
    try:
        return scenario_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{path}: malformed scenario ({exc})") from exc


def save_scenario(s: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario_to_dict(s), fh, sort_keys=False)
