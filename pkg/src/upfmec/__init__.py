"""Flow-level discrete-epoch simulator of a private-5G UPF/MEC data plane."""

from .delay import (
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
from .engine import EpochReport, InvariantError, RunResult, SimulationRun, run_to_completion
from .model import (
    EpochClock,
    Link,
    MecSpec,
    MecState,
    QosClass,
    RequestStatus,
    Scenario,
    ScenarioError,
    Scheme,
    TrafficSpec,
    UeRequest,
    UpfSpec,
    UpfState,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
)
from .oracle import (
    OracleBoundError,
    minmax_batch_optimum,
    pair_enumeration_optimum,
    sequential_heuristic_batch,
)
from .schemes import (
    AssignmentDecision,
    assign_baseline,
    assign_bestfit_no_pe,
    assign_bestfit_pe,
    assign_bestfit_upf_mec,
    find_bestfit_mec,
    find_bestfit_upf,
)

__version__ = "0.1.0"
