"""Cluster digital-twin toolkit: declarative machine descriptions, the
dragonfly+ fabric graph they expand into, and the analytic queries
(latency, bandwidth shape, peak throughput, roofline, scaling, energy)
whose answers are cross-checkable against published figures."""

__version__ = "0.1.0"

from .hardware import (
    Census,
    CellSpec,
    CpuSpec,
    GpuSpec,
    LinkClass,
    MachineSpec,
    NodeSpec,
    PeakEntry,
    PeakTable,
    PowerSpec,
    StorageSpec,
    SwitchSpec,
    node_bandwidth_summary,
    node_census,
)
from .specio import SpecError, Violation, load_spec, parse_spec, serialize_spec, validate_spec
from .topology import (
    FabricGraph,
    SwitchCensus,
    TopologyError,
    build_topology,
    edge_list_text,
    graph_to_dict,
    leaf_downlink_census,
    links_per_pair,
    switch_census,
)
from .routing import (
    AllocationReport,
    AnalysisError,
    LatencyModel,
    Path,
    RoutingError,
    WorstCase,
    bisection_bandwidth,
    canonical_half_cells_split,
    default_latency_model,
    evaluate_allocation,
    leaf_oversubscription,
    path_latency,
    route,
    spine_pruning,
    worst_case_latency,
)
from .perf import (
    BenchmarkRecord,
    PeakUnavailableError,
    RooflinePoint,
    ScalingRow,
    ScalingSeries,
    average_power,
    energy_efficiency,
    facility_power,
    gpu_peak,
    hpl_efficiency,
    machine_peak,
    node_peak,
    ridge_point,
    roofline,
    weak_scaling_efficiency,
)
from .storage import StorageError, namespace_summary, per_module_capacity, tier_raw_capacity
