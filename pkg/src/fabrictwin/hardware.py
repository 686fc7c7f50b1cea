"""Data model for a declarative cluster description.

A machine is a list of cells (groups of racks/blades/nodes) plus registries
of node types, switch types, link classes, storage inventory and power
characteristics.  All objects are immutable after construction; parsing and
validation live in :mod:`fabrictwin.specio`.
"""

from __future__ import annotations

from dataclasses import dataclass

PEAK_FORMATS = ("FP64", "FP32", "TF32", "FP16", "BF16", "INT8", "INT4")
CELL_KINDS = ("Booster", "DC", "Hybrid", "IO")

# Reserved registry names the topology builder binds to fabric roles.
FABRIC_SWITCH = "fabric"
GATEWAY_SWITCH = "gateway"
LEAF_SPINE_LINK = "leaf_spine"
GLOBAL_LINK = "global"
ENDPOINT_HDR200 = "endpoint_hdr200"
ENDPOINT_HDR100 = "endpoint_hdr100"


@dataclass(frozen=True)
class PeakEntry:
    """One throughput figure: numeric format x tensor-unit flag."""

    fmt: str
    tensor: bool
    teraops: float | None  # None = combination the device does not offer
    sparsity_doubling: bool = False


@dataclass(frozen=True)
class PeakTable:
    entries: tuple[PeakEntry, ...] = ()

    def find(self, fmt: str, tensor: bool) -> PeakEntry | None:
        for entry in self.entries:
            if entry.fmt == fmt and entry.tensor == tensor:
                return entry
        return None


@dataclass(frozen=True)
class GpuSpec:
    model: str
    sm_count: int
    max_clock_mhz: int
    hbm_gb: int
    hbm_bw_gbs: float
    tdp_w: int
    peaks: PeakTable


@dataclass(frozen=True)
class CpuSpec:
    model: str
    cores: int
    clock_ghz: float
    flops_per_cycle_per_core: int
    mem_channels: int
    channel_bw_gbs: float


@dataclass(frozen=True)
class NicPort:
    link_class: str
    count: int


@dataclass(frozen=True)
class NodeSpec:
    cpu: CpuSpec
    gpus: tuple[GpuSpec, ...]
    ram_gb: int
    ram_bw_gbs: float
    nic_ports: tuple[NicPort, ...]
    pcie_per_gpu_gbs: float
    nvlink_pair_gbs: float
    dimm_count: int | None = None
    dimm_size_gb: int | None = None


@dataclass(frozen=True)
class SwitchSpec:
    model: str
    radix_200g_ports: int
    port_to_port_ns: int
    split_mode_supported: bool


@dataclass(frozen=True)
class LinkClass:
    name: str
    rate_gbps: int
    endpoint_latency_ns: int  # NIC injection cost when terminating at a node
    length_m: float


@dataclass(frozen=True)
class PowerSpec:
    pue: float
    dlc_capacity_mw: float
    it_load_mw: float


@dataclass(frozen=True)
class DriveSpec:
    count: int
    size_tb: float
    kind: str  # NVMe | SAS-HDD


@dataclass(frozen=True)
class ApplianceSpec:
    count: int
    drives: DriveSpec
    hdr_ports: int  # 200 Gbps ports per appliance
    hdr100_ports: int  # 100 Gbps ports per appliance


@dataclass(frozen=True)
class NamespaceSpec:
    path: str
    appliance_mix: dict[str, int]
    declared_net_size_pib: float
    declared_bandwidth_gbs: float


@dataclass(frozen=True)
class StorageSpec:
    appliances: dict[str, ApplianceSpec]
    tiers: dict[str, dict[str, int]]  # tier name -> {appliance model: count}
    namespaces: tuple[NamespaceSpec, ...]


@dataclass(frozen=True)
class RackGroup:
    racks: int
    blades_per_rack: int
    nodes_per_blade: int
    node_type: str

    @property
    def nodes(self) -> int:
        return self.racks * self.blades_per_rack * self.nodes_per_blade

    @property
    def blades(self) -> int:
        return self.racks * self.blades_per_rack


@dataclass(frozen=True)
class CellSpec:
    id: int
    kind: str
    rack_groups: tuple[RackGroup, ...]
    spines: int
    leafs: int


@dataclass(frozen=True)
class MachineSpec:
    name: str
    cells: tuple[CellSpec, ...]
    node_types: dict[str, NodeSpec]
    switch_types: dict[str, SwitchSpec]
    link_classes: dict[str, LinkClass]
    storage: StorageSpec
    power: PowerSpec
    gateways: int

    def cell(self, cell_id: int) -> CellSpec:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(f"unknown cell id {cell_id}")


@dataclass(frozen=True)
class Census:
    gpu_nodes: int
    cpu_nodes: int
    racks: int
    blades: int

    def __add__(self, other: "Census") -> "Census":
        return Census(
            self.gpu_nodes + other.gpu_nodes,
            self.cpu_nodes + other.cpu_nodes,
            self.racks + other.racks,
            self.blades + other.blades,
        )


def cell_census(cell: CellSpec, node_types: dict[str, NodeSpec]) -> Census:
    """Node/rack/blade counts for one cell, split by GPU-bearing node type."""
    gpu_nodes = cpu_nodes = racks = blades = 0
    for group in cell.rack_groups:
        node_type = node_types[group.node_type]
        if node_type.gpus:
            gpu_nodes += group.nodes
        else:
            cpu_nodes += group.nodes
        racks += group.racks
        blades += group.blades
    return Census(gpu_nodes, cpu_nodes, racks, blades)


def node_census(spec: MachineSpec) -> Census:
    total = Census(0, 0, 0, 0)
    for cell in spec.cells:
        total = total + cell_census(cell, spec.node_types)
    return total


def node_bandwidth_summary(node: NodeSpec) -> dict[str, float]:
    """Intra-node data paths: host RAM, PCIe to devices, device links, HBM."""
    gpu_count = len(node.gpus)
    return {
        "ram_gbs": node.ram_bw_gbs,
        "pcie_total_gbs": node.pcie_per_gpu_gbs * gpu_count,
        "nvlink_per_gpu_gbs": node.nvlink_pair_gbs * max(0, gpu_count - 1),
        "hbm_total_gbs": sum(g.hbm_bw_gbs for g in node.gpus),
        "hbm_total_gb": float(sum(g.hbm_gb for g in node.gpus)),
    }
