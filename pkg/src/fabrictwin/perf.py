"""Throughput, roofline, efficiency and power arithmetic.

Everything here is descriptive: lookups and ratios over declared device
tables and recorded benchmark results.  Nothing predicts application
performance.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .hardware import GpuSpec, MachineSpec, NodeSpec, PowerSpec


class PeakUnavailableError(LookupError):
    """The requested (format, tensor) combination is not offered."""


@dataclass(frozen=True)
class BenchmarkRecord:
    name: str
    nodes: int | None  # None where no node count was published
    metrics: dict[str, float]


@dataclass(frozen=True)
class ScalingRow:
    nodes: int
    gpus: int
    lups_e12: float
    efficiency: float  # declared value, recomputed by weak_scaling_efficiency


@dataclass(frozen=True)
class ScalingSeries:
    name: str
    rows: tuple[ScalingRow, ...]


@dataclass(frozen=True)
class RooflinePoint:
    arithmetic_intensity: float  # FLOP per byte
    attainable_tflops: float
    bound: str  # "memory" | "compute"


# ---------------------------------------------------------------------------
# peak throughput

def gpu_peak(gpu: GpuSpec, fmt: str, tensor: bool, sparse: bool = False) -> float:
    """Device peak in teraFLOPS (teraOPS for integer formats).

    Sparse throughput is the structural-sparsity mode: x2 on tensor entries
    that support it, a plain table lookup otherwise.
    """
    if sparse and not tensor:
        raise ValueError("sparse throughput requires tensor mode")
    entry = gpu.peaks.find(fmt, tensor)
    if entry is None or entry.teraops is None:
        mode = "tensor" if tensor else "non-tensor"
        raise PeakUnavailableError(f"{gpu.model}: {fmt} {mode} not available")
    value = entry.teraops
    if sparse and entry.sparsity_doubling:
        value *= 2
    return value


def cpu_peak_tflops(node: NodeSpec) -> float:
    cpu = node.cpu
    return cpu.cores * cpu.flops_per_cycle_per_core * cpu.clock_ghz / 1000.0


def node_peak(
    node: NodeSpec,
    fmt: str,
    tensor: bool,
    sparse: bool = False,
    include_cpu: bool = False,
) -> float:
    """Sum of device peaks for one node; zero-GPU nodes sum to zero.

    The CPU term, when included, is cores x flop/cycle x clock regardless
    of the requested format (no per-format CPU table is declared).
    """
    total = sum(gpu_peak(gpu, fmt, tensor, sparse) for gpu in node.gpus)
    if include_cpu:
        total += cpu_peak_tflops(node)
    return total


def machine_peak(
    spec: MachineSpec,
    fmt: str,
    tensor: bool,
    sparse: bool = False,
    include_cpu: bool = False,
) -> float:
    """Machine-wide peak in teraFLOPS, summed in cell order."""
    total = 0.0
    for cell in spec.cells:
        for group in cell.rack_groups:
            node = spec.node_types[group.node_type]
            total += group.nodes * node_peak(node, fmt, tensor, sparse, include_cpu)
    return total


# ---------------------------------------------------------------------------
# roofline

def hbm_bandwidth_gbs(node: NodeSpec) -> float:
    return sum(gpu.hbm_bw_gbs for gpu in node.gpus)


def ridge_point(node: NodeSpec) -> float:
    """Arithmetic intensity (FLOP/byte) where the memory and compute
    ceilings meet, for the node's FP64 tensor peak over aggregate HBM."""
    peak_gflops = node_peak(node, "FP64", tensor=True) * 1000.0
    bandwidth = hbm_bandwidth_gbs(node)
    if bandwidth <= 0:
        raise ValueError("node has no device memory bandwidth")
    return peak_gflops / bandwidth


def roofline(node: NodeSpec, intensity: float) -> RooflinePoint:
    if intensity < 0:
        raise ValueError(f"arithmetic intensity must be non-negative, got {intensity}")
    peak = node_peak(node, "FP64", tensor=True)
    memory_bound = intensity * hbm_bandwidth_gbs(node) / 1000.0
    attainable = min(peak, memory_bound)
    bound = "compute" if memory_bound >= peak else "memory"
    return RooflinePoint(intensity, attainable, bound)


# ---------------------------------------------------------------------------
# recorded-result ratios

def hpl_efficiency(rmax_pflops: float, rpeak_pflops: float) -> float:
    if rpeak_pflops <= 0:
        raise ValueError("rpeak must be positive")
    return rmax_pflops / rpeak_pflops


def energy_efficiency(rmax_pflops: float, power_mw: float) -> float:
    """GigaFLOPS per watt: rmax x 10^6 GF over power x 10^6 W."""
    if power_mw <= 0:
        raise ValueError("power must be positive")
    return rmax_pflops * 1e6 / (power_mw * 1e6)


def average_power(tts_s: float, ets_kwh: float, nodes: int) -> float:
    """Watts per node from time-to-solution and energy-to-solution."""
    if tts_s <= 0:
        raise ValueError("time-to-solution must be positive")
    if nodes <= 0:
        raise ValueError("node count must be positive")
    return ets_kwh * 3.6e6 / tts_s / nodes


@dataclass(frozen=True)
class FacilityPower:
    facility_mw: float
    overhead_fraction: float


def facility_power(it_mw: float, pue: float) -> FacilityPower:
    if pue < 1.0:
        raise ValueError(f"PUE must be >= 1.0, got {pue}")
    return FacilityPower(facility_mw=it_mw * pue, overhead_fraction=pue - 1.0)


def power_report(power: PowerSpec) -> dict:
    facility = facility_power(power.it_load_mw, power.pue)
    return {
        "it_mw": power.it_load_mw,
        "pue": power.pue,
        "facility_mw": facility.facility_mw,
        "overhead_fraction": facility.overhead_fraction,
        "dlc_capacity_mw": power.dlc_capacity_mw,
        "dlc_exceeded": power.it_load_mw > power.dlc_capacity_mw,
    }


# ---------------------------------------------------------------------------
# weak scaling

def weak_scaling_efficiency(
    series: ScalingSeries, baseline_nodes: int | None = None
) -> list[tuple[ScalingRow, float]]:
    """Recompute per-row efficiency against the per-GPU baseline rate."""
    if not series.rows:
        raise ValueError("empty scaling series")
    if baseline_nodes is None:
        baseline = series.rows[0]
    else:
        matches = [row for row in series.rows if row.nodes == baseline_nodes]
        if not matches:
            raise ValueError(f"no series row with {baseline_nodes} nodes")
        baseline = matches[0]
    per_gpu_base = baseline.lups_e12 / baseline.gpus
    if per_gpu_base <= 0:
        raise ValueError("baseline per-GPU rate must be positive")
    return [(row, (row.lups_e12 / row.gpus) / per_gpu_base) for row in series.rows]


SCALING_CSV_HEADER = ["nodes", "gpus", "lups_e12", "efficiency"]


def series_to_csv(series: ScalingSeries) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SCALING_CSV_HEADER)
    for row in series.rows:
        writer.writerow([row.nodes, row.gpus, row.lups_e12, row.efficiency])
    return out.getvalue()


def series_from_csv(text: str, name: str = "imported") -> ScalingSeries:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty scaling CSV") from None
    if header != SCALING_CSV_HEADER:
        raise ValueError(
            f"scaling CSV header must be {','.join(SCALING_CSV_HEADER)}, got {','.join(header)}"
        )
    rows = []
    for line, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != 4:
            raise ValueError(f"scaling CSV line {line}: expected 4 columns")
        rows.append(
            ScalingRow(int(record[0]), int(record[1]), float(record[2]), float(record[3]))
        )
    return ScalingSeries(name=name, rows=tuple(rows))
