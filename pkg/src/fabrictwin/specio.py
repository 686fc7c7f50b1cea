"""Spec-file I/O: strict JSON parsing, canonical serialization, validation.

The file format is JSON with top-level keys ``name``, ``cells``,
``node_types``, ``switch_types``, ``link_classes``, ``storage``, ``power``
and ``gateways``.  Unknown fields are rejected, cross-references must
resolve, and serialization is canonical (sorted keys, two-space indent,
trailing newline) so that parse -> serialize round-trips bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .hardware import (
    CELL_KINDS,
    PEAK_FORMATS,
    ApplianceSpec,
    CellSpec,
    CpuSpec,
    DriveSpec,
    GpuSpec,
    LinkClass,
    MachineSpec,
    NamespaceSpec,
    NicPort,
    NodeSpec,
    PeakEntry,
    PeakTable,
    PowerSpec,
    RackGroup,
    StorageSpec,
    SwitchSpec,
)

TOP_LEVEL_KEYS = (
    "name",
    "cells",
    "node_types",
    "switch_types",
    "link_classes",
    "storage",
    "power",
    "gateways",
)

STORAGE_TIERS = ("fast", "capacity", "metadata")
DRIVE_KINDS = ("NVMe", "SAS-HDD")


class SpecError(ValueError):
    """Malformed spec file: syntax, structure, types or bad references."""


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


# ---------------------------------------------------------------------------
# low-level field extraction

def _obj(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SpecError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _check_keys(obj: dict, path: str, required, optional=()) -> None:
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise SpecError(f"{path}: unknown field(s): {', '.join(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise SpecError(f"{path}: missing field(s): {', '.join(missing)}")


def _int(obj: dict, key: str, path: str) -> int:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


def _count(obj: dict, key: str, path: str) -> int:
    value = _int(obj, key, path)
    if value <= 0:
        raise SpecError(f"{path}.{key}: non-positive count {value}")
    return value


def _num(obj: dict, key: str, path: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)


def _text(obj: dict, key: str, path: str) -> str:
    value = obj[key]
    if not isinstance(value, str) or not value:
        raise SpecError(f"{path}.{key}: expected a non-empty string, got {value!r}")
    return value


def _flag(obj: dict, key: str, path: str) -> bool:
    value = obj[key]
    if not isinstance(value, bool):
        raise SpecError(f"{path}.{key}: expected a boolean, got {value!r}")
    return value


def _list(obj: dict, key: str, path: str) -> list:
    value = obj[key]
    if not isinstance(value, list):
        raise SpecError(f"{path}.{key}: expected a list, got {type(value).__name__}")
    return value


# ---------------------------------------------------------------------------
# per-type parsers

def _parse_peaks(raw, path: str) -> PeakTable:
    raw = _obj(raw, path)
    _check_keys(raw, path, ("entries",))
    entries = []
    seen = set()
    for i, item in enumerate(_list(raw, "entries", path)):
        epath = f"{path}.entries[{i}]"
        item = _obj(item, epath)
        _check_keys(item, epath, ("format", "tensor", "teraops"), ("sparsity_doubling",))
        fmt = _text(item, "format", epath)
        if fmt not in PEAK_FORMATS:
            raise SpecError(f"{epath}.format: unknown format {fmt!r}")
        tensor = _flag(item, "tensor", epath)
        if (fmt, tensor) in seen:
            raise SpecError(f"{epath}: duplicate entry for ({fmt}, tensor={tensor})")
        seen.add((fmt, tensor))
        teraops = None if item["teraops"] is None else _num(item, "teraops", epath)
        sparsity = _flag(item, "sparsity_doubling", epath) if "sparsity_doubling" in item else False
        entries.append(PeakEntry(fmt, tensor, teraops, sparsity))
    return PeakTable(tuple(entries))


def _parse_gpu(raw, path: str) -> GpuSpec:
    raw = _obj(raw, path)
    fields = ("model", "sm_count", "max_clock_mhz", "hbm_gb", "hbm_bw_gbs", "tdp_w", "peaks")
    _check_keys(raw, path, fields)
    return GpuSpec(
        model=_text(raw, "model", path),
        sm_count=_count(raw, "sm_count", path),
        max_clock_mhz=_count(raw, "max_clock_mhz", path),
        hbm_gb=_count(raw, "hbm_gb", path),
        hbm_bw_gbs=_num(raw, "hbm_bw_gbs", path),
        tdp_w=_count(raw, "tdp_w", path),
        peaks=_parse_peaks(raw["peaks"], f"{path}.peaks"),
    )


def _parse_cpu(raw, path: str) -> CpuSpec:
    raw = _obj(raw, path)
    fields = ("model", "cores", "clock_ghz", "flops_per_cycle_per_core", "mem_channels", "channel_bw_gbs")
    _check_keys(raw, path, fields)
    return CpuSpec(
        model=_text(raw, "model", path),
        cores=_count(raw, "cores", path),
        clock_ghz=_num(raw, "clock_ghz", path),
        flops_per_cycle_per_core=_count(raw, "flops_per_cycle_per_core", path),
        mem_channels=_count(raw, "mem_channels", path),
        channel_bw_gbs=_num(raw, "channel_bw_gbs", path),
    )


def _parse_node_type(raw, path: str) -> NodeSpec:
    raw = _obj(raw, path)
    required = ("cpu", "gpus", "ram_gb", "ram_bw_gbs", "nic_ports", "pcie_per_gpu_gbs", "nvlink_pair_gbs")
    _check_keys(raw, path, required, ("dimm_count", "dimm_size_gb"))
    gpus = tuple(
        _parse_gpu(g, f"{path}.gpus[{i}]") for i, g in enumerate(_list(raw, "gpus", path))
    )
    nic_ports = []
    for i, item in enumerate(_list(raw, "nic_ports", path)):
        npath = f"{path}.nic_ports[{i}]"
        item = _obj(item, npath)
        _check_keys(item, npath, ("link_class", "count"))
        nic_ports.append(NicPort(_text(item, "link_class", npath), _count(item, "count", npath)))
    return NodeSpec(
        cpu=_parse_cpu(raw["cpu"], f"{path}.cpu"),
        gpus=gpus,
        ram_gb=_count(raw, "ram_gb", path),
        ram_bw_gbs=_num(raw, "ram_bw_gbs", path),
        nic_ports=tuple(nic_ports),
        pcie_per_gpu_gbs=_num(raw, "pcie_per_gpu_gbs", path),
        nvlink_pair_gbs=_num(raw, "nvlink_pair_gbs", path),
        dimm_count=None if raw.get("dimm_count") is None else _count(raw, "dimm_count", path),
        dimm_size_gb=None if raw.get("dimm_size_gb") is None else _count(raw, "dimm_size_gb", path),
    )


def _parse_cell(raw, path: str) -> CellSpec:
    raw = _obj(raw, path)
    _check_keys(raw, path, ("id", "kind", "rack_groups", "spines", "leafs"))
    kind = _text(raw, "kind", path)
    if kind not in CELL_KINDS:
        raise SpecError(f"{path}.kind: unknown cell kind {kind!r}")
    groups = []
    for i, item in enumerate(_list(raw, "rack_groups", path)):
        gpath = f"{path}.rack_groups[{i}]"
        item = _obj(item, gpath)
        _check_keys(item, gpath, ("racks", "blades_per_rack", "nodes_per_blade", "node_type"))
        groups.append(
            RackGroup(
                racks=_count(item, "racks", gpath),
                blades_per_rack=_count(item, "blades_per_rack", gpath),
                nodes_per_blade=_count(item, "nodes_per_blade", gpath),
                node_type=_text(item, "node_type", gpath),
            )
        )
    return CellSpec(
        id=_int(raw, "id", path),
        kind=kind,
        rack_groups=tuple(groups),
        spines=_count(raw, "spines", path),
        leafs=_count(raw, "leafs", path),
    )


def _parse_switch(raw, path: str) -> SwitchSpec:
    raw = _obj(raw, path)
    _check_keys(raw, path, ("model", "radix_200g_ports", "port_to_port_ns", "split_mode_supported"))
    return SwitchSpec(
        model=_text(raw, "model", path),
        radix_200g_ports=_count(raw, "radix_200g_ports", path),
        port_to_port_ns=_count(raw, "port_to_port_ns", path),
        split_mode_supported=_flag(raw, "split_mode_supported", path),
    )


def _parse_link_class(name: str, raw, path: str) -> LinkClass:
    raw = _obj(raw, path)
    _check_keys(raw, path, ("name", "rate_gbps", "endpoint_latency_ns", "length_m"))
    declared = _text(raw, "name", path)
    if declared != name:
        raise SpecError(f"{path}.name: {declared!r} does not match its key {name!r}")
    latency = _int(raw, "endpoint_latency_ns", path)
    if latency < 0:
        raise SpecError(f"{path}.endpoint_latency_ns: negative latency {latency}")
    length = _num(raw, "length_m", path)
    if length < 0:
        raise SpecError(f"{path}.length_m: negative length {length}")
    return LinkClass(
        name=name,
        rate_gbps=_count(raw, "rate_gbps", path),
        endpoint_latency_ns=latency,
        length_m=length,
    )


def _parse_storage(raw, path: str) -> StorageSpec:
    raw = _obj(raw, path)
    _check_keys(raw, path, ("appliances", "tiers", "namespaces"))
    appliances = {}
    for model, item in _obj(raw["appliances"], f"{path}.appliances").items():
        apath = f"{path}.appliances.{model}"
        item = _obj(item, apath)
        _check_keys(item, apath, ("count", "drives", "hdr_ports", "hdr100_ports"))
        drives = _obj(item["drives"], f"{apath}.drives")
        _check_keys(drives, f"{apath}.drives", ("count", "size_tb", "kind"))
        kind = _text(drives, "kind", f"{apath}.drives")
        if kind not in DRIVE_KINDS:
            raise SpecError(f"{apath}.drives.kind: unknown drive kind {kind!r}")
        hdr = _int(item, "hdr_ports", apath)
        hdr100 = _int(item, "hdr100_ports", apath)
        if hdr < 0 or hdr100 < 0:
            raise SpecError(f"{apath}: negative port count")
        appliances[model] = ApplianceSpec(
            count=_count(item, "count", apath),
            drives=DriveSpec(
                count=_count(drives, "count", f"{apath}.drives"),
                size_tb=_num(drives, "size_tb", f"{apath}.drives"),
                kind=kind,
            ),
            hdr_ports=hdr,
            hdr100_ports=hdr100,
        )
    tiers = {}
    for tier, mix in _obj(raw["tiers"], f"{path}.tiers").items():
        tpath = f"{path}.tiers.{tier}"
        if tier not in STORAGE_TIERS:
            raise SpecError(f"{tpath}: unknown tier (expected one of {', '.join(STORAGE_TIERS)})")
        mix = _obj(mix, tpath)
        tiers[tier] = {m: _count(mix, m, tpath) for m in mix}
    namespaces = []
    for i, item in enumerate(_list(raw, "namespaces", path)):
        npath = f"{path}.namespaces[{i}]"
        item = _obj(item, npath)
        _check_keys(item, npath, ("path", "appliance_mix", "declared_net_size_pib", "declared_bandwidth_gbs"))
        mix = _obj(item["appliance_mix"], f"{npath}.appliance_mix")
        namespaces.append(
            NamespaceSpec(
                path=_text(item, "path", npath),
                appliance_mix={m: _count(mix, m, f"{npath}.appliance_mix") for m in mix},
                declared_net_size_pib=_num(item, "declared_net_size_pib", npath),
                declared_bandwidth_gbs=_num(item, "declared_bandwidth_gbs", npath),
            )
        )
    return StorageSpec(appliances=appliances, tiers=tiers, namespaces=tuple(namespaces))


def _parse_power(raw, path: str) -> PowerSpec:
    raw = _obj(raw, path)
    _check_keys(raw, path, ("pue", "dlc_capacity_mw", "it_load_mw"))
    return PowerSpec(
        pue=_num(raw, "pue", path),
        dlc_capacity_mw=_num(raw, "dlc_capacity_mw", path),
        it_load_mw=_num(raw, "it_load_mw", path),
    )


# ---------------------------------------------------------------------------
# public API

def spec_from_dict(raw: dict) -> MachineSpec:
    raw = _obj(raw, "$")
    _check_keys(raw, "$", TOP_LEVEL_KEYS)
    cells_raw = _list(raw, "cells", "$")
    if not cells_raw:
        raise SpecError("cells: machine must declare at least one cell")
    cells = tuple(_parse_cell(c, f"cells[{i}]") for i, c in enumerate(cells_raw))
    node_types = {
        name: _parse_node_type(item, f"node_types.{name}")
        for name, item in _obj(raw["node_types"], "node_types").items()
    }
    switch_types = {
        name: _parse_switch(item, f"switch_types.{name}")
        for name, item in _obj(raw["switch_types"], "switch_types").items()
    }
    link_classes = {
        name: _parse_link_class(name, item, f"link_classes.{name}")
        for name, item in _obj(raw["link_classes"], "link_classes").items()
    }
    gateways = _int(raw, "gateways", "$")
    if gateways < 0:
        raise SpecError(f"gateways: negative count {gateways}")
    spec = MachineSpec(
        name=_text(raw, "name", "$"),
        cells=cells,
        node_types=node_types,
        switch_types=switch_types,
        link_classes=link_classes,
        storage=_parse_storage(raw["storage"], "storage"),
        power=_parse_power(raw["power"], "power"),
        gateways=gateways,
    )
    _resolve_references(spec)
    return spec


def _resolve_references(spec: MachineSpec) -> None:
    for i, cell in enumerate(spec.cells):
        for j, group in enumerate(cell.rack_groups):
            if group.node_type not in spec.node_types:
                raise SpecError(
                    f"cells[{i}].rack_groups[{j}].node_type: "
                    f"unresolved node_type {group.node_type!r}"
                )
    for name, node_type in spec.node_types.items():
        for j, port in enumerate(node_type.nic_ports):
            if port.link_class not in spec.link_classes:
                raise SpecError(
                    f"node_types.{name}.nic_ports[{j}].link_class: "
                    f"unresolved link_class {port.link_class!r}"
                )


def parse_spec(text: str) -> MachineSpec:
    """Parse spec-file contents into a fully resolved :class:`MachineSpec`."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return spec_from_dict(raw)


def load_spec(path) -> MachineSpec:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_spec(handle.read())


def spec_to_dict(spec: MachineSpec) -> dict:
    def peaks(table: PeakTable) -> dict:
        return {
            "entries": [
                {
                    "format": e.fmt,
                    "tensor": e.tensor,
                    "teraops": None if e.teraops is None else float(e.teraops),
                    "sparsity_doubling": e.sparsity_doubling,
                }
                for e in table.entries
            ]
        }

    def gpu(g: GpuSpec) -> dict:
        return {
            "model": g.model,
            "sm_count": int(g.sm_count),
            "max_clock_mhz": int(g.max_clock_mhz),
            "hbm_gb": int(g.hbm_gb),
            "hbm_bw_gbs": float(g.hbm_bw_gbs),
            "tdp_w": int(g.tdp_w),
            "peaks": peaks(g.peaks),
        }

    def node_type(n: NodeSpec) -> dict:
        out = {
            "cpu": {
                "model": n.cpu.model,
                "cores": int(n.cpu.cores),
                "clock_ghz": float(n.cpu.clock_ghz),
                "flops_per_cycle_per_core": int(n.cpu.flops_per_cycle_per_core),
                "mem_channels": int(n.cpu.mem_channels),
                "channel_bw_gbs": float(n.cpu.channel_bw_gbs),
            },
            "gpus": [gpu(g) for g in n.gpus],
            "ram_gb": int(n.ram_gb),
            "ram_bw_gbs": float(n.ram_bw_gbs),
            "nic_ports": [{"link_class": p.link_class, "count": int(p.count)} for p in n.nic_ports],
            "pcie_per_gpu_gbs": float(n.pcie_per_gpu_gbs),
            "nvlink_pair_gbs": float(n.nvlink_pair_gbs),
        }
        if n.dimm_count is not None:
            out["dimm_count"] = int(n.dimm_count)
        if n.dimm_size_gb is not None:
            out["dimm_size_gb"] = int(n.dimm_size_gb)
        return out

    return {
        "name": spec.name,
        "cells": [
            {
                "id": int(c.id),
                "kind": c.kind,
                "rack_groups": [
                    {
                        "racks": int(g.racks),
                        "blades_per_rack": int(g.blades_per_rack),
                        "nodes_per_blade": int(g.nodes_per_blade),
                        "node_type": g.node_type,
                    }
                    for g in c.rack_groups
                ],
                "spines": int(c.spines),
                "leafs": int(c.leafs),
            }
            for c in spec.cells
        ],
        "node_types": {name: node_type(n) for name, n in spec.node_types.items()},
        "switch_types": {
            name: {
                "model": s.model,
                "radix_200g_ports": int(s.radix_200g_ports),
                "port_to_port_ns": int(s.port_to_port_ns),
                "split_mode_supported": s.split_mode_supported,
            }
            for name, s in spec.switch_types.items()
        },
        "link_classes": {
            name: {
                "name": lc.name,
                "rate_gbps": int(lc.rate_gbps),
                "endpoint_latency_ns": int(lc.endpoint_latency_ns),
                "length_m": float(lc.length_m),
            }
            for name, lc in spec.link_classes.items()
        },
        "storage": {
            "appliances": {
                model: {
                    "count": int(a.count),
                    "drives": {
                        "count": int(a.drives.count),
                        "size_tb": float(a.drives.size_tb),
                        "kind": a.drives.kind,
                    },
                    "hdr_ports": int(a.hdr_ports),
                    "hdr100_ports": int(a.hdr100_ports),
                }
                for model, a in spec.storage.appliances.items()
            },
            "tiers": {tier: dict(mix) for tier, mix in spec.storage.tiers.items()},
            "namespaces": [
                {
                    "path": ns.path,
                    "appliance_mix": dict(ns.appliance_mix),
                    "declared_net_size_pib": float(ns.declared_net_size_pib),
                    "declared_bandwidth_gbs": float(ns.declared_bandwidth_gbs),
                }
                for ns in spec.storage.namespaces
            ],
        },
        "power": {
            "pue": float(spec.power.pue),
            "dlc_capacity_mw": float(spec.power.dlc_capacity_mw),
            "it_load_mw": float(spec.power.it_load_mw),
        },
        "gateways": int(spec.gateways),
    }


def serialize_spec(spec: MachineSpec) -> str:
    """Canonical form: sorted keys, two-space indent, trailing newline."""
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# validation

def validate_spec(spec: MachineSpec) -> list[Violation]:
    """Check every data invariant; an empty list means the spec is clean."""
    out: list[Violation] = []

    def bad(path: str, message: str) -> None:
        out.append(Violation(path, message))

    if not spec.cells:
        bad("cells", "machine must declare at least one cell")
    seen_ids = set()
    for i, cell in enumerate(spec.cells):
        path = f"cells[{i}]"
        if cell.id in seen_ids:
            bad(f"{path}.id", f"duplicate cell id {cell.id}")
        seen_ids.add(cell.id)
        if cell.kind not in CELL_KINDS:
            bad(f"{path}.kind", f"unknown cell kind {cell.kind!r}")
        if cell.spines <= 0:
            bad(f"{path}.spines", f"must be positive, got {cell.spines}")
        if cell.leafs <= 0:
            bad(f"{path}.leafs", f"must be positive, got {cell.leafs}")
        if cell.kind == "Hybrid" and len(cell.rack_groups) < 2:
            bad(f"{path}.rack_groups", "Hybrid cell must combine at least 2 rack groups")
        if cell.kind == "IO" and cell.rack_groups:
            bad(f"{path}.rack_groups", "IO cell must not carry compute rack groups")
        for j, group in enumerate(cell.rack_groups):
            gpath = f"{path}.rack_groups[{j}]"
            for fname, value in (
                ("racks", group.racks),
                ("blades_per_rack", group.blades_per_rack),
                ("nodes_per_blade", group.nodes_per_blade),
            ):
                if value <= 0:
                    bad(f"{gpath}.{fname}", f"must be positive, got {value}")
            if group.node_type not in spec.node_types:
                bad(f"{gpath}.node_type", f"unresolved node_type {group.node_type!r}")

    compute_types = {g.node_type for c in spec.cells for g in c.rack_groups}
    for name in sorted(spec.node_types):
        node = spec.node_types[name]
        path = f"node_types.{name}"
        if name in compute_types and not node.nic_ports:
            bad(f"{path}.nic_ports", "compute node type must declare at least one NIC port")
        if node.dimm_count is not None and node.dimm_size_gb is not None:
            if node.dimm_count * node.dimm_size_gb != node.ram_gb:
                bad(
                    f"{path}.ram_gb",
                    f"ram_gb {node.ram_gb} != dimm_count {node.dimm_count} x "
                    f"dimm_size_gb {node.dimm_size_gb}",
                )
        for fname, value in (
            ("cores", node.cpu.cores),
            ("clock_ghz", node.cpu.clock_ghz),
            ("flops_per_cycle_per_core", node.cpu.flops_per_cycle_per_core),
        ):
            if value <= 0:
                bad(f"{path}.cpu.{fname}", f"must be positive, got {value}")
        for k, gpu in enumerate(node.gpus):
            gpath = f"{path}.gpus[{k}]"
            if gpu.hbm_bw_gbs <= 0:
                bad(f"{gpath}.hbm_bw_gbs", f"must be positive, got {gpu.hbm_bw_gbs}")
            for e, entry in enumerate(gpu.peaks.entries):
                if entry.teraops is not None and entry.teraops < 0:
                    bad(f"{gpath}.peaks.entries[{e}]", f"negative peak {entry.teraops}")
                if not entry.tensor and entry.sparsity_doubling:
                    bad(f"{gpath}.peaks.entries[{e}]", "sparsity doubling only applies to tensor entries")
            for fmt in PEAK_FORMATS:
                plain = gpu.peaks.find(fmt, False)
                tensored = gpu.peaks.find(fmt, True)
                if (
                    plain is not None
                    and tensored is not None
                    and plain.teraops is not None
                    and tensored.teraops is not None
                    and tensored.teraops < plain.teraops
                ):
                    bad(
                        f"{gpath}.peaks",
                        f"{fmt}: tensor peak {tensored.teraops} below non-tensor {plain.teraops}",
                    )

    for name in sorted(spec.switch_types):
        switch = spec.switch_types[name]
        path = f"switch_types.{name}"
        if switch.radix_200g_ports <= 0:
            bad(f"{path}.radix_200g_ports", f"must be positive, got {switch.radix_200g_ports}")
        if switch.port_to_port_ns <= 0:
            bad(f"{path}.port_to_port_ns", f"must be positive, got {switch.port_to_port_ns}")

    for name in sorted(spec.link_classes):
        link = spec.link_classes[name]
        path = f"link_classes.{name}"
        if link.rate_gbps <= 0:
            bad(f"{path}.rate_gbps", f"must be positive, got {link.rate_gbps}")
        if link.length_m < 0:
            bad(f"{path}.length_m", f"must be non-negative, got {link.length_m}")

    for name in sorted(spec.node_types):
        for j, port in enumerate(spec.node_types[name].nic_ports):
            if port.link_class not in spec.link_classes:
                bad(
                    f"node_types.{name}.nic_ports[{j}].link_class",
                    f"unresolved link_class {port.link_class!r}",
                )

    if spec.power.pue < 1.0:
        bad("power.pue", f"PUE must be >= 1.0, got {spec.power.pue}")
    if spec.power.dlc_capacity_mw < 0:
        bad("power.dlc_capacity_mw", "must be non-negative")
    if spec.power.it_load_mw < 0:
        bad("power.it_load_mw", "must be non-negative")
    if spec.gateways < 0:
        bad("gateways", f"must be non-negative, got {spec.gateways}")

    storage = spec.storage
    for model in sorted(storage.appliances):
        appliance = storage.appliances[model]
        path = f"storage.appliances.{model}"
        if appliance.count <= 0:
            bad(f"{path}.count", f"must be positive, got {appliance.count}")
        if appliance.drives.count <= 0:
            bad(f"{path}.drives.count", f"must be positive, got {appliance.drives.count}")
        if appliance.drives.size_tb <= 0:
            bad(f"{path}.drives.size_tb", f"must be positive, got {appliance.drives.size_tb}")

    tier_use: dict[str, int] = {}
    for tier in sorted(storage.tiers):
        for model, count in sorted(storage.tiers[tier].items()):
            path = f"storage.tiers.{tier}.{model}"
            if model not in storage.appliances:
                bad(path, f"unknown appliance model {model!r}")
                continue
            if count <= 0:
                bad(path, f"must be positive, got {count}")
            tier_use[model] = tier_use.get(model, 0) + count
    for model in sorted(tier_use):
        if model in storage.appliances and tier_use[model] > storage.appliances[model].count:
            bad(
                f"storage.tiers.{model}",
                f"tiers allocate {tier_use[model]} x {model} but only "
                f"{storage.appliances[model].count} exist",
            )

    ns_use: dict[str, int] = {}
    for i, namespace in enumerate(storage.namespaces):
        path = f"storage.namespaces[{i}]"
        if not namespace.appliance_mix:
            bad(f"{path}.appliance_mix", "appliance mix must not be empty")
        for model, count in sorted(namespace.appliance_mix.items()):
            if model not in storage.appliances:
                bad(f"{path}.appliance_mix.{model}", f"unknown appliance model {model!r}")
                continue
            if count <= 0:
                bad(f"{path}.appliance_mix.{model}", f"must be positive, got {count}")
            ns_use[model] = ns_use.get(model, 0) + count
        if namespace.declared_net_size_pib < 0:
            bad(f"{path}.declared_net_size_pib", "must be non-negative")
        if namespace.declared_bandwidth_gbs < 0:
            bad(f"{path}.declared_bandwidth_gbs", "must be non-negative")
    for model in sorted(ns_use):
        if model in storage.appliances and ns_use[model] > storage.appliances[model].count:
            bad(
                f"storage.namespaces.{model}",
                f"namespaces allocate {ns_use[model]} x {model} but only "
                f"{storage.appliances[model].count} exist",
            )

    return out
