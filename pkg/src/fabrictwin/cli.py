"""Command-line front door.

Every subcommand loads and validates a spec file, runs one query family and
prints a machine-readable result: JSON by default, CSV via ``--format csv``,
an aligned key/value listing via ``--pretty``.  Exit codes: 0 success (data
warnings do not change it), 1 validation violations or an unbuildable
fabric, 2 usage errors.  Output is byte-deterministic for identical inputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .datasets import (
    DISCREPANCIES,
    PAPER_FIGURES,
    benchmark_records,
    data_path,
    lbm_weak_scaling,
)
from .hardware import PEAK_FORMATS, node_bandwidth_summary, node_census
from .perf import (
    PeakUnavailableError,
    average_power,
    energy_efficiency,
    gpu_peak,
    hbm_bandwidth_gbs,
    hpl_efficiency,
    machine_peak,
    node_peak,
    power_report,
    ridge_point,
    roofline,
    series_from_csv,
    weak_scaling_efficiency,
)
from .routing import (
    AnalysisError,
    RoutingError,
    bisection_bandwidth,
    canonical_half_cells_split,
    default_latency_model,
    format_ratio,
    leaf_oversubscription,
    path_latency,
    route,
    spine_pruning,
    worst_case_latency,
)
from .specio import SpecError, parse_spec, validate_spec
from .storage import StorageError, namespace_summary, per_module_capacity, tier_raw_capacity
from .topology import (
    TopologyError,
    build_topology,
    edge_list_text,
    graph_to_dict,
    leaf_downlink_census,
    switch_census,
)

SUBCOMMANDS = (
    "validate",
    "census",
    "topo",
    "latency",
    "worst-latency",
    "oversub",
    "bisection",
    "peak",
    "roofline",
    "scaling",
    "energy",
    "storage",
    "report",
)


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# small formatting helpers

def _ns(value: float):
    """Nanosecond values print as integers when they are integral."""
    return int(value) if float(value).is_integer() else value


def _ratio(value: Fraction) -> dict:
    return {
        "value": format_ratio(value),
        "precision": 2,
        "numerator": value.numerator,
        "denominator": value.denominator,
    }


def _warnings(*codes: str) -> list[dict]:
    return [{"code": code, "message": DISCREPANCIES[code]} for code in codes]


def _is_reference_machine(spec) -> bool:
    return spec.name == "LEONARDO"


# ---------------------------------------------------------------------------
# payload builders, one per subcommand

def _census_payload(spec, graph_factory, args):
    census = node_census(spec)
    return {
        "gpu_nodes": census.gpu_nodes,
        "cpu_nodes": census.cpu_nodes,
        "racks": census.racks,
        "blades": census.blades,
        "cells": len(spec.cells),
        "units": {
            "gpu_nodes": "count",
            "cpu_nodes": "count",
            "racks": "count",
            "blades": "count",
            "cells": "count",
        },
    }, 0


def _switch_census_payload(spec, graph):
    census = switch_census(graph)
    payload = {
        "spines": census.spines,
        "leafs": census.leafs,
        "gateways": census.gateways,
        "fabric_total": census.fabric_total,
        "grand_total": census.grand_total,
        "units": {key: "count" for key in ("spines", "leafs", "gateways", "fabric_total", "grand_total")},
    }
    if _is_reference_machine(spec):
        payload["paper_total"] = PAPER_FIGURES["hdr_switch_total"]
        payload["units"]["paper_total"] = "count"
        payload["warnings"] = _warnings("switch_total")
    return payload


def _topo_payload(spec, graph_factory, args):
    graph = graph_factory()
    if args.export == "edges":
        return {"__text__": edge_list_text(graph)}, 0
    if args.export == "graph":
        return graph_to_dict(graph), 0
    return _switch_census_payload(spec, graph), 0


def _latency_payload(spec, graph_factory, args):
    if not args.src or not args.dst:
        raise UsageError("latency requires --from and --to endpoint ids")
    graph = graph_factory()
    model = default_latency_model(spec)
    path = route(graph, args.src, args.dst)
    return {
        "from": args.src,
        "to": args.dst,
        "path": list(path.hops),
        "switch_count": path.switch_count,
        "total_length_m": path.total_length_m,
        "latency_ns": _ns(path_latency(path, model)),
        "units": {"total_length_m": "m", "latency_ns": "ns"},
    }, 0


def _worst_latency_payload(spec, graph_factory, args):
    graph = graph_factory()
    model = default_latency_model(spec)
    worst = worst_case_latency(graph, model)
    payload = {
        "latency_ns": _ns(worst.latency_ns),
        "witness": list(worst.pair) if worst.pair else None,
        "units": {"latency_ns": "ns"},
    }
    if _is_reference_machine(spec):
        bound = PAPER_FIGURES["max_node_latency_ns"]
        payload["paper_bound_ns"] = bound
        payload["within_bound"] = worst.latency_ns <= bound
        payload["units"]["paper_bound_ns"] = "ns"
        payload["warnings"] = _warnings("latency_bound")
    return payload, 0


def _oversub_payload(spec, graph_factory, args):
    if args.cell is None:
        raise UsageError("oversub requires --cell")
    graph = graph_factory()
    try:
        report = leaf_oversubscription(graph, args.cell)
        pruning = spine_pruning(graph, args.cell)
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    leaf_part: dict = {"common": _ratio(report.common) if report.common is not None else None}
    if report.common is None:
        leaf_part["per_leaf"] = {leaf: _ratio(v) for leaf, v in sorted(report.per_leaf.items())}
    return {
        "cell": args.cell,
        "leaf_oversubscription": leaf_part,
        "spine_pruning": _ratio(pruning),
        "units": {"leaf_oversubscription": "ratio", "spine_pruning": "ratio"},
    }, 0


def _bisection_payload(spec, graph_factory, args):
    graph = graph_factory()
    index = graph.index
    if args.cells_a:
        try:
            chosen = {int(part) for part in args.cells_a.split(",")}
        except ValueError:
            raise UsageError("--cells-a wants a comma-separated list of cell ids") from None
        unknown = chosen - set(index.cells)
        if unknown:
            raise UsageError(f"unknown cell ids: {sorted(unknown)}")
        side_a = {n for n in index.compute_nodes if index.node_cell[n] in chosen}
        side_b = {n for n in index.compute_nodes if index.node_cell[n] not in chosen}
        cells_a = sorted(chosen)
    else:
        side_a, side_b = canonical_half_cells_split(graph)
        cells_a = sorted({index.node_cell[n] for n in side_a})
    crossing = bisection_bandwidth(graph, side_a, side_b)
    cells_b = sorted(set(index.cells) - set(cells_a))
    return {
        "side_a_cells": cells_a,
        "side_b_cells": cells_b,
        "side_a_nodes": len(side_a),
        "side_b_nodes": len(side_b),
        "crossing_gbps": crossing,
        "units": {"crossing_gbps": "Gbps"},
    }, 0


def _gpu_node_type(spec, args):
    if args.node_type:
        if args.node_type not in spec.node_types:
            raise UsageError(f"unknown node type {args.node_type!r}")
        return args.node_type
    for name in sorted(spec.node_types):
        if spec.node_types[name].gpus:
            return name
    raise UsageError("no GPU-bearing node type in this spec")


def _peak_payload(spec, graph_factory, args):
    fmt = args.format_fp
    if fmt not in PEAK_FORMATS:
        raise UsageError(f"--format-fp must be one of {', '.join(PEAK_FORMATS)}")
    payload = {
        "format": fmt,
        "tensor": args.tensor,
        "sparse": args.sparse,
        "scope": args.scope,
        "units": {},
    }
    if args.scope == "gpu":
        node = spec.node_types[_gpu_node_type(spec, args)]
        payload["tflops"] = gpu_peak(node.gpus[0], fmt, args.tensor, args.sparse)
        payload["units"]["tflops"] = "TFLOPS"
    elif args.scope == "node":
        name = _gpu_node_type(spec, args)
        node = spec.node_types[name]
        payload["node_type"] = name
        payload["tflops"] = node_peak(node, fmt, args.tensor, args.sparse, args.include_cpu)
        payload["units"]["tflops"] = "TFLOPS"
        if _is_reference_machine(spec) and fmt == "FP64":
            payload["warnings"] = _warnings("node_peak_intro")
    else:
        tflops = machine_peak(spec, fmt, args.tensor, args.sparse, args.include_cpu)
        payload["pflops"] = tflops / 1000.0
        payload["display"] = f"{tflops / 1000.0:.1f}"
        payload["units"]["pflops"] = "PFLOPS"
        if _is_reference_machine(spec) and fmt == "FP64" and args.tensor and not args.sparse:
            payload["paper_rpeak_pflops"] = PAPER_FIGURES["rpeak_pflops"]
            payload["units"]["paper_rpeak_pflops"] = "PFLOPS"
            payload["warnings"] = _warnings("rpeak_gap")
    return payload, 0


def _roofline_payload(spec, graph_factory, args):
    if args.ai is None:
        raise UsageError("roofline requires --ai FLOAT")
    name = _gpu_node_type(spec, args)
    node = spec.node_types[name]
    point = roofline(node, args.ai)
    return {
        "node_type": name,
        "arithmetic_intensity": point.arithmetic_intensity,
        "attainable_tflops": point.attainable_tflops,
        "bound": point.bound,
        "ridge_flop_per_byte": ridge_point(node),
        "peak_tflops": node_peak(node, "FP64", tensor=True),
        "memory_bw_gbs": hbm_bandwidth_gbs(node),
        "units": {
            "arithmetic_intensity": "FLOP/B",
            "attainable_tflops": "TFLOPS",
            "ridge_flop_per_byte": "FLOP/B",
            "peak_tflops": "TFLOPS",
            "memory_bw_gbs": "GB/s",
        },
    }, 0


def _scaling_payload(spec, graph_factory, args):
    if args.series:
        try:
            with open(args.series, "r", encoding="utf-8") as handle:
                series = series_from_csv(handle.read(), name=os.path.basename(args.series))
        except OSError as exc:
            raise UsageError(f"cannot read scaling series: {exc}") from None
        bundled = False
    else:
        series = lbm_weak_scaling()
        bundled = True
    rows = weak_scaling_efficiency(series, args.baseline)
    payload = {
        "series": series.name,
        "baseline_nodes": rows[0][0].nodes if args.baseline is None else args.baseline,
        "rows": [
            {
                "nodes": row.nodes,
                "gpus": row.gpus,
                "lups_e12": row.lups_e12,
                "declared_efficiency": row.efficiency,
                "computed_efficiency": round(computed, 6),
                "delta": round(computed - row.efficiency, 6),
            }
            for row, computed in rows
        ],
        "units": {"lups_e12": "1e12 LUPS"},
    }
    if bundled:
        payload["warnings"] = _warnings("lbm_gpu_typo", "scaling_2475")
    return payload, 0


def _energy_payload(spec, graph_factory, args):
    payload = {"facility": power_report(spec.power), "units": {"facility": "MW"}}
    if _is_reference_machine(spec):
        records = {record.name: record for record in benchmark_records()}
        hpl = records["HPL"]
        rmax = hpl.metrics["rmax_pflops"]
        rpeak = hpl.metrics["rpeak_pflops"]
        power_mw = hpl.metrics["power_mw"]
        payload["hpl"] = {
            "nodes": hpl.nodes,
            "rmax_pflops": rmax,
            "rpeak_pflops": rpeak,
            "power_mw": power_mw,
            "efficiency": hpl_efficiency(rmax, rpeak),
            "gflops_per_w": energy_efficiency(rmax, power_mw),
            "paper_gflops_per_w": PAPER_FIGURES["gflops_per_w"],
        }
        apps = []
        for record in benchmark_records():
            if "tts_s" not in record.metrics:
                continue
            apps.append(
                {
                    "name": record.name,
                    "nodes": record.nodes,
                    "tts_s": record.metrics["tts_s"],
                    "ets_kwh": record.metrics["ets_kwh"],
                    "avg_w_per_node": round(
                        average_power(record.metrics["tts_s"], record.metrics["ets_kwh"], record.nodes), 2
                    ),
                }
            )
        payload["applications"] = apps
        payload["units"].update(
            {"hpl": "PFLOPS/MW", "applications": "W per node"}
        )
    return payload, 0


def _storage_payload(spec, graph_factory, args):
    paper = _is_reference_machine(spec)
    declared = {
        "fast": PAPER_FIGURES["fast_tier_pb"],
        "capacity": PAPER_FIGURES["capacity_tier_pb"],
        "metadata": PAPER_FIGURES["metadata_tb"] / 1000.0,
    }
    tiers = {}
    for tier in sorted(spec.storage.tiers):
        computed = tier_raw_capacity(spec, tier)
        entry = {"computed_raw_pb": computed}
        if paper and tier in declared:
            entry["declared_pb"] = declared[tier]
            entry["delta_pct"] = round((computed - declared[tier]) / declared[tier] * 100.0, 3)
        tiers[tier] = entry
    modules = {
        model: {"raw_pb": per_module_capacity(spec, model)}
        for model in sorted(spec.storage.appliances)
    }
    payload = {
        "tiers": tiers,
        "modules": modules,
        "namespaces": namespace_summary(spec),
        "units": {
            "tiers": "PB (decimal)",
            "modules": "PB (decimal)",
            "namespaces.net_size_pib": "PiB (binary)",
            "namespaces.bandwidth_gbs": "GB/s",
        },
    }
    if paper:
        payload["warnings"] = _warnings("es400nvx2_capacity")
    return payload, 0


def _report_payload(spec, graph_factory, args):
    graph = graph_factory()
    model = default_latency_model(spec)
    reference = _is_reference_machine(spec)

    oversub_rows = []
    for cell in sorted(spec.cells, key=lambda c: c.id):
        row = {"cell": cell.id, "kind": cell.kind}
        try:
            report = leaf_oversubscription(graph, cell.id)
            row["leaf_oversubscription"] = (
                format_ratio(report.common) if report.common is not None else "per-leaf"
            )
        except AnalysisError:
            row["leaf_oversubscription"] = None
        try:
            row["spine_pruning"] = format_ratio(spine_pruning(graph, cell.id))
        except AnalysisError:
            row["spine_pruning"] = None
        oversub_rows.append(row)

    peaks = {}
    gpu_types = [n for n in sorted(spec.node_types) if spec.node_types[n].gpus]
    if gpu_types:
        table = spec.node_types[gpu_types[0]].gpus[0].peaks
        for entry in table.entries:
            if entry.teraops is None:
                continue
            key = f"{entry.fmt}_tensor" if entry.tensor else entry.fmt
            try:
                peaks[key] = machine_peak(spec, entry.fmt, entry.tensor) / 1000.0
            except PeakUnavailableError:
                continue

    worst = worst_case_latency(graph, model)
    census = node_census(spec)
    results = {
        "census": {
            "gpu_nodes": census.gpu_nodes,
            "cpu_nodes": census.cpu_nodes,
            "racks": census.racks,
            "blades": census.blades,
        },
        "switch_census": {
            key: value
            for key, value in _switch_census_payload(spec, graph).items()
            if key not in ("units", "warnings")
        },
        "oversubscription": oversub_rows,
        "worst_latency": {
            "latency_ns": _ns(worst.latency_ns),
            "witness": list(worst.pair) if worst.pair else None,
        },
        "machine_peaks_pflops": peaks,
        "storage": _storage_payload(spec, graph_factory, args)[0],
        "energy": _energy_payload(spec, graph_factory, args)[0],
    }
    if gpu_types:
        results["node_bandwidth"] = node_bandwidth_summary(spec.node_types[gpu_types[0]])
    if reference:
        results["worst_latency"]["paper_bound_ns"] = PAPER_FIGURES["max_node_latency_ns"]
        results["worst_latency"]["within_bound"] = (
            worst.latency_ns <= PAPER_FIGURES["max_node_latency_ns"]
        )
    results["storage"].pop("units", None)
    results["storage"].pop("warnings", None)
    results["energy"].pop("units", None)

    warnings = _warnings(*sorted(DISCREPANCIES)) if reference else []
    return {
        "tool_version": __version__,
        "spec_name": spec.name,
        "command": "report",
        "inputs": {"spec": args.spec_path},
        "results": results,
        "units": {
            "machine_peaks_pflops": "PFLOPS",
            "worst_latency.latency_ns": "ns",
            "storage.tiers": "PB (decimal)",
        },
        "warnings": warnings,
    }, 0


_HANDLERS = {
    "census": _census_payload,
    "topo": _topo_payload,
    "latency": _latency_payload,
    "worst-latency": _worst_latency_payload,
    "oversub": _oversub_payload,
    "bisection": _bisection_payload,
    "peak": _peak_payload,
    "roofline": _roofline_payload,
    "scaling": _scaling_payload,
    "energy": _energy_payload,
    "storage": _storage_payload,
    "report": _report_payload,
}


# ---------------------------------------------------------------------------
# rendering

def _flatten(value, prefix: str, out: list) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(value[key], f"{prefix}.{key}" if prefix else str(key), out)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(item, f"{prefix}[{i}]", out)
    else:
        out.append((prefix, value))


def _render(payload: dict, fmt: str, pretty: bool) -> str:
    if "__text__" in payload:
        return payload["__text__"].rstrip("\n")
    if pretty:
        rows: list = []
        _flatten(payload, "", rows)
        width = max(len(key) for key, _ in rows) if rows else 0
        return "\n".join(f"{key.ljust(width)}  {value}" for key, value in rows)
    if fmt == "csv":
        rows = []
        _flatten(payload, "", rows)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in rows:
            writer.writerow([key, value])
        return buffer.getvalue().rstrip("\n")
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# argument parsing and dispatch

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fabrictwin",
        description="Analytic queries over a declarative cluster description.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="spec file path, or a bundled name (leonardo, toy); "
                                       "defaults to $FABRIC_SPEC")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--pretty", action="store_true", help="aligned key/value listing")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common])
    sub.add_parser("census", parents=[common])
    topo = sub.add_parser("topo", parents=[common])
    topo.add_argument("--export", choices=("census", "edges", "graph"), default="census")
    latency = sub.add_parser("latency", parents=[common])
    latency.add_argument("--from", dest="src", help="source endpoint id")
    latency.add_argument("--to", dest="dst", help="destination endpoint id")
    sub.add_parser("worst-latency", parents=[common])
    oversub = sub.add_parser("oversub", parents=[common])
    oversub.add_argument("--cell", type=int)
    bisection = sub.add_parser("bisection", parents=[common])
    bisection.add_argument("--cells-a", help="comma-separated cell ids for side A "
                                             "(default: canonical half-cells split)")
    peak = sub.add_parser("peak", parents=[common])
    peak.add_argument("--format-fp", default="FP64")
    peak.add_argument("--tensor", action="store_true")
    peak.add_argument("--sparse", action="store_true")
    peak.add_argument("--scope", choices=("gpu", "node", "machine"), default="machine")
    peak.add_argument("--node-type")
    peak.add_argument("--include-cpu", action="store_true")
    roofline_cmd = sub.add_parser("roofline", parents=[common])
    roofline_cmd.add_argument("--ai", type=float, help="arithmetic intensity, FLOP per byte")
    roofline_cmd.add_argument("--node-type")
    scaling = sub.add_parser("scaling", parents=[common])
    scaling.add_argument("--baseline", type=int, help="baseline row node count")
    scaling.add_argument("--series", help="CSV file (nodes,gpus,lups_e12,efficiency); "
                                          "defaults to the bundled series")
    sub.add_parser("energy", parents=[common])
    sub.add_parser("storage", parents=[common])
    sub.add_parser("report", parents=[common])
    return parser


def _resolve_spec_path(value: str) -> str:
    if value in ("leonardo", "toy") and not os.path.exists(value):
        return str(data_path(f"{value}.json"))
    return value


def run(argv) -> tuple[int, str]:
    """Execute one CLI invocation; returns (exit_code, stdout payload)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (exc.code if isinstance(exc.code, int) else 2), ""

    spec_arg = args.spec or os.environ.get("FABRIC_SPEC")
    if not spec_arg:
        print("error: --spec is required (or set FABRIC_SPEC)", file=sys.stderr)
        return 2, ""
    spec_path = _resolve_spec_path(spec_arg)
    try:
        with open(spec_path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        print(f"error: cannot read spec file: {exc}", file=sys.stderr)
        return 2, ""
    try:
        spec = parse_spec(text)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, ""
    args.spec_path = spec_path

    violations = validate_spec(spec)
    if violations:
        payload = {
            "valid": False,
            "violations": [{"path": v.path, "message": v.message} for v in violations],
        }
        return 1, _render(payload, args.format, args.pretty)
    if args.command == "validate":
        return 0, _render({"valid": True, "violations": []}, args.format, args.pretty)

    graph_cache: list = []

    def graph_factory():
        if not graph_cache:
            graph_cache.append(build_topology(spec))
        return graph_cache[0]

    try:
        payload, code = _HANDLERS[args.command](spec, graph_factory, args)
    except TopologyError as exc:
        payload = {"error": str(exc)}
        return 1, _render(payload, args.format, args.pretty)
    except (UsageError, RoutingError, AnalysisError, StorageError, PeakUnavailableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, ""
    return code, _render(payload, args.format, args.pretty)


def main(argv=None) -> None:
    code, text = run(sys.argv[1:] if argv is None else argv)
    if text:
        print(text)
    sys.exit(code)
