"""Path analytics over a built fabric graph.

Routes are minimum-switch-count paths (ties broken by total cable length,
then by switch id), priced in nanoseconds as

    2 x NIC injection + switches x port-to-port + fiber propagation x meters

plus the bandwidth-shape metrics: leaf oversubscription, spine pruning,
partition cut bandwidth and allocation quality.  All queries are read-only;
ratios are exact rationals.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .hardware import MachineSpec
from .topology import Attach, Edge, FabricGraph

# Elbow room for exhaustive sweeps; larger sets fall back to class sampling.
EXHAUSTIVE_LIMIT = 64


class RoutingError(ValueError):
    """Unknown endpoints or a structurally broken graph."""


class AnalysisError(ValueError):
    """A metric is undefined for the queried cell (e.g. no uplinks)."""


def _default_lengths() -> dict[str, float]:
    return {"endpoint_leaf": 1.0, "leaf_spine": 5.0, "spine_spine": 20.0}


@dataclass(frozen=True)
class LatencyModel:
    nic_ns: float = 600.0
    switch_ns: float = 90.0
    fiber_ns_per_m: float = 5.0  # light in fiber, ~5 ns per meter
    default_lengths_m: dict[str, float] = field(default_factory=_default_lengths)


def default_latency_model(spec: MachineSpec) -> LatencyModel:
    """Model constants taken from the spec's own components."""
    nic_values = sorted(
        {lc.endpoint_latency_ns for lc in spec.link_classes.values() if lc.endpoint_latency_ns > 0}
    )
    nic_ns = float(nic_values[-1]) if nic_values else 600.0
    fabric = spec.switch_types.get("fabric")
    switch_ns = float(fabric.port_to_port_ns) if fabric else 90.0
    return LatencyModel(nic_ns=nic_ns, switch_ns=switch_ns)


@dataclass(frozen=True)
class Path:
    hops: tuple[str, ...]  # switch ids in traversal order
    edges: tuple[Edge, ...]
    total_length_m: float
    switch_count: int


@dataclass(frozen=True)
class WorstCase:
    latency_ns: float
    pair: tuple[str, str] | None


@dataclass(frozen=True)
class OversubReport:
    per_leaf: dict[str, Fraction]
    common: Fraction | None  # set when every leaf shares the same ratio


@dataclass(frozen=True)
class AllocationReport:
    nodes: tuple[str, ...]
    max_pair_latency_ns: float
    max_pair: tuple[str, str] | None
    min_internal_bisection_gbps: float
    cells_spanned: int


def format_ratio(value: Fraction, places: int = 2) -> str:
    return f"{float(value):.{places}f}"


# ---------------------------------------------------------------------------
# routing

def _leaf_attach(index, node: str) -> dict[str, Attach]:
    table: dict[str, Attach] = {}
    for att in index.attachments.get(node, ()):
        prev = table.get(att.leaf)
        if prev is None or att.length_m < prev.length_m:
            table[att.leaf] = att
    if not table:
        raise RoutingError(f"endpoint {node!r} has no fabric attachment")
    return table


def _all_shortest(index, sources, targets):
    """BFS layering over the switch graph; returns (dist, parents, best)."""
    dist: dict[str, int] = {}
    parents: dict[str, list[str]] = {}
    queue: deque[str] = deque()
    best = None
    for s in sorted(sources):
        dist[s] = 0
        parents[s] = []
        queue.append(s)
        if s in targets:
            best = 0
    while queue:
        u = queue.popleft()
        du = dist[u]
        if best is not None and du + 1 > best:
            continue
        for v in sorted(index.switch_adj[u]):
            dv = du + 1
            if v not in dist:
                dist[v] = dv
                parents[v] = [u]
                queue.append(v)
                if v in targets and best is None:
                    best = dv
            elif dist[v] == dv:
                parents[v].append(u)
    return dist, parents, best


def _sequences(parents, target):
    if not parents[target]:
        yield (target,)
        return
    for pred in parents[target]:
        for prefix in _sequences(parents, pred):
            yield prefix + (target,)


def route(graph: FabricGraph, a: str, b: str) -> Path:
    """Minimum-switch-count path from node a to node b."""
    index = graph.index
    for node in (a, b):
        if node not in index.node_cell:
            raise RoutingError(f"unknown endpoint {node!r}")
    if a == b:
        raise ValueError("route requires two distinct endpoints")
    leafs_a = _leaf_attach(index, a)
    leafs_b = _leaf_attach(index, b)
    dist, parents, best = _all_shortest(index, set(leafs_a), set(leafs_b))
    if best is None:
        raise RoutingError(f"endpoints {a!r} and {b!r} are disconnected (build bug)")
    best_seq = None
    best_key = None
    for target in sorted(leafs_b):
        if dist.get(target) != best:
            continue
        for seq in _sequences(parents, target):
            length = leafs_a[seq[0]].length_m + leafs_b[seq[-1]].length_m
            for u, v in zip(seq, seq[1:]):
                length += index.switch_adj[u][v][0]
            key = (length, seq)
            if best_key is None or key < best_key:
                best_key, best_seq = key, seq
    first = leafs_a[best_seq[0]]
    last = leafs_b[best_seq[-1]]
    edges = [Edge(a, best_seq[0], first.link_class, first.length_m, first.rate_gbps)]
    for u, v in zip(best_seq, best_seq[1:]):
        length, cls, rate = index.switch_adj[u][v]
        edges.append(Edge(u, v, cls, length, rate))
    edges.append(Edge(best_seq[-1], b, last.link_class, last.length_m, last.rate_gbps))
    return Path(
        hops=best_seq,
        edges=tuple(edges),
        total_length_m=best_key[0],
        switch_count=len(best_seq),
    )


def path_latency(path: Path, model: LatencyModel) -> float:
    return (
        2 * model.nic_ns
        + path.switch_count * model.switch_ns
        + model.fiber_ns_per_m * path.total_length_m
    )


# ---------------------------------------------------------------------------
# worst-case sweep

def _cell_signature(index, cell_id: int):
    layout = index.cells[cell_id]
    return (layout.kind, len(layout.leaf_ids), len(layout.spine_ids))


def _attach_profile(index, node: str):
    return tuple(
        sorted((a.link_class, a.rate_gbps, a.length_m, a.ports) for a in index.attachments[node])
    )


def _pair_key(index, a: str, b: str):
    cell_a = index.node_cell[a]
    cell_b = index.node_cell[b]
    leafs_a = frozenset(att.leaf for att in index.attachments[a])
    leafs_b = frozenset(att.leaf for att in index.attachments[b])
    part_a = (_cell_signature(index, cell_a), _attach_profile(index, a))
    part_b = (_cell_signature(index, cell_b), _attach_profile(index, b))
    lo, hi = sorted((part_a, part_b))
    return (lo, hi, cell_a == cell_b, bool(leafs_a & leafs_b))


def _max_latency_over(graph: FabricGraph, model: LatencyModel, nodes, exhaustive):
    nodes = tuple(sorted(nodes))
    if len(nodes) < 2:
        return WorstCase(0.0, None)
    if exhaustive is None:
        exhaustive = len(nodes) <= EXHAUSTIVE_LIMIT
    best = WorstCase(0.0, None)
    if exhaustive:
        for a, b in itertools.combinations(nodes, 2):
            latency = path_latency(route(graph, a, b), model)
            if latency > best.latency_ns:
                best = WorstCase(latency, (a, b))
        return best
    index = graph.index
    # One representative per (cell, leaf-attachment) class; route once per
    # structural pair type.  Symmetric construction makes classmates
    # interchangeable; the exhaustive oracle on small graphs guards this.
    reps: dict[tuple, str] = {}
    for node in nodes:
        leafs = tuple(sorted(att.leaf for att in index.attachments[node]))
        reps.setdefault((index.node_cell[node], leafs), node)
    rep_nodes = sorted(reps.values())
    cache: dict[tuple, float] = {}
    for a, b in itertools.combinations(rep_nodes, 2):
        key = _pair_key(index, a, b)
        if key not in cache:
            cache[key] = path_latency(route(graph, a, b), model)
        if cache[key] > best.latency_ns:
            best = WorstCase(cache[key], (a, b))
    return best


def worst_case_latency(
    graph: FabricGraph, model: LatencyModel, exhaustive: bool | None = None
) -> WorstCase:
    """Maximum node-to-node latency over the compute endpoints."""
    return _max_latency_over(graph, model, graph.index.compute_nodes, exhaustive)


# ---------------------------------------------------------------------------
# bandwidth shape

def leaf_oversubscription(graph: FabricGraph, cell_id: int) -> OversubReport:
    """Downlink-to-uplink bandwidth ratio per leaf in one cell."""
    layout = graph.cell_layout(cell_id)
    leaf_set = set(layout.leaf_ids)
    down = {leaf: 0 for leaf in layout.leaf_ids}
    up = {leaf: 0 for leaf in layout.leaf_ids}
    switch_ids = graph.index.switches
    for edge in graph.edges:
        for leaf, other in ((edge.a, edge.b), (edge.b, edge.a)):
            if leaf not in leaf_set:
                continue
            if other in switch_ids:
                up[leaf] += edge.rate_gbps
            else:
                down[leaf] += edge.rate_gbps
    per_leaf = {}
    for leaf in layout.leaf_ids:
        if up[leaf] == 0:
            raise AnalysisError(f"leaf {leaf}: no uplinks, oversubscription undefined")
        per_leaf[leaf] = Fraction(down[leaf], up[leaf])
    values = set(per_leaf.values())
    return OversubReport(per_leaf=per_leaf, common=values.pop() if len(values) == 1 else None)


def spine_pruning(graph: FabricGraph, cell_id: int) -> Fraction:
    """Provisioned spine downlink-to-uplink ratio for one cell.

    Uplinks are the cell's global links; downlink provisioning is the spine
    port budget left over (radix - uplinks/spine), which matches a uniform
    switch configuration across cell types.
    """
    layout = graph.cell_layout(cell_id)
    spine_set = set(layout.spine_ids)
    switches = graph.index.switches
    global_links = 0
    for edge in graph.edges:
        if edge.a in switches and edge.b in switches:
            cell_a = switches[edge.a].cell_id
            cell_b = switches[edge.b].cell_id
            if cell_a is None or cell_b is None or cell_a == cell_b:
                continue
            if edge.a in spine_set or edge.b in spine_set:
                global_links += 1
    if global_links == 0:
        raise AnalysisError(f"cell {cell_id}: no global uplinks, pruning undefined")
    radix = switches[layout.spine_ids[0]].radix
    return Fraction(len(layout.spine_ids) * radix - global_links, global_links)


def _cell_sides(index, side_of_node: dict[str, int], cover: bool) -> dict[int, int | None]:
    votes: dict[int, list[int]] = {cell: [0, 0] for cell in index.cells}
    for node, side in side_of_node.items():
        votes[index.node_cell[node]][side] += 1
    sides: dict[int, int | None] = {}
    for cell, v in votes.items():
        if v[0] == v[1] == 0:
            # Full partitions count node-less cells on side A; partial ones
            # (allocation cuts) leave uninvolved cells out of the cut.
            sides[cell] = 0 if cover else None
        else:
            sides[cell] = 0 if v[0] >= v[1] else 1
    return sides


def bisection_bandwidth(
    graph: FabricGraph,
    side_a,
    side_b,
    require_cover: bool = True,
) -> float:
    """Sum of link rates crossing the given node bipartition, in Gbps.

    This is the cut induced by the partition (cells side with the majority
    of their nodes), not a min-cut search.
    """
    index = graph.index
    side_a = set(side_a)
    side_b = set(side_b)
    overlap = side_a & side_b
    if overlap:
        raise ValueError(f"partition sides overlap: {sorted(overlap)[:3]}")
    side_of_node: dict[str, int] = {}
    for side, members in ((0, side_a), (1, side_b)):
        for node in members:
            if node not in index.node_cell or index.node_kind[node] != "compute":
                raise RoutingError(f"unknown compute endpoint {node!r}")
            side_of_node[node] = side
    if require_cover:
        missing = set(index.compute_nodes) - set(side_of_node)
        if missing:
            raise ValueError(
                f"partition does not cover all compute endpoints "
                f"({len(missing)} missing, e.g. {sorted(missing)[:3]})"
            )
    cell_side = _cell_sides(index, side_of_node, require_cover)
    switches = index.switches
    total = 0
    for edge in graph.edges:
        a_switch = edge.a in switches
        b_switch = edge.b in switches
        if a_switch and b_switch:
            cell_a = switches[edge.a].cell_id
            cell_b = switches[edge.b].cell_id
            if cell_a is None or cell_b is None:
                continue  # gateway legs stay inside their cell
            side_a_cell = cell_side[cell_a]
            side_b_cell = cell_side[cell_b]
            if side_a_cell is None or side_b_cell is None:
                continue
            if side_a_cell != side_b_cell:
                total += edge.rate_gbps
        else:
            node, switch = (edge.a, edge.b) if b_switch else (edge.b, edge.a)
            node_side = side_of_node.get(node)
            if node_side is None:
                continue
            if node_side != cell_side[switches[switch].cell_id]:
                total += edge.rate_gbps
    return float(total)


def canonical_half_cells_split(graph: FabricGraph) -> tuple[set[str], set[str]]:
    """Compute-node partition along cell ids: first half of the cells
    against the rest."""
    index = graph.index
    cell_ids = sorted(index.cells)
    first = set(cell_ids[: len(cell_ids) // 2])
    side_a = {n for n in index.compute_nodes if index.node_cell[n] in first}
    side_b = {n for n in index.compute_nodes if index.node_cell[n] not in first}
    return side_a, side_b


def evaluate_allocation(graph: FabricGraph, nodes, model: LatencyModel) -> AllocationReport:
    """Placement quality of a node set: latency spread, internal cut, span."""
    node_list = list(nodes)
    if len(set(node_list)) != len(node_list):
        raise ValueError("allocation contains duplicate node ids")
    index = graph.index
    for node in node_list:
        if node not in index.node_cell or index.node_kind[node] != "compute":
            raise RoutingError(f"unknown compute endpoint {node!r}")
    if len(node_list) < 2:
        raise ValueError("allocation needs at least two nodes")
    ordered = tuple(sorted(node_list))
    worst = _max_latency_over(graph, model, ordered, exhaustive=None)
    half = len(ordered) // 2
    cut = bisection_bandwidth(graph, ordered[:half], ordered[half:], require_cover=False)
    cells = {index.node_cell[n] for n in ordered}
    return AllocationReport(
        nodes=ordered,
        max_pair_latency_ns=worst.latency_ns,
        max_pair=worst.pair,
        min_internal_bisection_gbps=cut,
        cells_spanned=len(cells),
    )
