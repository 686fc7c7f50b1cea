"""Deterministic expansion of a machine description into its fabric graph.

Inside every cell the leaf and spine switches form a complete bipartite
graph (one 200G link per leaf-spine pair).  Cells are connected all-to-all
by global spine-spine links, every unordered cell pair receiving the same
number of links.  Node attachment is rule-based per cell kind:

* Booster-style cells pair their leafs ((0,1), (2,3), ...) and node n
  (cell-local index) splits its NIC ports evenly over the two leafs of
  pair ``n mod pairs``.
* DC-style cells attach node n's ports to the single leaf ``n mod leafs``.
* Hybrid cells apply the paired rule to GPU-bearing rack groups over the
  first 4 leafs and round-robin the remaining rack groups over the rest.
* IO cells carry the storage appliances, their declared 200G/100G ports
  round-robining over the cell's leafs.

Gateways attach their ports over the IO-cell spines (over all spines when
no IO cell exists).  Split 100G links count half a physical 200G port
where the switch supports split mode; port budgets are enforced against
the switch radix.  Construction is pure and canonically ordered, so
identical specs yield identical graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .hardware import (
    FABRIC_SWITCH,
    GATEWAY_SWITCH,
    GLOBAL_LINK,
    LEAF_SPINE_LINK,
    ENDPOINT_HDR100,
    ENDPOINT_HDR200,
    LinkClass,
    MachineSpec,
)

TIER_LEAF = "Leaf"
TIER_SPINE = "Spine"
TIER_GATEWAY = "Gateway"

# Leafs reserved for GPU-style attachment inside a Hybrid cell.
HYBRID_GPU_LEAFS = 4


class TopologyError(ValueError):
    """The description cannot be expanded into a legal fabric."""


@dataclass(frozen=True)
class Endpoint:
    node_id: str
    port_index: int
    link_class: str


@dataclass(frozen=True)
class Switch:
    id: str
    tier: str
    cell_id: int | None  # None for gateways
    ports_used: float  # physical 200G port equivalents (split links count 0.5)
    radix: int


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    link_class: str
    length_m: float
    rate_gbps: int


@dataclass(frozen=True)
class Attach:
    leaf: str
    link_class: str
    length_m: float
    rate_gbps: int
    ports: int


@dataclass(frozen=True)
class CellLayout:
    cell_id: int
    kind: str
    leaf_ids: tuple[str, ...]
    spine_ids: tuple[str, ...]


@dataclass
class GraphIndex:
    node_cell: dict[str, int]
    node_kind: dict[str, str]  # "compute" | "storage"
    attachments: dict[str, tuple[Attach, ...]]
    switch_adj: dict[str, dict[str, tuple[float, str, int]]]
    switches: dict[str, Switch]
    cells: dict[int, CellLayout]
    compute_nodes: tuple[str, ...]


@dataclass
class FabricGraph:
    endpoints: tuple[Endpoint, ...]
    switches: tuple[Switch, ...]
    edges: tuple[Edge, ...]
    index: GraphIndex = field(compare=False, repr=False, default=None)

    def cell_layout(self, cell_id: int) -> CellLayout:
        try:
            return self.index.cells[cell_id]
        except KeyError:
            raise KeyError(f"unknown cell id {cell_id}") from None


@dataclass(frozen=True)
class SwitchCensus:
    spines: int
    leafs: int
    gateways: int
    fabric_total: int
    grand_total: int


@dataclass(frozen=True)
class LeafPortCensus:
    downlinks_100g: int
    downlinks_200g: int
    uplinks_100g: int
    uplinks_200g: int


def links_per_pair(spec: MachineSpec) -> int:
    """Global links per unordered cell pair.

    Chosen as the largest p such that every cell can spread its
    (cells-1) x p global links evenly over its spines within the spine
    port budget left after leaf downlinks.
    """
    cells = sorted(spec.cells, key=lambda c: c.id)
    if len(cells) < 2:
        return 0
    fabric = _fabric_switch(spec)
    peers = len(cells) - 1
    cap = None
    for cell in cells:
        spare = fabric.radix_200g_ports - cell.leafs
        if spare <= 0:
            raise TopologyError(
                f"cell {cell.id}: {cell.leafs} leafs leave no spine ports for global links"
            )
        cell_cap = spare * cell.spines // peers
        cap = cell_cap if cap is None else min(cap, cell_cap)
    for p in range(cap, 0, -1):
        if all((peers * p) % cell.spines == 0 for cell in cells):
            return p
    remainders = {cell.id: (peers * cap) % cell.spines for cell in cells if (peers * cap) % cell.spines}
    raise TopologyError(
        f"global links cannot be spread evenly over {peers} peer cells: "
        f"per-cell remainders {remainders}"
    )


def _fabric_switch(spec: MachineSpec):
    try:
        return spec.switch_types[FABRIC_SWITCH]
    except KeyError:
        raise TopologyError(f"switch_types must declare a {FABRIC_SWITCH!r} entry") from None


def _link(spec: MachineSpec, name: str) -> LinkClass:
    try:
        return spec.link_classes[name]
    except KeyError:
        raise TopologyError(f"link_classes must declare a {name!r} entry") from None


class _Builder:
    def __init__(self, spec: MachineSpec):
        self.spec = spec
        self.fabric = _fabric_switch(spec)
        self.endpoints: list[Endpoint] = []
        self.edges: list[Edge] = []
        self.port_units: dict[str, int] = {}  # half-port units per switch
        self.switch_meta: dict[str, tuple[str, int | None, int]] = {}  # tier, cell, radix
        self.node_cell: dict[str, int] = {}
        self.node_kind: dict[str, str] = {}
        self.attachments: dict[str, list[Attach]] = {}
        self.cells: dict[int, CellLayout] = {}

    # -- switch/port bookkeeping ------------------------------------------

    def add_switch(
        self, switch_id: str, tier: str, cell_id: int | None, radix: int, split: bool
    ) -> None:
        self.switch_meta[switch_id] = (tier, cell_id, radix, split)
        self.port_units[switch_id] = 0

    def _units(self, switch_id: str, link: LinkClass) -> int:
        # A 100G link is half a 200G port only where the switch splits ports.
        split_ok = self.switch_meta[switch_id][3]
        if link.rate_gbps == 100 and split_ok:
            return 1
        return 2

    def switch_edge(self, a: str, b: str, link: LinkClass) -> None:
        self.edges.append(Edge(a, b, link.name, link.length_m, link.rate_gbps))
        self.port_units[a] += self._units(a, link)
        self.port_units[b] += self._units(b, link)

    def endpoint_edge(self, node_id: str, port_index: int, leaf: str, link: LinkClass) -> None:
        self.endpoints.append(Endpoint(node_id, port_index, link.name))
        self.edges.append(Edge(node_id, leaf, link.name, link.length_m, link.rate_gbps))
        self.port_units[leaf] += self._units(leaf, link)

    def record_attach(self, node_id: str, leaf: str, link: LinkClass, ports: int) -> None:
        self.attachments.setdefault(node_id, []).append(
            Attach(leaf, link.name, link.length_m, link.rate_gbps, ports)
        )

    # -- cells -------------------------------------------------------------

    def build_cell(self, cell) -> None:
        leaf_ids = tuple(f"c{cell.id:02d}l{i:02d}" for i in range(cell.leafs))
        spine_ids = tuple(f"c{cell.id:02d}s{i:02d}" for i in range(cell.spines))
        for switch_id in leaf_ids:
            self.add_switch(
                switch_id, TIER_LEAF, cell.id,
                self.fabric.radix_200g_ports, self.fabric.split_mode_supported,
            )
        for switch_id in spine_ids:
            self.add_switch(
                switch_id, TIER_SPINE, cell.id,
                self.fabric.radix_200g_ports, self.fabric.split_mode_supported,
            )
        self.cells[cell.id] = CellLayout(cell.id, cell.kind, leaf_ids, spine_ids)

        leaf_spine = _link(self.spec, LEAF_SPINE_LINK)
        for leaf in leaf_ids:
            for spine in spine_ids:
                self.switch_edge(leaf, spine, leaf_spine)

        if cell.kind == "Hybrid":
            self._attach_hybrid(cell, leaf_ids)
        elif cell.kind == "Booster":
            self._attach_paired(cell, self._cell_nodes(cell), leaf_ids)
        elif cell.kind == "DC":
            self._attach_single(cell, self._cell_nodes(cell), leaf_ids)
        elif cell.rack_groups:
            raise TopologyError(f"cell {cell.id}: {cell.kind} cells cannot carry rack groups")

    def _cell_nodes(self, cell, groups=None) -> list[tuple[str, str]]:
        """Cell-local (node_id, node_type) in rack-group declaration order."""
        nodes = []
        start = len(self.node_cell_nodes(cell.id))
        for group in groups if groups is not None else cell.rack_groups:
            for _ in range(group.nodes):
                node_id = f"c{cell.id:02d}n{start + len(nodes):04d}"
                nodes.append((node_id, group.node_type))
        return nodes

    def node_cell_nodes(self, cell_id: int) -> list[str]:
        return [n for n, c in self.node_cell.items() if c == cell_id]

    def _node_ports(self, node_type: str) -> list[LinkClass]:
        ports: list[LinkClass] = []
        for nic in self.spec.node_types[node_type].nic_ports:
            ports.extend([_link(self.spec, nic.link_class)] * nic.count)
        return ports

    def _register_node(self, node_id: str, cell_id: int) -> None:
        self.node_cell[node_id] = cell_id
        self.node_kind[node_id] = "compute"

    def _attach_paired(self, cell, nodes, leafs) -> None:
        if len(leafs) < 2 or len(leafs) % 2:
            raise TopologyError(
                f"cell {cell.id}: paired attachment needs an even leaf count, got {len(leafs)}"
            )
        pairs = len(leafs) // 2
        for n, (node_id, node_type) in enumerate(nodes):
            self._register_node(node_id, cell.id)
            ports = self._node_ports(node_type)
            if len(ports) % 2:
                raise TopologyError(
                    f"cell {cell.id}: node type {node_type!r} has {len(ports)} NIC ports, "
                    "paired attachment needs an even count"
                )
            pair = n % pairs
            half = len(ports) // 2
            for leaf, chunk, base in (
                (leafs[2 * pair], ports[:half], 0),
                (leafs[2 * pair + 1], ports[half:], half),
            ):
                for k, link in enumerate(chunk):
                    self.endpoint_edge(node_id, base + k, leaf, link)
                if chunk:
                    self.record_attach(node_id, leaf, chunk[0], len(chunk))

    def _attach_single(self, cell, nodes, pool) -> None:
        if not pool:
            raise TopologyError(f"cell {cell.id}: no leafs available for attachment")
        for n, (node_id, node_type) in enumerate(nodes):
            self._register_node(node_id, cell.id)
            leaf = pool[n % len(pool)]
            ports = self._node_ports(node_type)
            for k, link in enumerate(ports):
                self.endpoint_edge(node_id, k, leaf, link)
            if ports:
                self.record_attach(node_id, leaf, ports[0], len(ports))

    def _attach_hybrid(self, cell, leafs) -> None:
        gpu_groups = [
            g for g in cell.rack_groups if self.spec.node_types[g.node_type].gpus
        ]
        cpu_groups = [
            g for g in cell.rack_groups if not self.spec.node_types[g.node_type].gpus
        ]
        gpu_leafs = leafs[:HYBRID_GPU_LEAFS]
        cpu_leafs = leafs[HYBRID_GPU_LEAFS:]
        if gpu_groups and len(gpu_leafs) < HYBRID_GPU_LEAFS:
            raise TopologyError(
                f"cell {cell.id}: hybrid cell needs at least {HYBRID_GPU_LEAFS} leafs "
                "for its GPU rack groups"
            )
        if cpu_groups and not cpu_leafs:
            raise TopologyError(
                f"cell {cell.id}: hybrid cell has no leafs left for CPU rack groups"
            )
        gpu_nodes = self._cell_nodes(cell, gpu_groups)
        self._attach_paired(cell, gpu_nodes, gpu_leafs)
        cpu_nodes = self._cell_nodes(cell, cpu_groups)
        self._attach_single(cell, cpu_nodes, cpu_leafs)

    # -- storage, global links, gateways ------------------------------------

    def attach_storage(self) -> None:
        storage = self.spec.storage
        if not storage.appliances:
            return
        io_leafs = [
            leaf
            for cell_id in sorted(self.cells)
            if self.cells[cell_id].kind == "IO"
            for leaf in self.cells[cell_id].leaf_ids
        ]
        io_cell = next(
            (cid for cid in sorted(self.cells) if self.cells[cid].kind == "IO"), None
        )
        if not io_leafs:
            return  # no IO cell: storage stays off the fabric
        port_seq = 0
        seq = 0
        for model in sorted(storage.appliances):
            appliance = storage.appliances[model]
            port_plan: list[LinkClass] = []
            if appliance.hdr_ports:
                port_plan += [_link(self.spec, ENDPOINT_HDR200)] * appliance.hdr_ports
            if appliance.hdr100_ports:
                port_plan += [_link(self.spec, ENDPOINT_HDR100)] * appliance.hdr100_ports
            for _ in range(appliance.count):
                node_id = f"c{io_cell:02d}x{seq:02d}"
                seq += 1
                self.node_cell[node_id] = io_cell
                self.node_kind[node_id] = "storage"
                for k, link in enumerate(port_plan):
                    leaf = io_leafs[port_seq % len(io_leafs)]
                    port_seq += 1
                    self.endpoint_edge(node_id, k, leaf, link)
                    self.record_attach(node_id, leaf, link, 1)

    def connect_cells(self) -> None:
        p = links_per_pair(self.spec)
        if p == 0:
            return
        link = _link(self.spec, GLOBAL_LINK)
        cell_ids = sorted(self.cells)
        rank = 0
        for i, a in enumerate(cell_ids):
            for b in cell_ids[i + 1 :]:
                spines_a = self.cells[a].spine_ids
                spines_b = self.cells[b].spine_ids
                for k in range(p):
                    # Offset by pair rank so sparse link counts still spread
                    # over the spine planes.
                    self.switch_edge(
                        spines_a[(rank + k) % len(spines_a)],
                        spines_b[(rank + k) % len(spines_b)],
                        link,
                    )
                rank += 1

    def attach_gateways(self) -> None:
        if self.spec.gateways == 0:
            return
        try:
            gateway = self.spec.switch_types[GATEWAY_SWITCH]
        except KeyError:
            raise TopologyError(
                f"gateways declared but switch_types has no {GATEWAY_SWITCH!r} entry"
            ) from None
        pool = [
            spine
            for cell_id in sorted(self.cells)
            if self.cells[cell_id].kind == "IO"
            for spine in self.cells[cell_id].spine_ids
        ]
        if not pool:
            pool = [
                spine
                for cell_id in sorted(self.cells)
                for spine in self.cells[cell_id].spine_ids
            ]
        link = _link(self.spec, LEAF_SPINE_LINK)
        port_seq = 0
        for g in range(self.spec.gateways):
            gateway_id = f"gw{g:02d}"
            self.add_switch(
                gateway_id, TIER_GATEWAY, None,
                gateway.radix_200g_ports, gateway.split_mode_supported,
            )
            for _ in range(gateway.radix_200g_ports):
                self.switch_edge(gateway_id, pool[port_seq % len(pool)], link)
                port_seq += 1

    # -- finalization --------------------------------------------------------

    def check_budgets(self) -> None:
        over = []
        for switch_id in sorted(self.switch_meta):
            radix = self.switch_meta[switch_id][2]
            used = self.port_units[switch_id] / 2.0
            if used > radix:
                over.append(f"{switch_id}: demand {used:g} ports exceeds radix {radix}")
        if over:
            raise TopologyError("port budget exceeded: " + "; ".join(over))

    def finish(self) -> FabricGraph:
        self.check_budgets()
        switches = tuple(
            Switch(
                id=switch_id,
                tier=self.switch_meta[switch_id][0],
                cell_id=self.switch_meta[switch_id][1],
                ports_used=self.port_units[switch_id] / 2.0,
                radix=self.switch_meta[switch_id][2],
            )
            for switch_id in sorted(self.switch_meta)
        )
        endpoints = tuple(sorted(self.endpoints, key=lambda e: (e.node_id, e.port_index)))
        edges = tuple(
            sorted(
                (
                    Edge(*sorted((e.a, e.b)), e.link_class, e.length_m, e.rate_gbps)
                    for e in self.edges
                ),
                key=lambda e: (e.a, e.b, e.link_class, e.length_m),
            )
        )
        switch_map = {s.id: s for s in switches}
        adj: dict[str, dict[str, tuple[float, str, int]]] = {s.id: {} for s in switches}
        for edge in edges:
            if edge.a in switch_map and edge.b in switch_map:
                # Parallel links collapse to one routing hop.
                adj[edge.a][edge.b] = (edge.length_m, edge.link_class, edge.rate_gbps)
                adj[edge.b][edge.a] = (edge.length_m, edge.link_class, edge.rate_gbps)
        index = GraphIndex(
            node_cell=dict(self.node_cell),
            node_kind=dict(self.node_kind),
            attachments={n: tuple(a) for n, a in self.attachments.items()},
            switch_adj=adj,
            switches=switch_map,
            cells=dict(self.cells),
            compute_nodes=tuple(
                sorted(n for n, kind in self.node_kind.items() if kind == "compute")
            ),
        )
        return FabricGraph(endpoints=endpoints, switches=switches, edges=edges, index=index)


def build_topology(spec: MachineSpec) -> FabricGraph:
    """Expand a machine description into its canonical fabric graph."""
    builder = _Builder(spec)
    for cell in sorted(spec.cells, key=lambda c: c.id):
        builder.build_cell(cell)
    builder.attach_storage()
    builder.connect_cells()
    builder.attach_gateways()
    return builder.finish()


# ---------------------------------------------------------------------------
# census queries

def switch_census(graph: FabricGraph) -> SwitchCensus:
    spines = sum(1 for s in graph.switches if s.tier == TIER_SPINE)
    leafs = sum(1 for s in graph.switches if s.tier == TIER_LEAF)
    gateways = sum(1 for s in graph.switches if s.tier == TIER_GATEWAY)
    fabric_total = spines + leafs
    return SwitchCensus(
        spines=spines,
        leafs=leafs,
        gateways=gateways,
        fabric_total=fabric_total,
        grand_total=fabric_total + gateways,
    )


def leaf_downlink_census(graph: FabricGraph, cell_id: int) -> dict[str, LeafPortCensus]:
    """Per-leaf port counts by role and rate for one cell."""
    layout = graph.cell_layout(cell_id)
    leaf_set = set(layout.leaf_ids)
    counts = {leaf: [0, 0, 0, 0] for leaf in layout.leaf_ids}
    switch_ids = set(graph.index.switches)
    for edge in graph.edges:
        for leaf, other in ((edge.a, edge.b), (edge.b, edge.a)):
            if leaf not in leaf_set:
                continue
            if other in switch_ids:
                slot = 2 if edge.rate_gbps == 100 else 3
            else:
                slot = 0 if edge.rate_gbps == 100 else 1
            counts[leaf][slot] += 1
    return {leaf: LeafPortCensus(*counts[leaf]) for leaf in layout.leaf_ids}


# ---------------------------------------------------------------------------
# exports

def edge_list_text(graph: FabricGraph) -> str:
    """Canonical edge list, one `a b rate_gbps length_m class` per line."""
    lines = [
        f"{e.a} {e.b} {e.rate_gbps} {e.length_m:g} {e.link_class}" for e in graph.edges
    ]
    return "\n".join(lines) + "\n"


def graph_to_dict(graph: FabricGraph) -> dict:
    return {
        "endpoints": [
            {"node_id": e.node_id, "port_index": e.port_index, "link_class": e.link_class}
            for e in graph.endpoints
        ],
        "switches": [
            {
                "id": s.id,
                "tier": s.tier,
                "cell_id": s.cell_id,
                "ports_used": s.ports_used,
                "radix": s.radix,
            }
            for s in graph.switches
        ],
        "edges": [
            {
                "a": e.a,
                "b": e.b,
                "link_class": e.link_class,
                "length_m": e.length_m,
                "rate_gbps": e.rate_gbps,
            }
            for e in graph.edges
        ],
    }
