"""Component graphs: typed nodes, ports, edges, validation, ordering.

A component graph is the abstract shape of a workflow before executables
and parameters are bound to it: nodes are processing components, ports are
their named file endpoints, and edges carry one output file into one input
port downstream.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import CycleError

NODE_ID_RE = re.compile(r"^[a-z0-9_-]{1,64}$")


class PortDirection(str, Enum):
    INPUT = "input"
    OUTPUT = "output"


class SizeClass(str, Enum):
    """Output data classes, ordered roughly by the volume they imply."""

    TEXT_HUGE = "text_huge"
    TEXT_MEDIUM = "text_medium"
    IMAGE_SMALL = "image_small"
    VIDEO_SMALL = "video_small"
    SCALAR = "scalar"


@dataclass(frozen=True)
class Port:
    name: str
    direction: PortDirection
    data_class: SizeClass


@dataclass(frozen=True)
class ComponentNode:
    id: str
    name: str
    ports: tuple[Port, ...] = ()
    profile_ref: str = ""

    def port(self, name: str) -> Port | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def input_ports(self) -> list[Port]:
        return [p for p in self.ports if p.direction is PortDirection.INPUT]

    def output_ports(self) -> list[Port]:
        return [p for p in self.ports if p.direction is PortDirection.OUTPUT]


@dataclass(frozen=True)
class Edge:
    """Directed data flow from one node's output port to another's input port."""

    from_node: str
    from_port: str
    to_node: str
    to_port: str

    def __str__(self) -> str:
        return f"{self.from_node}.{self.from_port} -> {self.to_node}.{self.to_port}"


@dataclass(frozen=True)
class ComponentGraph:
    nodes: tuple[ComponentNode, ...]
    edges: tuple[Edge, ...]

    def node(self, node_id: str) -> ComponentNode | None:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None

    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def edges_into(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.to_node == node_id]

    def edges_out_of(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.from_node == node_id]


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind} at {self.subject}" + (f": {self.detail}" if self.detail else "")


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, subject: str, detail: str = "") -> None:
        self.violations.append(Violation(kind, subject, detail))

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


def validate_graph(graph: ComponentGraph) -> ValidationReport:
    """Check every structural invariant; violations are report entries, never raises.

    An empty report means: node ids well-formed and unique, port names unique
    per node, every edge connects an existing output port to an existing input
    port of a different node, no input port has more than one incoming edge,
    and the graph is acyclic.
    """
    report = ValidationReport()
    seen_ids: set[str] = set()
    for node in graph.nodes:
        if not NODE_ID_RE.match(node.id):
            report.add("invalid-id", node.id, "node ids must match [a-z0-9_-]{1,64}")
        if node.id in seen_ids:
            report.add("duplicate-node", node.id)
        seen_ids.add(node.id)
        port_names: set[str] = set()
        for port in node.ports:
            if port.name in port_names:
                report.add("duplicate-port", f"{node.id}.{port.name}")
            port_names.add(port.name)

    fan_in: dict[tuple[str, str], int] = {}
    for edge in graph.edges:
        if edge.from_node == edge.to_node:
            report.add("self-loop", edge.from_node)
            continue
        src = graph.node(edge.from_node)
        dst = graph.node(edge.to_node)
        if src is None:
            report.add("dangling-edge", str(edge), f"unknown node '{edge.from_node}'")
            continue
        if dst is None:
            report.add("dangling-edge", str(edge), f"unknown node '{edge.to_node}'")
            continue
        src_port = src.port(edge.from_port)
        dst_port = dst.port(edge.to_port)
        if src_port is None:
            report.add("dangling-edge", str(edge), f"no port '{edge.from_port}' on '{src.id}'")
        elif src_port.direction is not PortDirection.OUTPUT:
            report.add("port-direction", str(edge), f"'{src.id}.{src_port.name}' is not an output")
        if dst_port is None:
            report.add("dangling-edge", str(edge), f"no port '{edge.to_port}' on '{dst.id}'")
        elif dst_port.direction is not PortDirection.INPUT:
            report.add("port-direction", str(edge), f"'{dst.id}.{dst_port.name}' is not an input")
        if dst_port is not None:
            key = (edge.to_node, edge.to_port)
            fan_in[key] = fan_in.get(key, 0) + 1

    for (node_id, port_name), count in sorted(fan_in.items()):
        if count > 1:
            report.add("fan-in", f"{node_id}.{port_name}", f"{count} incoming edges, at most 1 allowed")

    if _has_cycle(graph):
        report.add("cycle", "graph", "dependencies form a cycle")
    return report


def _adjacency(graph: ComponentGraph) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {n.id: set() for n in graph.nodes}
    for e in graph.edges:
        if e.from_node in adj and e.to_node in adj and e.from_node != e.to_node:
            adj[e.from_node].add(e.to_node)
    return adj


def _has_cycle(graph: ComponentGraph) -> bool:
    adj = _adjacency(graph)
    indeg = {n: 0 for n in adj}
    for targets in adj.values():
        for t in targets:
            indeg[t] += 1
    ready = [n for n, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        node = ready.pop()
        seen += 1
        for t in adj[node]:
            indeg[t] -= 1
            if indeg[t] == 0:
                ready.append(t)
    return seen != len(adj)


def topological_order(graph: ComponentGraph) -> list[str]:
    """Dependency-respecting node order, ties broken by node id.

    Kahn's algorithm with a min-heap over node ids, which yields the
    lexicographically smallest valid order; deterministic by construction.
    Raises CycleError when the graph is cyclic.
    """
    adj = _adjacency(graph)
    indeg = {n: 0 for n in adj}
    for targets in adj.values():
        for t in targets:
            indeg[t] += 1
    heap = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        node = heapq.heappop(heap)
        order.append(node)
        for t in sorted(adj[node]):
            indeg[t] -= 1
            if indeg[t] == 0:
                heapq.heappush(heap, t)
    if len(order) != len(adj):
        raise CycleError("graph contains a cycle; run validate_graph first")
    return order
