"""Bound workflows: graph + executables + parameter sweep, and their expansion.

A workflow stays abstract until every node is bound to an executable with
fixed arguments (the invariant part) and template arguments holding
``${param}`` placeholders (the variable part). Expansion takes the cartesian
product of the sweep axes and emits one job per (node, parameter point),
copying the graph's dependency edges into every sweep point.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    EmptyAxis,
    InvariantViolation,
    ParseError,
    UnboundNode,
    UnknownPlaceholder,
    ValidationFailed,
)
from .graphs import (
    ComponentGraph,
    ComponentNode,
    Edge,
    Port,
    PortDirection,
    SizeClass,
    validate_graph,
)
from .jobs import Job
from .resources import Estimate, ProfileRegistry, estimate_requirements

# `${name}` substitutes, `$${` escapes to a literal `${`, a bare `${` without
# a closing brace is an error.
_TOKEN_RE = re.compile(r"\$\$\{|\$\{([A-Za-z_][A-Za-z0-9_]*)\}|\$\{")


def placeholder_names(template: str) -> set[str]:
    names = set()
    for m in _TOKEN_RE.finditer(template):
        if m.group(1) is not None:
            names.add(m.group(1))
        elif m.group(0) == "${":
            raise UnknownPlaceholder(template[m.start():m.start() + 12], "unterminated")
    return names


def substitute(template: str, values: dict[str, object], where: str = "") -> str:
    out: list[str] = []
    pos = 0
    for m in _TOKEN_RE.finditer(template):
        out.append(template[pos:m.start()])
        if m.group(0) == "$${":
            out.append("${")
        elif m.group(1) is not None:
            name = m.group(1)
            if name not in values:
                raise UnknownPlaceholder(name, where)
            out.append(str(values[name]))
        else:
            raise UnknownPlaceholder(template[m.start():m.start() + 12], where)
        pos = m.end()
    out.append(template[pos:])
    return "".join(out)


@dataclass(frozen=True)
class NodeBinding:
    """Concrete configuration of one graph node.

    executable and fixed_args never vary across the sweep; variable_args,
    input_files values, and env values may carry placeholders. output_files
    maps each output port to the file name the component writes, so collection
    can find and classify artifacts. scale_param names the sweep parameter
    that drives the resource estimate (atom count for MD components).
    """

    node_id: str
    executable: str
    fixed_args: tuple[str, ...] = ()
    variable_args: tuple[str, ...] = ()
    input_files: dict[str, str] = field(default_factory=dict)
    output_files: dict[str, str] = field(default_factory=dict)
    env: dict[str, str] = field(default_factory=dict)
    checkpointable: bool = False
    scale_param: str | None = None

    def __post_init__(self):
        if not self.executable:
            raise InvariantViolation(f"binding for '{self.node_id}': executable must be non-empty")

    def templates(self) -> list[tuple[str, str]]:
        """All (where, template) pairs that may carry placeholders."""
        pairs = [(f"{self.node_id}.args", t) for t in self.variable_args]
        pairs += [(f"{self.node_id}.input_files[{p}]", t) for p, t in self.input_files.items()]
        pairs += [(f"{self.node_id}.output_files[{p}]", t) for p, t in self.output_files.items()]
        pairs += [(f"{self.node_id}.env[{k}]", t) for k, t in self.env.items()]
        return pairs


@dataclass(frozen=True)
class SweepSpec:
    axes: dict[str, tuple[object, ...]] = field(default_factory=dict)
    constants: dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        overlap = set(self.axes) & set(self.constants)
        if overlap:
            raise InvariantViolation(f"axis names collide with constants: {sorted(overlap)}")

    def declared(self) -> set[str]:
        return set(self.axes) | set(self.constants)

    def points(self) -> list[dict[str, object]]:
        """Cartesian product in axis declaration order."""
        for name, values in self.axes.items():
            if not values:
                raise EmptyAxis(name)
        names = list(self.axes)
        combos = itertools.product(*(self.axes[n] for n in names))
        return [dict(zip(names, combo), **self.constants) for combo in combos]

    def point_count(self) -> int:
        n = 1
        for values in self.axes.values():
            n *= len(values)
        return n


class WorkflowStatus(str, Enum):
    DRAFT = "draft"
    PUBLISHED = "published"


@dataclass
class Workflow:
    graph: ComponentGraph
    bindings: dict[str, NodeBinding]
    sweep: SweepSpec
    owner: str = ""
    status: WorkflowStatus = WorkflowStatus.DRAFT


def bind_workflow(
    graph: ComponentGraph,
    bindings: dict[str, NodeBinding],
    sweep: SweepSpec,
    owner: str = "",
) -> Workflow:
    """Attach bindings and a sweep to a validated graph, as a draft.

    Every node needs a binding, and every placeholder in any binding template
    must name a declared sweep axis or constant.
    """
    report = validate_graph(graph)
    if not report.ok:
        raise ValidationFailed([str(v) for v in report.violations])
    for node in graph.nodes:
        if node.id not in bindings:
            raise UnboundNode(node.id)
    known = {n.id for n in graph.nodes}
    for node_id in bindings:
        if node_id not in known:
            raise InvariantViolation(f"binding references unknown node '{node_id}'")
    declared = sweep.declared()
    for binding in bindings.values():
        for where, template in binding.templates():
            for name in placeholder_names(template):
                if name not in declared:
                    raise UnknownPlaceholder(name, where)
    return Workflow(graph=graph, bindings=dict(bindings), sweep=sweep, owner=owner)


@dataclass(frozen=True)
class ResolvedCommand:
    """A binding with every placeholder substituted for one sweep point."""

    executable: str
    argv: tuple[str, ...]
    env: dict[str, str]
    input_files: dict[str, str]
    output_files: dict[str, str]
    checkpointable: bool


@dataclass
class JobSet:
    workflow_run_id: str
    jobs: list[Job]
    dependencies: dict[str, list[str]]          # job id -> upstream job ids
    commands: dict[str, ResolvedCommand]
    node_of: dict[str, str] = field(default_factory=dict)

    def job(self, job_id: str) -> Job:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise KeyError(job_id)


def job_id_for(run_id: str, node_id: str, params: dict[str, object]) -> str:
    """Deterministic short id from the run, node, and parameter point."""
    vector = "|".join(f"{k}={params[k]}" for k in sorted(params))
    digest = hashlib.sha256(f"{run_id}|{node_id}|{vector}".encode()).hexdigest()
    return digest[:12]


def _workflow_fingerprint(workflow: Workflow) -> str:
    return hashlib.sha256(
        json.dumps(workflow_to_dict(workflow), sort_keys=True).encode()
    ).hexdigest()[:12]


def expand_sweep(
    workflow: Workflow,
    run_id: str | None = None,
    profiles: ProfileRegistry | None = None,
    max_attempts: int = 3,
) -> JobSet:
    """Cartesian expansion: one job per node per sweep point.

    run_id defaults to a fingerprint of the workflow itself so expanding the
    same workflow twice yields identical job ids. Estimates come from the
    node's resource profile scaled by the sweep parameter named in
    scale_param; without a profile registry a unit estimate is used.
    """
    report = validate_graph(workflow.graph)
    if not report.ok:
        raise ValidationFailed([str(v) for v in report.violations])
    if run_id is None:
        run_id = _workflow_fingerprint(workflow)

    jobs: list[Job] = []
    deps: dict[str, list[str]] = {}
    commands: dict[str, ResolvedCommand] = {}
    node_of: dict[str, str] = {}

    for point in workflow.sweep.points():
        ids_at_point = {
            node.id: job_id_for(run_id, node.id, point) for node in workflow.graph.nodes
        }
        for node in workflow.graph.nodes:
            binding = workflow.bindings[node.id]
            jid = ids_at_point[node.id]
            where = f"{node.id}@{jid}"
            argv = tuple(binding.fixed_args) + tuple(
                substitute(t, point, where) for t in binding.variable_args
            )
            command = ResolvedCommand(
                executable=binding.executable,
                argv=argv,
                env={k: substitute(v, point, where) for k, v in binding.env.items()},
                input_files={p: substitute(v, point, where) for p, v in binding.input_files.items()},
                output_files={p: substitute(v, point, where) for p, v in binding.output_files.items()},
                checkpointable=binding.checkpointable,
            )
            estimate = _estimate_for(binding, point, profiles, node)
            upstream = sorted(
                ids_at_point[e.from_node] for e in workflow.graph.edges_into(node.id)
            )
            jobs.append(
                Job(
                    id=jid,
                    workflow_run_id=run_id,
                    node_id=node.id,
                    params=dict(point),
                    estimate=estimate,
                    max_attempts=max_attempts,
                    depends_on=upstream,
                    checkpointable=binding.checkpointable,
                )
            )
            deps[jid] = upstream
            commands[jid] = command
            node_of[jid] = node.id

    return JobSet(
        workflow_run_id=run_id,
        jobs=jobs,
        dependencies=deps,
        commands=commands,
        node_of=node_of,
    )


def _estimate_for(
    binding: NodeBinding,
    point: dict[str, object],
    profiles: ProfileRegistry | None,
    node: ComponentNode,
) -> Estimate:
    if profiles is None or node.profile_ref not in profiles:
        return Estimate(runtime=1.0, memory=1.0, cores=1)
    profile = profiles.get(node.profile_ref)
    if binding.scale_param and binding.scale_param in point:
        scale = float(point[binding.scale_param])  # type: ignore[arg-type]
    else:
        scale = profile.reference_scale
    return estimate_requirements(profile, scale)


# -- JSON round trip ----------------------------------------------------------

def workflow_to_dict(workflow: Workflow) -> dict:
    return {
        "graph": {
            "nodes": [
                {
                    "id": n.id,
                    "name": n.name,
                    "profile": n.profile_ref,
                    "ports": [
                        {"name": p.name, "direction": p.direction.value, "class": p.data_class.value}
                        for p in n.ports
                    ],
                }
                for n in workflow.graph.nodes
            ],
            "edges": [
                {"from": f"{e.from_node}.{e.from_port}", "to": f"{e.to_node}.{e.to_port}"}
                for e in workflow.graph.edges
            ],
        },
        "bindings": {
            b.node_id: {
                "executable": b.executable,
                "fixed_args": list(b.fixed_args),
                "variable_args": list(b.variable_args),
                "input_files": dict(b.input_files),
                "output_files": dict(b.output_files),
                "env": dict(b.env),
                "checkpointable": b.checkpointable,
                "scale_param": b.scale_param,
            }
            for b in workflow.bindings.values()
        },
        "sweep": {
            "axes": {k: list(v) for k, v in workflow.sweep.axes.items()},
            "constants": dict(workflow.sweep.constants),
        },
        "owner": workflow.owner,
        "status": workflow.status.value,
    }


def _parse_endpoint(text: str, where: str) -> tuple[str, str]:
    if text.count(".") != 1:
        raise ParseError(f"edge endpoint '{text}' must be 'node.port'", field=where)
    node, port = text.split(".")
    return node, port


def workflow_from_dict(raw: dict, path: str = "") -> Workflow:
    try:
        gdict = raw["graph"]
        nodes = tuple(
            ComponentNode(
                id=n["id"],
                name=n.get("name", n["id"]),
                ports=tuple(
                    Port(
                        name=p["name"],
                        direction=PortDirection(p["direction"]),
                        data_class=SizeClass(p["class"]),
                    )
                    for p in n.get("ports", [])
                ),
                profile_ref=n.get("profile", ""),
            )
            for n in gdict["nodes"]
        )
        edges = []
        for e in gdict.get("edges", []):
            fn, fp = _parse_endpoint(e["from"], "edges.from")
            tn, tp = _parse_endpoint(e["to"], "edges.to")
            edges.append(Edge(from_node=fn, from_port=fp, to_node=tn, to_port=tp))
        graph = ComponentGraph(nodes=nodes, edges=tuple(edges))
        bindings = {
            node_id: NodeBinding(
                node_id=node_id,
                executable=b["executable"],
                fixed_args=tuple(b.get("fixed_args", [])),
                variable_args=tuple(b.get("variable_args", [])),
                input_files=dict(b.get("input_files", {})),
                output_files=dict(b.get("output_files", {})),
                env=dict(b.get("env", {})),
                checkpointable=bool(b.get("checkpointable", False)),
                scale_param=b.get("scale_param"),
            )
            for node_id, b in raw.get("bindings", {}).items()
        }
        sdict = raw.get("sweep", {})
        sweep = SweepSpec(
            axes={k: tuple(v) for k, v in sdict.get("axes", {}).items()},
            constants=dict(sdict.get("constants", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed workflow document: {exc!r}", path=path)
    return Workflow(
        graph=graph,
        bindings=bindings,
        sweep=sweep,
        owner=raw.get("owner", ""),
        status=WorkflowStatus(raw.get("status", "draft")),
    )


def load_workflow(path: str) -> Workflow:
    try:
        with open(path) as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ParseError("file not found", path=path)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno)
    return workflow_from_dict(raw, path=path)


def save_workflow(workflow: Workflow, path: str) -> None:
    with open(path, "w") as f:
        json.dump(workflow_to_dict(workflow), f, indent=2, sort_keys=True)
        f.write("\n")
