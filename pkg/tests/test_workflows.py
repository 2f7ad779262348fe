from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from gatehub.data import default_profiles, general_workflow
from gatehub.errors import EmptyAxis, UnboundNode, UnknownPlaceholder
from gatehub.graphs import ComponentGraph, ComponentNode, Edge, Port, PortDirection, SizeClass
from gatehub.workflows import (
    NodeBinding,
    SweepSpec,
    bind_workflow,
    expand_sweep,
    load_workflow,
    substitute,
    workflow_from_dict,
    workflow_to_dict,
)

REPO_ROOT = Path(__file__).resolve().parent.parent


def simple_node(nid: str, inputs=(), outputs=("out",)) -> ComponentNode:
    ports = tuple(
        [Port(p, PortDirection.INPUT, SizeClass.SCALAR) for p in inputs]
        + [Port(p, PortDirection.OUTPUT, SizeClass.SCALAR) for p in outputs]
    )
    return ComponentNode(id=nid, name=nid, ports=ports, profile_ref="")


def single_node_workflow(sweep: SweepSpec, variable_args=("--temp", "${T}")):
    graph = ComponentGraph(nodes=(simple_node("solo"),), edges=())
    bindings = {
        "solo": NodeBinding(node_id="solo", executable="mock-lammps", variable_args=tuple(variable_args))
    }
    return bind_workflow(graph, bindings, sweep)


# -- substitution --------------------------------------------------------------

def test_substitute_basic():
    assert substitute("t=${T}", {"T": 300}) == "t=300"


def test_substitute_escape():
    assert substitute("literal $${T}", {"T": 300}) == "literal ${T}"


def test_substitute_unknown_raises():
    with pytest.raises(UnknownPlaceholder):
        substitute("${missing}", {})


def test_substitute_unterminated_raises():
    with pytest.raises(UnknownPlaceholder):
        substitute("broken ${T", {"T": 1})


# -- binding --------------------------------------------------------------------

def test_bind_with_declared_axis():
    wf = single_node_workflow(SweepSpec(axes={"T": (300,)}))
    assert set(wf.bindings) == {"solo"}


def test_bind_undeclared_placeholder():
    with pytest.raises(UnknownPlaceholder) as err:
        single_node_workflow(SweepSpec(axes={}))
    assert "T" in str(err.value)


def test_bind_constant_satisfies_placeholder():
    wf = single_node_workflow(SweepSpec(constants={"T": 300}))
    assert wf.sweep.constants["T"] == 300


def test_bind_missing_binding():
    graph = ComponentGraph(nodes=(simple_node("solo"),), edges=())
    with pytest.raises(UnboundNode):
        bind_workflow(graph, {}, SweepSpec())


# -- expansion -------------------------------------------------------------------

def test_expand_three_by_two():
    wf = single_node_workflow(
        SweepSpec(axes={"T": (300, 600, 900), "size": (10, 20)}),
        variable_args=("--temp", "${T}", "--size", "${size}"),
    )
    js = expand_sweep(wf)
    assert len(js.jobs) == 6
    temps = {(j.params["T"], j.params["size"]) for j in js.jobs}
    assert temps == {(t, s) for t in (300, 600, 900) for s in (10, 20)}


def test_expand_no_axes_copies_graph_edges():
    nodes = (
        simple_node("a"),
        simple_node("b", inputs=("in",)),
        simple_node("c", inputs=("in",)),
        simple_node("d"),
    )
    edges = (Edge("a", "out", "b", "in"), Edge("a", "out", "c", "in"))
    graph = ComponentGraph(nodes=nodes, edges=edges)
    bindings = {n.id: NodeBinding(node_id=n.id, executable="true") for n in nodes}
    js = expand_sweep(bind_workflow(graph, bindings, SweepSpec()))
    assert len(js.jobs) == 4
    by_node = {js.node_of[j.id]: j for j in js.jobs}
    assert by_node["b"].depends_on == [by_node["a"].id]
    assert by_node["c"].depends_on == [by_node["a"].id]
    assert by_node["d"].depends_on == []


def test_expand_chirality_axis_independent_chains():
    nodes = (simple_node("lammps"), simple_node("r", inputs=("in",), outputs=()))
    graph = ComponentGraph(nodes=nodes, edges=(Edge("lammps", "out", "r", "in"),))
    bindings = {
        "lammps": NodeBinding(node_id="lammps", executable="mock-lammps",
                              variable_args=("--size", "${chirality}")),
        "r": NodeBinding(node_id="r", executable="mock-r"),
    }
    sweep = SweepSpec(axes={"chirality": ("10x10", "20x20", "30x30", "40x40")})
    js = expand_sweep(bind_workflow(graph, bindings, sweep))
    assert len(js.jobs) == 8
    r_jobs = [j for j in js.jobs if js.node_of[j.id] == "r"]
    lammps_ids = {j.params["chirality"]: j.id for j in js.jobs if js.node_of[j.id] == "lammps"}
    for rj in r_jobs:
        # Each analysis depends only on the simulation at its own sweep point.
        assert rj.depends_on == [lammps_ids[rj.params["chirality"]]]


def test_expand_empty_axis_raises():
    wf = single_node_workflow(SweepSpec(axes={"T": ()}))
    with pytest.raises(EmptyAxis):
        expand_sweep(wf)


def test_expand_deterministic():
    wf = single_node_workflow(SweepSpec(axes={"T": (300, 600)}))
    a = expand_sweep(wf)
    b = expand_sweep(wf)
    assert [j.id for j in a.jobs] == [j.id for j in b.jobs]
    assert [a.commands[j.id].argv for j in a.jobs] == [b.commands[j.id].argv for j in b.jobs]


def test_expand_distinct_run_ids_distinct_job_ids():
    wf = single_node_workflow(SweepSpec(axes={"T": (300,)}))
    a = expand_sweep(wf, run_id="run-1")
    b = expand_sweep(wf, run_id="run-2")
    assert a.jobs[0].id != b.jobs[0].id


def test_expand_uses_profiles_for_estimates():
    wf = general_workflow()
    js = expand_sweep(wf, profiles=default_profiles())
    lammps_job = next(j for j in js.jobs if js.node_of[j.id] == "lammps")
    # 180 min at 2520 atoms scaled down to the 840-atom sweep point.
    assert lammps_job.estimate.runtime == pytest.approx(60.0)


# -- randomized properties --------------------------------------------------------

names = st.sampled_from(["alpha", "beta", "gamma", "delta", "epsilon"])


@st.composite
def random_workflow(draw):
    n_nodes = draw(st.integers(min_value=1, max_value=5))
    node_ids = [f"n{i}" for i in range(n_nodes)]
    nodes = []
    edges = []
    for i, nid in enumerate(node_ids):
        inputs = [f"in{j}" for j in range(i)]
        nodes.append(simple_node(nid, inputs=inputs))
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if draw(st.booleans()):
                edges.append(Edge(node_ids[i], "out", node_ids[j], f"in{i}"))
    n_axes = draw(st.integers(min_value=0, max_value=4))
    axes = {}
    axis_names = draw(st.lists(names, min_size=n_axes, max_size=n_axes, unique=True))
    for name in axis_names:
        size = draw(st.integers(min_value=1, max_value=5))
        axes[name] = tuple(range(size))
    bindings = {}
    for nid in node_ids:
        var = tuple(f"--{a}=${{{a}}}" for a in axes)
        bindings[nid] = NodeBinding(node_id=nid, executable="true", variable_args=var)
    graph = ComponentGraph(nodes=tuple(nodes), edges=tuple(edges))
    return bind_workflow(graph, bindings, SweepSpec(axes=axes)), edges


@settings(max_examples=60)
@given(random_workflow())
def test_expand_count_and_substitution(wf_edges):
    wf, edges = wf_edges
    js = expand_sweep(wf)
    expected = len(wf.graph.nodes) * wf.sweep.point_count()
    assert len(js.jobs) == expected
    for j in js.jobs:
        for arg in js.commands[j.id].argv:
            assert "${" not in arg
    # Per sweep point, the dependency graph mirrors the component graph.
    points: dict[str, list] = {}
    for j in js.jobs:
        key = repr(sorted(j.params.items()))
        points.setdefault(key, []).append(j)
    for group in points.values():
        by_node = {js.node_of[j.id]: j for j in group}
        for j in group:
            dep_nodes = sorted(js.node_of[d] for d in j.depends_on)
            want = sorted(e.from_node for e in edges if e.to_node == js.node_of[j.id])
            assert dep_nodes == want


# -- serialization -----------------------------------------------------------------

def test_round_trip_preserves_document():
    wf = general_workflow()
    doc = workflow_to_dict(wf)
    again = workflow_to_dict(workflow_from_dict(doc))
    assert doc == again


def test_bundled_general_workflow_loads_and_expands():
    wf = load_workflow(str(REPO_ROOT / "workflows/general.workflow.json"))
    js = expand_sweep(wf)
    assert len(js.jobs) == 6


def test_repo_copy_matches_package_copy():
    packaged = workflow_to_dict(general_workflow())
    repo = workflow_to_dict(load_workflow(str(REPO_ROOT / "workflows/general.workflow.json")))
    assert packaged == repo
