"""File-backed repository: templates, virtual-lab catalog, runs, users.

Single-directory layout, JSON documents plus newline-delimited event logs:

    store/
      users.json
      tokens.json
      idempotency.json
      labs.json
      templates/<name>/<version>.json
      runs/<id>/record.json
      runs/<id>/events.ndjson
      runs/<id>/work/          (local-backend job directories)

Writes go through one process-wide lock per store; documents are written
atomically (tmp file + rename) so a crash never leaves half a JSON file.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass, field

from .data import bundled_json
from .errors import UnknownRun, ValidationFailed, VersionConflict
from .graphs import validate_graph
from .workflows import Workflow, workflow_from_dict


@dataclass(frozen=True)
class TemplateEntry:
    name: str
    version: int
    workflow: dict          # serialized workflow document
    owner: str
    published: bool
    description: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "workflow": self.workflow,
            "owner": self.owner,
            "published": self.published,
            "description": self.description,
        }

    def load(self) -> Workflow:
        return workflow_from_dict(self.workflow)


@dataclass(frozen=True)
class VirtualLab:
    name: str
    method: str
    components: tuple[str, ...]
    template_ref: str
    description: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "method": self.method,
            "components": list(self.components),
            "template_ref": self.template_ref,
            "description": self.description,
        }


# Virtual-lab catalog: method label -> component node subset of the general
# workflow. Each lab's template is that subgraph with its bindings.
LAB_SPECS = [
    ("tem", "TEM", ("lammps", "atomeye"), "electron-microscopy style image series"),
    ("afm-ss", "AFM/SS", ("lammps", "r"), "force-distance and stress-strain curves"),
    ("cn-rdf", "CN-RDF", ("lammps", "r"), "coordination numbers and radial distribution"),
    ("xrd", "XRD", ("lammps", "debyer", "r"), "x-ray diffraction patterns"),
    ("nd", "ND", ("lammps", "debyer", "r"), "neutron diffraction patterns"),
]


def _lab_workflow_doc(general: dict, components: tuple[str, ...]) -> dict:
    """Carve the lab's component subset out of the general workflow document."""
    keep = set(components)
    nodes = [n for n in general["graph"]["nodes"] if n["id"] in keep]
    edges = [
        e
        for e in general["graph"]["edges"]
        if e["from"].split(".")[0] in keep and e["to"].split(".")[0] in keep
    ]
    # The TEM lab drops the converter: attach the renderer straight to the
    # simulation output so the chain stays connected.
    if keep == {"lammps", "atomeye"}:
        edges = [{"from": "lammps.dump", "to": "atomeye.converted"}]
    bindings = {k: v for k, v in general["bindings"].items() if k in keep}
    return {
        "graph": {"nodes": nodes, "edges": edges},
        "bindings": bindings,
        "sweep": {"axes": {"atoms": [840, 1680, 2520, 3360]}, "constants": {}},
        "owner": "system",
        "status": "published",
    }


@dataclass
class RunRecord:
    run_id: str
    template: str
    template_version: int
    workflow: dict
    sweep: dict
    submitter: str
    backend: str                 # "sim" | "local"
    config: dict
    sites: dict                  # inline site configuration document
    status: str = "running"      # running | completed | cancelled
    created_at: float = 0.0
    ended_at: float | None = None
    job_states: dict[str, dict] = field(default_factory=dict)
    artifact_index: list[dict] = field(default_factory=list)
    summary: dict | None = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "template": self.template,
            "template_version": self.template_version,
            "workflow": self.workflow,
            "sweep": self.sweep,
            "submitter": self.submitter,
            "backend": self.backend,
            "config": self.config,
            "sites": self.sites,
            "status": self.status,
            "created_at": self.created_at,
            "ended_at": self.ended_at,
            "job_states": self.job_states,
            "artifact_index": self.artifact_index,
            "summary": self.summary,
        }

    @staticmethod
    def from_dict(raw: dict) -> "RunRecord":
        return RunRecord(**raw)


def _atomic_write(path: str, payload: dict) -> None:
    d = os.path.dirname(path)
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


class Store:
    def __init__(self, root: str, seed_catalog: bool = True):
        self.root = root
        self._lock = threading.Lock()
        os.makedirs(os.path.join(root, "templates"), exist_ok=True)
        os.makedirs(os.path.join(root, "runs"), exist_ok=True)
        if seed_catalog and not os.path.exists(self._labs_path()):
            self._seed()

    # -- paths ---------------------------------------------------------------

    def _labs_path(self) -> str:
        return os.path.join(self.root, "labs.json")

    def _template_path(self, name: str, version: int) -> str:
        return os.path.join(self.root, "templates", name, f"{version}.json")

    def _run_dir(self, run_id: str) -> str:
        return os.path.join(self.root, "runs", run_id)

    def run_events_path(self, run_id: str) -> str:
        return os.path.join(self._run_dir(run_id), "events.ndjson")

    def run_workdir(self, run_id: str) -> str:
        return os.path.join(self._run_dir(run_id), "work")

    # -- seeding ---------------------------------------------------------------

    def _seed(self) -> None:
        general = bundled_json("workflows/general.workflow.json")
        self.save_template(
            "general",
            general,
            owner="system",
            description="full six-component analysis pipeline",
            publish=True,
        )
        labs = []
        for name, method, components, description in LAB_SPECS:
            doc = _lab_workflow_doc(general, components)
            self.save_template(
                name, doc, owner="system",
                description=f"{method}: {description}", publish=True,
            )
            labs.append(
                VirtualLab(
                    name=name,
                    method=method,
                    components=components,
                    template_ref=name,
                    description=description,
                ).to_dict()
            )
        _atomic_write(self._labs_path(), {"labs": labs})

    # -- templates ---------------------------------------------------------------

    def save_template(
        self,
        name: str,
        workflow_doc: dict,
        owner: str,
        description: str = "",
        publish: bool = False,
        version: int | None = None,
    ) -> TemplateEntry:
        """Store a new template version; published versions are immutable."""
        wf = workflow_from_dict(workflow_doc)
        report = validate_graph(wf.graph)
        if not report.ok:
            raise ValidationFailed([str(v) for v in report.violations])
        with self._lock:
            if version is None:
                version = self._latest_version(name) + 1
            path = self._template_path(name, version)
            if os.path.exists(path):
                raise VersionConflict(f"template {name} v{version} already exists")
            entry = TemplateEntry(
                name=name,
                version=version,
                workflow=workflow_doc,
                owner=owner,
                published=publish,
                description=description,
            )
            _atomic_write(path, entry.to_dict())
            return entry

    def _latest_version(self, name: str) -> int:
        d = os.path.join(self.root, "templates", name)
        if not os.path.isdir(d):
            return 0
        versions = [int(f[:-5]) for f in os.listdir(d) if f.endswith(".json")]
        return max(versions, default=0)

    def get_template(self, name: str, version: int | None = None) -> TemplateEntry:
        if version is None:
            version = self._latest_version(name)
        path = self._template_path(name, version)
        if not os.path.exists(path):
            raise KeyError(f"template {name} v{version}")
        with open(path) as f:
            raw = json.load(f)
        return TemplateEntry(**raw)

    def list_templates(self, published_only: bool = False) -> list[TemplateEntry]:
        out = []
        base = os.path.join(self.root, "templates")
        for name in sorted(os.listdir(base)):
            latest = self._latest_version(name)
            if latest:
                entry = self.get_template(name, latest)
                if entry.published or not published_only:
                    out.append(entry)
        return out

    def publish_template(self, name: str, version: int) -> TemplateEntry:
        entry = self.get_template(name, version)
        if entry.published:
            raise VersionConflict(f"template {name} v{version} is already published")
        frozen = TemplateEntry(
            name=entry.name,
            version=entry.version,
            workflow=entry.workflow,
            owner=entry.owner,
            published=True,
            description=entry.description,
        )
        with self._lock:
            _atomic_write(self._template_path(name, version), frozen.to_dict())
        return frozen

    def clone_template(self, name: str, version: int | None, new_owner: str) -> TemplateEntry:
        """Published templates stay frozen; cloning yields an editable draft."""
        src = self.get_template(name, version)
        return self.save_template(
            name,
            src.workflow,
            owner=new_owner,
            description=src.description,
            publish=False,
        )

    # -- labs -----------------------------------------------------------------

    def catalog(self) -> list[VirtualLab]:
        with open(self._labs_path()) as f:
            raw = json.load(f)
        return [
            VirtualLab(
                name=entry["name"],
                method=entry["method"],
                components=tuple(entry["components"]),
                template_ref=entry["template_ref"],
                description=entry.get("description", ""),
            )
            for entry in raw["labs"]
        ]

    # -- runs ------------------------------------------------------------------

    def create_run(self, record: RunRecord) -> None:
        with self._lock:
            os.makedirs(self._run_dir(record.run_id), exist_ok=True)
            _atomic_write(os.path.join(self._run_dir(record.run_id), "record.json"), record.to_dict())

    def update_run(self, record: RunRecord) -> None:
        path = os.path.join(self._run_dir(record.run_id), "record.json")
        if not os.path.exists(path):
            raise UnknownRun(record.run_id)
        with self._lock:
            _atomic_write(path, record.to_dict())

    def get_run(self, run_id: str) -> RunRecord:
        path = os.path.join(self._run_dir(run_id), "record.json")
        if not os.path.exists(path):
            raise UnknownRun(run_id)
        with open(path) as f:
            return RunRecord.from_dict(json.load(f))

    def list_runs(self) -> list[RunRecord]:
        base = os.path.join(self.root, "runs")
        out = []
        for run_id in sorted(os.listdir(base)):
            if os.path.exists(os.path.join(base, run_id, "record.json")):
                out.append(self.get_run(run_id))
        return out

    def open_event_log(self, run_id: str, fresh: bool = False):
        os.makedirs(self._run_dir(run_id), exist_ok=True)
        mode = "w" if fresh else "a"
        return open(self.run_events_path(run_id), mode)

    def read_events(self, run_id: str) -> list[dict]:
        path = self.run_events_path(run_id)
        if not os.path.exists(path):
            return []
        out = []
        with open(path) as f:
            for line in f:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    # -- idempotency -------------------------------------------------------------

    def _idempotency_path(self) -> str:
        return os.path.join(self.root, "idempotency.json")

    def idempotency_lookup(self, key: str) -> str | None:
        path = self._idempotency_path()
        if not os.path.exists(path):
            return None
        with open(path) as f:
            return json.load(f).get(key)

    def idempotency_record(self, key: str, run_id: str) -> None:
        with self._lock:
            path = self._idempotency_path()
            data = {}
            if os.path.exists(path):
                with open(path) as f:
                    data = json.load(f)
            data[key] = run_id
            _atomic_write(path, data)

    # -- generic small documents (users, tokens) -----------------------------------

    def read_doc(self, name: str) -> dict:
        path = os.path.join(self.root, name)
        if not os.path.exists(path):
            return {}
        with open(path) as f:
            return json.load(f)

    def write_doc(self, name: str, payload: dict) -> None:
        with self._lock:
            _atomic_write(os.path.join(self.root, name), payload)
