"""Documented schemas actually describe what the code emits."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import pytest
from fastapi.testclient import TestClient

from gatehub.api import create_app
from gatehub.cli import main as cli_main
from gatehub.store import Store

DOCS = Path(__file__).resolve().parent.parent / "docs"
WORKFLOW_SCHEMA = json.loads((DOCS / "workflow.schema.json").read_text())
API_SCHEMA = json.loads((DOCS / "api.schema.json").read_text())
GENERAL = Path(__file__).resolve().parent.parent / "workflows" / "general.workflow.json"


def check(instance, def_name: str) -> None:
    schema = {"$defs": API_SCHEMA["$defs"], "$ref": f"#/$defs/{def_name}"}
    jsonschema.validate(instance, schema)


def test_bundled_workflow_matches_schema():
    doc = json.loads(GENERAL.read_text())
    jsonschema.validate(doc, WORKFLOW_SCHEMA)


def test_seeded_lab_templates_match_schema(tmp_path):
    store = Store(str(tmp_path / "s"))
    for entry in store.list_templates():
        jsonschema.validate(entry.workflow, WORKFLOW_SCHEMA)


def test_broken_workflow_rejected_by_schema():
    doc = json.loads(GENERAL.read_text())
    doc["graph"]["edges"][0] = {"from": "lammps", "to": "pizza.dump"}
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(doc, WORKFLOW_SCHEMA)


def test_api_payloads_match_schema(tmp_path):
    app = create_app(str(tmp_path / "store"), admin_password="pw")
    client = TestClient(app)

    login = client.post("/api/v1/auth/login", json={"username": "admin", "password": "pw"}).json()
    check(login, "loginResponse")
    headers = {"Authorization": f"Bearer {login['token']}"}

    for user in client.get("/api/v1/users", headers=headers).json():
        check(user, "userBrief")
    for tpl in client.get("/api/v1/templates", headers=headers).json():
        check(tpl, "templateBrief")
    for lab in client.get("/api/v1/labs", headers=headers).json():
        check(lab, "lab")
    for site in client.get("/api/v1/sites", headers=headers).json():
        check(site, "siteOccupancy")

    body = {
        "template": "xrd",
        "sweep": {"axes": {"atoms": [840, 1680]}},
        "config": {"policy": {"safety": 1.0}, "sigma": 0.0},
    }
    run = client.post("/api/v1/runs", json=body, headers=headers).json()
    check(run, "runBrief")
    rid = run["run_id"]

    check(client.get(f"/api/v1/runs/{rid}/summary", headers=headers).json(), "runSummary")
    for ev in client.get(f"/api/v1/runs/{rid}/events", headers=headers).json():
        check(ev, "transitionEvent")
    jobs = client.get(f"/api/v1/runs/{rid}/jobs", headers=headers).json()
    for job in jobs:
        check(job, "jobInfo")
    one = client.get(f"/api/v1/runs/{rid}/jobs/{jobs[0]['job_id']}", headers=headers).json()
    check(one, "jobInfo")
    for art in client.get(f"/api/v1/runs/{rid}/artifacts", headers=headers).json():
        check(art, "artifact")


def test_cli_json_outputs_match_schema(capsys):
    assert cli_main(["validate", str(GENERAL), "--json"]) == 0
    check(json.loads(capsys.readouterr().out), "cliValidation")

    assert cli_main(["expand", str(GENERAL), "--json"]) == 0
    expansion = json.loads(capsys.readouterr().out)
    check(expansion, "cliExpansion")
    assert len(expansion["jobs"]) == 6

    assert cli_main(["simulate", str(GENERAL), "--json", "--safety", "1.0", "--sigma", "0"]) == 0
    simulation = json.loads(capsys.readouterr().out)
    check(simulation, "cliSimulation")
    assert simulation["summary"]["state_counts"] == {"finished": 6}
