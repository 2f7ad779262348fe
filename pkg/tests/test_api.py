"""REST service: auth, role gating, runs, artifacts, idempotency."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from gatehub.api import create_app


@pytest.fixture()
def client(tmp_path) -> TestClient:
    app = create_app(str(tmp_path / "store"), allow_registration=False, admin_password="pw")
    return TestClient(app)


def login(client: TestClient, username: str, password: str) -> dict:
    r = client.post("/api/v1/auth/login", json={"username": username, "password": password})
    assert r.status_code == 200
    return {"Authorization": f"Bearer {r.json()['token']}"}


@pytest.fixture()
def admin(client) -> dict:
    return login(client, "admin", "pw")


def make_user(client, admin, username: str, role: str) -> dict:
    r = client.post(
        "/api/v1/users",
        json={"username": username, "password": "pw", "role": role},
        headers=admin,
    )
    assert r.status_code == 201
    return login(client, username, "pw")


# -- authentication -------------------------------------------------------------


def test_missing_token_is_401(client):
    assert client.get("/api/v1/labs").status_code == 401
    assert client.get("/api/v1/runs").status_code == 401


def test_bad_token_is_401(client):
    headers = {"Authorization": "Bearer bogus"}
    assert client.get("/api/v1/labs", headers=headers).status_code == 401


def test_bad_password_is_401(client):
    r = client.post("/api/v1/auth/login", json={"username": "admin", "password": "nope"})
    assert r.status_code == 401


def test_registration_disabled_by_default(client):
    r = client.post("/api/v1/auth/register", json={"username": "new", "password": "x"})
    assert r.status_code == 403


def test_registration_flag_enables_end_user_signup(tmp_path):
    app = create_app(str(tmp_path / "s2"), allow_registration=True, admin_password="pw")
    c = TestClient(app)
    r = c.post("/api/v1/auth/register", json={"username": "walkin", "password": "x"})
    assert r.status_code == 201
    assert r.json()["role"] == "end_user"
    headers = login(c, "walkin", "x")
    assert c.get("/api/v1/labs", headers=headers).status_code == 200


# -- role gating ---------------------------------------------------------------


def test_end_user_cannot_publish_or_manage(client, admin):
    end = make_user(client, admin, "eve", "end_user")
    assert client.post("/api/v1/templates/tem/1/publish", headers=end).status_code == 403
    assert client.get("/api/v1/users", headers=end).status_code == 403
    body = {"name": "x", "workflow": {}}
    assert client.post("/api/v1/templates", json=body, headers=end).status_code == 403


def test_power_user_authors_but_cannot_manage_users(client, admin):
    power = make_user(client, admin, "pat", "power_user")
    assert client.get("/api/v1/users", headers=power).status_code == 403
    doc = client.get("/api/v1/templates/tem/1", headers=power).json()["workflow"]
    r = client.post("/api/v1/templates", json={"name": "p1", "workflow": doc}, headers=power)
    assert r.status_code == 201
    assert client.post("/api/v1/templates/p1/1/publish", headers=power).status_code == 200


def test_admin_manages_users(client, admin):
    make_user(client, admin, "tmp", "end_user")
    users = client.get("/api/v1/users", headers=admin).json()
    assert {"username": "tmp", "role": "end_user"} in users
    assert client.delete("/api/v1/users/tmp", headers=admin).status_code == 204
    users = client.get("/api/v1/users", headers=admin).json()
    assert all(u["username"] != "tmp" for u in users)


def test_unknown_role_rejected(client, admin):
    r = client.post(
        "/api/v1/users",
        json={"username": "x", "password": "p", "role": "superuser"},
        headers=admin,
    )
    assert r.status_code == 422


# -- catalog and templates ----------------------------------------------------------


def test_labs_listing(client, admin):
    labs = client.get("/api/v1/labs", headers=admin).json()
    assert [lab["name"] for lab in labs] == ["tem", "afm-ss", "cn-rdf", "xrd", "nd"]
    assert all(lab["template_ref"] for lab in labs)


def test_template_listing_and_fetch(client, admin):
    listing = client.get("/api/v1/templates", headers=admin).json()
    assert {"tem", "general"} <= {t["name"] for t in listing}
    full = client.get("/api/v1/templates/general", headers=admin).json()
    assert full["version"] == 1
    assert len(full["workflow"]["graph"]["nodes"]) == 6
    assert client.get("/api/v1/templates/ghost", headers=admin).status_code == 404
    assert client.get("/api/v1/templates/general/99", headers=admin).status_code == 404


def test_publish_conflict_is_409(client, admin):
    doc = client.get("/api/v1/templates/tem/1", headers=admin).json()["workflow"]
    client.post("/api/v1/templates", json={"name": "dup", "workflow": doc}, headers=admin)
    r = client.post(
        "/api/v1/templates", json={"name": "dup", "workflow": doc, "version": 1}, headers=admin
    )
    assert r.status_code == 409


def test_clone_yields_new_draft(client, admin):
    r = client.post("/api/v1/templates/tem/clone", headers=admin)
    assert r.status_code == 201
    assert r.json()["version"] == 2
    assert not r.json()["published"]


# -- runs -------------------------------------------------------------------------


RUN_BODY = {
    "template": "tem",
    "sweep": {"axes": {"atoms": [840]}},
    "config": {"policy": {"safety": 1.0}, "sigma": 0.0},
}


def test_run_lifecycle(client, admin):
    end = make_user(client, admin, "runner", "end_user")
    r = client.post("/api/v1/runs", json=RUN_BODY, headers=end)
    assert r.status_code == 201
    body = r.json()
    assert body["status"] == "completed"
    assert body["summary"]["state_counts"] == {"finished": 2}
    run_id = body["run_id"]

    assert client.get("/api/v1/runs", headers=end).json()[0]["run_id"] == run_id
    record = client.get(f"/api/v1/runs/{run_id}", headers=end).json()
    assert record["submitter"] == "runner"

    summary = client.get(f"/api/v1/runs/{run_id}/summary", headers=end).json()
    assert summary["total"] == 2
    assert summary["faulty_attempts"] == []

    events = client.get(f"/api/v1/runs/{run_id}/events", headers=end).json()
    assert [e for e in events if e["to"] == "finished"]

    jobs = client.get(f"/api/v1/runs/{run_id}/jobs", headers=end).json()
    assert sorted(j["node"] for j in jobs) == ["atomeye", "lammps"]
    one = client.get(f"/api/v1/runs/{run_id}/jobs/{jobs[0]['job_id']}", headers=end).json()
    assert one["state"] == "finished"
    assert one["events"]

    missing = client.get(f"/api/v1/runs/{run_id}/jobs/nope", headers=end)
    assert missing.status_code == 404
    assert client.get("/api/v1/runs/ghost", headers=end).status_code == 404


def test_run_idempotency_key(client, admin):
    h = {**admin, "Idempotency-Key": "once"}
    r1 = client.post("/api/v1/runs", json=RUN_BODY, headers=h)
    r2 = client.post("/api/v1/runs", json=RUN_BODY, headers=h)
    assert (r1.status_code, r2.status_code) == (201, 200)
    assert r1.json()["run_id"] == r2.json()["run_id"]
    assert r2.json()["replayed"] is True
    runs = client.get("/api/v1/runs", headers=admin).json()
    assert len(runs) == 1


def test_run_validation_error_is_422(client, admin):
    assert client.post("/api/v1/runs", json={"template": 7}, headers=admin).status_code == 422
    r = client.post("/api/v1/runs", json={"template": "tem", "backend": "warp"}, headers=admin)
    assert r.status_code == 422


def test_unknown_template_in_run_is_404(client, admin):
    r = client.post("/api/v1/runs", json={"template": "ghost"}, headers=admin)
    assert r.status_code == 404


def test_resubmit_makes_new_run(client, admin):
    rid = client.post("/api/v1/runs", json=RUN_BODY, headers=admin).json()["run_id"]
    r = client.post(f"/api/v1/runs/{rid}/resubmit", headers=admin)
    assert r.status_code == 201
    assert r.json()["run_id"] != rid
    assert r.json()["status"] == "completed"


def test_cancel_completed_run_is_noop(client, admin):
    rid = client.post("/api/v1/runs", json=RUN_BODY, headers=admin).json()["run_id"]
    r = client.post(f"/api/v1/runs/{rid}/cancel", headers=admin)
    assert r.status_code == 200
    assert r.json()["status"] == "completed"


# -- artifacts ------------------------------------------------------------------------


def test_sim_artifacts_list_but_do_not_download(client, admin):
    rid = client.post("/api/v1/runs", json=RUN_BODY, headers=admin).json()["run_id"]
    arts = client.get(f"/api/v1/runs/{rid}/artifacts", headers=admin).json()
    assert len(arts) == 2
    assert all(a["path"].startswith("sim://") for a in arts)
    a = arts[0]
    r = client.get(f"/api/v1/runs/{rid}/artifacts/{a['job_id']}/{a['port']}", headers=admin)
    assert r.status_code == 404


def test_local_run_artifacts_download(client, admin):
    body = {
        "template": "tem",
        "backend": "local",
        "sweep": {"axes": {"atoms": [840]}},
        "config": {"policy": {"safety": 1.0}, "size_scale": 1e-3},
    }
    r = client.post("/api/v1/runs", json=body, headers=admin)
    assert r.status_code == 201
    rid = r.json()["run_id"]
    arts = client.get(f"/api/v1/runs/{rid}/artifacts", headers=admin).json()
    assert all(a["within_expected"] for a in arts)
    dump = next(a for a in arts if a["port"] == "dump")
    r = client.get(f"/api/v1/runs/{rid}/artifacts/{dump['job_id']}/dump", headers=admin)
    assert r.status_code == 200
    assert len(r.content) == dump["bytes"]


# -- sites ------------------------------------------------------------------------------


def test_sites_report_capacity(client, admin):
    sites = client.get("/api/v1/sites", headers=admin).json()
    queues = {q["name"]: q for q in sites[0]["queues"]}
    assert queues["ku-small"]["walltime"] == 90
    assert queues["kh-large"]["cores"] == 128
    assert all(q["idle_cores"] == q["cores"] for q in queues.values())
