"""REST service: role-gated access to templates, labs, runs, and artifacts.

All routes live under /api/v1. Every route except login and registration
requires a bearer token from POST /api/v1/auth/login. Failures map to
401 (bad or missing token), 403 (role not allowed), 404 (unknown resource),
409 (version conflict), and 422 (invalid payload).
"""

from __future__ import annotations

import os

from fastapi import Depends, FastAPI, Header, Request
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel

from .authz import Accounts, Role, User, check
from .errors import (
    AuthenticationFailed,
    GatehubError,
    PermissionDenied,
    UnknownRun,
    ValidationFailed,
    VersionConflict,
)
from .scheduling import poll
from .service import (
    cancel_run,
    execute_run,
    new_run_record,
    recover_incomplete,
    resubmit_run,
)
from .store import Store

API_PREFIX = "/api/v1"


class LoginBody(BaseModel):
    username: str
    password: str


class UserBody(BaseModel):
    username: str
    password: str
    role: str


class TemplateBody(BaseModel):
    name: str
    workflow: dict
    description: str = ""
    version: int | None = None


class RunBody(BaseModel):
    template: str
    version: int | None = None
    sweep: dict | None = None
    backend: str = "sim"
    config: dict | None = None
    sites: dict | None = None


def _template_brief(entry) -> dict:
    return {
        "name": entry.name,
        "version": entry.version,
        "owner": entry.owner,
        "published": entry.published,
        "description": entry.description,
    }


def _run_brief(record) -> dict:
    return {
        "run_id": record.run_id,
        "template": record.template,
        "template_version": record.template_version,
        "submitter": record.submitter,
        "backend": record.backend,
        "status": record.status,
        "created_at": record.created_at,
        "ended_at": record.ended_at,
    }


def create_app(
    store_root: str | None = None,
    allow_registration: bool | None = None,
    admin_password: str | None = None,
) -> FastAPI:
    store_root = store_root or os.environ.get("GATEHUB_STORE", "gatehub-store")
    if allow_registration is None:
        allow_registration = os.environ.get("GATEHUB_ALLOW_REGISTRATION", "") == "1"
    admin_password = admin_password or os.environ.get("GATEHUB_ADMIN_PASSWORD", "admin")

    store = Store(store_root)
    accounts = Accounts(store, bootstrap_admin_password=admin_password)
    recover_incomplete(store)

    app = FastAPI(title="gatehub", version="1.0")
    app.state.store = store
    app.state.accounts = accounts

    # Serve prebuilt web assets when present; the API works fine without them.
    ui_dir = os.environ.get("GATEHUB_UI_DIR", "")
    if ui_dir and os.path.isdir(ui_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    # -- error mapping -------------------------------------------------------

    @app.exception_handler(GatehubError)
    async def _gatehub_error(request: Request, exc: GatehubError):
        if isinstance(exc, AuthenticationFailed):
            code = 401
        elif isinstance(exc, PermissionDenied):
            code = 403
        elif isinstance(exc, UnknownRun):
            code = 404
        elif isinstance(exc, VersionConflict):
            code = 409
        elif isinstance(exc, ValidationFailed):
            code = 422
        else:
            code = 400
        return JSONResponse(status_code=code, content={"detail": str(exc)})

    @app.exception_handler(KeyError)
    async def _key_error(request: Request, exc: KeyError):
        return JSONResponse(status_code=404, content={"detail": f"not found: {exc.args[0]}"})

    # -- auth ------------------------------------------------------------------

    def current_user(authorization: str | None = Header(default=None)) -> User:
        if not authorization or not authorization.startswith("Bearer "):
            raise AuthenticationFailed("missing bearer token")
        return accounts.resolve(authorization.removeprefix("Bearer "))

    def requires(action: str):
        def dep(user: User = Depends(current_user)) -> User:
            check(user, action)
            return user

        return dep

    @app.post(API_PREFIX + "/auth/login")
    def login(body: LoginBody):
        token = accounts.login(body.username, body.password)
        user = accounts.get_user(body.username)
        return {"token": token, "username": user.username, "role": user.role.value}

    @app.post(API_PREFIX + "/auth/register", status_code=201)
    def register(body: LoginBody):
        if not allow_registration:
            raise PermissionDenied("self-registration is disabled; ask an administrator")
        user = accounts.add_user(body.username, body.password, Role.END_USER)
        return {"username": user.username, "role": user.role.value}

    # -- users (admin only) ------------------------------------------------------

    @app.get(API_PREFIX + "/users")
    def list_users(user: User = Depends(requires("users.manage"))):
        return [{"username": u.username, "role": u.role.value} for u in accounts.list_users()]

    @app.post(API_PREFIX + "/users", status_code=201)
    def create_user(body: UserBody, user: User = Depends(requires("users.manage"))):
        try:
            role = Role(body.role)
        except ValueError:
            raise ValidationFailed([f"unknown role {body.role!r}"])
        created = accounts.add_user(body.username, body.password, role)
        return {"username": created.username, "role": created.role.value}

    @app.delete(API_PREFIX + "/users/{username}", status_code=204)
    def delete_user(username: str, user: User = Depends(requires("users.manage"))):
        accounts.remove_user(username)

    # -- templates ----------------------------------------------------------------

    @app.get(API_PREFIX + "/templates")
    def list_templates(user: User = Depends(requires("templates.read"))):
        return [_template_brief(t) for t in store.list_templates()]

    @app.get(API_PREFIX + "/templates/{name}")
    def get_template_latest(name: str, user: User = Depends(requires("templates.read"))):
        return store.get_template(name).to_dict()

    @app.get(API_PREFIX + "/templates/{name}/{version}")
    def get_template(name: str, version: int, user: User = Depends(requires("templates.read"))):
        return store.get_template(name, version).to_dict()

    @app.post(API_PREFIX + "/templates", status_code=201)
    def create_template(body: TemplateBody, user: User = Depends(requires("templates.create"))):
        entry = store.save_template(
            body.name,
            body.workflow,
            owner=user.username,
            description=body.description,
            version=body.version,
        )
        return _template_brief(entry)

    @app.post(API_PREFIX + "/templates/{name}/{version}/publish")
    def publish_template(
        name: str, version: int, user: User = Depends(requires("templates.publish"))
    ):
        return _template_brief(store.publish_template(name, version))

    @app.post(API_PREFIX + "/templates/{name}/clone", status_code=201)
    def clone_template(name: str, user: User = Depends(requires("templates.create"))):
        return _template_brief(store.clone_template(name, None, new_owner=user.username))

    # -- labs -----------------------------------------------------------------------

    @app.get(API_PREFIX + "/labs")
    def list_labs(user: User = Depends(requires("labs.read"))):
        return [lab.to_dict() for lab in store.catalog()]

    # -- sites ------------------------------------------------------------------------

    @app.get(API_PREFIX + "/sites")
    def sites_occupancy(user: User = Depends(requires("sites.read"))):
        from .data import bundled_sites

        sites = bundled_sites("ntu-hpcc")
        snapshot = poll(sites, {})
        out = []
        for site in sites:
            queues = []
            for q in site.queues:
                occ = snapshot.get(site.name, q.name)
                queues.append(
                    {
                        "name": q.name,
                        "walltime": q.walltime,
                        "cores": q.cores,
                        "cores_per_user": q.cores_per_user,
                        "idle_cores": occ.idle_cores if not occ.stale else q.cores,
                        "queued_jobs": occ.queued_jobs,
                        "running_jobs": occ.running_jobs,
                    }
                )
            out.append({"name": site.name, "kind": site.kind.value, "queues": queues})
        return out

    # -- runs --------------------------------------------------------------------------

    @app.post(API_PREFIX + "/runs", status_code=201)
    def create_run(
        body: RunBody,
        user: User = Depends(requires("runs.create")),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        if idempotency_key:
            existing = store.idempotency_lookup(idempotency_key)
            if existing:
                record = store.get_run(existing)
                return JSONResponse(
                    status_code=200,
                    content={**_run_brief(record), "summary": record.summary, "replayed": True},
                )
        record = new_run_record(
            store,
            template=body.template,
            template_version=body.version,
            submitter=user.username,
            sweep=body.sweep,
            backend=body.backend,
            config=body.config,
            sites=body.sites,
        )
        store.create_run(record)
        if idempotency_key:
            store.idempotency_record(idempotency_key, record.run_id)
        execute_run(store, record)
        return {**_run_brief(record), "summary": record.summary}

    @app.get(API_PREFIX + "/runs")
    def list_runs(user: User = Depends(requires("runs.read"))):
        return [_run_brief(r) for r in store.list_runs()]

    @app.get(API_PREFIX + "/runs/{run_id}")
    def get_run(run_id: str, user: User = Depends(requires("runs.read"))):
        return store.get_run(run_id).to_dict()

    @app.get(API_PREFIX + "/runs/{run_id}/summary")
    def get_summary(run_id: str, user: User = Depends(requires("runs.read"))):
        record = store.get_run(run_id)
        if record.summary is None:
            return {"run_id": run_id, "status": record.status, "summary": None}
        return record.summary

    @app.get(API_PREFIX + "/runs/{run_id}/events")
    def get_events(run_id: str, user: User = Depends(requires("runs.read"))):
        store.get_run(run_id)
        return store.read_events(run_id)

    @app.get(API_PREFIX + "/runs/{run_id}/jobs")
    def get_jobs(run_id: str, user: User = Depends(requires("jobs.read"))):
        record = store.get_run(run_id)
        return [
            {"job_id": job_id, **info}
            for job_id, info in sorted(record.job_states.items())
        ]

    @app.get(API_PREFIX + "/runs/{run_id}/jobs/{job_id}")
    def get_job(run_id: str, job_id: str, user: User = Depends(requires("jobs.read"))):
        record = store.get_run(run_id)
        if job_id not in record.job_states:
            raise KeyError(job_id)
        events = [e for e in store.read_events(run_id) if e.get("job") == job_id]
        return {"job_id": job_id, **record.job_states[job_id], "events": events}

    @app.post(API_PREFIX + "/runs/{run_id}/cancel")
    def post_cancel(run_id: str, user: User = Depends(requires("runs.control"))):
        return _run_brief(cancel_run(store, run_id))

    @app.post(API_PREFIX + "/runs/{run_id}/resubmit", status_code=201)
    def post_resubmit(run_id: str, user: User = Depends(requires("runs.control"))):
        record = resubmit_run(store, run_id, submitter=user.username)
        return {**_run_brief(record), "summary": record.summary}

    # -- artifacts -------------------------------------------------------------------------

    @app.get(API_PREFIX + "/runs/{run_id}/artifacts")
    def list_artifacts(run_id: str, user: User = Depends(requires("artifacts.read"))):
        return store.get_run(run_id).artifact_index

    @app.get(API_PREFIX + "/runs/{run_id}/artifacts/{job_id}/{port}")
    def download_artifact(
        run_id: str, job_id: str, port: str, user: User = Depends(requires("artifacts.read"))
    ):
        record = store.get_run(run_id)
        for art in record.artifact_index:
            if art["job_id"] == job_id and art["port"] == port:
                path = art["path"]
                if path.startswith("sim://") or not os.path.exists(path):
                    raise KeyError(f"{job_id}/{port} (no stored payload)")
                return FileResponse(path, filename=os.path.basename(path))
        raise KeyError(f"{job_id}/{port}")

    return app


def main() -> None:
    """Entry point for `gatehub serve` and `python -m gatehub.api`."""
    import uvicorn

    addr = os.environ.get("GATEHUB_ADDR", "127.0.0.1:8800")
    host, _, port = addr.partition(":")
    uvicorn.run(create_app(), host=host or "127.0.0.1", port=int(port or 8800))


if __name__ == "__main__":
    main()
