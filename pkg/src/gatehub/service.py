"""Run execution against a store: create, execute, persist, recover.

Runs are deterministic given (workflow, sites, config): job ids derive from
the run id and parameters, and the simulated backend draws all randomness
from the seeded generator. Recovery therefore replays a run from its record
and overwrites the event log; a log written before a crash is a prefix of
the replayed one.
"""

from __future__ import annotations

import time
import uuid

from .engine import LocalRunner, RunConfig, RunResult, SimRunner
from .errors import ValidationFailed
from .resources import Site, sites_from_dict
from .store import RunRecord, Store
from .workflows import SweepSpec, Workflow, workflow_from_dict


def _merge_sweep(workflow: Workflow, sweep: dict | None) -> Workflow:
    """Replace the template's sweep when the request supplies one."""
    if not sweep:
        return workflow
    axes = {k: tuple(v) for k, v in sweep.get("axes", {}).items()}
    constants = dict(sweep.get("constants", {}))
    if not axes and not constants:
        return workflow
    return Workflow(
        graph=workflow.graph,
        bindings=workflow.bindings,
        sweep=SweepSpec(axes=axes, constants=constants),
        owner=workflow.owner,
        status=workflow.status,
    )


def new_run_record(
    store: Store,
    template: str,
    template_version: int | None,
    submitter: str,
    sweep: dict | None = None,
    backend: str = "sim",
    config: dict | None = None,
    sites: dict | None = None,
    run_id: str | None = None,
) -> RunRecord:
    entry = store.get_template(template, template_version)
    if backend not in ("sim", "local"):
        raise ValidationFailed([f"unknown backend {backend!r}"])
    if sites is None:
        from .data import bundled_json
        sites = bundled_json(f"sites/{'ntu-hpcc' if backend == 'sim' else 'local'}.json")
    cfg = dict(config or {})
    record = RunRecord(
        run_id=run_id or uuid.uuid4().hex[:12],
        template=entry.name,
        template_version=entry.version,
        workflow=entry.workflow,
        sweep=sweep or {},
        submitter=submitter,
        backend=backend,
        config=cfg,
        sites=sites,
        status="running",
        created_at=time.time(),
    )
    return record


def _build_runner(store: Store, record: RunRecord, log_stream) -> SimRunner | LocalRunner:
    workflow = _merge_sweep(workflow_from_dict(record.workflow), record.sweep)
    sites: list[Site] = sites_from_dict(record.sites)
    config = RunConfig.from_dict(record.config)
    from .data import default_profiles
    profiles = default_profiles()
    if record.backend == "local":
        return LocalRunner(
            workflow, sites, store.run_workdir(record.run_id), profiles, config,
            run_id=record.run_id, log_stream=log_stream,
        )
    return SimRunner(
        workflow, sites, profiles, config,
        run_id=record.run_id, log_stream=log_stream,
    )


def execute_run(store: Store, record: RunRecord, fresh_log: bool = True) -> RunResult:
    """Run to completion, persisting the event log and final record."""
    stream = store.open_event_log(record.run_id, fresh=fresh_log)
    try:
        runner = _build_runner(store, record, stream)
        result = runner.run()
    finally:
        stream.close()
    record.status = "completed"
    record.ended_at = time.time()
    record.job_states = {
        j.id: {
            "state": j.state.value,
            "node": j.node_id,
            "attempt": j.attempt,
            "params": dict(j.params),
        }
        for j in result.jobs.values()
    }
    record.artifact_index = [a.to_dict() for a in result.artifacts]
    record.summary = result.summary().to_dict()
    store.update_run(record)
    return result


def cancel_run(store: Store, run_id: str) -> RunRecord:
    record = store.get_run(run_id)
    if record.status == "running":
        record.status = "cancelled"
        record.ended_at = time.time()
        store.update_run(record)
    return record


def resubmit_run(store: Store, run_id: str, submitter: str) -> RunRecord:
    """Manual re-run: a fresh run of the same workflow with a bumped seed.

    Deterministic replay with the same seed would reproduce the same faults,
    so the retry gets a new seed and a new run id.
    """
    prior = store.get_run(run_id)
    cfg = dict(prior.config)
    cfg["seed"] = int(cfg.get("seed", 0)) + 1
    record = RunRecord(
        run_id=uuid.uuid4().hex[:12],
        template=prior.template,
        template_version=prior.template_version,
        workflow=prior.workflow,
        sweep=prior.sweep,
        submitter=submitter,
        backend=prior.backend,
        config=cfg,
        sites=prior.sites,
        status="running",
        created_at=time.time(),
    )
    store.create_run(record)
    execute_run(store, record)
    return record


def recover_incomplete(store: Store) -> list[str]:
    """Replay any run left in the running state by a crash.

    The replay is deterministic, so the rewritten event log extends whatever
    prefix survived and the summary matches an uninterrupted execution.
    """
    recovered = []
    for record in store.list_runs():
        if record.status == "running":
            execute_run(store, record, fresh_log=True)
            recovered.append(record.run_id)
    return recovered


__all__ = [
    "new_run_record",
    "execute_run",
    "cancel_run",
    "resubmit_run",
    "recover_incomplete",
]
