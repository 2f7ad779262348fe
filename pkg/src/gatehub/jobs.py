"""Job lifecycle: the retry state machine and the append-only event log.

Faulty jobs (non-zero exit, walltime kill, lost contact) are re-run
automatically until max_attempts is reached; after that the job is
terminally failed and everything downstream of it is cancelled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterator

from .errors import IllegalTransition
from .resources import Estimate


class JobState(str, Enum):
    CREATED = "created"
    ELIGIBLE = "eligible"
    QUEUED = "queued"
    RUNNING = "running"
    FINISHED = "finished"
    FAILED = "failed"
    KILLED_WALLTIME = "killed_walltime"
    CANCELLED = "cancelled"
    TERMINALLY_FAILED = "terminally_failed"


# No event may leave these states.
ABSORBING_STATES = frozenset(
    {JobState.FINISHED, JobState.TERMINALLY_FAILED, JobState.CANCELLED}
)

FAULTY_STATES = frozenset(
    {JobState.FAILED, JobState.KILLED_WALLTIME, JobState.TERMINALLY_FAILED}
)


# -- events delivered by executors ------------------------------------------

@dataclass(frozen=True)
class Queued:
    pass


@dataclass(frozen=True)
class Started:
    pass


@dataclass(frozen=True)
class Exited:
    code: int


@dataclass(frozen=True)
class WalltimeKilled:
    walltime: float  # minutes of the killing queue


@dataclass(frozen=True)
class Lost:
    pass


JobEvent = Queued | Started | Exited | WalltimeKilled | Lost


# -- actions the scheduler must take in response ----------------------------

@dataclass(frozen=True)
class Resubmit:
    """Re-run with attempt+1; same queue unless a new estimate forces re-planning."""

    job_id: str
    same_queue: bool
    new_estimate: Estimate | None = None


@dataclass(frozen=True)
class CancelDownstream:
    job_id: str


Action = Resubmit | CancelDownstream


@dataclass(frozen=True)
class HistoryEntry:
    ts: float
    state: JobState
    detail: str = ""


@dataclass
class Job:
    id: str
    workflow_run_id: str
    node_id: str
    params: dict[str, object]
    estimate: Estimate
    state: JobState = JobState.CREATED
    assignment: "object | None" = None   # scheduling.Assignment once planned
    attempt: int = 1
    max_attempts: int = 3
    history: list[HistoryEntry] = field(default_factory=list)
    depends_on: list[str] = field(default_factory=list)
    queue_pin: str | None = None         # manual queue choice, overrides planning
    checkpointable: bool = False         # may the scheduler segment this job

    def record(self, ts: float, detail: str = "") -> None:
        self.history.append(HistoryEntry(ts, self.state, detail))


_LEGAL = {
    JobState.ELIGIBLE: (Queued,),
    JobState.QUEUED: (Started, Lost),
    JobState.RUNNING: (Exited, WalltimeKilled, Lost),
}


def on_job_event(
    job: Job,
    event: JobEvent,
    ts: float = 0.0,
    inflation: float = 1.5,
    detail: str = "",
) -> tuple[JobState, list[Action]]:
    """Advance one job through the state machine; mutates job, returns actions.

    Retry rules:
      exited(0)        -> finished
      exited(nonzero)  -> failed, resubmit to the same queue
      walltime_killed  -> killed_walltime, resubmit with the estimate inflated
                          past the walltime that killed it (the kill proves the
                          estimate was below reality)
      lost             -> failed, resubmit to the same queue
    Once attempt reaches max_attempts the job becomes terminally_failed and
    a CancelDownstream action tells the caller to cancel dependents.
    """
    legal = _LEGAL.get(job.state, ())
    if not isinstance(event, legal):
        raise IllegalTransition(job.state.value, type(event).__name__.lower())

    actions: list[Action] = []

    if isinstance(event, Queued):
        job.state = JobState.QUEUED
        job.record(ts)
    elif isinstance(event, Started):
        job.state = JobState.RUNNING
        job.record(ts)
    elif isinstance(event, Exited) and event.code == 0:
        job.state = JobState.FINISHED
        job.record(ts)
    elif isinstance(event, Exited) or isinstance(event, Lost):
        if not detail:
            detail = f"exit code {event.code}" if isinstance(event, Exited) else "lost"
        if job.attempt < job.max_attempts:
            job.state = JobState.FAILED
            job.record(ts, detail)
            actions.append(Resubmit(job.id, same_queue=True))
        else:
            job.state = JobState.TERMINALLY_FAILED
            job.record(ts, f"{detail}; attempts exhausted")
            actions.append(CancelDownstream(job.id))
    elif isinstance(event, WalltimeKilled):
        if not detail:
            detail = f"walltime {event.walltime:g} min exceeded"
        if job.attempt < job.max_attempts:
            job.state = JobState.KILLED_WALLTIME
            job.record(ts, detail)
            # Cap at the killing walltime first: the job survived that long,
            # so walltime * inflation is the tightest defensible new guess.
            base = min(job.estimate.runtime, event.walltime)
            new_runtime = base * inflation
            scale = new_runtime / job.estimate.runtime
            actions.append(
                Resubmit(job.id, same_queue=False, new_estimate=job.estimate.scaled(scale))
            )
        else:
            job.state = JobState.TERMINALLY_FAILED
            job.record(ts, f"{detail}; attempts exhausted")
            actions.append(CancelDownstream(job.id))

    return job.state, actions


def apply_resubmit(job: Job, action: Resubmit, ts: float = 0.0) -> None:
    """Reset a faulty job to eligible for the next attempt."""
    if job.state not in (JobState.FAILED, JobState.KILLED_WALLTIME):
        raise IllegalTransition(job.state.value, "resubmit")
    job.attempt += 1
    if action.new_estimate is not None:
        job.estimate = action.new_estimate
    if not action.same_queue:
        # Re-plan from scratch: drop the assignment and any manual pin that
        # caused the kill in the first place.
        job.assignment = None
        job.queue_pin = None
    job.state = JobState.ELIGIBLE
    job.record(ts, f"resubmitted, attempt {job.attempt}")


def cancel_downstream(jobs: dict[str, Job], failed_id: str, ts: float = 0.0) -> list[str]:
    """Cancel the full dependency closure below a terminally failed job."""
    dependents: dict[str, list[str]] = {}
    for j in jobs.values():
        for dep in j.depends_on:
            dependents.setdefault(dep, []).append(j.id)
    cancelled: list[str] = []
    stack = list(dependents.get(failed_id, []))
    seen: set[str] = set()
    while stack:
        jid = stack.pop()
        if jid in seen:
            continue
        seen.add(jid)
        job = jobs[jid]
        if job.state in ABSORBING_STATES:
            continue
        job.state = JobState.CANCELLED
        job.record(ts, f"upstream {failed_id} terminally failed")
        cancelled.append(jid)
        stack.extend(dependents.get(jid, []))
    return cancelled


def mark_eligible(jobs: dict[str, Job], ts: float = 0.0) -> list[str]:
    """Promote created jobs whose dependencies have all finished."""
    promoted = []
    for job in jobs.values():
        if job.state is not JobState.CREATED:
            continue
        if all(jobs[d].state is JobState.FINISHED for d in job.depends_on):
            job.state = JobState.ELIGIBLE
            job.record(ts)
            promoted.append(job.id)
    # Keep the caller's job order: ids are salted per run, so sorting by id
    # would shuffle otherwise-identical runs' transition logs.
    return promoted


# -- run summary -------------------------------------------------------------

@dataclass(frozen=True)
class FaultRecord:
    job_id: str
    node_id: str
    attempt: int
    state: JobState
    detail: str
    ts: float


@dataclass(frozen=True)
class RunSummary:
    run_id: str
    state_counts: dict[str, int]
    faulty_jobs: list[str]            # jobs currently in a faulty state
    faulty_attempts: list[FaultRecord]  # every faulty transition ever recorded
    total: int

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "state_counts": dict(self.state_counts),
            "faulty_jobs": list(self.faulty_jobs),
            "faulty_attempts": [
                {
                    "job_id": f.job_id,
                    "node_id": f.node_id,
                    "attempt": f.attempt,
                    "state": f.state.value,
                    "detail": f.detail,
                    "ts": f.ts,
                }
                for f in self.faulty_attempts
            ],
            "total": self.total,
        }


def summarize(run_id: str, jobs: list[Job]) -> RunSummary:
    counts: dict[str, int] = {}
    for job in jobs:
        counts[job.state.value] = counts.get(job.state.value, 0) + 1
    faulty_jobs = sorted(j.id for j in jobs if j.state in FAULTY_STATES)
    faulty_attempts: list[FaultRecord] = []
    for job in sorted(jobs, key=lambda j: j.id):
        attempt = 1
        for entry in job.history:
            if entry.state in FAULTY_STATES:
                faulty_attempts.append(
                    FaultRecord(job.id, job.node_id, attempt, entry.state, entry.detail, entry.ts)
                )
            if entry.detail.startswith("resubmitted"):
                attempt += 1
    faulty_attempts.sort(key=lambda f: (f.ts, f.job_id, f.attempt))
    return RunSummary(
        run_id=run_id,
        state_counts=counts,
        faulty_jobs=faulty_jobs,
        faulty_attempts=faulty_attempts,
        total=len(jobs),
    )


# -- event log ---------------------------------------------------------------

class EventLog:
    """Append-only newline-delimited JSON transition log.

    One object per line: {"ts": ..., "job": ..., "from": ..., "to": ..., "detail": ...}.
    Works over any writable text stream; flushed per line so a crash loses at
    most the line being written.
    """

    def __init__(self, stream: IO[str]):
        self._stream = stream

    def append(self, ts: float, job: str, from_state: str, to_state: str, detail: str = "") -> None:
        line = json.dumps(
            {"ts": ts, "job": job, "from": from_state, "to": to_state, "detail": detail},
            sort_keys=True,
        )
        self._stream.write(line + "\n")
        self._stream.flush()


def read_event_log(path: str) -> Iterator[dict]:
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                yield json.loads(line)
