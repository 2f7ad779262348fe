"""Queue-aware job placement: poll occupancy, pick queues, segment long jobs.

Placement policy is "emptiest pool, best fit": among queues whose walltime
holds the padded estimate and whose per-user core cap holds the job, prefer
the one with the most usable idle cores, then the smallest walltime, then
the queue name. Jobs too long for every queue are split into checkpoint-
chained segments sized to fit the most generous queue available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

from .errors import NotCheckpointable, Unschedulable, UnknownQueue
from .jobs import Job
from .resources import Queue, Site, feasible_queues, parse_duration


@dataclass(frozen=True)
class Policy:
    safety: float = 1.15          # multiplies estimates before walltime fit
    max_attempts: int = 3
    inflation: float = 1.5        # estimate growth after a walltime kill
    poll_period: str = "10s"      # real time between occupancy polls

    def poll_minutes(self) -> float:
        return parse_duration(self.poll_period, "poll_period")


def policy_from_dict(raw: dict) -> Policy:
    return Policy(
        safety=float(raw.get("safety", 1.15)),
        max_attempts=int(raw.get("max_attempts", 3)),
        inflation=float(raw.get("inflation", 1.5)),
        poll_period=str(raw.get("poll_period", "10s")),
    )


@dataclass(frozen=True)
class QueueOccupancy:
    idle_cores: int
    queued_jobs: int
    running_jobs: int
    stale: bool = False


@dataclass(frozen=True)
class OccupancySnapshot:
    entries: dict[tuple[str, str], QueueOccupancy]
    taken_at: float = 0.0

    def get(self, site: str, queue: str) -> QueueOccupancy:
        return self.entries.get((site, queue), QueueOccupancy(0, 0, 0, stale=True))


class OccupancySource(Protocol):
    """What poll() needs from an executor backend."""

    def occupancy(self) -> dict[str, QueueOccupancy]: ...


def poll(
    sites: list[Site],
    executors: dict[str, OccupancySource],
    taken_at: float = 0.0,
    previous: OccupancySnapshot | None = None,
) -> OccupancySnapshot:
    """One occupancy entry per queue of every site.

    A site whose executor is missing or raises keeps its last-known numbers
    flagged stale (zeros when there is no history), so planning degrades
    instead of crashing.
    """
    entries: dict[tuple[str, str], QueueOccupancy] = {}
    for site in sites:
        source = executors.get(site.name)
        per_queue: dict[str, QueueOccupancy] | None = None
        if source is not None:
            try:
                per_queue = source.occupancy()
            except Exception:
                per_queue = None
        for q in site.queues:
            key = (site.name, q.name)
            if per_queue is not None and q.name in per_queue:
                entries[key] = per_queue[q.name]
            else:
                last = previous.entries.get(key) if previous else None
                if last is not None:
                    entries[key] = QueueOccupancy(
                        last.idle_cores, last.queued_jobs, last.running_jobs, stale=True
                    )
                else:
                    entries[key] = QueueOccupancy(0, 0, 0, stale=True)
    return OccupancySnapshot(entries=entries, taken_at=taken_at)


@dataclass(frozen=True)
class Assignment:
    job_id: str
    site: str
    queue: str
    segments: int = 1
    segment_runtime: float = 0.0

    def __post_init__(self):
        if self.segments < 1:
            raise Unschedulable(self.job_id, "segments must be >= 1")


@dataclass
class PlanResult:
    assignments: list[Assignment]
    deferred: list[str] = field(default_factory=list)  # cap-exhausted this round


def _queue_index(sites: list[Site]) -> dict[tuple[str, str], Queue]:
    return {(s.name, q.name): q for s in sites for q in s.queues}


def _site_of_queue(sites: list[Site], queue_name: str) -> tuple[str, Queue]:
    for s in sites:
        q = s.queue(queue_name)
        if q is not None:
            return s.name, q
    raise UnknownQueue(queue_name)


def plan(
    jobs: list[Job],
    snapshot: OccupancySnapshot,
    sites: list[Site],
    policy: Policy,
) -> PlanResult:
    """Assign each eligible job to a queue; pure function of its inputs.

    Per-user core caps are honored cumulatively across the assignments made
    in this call; a job that fits some queue in principle but not within the
    caps left this round is deferred, not failed. Jobs whose padded runtime
    exceeds every walltime are segmented (checkpointable components only);
    Unschedulable is raised only when no queue can host the job at all.

    A job with a queue_pin skips feasibility entirely: the user asked for
    that queue, the walltime enforcer will have the last word.
    """
    planned_cores: dict[tuple[str, str], int] = {}
    assignments: list[Assignment] = []
    deferred: list[str] = []

    def usable_idle(site_name: str, q: Queue) -> int:
        claimed = planned_cores.get((site_name, q.name), 0)
        occ = snapshot.get(site_name, q.name)
        return min(occ.idle_cores - claimed, q.cores_per_user - claimed)

    for job in jobs:
        est = job.estimate

        if job.queue_pin is not None:
            site_name, q = _site_of_queue(sites, job.queue_pin)
            assignments.append(
                Assignment(job.id, site_name, q.name, segments=1, segment_runtime=est.runtime)
            )
            planned_cores[(site_name, q.name)] = (
                planned_cores.get((site_name, q.name), 0) + est.cores
            )
            continue

        feasible = feasible_queues(est, sites, policy.safety)
        open_queues = [
            q
            for q in feasible
            if q.cores_per_user - planned_cores.get((q.site_ref, q.name), 0) >= est.cores
        ]
        if open_queues:
            best = min(
                open_queues,
                key=lambda q: (-usable_idle(q.site_ref, q), q.walltime, q.name),
            )
            assignments.append(
                Assignment(job.id, best.site_ref, best.name, segments=1, segment_runtime=est.runtime)
            )
            planned_cores[(best.site_ref, best.name)] = (
                planned_cores.get((best.site_ref, best.name), 0) + est.cores
            )
            continue

        if feasible:
            # Feasible queues exist but this round's caps are spent.
            deferred.append(job.id)
            continue

        # Nothing fits whole: segment onto the queue giving the fewest pieces.
        candidates = [
            q for s in sites for q in s.queues if q.cores_per_user >= est.cores
        ]
        if not candidates:
            raise Unschedulable(job.id, f"no queue admits {est.cores} cores per user")
        target = min(
            candidates,
            key=lambda q: (-q.walltime, -usable_idle(q.site_ref, q), q.name),
        )
        try:
            assignment = segment_job(job, target, policy)
        except NotCheckpointable as exc:
            raise Unschedulable(job.id, str(exc))
        assignments.append(assignment)
        planned_cores[(target.site_ref, target.name)] = (
            planned_cores.get((target.site_ref, target.name), 0) + est.cores
        )

    return PlanResult(assignments=assignments, deferred=deferred)


def segment_job(job: Job, queue: Queue, policy: Policy) -> Assignment:
    """Split one over-long job into walltime-sized checkpoint-chained pieces.

    segments = ceil(runtime * safety / walltime), each segment running
    runtime/segments minutes, which by construction fits the walltime under
    the same safety factor.
    """
    if not job.checkpointable:
        raise NotCheckpointable(
            f"job {job.id} needs {job.estimate.runtime:g} min but queue "
            f"'{queue.name}' allows {queue.walltime:g} and the component "
            "declared no checkpoint support"
        )
    segments = math.ceil(job.estimate.runtime * policy.safety / queue.walltime)
    segments = max(segments, 1)
    return Assignment(
        job_id=job.id,
        site=queue.site_ref,
        queue=queue.name,
        segments=segments,
        segment_runtime=job.estimate.runtime / segments,
    )
