"""Deterministic discrete-event simulation of a multi-queue batch cluster.

Each queue is strict FIFO (a blocked head blocks everything behind it) with a
per-user core cap. A running job ends exactly one way, decided when it
starts: an injected failure, normal completion, or a walltime kill at exactly
start + walltime, with completion winning a tie against the kill. All
randomness comes from one seeded generator consumed in submission order, so
identical (seed, submissions) reproduce identical traces byte for byte.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .errors import UnknownQueue
from .resources import Site
from .scheduling import QueueOccupancy


@dataclass
class SimTask:
    job_id: str
    user: str
    queue: str
    cores: int
    true_runtime: float
    submitted_at: float
    fail_after: float | None = None   # relative to start
    started_at: float | None = None

    def end(self, walltime: float) -> tuple[float, str]:
        """(absolute end time, event kind) for a started task."""
        assert self.started_at is not None
        if self.fail_after is not None and self.fail_after < min(self.true_runtime, walltime):
            return self.started_at + self.fail_after, "exited_nonzero"
        if self.true_runtime <= walltime:
            return self.started_at + self.true_runtime, "exited_zero"
        return self.started_at + walltime, "walltime_killed"


@dataclass(frozen=True)
class SimEvent:
    ts: float
    kind: str        # queued | started | exited | walltime_killed
    job_id: str
    queue: str
    code: int | None = None
    walltime: float | None = None

    def to_dict(self) -> dict:
        d = {"ts": self.ts, "kind": self.kind, "job": self.job_id, "queue": self.queue}
        if self.code is not None:
            d["code"] = self.code
        if self.walltime is not None:
            d["walltime"] = self.walltime
        return d


@dataclass
class SimCluster:
    site: Site
    seed: int = 0
    sigma: float = 0.1
    failure_rate: float = 0.0
    clock: float = 0.0
    _rng: random.Random = field(init=False, repr=False)
    _waiting: dict[str, deque[SimTask]] = field(init=False, repr=False)
    _running: dict[str, list[SimTask]] = field(init=False, repr=False)
    _used: dict[str, int] = field(init=False, repr=False)
    _user_used: dict[tuple[str, str], int] = field(init=False, repr=False)

    def __post_init__(self):
        self._rng = random.Random(self.seed)
        self._waiting = {q.name: deque() for q in self.site.queues}
        self._running = {q.name: [] for q in self.site.queues}
        self._used = {q.name: 0 for q in self.site.queues}
        self._user_used = {}

    def _queue(self, name: str):
        q = self.site.queue(name)
        if q is None:
            raise UnknownQueue(name)
        return q

    def submit(
        self,
        job_id: str,
        queue: str,
        cores: int,
        estimate_runtime: float,
        user: str = "gateway",
    ) -> SimEvent:
        """Enqueue one task; noise and failure fate are drawn immediately."""
        self._queue(queue)
        if self.sigma > 0:
            noise = self._rng.lognormvariate(0.0, self.sigma)
        else:
            noise = 1.0
        true_runtime = estimate_runtime * noise
        fail_after = None
        if self.failure_rate > 0 and self._rng.random() < self.failure_rate:
            fail_after = self._rng.uniform(0.0, true_runtime)
        task = SimTask(
            job_id=job_id,
            user=user,
            queue=queue,
            cores=cores,
            true_runtime=true_runtime,
            submitted_at=self.clock,
            fail_after=fail_after,
        )
        self._waiting[queue].append(task)
        return SimEvent(ts=self.clock, kind="queued", job_id=job_id, queue=queue)

    def _try_starts(self, events: list[SimEvent]) -> None:
        # Queue iteration order is site config order; within a queue, strict
        # FIFO with head-of-line blocking.
        for q in self.site.queues:
            fifo = self._waiting[q.name]
            while fifo:
                head = fifo[0]
                free = q.cores - self._used[q.name]
                user_key = (q.name, head.user)
                user_free = q.cores_per_user - self._user_used.get(user_key, 0)
                if head.cores > free or head.cores > user_free:
                    break
                fifo.popleft()
                head.started_at = self.clock
                self._running[q.name].append(head)
                self._used[q.name] += head.cores
                self._user_used[user_key] = self._user_used.get(user_key, 0) + head.cores
                events.append(
                    SimEvent(ts=self.clock, kind="started", job_id=head.job_id, queue=q.name)
                )

    def _next_end(self) -> tuple[float, str, SimTask] | None:
        best: tuple[float, str, str, SimTask] | None = None
        for q in self.site.queues:
            for task in self._running[q.name]:
                ts, kind = task.end(q.walltime)
                key = (ts, task.job_id)
                if best is None or key < (best[0], best[2]):
                    best = (ts, kind, task.job_id, task)
        if best is None:
            return None
        return best[0], best[1], best[3]

    def _finish(self, task: SimTask, kind: str, events: list[SimEvent]) -> None:
        q = self._queue(task.queue)
        self._running[task.queue].remove(task)
        self._used[task.queue] -= task.cores
        user_key = (task.queue, task.user)
        self._user_used[user_key] -= task.cores
        if kind == "exited_zero":
            events.append(SimEvent(self.clock, "exited", task.job_id, task.queue, code=0))
        elif kind == "exited_nonzero":
            events.append(SimEvent(self.clock, "exited", task.job_id, task.queue, code=1))
        else:
            events.append(
                SimEvent(
                    self.clock, "walltime_killed", task.job_id, task.queue, walltime=q.walltime
                )
            )

    def advance(self, until: float) -> list[SimEvent]:
        """Process every start and end up to and including `until`."""
        if until < self.clock:
            raise ValueError(f"cannot advance backwards: {until} < {self.clock}")
        events: list[SimEvent] = []
        self._try_starts(events)
        while True:
            nxt = self._next_end()
            if nxt is None or nxt[0] > until:
                break
            ts, kind, task = nxt
            self.clock = ts
            self._finish(task, kind, events)
            self._try_starts(events)
        self.clock = until
        return events

    def drain(self, step: float = 10_000.0, limit: float = 10_000_000.0) -> list[SimEvent]:
        """Advance until nothing is waiting or running."""
        events: list[SimEvent] = []
        while any(self._waiting.values()) or any(self._running.values()):
            if self.clock >= limit:
                raise RuntimeError("simulation did not quiesce")
            events.extend(self.advance(self.clock + step))
        return events

    def busy(self) -> bool:
        return any(self._waiting.values()) or any(self._running.values())

    def next_end_time(self) -> float | None:
        nxt = self._next_end()
        return None if nxt is None else nxt[0]

    def occupancy(self) -> dict[str, QueueOccupancy]:
        return {
            q.name: QueueOccupancy(
                idle_cores=q.cores - self._used[q.name],
                queued_jobs=len(self._waiting[q.name]),
                running_jobs=len(self._running[q.name]),
            )
            for q in self.site.queues
        }

    # introspection for invariant checks
    def used_cores(self, queue: str) -> int:
        return self._used[queue]

    def user_cores(self, queue: str, user: str = "gateway") -> int:
        return self._user_used.get((queue, user), 0)
