"""Local-process executor: runs bound commands as real subprocesses.

Server-class components (converters, plotting) run fine on the gateway host
itself. Up to max_parallel processes run concurrently; completions surface
through pump() as the same event shapes the simulator produces, so the engine
drives both backends identically. stdout and stderr are always captured to
files next to the job's outputs.
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass, field

from .errors import SpawnError
from .scheduling import QueueOccupancy
from .simcluster import SimEvent
from .stubs import STUB_NAMES


def resolve_executable(name: str) -> list[str]:
    """Find the command to launch; bundled stubs fall back to module form.

    An installed package exposes mock-* entry points on PATH; a source tree
    without them still works through `python -m gatehub.stubs <name>`.
    """
    found = shutil.which(name)
    if found:
        return [found]
    if name in STUB_NAMES:
        return [sys.executable, "-m", "gatehub.stubs", name]
    if os.path.sep in name and os.path.exists(name) and os.access(name, os.X_OK):
        return [name]
    raise SpawnError(f"executable not found: {name}")


@dataclass
class LocalTask:
    job_id: str
    proc: subprocess.Popen
    jobdir: str
    stdout: object
    stderr: object
    started_ts: float
    cores: int = 1


@dataclass
class PendingTask:
    job_id: str
    argv: list[str]
    env: dict[str, str]
    jobdir: str
    cores: int = 1


@dataclass
class LocalExecutor:
    max_parallel: int = 4
    queue_name: str = "batch"
    total_cores: int = 8
    _pending: list[PendingTask] = field(default_factory=list)
    _running: list[LocalTask] = field(default_factory=list)

    def submit(
        self,
        job_id: str,
        executable: str,
        argv: list[str],
        env: dict[str, str],
        jobdir: str,
        cores: int = 1,
    ) -> SimEvent:
        """Queue one process; it starts when a slot frees in pump()."""
        cmd = resolve_executable(executable) + list(argv)
        full_env = dict(os.environ)
        full_env.update(env)
        self._pending.append(PendingTask(job_id, cmd, full_env, jobdir, cores))
        return SimEvent(ts=time.time(), kind="queued", job_id=job_id, queue=self.queue_name)

    def _start(self, task: PendingTask) -> LocalTask:
        out = open(os.path.join(task.jobdir, "stdout.txt"), "a")
        err = open(os.path.join(task.jobdir, "stderr.txt"), "a")
        try:
            proc = subprocess.Popen(
                task.argv,
                cwd=os.path.join(task.jobdir, "outputs"),
                env=task.env,
                stdout=out,
                stderr=err,
            )
        except OSError as exc:
            out.close()
            err.close()
            raise SpawnError(f"cannot launch {task.argv[0]}: {exc}")
        return LocalTask(
            job_id=task.job_id,
            proc=proc,
            jobdir=task.jobdir,
            stdout=out,
            stderr=err,
            started_ts=time.time(),
            cores=task.cores,
        )

    def pump(self) -> list[SimEvent]:
        """Reap finished processes, start pending ones; returns new events."""
        events: list[SimEvent] = []
        still_running: list[LocalTask] = []
        for task in self._running:
            code = task.proc.poll()
            if code is None:
                still_running.append(task)
                continue
            task.stdout.close()
            task.stderr.close()
            self._write_meta(task, code)
            events.append(
                SimEvent(ts=time.time(), kind="exited", job_id=task.job_id,
                         queue=self.queue_name, code=code)
            )
        self._running = still_running
        while self._pending and len(self._running) < self.max_parallel:
            pending = self._pending.pop(0)
            started = self._start(pending)
            self._running.append(started)
            events.append(
                SimEvent(ts=started.started_ts, kind="started", job_id=pending.job_id,
                         queue=self.queue_name)
            )
        return events

    def _write_meta(self, task: LocalTask, code: int) -> None:
        meta = {
            "job_id": task.job_id,
            "argv": task.proc.args if isinstance(task.proc.args, list) else list(task.proc.args),
            "exit_code": code,
            "started": task.started_ts,
            "ended": time.time(),
        }
        with open(os.path.join(task.jobdir, "meta.json"), "w") as f:
            json.dump(meta, f, indent=2)

    def wait_all(self, timeout: float = 60.0) -> list[SimEvent]:
        """Pump until everything submitted has finished."""
        events: list[SimEvent] = []
        deadline = time.time() + timeout
        while self._pending or self._running:
            events.extend(self.pump())
            if not self._pending and not self._running:
                break
            if time.time() > deadline:
                raise TimeoutError("local executor did not drain in time")
            time.sleep(0.01)
        return events

    def busy(self) -> bool:
        return bool(self._pending or self._running)

    def occupancy(self) -> dict[str, QueueOccupancy]:
        used = sum(t.cores for t in self._running)
        return {
            self.queue_name: QueueOccupancy(
                idle_cores=max(self.total_cores - used, 0),
                queued_jobs=len(self._pending),
                running_jobs=len(self._running),
            )
        }
