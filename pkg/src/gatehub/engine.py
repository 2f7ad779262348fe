"""The orchestration loop: expand, plan, submit, react to events, repeat.

One runner owns one workflow run. Each round it promotes jobs whose
dependencies finished, plans the eligible ones onto queues, submits the
resulting assignments (segment by segment for split jobs), then advances the
executor and feeds its events through the job state machine. Faulty jobs
come back as resubmit actions and go around again; terminal failures cancel
their downstream closure. The loop ends when every job is in an absorbing
state.

Every transition is appended to an event log stream. With the simulated
backend the whole run is a pure function of (workflow, sites, seed, config),
which is what makes traces reproducible and crash recovery possible.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field

from .artifacts import (
    ArtifactRecord,
    checkpoint_env,
    collect_outputs,
    prepare_job_dir,
    stage_inputs,
    synthesize_outputs,
)
from .errors import GatehubError, InvariantViolation
from .graphs import PortDirection, SizeClass
from .jobs import (
    ABSORBING_STATES,
    CancelDownstream,
    EventLog,
    Exited,
    Job,
    JobState,
    Lost,
    Queued,
    Resubmit,
    Started,
    WalltimeKilled,
    apply_resubmit,
    cancel_downstream,
    mark_eligible,
    on_job_event,
    summarize,
)
from .localexec import LocalExecutor
from .resources import ProfileRegistry, Site, SiteKind
from .scheduling import Assignment, Policy, plan, poll
from .simcluster import SimCluster, SimEvent
from .workflows import JobSet, Workflow, expand_sweep


@dataclass
class RunConfig:
    policy: Policy = field(default_factory=Policy)
    seed: int = 0
    sigma: float = 0.1
    failure_rate: float = 0.0
    size_scale: float = 1.0            # 1e-3 for desk-scale artifact sizes
    max_parallel: int = 4              # local backend process slots
    minute_ms: float | None = None     # stub sleep pace for local runs
    queue_pins: dict[str, str] = field(default_factory=dict)  # node_id -> queue

    def to_dict(self) -> dict:
        return {
            "policy": {
                "safety": self.policy.safety,
                "max_attempts": self.policy.max_attempts,
                "inflation": self.policy.inflation,
                "poll_period": self.policy.poll_period,
            },
            "seed": self.seed,
            "sigma": self.sigma,
            "failure_rate": self.failure_rate,
            "size_scale": self.size_scale,
            "max_parallel": self.max_parallel,
            "minute_ms": self.minute_ms,
            "queue_pins": dict(self.queue_pins),
        }

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        p = raw.get("policy", {})
        return RunConfig(
            policy=Policy(
                safety=p.get("safety", 1.15),
                max_attempts=p.get("max_attempts", 3),
                inflation=p.get("inflation", 1.5),
                poll_period=p.get("poll_period", "10s"),
            ),
            seed=raw.get("seed", 0),
            sigma=raw.get("sigma", 0.1),
            failure_rate=raw.get("failure_rate", 0.0),
            size_scale=raw.get("size_scale", 1.0),
            max_parallel=raw.get("max_parallel", 4),
            minute_ms=raw.get("minute_ms"),
            queue_pins=dict(raw.get("queue_pins", {})),
        )


@dataclass
class RunResult:
    run_id: str
    jobset: JobSet
    jobs: dict[str, Job]
    trace: list[SimEvent]
    artifacts: list[ArtifactRecord]

    def summary(self):
        return summarize(self.run_id, list(self.jobs.values()))


def _declared_outputs(workflow: Workflow) -> dict[str, dict[str, SizeClass]]:
    """node id -> output port -> declared size class."""
    return {
        node.id: {
            p.name: p.data_class for p in node.ports if p.direction is PortDirection.OUTPUT
        }
        for node in workflow.graph.nodes
    }


class _RunnerBase:
    """State shared by the simulated and local run loops."""

    def __init__(
        self,
        workflow: Workflow,
        sites: list[Site],
        profiles: ProfileRegistry | None,
        config: RunConfig,
        run_id: str | None = None,
        log_stream=None,
    ):
        self.workflow = workflow
        self.sites = sites
        self.config = config
        self.jobset = expand_sweep(
            workflow, run_id=run_id, profiles=profiles,
            max_attempts=config.policy.max_attempts,
        )
        self.run_id = self.jobset.workflow_run_id
        self.jobs: dict[str, Job] = {j.id: j for j in self.jobset.jobs}
        for job in self.jobs.values():
            pin = config.queue_pins.get(self.jobset.node_of[job.id])
            if pin:
                job.queue_pin = pin
        self.log = EventLog(log_stream if log_stream is not None else io.StringIO())
        self.trace: list[SimEvent] = []
        self.artifacts: list[ArtifactRecord] = []
        self.declared = _declared_outputs(workflow)
        # task bookkeeping: executor task id -> (job id, segment index)
        self.tasks: dict[str, tuple[str, int]] = {}
        self.segments: dict[str, Assignment] = {}   # job id -> current assignment

    # -- shared bits ---------------------------------------------------------

    def now(self) -> float:
        raise NotImplementedError

    def _submit_task(self, job: Job, assignment: Assignment, segment: int) -> None:
        raise NotImplementedError

    def _log_transition(self, job: Job, frm: str, detail: str = "") -> None:
        self.log.append(self.now(), job.id, frm, job.state.value, detail)

    def _promote_eligible(self) -> None:
        for jid in mark_eligible(self.jobs, self.now()):
            self.log.append(self.now(), jid, "created", "eligible")

    def _plan_and_submit(self) -> int:
        # Submission order follows the jobset enumeration (nodes x sweep
        # points), which is stable for a given workflow and sweep.  Job ids
        # are salted with the run id, so ordering by id would reshuffle the
        # seeded noise stream on every submission and equal seeds would stop
        # reproducing equal outcomes.
        eligible = [j for j in self.jobs.values() if j.state is JobState.ELIGIBLE]
        if not eligible:
            return 0
        # Jobs that kept an assignment (failure retry on the same queue) skip
        # planning; the rest go through the policy.
        to_plan = []
        submitted = 0
        for job in eligible:
            if job.assignment is not None:
                self._submit_job(job, job.assignment)
                submitted += 1
            else:
                to_plan.append(job)
        if to_plan:
            snapshot = poll(self.sites, self._occupancy_sources(), taken_at=self.now())
            result = plan(to_plan, snapshot, self.sites, self.config.policy)
            for assignment in result.assignments:
                job = self.jobs[assignment.job_id]
                job.assignment = assignment
                self._submit_job(job, assignment)
                submitted += 1
        return submitted

    def _submit_job(self, job: Job, assignment: Assignment) -> None:
        self.segments[job.id] = assignment
        self._submit_task(job, assignment, segment=1)
        on_job_event(job, Queued(), ts=self.now())
        self._log_transition(job, "eligible", f"queue {assignment.queue}")

    def _occupancy_sources(self) -> dict:
        raise NotImplementedError

    def _deliver(self, ev: SimEvent, detail: str = "") -> None:
        """Route one executor event to the owning job, chaining segments."""
        if ev.kind == "queued":
            return  # job-level queued is logged at submit time
        job_id, segment = self.tasks[ev.job_id]
        job = self.jobs[job_id]
        assignment = self.segments[job_id]

        if ev.kind == "started":
            if segment == 1 and job.state is JobState.QUEUED:
                on_job_event(job, Started(), ts=ev.ts)
                self._log_transition(job, "queued")
            return

        if ev.kind == "exited" and ev.code == 0:
            if segment < assignment.segments:
                self._submit_task(job, assignment, segment=segment + 1)
                return
            detail = self._on_success(job)
            if detail is None:
                before = job.state.value
                on_job_event(job, Exited(0), ts=ev.ts)
                self._log_transition(job, before)
                return
            # Declared output missing: demote to a failure.
            before = job.state.value
            _, actions = on_job_event(job, Exited(1), ts=ev.ts, detail=detail)
            self._log_transition(job, before, detail)
            self._handle_actions(job, actions, ev.ts)
            return

        if ev.kind == "exited":
            before = job.state.value
            _, actions = on_job_event(job, Exited(ev.code or 1), ts=ev.ts)
            self._log_transition(job, before, f"exit code {ev.code}")
            self._handle_actions(job, actions, ev.ts)
            return

        if ev.kind == "walltime_killed":
            before = job.state.value
            _, actions = on_job_event(
                job,
                WalltimeKilled(walltime=ev.walltime or 0.0),
                ts=ev.ts,
                inflation=self.config.policy.inflation,
            )
            self._log_transition(job, before, f"killed by {ev.queue} walltime")
            self._handle_actions(job, actions, ev.ts)
            return

        if ev.kind == "lost":
            before = job.state.value
            _, actions = on_job_event(job, Lost(), ts=ev.ts, detail=detail)
            self._log_transition(job, before, detail or "lost")
            self._handle_actions(job, actions, ev.ts)

    def _handle_actions(self, job: Job, actions, ts: float) -> None:
        for action in actions:
            if isinstance(action, Resubmit):
                before = job.state.value
                apply_resubmit(job, action, ts=ts)
                self._log_transition(job, before, f"attempt {job.attempt}")
            elif isinstance(action, CancelDownstream):
                for jid in cancel_downstream(self.jobs, action.job_id, ts=ts):
                    self.log.append(
                        ts, jid, "created", "cancelled", f"upstream {action.job_id} failed"
                    )

    def _on_success(self, job: Job) -> str | None:
        """Collect artifacts; a non-None return demotes the job to failed."""
        raise NotImplementedError

    def _all_settled(self) -> bool:
        return all(j.state in ABSORBING_STATES for j in self.jobs.values())

    def result(self) -> RunResult:
        return RunResult(
            run_id=self.run_id,
            jobset=self.jobset,
            jobs=self.jobs,
            trace=self.trace,
            artifacts=self.artifacts,
        )


class SimRunner(_RunnerBase):
    """Drives a run on simulated clusters in simulated minutes."""

    def __init__(
        self,
        workflow: Workflow,
        sites: list[Site],
        profiles: ProfileRegistry | None = None,
        config: RunConfig | None = None,
        run_id: str | None = None,
        log_stream=None,
    ):
        config = config or RunConfig()
        sim_sites = [s for s in sites if s.kind is SiteKind.SIMULATED_CLUSTER]
        if not sim_sites:
            raise InvariantViolation("simulated run needs at least one simulated_cluster site")
        super().__init__(workflow, sim_sites, profiles, config, run_id, log_stream)
        self.clusters = {
            site.name: SimCluster(
                site=site,
                seed=config.seed,
                sigma=config.sigma,
                failure_rate=config.failure_rate,
            )
            for site in sim_sites
        }
        self.clock = 0.0

    def now(self) -> float:
        return self.clock

    def _occupancy_sources(self) -> dict:
        return self.clusters

    def _submit_task(self, job: Job, assignment: Assignment, segment: int) -> None:
        cluster = self.clusters[assignment.site]
        task_id = f"{job.id}.a{job.attempt}.s{segment}"
        self.tasks[task_id] = (job.id, segment)
        ev = cluster.submit(
            job_id=task_id,
            queue=assignment.queue,
            cores=job.estimate.cores,
            estimate_runtime=assignment.segment_runtime,
        )
        self.trace.append(ev)

    def _on_success(self, job: Job) -> str | None:
        node_id = self.jobset.node_of[job.id]
        self.artifacts.extend(
            synthesize_outputs(
                job.id, self.run_id, self.declared.get(node_id, {}), self.config.size_scale
            )
        )
        return None  # simulated outputs are synthesized, never missing

    def _next_time(self) -> float | None:
        times = [
            t
            for cluster in self.clusters.values()
            if (t := cluster.next_end_time()) is not None
        ]
        return min(times) if times else None

    def step(self) -> bool:
        """One scheduling round; returns False once the run has settled."""
        self._promote_eligible()
        self._plan_and_submit()
        # Flush zero-time starts, then jump to the next completion.
        events: list[SimEvent] = []
        for cluster in self.clusters.values():
            events.extend(cluster.advance(self.clock))
        if not events:
            target = self._next_time()
            if target is None:
                if self._all_settled():
                    return False
                if any(c.busy() for c in self.clusters.values()):
                    raise InvariantViolation("simulation stalled with tasks waiting")
                # Nothing running yet; jobs may still be created/eligible.
                if any(j.state is JobState.ELIGIBLE for j in self.jobs.values()):
                    raise InvariantViolation("eligible jobs could not be submitted")
                return not self._all_settled()
            self.clock = target
            for cluster in self.clusters.values():
                events.extend(cluster.advance(target))
        # Events are causally ordered within each cluster; keep that order.
        for ev in events:
            self.trace.append(ev)
            self._deliver(ev)
        return not self._all_settled()

    def run(self) -> RunResult:
        guard = 0
        while self.step():
            guard += 1
            if guard > 1_000_000:
                raise InvariantViolation("run did not settle")
        return self.result()


class LocalRunner(_RunnerBase):
    """Drives a run with real subprocesses on the gateway host."""

    def __init__(
        self,
        workflow: Workflow,
        sites: list[Site],
        workdir: str,
        profiles: ProfileRegistry | None = None,
        config: RunConfig | None = None,
        run_id: str | None = None,
        log_stream=None,
    ):
        config = config or RunConfig()
        local_sites = [s for s in sites if s.kind is SiteKind.LOCAL_SERVER]
        if not local_sites:
            raise InvariantViolation("local run needs a local_server site")
        super().__init__(workflow, local_sites, profiles, config, run_id, log_stream)
        self.workdir = workdir
        site = local_sites[0]
        queue = site.queues[0]
        self.executor = LocalExecutor(
            max_parallel=config.max_parallel,
            queue_name=queue.name,
            total_cores=queue.cores,
        )
        self.outputs_of: dict[str, dict[str, str]] = {}  # job id -> port -> path
        self._synthetic: list[tuple[SimEvent, str]] = []  # events submit produced itself

    def now(self) -> float:
        return time.time()

    def _occupancy_sources(self) -> dict:
        return {self.sites[0].name: self.executor}

    def _submit_task(self, job: Job, assignment: Assignment, segment: int) -> None:
        command = self.jobset.commands[job.id]
        task_id = f"{job.id}.a{job.attempt}.s{segment}"
        self.tasks[task_id] = (job.id, segment)
        try:
            jobdir = prepare_job_dir(self.workdir, self.run_id, job.id)
            upstream = self._upstream_inputs(job)
            stage_inputs(jobdir, command.input_files, upstream)
            env = dict(command.env)
            env.update(checkpoint_env(jobdir, segment, assignment.segments))
            if self.config.minute_ms is not None:
                env.setdefault("GATEHUB_MINUTE_MS", str(self.config.minute_ms))
            ev = self.executor.submit(
                job_id=task_id,
                executable=command.executable,
                argv=list(command.argv),
                env=env,
                jobdir=jobdir,
                cores=job.estimate.cores,
            )
            self.trace.append(ev)
        except GatehubError as exc:
            # Staging, checkpoint, or spawn problems fail the attempt instead
            # of aborting the whole run; the retry policy takes it from here.
            self._synthetic.append(
                (
                    SimEvent(ts=self.now(), kind="lost", job_id=task_id, queue=self.executor.queue_name),
                    str(exc),
                )
            )

    def _upstream_inputs(self, job: Job) -> dict[str, str]:
        """Map this job's input ports to upstream artifact paths."""
        node_id = self.jobset.node_of[job.id]
        upstream: dict[str, str] = {}
        for edge in self.workflow.graph.edges_into(node_id):
            for dep_id in job.depends_on:
                if self.jobset.node_of[dep_id] == edge.from_node:
                    path = self.outputs_of.get(dep_id, {}).get(edge.from_port)
                    if path:
                        upstream[edge.to_port] = path
        return upstream

    def _on_success(self, job: Job) -> str | None:
        command = self.jobset.commands[job.id]
        node_id = self.jobset.node_of[job.id]
        jobdir = prepare_job_dir(self.workdir, self.run_id, job.id)
        records, missing = collect_outputs(
            job.id,
            jobdir,
            command.output_files,
            self.declared.get(node_id, {}),
            self.config.size_scale,
        )
        self.artifacts.extend(records)
        self.outputs_of[job.id] = {r.port: r.path for r in records}
        if missing:
            names = ", ".join(command.output_files[p] for p in sorted(missing))
            return f"missing output: {names}"
        return None

    def step(self) -> bool:
        self._promote_eligible()
        self._plan_and_submit()
        synthetic, self._synthetic = self._synthetic, []
        for ev, detail in synthetic:
            self.trace.append(ev)
            self._deliver(ev, detail=detail)
        events = self.executor.pump()
        for ev in events:
            self.trace.append(ev)
            self._deliver(ev)
        if not events and not synthetic and self.executor.busy():
            time.sleep(0.01)
        return not self._all_settled()

    def run(self, timeout: float = 120.0) -> RunResult:
        deadline = time.time() + timeout
        while self.step():
            if time.time() > deadline:
                raise TimeoutError("local run did not settle in time")
        return self.result()


def run_simulated(
    workflow: Workflow,
    sites: list[Site],
    profiles: ProfileRegistry | None = None,
    config: RunConfig | None = None,
    run_id: str | None = None,
    log_stream=None,
) -> RunResult:
    return SimRunner(workflow, sites, profiles, config, run_id, log_stream).run()


def run_local(
    workflow: Workflow,
    sites: list[Site],
    workdir: str,
    profiles: ProfileRegistry | None = None,
    config: RunConfig | None = None,
    run_id: str | None = None,
    log_stream=None,
) -> RunResult:
    return LocalRunner(workflow, sites, workdir, profiles, config, run_id, log_stream).run()
