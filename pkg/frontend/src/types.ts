/** API payload shapes and the job-state vocabulary, mirrored from the REST
 * service. Every pixel derives from these; the client never invents state. */

export const JOB_STATES = [
  "created",
  "eligible",
  "queued",
  "running",
  "finished",
  "failed",
  "killed_walltime",
  "cancelled",
  "terminally_failed",
] as const;

export type JobState = (typeof JOB_STATES)[number];

const STATE_SET: ReadonlySet<string> = new Set(JOB_STATES);

export function isJobState(value: string): value is JobState {
  return STATE_SET.has(value);
}

/** Renderers call this before painting; a state the service never defined
 * is a bug upstream and must fail loudly instead of drawing something. */
export function assertJobState(value: string): JobState {
  if (!isJobState(value)) {
    throw new Error(`unknown job state '${value}'`);
  }
  return value;
}

export const FAULTY_STATES: ReadonlySet<JobState> = new Set([
  "failed",
  "killed_walltime",
  "terminally_failed",
] as const);

export type Role = "admin" | "power_user" | "end_user";

export interface Session {
  token: string;
  username: string;
  role: Role;
}

export interface JobInfo {
  job_id: string;
  node: string;
  state: string;
  attempt: number;
  params: Record<string, unknown>;
}

export interface FaultRecord {
  job_id: string;
  node_id: string;
  attempt: number;
  state: string;
  detail: string;
  ts: number;
}

export interface RunSummary {
  run_id: string;
  total: number;
  state_counts: Record<string, number>;
  faulty_jobs: string[];
  faulty_attempts: FaultRecord[];
}

export interface RunBrief {
  run_id: string;
  template: string;
  template_version: number;
  submitter: string;
  backend: string;
  status: string;
  created_at: number;
  ended_at: number | null;
  summary?: RunSummary | null;
}

export interface TransitionEvent {
  ts: number;
  job: string;
  from: string;
  to: string;
  detail: string;
}

export interface TemplateBrief {
  name: string;
  version: number;
  owner: string;
  published: boolean;
  description: string;
}

export interface WorkflowDoc {
  graph: {
    nodes: { id: string; name: string; ports: unknown[]; profile?: string }[];
    edges: { from: string; to: string }[];
  };
  bindings: Record<string, unknown>;
  sweep: { axes: Record<string, unknown[]>; constants?: Record<string, unknown> };
}

export interface TemplateFull extends TemplateBrief {
  workflow: WorkflowDoc;
}

export interface Lab {
  name: string;
  method: string;
  components: string[];
  template_ref: string;
  description: string;
}

export interface QueueOccupancy {
  name: string;
  walltime: number;
  cores: number;
  cores_per_user: number;
  idle_cores: number;
  queued_jobs: number;
  running_jobs: number;
}

export interface SiteOccupancy {
  name: string;
  kind: string;
  queues: QueueOccupancy[];
}

export interface Artifact {
  job_id: string;
  port: string;
  path: string;
  bytes: number;
  size_class: string;
  within_expected: boolean;
}

export interface UserBrief {
  username: string;
  role: Role;
}
