/** Typed fetch client for the gateway's REST API.
 *
 * The UI consumes /api/v1 exclusively; base defaults to the serving origin
 * so the bundle works unchanged when the gateway mounts it under /ui. */

import type {
  Artifact,
  JobInfo,
  Lab,
  Role,
  RunBrief,
  RunSummary,
  Session,
  SiteOccupancy,
  TemplateBrief,
  TemplateFull,
  TransitionEvent,
  UserBrief,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    public token: string | null = null,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    headers: Record<string, string> = {},
  ): Promise<T> {
    const h: Record<string, string> = { ...headers };
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) h["Content-Type"] = "application/json";
    const resp = await fetch(`${this.base}/api/v1${path}`, {
      method,
      headers: h,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = `HTTP ${resp.status}`;
      try {
        const payload = await resp.json();
        if (payload && payload.detail) detail = String(payload.detail);
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(resp.status, detail);
    }
    if (resp.status === 204) return undefined as T;
    return (await resp.json()) as T;
  }

  async login(username: string, password: string): Promise<Session> {
    const out = await this.request<Session>("POST", "/auth/login", {
      username,
      password,
    });
    this.token = out.token;
    return out;
  }

  labs(): Promise<Lab[]> {
    return this.request("GET", "/labs");
  }

  templates(): Promise<TemplateBrief[]> {
    return this.request("GET", "/templates");
  }

  template(name: string): Promise<TemplateFull> {
    return this.request("GET", `/templates/${encodeURIComponent(name)}`);
  }

  publishTemplate(name: string, version: number): Promise<TemplateBrief> {
    return this.request(
      "POST",
      `/templates/${encodeURIComponent(name)}/${version}/publish`,
    );
  }

  cloneTemplate(name: string): Promise<TemplateBrief> {
    return this.request("POST", `/templates/${encodeURIComponent(name)}/clone`);
  }

  sites(): Promise<SiteOccupancy[]> {
    return this.request("GET", "/sites");
  }

  runs(): Promise<RunBrief[]> {
    return this.request("GET", "/runs");
  }

  run(runId: string): Promise<RunBrief> {
    return this.request("GET", `/runs/${runId}`);
  }

  summary(runId: string): Promise<RunSummary> {
    return this.request("GET", `/runs/${runId}/summary`);
  }

  events(runId: string): Promise<TransitionEvent[]> {
    return this.request("GET", `/runs/${runId}/events`);
  }

  jobs(runId: string): Promise<JobInfo[]> {
    return this.request("GET", `/runs/${runId}/jobs`);
  }

  artifacts(runId: string): Promise<Artifact[]> {
    return this.request("GET", `/runs/${runId}/artifacts`);
  }

  artifactUrl(runId: string, jobId: string, port: string): string {
    return `${this.base}/api/v1/runs/${runId}/artifacts/${jobId}/${port}`;
  }

  /** Stored payloads need the bearer token, so downloads go through fetch. */
  async artifactBlob(runId: string, jobId: string, port: string): Promise<Blob> {
    const resp = await fetch(this.artifactUrl(runId, jobId, port), {
      headers: this.token ? { Authorization: `Bearer ${this.token}` } : {},
    });
    if (!resp.ok) throw new ApiError(resp.status, `HTTP ${resp.status}`);
    return resp.blob();
  }

  submitRun(
    body: {
      template: string;
      version?: number | null;
      sweep?: { axes: Record<string, unknown[]> } | null;
      backend?: string;
      config?: Record<string, unknown> | null;
    },
    idempotencyKey?: string,
  ): Promise<RunBrief> {
    const headers: Record<string, string> = {};
    if (idempotencyKey) headers["Idempotency-Key"] = idempotencyKey;
    return this.request("POST", "/runs", body, headers);
  }

  cancelRun(runId: string): Promise<RunBrief> {
    return this.request("POST", `/runs/${runId}/cancel`);
  }

  resubmitRun(runId: string): Promise<RunBrief> {
    return this.request("POST", `/runs/${runId}/resubmit`);
  }

  users(): Promise<UserBrief[]> {
    return this.request("GET", "/users");
  }

  createUser(username: string, password: string, role: Role): Promise<UserBrief> {
    return this.request("POST", "/users", { username, password, role });
  }

  deleteUser(username: string): Promise<void> {
    return this.request("DELETE", `/users/${encodeURIComponent(username)}`);
  }
}
