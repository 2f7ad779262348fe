/** App shell: hash routing, 2-second polling while a run is live, and DOM
 * event wiring. All state comes from the API; nothing is computed locally
 * beyond what the render functions derive from the payloads they are given. */

import { ApiClient, ApiError } from "./api.js";
import { collectAxes } from "./components/sweepForm.js";
import {
  renderAdminPage,
  renderCatalogPage,
  renderConfigurePage,
  renderError,
  renderLoginPage,
  renderMonitorPage,
  renderNav,
  renderResultsPage,
  renderRunListPage,
  renderSitesPage,
} from "./pages.js";
import type { Session } from "./types.js";

export const POLL_MS = 2000;

const api = new ApiClient();
let session: Session | null = null;
let pollTimer: number | null = null;

function loadSession(): void {
  const raw = sessionStorage.getItem("gatehub-session");
  if (!raw) return;
  try {
    session = JSON.parse(raw) as Session;
    api.token = session.token;
  } catch {
    sessionStorage.removeItem("gatehub-session");
  }
}

function storeSession(next: Session | null): void {
  session = next;
  api.token = next?.token ?? null;
  if (next) sessionStorage.setItem("gatehub-session", JSON.stringify(next));
  else sessionStorage.removeItem("gatehub-session");
}

function el(): HTMLElement {
  return document.getElementById("app")!;
}

function stopPolling(): void {
  if (pollTimer !== null) {
    clearInterval(pollTimer);
    pollTimer = null;
  }
}

function paint(active: string, body: string): void {
  el().innerHTML = renderNav(session, active) + body;
}

async function hydratePreviews(runId: string): Promise<void> {
  const images = el().querySelectorAll<HTMLImageElement>("img[data-preview-job]");
  for (const img of images) {
    try {
      const blob = await api.artifactBlob(
        runId,
        img.dataset["previewJob"]!,
        img.dataset["previewPort"]!,
      );
      img.src = URL.createObjectURL(blob);
    } catch {
      img.replaceWith(document.createTextNode("preview unavailable"));
    }
  }
}

async function showMonitor(runId: string): Promise<void> {
  const fetchAll = async () => {
    const [run, jobs, summary, sites, events] = await Promise.all([
      api.run(runId),
      api.jobs(runId),
      api.summary(runId),
      api.sites(),
      api.events(runId),
    ]);
    paint("", renderMonitorPage(session!, run, jobs, summary, sites, events));
    if (run.status !== "running") stopPolling();
  };
  await fetchAll();
  stopPolling();
  pollTimer = window.setInterval(() => {
    fetchAll().catch(() => stopPolling());
  }, POLL_MS);
}

async function route(): Promise<void> {
  stopPolling();
  const hash = window.location.hash || "#/catalog";

  if (!session) {
    paint("", renderLoginPage());
    return;
  }

  try {
    if (hash.startsWith("#/configure/")) {
      const name = decodeURIComponent(hash.slice("#/configure/".length));
      paint("#/catalog", renderConfigurePage(session, await api.template(name)));
    } else if (hash.startsWith("#/run/") && hash.endsWith("/results")) {
      const runId = hash.slice("#/run/".length, -"/results".length);
      const [run, artifacts] = await Promise.all([api.run(runId), api.artifacts(runId)]);
      paint("#/runs", renderResultsPage(run, artifacts));
      await hydratePreviews(runId);
    } else if (hash.startsWith("#/run/")) {
      await showMonitor(hash.slice("#/run/".length));
    } else if (hash === "#/runs") {
      paint("#/runs", renderRunListPage(await api.runs()));
    } else if (hash === "#/sites") {
      paint("#/sites", renderSitesPage(await api.sites()));
    } else if (hash === "#/admin") {
      paint("#/admin", renderAdminPage(await api.users()));
    } else {
      const [labs, templates] = await Promise.all([api.labs(), api.templates()]);
      paint("#/catalog", renderCatalogPage(session, labs, templates));
    }
  } catch (err) {
    if (err instanceof ApiError && err.status === 401) {
      storeSession(null);
      paint("", renderLoginPage("Session expired; sign in again."));
      return;
    }
    paint("", renderError(err instanceof Error ? err.message : String(err)));
  }
}

async function onSubmit(event: SubmitEvent): Promise<void> {
  const form = event.target as HTMLFormElement;
  event.preventDefault();

  if (form.dataset["form"] === "login") {
    const data = new FormData(form);
    try {
      const out = await api.login(
        String(data.get("username") ?? ""),
        String(data.get("password") ?? ""),
      );
      storeSession(out);
      await route();
    } catch (err) {
      paint("", renderLoginPage(err instanceof Error ? err.message : "login failed"));
    }
    return;
  }

  if (form.dataset["form"] === "create-user") {
    const data = new FormData(form);
    try {
      await api.createUser(
        String(data.get("username") ?? ""),
        String(data.get("password") ?? ""),
        String(data.get("role") ?? "end_user") as Session["role"],
      );
      await route();
    } catch (err) {
      alert(err instanceof Error ? err.message : String(err));
    }
    return;
  }

  if (form.classList.contains("sweep-form")) {
    const page = form.closest<HTMLElement>("[data-template]");
    if (!page) return;
    const inputs = [...form.querySelectorAll<HTMLInputElement>("input[data-axis]")].map(
      (input) => ({ axis: input.dataset["axis"]!, value: input.value }),
    );
    const backend =
      form.querySelector<HTMLSelectElement>("select[data-field=backend]")?.value ?? "sim";
    const seed = Number(
      form.querySelector<HTMLInputElement>("input[data-field=seed]")?.value ?? "0",
    );
    try {
      const run = await api.submitRun(
        {
          template: page.dataset["template"]!,
          version: Number(page.dataset["version"]),
          sweep: { axes: collectAxes(inputs) },
          backend,
          config: { seed },
        },
        crypto.randomUUID(),
      );
      window.location.hash = `#/run/${run.run_id}`;
    } catch (err) {
      alert(err instanceof Error ? err.message : String(err));
    }
  }
}

async function onClick(event: MouseEvent): Promise<void> {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) return;
  const action = target.dataset["action"];

  try {
    if (action === "logout") {
      storeSession(null);
      window.location.hash = "";
      await route();
    } else if (action === "publish") {
      await api.publishTemplate(
        target.dataset["template"]!,
        Number(target.dataset["version"]),
      );
      await route();
    } else if (action === "clone") {
      await api.cloneTemplate(target.dataset["template"]!);
      await route();
    } else if (action === "rerun") {
      const page = target.closest<HTMLElement>("[data-run]");
      if (!page) return;
      const next = await api.resubmitRun(page.dataset["run"]!);
      window.location.hash = `#/run/${next.run_id}`;
    } else if (action === "delete-user") {
      await api.deleteUser(target.dataset["user"]!);
      await route();
    } else if (action === "download") {
      const page = target.closest<HTMLElement>("[data-run]");
      if (!page) return;
      const job = target.dataset["job"]!;
      const port = target.dataset["port"]!;
      const blob = await api.artifactBlob(page.dataset["run"]!, job, port);
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = `${job}-${port}`;
      a.click();
      URL.revokeObjectURL(a.href);
    }
  } catch (err) {
    alert(err instanceof Error ? err.message : String(err));
  }
}

export function start(): void {
  loadSession();
  window.addEventListener("hashchange", () => void route());
  document.addEventListener("submit", (e) => void onSubmit(e));
  document.addEventListener("click", (e) => void onClick(e));
  void route();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
