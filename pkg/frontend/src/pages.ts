/** Page render functions: pure HTML strings from API data plus the session.
 * The app shell owns routing, polling, and event wiring. */

import { renderArtifactList } from "./components/artifactList.js";
import { renderFaultPanel } from "./components/faultPanel.js";
import { renderGraphView } from "./components/graphView.js";
import { renderQueueGauge } from "./components/queueGauge.js";
import { renderRunBoard } from "./components/runBoard.js";
import { renderSweepForm } from "./components/sweepForm.js";
import { renderTemplateCard } from "./components/templateCard.js";
import { esc, fmtDate, fmtTs } from "./format.js";
import { allowed } from "./permissions.js";
import type {
  Artifact,
  JobInfo,
  Lab,
  RunBrief,
  RunSummary,
  Session,
  SiteOccupancy,
  TemplateBrief,
  TemplateFull,
  TransitionEvent,
  UserBrief,
} from "./types.js";

export function renderNav(session: Session | null, active: string): string {
  if (!session) return "";
  const links = [
    ["#/catalog", "Catalog"],
    ["#/runs", "Runs"],
    ["#/sites", "Sites"],
  ];
  if (allowed(session.role, "users.manage")) links.push(["#/admin", "Users"]);
  const items = links
    .map(
      ([href, label]) =>
        `<a href="${href}" class="${active === href ? "active" : ""}">${label}</a>`,
    )
    .join("");
  return (
    `<nav class="top-nav">${items}` +
    `<span class="nav-session">${esc(session.username)} ` +
    `<span class="chip chip-role">${esc(session.role)}</span> ` +
    `<button data-action="logout">Sign out</button></span></nav>`
  );
}

export function renderLoginPage(error = ""): string {
  return (
    `<section class="login-page"><h1>gatehub</h1>` +
    `<form class="login-form" data-form="login">` +
    `<label>Username <input name="username" autocomplete="username"></label>` +
    `<label>Password <input name="password" type="password" autocomplete="current-password"></label>` +
    (error ? `<p class="error">${esc(error)}</p>` : "") +
    `<button type="submit">Sign in</button></form></section>`
  );
}

export function renderCatalogPage(
  session: Session,
  labs: Lab[],
  templates: TemplateBrief[],
): string {
  const canPublish = allowed(session.role, "templates.publish");
  const canClone = allowed(session.role, "templates.create");

  const labCards = labs
    .map(
      (lab) =>
        `<article class="lab-card" data-lab="${esc(lab.name)}">` +
        `<h3>${esc(lab.method)}</h3><p>${esc(lab.description)}</p>` +
        `<p class="muted">components: ${lab.components.map(esc).join(" → ")}</p>` +
        `<a class="button" href="#/configure/${encodeURIComponent(lab.template_ref)}">Open</a>` +
        `</article>`,
    )
    .join("");

  const cards = templates
    .map((t) => renderTemplateCard(t, { canPublish, canClone }))
    .join("");

  return (
    `<section class="catalog-page"><h2>Virtual labs</h2>` +
    `<div class="lab-grid">${labCards}</div>` +
    `<h2>Workflow templates</h2><div class="template-grid">${cards}</div></section>`
  );
}

export function renderConfigurePage(session: Session, template: TemplateFull): string {
  void session; // configuration is open to every role that can read templates
  return (
    `<section class="configure-page" data-template="${esc(template.name)}" ` +
    `data-version="${template.version}">` +
    `<h2>Configure: ${esc(template.name)} <small>v${template.version}</small></h2>` +
    `<p>${esc(template.description)}</p>` +
    renderGraphView(template.workflow) +
    renderSweepForm(template.workflow.sweep.axes) +
    `</section>`
  );
}

export function renderRunListPage(runs: RunBrief[]): string {
  const rows = runs
    .map(
      (r) =>
        `<tr data-run="${esc(r.run_id)}">` +
        `<td><a href="#/run/${esc(r.run_id)}"><code>${esc(r.run_id)}</code></a></td>` +
        `<td>${esc(r.template)} v${r.template_version}</td>` +
        `<td>${esc(r.backend)}</td>` +
        `<td><span class="chip chip-${esc(r.status)}">${esc(r.status)}</span></td>` +
        `<td>${esc(r.submitter)}</td><td>${fmtDate(r.created_at)}</td></tr>`,
    )
    .join("");
  return (
    `<section class="runs-page"><h2>Runs</h2>` +
    `<table class="run-table"><thead><tr>` +
    `<th>run</th><th>template</th><th>backend</th><th>status</th><th>by</th><th>created</th>` +
    `</tr></thead><tbody>${rows}</tbody></table></section>`
  );
}

export function renderMonitorPage(
  session: Session,
  run: RunBrief,
  jobs: JobInfo[],
  summary: RunSummary,
  sites: SiteOccupancy[],
  events: TransitionEvent[],
): string {
  const canControl = allowed(session.role, "runs.control");
  const tail = events
    .slice(-12)
    .map(
      (e) =>
        `<li><span class="muted">${fmtTs(e.ts)}</span> <code>${esc(e.job)}</code> ` +
        `${esc(e.from)} → ${esc(e.to)}${e.detail ? ` <i>(${esc(e.detail)})</i>` : ""}</li>`,
    )
    .join("");

  return (
    `<section class="monitor-page" data-run="${esc(run.run_id)}" data-status="${esc(run.status)}">` +
    `<h2>Run <code>${esc(run.run_id)}</code>` +
    ` <span class="chip chip-${esc(run.status)}">${esc(run.status)}</span></h2>` +
    `<p class="muted">${esc(run.template)} v${run.template_version} · ${esc(run.backend)} · ` +
    `submitted by ${esc(run.submitter)} · ` +
    `<a href="#/run/${esc(run.run_id)}/results">results</a></p>` +
    renderRunBoard(jobs) +
    `<h3>Faulty attempts</h3>` +
    renderFaultPanel(summary.faulty_attempts, { canRerun: canControl, runStatus: run.status }) +
    `<h3>Queues</h3>` +
    renderQueueGauge(sites) +
    `<h3>Recent transitions</h3><ul class="event-tail">${tail}</ul></section>`
  );
}

export function renderResultsPage(run: RunBrief, artifacts: Artifact[]): string {
  return (
    `<section class="results-page" data-run="${esc(run.run_id)}">` +
    `<h2>Results for <code>${esc(run.run_id)}</code></h2>` +
    `<p><a href="#/run/${esc(run.run_id)}">back to monitor</a></p>` +
    renderArtifactList(artifacts) +
    `</section>`
  );
}

export function renderSitesPage(sites: SiteOccupancy[]): string {
  return `<section class="sites-page"><h2>Sites</h2>${renderQueueGauge(sites)}</section>`;
}

export function renderAdminPage(users: UserBrief[]): string {
  const rows = users
    .map(
      (u) =>
        `<tr data-user="${esc(u.username)}"><td>${esc(u.username)}</td>` +
        `<td><span class="chip chip-role">${esc(u.role)}</span></td>` +
        `<td>${
          u.username === "admin"
            ? ""
            : `<button data-action="delete-user" data-user="${esc(u.username)}">Remove</button>`
        }</td></tr>`,
    )
    .join("");
  return (
    `<section class="admin-page"><h2>Users</h2>` +
    `<table class="user-table"><thead><tr><th>username</th><th>role</th><th></th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<form class="user-form" data-form="create-user"><h3>New user</h3>` +
    `<label>Username <input name="username"></label>` +
    `<label>Password <input name="password" type="password"></label>` +
    `<label>Role <select name="role">` +
    `<option value="end_user">end_user</option>` +
    `<option value="power_user">power_user</option>` +
    `<option value="admin">admin</option></select></label>` +
    `<button type="submit">Create</button></form></section>`
  );
}

export function renderError(message: string): string {
  return `<section class="error-page"><p class="error">${esc(message)}</p></section>`;
}
