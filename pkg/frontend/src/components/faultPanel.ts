/** Every faulty attempt the run recorded, plus the one-click re-run action. */

import { esc, fmtTs } from "../format.js";
import { assertJobState, type FaultRecord } from "../types.js";

export function renderFaultPanel(
  faults: FaultRecord[],
  options: { canRerun: boolean; runStatus: string },
): string {
  if (faults.length === 0) {
    return `<section class="fault-panel" data-faults="0"><p class="muted">No faulty attempts.</p></section>`;
  }
  const rows = faults
    .map((f) => {
      const state = assertJobState(f.state);
      return (
        `<tr data-job="${esc(f.job_id)}" data-attempt="${f.attempt}">` +
        `<td><code>${esc(f.job_id)}</code></td>` +
        `<td>${esc(f.node_id)}</td>` +
        `<td>${f.attempt}</td>` +
        `<td><span class="state-chip state-${state}">${state}</span></td>` +
        `<td>${esc(f.detail)}</td>` +
        `<td>${fmtTs(f.ts)}</td></tr>`
      );
    })
    .join("");

  // Re-running spawns a fresh run with a new seed; only offer it once this
  // one has settled, and only to roles the matrix lets control runs.
  const button =
    options.canRerun && options.runStatus !== "running"
      ? `<button data-action="rerun" class="danger">Re-run faulty as new run</button>`
      : "";

  return (
    `<section class="fault-panel" data-faults="${faults.length}">` +
    `<table class="fault-table"><thead><tr>` +
    `<th>job</th><th>node</th><th>attempt</th><th>state</th><th>detail</th><th>at</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>${button}</section>`
  );
}
