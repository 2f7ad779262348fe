/** Job grid colored by state, one cell per job, grouped by component node. */

import { esc, fmtParams } from "../format.js";
import { assertJobState, type JobInfo, type JobState } from "../types.js";

/** Per-state totals derived from the grid's own cells.
 *
 * Zero entries are omitted so the result is directly comparable to the
 * summary endpoint's state_counts, which only lists states that occur. */
export function runBoardCounts(jobs: JobInfo[]): Record<string, number> {
  const counts: Record<string, number> = {};
  for (const job of jobs) {
    const state = assertJobState(job.state);
    counts[state] = (counts[state] ?? 0) + 1;
  }
  return counts;
}

function cell(job: JobInfo): string {
  const state: JobState = assertJobState(job.state);
  const label = fmtParams(job.params);
  const title = `${job.job_id} · ${label} · ${state} (attempt ${job.attempt})`;
  return (
    `<div class="cell state-${state}" data-job="${esc(job.job_id)}" ` +
    `data-state="${state}" title="${esc(title)}">` +
    `<span class="cell-params">${esc(label)}</span>` +
    `<span class="cell-state">${state}</span>` +
    (job.attempt > 1 ? `<span class="cell-attempt">a${job.attempt}</span>` : "") +
    `</div>`
  );
}

export function renderRunBoard(jobs: JobInfo[]): string {
  const byNode = new Map<string, JobInfo[]>();
  for (const job of jobs) {
    const row = byNode.get(job.node) ?? [];
    row.push(job);
    byNode.set(job.node, row);
  }

  const counts = runBoardCounts(jobs);
  const legend = Object.keys(counts)
    .sort()
    .map(
      (state) =>
        `<span class="legend-item state-${state}" data-state="${state}">` +
        `${state}: <b data-count="${state}">${counts[state]}</b></span>`,
    )
    .join(" ");

  const rows = [...byNode.keys()]
    .sort()
    .map((node) => {
      const cells = byNode
        .get(node)!
        .slice()
        .sort((a, b) => fmtParams(a.params).localeCompare(fmtParams(b.params)))
        .map(cell)
        .join("");
      return (
        `<div class="board-row"><div class="board-node">${esc(node)}</div>` +
        `<div class="board-cells">${cells}</div></div>`
      );
    })
    .join("");

  return (
    `<section class="run-board" data-total="${jobs.length}">` +
    `<div class="board-legend">${legend}</div>${rows}</section>`
  );
}
