/** Occupancy bars, one per queue across every configured site. */

import { esc, fmtMinutes } from "../format.js";
import type { SiteOccupancy } from "../types.js";

export function renderQueueGauge(sites: SiteOccupancy[]): string {
  const blocks = sites
    .map((site) => {
      const bars = site.queues
        .map((q) => {
          const used = Math.max(0, q.cores - q.idle_cores);
          const pct = q.cores > 0 ? Math.round((used / q.cores) * 100) : 0;
          return (
            `<div class="gauge" data-queue="${esc(q.name)}" data-idle="${q.idle_cores}">` +
            `<div class="gauge-label">` +
            `<b>${esc(q.name)}</b> · wall ${fmtMinutes(q.walltime)} · ` +
            `${q.idle_cores}/${q.cores} idle · ${q.queued_jobs} queued · ` +
            `${q.running_jobs} running</div>` +
            `<div class="gauge-track"><div class="gauge-fill" style="width:${pct}%"></div></div>` +
            `</div>`
          );
        })
        .join("");
      return (
        `<div class="site-block" data-site="${esc(site.name)}">` +
        `<h3>${esc(site.name)} <span class="muted">(${esc(site.kind)})</span></h3>${bars}</div>`
      );
    })
    .join("");
  return `<section class="queue-gauge">${blocks}</section>`;
}
