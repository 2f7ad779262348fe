/** Run outputs: small images get an inline preview, the rest a download
 * action; synthetic simulator outputs (sim:// paths) have no payload. */

import { esc, fmtBytes } from "../format.js";
import type { Artifact } from "../types.js";

export function isPreviewable(a: Artifact): boolean {
  return a.size_class === "image_small" && !a.path.startsWith("sim://");
}

export function isDownloadable(a: Artifact): boolean {
  return !a.path.startsWith("sim://");
}

export function renderArtifactList(artifacts: Artifact[]): string {
  if (artifacts.length === 0) {
    return `<section class="artifact-list" data-artifacts="0"><p class="muted">No artifacts recorded.</p></section>`;
  }
  const rows = artifacts
    .map((a) => {
      const size = `${fmtBytes(a.bytes)}${a.within_expected ? "" : " ⚠ outside expected band"}`;
      let action: string;
      if (isPreviewable(a)) {
        // The app swaps the placeholder for a blob URL after an
        // authenticated fetch; bare <img src> cannot carry the token.
        action =
          `<img class="artifact-preview" alt="${esc(a.port)}" ` +
          `data-preview-job="${esc(a.job_id)}" data-preview-port="${esc(a.port)}">`;
      } else if (isDownloadable(a)) {
        action =
          `<button data-action="download" data-job="${esc(a.job_id)}" ` +
          `data-port="${esc(a.port)}">Download</button>`;
      } else {
        action = `<span class="muted">synthetic (no stored payload)</span>`;
      }
      return (
        `<tr data-job="${esc(a.job_id)}" data-port="${esc(a.port)}">` +
        `<td><code>${esc(a.job_id)}</code></td><td>${esc(a.port)}</td>` +
        `<td>${esc(a.size_class)}</td><td>${esc(size)}</td><td>${action}</td></tr>`
      );
    })
    .join("");
  return (
    `<section class="artifact-list" data-artifacts="${artifacts.length}">` +
    `<table><thead><tr><th>job</th><th>port</th><th>class</th><th>size</th><th></th></tr></thead>` +
    `<tbody>${rows}</tbody></table></section>`
  );
}
