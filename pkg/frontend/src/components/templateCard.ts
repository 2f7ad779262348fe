/** Catalog card for one workflow template version. */

import { esc } from "../format.js";
import type { TemplateBrief } from "../types.js";

export function renderTemplateCard(
  t: TemplateBrief,
  options: { canPublish: boolean; canClone: boolean },
): string {
  const status = t.published
    ? `<span class="chip chip-published">published</span>`
    : `<span class="chip chip-draft">draft</span>`;
  const actions = [
    `<a class="button" href="#/configure/${encodeURIComponent(t.name)}">Configure &amp; submit</a>`,
  ];
  if (!t.published && options.canPublish) {
    actions.push(
      `<button data-action="publish" data-template="${esc(t.name)}" data-version="${t.version}">Publish</button>`,
    );
  }
  if (options.canClone) {
    actions.push(
      `<button data-action="clone" data-template="${esc(t.name)}">Clone draft</button>`,
    );
  }
  return (
    `<article class="template-card" data-template="${esc(t.name)}">` +
    `<header><h3>${esc(t.name)} <small>v${t.version}</small></h3>${status}</header>` +
    `<p>${esc(t.description)}</p>` +
    `<p class="muted">owner: ${esc(t.owner)}</p>` +
    `<footer>${actions.join(" ")}</footer></article>`
  );
}
