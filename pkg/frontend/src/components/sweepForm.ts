/** Axis editor: one row per sweep axis, values as a comma-separated list. */

import { esc } from "../format.js";

/** Parse one axis input the same way the service expects values: every
 * entry numeric means numbers, otherwise strings. Empty entries dropped. */
export function parseAxisValues(text: string): unknown[] {
  const parts = text
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
  if (parts.length === 0) return [];
  const allNumeric = parts.every((p) => p !== "" && !Number.isNaN(Number(p)));
  return allNumeric ? parts.map(Number) : parts;
}

export function renderSweepForm(
  axes: Record<string, unknown[]>,
  backends: string[] = ["sim", "local"],
): string {
  const rows = Object.keys(axes)
    .sort()
    .map((name) => {
      const joined = (axes[name] ?? []).map(String).join(", ");
      return (
        `<label class="axis-row"><span class="axis-name">${esc(name)}</span>` +
        `<input type="text" data-axis="${esc(name)}" value="${esc(joined)}"></label>`
      );
    })
    .join("");

  const backendOptions = backends
    .map((b) => `<option value="${esc(b)}">${esc(b)}</option>`)
    .join("");

  const points = Object.values(axes).reduce((acc, v) => acc * Math.max(v.length, 1), 1);

  return (
    `<form class="sweep-form" data-points="${points}">${rows}` +
    `<label class="axis-row"><span class="axis-name">backend</span>` +
    `<select data-field="backend">${backendOptions}</select></label>` +
    `<label class="axis-row"><span class="axis-name">seed</span>` +
    `<input type="number" data-field="seed" value="0"></label>` +
    `<p class="muted">One job per component per parameter point.</p>` +
    `<button type="submit" data-action="submit-run">Submit run</button></form>`
  );
}

/** Collect the edited axes back out of the form's inputs. */
export function collectAxes(inputs: { axis: string; value: string }[]): Record<string, unknown[]> {
  const out: Record<string, unknown[]> = {};
  for (const { axis, value } of inputs) {
    const values = parseAxisValues(value);
    if (values.length > 0) out[axis] = values;
  }
  return out;
}
