/** Read-only DAG rendering: nodes in topological columns, SVG edges.
 * Authoring stays file/CLI based; this view only explains what will run. */

import { esc } from "../format.js";
import type { WorkflowDoc } from "../types.js";

interface Placed {
  id: string;
  name: string;
  x: number;
  y: number;
}

const BOX_W = 120;
const BOX_H = 36;
const GAP_X = 60;
const GAP_Y = 18;

/** Longest-path layering; input graphs are validated acyclic server-side,
 * but a cycle sneaking in must not hang the page, so depth is bounded. */
function layer(doc: WorkflowDoc): Map<string, number> {
  const ids = doc.graph.nodes.map((n) => n.id);
  const preds = new Map<string, string[]>(ids.map((id) => [id, []]));
  for (const e of doc.graph.edges) {
    const from = e.from.split(".")[0]!;
    const to = e.to.split(".")[0]!;
    preds.get(to)?.push(from);
  }
  const depth = new Map<string, number>();
  const resolve = (id: string, guard: number): number => {
    if (depth.has(id)) return depth.get(id)!;
    if (guard > ids.length) return 0;
    const ps = preds.get(id) ?? [];
    const d = ps.length === 0 ? 0 : Math.max(...ps.map((p) => resolve(p, guard + 1))) + 1;
    depth.set(id, d);
    return d;
  };
  for (const id of ids) resolve(id, 0);
  return depth;
}

export function renderGraphView(doc: WorkflowDoc): string {
  const depth = layer(doc);
  const columns = new Map<number, string[]>();
  for (const node of doc.graph.nodes) {
    const d = depth.get(node.id) ?? 0;
    const col = columns.get(d) ?? [];
    col.push(node.id);
    columns.set(d, col);
  }

  const placed = new Map<string, Placed>();
  for (const node of doc.graph.nodes) {
    const d = depth.get(node.id) ?? 0;
    const col = columns.get(d)!;
    const row = col.indexOf(node.id);
    placed.set(node.id, {
      id: node.id,
      name: node.name,
      x: d * (BOX_W + GAP_X),
      y: row * (BOX_H + GAP_Y),
    });
  }

  const width = (Math.max(...[...depth.values()], 0) + 1) * (BOX_W + GAP_X);
  const height =
    Math.max(...[...columns.values()].map((c) => c.length), 1) * (BOX_H + GAP_Y);

  const edges = doc.graph.edges
    .map((e) => {
      const a = placed.get(e.from.split(".")[0]!);
      const b = placed.get(e.to.split(".")[0]!);
      if (!a || !b) return "";
      return (
        `<line x1="${a.x + BOX_W}" y1="${a.y + BOX_H / 2}" ` +
        `x2="${b.x}" y2="${b.y + BOX_H / 2}" class="edge" marker-end="url(#arrow)"/>`
      );
    })
    .join("");

  const boxes = [...placed.values()]
    .map(
      (p) =>
        `<g class="node" data-node="${esc(p.id)}" transform="translate(${p.x},${p.y})">` +
        `<rect width="${BOX_W}" height="${BOX_H}" rx="6"/>` +
        `<text x="${BOX_W / 2}" y="${BOX_H / 2 + 4}" text-anchor="middle">${esc(p.id)}</text></g>`,
    )
    .join("");

  return (
    `<svg class="graph-view" viewBox="0 0 ${width} ${height}" ` +
    `width="${width}" height="${height}">` +
    `<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="7" refY="3" orient="auto">` +
    `<path d="M0,0 L7,3 L0,6 Z"/></marker></defs>${edges}${boxes}</svg>`
  );
}
