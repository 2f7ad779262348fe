/** Component-level behavior: sweep form parsing, occupancy gauges, artifact
 * classification, DAG layout, and the formatting helpers. */

import { describe, expect, it } from "vitest";

import {
  isDownloadable,
  isPreviewable,
  renderArtifactList,
} from "../src/components/artifactList.js";
import { renderGraphView } from "../src/components/graphView.js";
import { renderQueueGauge } from "../src/components/queueGauge.js";
import {
  collectAxes,
  parseAxisValues,
  renderSweepForm,
} from "../src/components/sweepForm.js";
import { esc, fmtBytes, fmtMinutes, fmtParams } from "../src/format.js";
import { fixture } from "./fixture.js";

describe("sweep form parsing", () => {
  it("parses an all-numeric axis into numbers", () => {
    expect(parseAxisValues("840, 1680, 2520")).toEqual([840, 1680, 2520]);
    expect(parseAxisValues("0")).toEqual([0]);
    expect(parseAxisValues(" 1e3 ")).toEqual([1000]);
  });

  it("keeps strings when any entry is non-numeric", () => {
    expect(parseAxisValues("fast, slow")).toEqual(["fast", "slow"]);
    expect(parseAxisValues("840, quick")).toEqual(["840", "quick"]);
  });

  it("drops empty entries and handles empty input", () => {
    expect(parseAxisValues("")).toEqual([]);
    expect(parseAxisValues(" , ,")).toEqual([]);
    expect(parseAxisValues("840,,1680")).toEqual([840, 1680]);
  });

  it("collectAxes keeps edited axes and drops blanked ones", () => {
    expect(
      collectAxes([
        { axis: "atoms", value: "840, 1680" },
        { axis: "mode", value: "" },
      ]),
    ).toEqual({ atoms: [840, 1680] });
  });
});

describe("sweep form rendering", () => {
  it("shows the template's defaults and the point count", () => {
    const axes = fixture.template_general.workflow.sweep.axes;
    const html = renderSweepForm(axes);
    expect(html).toContain('data-axis="atoms"');
    const points = Object.values(axes).reduce((n, v) => n * v.length, 1);
    expect(html).toContain(`data-points="${points}"`);
    expect(html).toContain('data-action="submit-run"');
  });

  it("multiplies axis lengths into the point count", () => {
    const html = renderSweepForm({ a: [1, 2, 3], b: ["x", "y"] });
    expect(html).toContain('data-points="6"');
  });
});

describe("queue gauges", () => {
  it("draws one gauge per queue with the polled idle cores", () => {
    const html = renderQueueGauge(fixture.sites);
    for (const site of fixture.sites) {
      expect(html).toContain(`data-site="${site.name}"`);
      for (const q of site.queues) {
        expect(html).toContain(`data-queue="${q.name}" data-idle="${q.idle_cores}"`);
      }
    }
    const total = fixture.sites.reduce((n, s) => n + s.queues.length, 0);
    expect((html.match(/class="gauge"/g) ?? []).length).toBe(total);
  });
});

describe("artifact classification", () => {
  it("previews stored small images, offers downloads for other stored files", () => {
    const image = fixture.artifacts_local.find((a) => a.size_class === "image_small")!;
    const other = fixture.artifacts_local.find((a) => a.size_class !== "image_small")!;
    expect(isPreviewable(image)).toBe(true);
    expect(isDownloadable(other)).toBe(true);

    const html = renderArtifactList(fixture.artifacts_local);
    expect(html).toContain(
      `data-preview-job="${image.job_id}" data-preview-port="${image.port}"`,
    );
    expect(html).toContain(
      `data-action="download" data-job="${other.job_id}"`,
    );
  });

  it("marks synthesized simulator outputs as payload-free", () => {
    expect(fixture.artifacts_sim.length).toBeGreaterThan(0);
    for (const a of fixture.artifacts_sim) {
      expect(a.path.startsWith("sim://")).toBe(true);
      expect(isPreviewable(a)).toBe(false);
      expect(isDownloadable(a)).toBe(false);
    }
    const html = renderArtifactList(fixture.artifacts_sim);
    expect((html.match(/synthetic \(no stored payload\)/g) ?? []).length).toBe(
      fixture.artifacts_sim.length,
    );
    expect(html).not.toContain('data-action="download"');
  });

  it("flags sizes outside the expected band", () => {
    const odd = { ...fixture.artifacts_local[0]!, within_expected: false };
    expect(renderArtifactList([odd])).toContain("outside expected band");
  });
});

describe("workflow graph view", () => {
  const doc = fixture.template_general.workflow;

  it("draws every node and every edge", () => {
    const html = renderGraphView(doc);
    expect((html.match(/<g class="node"/g) ?? []).length).toBe(doc.graph.nodes.length);
    expect((html.match(/<line /g) ?? []).length).toBe(doc.graph.edges.length);
    for (const node of doc.graph.nodes) {
      expect(html).toContain(`data-node="${node.id}"`);
    }
  });

  it("layers nodes by dependency depth, sources in the first column", () => {
    const html = renderGraphView(doc);
    // lammps feeds everything else, so it sits at x = 0…
    expect(html).toMatch(/data-node="lammps" transform="translate\(0,/);
    // …and no consumer shares that column.
    const zeros = html.match(/transform="translate\(0,/g) ?? [];
    expect(zeros.length).toBe(1);
  });

  it("survives a cyclic document without hanging", () => {
    const cyclic = {
      ...doc,
      graph: {
        nodes: [
          { id: "a", name: "a", ports: [] },
          { id: "b", name: "b", ports: [] },
        ],
        edges: [
          { from: "a.out", to: "b.in" },
          { from: "b.out", to: "a.in" },
        ],
      },
    };
    const html = renderGraphView(cyclic);
    expect(html).toContain('data-node="a"');
    expect(html).toContain('data-node="b"');
  });
});

describe("formatting helpers", () => {
  it("escapes HTML-significant characters", () => {
    expect(esc(`<b a="x">&'`)).toBe("&lt;b a=&quot;x&quot;&gt;&amp;&#39;");
  });

  it("renders durations in the largest clean unit", () => {
    expect(fmtMinutes(45)).toBe("45m");
    expect(fmtMinutes(90)).toBe("90m");
    expect(fmtMinutes(120)).toBe("2h");
    expect(fmtMinutes(11520)).toBe("8d");
  });

  it("renders byte sizes with sensible units", () => {
    expect(fmtBytes(300)).toBe("300 B");
    expect(fmtBytes(2_000_000)).toBe("2.0 MB");
  });

  it("renders parameter points stably ordered", () => {
    expect(fmtParams({ b: 2, a: 1 })).toBe("a=1, b=2");
  });
});
