/** The fault panel must list exactly the service's faulty set — same
 * records, same order, same multiplicity — at every poll. */

import { describe, expect, it } from "vitest";

import { renderFaultPanel } from "../src/components/faultPanel.js";
import { fixture } from "./fixture.js";

function renderedRows(html: string): { job: string; attempt: number }[] {
  const rows: { job: string; attempt: number }[] = [];
  const re = /<tr data-job="([^"]+)" data-attempt="(\d+)">/g;
  for (let m = re.exec(html); m !== null; m = re.exec(html)) {
    rows.push({ job: m[1]!, attempt: Number(m[2]!) });
  }
  return rows;
}

const opts = { canRerun: true, runStatus: "completed" };

describe("fault panel contents", () => {
  it("lists exactly the API's faulty attempts, in order, at every frame", () => {
    for (const frame of fixture.frames) {
      const html = renderFaultPanel(frame.summary.faulty_attempts, opts);
      expect(renderedRows(html)).toEqual(
        frame.summary.faulty_attempts.map((f) => ({
          job: f.job_id,
          attempt: f.attempt,
        })),
      );
      expect(html).toContain(`data-faults="${frame.summary.faulty_attempts.length}"`);
    }
  });

  it("matches the verbatim final summary payload", () => {
    const html = renderFaultPanel(fixture.final.summary.faulty_attempts, opts);
    expect(renderedRows(html).length).toBe(
      fixture.final.summary.faulty_attempts.length,
    );
  });

  it("keeps a walltime kill in the history after the job was resubmitted", () => {
    // The engine remediates kills within the same scheduling instant, so the
    // board never shows the state across a poll — the panel's history is
    // where the kill stays visible.
    const frame = fixture.frames.find((f) =>
      f.summary.faulty_attempts.some((a) => a.state === "killed_walltime"),
    );
    expect(frame).toBeDefined();
    const onBoard = frame!.jobs.filter((j) => j.state === "killed_walltime");
    expect(onBoard).toEqual([]);
    const html = renderFaultPanel(frame!.summary.faulty_attempts, opts);
    expect(html).toContain("state-killed_walltime");
  });

  it("renders each record's node, state chip, detail, and timestamp", () => {
    const fault = fixture.final.summary.faulty_attempts[0]!;
    const html = renderFaultPanel([fault], opts);
    expect(html).toContain(`<td>${fault.node_id}</td>`);
    expect(html).toContain(`state-${fault.state}`);
    expect(html).toContain(fault.detail);
    expect(html).toContain(`${fault.ts.toFixed(1)} min`);
  });

  it("shows the empty message when nothing failed", () => {
    const html = renderFaultPanel([], opts);
    expect(html).toContain('data-faults="0"');
    expect(html).not.toContain("<table");
  });
});

describe("fault panel re-run control", () => {
  const faults = fixture.final.summary.faulty_attempts;

  it("offers re-run once the run settled and the role may control runs", () => {
    const html = renderFaultPanel(faults, { canRerun: true, runStatus: "completed" });
    expect(html).toContain('data-action="rerun"');
  });

  it("hides re-run while the run is still executing", () => {
    const html = renderFaultPanel(faults, { canRerun: true, runStatus: "running" });
    expect(html).not.toContain('data-action="rerun"');
  });

  it("hides re-run from roles without run control", () => {
    const html = renderFaultPanel(faults, { canRerun: false, runStatus: "completed" });
    expect(html).not.toContain('data-action="rerun"');
  });
});
