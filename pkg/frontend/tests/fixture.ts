/** Loads the captured gateway payloads the suites replay.
 *
 * The fixture is generated by scripts/capture-fixtures.py against a live
 * service instance: a seeded simulated run folded into polling frames (the
 * folding done server-side, independently of the client code under test),
 * plus catalog, site, and artifact payloads taken verbatim.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type {
  Artifact,
  FaultRecord,
  JobInfo,
  Lab,
  RunBrief,
  RunSummary,
  SiteOccupancy,
  TemplateBrief,
  TemplateFull,
  TransitionEvent,
} from "../src/types.js";

export interface PollFrame {
  ts: number;
  jobs: JobInfo[];
  summary: RunSummary;
}

export interface Fixture {
  run: RunBrief;
  final: { jobs: JobInfo[]; summary: RunSummary };
  frames: PollFrame[];
  events: TransitionEvent[];
  labs: Lab[];
  templates: TemplateBrief[];
  template_general: TemplateFull;
  sites: SiteOccupancy[];
  local_run: RunBrief;
  artifacts_local: Artifact[];
  artifacts_sim: Artifact[];
}

const here = dirname(fileURLToPath(import.meta.url));

export const fixture: Fixture = JSON.parse(
  readFileSync(join(here, "fixtures", "seeded-run.json"), "utf8"),
) as Fixture;

export const allFaultRecords: FaultRecord[] = fixture.final.summary.faulty_attempts;
