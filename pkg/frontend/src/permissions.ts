/** Client-side mirror of the service's permission matrix.
 *
 * Used only to decide which controls to draw; the service re-checks every
 * call, so a stale mirror degrades to a 403 surfaced inline, never to a
 * privilege escalation. */

import type { Role } from "./types.js";

const ALL: readonly Role[] = ["admin", "power_user", "end_user"];
const AUTHORS: readonly Role[] = ["admin", "power_user"];

export const ACTIONS = {
  "users.manage": ["admin"] as readonly Role[],
  "templates.read": ALL,
  "templates.create": AUTHORS,
  "templates.publish": AUTHORS,
  "labs.read": ALL,
  "sites.read": ALL,
  "runs.create": ALL,
  "runs.read": ALL,
  "runs.control": ALL,
  "jobs.read": ALL,
  "artifacts.read": ALL,
} as const;

export type Action = keyof typeof ACTIONS;

export function allowed(role: Role, action: Action): boolean {
  return ACTIONS[action].includes(role);
}
