#!/usr/bin/env python3
"""Regenerate tests/fixtures/seeded-run.json from a live gateway instance.

Runs the service in-process against a throwaway store, submits a seeded
simulated run plus a small local run, and captures the API payloads the UI
tests replay. Intermediate polling frames are folded from the event log by
this script, independently of the client code under test; the final frame is
the verbatim /jobs + /summary response pair.

Usage: python3 scripts/capture-fixtures.py   (from the frontend/ directory)
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from collections import Counter

from fastapi.testclient import TestClient

from gatehub.api import create_app

FAULTY = {"failed", "killed_walltime", "terminally_failed"}

SIM_RUN = {
    "template": "general",
    "sweep": {"axes": {"atoms": [840, 1680]}},
    "backend": "sim",
    "config": {"seed": 8, "sigma": 0.25, "failure_rate": 0.4,
               "policy": {"safety": 1.0}},
}

LOCAL_RUN = {
    "template": "tem",
    "sweep": {"axes": {"atoms": [840]}},
    "backend": "local",
    "config": {"policy": {"safety": 1.0}, "sigma": 0.0, "size_scale": 1e-3},
}


def fold_frames(events: list[dict], jobs_final: list[dict], run_id: str,
                final_faults: list[dict], n_frames: int = 8) -> list[dict]:
    """Job-grid + summary snapshots as the API would have served them
    mid-run, reconstructed from the transition log.

    The fold decides which faults exist at each cut; the wording of each
    fault record comes from the service's own final history (the summary
    endpoint enriches the raw transition detail).
    """
    meta = {j["job_id"]: (j["node"], j["params"]) for j in jobs_final}
    worded = {(f["job_id"], f["ts"], f["state"]): f for f in final_faults}
    cuts = sorted({e["ts"] for e in events})
    picks = sorted({cuts[min(i * len(cuts) // n_frames, len(cuts) - 1)]
                    for i in range(1, n_frames + 1)})

    frames = []
    for cut in picks:
        state = {jid: "created" for jid in meta}
        attempt = {jid: 1 for jid in meta}
        faulty_attempts = []
        for e in events:
            if e["ts"] > cut:
                break
            state[e["job"]] = e["to"]
            if e["to"] == "eligible" and e["from"] in FAULTY:
                attempt[e["job"]] += 1
            if e["to"] in FAULTY:
                record = worded[(e["job"], e["ts"], e["to"])]
                assert record["attempt"] == attempt[e["job"]], \
                    f"attempt mismatch for {e['job']} at {e['ts']}"
                faulty_attempts.append(record)
        jobs = [
            {"job_id": jid, "node": meta[jid][0], "state": state[jid],
             "attempt": attempt[jid], "params": meta[jid][1]}
            for jid in sorted(meta)
        ]
        frames.append({
            "ts": cut,
            "jobs": jobs,
            "summary": {
                "run_id": run_id,
                "total": len(jobs),
                "state_counts": dict(Counter(j["state"] for j in jobs)),
                "faulty_jobs": sorted(j["job_id"] for j in jobs
                                      if j["state"] in FAULTY),
                "faulty_attempts": faulty_attempts,
            },
        })
    return frames


def main() -> int:
    out_path = os.path.join(os.path.dirname(__file__), "..",
                            "tests", "fixtures", "seeded-run.json")
    with tempfile.TemporaryDirectory() as root:
        with TestClient(create_app(store_root=root, admin_password="pw")) as c:
            token = c.post("/api/v1/auth/login",
                           json={"username": "admin", "password": "pw"}
                           ).json()["token"]
            h = {"Authorization": f"Bearer {token}"}

            r = c.post("/api/v1/runs", headers=h, json=SIM_RUN)
            r.raise_for_status()
            run = r.json()
            rid = run["run_id"]
            summary = run.pop("summary")
            jobs = c.get(f"/api/v1/runs/{rid}/jobs", headers=h).json()
            events = c.get(f"/api/v1/runs/{rid}/events", headers=h).json()

            r = c.post("/api/v1/runs", headers=h, json=LOCAL_RUN)
            r.raise_for_status()
            local = r.json()
            artifacts = c.get(f"/api/v1/runs/{local['run_id']}/artifacts",
                              headers=h).json()

            # A draft template so the catalog fixtures cover unpublished cards.
            c.post("/api/v1/templates/tem/clone", headers=h).raise_for_status()

            fixture = {
                "run": run,
                "final": {"jobs": jobs, "summary": summary},
                "frames": fold_frames(events, jobs, rid,
                                      summary["faulty_attempts"]),
                "events": events,
                "labs": c.get("/api/v1/labs", headers=h).json(),
                "templates": c.get("/api/v1/templates", headers=h).json(),
                "template_general": c.get("/api/v1/templates/general",
                                          headers=h).json(),
                "sites": c.get("/api/v1/sites", headers=h).json(),
                "local_run": local,
                "artifacts_local": artifacts,
                "artifacts_sim": c.get(f"/api/v1/runs/{rid}/artifacts",
                                       headers=h).json(),
            }

    # The fixtures must exercise the fault path and the kill-then-resubmit
    # sequence; refuse to write a capture that lost those scenarios.
    assert summary["faulty_attempts"], "seeded run produced no faults"
    kill_jobs = [f["job_id"] for f in summary["faulty_attempts"]
                 if f["state"] == "killed_walltime"]
    assert kill_jobs, "seeded run produced no walltime kill"
    frames = fixture["frames"]
    # Kills are remediated in the same scheduling instant, so the board never
    # holds killed_walltime across a poll; the kill must instead surface in
    # some mid-run frame's fault history, and terminal failures (absorbing)
    # must be visible as live states.
    kill_in_history = any(f["state"] == "killed_walltime"
                          for fr in frames
                          for f in fr["summary"]["faulty_attempts"])
    terminal_on_board = any(j["state"] == "terminally_failed"
                            for fr in frames for j in fr["jobs"])
    recovered = any(j["job_id"] in kill_jobs and j["attempt"] > 1
                    and j["state"] == "finished"
                    for j in fixture["final"]["jobs"])
    assert kill_in_history, "no frame's fault history shows the kill"
    assert terminal_on_board, "no frame shows a terminally failed job"
    assert recovered, "killed job did not recover by the final frame"
    assert any(not t["published"] for t in fixture["templates"]), "no draft template"

    with open(out_path, "w") as f:
        json.dump(fixture, f, indent=2, sort_keys=True)
    print(f"wrote {out_path}: {len(frames)} frames, "
          f"{len(events)} events, {len(summary['faulty_attempts'])} faults")
    return 0


if __name__ == "__main__":
    sys.exit(main())
