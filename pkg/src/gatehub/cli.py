"""Command-line interface.

Offline commands (validate, expand, simulate) work on local files with no
service running. Online commands (login, submit, status, summary, fetch)
talk to a gateway over HTTP; the address comes from --api or GATEHUB_ADDR
and the token from --token or GATEHUB_TOKEN.

Exit codes: 0 success, 1 operation failed, 2 bad usage or unreadable input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .data import bundled_sites, default_profiles
from .engine import RunConfig, run_simulated
from .errors import GatehubError, ParseError
from .graphs import validate_graph
from .resources import sites_from_dict
from .scheduling import Policy
from .workflows import expand_sweep, load_workflow


def _fail(message: str, code: int = 1) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_workflow(path: str):
    try:
        return load_workflow(path)
    except (OSError, json.JSONDecodeError, ParseError) as exc:
        raise SystemExit(_fail(f"cannot read workflow {path}: {exc}", 2))


def _load_sites(path: str | None) -> list:
    if path is None:
        return bundled_sites("ntu-hpcc")
    try:
        with open(path) as f:
            return sites_from_dict(json.load(f))
    except (OSError, json.JSONDecodeError, ParseError) as exc:
        raise SystemExit(_fail(f"cannot read sites {path}: {exc}", 2))


# -- offline commands --------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    wf = _load_workflow(args.workflow)
    report = validate_graph(wf.graph)
    if args.json:
        print(json.dumps({"ok": report.ok, "violations": [str(v) for v in report.violations]}))
    else:
        if report.ok:
            print("workflow is valid")
        for v in report.violations:
            print(f"violation: {v}")
    return 0 if report.ok else 1


def cmd_expand(args: argparse.Namespace) -> int:
    wf = _load_workflow(args.workflow)
    try:
        jobset = expand_sweep(wf, run_id=args.run_id, profiles=default_profiles())
    except GatehubError as exc:
        return _fail(str(exc))
    rows = [
        {
            "job_id": j.id,
            "node": j.node_id,
            "params": j.params,
            "depends_on": sorted(j.depends_on),
        }
        for j in sorted(jobset.jobs, key=lambda j: (j.node_id, j.id))
    ]
    if args.json:
        print(json.dumps({"run_id": jobset.workflow_run_id, "jobs": rows}, indent=2))
    else:
        print(f"run {jobset.workflow_run_id}: {len(rows)} jobs")
        for row in rows:
            deps = f" <- {','.join(row['depends_on'])}" if row["depends_on"] else ""
            print(f"  {row['job_id']}  {row['node']}  {row['params']}{deps}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    wf = _load_workflow(args.workflow)
    sites = _load_sites(args.sites)
    config = RunConfig(
        policy=Policy(safety=args.safety),
        seed=args.seed,
        sigma=args.sigma,
        failure_rate=args.failure_rate,
    )
    try:
        result = run_simulated(wf, sites, default_profiles(), config)
    except GatehubError as exc:
        return _fail(str(exc))
    summary = result.summary()
    if args.json:
        print(
            json.dumps(
                {"summary": summary.to_dict(), "events": [e.to_dict() for e in result.trace]},
                indent=2,
            )
        )
    else:
        print(f"run {summary.run_id}: {summary.total} jobs")
        for state, count in sorted(summary.state_counts.items()):
            print(f"  {state}: {count}")
        print(f"  faulty attempts: {len(summary.faulty_attempts)}")
    finished = summary.state_counts.get("finished", 0)
    return 0 if finished == summary.total else 1


# -- online commands -----------------------------------------------------------


def _api_base(args: argparse.Namespace) -> str:
    addr = args.api or os.environ.get("GATEHUB_ADDR", "127.0.0.1:8800")
    if not addr.startswith("http"):
        addr = f"http://{addr}"
    return addr.rstrip("/") + "/api/v1"


def _headers(args: argparse.Namespace) -> dict:
    token = args.token or os.environ.get("GATEHUB_TOKEN", "")
    return {"Authorization": f"Bearer {token}"} if token else {}


def _request(method: str, url: str, **kwargs):
    import requests

    try:
        resp = requests.request(method, url, timeout=60, **kwargs)
    except requests.RequestException as exc:
        raise SystemExit(_fail(f"cannot reach gateway: {exc}"))
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise SystemExit(_fail(f"{method} {url} -> {resp.status_code}: {detail}"))
    return resp


def cmd_login(args: argparse.Namespace) -> int:
    base = _api_base(args)
    resp = _request(
        "POST", f"{base}/auth/login", json={"username": args.user, "password": args.password}
    )
    body = resp.json()
    if args.json:
        print(json.dumps(body))
    else:
        print(body["token"])
        print(f"# export GATEHUB_TOKEN={body['token']}", file=sys.stderr)
    return 0


def _parse_axes(pairs: list[str]) -> dict:
    axes = {}
    for pair in pairs:
        if "=" not in pair:
            raise SystemExit(_fail(f"bad --axis {pair!r}, expected name=v1,v2", 2))
        name, _, values = pair.partition("=")
        parsed = []
        for v in values.split(","):
            v = v.strip()
            try:
                parsed.append(int(v))
            except ValueError:
                try:
                    parsed.append(float(v))
                except ValueError:
                    parsed.append(v)
        axes[name] = parsed
    return axes


def cmd_submit(args: argparse.Namespace) -> int:
    base = _api_base(args)
    payload: dict = {"template": args.template, "backend": args.backend}
    if args.version is not None:
        payload["version"] = args.version
    if args.axis:
        payload["sweep"] = {"axes": _parse_axes(args.axis)}
    config: dict = {}
    if args.seed is not None:
        config["seed"] = args.seed
    if args.safety is not None:
        config["policy"] = {"safety": args.safety}
    if config:
        payload["config"] = config
    headers = _headers(args)
    if args.idempotency_key:
        headers["Idempotency-Key"] = args.idempotency_key
    resp = _request("POST", f"{base}/runs", json=payload, headers=headers)
    body = resp.json()
    if args.json:
        print(json.dumps(body, indent=2))
    else:
        print(f"run {body['run_id']} {body['status']}")
        if body.get("summary"):
            for state, count in sorted(body["summary"]["state_counts"].items()):
                print(f"  {state}: {count}")
    return 0


def cmd_status(args: argparse.Namespace) -> int:
    base = _api_base(args)
    resp = _request("GET", f"{base}/runs/{args.run_id}", headers=_headers(args))
    body = resp.json()
    if args.json:
        print(json.dumps(body, indent=2))
    else:
        print(f"run {body['run_id']}: {body['status']}")
        for job_id, info in sorted(body.get("job_states", {}).items()):
            print(f"  {job_id}  {info['node']}  {info['state']}  attempt {info['attempt']}")
    return 0


def cmd_summary(args: argparse.Namespace) -> int:
    base = _api_base(args)
    resp = _request("GET", f"{base}/runs/{args.run_id}/summary", headers=_headers(args))
    body = resp.json()
    if args.json:
        print(json.dumps(body, indent=2))
    else:
        if not body.get("state_counts"):
            print(f"run {args.run_id}: no summary yet")
            return 1
        print(f"run {body['run_id']}: {body['total']} jobs")
        for state, count in sorted(body["state_counts"].items()):
            print(f"  {state}: {count}")
        print(f"  faulty attempts: {len(body['faulty_attempts'])}")
        for fault in body["faulty_attempts"]:
            print(
                f"  fault: {fault['job_id']} attempt {fault['attempt']}"
                f" {fault['state']} {fault['detail']}"
            )
    return 0


def cmd_fetch(args: argparse.Namespace) -> int:
    base = _api_base(args)
    resp = _request("GET", f"{base}/runs/{args.run_id}/artifacts", headers=_headers(args))
    index = resp.json()
    os.makedirs(args.dest, exist_ok=True)
    fetched = 0
    for art in index:
        if str(art["path"]).startswith("sim://"):
            continue
        url = f"{base}/runs/{args.run_id}/artifacts/{art['job_id']}/{art['port']}"
        file_resp = _request("GET", url, headers=_headers(args))
        target = os.path.join(args.dest, f"{art['job_id']}-{os.path.basename(art['path'])}")
        with open(target, "wb") as f:
            f.write(file_resp.content)
        fetched += 1
    if args.json:
        print(json.dumps({"artifacts": index, "fetched": fetched, "dest": args.dest}))
    else:
        print(f"{len(index)} artifacts listed, {fetched} payloads saved to {args.dest}")
        for art in index:
            print(f"  {art['job_id']}/{art['port']}  {art['bytes']}B  {art['size_class']}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    addr = args.addr or os.environ.get("GATEHUB_ADDR", "127.0.0.1:8800")
    host, _, port = addr.partition(":")
    app = create_app(store_root=args.store)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8800))
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gatehub", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, online: bool = False) -> None:
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if online:
            p.add_argument("--api", default=None, help="gateway address (default GATEHUB_ADDR)")
            p.add_argument("--token", default=None, help="bearer token (default GATEHUB_TOKEN)")

    p = sub.add_parser("validate", help="check a workflow document")
    p.add_argument("workflow")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("expand", help="expand a sweep into its job set")
    p.add_argument("workflow")
    p.add_argument("--run-id", default=None)
    common(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("simulate", help="run a workflow on a simulated cluster")
    p.add_argument("workflow")
    p.add_argument("--sites", default=None, help="sites JSON (default: bundled cluster)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--failure-rate", type=float, default=0.0)
    p.add_argument("--safety", type=float, default=1.15)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("login", help="obtain a bearer token")
    p.add_argument("--user", required=True)
    p.add_argument("--password", required=True)
    common(p, online=True)
    p.set_defaults(func=cmd_login)

    p = sub.add_parser("submit", help="create a run from a stored template")
    p.add_argument("--template", required=True)
    p.add_argument("--version", type=int, default=None)
    p.add_argument("--axis", action="append", default=[], help="axis values, e.g. atoms=840,1680")
    p.add_argument("--backend", choices=["sim", "local"], default="sim")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--safety", type=float, default=None)
    p.add_argument("--idempotency-key", default=None)
    common(p, online=True)
    p.set_defaults(func=cmd_submit)

    p = sub.add_parser("status", help="show a run's record and job states")
    p.add_argument("run_id")
    common(p, online=True)
    p.set_defaults(func=cmd_status)

    p = sub.add_parser("summary", help="show a run's outcome summary")
    p.add_argument("run_id")
    common(p, online=True)
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("fetch", help="download a run's artifacts")
    p.add_argument("run_id")
    p.add_argument("--dest", default="artifacts")
    common(p, online=True)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("serve", help="start the gateway service")
    p.add_argument("--store", default=None, help="store directory (default GATEHUB_STORE)")
    p.add_argument("--addr", default=None, help="host:port (default GATEHUB_ADDR)")
    common(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        raise exc
    except GatehubError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
