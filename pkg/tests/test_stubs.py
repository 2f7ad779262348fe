"""Stub executables and the local process executor."""

from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from gatehub.errors import SpawnError
from gatehub.localexec import LocalExecutor, resolve_executable
from gatehub.stubs import STUB_NAMES, STUB_SIZES


def run_stub(name: str, *args: str, cwd=None, env=None) -> subprocess.CompletedProcess:
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "gatehub.stubs", name, *args],
        cwd=cwd,
        env=full_env,
        capture_output=True,
        text=True,
        timeout=30,
    )


def test_stub_writes_exact_output_size(tmp_path):
    res = run_stub("mock-lammps", "--atoms", "840", "--minutes", "0", "--out", "dump.txt",
                   cwd=tmp_path)
    assert res.returncode == 0
    assert "done" in res.stdout
    assert os.path.getsize(tmp_path / "dump.txt") == STUB_SIZES["lammps"]


@pytest.mark.parametrize("name", STUB_NAMES)
def test_every_stub_runs_clean(name, tmp_path):
    res = run_stub(name, "--minutes", "0", "--out", "o.bin", cwd=tmp_path)
    assert res.returncode == 0
    assert os.path.getsize(tmp_path / "o.bin") == STUB_SIZES[name.removeprefix("mock-")]


def test_stub_fail_flag_exits_nonzero(tmp_path):
    res = run_stub("mock-lammps", "--minutes", "0", "--fail", cwd=tmp_path)
    assert res.returncode == 1
    assert "injected failure" in res.stderr


def test_stub_unknown_name_is_usage_error(tmp_path):
    res = run_stub("mock-unknown", cwd=tmp_path)
    assert res.returncode == 2
    assert "usage" in res.stderr


def test_stub_checkpoint_roundtrip(tmp_path):
    ck1 = str(tmp_path / "segment-1.ckpt")
    res = run_stub("mock-lammps", "--minutes", "0", cwd=tmp_path,
                   env={"CKPT_IN": "", "CKPT_OUT": ck1})
    assert res.returncode == 0
    assert open(ck1).read() == "1"

    ck2 = str(tmp_path / "segment-2.ckpt")
    res = run_stub("mock-lammps", "--minutes", "0", cwd=tmp_path,
                   env={"CKPT_IN": ck1, "CKPT_OUT": ck2})
    assert res.returncode == 0
    assert open(ck2).read() == "2"
    assert "segments_done=2" in res.stdout


def test_stub_missing_checkpoint_exits_3(tmp_path):
    res = run_stub("mock-lammps", "--minutes", "0", cwd=tmp_path,
                   env={"CKPT_IN": str(tmp_path / "absent.ckpt")})
    assert res.returncode == 3
    assert "checkpoint missing" in res.stderr


def test_resolve_stub_falls_back_to_module_form():
    cmd = resolve_executable("mock-lammps")
    assert cmd[-1].endswith("mock-lammps") or cmd[-1] == "mock-lammps"


def test_resolve_missing_executable_raises():
    with pytest.raises(SpawnError):
        resolve_executable("definitely-not-a-real-binary-xyz")


def _jobdir(tmp_path, name: str) -> str:
    d = tmp_path / name
    (d / "outputs").mkdir(parents=True)
    return str(d)


def test_local_executor_runs_and_reports(tmp_path):
    ex = LocalExecutor(max_parallel=2)
    d = _jobdir(tmp_path, "j1")
    ev = ex.submit("j1", "mock-r", ["--minutes", "0", "--out", "plot.png"], {}, d)
    assert ev.kind == "queued"
    events = ex.wait_all(timeout=30.0)
    kinds = [(e.kind, e.job_id) for e in events]
    assert ("started", "j1") in kinds
    assert ("exited", "j1") in kinds
    exit_ev = next(e for e in events if e.kind == "exited")
    assert exit_ev.code == 0
    assert os.path.getsize(os.path.join(d, "outputs", "plot.png")) == STUB_SIZES["r"]
    meta = json.load(open(os.path.join(d, "meta.json")))
    assert meta["job_id"] == "j1"
    assert meta["exit_code"] == 0
    assert "done" in open(os.path.join(d, "stdout.txt")).read()


def test_local_executor_respects_parallel_limit(tmp_path):
    ex = LocalExecutor(max_parallel=1)
    for i in range(3):
        ex.submit(f"j{i}", "mock-r", ["--minutes", "0"], {}, _jobdir(tmp_path, f"j{i}"))
    events = ex.wait_all(timeout=30.0)
    # with one slot, starts and exits must strictly alternate
    order = [e.kind for e in events if e.kind in ("started", "exited")]
    assert order == ["started", "exited"] * 3


def test_local_executor_nonzero_exit_propagates(tmp_path):
    ex = LocalExecutor()
    d = _jobdir(tmp_path, "bad")
    ex.submit("bad", "mock-lammps", ["--minutes", "0", "--fail"], {}, d)
    events = ex.wait_all(timeout=30.0)
    exit_ev = next(e for e in events if e.kind == "exited")
    assert exit_ev.code == 1
    assert "injected failure" in open(os.path.join(d, "stderr.txt")).read()
