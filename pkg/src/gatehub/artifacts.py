"""Artifact staging, collection, classification, and the checkpoint contract."""

from __future__ import annotations

import os
import shutil
from dataclasses import dataclass

from .errors import MissingCheckpoint, StagingError
from .graphs import SizeClass
from .outputs import class_midpoint, classify_size


@dataclass(frozen=True)
class ArtifactRecord:
    job_id: str
    port: str
    path: str
    bytes: int
    size_class: SizeClass
    within_expected: bool

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "port": self.port,
            "path": self.path,
            "bytes": self.bytes,
            "size_class": self.size_class.value,
            "within_expected": self.within_expected,
        }


def job_dir(workdir: str, run_id: str, job_id: str) -> str:
    return os.path.join(workdir, "runs", run_id, job_id)


def prepare_job_dir(workdir: str, run_id: str, job_id: str) -> str:
    d = job_dir(workdir, run_id, job_id)
    os.makedirs(os.path.join(d, "inputs"), exist_ok=True)
    os.makedirs(os.path.join(d, "outputs"), exist_ok=True)
    return d


def stage_inputs(
    jobdir: str,
    input_files: dict[str, str],
    upstream_outputs: dict[str, str],
) -> list[str]:
    """Copy declared input files and upstream artifacts into inputs/.

    input_files values are filesystem paths; upstream_outputs maps an input
    port to the path of the upstream job's artifact for that edge.
    """
    staged = []
    dest_dir = os.path.join(jobdir, "inputs")
    for port, src in list(input_files.items()) + list(upstream_outputs.items()):
        if not os.path.exists(src):
            raise StagingError(f"input for port '{port}' not found: {src}")
        dest = os.path.join(dest_dir, os.path.basename(src))
        shutil.copyfile(src, dest)
        staged.append(dest)
    return staged


def collect_outputs(
    job_id: str,
    jobdir: str,
    output_files: dict[str, str],
    declared: dict[str, SizeClass],
    size_scale: float = 1.0,
) -> tuple[list[ArtifactRecord], list[str]]:
    """Match declared output ports to files in outputs/; classify what exists.

    Returns (records, missing port names). A missing declared output is not
    an exception: the caller demotes the job to failed.
    """
    records: list[ArtifactRecord] = []
    missing: list[str] = []
    for port, pattern in output_files.items():
        path = os.path.join(jobdir, "outputs", pattern)
        if not os.path.exists(path):
            missing.append(port)
            continue
        size = os.path.getsize(path)
        declared_class = declared.get(port, SizeClass.SCALAR)
        report = classify_size(size, declared_class, size_scale)
        records.append(
            ArtifactRecord(
                job_id=job_id,
                port=port,
                path=path,
                bytes=size,
                size_class=report.data_class,
                within_expected=report.within_expected,
            )
        )
    return records, missing


def synthesize_outputs(
    job_id: str,
    run_id: str,
    declared: dict[str, SizeClass],
    size_scale: float = 1.0,
) -> list[ArtifactRecord]:
    """Simulated jobs produce no real files; invent records at class midpoints."""
    records = []
    for port in sorted(declared):
        cls = declared[port]
        size = class_midpoint(cls, size_scale)
        report = classify_size(size, cls, size_scale)
        records.append(
            ArtifactRecord(
                job_id=job_id,
                port=port,
                path=f"sim://{run_id}/{job_id}/{port}",
                bytes=size,
                size_class=cls,
                within_expected=report.within_expected,
            )
        )
    return records


def checkpoint_env(jobdir: str, segment: int, total_segments: int) -> dict[str, str]:
    """Env injection for segment `segment` (1-based) of `total_segments`.

    Single-segment jobs get nothing. Segment 1 starts with an empty CKPT_IN;
    each later segment reads its predecessor's CKPT_OUT and must find it.
    """
    if total_segments <= 1:
        return {}
    ckpt_dir = os.path.join(jobdir, "ckpt")
    os.makedirs(ckpt_dir, exist_ok=True)
    env = {
        "CKPT_OUT": os.path.join(ckpt_dir, f"segment-{segment}.ckpt"),
    }
    if segment == 1:
        env["CKPT_IN"] = ""
    else:
        prev = os.path.join(ckpt_dir, f"segment-{segment - 1}.ckpt")
        if not os.path.exists(prev):
            raise MissingCheckpoint(f"segment {segment} expects checkpoint {prev}")
        env["CKPT_IN"] = prev
    return env
