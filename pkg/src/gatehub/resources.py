"""Compute sites, batch queues, and per-component resource estimation.

Runtime and memory demands scale linearly with model size (atom count),
so a single through-origin coefficient calibrated from observed runs is
enough to predict whether a job fits under a queue's walltime.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import InvariantViolation, NonPositiveScale, NoObservations, ParseError
from .graphs import SizeClass


class LocationClass(str, Enum):
    SERVER = "server"
    CLUSTER = "cluster"
    DCI = "dci"


class RuntimeClass(str, Enum):
    SHORT = "short"    # <= 10 min
    MEDIUM = "medium"  # <= 1 h
    LONG = "long"      # >= 1 day


class SiteKind(str, Enum):
    LOCAL_SERVER = "local_server"
    PBS_CLUSTER = "pbs_cluster"
    SIMULATED_CLUSTER = "simulated_cluster"


@dataclass(frozen=True)
class ResourceProfile:
    """What one component class needs, anchored at a reference model size."""

    name: str
    location_class: LocationClass
    runtime_class: RuntimeClass
    base_runtime: float          # minutes at reference_scale
    base_memory: float           # MB at reference_scale
    reference_scale: float       # unit count (e.g. atoms) the bases refer to
    output_class: SizeClass
    cores: int = 1

    def __post_init__(self):
        if self.base_runtime <= 0:
            raise InvariantViolation(f"profile '{self.name}': base_runtime must be > 0")
        if self.reference_scale <= 0:
            raise InvariantViolation(f"profile '{self.name}': reference_scale must be > 0")


@dataclass(frozen=True)
class Queue:
    name: str
    walltime: float              # minutes
    cores_per_user: int
    site_ref: str = ""
    cores: int = 0               # physical capacity; defaults to cores_per_user

    def __post_init__(self):
        if self.walltime <= 0:
            raise InvariantViolation(f"queue '{self.name}': walltime must be > 0")
        if self.cores_per_user < 1:
            raise InvariantViolation(f"queue '{self.name}': cores_per_user must be >= 1")
        if self.cores == 0:
            object.__setattr__(self, "cores", self.cores_per_user)


@dataclass(frozen=True)
class Site:
    name: str
    kind: SiteKind
    queues: tuple[Queue, ...]
    total_cores: int = 0

    def __post_init__(self):
        names = [q.name for q in self.queues]
        if len(names) != len(set(names)):
            raise InvariantViolation(f"site '{self.name}': queue names must be unique")
        if self.total_cores == 0:
            object.__setattr__(self, "total_cores", sum(q.cores for q in self.queues))
        # Queues built inline may not carry their owning site's name yet;
        # schedulers rely on site_ref to route assignments.
        for q in self.queues:
            if not q.site_ref:
                object.__setattr__(q, "site_ref", self.name)

    def queue(self, name: str) -> Queue | None:
        for q in self.queues:
            if q.name == name:
                return q
        return None


@dataclass(frozen=True)
class Estimate:
    runtime: float   # minutes
    memory: float    # MB
    cores: int = 1

    def __post_init__(self):
        if self.runtime <= 0 or self.memory <= 0 or self.cores <= 0:
            raise InvariantViolation("estimate fields must all be positive")

    def scaled(self, factor: float) -> "Estimate":
        return Estimate(self.runtime * factor, self.memory * factor, self.cores)


@dataclass(frozen=True)
class ScalingModel:
    """Through-origin linear model: predicted = coefficient * scale."""

    coefficient: float

    def __post_init__(self):
        if self.coefficient <= 0:
            raise InvariantViolation("scaling coefficient must be > 0")

    def predict(self, scale: float) -> float:
        return self.coefficient * scale


def estimate_requirements(profile: ResourceProfile, scale: float) -> Estimate:
    """Linear scale-up of the profile's reference runtime and memory."""
    if scale <= 0:
        raise NonPositiveScale(f"scale must be > 0, got {scale}")
    factor = scale / profile.reference_scale
    return Estimate(
        runtime=profile.base_runtime * factor,
        memory=profile.base_memory * factor,
        cores=profile.cores,
    )


def calibrate(observations: list[tuple[float, float]]) -> ScalingModel:
    """Least-squares fit through the origin: coefficient = sum(s*t) / sum(s^2)."""
    if not observations:
        raise NoObservations("at least one (scale, runtime) observation required")
    for scale, _ in observations:
        if scale <= 0:
            raise NonPositiveScale(f"observation scale must be > 0, got {scale}")
    num = sum(s * t for s, t in observations)
    den = sum(s * s for s, _ in observations)
    return ScalingModel(coefficient=num / den)


def feasible_queues(est: Estimate, sites: list[Site], safety: float = 1.15) -> list[Queue]:
    """Queues whose walltime holds the padded runtime and whose user cap holds the cores.

    Result is sorted by (walltime ascending, queue name); an empty list just
    means nothing fits.
    """
    if safety < 1:
        raise InvariantViolation(f"safety factor must be >= 1, got {safety}")
    hits = [
        q
        for site in sites
        for q in site.queues
        if est.runtime * safety <= q.walltime and est.cores <= q.cores_per_user
    ]
    return sorted(hits, key=lambda q: (q.walltime, q.name))


_DURATION_RE = re.compile(r"^(\d+)([smhd])$")
_DURATION_MINUTES = {"s": 1 / 60, "m": 1.0, "h": 60.0, "d": 1440.0}


def parse_duration(text: str | int | float, field_name: str = "walltime") -> float:
    """Duration to minutes; bare numbers are minutes, strings use s/m/h/d suffixes."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _DURATION_RE.match(text.strip())
    if not m:
        raise ParseError(f"bad duration '{text}', expected <int><s|m|h|d>", field=field_name)
    return int(m.group(1)) * _DURATION_MINUTES[m.group(2)]


def load_site_config(path: str) -> list[Site]:
    """Parse a site-config JSON file and check every invariant."""
    try:
        with open(path) as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ParseError("file not found", path=path)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno)
    return sites_from_dict(raw, path=path)


def sites_from_dict(raw: dict, path: str = "") -> list[Site]:
    if not isinstance(raw, dict) or "sites" not in raw:
        raise ParseError("top-level object must have a 'sites' list", path=path, field="sites")
    sites: list[Site] = []
    for i, entry in enumerate(raw["sites"]):
        sfield = f"sites[{i}]"
        try:
            name = entry["name"]
            kind = SiteKind(entry.get("kind", "simulated_cluster"))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad site entry: {exc}", path=path, field=sfield)
        queues = []
        for j, q in enumerate(entry.get("queues", [])):
            qfield = f"{sfield}.queues[{j}]"
            try:
                queues.append(
                    Queue(
                        name=q["name"],
                        walltime=parse_duration(q["walltime"], qfield + ".walltime"),
                        cores_per_user=int(q["cores_per_user"]),
                        site_ref=name,
                        cores=int(q.get("cores", 0)),
                    )
                )
            except KeyError as exc:
                raise ParseError(f"missing field {exc}", path=path, field=qfield)
        sites.append(Site(name=name, kind=kind, queues=tuple(queues),
                          total_cores=int(entry.get("total_cores", 0))))
    return sites


@dataclass
class ProfileRegistry:
    """Named resource profiles components refer to at bind time."""

    profiles: dict[str, ResourceProfile] = field(default_factory=dict)

    def add(self, profile: ResourceProfile) -> None:
        self.profiles[profile.name] = profile

    def get(self, name: str) -> ResourceProfile:
        if name not in self.profiles:
            raise InvariantViolation(f"unknown resource profile '{name}'")
        return self.profiles[name]

    def __contains__(self, name: str) -> bool:
        return name in self.profiles


def profiles_from_dict(raw: dict) -> ProfileRegistry:
    reg = ProfileRegistry()
    for name, p in raw.items():
        reg.add(
            ResourceProfile(
                name=name,
                location_class=LocationClass(p["location_class"]),
                runtime_class=RuntimeClass(p["runtime_class"]),
                base_runtime=float(p["base_runtime"]),
                base_memory=float(p["base_memory"]),
                reference_scale=float(p["reference_scale"]),
                output_class=SizeClass(p["output_class"]),
                cores=int(p.get("cores", 1)),
            )
        )
    return reg
