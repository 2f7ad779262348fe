"""Access to bundled reference data: site configs, profiles, workflows."""

from __future__ import annotations

import json
from importlib import resources

from .resources import ProfileRegistry, Site, profiles_from_dict, sites_from_dict
from .workflows import Workflow, workflow_from_dict


def bundled_text(relpath: str) -> str:
    node = resources.files("gatehub").joinpath("data")
    for part in relpath.split("/"):
        node = node.joinpath(part)
    return node.read_text()


def bundled_json(relpath: str) -> dict:
    return json.loads(bundled_text(relpath))


def default_profiles() -> ProfileRegistry:
    return profiles_from_dict(bundled_json("profiles.json"))


def bundled_sites(name: str = "ntu-hpcc") -> list[Site]:
    return sites_from_dict(bundled_json(f"sites/{name}.json"))


def general_workflow() -> Workflow:
    return workflow_from_dict(bundled_json("workflows/general.workflow.json"))
