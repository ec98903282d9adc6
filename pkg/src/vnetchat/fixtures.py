"""Access to the bundled data files (topologies, datasets, templates,
scenarios, users)."""

from __future__ import annotations

import json
from importlib import resources

from .intent import LabeledSample, load_dataset
from .model import Topology, load_topology


def _read(relpath: str) -> str:
    return resources.files("vnetchat.data").joinpath(relpath).read_text(encoding="utf-8")


def topology(name: str = "internet2-like") -> Topology:
    return load_topology(_read(f"topologies/{name}.json"))


def appendix_dataset() -> list[LabeledSample]:
    return load_dataset(_read("datasets/appendix_a.tsv"))


def llm_template() -> str:
    return _read("templates/llm_input.txt")


def scenario(name: str) -> list[dict]:
    return json.loads(_read(f"scenarios/{name}.json"))


def users_doc(name: str) -> str:
    return _read(f"users/{name}.json")
