"""JSON schemas for state, graph, density matrix and command output files."""

import json
from importlib import resources

NAMES = ("state", "density", "graph", "output")


def load_schema(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"unknown schema {name!r}")
    return json.loads(resources.files(__name__).joinpath(f"{name}.schema.json").read_text())
