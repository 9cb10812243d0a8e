"""Scenario files: loading, validation and the built-in set."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from ..errors import ConfigError, ParseError
from ..field_expr import as_expr

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

BUILTIN = {
    "disk": "disk.toml",
    "annulus": "annulus.toml",
    "blob": "blob.toml",
    "shell": "shell.toml",
    "two-obstacle-shell": "two_obstacles.toml",
    "superellipse": "superellipse.toml",
    "poncelet-circles": "poncelet.toml",
    "local-121": "local_121.toml",
    "poset": "poset.toml",
}
FLOW_SCENARIOS = ("disk", "annulus", "blob")
BILLIARD_TABLES = ("shell", "two-obstacle-shell", "superellipse")


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    data: dict
    digest: str
    path: str

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    def get(self, *keys, default=None):
        node = self.data
        for k in keys:
            if not isinstance(node, dict) or k not in node:
                return default
            node = node[k]
        return node


def schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("schema.json").read_text())


def parse_scenario(raw: bytes, path: str = "<memory>") -> Scenario:
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        jsonschema.validate(data, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {where}: {exc.message}") from exc
    for expr in _expressions(data):
        try:
            as_expr(expr)
        except ParseError as exc:
            raise ConfigError(f"{path}: expression {expr!r}: {exc}") from exc
    return Scenario(data["name"], data["kind"], data, hashlib.sha256(raw).hexdigest(), path)


def _expressions(data: dict):
    if "domain" in data:
        yield data["domain"]["w"]
    if "field" in data:
        yield data["field"]["vx"]
        yield data["field"]["vy"]
    if "height" in data:
        yield data["height"]
    table = data.get("table", {})
    for c in [table.get("outer", {}), *table.get("obstacles", [])]:
        if "expr" in c:
            yield c["expr"]


def load(path) -> Scenario:
    """Load a scenario file, or a built-in scenario by name."""
    p = Path(path)
    if not p.exists() and str(path) in BUILTIN:
        return builtin(str(path))
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(raw, str(path))


def builtin(name: str) -> Scenario:
    if name not in BUILTIN:
        raise ConfigError(f"unknown built-in scenario {name!r}")
    raw = resources.files(__package__).joinpath(BUILTIN[name]).read_bytes()
    return parse_scenario(raw, f"builtin:{name}")
