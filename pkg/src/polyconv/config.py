"""Run configuration: a TOML document with nested sections.

Example::

    scenario = "PARITY"
    seed = 7

    [sweep]
    n_max = 40

    [distributions.F]
    atoms = [{point = [-1], mass = "1/2"}, {point = [1], mass = "1/2"}]

    [polyhedra.X]
    constraints = [{t = [1.0], a = -1, b = 1}]

    [directions]
    main = [[1.0]]

    [tolerances]
    slope = 0.15

    [params]
    c_exp = 1.0

    [output]
    dir = "out"

A distribution or polyhedron may instead be ``{file = "path.json"}``, a path
relative to the config file holding the same literal as JSON, optionally with
``key = "name"`` to pick one entry of a JSON object of literals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import tomli

from .dist import SparseDistribution, from_literal
from .errors import ConfigError, PolyconvError
from .metrics import Polyhedron

KNOWN_SECTIONS = {"scenario", "seed", "tail_eps", "threads", "sweep", "distributions",
                  "polyhedra", "directions", "tolerances", "params", "output", "description"}


@dataclass
class RunConfig:
    scenario: str
    seed: int = 0
    tail_eps: float = 1e-12
    threads: int = 1
    distributions: dict[str, SparseDistribution] = field(default_factory=dict)
    polyhedra: dict[str, Polyhedron] = field(default_factory=dict)
    directions: dict[str, np.ndarray] = field(default_factory=dict)
    sweep: dict[str, Any] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)
    output_dir: Path | None = None
    name: str = "run"

    def __post_init__(self):
        for key, val in self.tolerances.items():
            if not isinstance(val, (int, float)) or not val > 0:
                raise ConfigError(f"tolerances.{key} must be a positive number, got {val!r}")
        if not isinstance(self.seed, int) or not -(2**63) <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit integer, got {self.seed!r}")
        if not self.tail_eps > 0:
            raise ConfigError(f"tail_eps must be positive, got {self.tail_eps!r}")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError(f"threads must be a positive integer, got {self.threads!r}")

    def dist(self, name: str, default: SparseDistribution) -> SparseDistribution:
        return self.distributions.get(name, default)

    def poly(self, name: str, default: Polyhedron) -> Polyhedron:
        return self.polyhedra.get(name, default)

    def dirs(self, name: str, default) -> np.ndarray:
        return np.asarray(self.directions.get(name, default), dtype=float)

    def sweep_list(self, key: str, default) -> list:
        return list(self.sweep.get(key, default))

    def tol(self, key: str, default: float) -> float:
        return float(self.tolerances.get(key, default))

    def param(self, key: str, default):
        return self.params.get(key, default)

    @property
    def seed32(self) -> int:
        return self.seed % 2**32


def _load_asset(obj, base: Path, what: str):
    if isinstance(obj, dict) and "file" in obj:
        path = (base / obj["file"]).resolve()
        if not path.exists():
            raise ConfigError(f"{what}: referenced file {path} does not exist")
        with open(path) as fh:
            data = json.load(fh)
        if "key" in obj:
            if obj["key"] not in data:
                raise ConfigError(f"{what}: key {obj['key']!r} not found in {path}")
            data = data[obj["key"]]
        return data
    return obj


def parse_config(doc: dict, base: Path = Path("."), name: str = "run") -> RunConfig:
    unknown = set(doc) - KNOWN_SECTIONS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "scenario" not in doc:
        raise ConfigError("config must name a scenario")
    try:
        dists = {k: from_literal(_load_asset(v, base, f"distributions.{k}"))
                 for k, v in doc.get("distributions", {}).items()}
        polys = {k: Polyhedron.from_literal(_load_asset(v, base, f"polyhedra.{k}"))
                 for k, v in doc.get("polyhedra", {}).items()}
    except ConfigError:
        raise
    except (PolyconvError, ValueError) as exc:
        raise ConfigError(f"bad literal: {exc}") from exc
    dirs = {k: np.asarray(v, dtype=float) for k, v in doc.get("directions", {}).items()}
    out = doc.get("output", {}).get("dir")
    return RunConfig(
        scenario=str(doc["scenario"]),
        seed=doc.get("seed", 0),
        tail_eps=float(doc.get("tail_eps", 1e-12)),
        threads=doc.get("threads", 1),
        distributions=dists,
        polyhedra=polys,
        directions=dirs,
        sweep=dict(doc.get("sweep", {})),
        tolerances=dict(doc.get("tolerances", {})),
        params=dict(doc.get("params", {})),
        output_dir=(base / out) if out else None,
        name=name,
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        with open(path, "rb") as fh:
            doc = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(doc, path.parent, path.stem)
