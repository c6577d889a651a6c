"""Configuration documents: parsing, validation, round-trip serialization.

The on-disk format is JSON with a flat key/value layout plus an edge array;
``parse_config`` followed by ``serialize_config`` is the identity on valid
documents. See the README for the documented schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Tuple

from .dynamics import Kernel, UNIT_KERNEL, steps_per_interval
from .graph import Graph

MODES = ("maxmin", "minmax", "adversary_only", "designer_only", "uncontrolled")

_REQUIRED_KEYS = {
    "nodes", "edges", "x0", "ell", "b", "T", "dt", "switching_intervals", "mode",
}
_OPTIONAL_KEYS = {"kernel", "subset_guard", "ranking_slack"}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration document."""


@dataclass(frozen=True)
class GameConfig:
    """Everything a game run needs besides the graph itself."""

    x0: Tuple[float, ...]
    ell: int
    b: float
    horizon: float
    dt: float
    switching_count: int
    kernel: Kernel = UNIT_KERNEL
    mode: str = "maxmin"
    subset_guard: int = 1_000_000
    ranking_slack: float = 0.0

    def __post_init__(self) -> None:
        if not self.x0:
            raise ValueError("x0 must be non-empty")
        if any(v != v or v in (float("inf"), float("-inf")) for v in self.x0):
            raise ValueError("x0 must be finite")
        if self.ell < 0:
            raise ValueError(f"budget ell must be nonnegative, got {self.ell}")
        if self.b < 0.0:
            raise ValueError(f"boost cap b must be nonnegative, got {self.b}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.subset_guard < 1:
            raise ValueError("subset_guard must be at least 1")
        if self.ranking_slack < 0.0:
            raise ValueError("ranking_slack must be nonnegative")
        # Also validates horizon > 0, dt > 0, switching_count >= 1.
        steps_per_interval(self.horizon, self.switching_count, self.dt)


def _parse_kernel(raw) -> Kernel:
    if not isinstance(raw, dict) or set(raw) - {"kind", "parameter"}:
        raise ConfigError(f"kernel spec must be {{kind, parameter}}, got {raw!r}")
    try:
        return Kernel(kind=raw.get("kind", "constant"),
                      parameter=float(raw.get("parameter", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad kernel spec: {exc}") from exc


def parse_config(text: str) -> Tuple[Graph, GameConfig]:
    """Parse and validate a configuration document.

    Raises ConfigError on malformed JSON, unknown or missing keys, graph
    violations (self-loops, duplicates, nonpositive weights), a budget
    exceeding the edge count, or an x0 of the wrong length.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed configuration document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be a JSON object")
    keys = set(doc)
    missing = _REQUIRED_KEYS - keys
    if missing:
        raise ConfigError(f"missing configuration keys: {sorted(missing)}")
    unknown = keys - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    try:
        graph = Graph(int(doc["nodes"]), tuple(tuple(e) for e in doc["edges"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad graph: {exc}") from exc
    try:
        x0 = tuple(float(v) for v in doc["x0"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad x0: {exc}") from exc
    if len(x0) != graph.node_count:
        raise ConfigError(
            f"x0 has length {len(x0)} but the graph has {graph.node_count} nodes"
        )
    kernel = _parse_kernel(doc["kernel"]) if "kernel" in doc else UNIT_KERNEL
    try:
        ell = int(doc["ell"])
        cfg = GameConfig(
            x0=x0,
            ell=ell,
            b=float(doc["b"]),
            horizon=float(doc["T"]),
            dt=float(doc["dt"]),
            switching_count=int(doc["switching_intervals"]),
            kernel=kernel,
            mode=str(doc["mode"]),
            subset_guard=int(doc.get("subset_guard", 1_000_000)),
            ranking_slack=float(doc.get("ranking_slack", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad configuration: {exc}") from exc
    if cfg.ell > graph.edge_count:
        raise ConfigError(
            f"budget ell={cfg.ell} exceeds the edge count m={graph.edge_count}"
        )
    return graph, cfg


def to_document(g: Graph, cfg: GameConfig) -> dict:
    """The JSON-ready document for a (graph, config) pair."""
    return {
        "nodes": g.node_count,
        "edges": [[i, j, w] for i, j, w in g.edges],
        "x0": list(cfg.x0),
        "ell": cfg.ell,
        "b": cfg.b,
        "T": cfg.horizon,
        "dt": cfg.dt,
        "switching_intervals": cfg.switching_count,
        "kernel": {"kind": cfg.kernel.kind, "parameter": cfg.kernel.parameter},
        "mode": cfg.mode,
        "subset_guard": cfg.subset_guard,
        "ranking_slack": cfg.ranking_slack,
    }


def serialize_config(g: Graph, cfg: GameConfig) -> str:
    return json.dumps(to_document(g, cfg), indent=2, sort_keys=True) + "\n"
