"""JSON scenario files and the small hand-checkable fixtures.

Schema::

    {
      "nodes": 3,
      "edges": [[1, 2], [2, 3]],
      "graphs": [{"1-2": 1, "2-3": 1}, {"1-2": 1, "2-3": 5}],
      "red_types": [{"prior": 1.0, "action_edges": [[1, 2]]}],
      "blue_types": [{"prior": 1.0, "goals": [3]}],
      "start": {"position": 1, "graph": 1}
    }

Red self-loops may be omitted; they are inserted on load.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import ValidationError
from .game import BlueType, GameSpec, RedType, TerrainGraphFamily


def _edge_key(e) -> str:
    return f"{e[0]}-{e[1]}"


def _parse_edge_key(key: str) -> tuple[int, int]:
    try:
        a, b = key.split("-")
        return int(a), int(b)
    except ValueError:
        raise ValidationError(f"weight key {key!r} is not of the form 'from-to'") from None


def spec_from_dict(doc: dict[str, Any]) -> GameSpec:
    try:
        n = int(doc["nodes"])
        edges = tuple(sorted((int(a), int(b)) for a, b in doc["edges"]))
        weights = []
        for wmap in doc["graphs"]:
            weights.append({_parse_edge_key(k): float(v) for k, v in wmap.items()})
        big_k = len(weights)
        red = []
        for entry in doc["red_types"]:
            action = {(int(a), int(b)) for a, b in entry.get("action_edges", [])}
            action |= {(k, k) for k in range(1, big_k + 1)}
            red.append(RedType(float(entry["prior"]), frozenset(action)))
        blue = [BlueType(float(e["prior"]), frozenset(int(g) for g in e["goals"]))
                for e in doc["blue_types"]]
        start = (int(doc["start"]["position"]), int(doc["start"]["graph"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed scenario: {exc!r}") from None
    terrain = TerrainGraphFamily(n, edges, tuple(weights))
    return GameSpec(terrain, tuple(red), tuple(blue), start)


def spec_to_dict(spec: GameSpec) -> dict[str, Any]:
    big_k = spec.terrain.graph_count
    return {
        "nodes": spec.terrain.node_count,
        "edges": [list(e) for e in spec.terrain.edges],
        "graphs": [{_edge_key(e): wk[e] for e in spec.terrain.edges} for wk in spec.terrain.weights],
        "red_types": [
            {"prior": t.prior,
             "action_edges": [list(e) for e in sorted(t.action_edges)
                              if e[0] != e[1] or not 1 <= e[0] <= big_k]}
            for t in spec.red_types
        ],
        "blue_types": [{"prior": t.prior, "goals": sorted(t.goals)} for t in spec.blue_types],
        "start": {"position": spec.start[0], "graph": spec.start[1]},
    }


def load_scenario(path: str | Path) -> GameSpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return spec_from_dict(doc)


def save_scenario(spec: GameSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n")


# --- fixtures ----------------------------------------------------------------------

def line3() -> GameSpec:
    """Three-node line; Red may raise the cost of the last edge from 1 to 5."""
    return spec_from_dict({
        "nodes": 3,
        "edges": [[1, 2], [2, 3]],
        "graphs": [{"1-2": 1, "2-3": 1}, {"1-2": 1, "2-3": 5}],
        "red_types": [{"prior": 1.0, "action_edges": [[1, 2]]}],
        "blue_types": [{"prior": 1.0, "goals": [3]}],
        "start": {"position": 1, "graph": 1},
    })


def line3_two_red_types() -> GameSpec:
    """``line3`` where the second, equally likely Red type can only stay put."""
    return spec_from_dict({
        "nodes": 3,
        "edges": [[1, 2], [2, 3]],
        "graphs": [{"1-2": 1, "2-3": 1}, {"1-2": 1, "2-3": 5}],
        "red_types": [{"prior": 0.5, "action_edges": [[1, 2]]},
                      {"prior": 0.5, "action_edges": []}],
        "blue_types": [{"prior": 1.0, "goals": [3]}],
        "start": {"position": 1, "graph": 1},
    })


def diamond4() -> GameSpec:
    """Two routes to node 4: cheap via node 2, expensive via node 3."""
    return spec_from_dict({
        "nodes": 4,
        "edges": [[1, 2], [1, 3], [2, 4], [3, 4]],
        "graphs": [{"1-2": 1, "1-3": 5, "2-4": 1, "3-4": 1}],
        "red_types": [{"prior": 1.0, "action_edges": []}],
        "blue_types": [{"prior": 1.0, "goals": [4]}],
        "start": {"position": 1, "graph": 1},
    })


def twelve_node_path() -> Path:
    return Path(__file__).with_name("scenarios") / "twelve_node.json"


def twelve_node() -> GameSpec:
    """Twelve nodes, seven terrain graphs, two types per player (goals 11 and 12)."""
    return load_scenario(twelve_node_path())


def reference_values(path: str | Path) -> dict[str, float]:
    """The optional ``reference_values`` block of a scenario file (empty if absent)."""
    return dict(json.loads(Path(path).read_text()).get("reference_values", {}))


FIXTURES = {"L3": line3, "L3-2T": line3_two_red_types, "D4": diamond4, "R12": twelve_node}
