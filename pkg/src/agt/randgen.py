"""Random small game specs for property tests and oracle cross-checks.

Terrains lean towards DAGs (edges mostly point to higher node ids, with an
occasional back edge) so that the capped full game tree stays small enough for
the exact solver.  Candidates failing validation or exceeding the node budget
are redrawn.
"""

from __future__ import annotations

import numpy as np

from .errors import SizeLimitExceeded, ValidationError
from .extensive import build_full_game
from .game import BlueType, Game, GameSpec, RedType, TerrainGraphFamily, validate_spec


def _priors(rng: np.random.Generator, count: int, degenerate: bool) -> list[float]:
    if count == 1:
        return [1.0]
    if degenerate:
        hot = int(rng.integers(count))
        return [1.0 if i == hot else 0.0 for i in range(count)]
    p = int(rng.integers(1, 10)) / 10
    return [p, 1.0 - p]


def _draw(rng: np.random.Generator, max_nodes: int, max_graphs: int, max_types: int,
          max_weight: int, back_edge_prob: float, degenerate: bool) -> GameSpec:
    n = int(rng.integers(min(3, max_nodes), max_nodes + 1))
    big_k = int(rng.integers(1, max_graphs + 1))
    edges = set()
    for i in range(1, n):
        edges.add((i, int(rng.integers(i + 1, n + 1))))
        for j in range(i + 1, n + 1):
            if rng.random() < 0.35:
                edges.add((i, j))
    for i in range(2, n + 1):
        for j in range(1, i):
            if rng.random() < back_edge_prob:
                edges.add((i, j))
    edges = tuple(sorted(edges))
    weights = tuple({e: float(rng.integers(1, max_weight + 1)) for e in edges} for _ in range(big_k))

    n_red = int(rng.integers(1, max_types + 1))
    red_p = _priors(rng, n_red, degenerate)
    red = []
    for prior in red_p:
        action = {(k, k) for k in range(1, big_k + 1)}
        action |= {(k, k2) for k in range(1, big_k + 1) for k2 in range(1, big_k + 1)
                   if k != k2 and rng.random() < 0.5}
        red.append(RedType(prior, frozenset(action)))

    n_blue = int(rng.integers(1, max_types + 1))
    blue_p = _priors(rng, n_blue, degenerate)
    blue = []
    for prior in blue_p:
        goals = {n} if rng.random() < 0.5 else {int(rng.integers(2, n + 1))}
        blue.append(BlueType(prior, frozenset(goals)))

    start = (1, int(rng.integers(1, big_k + 1)))
    return GameSpec(TerrainGraphFamily(n, edges, weights), tuple(red), tuple(blue), start)


def random_game(rng: np.random.Generator, *, max_nodes: int = 6, max_graphs: int = 4, max_types: int = 2,
                max_weight: int = 9, back_edge_prob: float = 0.1, degenerate: bool = False,
                node_budget: int = 50_000, max_attempts: int = 10_000) -> Game:
    """Draw a validated game whose capped full tree has at most ``node_budget`` nodes.

    ``degenerate`` puts all prior mass on one type per player.
    """
    for _ in range(max_attempts):
        spec = _draw(rng, max_nodes, max_graphs, max_types, max_weight, back_edge_prob, degenerate)
        try:
            game = validate_spec(spec)
        except ValidationError:
            continue
        if start_is_goal(game):
            continue
        try:
            build_full_game(game, game.bounds.depth_cap, node_budget)
        except SizeLimitExceeded:
            continue
        return game
    raise RuntimeError(f"no acceptable spec in {max_attempts} draws")


def start_is_goal(game: Game) -> bool:
    return any(game.start.position in game.goals[t] for t in game.blue_types)
