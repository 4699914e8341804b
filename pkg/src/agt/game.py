"""Adversarial graph traversal: instance data, dynamics, costs and default strategies.

Nodes, terrain-graph indices and player types are all 1-based, matching the
way scenarios are written by hand.  Blue moves at even plies (changing its
position on the active terrain graph); Red moves at odd plies (choosing the
next terrain graph along an edge of its type-dependent action graph).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import (
    GoalUnreachable,
    IllegalAction,
    MissingSelfLoop,
    NoOutgoingEdge,
    NonPositiveWeight,
    PriorNotNormalized,
    SizeLimitExceeded,
    ValidationError,
)

BLUE = "b"
RED = "r"
PLAYERS = (RED, BLUE)

PRIOR_TOL = 1e-12
# relative slack used when comparing summed path costs for ties
TIE_TOL = 1e-12

Edge = tuple[int, int]


def other(player: str) -> str:
    return BLUE if player == RED else RED


@dataclass(frozen=True)
class TerrainGraphFamily:
    node_count: int
    edges: tuple[Edge, ...]
    weights: tuple[Mapping[Edge, float], ...]

    @property
    def graph_count(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class RedType:
    prior: float
    action_edges: frozenset[Edge]


@dataclass(frozen=True)
class BlueType:
    prior: float
    goals: frozenset[int]


@dataclass(frozen=True)
class GameSpec:
    terrain: TerrainGraphFamily
    red_types: tuple[RedType, ...]
    blue_types: tuple[BlueType, ...]
    start: tuple[int, int]

    def with_priors(self, red: Sequence[float] | None = None,
                    blue: Sequence[float] | None = None) -> "GameSpec":
        """Copy of the spec with replaced prior vectors (type sets unchanged)."""
        red_types = self.red_types
        blue_types = self.blue_types
        if red is not None:
            red_types = tuple(replace(t, prior=float(p)) for t, p in zip(red_types, red, strict=True))
        if blue is not None:
            blue_types = tuple(replace(t, prior=float(p)) for t, p in zip(blue_types, blue, strict=True))
        return replace(self, red_types=red_types, blue_types=blue_types)

    @property
    def red_prior(self) -> tuple[float, ...]:
        return tuple(t.prior for t in self.red_types)

    @property
    def blue_prior(self) -> tuple[float, ...]:
        return tuple(t.prior for t in self.blue_types)


class GameState(NamedTuple):
    position: int
    graph: int
    parity: int = 0  # 0: Blue to move, 1: Red to move

    @property
    def mover(self) -> str:
        return BLUE if self.parity == 0 else RED


@dataclass(frozen=True)
class DistanceTable:
    """Max-over-graphs edge weights and all-pairs shortest distances on them.

    ``dist[p-1, q-1]`` is the shortest distance from ``p`` to ``q``; unreachable
    pairs hold ``inf``.
    """

    max_weights: Mapping[Edge, float]
    dist: np.ndarray

    def __call__(self, p: int, q: int) -> float:
        return float(self.dist[p - 1, q - 1])


@dataclass(frozen=True)
class HorizonBounds:
    d_bar_max: float
    c_min: float
    v_bar: float
    depth_cap: int


def _all_pairs(node_count: int, weights: Mapping[Edge, float]) -> np.ndarray:
    if not weights:
        dist = np.full((node_count, node_count), np.inf)
        np.fill_diagonal(dist, 0.0)
        return dist
    rows = [p - 1 for p, _ in weights]
    cols = [q - 1 for _, q in weights]
    mat = csr_matrix((list(weights.values()), (rows, cols)), shape=(node_count, node_count))
    return shortest_path(mat, method="D", directed=True)


def _argmin_lowest(candidates):
    """First item of ``(key, value)`` pairs whose value is within tolerance of the minimum."""
    best = min(v for _, v in candidates)
    slack = TIE_TOL * max(1.0, abs(best))
    for key, v in candidates:
        if v <= best + slack:
            return key, best
    raise AssertionError("unreachable")


class Game:
    """A validated game instance with derived tables.

    Built by :func:`validate_spec`; treat as immutable.
    """

    def __init__(self, spec: GameSpec, pruned_red: tuple[int, ...], pruned_blue: tuple[int, ...]):
        self.spec = spec
        terrain = spec.terrain
        self.node_count = terrain.node_count
        self.graph_count = terrain.graph_count
        self.pruned_red = pruned_red
        self.pruned_blue = pruned_blue
        self.red_types = tuple(i for i in range(1, len(spec.red_types) + 1) if i not in pruned_red)
        self.blue_types = tuple(i for i in range(1, len(spec.blue_types) + 1) if i not in pruned_blue)
        self.start = GameState(spec.start[0], spec.start[1], 0)

        succ: dict[int, list[int]] = {p: [] for p in range(1, self.node_count + 1)}
        for p, q in terrain.edges:
            succ[p].append(q)
        self.successors = {p: tuple(sorted(qs)) for p, qs in succ.items()}

        self.red_successors: dict[int, dict[int, tuple[int, ...]]] = {}
        for i, rt in enumerate(spec.red_types, start=1):
            table: dict[int, list[int]] = {k: [] for k in range(1, self.graph_count + 1)}
            for k, k2 in rt.action_edges:
                table[k].append(k2)
            self.red_successors[i] = {k: tuple(sorted(set(v))) for k, v in table.items()}

        self.goals = {i: bt.goals for i, bt in enumerate(spec.blue_types, start=1)}

        self.distances = max_weight_distances(self)
        self._default_blue = self._build_default_blue()
        self._frozen = self._build_frozen_tables()
        self.bounds = horizon_bounds(self)

    # --- lookups -----------------------------------------------------------
    def weight(self, graph: int, p: int, q: int) -> float:
        return self.spec.terrain.weights[graph - 1][(p, q)]

    def red_prior(self, theta: int) -> float:
        return self.spec.red_types[theta - 1].prior

    def blue_prior(self, theta: int) -> float:
        return self.spec.blue_types[theta - 1].prior

    def prior(self, player: str, theta: int) -> float:
        return self.red_prior(theta) if player == RED else self.blue_prior(theta)

    def types(self, player: str) -> tuple[int, ...]:
        return self.red_types if player == RED else self.blue_types

    def type_pairs(self):
        """Active ``(red_type, blue_type, probability)`` triples in lexicographic order."""
        for tr in self.red_types:
            for tb in self.blue_types:
                yield tr, tb, self.red_prior(tr) * self.blue_prior(tb)

    def goal_distance(self, p: int, theta_b: int) -> float:
        return min(self.distances(p, g) for g in self.goals[theta_b])

    # --- derived tables ------------------------------------------------------
    def _build_default_blue(self) -> dict[int, dict[int, int]]:
        wbar = self.distances.max_weights
        table: dict[int, dict[int, int]] = {}
        for tb, goals in self.goals.items():
            row = {}
            for p in range(1, self.node_count + 1):
                if p in goals:
                    continue
                cands = []
                for q in self.successors[p]:
                    to_goal = min(self.distances(q, g) for g in goals)
                    cands.append((q, wbar[(p, q)] + to_goal))
                if not cands:
                    continue
                q, val = _argmin_lowest(cands)
                if math.isfinite(val):
                    row[p] = q
            table[tb] = row
        return table

    def _build_frozen_tables(self):
        """Per (graph, blue type): distance-to-goal and next hop when the graph never changes."""
        frozen = {}
        for k in range(1, self.graph_count + 1):
            dist = _all_pairs(self.node_count, self.spec.terrain.weights[k - 1])
            for tb, goals in self.goals.items():
                to_goal = np.array([min(dist[p - 1, g - 1] for g in goals)
                                    for p in range(1, self.node_count + 1)])
                hop = {}
                for p in range(1, self.node_count + 1):
                    if p in goals or not self.successors[p]:
                        continue
                    cands = [(q, self.weight(k, p, q) + to_goal[q - 1]) for q in self.successors[p]]
                    q, val = _argmin_lowest(cands)
                    if math.isfinite(val):
                        hop[p] = q
                frozen[(k, tb)] = (to_goal, hop)
        return frozen

    def frozen_distance(self, graph: int, theta_b: int, p: int) -> float:
        """Shortest distance from ``p`` to the goal set on the fixed graph ``graph``."""
        return float(self._frozen[(graph, theta_b)][0][p - 1])

    def frozen_path(self, graph: int, theta_b: int, p: int) -> list[int]:
        """Nodes visited after ``p`` along the fixed-graph shortest path to the goal."""
        hop = self._frozen[(graph, theta_b)][1]
        path = []
        goals = self.goals[theta_b]
        while p not in goals:
            p = hop[p]
            path.append(p)
            if len(path) > self.node_count:
                raise AssertionError("shortest-path table contains a cycle")
        return path


# --- validation ----------------------------------------------------------------

def _check_prior(label: str, priors: Sequence[float]) -> None:
    if not priors:
        raise PriorNotNormalized(f"{label} prior is empty")
    for i, p in enumerate(priors, start=1):
        if not (p >= 0.0) or not math.isfinite(p):
            raise PriorNotNormalized(f"{label} prior entry for type {i} is {p!r}")
    total = math.fsum(priors)
    if abs(total - 1.0) > PRIOR_TOL:
        raise PriorNotNormalized(f"{label} prior sums to {total!r}, not 1")


def validate_spec(raw: GameSpec) -> Game:
    """Check every structural assumption of the game and return a :class:`Game`.

    Types with zero prior mass are kept in the spec (so type ids stay stable)
    but dropped from the active type lists; see ``Game.pruned_red`` and
    ``Game.pruned_blue``.
    """
    terrain = raw.terrain
    n = terrain.node_count
    if n < 1:
        raise ValidationError("node_count must be positive")
    if terrain.graph_count < 1:
        raise ValidationError("at least one terrain graph is required")
    edge_set = set(terrain.edges)
    if len(edge_set) != len(terrain.edges):
        raise ValidationError("duplicate terrain edges")
    for p, q in terrain.edges:
        if not (1 <= p <= n and 1 <= q <= n):
            raise ValidationError(f"edge ({p},{q}) has an endpoint outside 1..{n}")
    for k, wk in enumerate(terrain.weights, start=1):
        if set(wk) != edge_set:
            missing = sorted(edge_set - set(wk))
            extra = sorted(set(wk) - edge_set)
            raise ValidationError(f"graph {k} weights do not match the edge set "
                                  f"(missing {missing}, extra {extra})")
        for (p, q), w in wk.items():
            if not (w > 0.0) or not math.isfinite(w):
                raise NonPositiveWeight(f"w^{k}({p},{q}) = {w!r} is not a positive finite cost")

    big_k = terrain.graph_count
    for i, rt in enumerate(raw.red_types, start=1):
        for k, k2 in rt.action_edges:
            if not (1 <= k <= big_k and 1 <= k2 <= big_k):
                raise ValidationError(f"red type {i} action edge ({k},{k2}) outside 1..{big_k}")
        for k in range(1, big_k + 1):
            if (k, k) not in rt.action_edges:
                raise MissingSelfLoop(f"red type {i} action graph lacks self-loop at node {k}")

    _check_prior("red", [t.prior for t in raw.red_types])
    _check_prior("blue", [t.prior for t in raw.blue_types])

    p0, k0 = raw.start
    if not (1 <= p0 <= n):
        raise ValidationError(f"start position {p0} outside 1..{n}")
    if not (1 <= k0 <= big_k):
        raise ValidationError(f"start graph {k0} outside 1..{big_k}")

    wbar = {e: max(wk[e] for wk in terrain.weights) for e in terrain.edges}
    dist = _all_pairs(n, wbar)
    for i, bt in enumerate(raw.blue_types, start=1):
        if not bt.goals:
            raise GoalUnreachable(f"blue type {i} has an empty goal set")
        bad = sorted(g for g in bt.goals if not 1 <= g <= n)
        if bad:
            raise GoalUnreachable(f"blue type {i} goal {bad[0]} is not a node of the terrain")
        for p in range(1, n + 1):
            if not any(math.isfinite(dist[p - 1, g - 1]) for g in bt.goals):
                raise GoalUnreachable(f"no goal of blue type {i} is reachable from node {p}")

    pruned_red = tuple(i for i, t in enumerate(raw.red_types, start=1) if t.prior == 0.0)
    pruned_blue = tuple(i for i, t in enumerate(raw.blue_types, start=1) if t.prior == 0.0)
    return Game(raw, pruned_red, pruned_blue)


# --- distances and defaults -----------------------------------------------------

def max_weight_distances(game: Game) -> DistanceTable:
    terrain = game.spec.terrain
    wbar = {e: max(wk[e] for wk in terrain.weights) for e in terrain.edges}
    return DistanceTable(wbar, _all_pairs(terrain.node_count, wbar))


def blue_default_action(game: Game, state: GameState, blue_type: int) -> int:
    """Next node on a worst-case-weight shortest path to the nearest goal."""
    try:
        return game._default_blue[blue_type][state.position]
    except KeyError:
        if state.position in game.goals[blue_type]:
            raise IllegalAction(f"node {state.position} is already a goal of blue type {blue_type}")
        raise NoOutgoingEdge(f"no route to a goal from node {state.position}") from None


def red_default_action(state: GameState) -> int:
    return state.graph


def default_action(game: Game, player: str, state: GameState, theta: int) -> int:
    if player == BLUE:
        return blue_default_action(game, state, theta)
    return red_default_action(state)


# --- dynamics --------------------------------------------------------------------

def legal_actions(game: Game, player: str, state: GameState, theta: int) -> tuple[int, ...]:
    if player != state.mover:
        raise IllegalAction(f"player {player!r} is not to move at {state}")
    if player == BLUE:
        return game.successors[state.position]
    return game.red_successors[theta][state.graph]


def apply_action(game: Game, state: GameState, action: int, red_type: int | None = None) -> GameState:
    """One ply of the dynamics.  ``red_type`` narrows Red's legality check."""
    if state.parity == 0:
        if action not in game.successors[state.position]:
            raise IllegalAction(f"({state.position},{action}) is not a terrain edge")
        return GameState(action, state.graph, 1)
    if red_type is None:
        ok = any(action in game.red_successors[t][state.graph] for t in game.red_successors)
    else:
        ok = action in game.red_successors[red_type][state.graph]
    if not ok:
        raise IllegalAction(f"graph move {state.graph}->{action} is not available")
    return GameState(state.position, action, 0)


def stage_cost(game: Game, state: GameState, blue_action: int | None = None) -> float:
    if state.parity == 1:
        return 0.0
    if blue_action not in game.successors[state.position]:
        raise IllegalAction(f"({state.position},{blue_action}) is not a terrain edge")
    return game.weight(state.graph, state.position, blue_action)


def is_terminal(game: Game, state: GameState, blue_type: int) -> bool:
    return state.position in game.goals[blue_type]


# --- horizon ---------------------------------------------------------------------

def horizon_bounds(game: Game, table: DistanceTable | None = None) -> HorizonBounds:
    table = table or game.distances
    d_bar_max = 0.0
    for tb in game.blue_types:
        for p in range(1, game.node_count + 1):
            d_bar_max = max(d_bar_max, min(table(p, g) for g in game.goals[tb]))
    weights = [w for wk in game.spec.terrain.weights for w in wk.values()]
    c_min = min(weights) if weights else math.inf
    v_bar = 2.0 * d_bar_max
    depth_cap = 2 * math.ceil(v_bar / c_min) + 2 if math.isfinite(c_min) else 2
    return HorizonBounds(d_bar_max, c_min, v_bar, depth_cap)


# --- multi-agent reduction -------------------------------------------------------

@dataclass(frozen=True)
class JointGraph:
    family: TerrainGraphFamily
    labels: tuple[tuple[int, ...], ...] = field(repr=False)

    def index(self, config: Sequence[int]) -> int:
        return self.labels.index(tuple(config)) + 1


def joint_graph(agent_count: int, base: TerrainGraphFamily, move_model: str = "all-move",
                node_budget: int = 100_000) -> JointGraph:
    """Team of ``agent_count`` agents as one agent on the product graph.

    ``move_model`` is ``"all-move"`` (every agent traverses an edge each step) or
    ``"stay-allowed"`` (agents may idle at zero cost, but not all at once).
    """
    if agent_count < 1:
        raise ValueError("agent_count must be at least 1")
    if move_model not in ("all-move", "stay-allowed"):
        raise ValueError(f"unknown move model {move_model!r}")
    n = base.node_count
    if n ** agent_count > node_budget:
        raise SizeLimitExceeded(f"{n}^{agent_count} joint nodes exceed the budget of {node_budget}")
    labels = tuple(itertools.product(range(1, n + 1), repeat=agent_count))
    index = {lab: i for i, lab in enumerate(labels, start=1)}
    succ: dict[int, list[int]] = {p: [] for p in range(1, n + 1)}
    for p, q in base.edges:
        succ[p].append(q)

    edges = []
    weights: list[dict[Edge, float]] = [{} for _ in base.weights]
    for lab in labels:
        options = []
        for p in lab:
            opts = [(q, (p, q)) for q in sorted(succ[p])]
            # idling is the self-loop when the base graph has one
            if move_model == "stay-allowed" and p not in succ[p]:
                opts.insert(0, (p, None))
            options.append(opts)
        for combo in itertools.product(*options):
            moved = [e for _, e in combo if e is not None]
            if not moved:
                continue
            target = tuple(q for q, _ in combo)
            edge = (index[lab], index[target])
            edges.append(edge)
            for k, wk in enumerate(base.weights):
                weights[k][edge] = float(sum(wk[e] for e in moved))
    family = TerrainGraphFamily(len(labels), tuple(edges), tuple(weights))
    return JointGraph(family, labels)
