"""Histories, information sets, strategies and finite game trees.

Both players observe the full action history; the only private information
is a player's own type.  An information set is therefore exactly
``(player, own type, history)`` and is represented by :class:`InfoKey`.

:class:`GameTree` stores a finite extensive-form tree as flat numpy arrays in
breadth-first order so the solvers in :mod:`agt.cfr` can work level by level.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import AgtError, DepthCapExceeded, SizeLimitExceeded, StrategyDomainMismatch
from .game import (
    BLUE,
    RED,
    Game,
    GameState,
    apply_action,
    blue_default_action,
    default_action,
    legal_actions,
)

CHANCE, RED_NODE, BLUE_NODE, TERMINAL = 0, 1, 2, 3
KIND_OF = {RED: RED_NODE, BLUE: BLUE_NODE}

SIMPLEX_TOL = 1e-12


class InfoKey(NamedTuple):
    player: str
    theta: int
    history: tuple


def replay(game: Game, history: Sequence[int], red_type: int | None = None) -> GameState:
    """State reached by folding ``apply_action`` over ``history`` from the start."""
    state = game.start
    for a in history:
        state = apply_action(game, state, a, red_type)
    return state


# --- strategies ------------------------------------------------------------------

@dataclass
class PureStrategy:
    """Partial map from info sets to actions; unmapped keys fall back to the default."""

    player: str
    mapping: dict = field(default_factory=dict)

    def action(self, game: Game, key: InfoKey, state: GameState) -> int:
        a = self.mapping.get(key)
        if a is None:
            return default_action(game, self.player, state, key.theta)
        return a

    def __len__(self):
        return len(self.mapping)


class BehavioralStrategy:
    """Map from info sets to distributions, with the default strategy elsewhere.

    ``table[key] = (actions, probs)``.  Keys outside the table play the
    player's pure default action, which is what makes every strategy total.
    """

    def __init__(self, player: str, table: dict | None = None):
        self.player = player
        self.table: dict[InfoKey, tuple[tuple[int, ...], tuple[float, ...]]] = dict(table or {})

    def __repr__(self):
        return f"BehavioralStrategy({self.player!r}, {len(self.table)} info sets)"

    def distribution(self, game: Game, key: InfoKey, state: GameState):
        entry = self.table.get(key)
        if entry is None:
            return ((default_action(game, self.player, state, key.theta), 1.0),)
        return tuple(zip(*entry))

    def prob(self, game: Game, key: InfoKey, state: GameState, action: int) -> float:
        for a, p in self.distribution(game, key, state):
            if a == action:
                return p
        return 0.0

    @cached_property
    def _prefixes(self) -> frozenset:
        out = set()
        for key in self.table:
            h = key.history
            for i in range(len(h) + 1):
                out.add((key.theta, h[:i]))
        return frozenset(out)

    def may_deviate(self, theta: int, history: tuple) -> bool:
        """False when this type plays the pure default at ``history`` and everywhere after it."""
        return (theta, history) in self._prefixes

    def is_pure(self) -> bool:
        return all(max(ps) == 1.0 for _, ps in self.table.values())

    @classmethod
    def from_pure(cls, pure: PureStrategy, game: Game) -> "BehavioralStrategy":
        return cls(pure.player, {k: ((a,), (1.0,)) for k, a in pure.mapping.items()})


def default_strategy(player: str) -> BehavioralStrategy:
    return BehavioralStrategy(player)


def extend_strategy(restricted: BehavioralStrategy) -> BehavioralStrategy:
    """Total strategy: restricted probabilities on its domain, pure default elsewhere."""
    for key, (actions, probs) in restricted.table.items():
        if key.player != restricted.player:
            raise StrategyDomainMismatch(f"{key} does not belong to player {restricted.player!r}")
        if len(actions) != len(probs) or abs(math.fsum(probs) - 1.0) > 1e-9 or min(probs) < 0.0:
            raise StrategyDomainMismatch(f"entry at {key} is not a distribution over its actions")
    return BehavioralStrategy(restricted.player, restricted.table)


def check_strategy(game: Game, strategy: BehavioralStrategy) -> None:
    """Raise :class:`StrategyDomainMismatch` unless every entry is a legal decision of ``game``.

    Red's own type is used when replaying histories, so a Red history is
    rejected if that type could not have produced its graph switches.
    """
    declared = len(game.spec.red_types if strategy.player == RED else game.spec.blue_types)
    for key, (actions, _) in strategy.table.items():
        if not 1 <= key.theta <= declared:
            raise StrategyDomainMismatch(f"{key_to_str(key)}: no such type")
        if len(key.history) % 2 != (0 if key.player == BLUE else 1):
            raise StrategyDomainMismatch(f"{key_to_str(key)}: not this player's turn")
        try:
            state = replay(game, key.history, key.theta if key.player == RED else None)
        except AgtError as exc:
            raise StrategyDomainMismatch(f"{key_to_str(key)}: history is not playable ({exc})") from None
        legal = set(legal_actions(game, key.player, state, key.theta))
        bad = [a for a in actions if a not in legal]
        if bad:
            raise StrategyDomainMismatch(f"{key_to_str(key)}: illegal actions {bad}")


def restricted_action_set(game: Game, key: InfoKey, state: GameState,
                          population: Iterable[PureStrategy]) -> tuple[int, ...]:
    """Actions some population member plays at ``key``."""
    acts = {s.action(game, key, state) for s in population}
    if not acts:
        raise ValueError("empty population")
    return tuple(sorted(acts))


# --- finite trees ------------------------------------------------------------------

class _TreeAccumulator:
    def __init__(self):
        self.parent, self.kind, self.infoset = [], [], []
        self.slot, self.chance_prob, self.cost = [], [], []
        self.child_start, self.n_children, self.depth = [], [], []
        self.meta = []
        self.keys, self.key_actions = [], []
        self.key_index: dict = {}
        self.slot_start = [0]

    def register(self, key, actions_fn):
        idx = self.key_index.get(key)
        if idx is None:
            actions = tuple(actions_fn())
            if not actions:
                raise ValueError(f"info set {key} has no actions")
            idx = len(self.keys)
            self.key_index[key] = idx
            self.keys.append(key)
            self.key_actions.append(actions)
            self.slot_start.append(self.slot_start[-1] + len(actions))
        return idx

    def add(self, parent, kind, slot, prob, cost, meta):
        idx = len(self.parent)
        self.parent.append(parent)
        self.kind.append(kind)
        self.infoset.append(-1)
        self.slot.append(slot)
        self.chance_prob.append(prob)
        self.cost.append(cost)
        self.child_start.append(-1)
        self.n_children.append(0)
        self.depth.append(0 if parent < 0 else self.depth[parent] + 1)
        self.meta.append(meta)
        return idx


class GameTree:
    """Finite two-player zero-sum tree; Red's payoff is the accumulated Blue cost.

    Nodes are in breadth-first order, so parents precede children and each
    depth level is a contiguous index range (``levels``).  Every decision
    node belongs to an info set; the actions of info set ``i`` occupy the
    global slots ``slot_start[i]:slot_start[i+1]``.  ``slot[n]`` is the slot of
    the action leading into ``n`` (``-1`` below chance nodes).
    """

    def __init__(self, acc: _TreeAccumulator):
        self.parent = np.asarray(acc.parent, dtype=np.int64)
        self.kind = np.asarray(acc.kind, dtype=np.int8)
        self.infoset = np.asarray(acc.infoset, dtype=np.int64)
        self.slot = np.asarray(acc.slot, dtype=np.int64)
        self.chance_prob = np.asarray(acc.chance_prob, dtype=float)
        self.cost = np.asarray(acc.cost, dtype=float)
        self.child_start = np.asarray(acc.child_start, dtype=np.int64)
        self.n_children = np.asarray(acc.n_children, dtype=np.int64)
        self.depth = np.asarray(acc.depth, dtype=np.int64)
        self.meta = acc.meta
        self.keys: list[InfoKey] = acc.keys
        self.key_actions: list[tuple] = acc.key_actions
        self.key_index = acc.key_index
        self.slot_start = np.asarray(acc.slot_start, dtype=np.int64)
        n_sets = len(self.keys)
        self.infoset_player = np.array([KIND_OF[k.player] for k in self.keys], dtype=np.int8) \
            if n_sets else np.zeros(0, dtype=np.int8)
        sizes = np.diff(self.slot_start)
        self.slot_infoset = np.repeat(np.arange(n_sets), sizes)
        self.slot_player = self.infoset_player[self.slot_infoset] if n_sets else np.zeros(0, np.int8)
        bounds = np.flatnonzero(np.diff(self.depth)) + 1
        edges = np.concatenate([[0], bounds, [len(self.depth)]])
        self.levels = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]
        acc_cost = np.zeros(len(self.parent))
        for lo, hi in self.levels[1:]:
            acc_cost[lo:hi] = acc_cost[self.parent[lo:hi]] + self.cost[lo:hi]
        self.accumulated = acc_cost
        # slot of the parent's own action for each node, used by reach updates
        self.parent_kind = np.where(self.parent >= 0, self.kind[np.maximum(self.parent, 0)], -1)

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    @property
    def n_slots(self) -> int:
        return int(self.slot_start[-1])

    @property
    def max_depth(self) -> int:
        return int(self.depth.max()) if self.n_nodes else 0

    def infosets_of(self, player: str) -> list[InfoKey]:
        return [k for k in self.keys if k.player == player]

    def uniform_sigma(self) -> np.ndarray:
        sizes = np.diff(self.slot_start)
        return 1.0 / sizes[self.slot_infoset].astype(float) if self.n_slots else np.zeros(0)

    def behavioral(self, player: str, sigma: np.ndarray) -> BehavioralStrategy:
        table = {}
        for i, key in enumerate(self.keys):
            if key.player != player:
                continue
            lo, hi = self.slot_start[i], self.slot_start[i + 1]
            table[key] = (self.key_actions[i], tuple(float(x) for x in sigma[lo:hi]))
        return BehavioralStrategy(player, table)

    def sigma_from(self, game: Game | None, red: BehavioralStrategy, blue: BehavioralStrategy) -> np.ndarray:
        """Project a pair of total strategies onto this tree's slots."""
        sigma = np.zeros(self.n_slots)
        for i, key in enumerate(self.keys):
            strat = red if key.player == RED else blue
            lo = self.slot_start[i]
            actions = self.key_actions[i]
            entry = strat.table.get(key)
            if entry is None:
                if game is None:
                    raise StrategyDomainMismatch(f"no distribution for {key}")
                state = self._state_of_key(i)
                dist = dict(strat.distribution(game, key, state))
            else:
                dist = dict(zip(*entry))
            extra = set(a for a, p in dist.items() if p > 0) - set(actions)
            if extra:
                raise StrategyDomainMismatch(f"{key} plays {sorted(extra)} outside the tree's actions")
            for j, a in enumerate(actions):
                sigma[lo + j] = dist.get(a, 0.0)
        return sigma

    def _state_of_key(self, infoset_idx: int) -> GameState:
        nodes = np.flatnonzero(self.infoset == infoset_idx)
        return self.meta[nodes[0]][3]


def _build_agt_tree(game: Game, actions_for: Callable, depth_cap: int | None,
                    force_default_beyond: int | None, max_nodes: int) -> GameTree:
    acc = _TreeAccumulator()
    root = acc.add(-1, CHANCE, -1, 1.0, 0.0, None)
    queue = deque()
    pairs = [(tr, tb, p) for tr, tb, p in game.type_pairs() if p > 0.0]
    acc.child_start[root] = 1
    acc.n_children[root] = len(pairs)
    for tr, tb, p in pairs:
        state = game.start
        kind = TERMINAL if state.position in game.goals[tb] else BLUE_NODE
        idx = acc.add(root, kind, -1, p, 0.0, (tr, tb, (), state))
        queue.append(idx)

    while queue:
        node = queue.popleft()
        if acc.kind[node] == TERMINAL:
            continue
        tr, tb, hist, state = acc.meta[node]
        player = state.mover
        theta = tb if player == BLUE else tr
        key = InfoKey(player, theta, hist)
        if force_default_beyond is not None and player == BLUE and len(hist) >= force_default_beyond:
            # beyond the cap Blue is pinned to its default
            iset = acc.register(key, lambda: (blue_default_action(game, state, tb),))
        else:
            iset = acc.register(key, lambda: actions_for(player, theta, hist, state))
        acc.infoset[node] = iset
        actions = acc.key_actions[iset]
        acc.child_start[node] = len(acc.parent)
        acc.n_children[node] = len(actions)
        base = acc.slot_start[iset]
        depth = len(hist) + 1
        if depth_cap is not None and depth > depth_cap:
            raise DepthCapExceeded(f"history {hist} would grow past the depth cap {depth_cap}")
        for j, a in enumerate(actions):
            nstate = apply_action(game, state, a, tr)
            if player == BLUE:
                cost = game.weight(state.graph, state.position, a)
                kind = TERMINAL if a in game.goals[tb] else RED_NODE
            else:
                cost = 0.0
                kind = BLUE_NODE
            child = acc.add(node, kind, base + j, 1.0, cost, (tr, tb, hist + (a,), nstate))
            queue.append(child)
        if len(acc.parent) > max_nodes:
            raise SizeLimitExceeded(f"game tree exceeds {max_nodes} nodes")
    return GameTree(acc)


def build_restricted_game(game: Game, populations: dict[str, Sequence[PureStrategy]],
                          max_nodes: int = 2_000_000) -> GameTree:
    """Tree in which each info set offers only the actions some population member plays there.

    Raises :class:`DepthCapExceeded` when a branch outgrows ``game.bounds.depth_cap``,
    which can only happen if an improper Blue strategy entered the population.
    """
    def actions_for(player, theta, hist, state):
        return restricted_action_set(game, InfoKey(player, theta, hist), state, populations[player])

    return _build_agt_tree(game, actions_for, game.bounds.depth_cap, None, max_nodes)


def build_full_game(game: Game, depth_cap: int | None = None, max_nodes: int = 200_000) -> GameTree:
    """Unrestricted tree with Blue pinned to its default once a history reaches ``depth_cap`` plies."""
    cap = game.bounds.depth_cap if depth_cap is None else depth_cap

    def actions_for(player, theta, hist, state):
        return legal_actions(game, player, state, theta)

    return _build_agt_tree(game, actions_for, None, cap, max_nodes)


def tree_from_nested(root) -> GameTree:
    """Build a generic tree from nested tuples, for hand-made test games.

    Node forms: ``("chance", [(prob, child), ...])``,
    ``("r" | "b", label, [(action, cost, child), ...])`` and ``("terminal",)``.
    Decision nodes sharing ``(player, label)`` share an info set.
    """
    acc = _TreeAccumulator()
    kinds = {"chance": CHANCE, RED: RED_NODE, BLUE: BLUE_NODE, "terminal": TERMINAL}
    first = acc.add(-1, kinds[root[0]], -1, 1.0, 0.0, root)
    queue = deque([first])
    while queue:
        node = queue.popleft()
        desc = acc.meta[node]
        tag = desc[0]
        if tag == "terminal":
            continue
        acc.child_start[node] = len(acc.parent)
        if tag == "chance":
            acc.n_children[node] = len(desc[1])
            for p, child in desc[1]:
                queue.append(acc.add(node, kinds[child[0]], -1, float(p), 0.0, child))
            continue
        key = InfoKey(tag, 0, (desc[1],))
        iset = acc.register(key, lambda: [a for a, _, _ in desc[2]])
        if list(acc.key_actions[iset]) != [a for a, _, _ in desc[2]]:
            raise ValueError(f"info set {desc[1]!r} has inconsistent actions")
        acc.infoset[node] = iset
        acc.n_children[node] = len(desc[2])
        base = acc.slot_start[iset]
        for j, (_, cost, child) in enumerate(desc[2]):
            queue.append(acc.add(node, kinds[child[0]], base + j, 1.0, float(cost), child))
    return GameTree(acc)


# --- evaluation ----------------------------------------------------------------------

def _check_depth(hist, cap):
    if cap is not None and len(hist) > cap:
        raise DepthCapExceeded(f"history {hist} exceeds the depth cap {cap}")


def evaluate_profile(game: Game, red: BehavioralStrategy, blue: BehavioralStrategy,
                     depth_cap: int | None = None) -> float:
    """Expected total Blue cost of the profile (Red's utility; Blue's is its negation)."""
    cap = game.bounds.depth_cap if depth_cap is None else depth_cap
    total = 0.0
    for tr, tb, prior in game.type_pairs():
        if prior == 0.0:
            continue
        goals = game.goals[tb]
        if game.start.position in goals:
            continue
        stack = [((), game.start, prior)]
        while stack:
            hist, state, prob = stack.pop()
            _check_depth(hist, cap)
            if state.parity == 0:
                dist = blue.distribution(game, InfoKey(BLUE, tb, hist), state)
            else:
                dist = red.distribution(game, InfoKey(RED, tr, hist), state)
            for a, p in dist:
                if p <= 0.0:
                    continue
                q = prob * p
                nstate = apply_action(game, state, a, tr)
                if state.parity == 0:
                    total += q * game.weight(state.graph, state.position, a)
                    if a in goals:
                        continue
                stack.append((hist + (a,), nstate, q))
    return total


@dataclass
class Playout:
    red_type: int
    blue_type: int
    actions: tuple[int, ...]
    cost: float

    @property
    def terminal_time(self) -> int:
        return len(self.actions)


def _sample(rng: np.random.Generator, items, probs):
    u = rng.random()
    cum = 0.0
    for item, p in zip(items, probs):
        cum += p
        if u < cum:
            return item
    return [i for i, p in zip(items, probs) if p > 0][-1]


def simulate_playout(game: Game, red: BehavioralStrategy, blue: BehavioralStrategy,
                     rng: np.random.Generator | int | None = None) -> Playout:
    rng = np.random.default_rng(rng)
    tr = _sample(rng, game.red_types, [game.red_prior(t) for t in game.red_types])
    tb = _sample(rng, game.blue_types, [game.blue_prior(t) for t in game.blue_types])
    goals = game.goals[tb]
    cap = game.bounds.depth_cap
    state, hist, cost = game.start, (), 0.0
    while state.position not in goals:
        _check_depth(hist, cap)
        if state.parity == 0:
            dist = blue.distribution(game, InfoKey(BLUE, tb, hist), state)
        else:
            dist = red.distribution(game, InfoKey(RED, tr, hist), state)
        acts, probs = zip(*dist)
        a = _sample(rng, acts, probs)
        if state.parity == 0:
            cost += game.weight(state.graph, state.position, a)
        state = apply_action(game, state, a, tr)
        hist = hist + (a,)
    return Playout(tr, tb, hist, cost)


# --- persistence -----------------------------------------------------------------------

STRATEGY_FORMAT = "agt-strategy/1"


def key_to_str(key: InfoKey) -> str:
    return f"{key.player}:{key.theta}:{','.join(str(a) for a in key.history)}"


def key_from_str(text: str) -> InfoKey:
    try:
        player, theta, hist = text.split(":")
        history = tuple(int(a) for a in hist.split(",")) if hist else ()
        if player not in (RED, BLUE):
            raise ValueError(player)
        return InfoKey(player, int(theta), history)
    except ValueError:
        raise StrategyDomainMismatch(f"malformed info-set key {text!r}") from None


def strategy_to_dict(strategy: BehavioralStrategy) -> dict:
    entries = {}
    for key in sorted(strategy.table, key=lambda k: (k.theta, len(k.history), k.history)):
        actions, probs = strategy.table[key]
        entries[key_to_str(key)] = {"actions": list(actions), "probs": [float(p) for p in probs]}
    return {"format": STRATEGY_FORMAT, "player": strategy.player, "entries": entries}


def strategy_from_dict(doc: dict) -> BehavioralStrategy:
    if not isinstance(doc, dict) or doc.get("format") != STRATEGY_FORMAT:
        raise StrategyDomainMismatch("not an agt strategy document")
    player = doc.get("player")
    if player not in (RED, BLUE):
        raise StrategyDomainMismatch(f"unknown player {player!r}")
    table = {}
    for text, entry in doc.get("entries", {}).items():
        key = key_from_str(text)
        if key.player != player:
            raise StrategyDomainMismatch(f"key {text!r} belongs to the other player")
        try:
            actions = tuple(int(a) for a in entry["actions"])
            probs = tuple(float(p) for p in entry["probs"])
        except (KeyError, TypeError, ValueError):
            raise StrategyDomainMismatch(f"malformed entry for {text!r}") from None
        table[key] = (actions, probs)
    return extend_strategy(BehavioralStrategy(player, table))


def save_strategy(strategy: BehavioralStrategy, path: str | Path) -> None:
    Path(path).write_text(json.dumps(strategy_to_dict(strategy), indent=1) + "\n")


def load_strategy(path: str | Path) -> BehavioralStrategy:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StrategyDomainMismatch(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return strategy_from_dict(doc)
