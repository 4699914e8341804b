"""Exact best responses in the unrestricted game against total (extended) strategies.

The responder's decision problem is an expectimax over its own info sets,
where each info set carries the reach-weighted mass of the opponent types
still consistent with the history.  Two facts keep the search finite:

* Red best-responding: Blue's extended strategy is proper, so every branch
  reaches a goal.
* Blue best-responding: once no opponent type with positive mass can leave
  its default any more, Red keeps the current graph forever and the rest of
  Blue's problem is a shortest path on that fixed graph, which is read from a
  precomputed table instead of being expanded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DepthCapExceeded
from .extensive import BehavioralStrategy, InfoKey, PureStrategy, evaluate_profile
from .game import BLUE, RED, Game, GameState, apply_action

# values within this relative distance count as ties (lowest action id wins)
_TIE = 1e-12


@dataclass
class BestResponseResult:
    responder: str
    strategy: PureStrategy
    value: float
    visited: int


def _better(val, best, sign):
    if best is None:
        return True
    if math.isinf(best):
        # a capped-out branch loses to anything finite; inf - inf is nan and never wins
        return sign * (val - best) > 0
    slack = _TIE * max(1.0, abs(best))
    return sign * (val - best) > slack


class _Search:
    def __init__(self, game: Game, opponent: BehavioralStrategy, depth_cap: int, prune: bool):
        self.game = game
        self.opp = opponent
        self.cap = depth_cap
        self.prune = prune
        self.visited = 0

    def _depth(self, hist, soft=False):
        """False when a soft (unpruned Blue) branch hits the cap; raises otherwise."""
        self.visited += 1
        if len(hist) > self.cap:
            if soft and not self.prune:
                return False
            raise DepthCapExceeded(f"best response reached depth {len(hist)} > {self.cap}")
        return True

    # Blue responds: w maps red type -> reach-weighted mass
    def blue_node(self, tb, hist, state, w):
        game = self.game
        if not self._depth(hist, soft=True):
            return math.inf, {}
        total_w = math.fsum(w.values())
        best_val, best_a, best_map = None, None, None
        for a in game.successors[state.position]:
            c = game.weight(state.graph, state.position, a)
            h2 = hist + (a,)
            nstate = apply_action(game, state, a)
            if a in game.goals[tb]:
                val, sub = c * total_w, {}
            elif self.prune and not any(self.opp.may_deviate(tr, h2) for tr in w):
                val = (c + game.frozen_distance(state.graph, tb, a)) * total_w
                sub = None  # filled in only if chosen
            else:
                rest, sub = self.red_chance(tb, h2, nstate, w)
                val = c * total_w + rest
            if _better(val, best_val, -1.0):
                best_val, best_a, best_map = val, a, sub
        if best_map is None:
            best_map = self._frozen_map(tb, hist + (best_a,), state.graph, best_a)
        best_map[InfoKey(BLUE, tb, hist)] = best_a
        return best_val, best_map

    def _frozen_map(self, tb, hist, graph, p):
        mapping = {}
        for q in self.game.frozen_path(graph, tb, p):
            hist = hist + (graph,)
            mapping[InfoKey(BLUE, tb, hist)] = q
            hist = hist + (q,)
        return mapping

    def red_chance(self, tb, hist, state, w):
        if not self._depth(hist, soft=True):
            return math.inf, {}
        branches: dict[int, dict[int, float]] = {}
        for tr, mass in w.items():
            for a, p in self.opp.distribution(self.game, InfoKey(RED, tr, hist), state):
                if p > 0.0:
                    branches.setdefault(a, {})[tr] = mass * p
        total, mapping = 0.0, {}
        for a in sorted(branches):
            val, sub = self.blue_node(tb, hist + (a,), GameState(state.position, a, 0), branches[a])
            total += val
            mapping.update(sub)
        return total, mapping

    # Red responds: w maps blue type -> reach-weighted mass (alive types only)
    def red_node(self, tr, hist, state, w):
        if not w:
            return 0.0, {}
        self._depth(hist)
        best_val, best_a, best_map = None, None, None
        for a in self.game.red_successors[tr][state.graph]:
            val, sub = self.blue_chance(tr, hist + (a,), GameState(state.position, a, 0), w)
            if _better(val, best_val, 1.0):
                best_val, best_a, best_map = val, a, sub
        best_map[InfoKey(RED, tr, hist)] = best_a
        return best_val, best_map

    def blue_chance(self, tr, hist, state, w):
        game = self.game
        self._depth(hist)
        branches: dict[int, dict[int, float]] = {}
        for tb, mass in w.items():
            for a, p in self.opp.distribution(game, InfoKey(BLUE, tb, hist), state):
                if p > 0.0:
                    branches.setdefault(a, {})[tb] = mass * p
        total, mapping = 0.0, {}
        for a in sorted(branches):
            bw = branches[a]
            total += game.weight(state.graph, state.position, a) * math.fsum(bw.values())
            alive = {tb: m for tb, m in bw.items() if a not in game.goals[tb]}
            val, sub = self.red_node(tr, hist + (a,), GameState(a, state.graph, 1), alive)
            total += val
            mapping.update(sub)
        return total, mapping


def best_response(game: Game, responder: str, opponent: BehavioralStrategy,
                  depth_cap: int | None = None, prune: bool = True) -> BestResponseResult:
    """Pure best response of ``responder`` to the total strategy ``opponent``.

    ``value`` is the responder's utility (expected cost for Red, its negation
    for Blue).  With ``prune=False`` Blue's off-domain continuation is expanded
    explicitly up to ``depth_cap`` instead of being read from the shortest-path
    table; the two agree whenever the cap is not binding.
    """
    cap = game.bounds.depth_cap if depth_cap is None else depth_cap
    search = _Search(game, opponent, cap, prune)
    mapping: dict[InfoKey, int] = {}
    total = 0.0
    start = game.start
    if responder == BLUE:
        for tb in game.blue_types:
            if start.position in game.goals[tb]:
                continue
            w = {tr: game.red_prior(tr) * game.blue_prior(tb) for tr in game.red_types}
            val, sub = search.blue_node(tb, (), start, w)
            total += val
            mapping.update(sub)
        value = -total
    else:
        for tr in game.red_types:
            w = {tb: game.red_prior(tr) * game.blue_prior(tb) for tb in game.blue_types
                 if start.position not in game.goals[tb]}
            # Blue moves first: the root is a Blue chance node from Red's viewpoint
            val, sub = search.blue_chance(tr, (), start, w)
            total += val
            mapping.update(sub)
        value = total
    return BestResponseResult(responder, PureStrategy(responder, mapping), value, search.visited)


def full_exploitability(game: Game, red: BehavioralStrategy, blue: BehavioralStrategy,
                        depth_cap: int | None = None):
    """``(gap_r, gap_b)`` of a total profile in the unrestricted game."""
    value = evaluate_profile(game, red, blue, depth_cap)
    br_r = best_response(game, RED, blue, depth_cap)
    br_b = best_response(game, BLUE, red, depth_cap)
    return br_r.value - value, br_b.value + value
