"""Vanilla counterfactual regret minimization on a finite :class:`GameTree`.

Full-width traversals with regret matching, alternating player updates and
linearly weighted strategy averaging.  Every pass over the tree is a handful
of numpy operations per depth level, so a CFR iteration costs O(nodes).
Red maximizes the accumulated cost, Blue minimizes it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, IterationBudgetExhausted
from .extensive import BLUE_NODE, CHANCE, RED_NODE, BehavioralStrategy, GameTree
from .game import BLUE, RED

log = logging.getLogger(__name__)

_SIGN = {RED_NODE: 1.0, BLUE_NODE: -1.0}


@dataclass(frozen=True)
class CfrConfig:
    max_iterations: int = 200_000
    check_period: int = 10
    target_gap: float = 1e-3

    def __post_init__(self):
        if not self.target_gap > 0:
            raise ConfigInvalid("CFR target gap must be positive")
        if self.check_period < 1:
            raise ConfigInvalid("CFR check period must be at least 1")
        if self.max_iterations < 1:
            raise ConfigInvalid("CFR needs at least one iteration")


@dataclass
class CfrResult:
    sigma: np.ndarray
    red: BehavioralStrategy
    blue: BehavioralStrategy
    value: float
    gap_r: float
    gap_b: float
    iterations: int

    @property
    def gap(self) -> float:
        return max(self.gap_r, self.gap_b)


class _Passes:
    """Cached per-tree index structures for the level-wise sweeps."""

    def __init__(self, tree: GameTree):
        self.tree = tree
        self.child_levels = []
        for li in range(1, len(tree.levels)):
            lo, hi = tree.levels[li]
            plo, phi = tree.levels[li - 1]
            self.child_levels.append((lo, hi, plo, phi))
        sizes = np.diff(tree.slot_start)
        self.set_sizes = sizes
        # info sets grouped by the depth of their nodes
        self.level_sets = {}
        dec = np.flatnonzero(tree.infoset >= 0)
        if len(dec):
            depth_of_set = np.empty(len(tree.keys), dtype=np.int64)
            depth_of_set[tree.infoset[dec]] = tree.depth[dec]
            for d in np.unique(depth_of_set):
                sets = np.flatnonzero(depth_of_set == d)
                slots = np.concatenate([np.arange(tree.slot_start[i], tree.slot_start[i + 1]) for i in sets])
                offsets = np.concatenate([[0], np.cumsum(sizes[sets])[:-1]])
                self.level_sets[int(d)] = (sets, slots, offsets)
        self.pk = tree.parent_kind
        self.from_red = self.pk == RED_NODE
        self.from_blue = self.pk == BLUE_NODE

    def edge_prob(self, sigma: np.ndarray) -> np.ndarray:
        tree = self.tree
        pe = tree.chance_prob.copy()
        mask = tree.slot >= 0
        pe[mask] = sigma[tree.slot[mask]]
        return pe

    def reaches(self, sigma: np.ndarray):
        tree = self.tree
        n = tree.n_nodes
        fr = np.ones(n)
        fb = np.ones(n)
        fr[self.from_red] = sigma[tree.slot[self.from_red]]
        fb[self.from_blue] = sigma[tree.slot[self.from_blue]]
        fc = tree.chance_prob
        rr, rb, rc = np.ones(n), np.ones(n), np.ones(n)
        par = tree.parent
        for lo, hi, _, _ in self.child_levels:
            p = par[lo:hi]
            rr[lo:hi] = rr[p] * fr[lo:hi]
            rb[lo:hi] = rb[p] * fb[lo:hi]
            rc[lo:hi] = rc[p] * fc[lo:hi]
        return rr, rb, rc

    def values(self, sigma: np.ndarray, pe: np.ndarray | None = None) -> np.ndarray:
        """Expected future cost below each node under ``sigma``."""
        tree = self.tree
        pe = self.edge_prob(sigma) if pe is None else pe
        u = np.zeros(tree.n_nodes)
        for lo, hi, plo, phi in reversed(self.child_levels):
            contrib = pe[lo:hi] * (tree.cost[lo:hi] + u[lo:hi])
            u[plo:phi] += np.bincount(tree.parent[lo:hi] - plo, weights=contrib, minlength=phi - plo)
        return u

    def best_response(self, sigma: np.ndarray, responder: int):
        """Value of the responder's best response within the tree and its pure choice per info set."""
        tree = self.tree
        sign = _SIGN[responder]
        pe = self.edge_prob(sigma)
        rr, rb, rc = self.reaches(sigma)
        opp = rb if responder == RED_NODE else rr
        cw = rc * opp
        br = np.zeros(tree.n_nodes)
        choice = np.full(len(tree.keys), -1, dtype=np.int64)
        for lo, hi, plo, phi in reversed(self.child_levels):
            q = tree.cost[lo:hi] + br[lo:hi]
            par = tree.parent[lo:hi]
            resp = self.pk[lo:hi] == responder
            if (~resp).any():
                idx = np.flatnonzero(~resp)
                br[plo:phi] += np.bincount(par[idx] - plo, weights=pe[lo:hi][idx] * q[idx],
                                           minlength=phi - plo)
            if resp.any():
                idx = np.flatnonzero(resp)
                w = np.bincount(tree.slot[lo:hi][idx], weights=cw[par[idx]] * q[idx],
                                minlength=tree.n_slots)
                sets, slots, offsets = self.level_sets[int(tree.depth[plo])]
                own = tree.infoset_player[sets] == responder
                sub = sign * w[slots]
                best = np.maximum.reduceat(sub, offsets)
                local = np.arange(len(slots)) - np.repeat(offsets, self.set_sizes[sets])
                is_best = sub >= np.repeat(best, self.set_sizes[sets])
                first = np.minimum.reduceat(np.where(is_best, local, np.iinfo(np.int64).max), offsets)
                choice[sets[own]] = first[own]
                nodes = plo + np.flatnonzero(tree.kind[plo:phi] == responder)
                br[nodes] = tree.cost[tree.child_start[nodes] + choice[tree.infoset[nodes]]] + \
                    br[tree.child_start[nodes] + choice[tree.infoset[nodes]]]
        return br[0], choice


def regret_matching(tree: GameTree, regrets: np.ndarray) -> np.ndarray:
    """Current strategy: positive regrets normalized per info set, uniform when none are positive."""
    pos = np.maximum(regrets, 0.0)
    totals = np.bincount(tree.slot_infoset, weights=pos, minlength=len(tree.keys))
    denom = totals[tree.slot_infoset]
    uniform = tree.uniform_sigma()
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0.0, pos / np.where(denom > 0.0, denom, 1.0), uniform)


def average_strategy(tree: GameTree, weight_sum: np.ndarray) -> np.ndarray:
    totals = np.bincount(tree.slot_infoset, weights=weight_sum, minlength=len(tree.keys))
    denom = totals[tree.slot_infoset]
    return np.where(denom > 0.0, weight_sum / np.where(denom > 0.0, denom, 1.0), tree.uniform_sigma())


def restricted_exploitability(tree: GameTree, sigma: np.ndarray, passes: _Passes | None = None):
    """``(gap_r, gap_b)``: what each player gains by best-responding inside the tree."""
    passes = passes or _Passes(tree)
    value = passes.values(sigma)[0]
    br_r, _ = passes.best_response(sigma, RED_NODE)
    br_b, _ = passes.best_response(sigma, BLUE_NODE)
    return br_r - value, value - br_b


def tree_value(tree: GameTree, sigma: np.ndarray) -> float:
    return float(_Passes(tree).values(sigma)[0])


def cfr_solve(tree: GameTree, config: CfrConfig = CfrConfig()) -> CfrResult:
    """Average-strategy profile whose in-tree exploitability is at most ``config.target_gap``.

    Raises :class:`IterationBudgetExhausted` (with the best profile attached)
    when the budget runs out first.
    """
    passes = _Passes(tree)
    n_slots = tree.n_slots
    regrets = np.zeros(n_slots)
    weight_sum = np.zeros(n_slots)
    player_slots = {p: tree.slot_player == p for p in (RED_NODE, BLUE_NODE)}
    decision = {p: np.flatnonzero(tree.kind == p) for p in (RED_NODE, BLUE_NODE)}
    best = None

    for t in range(1, config.max_iterations + 1):
        for player in (RED_NODE, BLUE_NODE):
            sigma = regret_matching(tree, regrets)
            pe = passes.edge_prob(sigma)
            rr, rb, rc = passes.reaches(sigma)
            u = passes.values(sigma, pe)
            own, opp = (rr, rb) if player == RED_NODE else (rb, rr)
            children = np.flatnonzero(passes.pk == player)
            q = tree.cost[children] + u[children]
            par = tree.parent[children]
            cfv = np.bincount(tree.slot[children], weights=rc[par] * opp[par] * q, minlength=n_slots)
            node_v = np.bincount(tree.slot_infoset, weights=sigma * cfv, minlength=len(tree.keys))
            delta = _SIGN[player] * (cfv - node_v[tree.slot_infoset])
            mask = player_slots[player]
            regrets[mask] += delta[mask]
            own_reach = np.zeros(len(tree.keys))
            nodes = decision[player]
            own_reach[tree.infoset[nodes]] = own[nodes]
            weight_sum[mask] += t * own_reach[tree.slot_infoset[mask]] * sigma[mask]

        if t == 1 or t % config.check_period == 0 or t == config.max_iterations:
            avg = average_strategy(tree, weight_sum)
            value = float(passes.values(avg)[0])
            br_r, _ = passes.best_response(avg, RED_NODE)
            br_b, _ = passes.best_response(avg, BLUE_NODE)
            gap_r, gap_b = float(br_r - value), float(value - br_b)
            result = CfrResult(avg, tree.behavioral(RED, avg), tree.behavioral(BLUE, avg),
                               value, gap_r, gap_b, t)
            if best is None or result.gap < best.gap:
                best = result
            if result.gap <= config.target_gap:
                log.debug("CFR reached gap %.3g after %d iterations", result.gap, t)
                return result

    raise IterationBudgetExhausted(
        f"CFR stopped at gap {best.gap:.6g} > {config.target_gap:.6g} after {config.max_iterations} iterations",
        best_gap=best.gap, result=best)
