"""Beliefs, benchmark values, value of information and deception deltas.

Benchmark values compare three information structures:

* CI: both types announced, averaged over the type priors;
* 1S (one-sided): only the informed player's type stays private;
* 2S: both types private.

Each benchmark is a prior-weighted sum of solves of the same game with some
priors collapsed onto a single type.  :class:`SolveCache` memoizes those solves
so a VoI report and a deception report can share them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .best_response import best_response
from .cfr import CfrConfig, cfr_solve
from .errors import DegenerateValue, DepthCapExceeded, NonConvergence
from .extensive import BehavioralStrategy, InfoKey, build_full_game
from .game import BLUE, RED, Game, GameState, HorizonBounds, apply_action, validate_spec
from .seqform import sequence_form_value
from .xdo import XdoConfig, XdoResult, xdo_solve

BELIEF_TOL = 1e-12


# ---------------------------------------------------------------- beliefs

def bayes_update(belief, likelihood):
    """Posterior over types given each type's probability of the observed action.

    Returns ``(posterior, flagged)``.  When no type with positive belief could
    have produced the observation the input belief comes back unchanged and
    ``flagged`` is true.
    """
    belief = np.asarray(belief, dtype=float)
    joint = belief * np.asarray(likelihood, dtype=float)
    total = joint.sum()
    if total <= 0.0:
        return belief.copy(), True
    return joint / total, False


def belief_update(game: Game, belief, acting: BehavioralStrategy, history: tuple, state: GameState,
                  action: int):
    """Update a belief about ``acting.player``'s type after it plays ``action``.

    ``belief`` is indexed by type id minus one over all declared types of the
    acting player; ``state`` is the state in which the action was taken.
    """
    n = len(belief)
    like = np.zeros(n)
    for theta in range(1, n + 1):
        if belief[theta - 1] > 0.0:
            like[theta - 1] = acting.prob(game, InfoKey(acting.player, theta, history), state, action)
    return bayes_update(belief, like)


@dataclass
class BeliefRow:
    history: tuple
    position: int
    graph: int
    probability: float
    # Blue's belief over Red types and Red's belief over Blue types
    blue_belief: tuple
    red_belief: tuple
    live: bool
    flagged: bool = False


def _floats(vec) -> tuple[float, ...]:
    return tuple(float(x) for x in vec)


def _prior_vector(game: Game, player: str) -> np.ndarray:
    priors = game.spec.red_prior if player == RED else game.spec.blue_prior
    return np.array(priors, dtype=float)


def belief_trajectories(game: Game, red: BehavioralStrategy, blue: BehavioralStrategy,
                        depth_cap: int | None = None) -> list[BeliefRow]:
    """Both players' beliefs at every history reached with positive probability.

    Red's belief conditions on the Blue types that have not reached a goal yet;
    a row is ``live`` while at least one such type remains.  Rows come out in
    depth-first order.
    """
    cap = game.bounds.depth_cap if depth_cap is None else depth_cap
    n_blue = len(game.spec.blue_prior)

    def alive_at(position):
        return np.array([t in game.goals and position not in game.goals[t] for t in range(1, n_blue + 1)])

    def likelihood(strategy, mass, hist, state, a):
        return np.array([strategy.prob(game, InfoKey(strategy.player, t, hist), state, a) if m > 0 else 0.0
                         for t, m in enumerate(mass, start=1)])

    def played(strategy, types, mass, hist, state):
        seen = set()
        for t in types:
            if mass[t - 1] > 0.0:
                seen.update(a for a, p in strategy.distribution(game, InfoKey(strategy.player, t, hist), state)
                            if p > 0.0)
        return sorted(seen)

    rows: list[BeliefRow] = []
    red_mass = _prior_vector(game, RED)
    blue_mass = _prior_vector(game, BLUE)
    start = game.start
    stack = [((), start, red_mass, blue_mass * alive_at(start.position), red_mass / red_mass.sum(),
              blue_mass / blue_mass.sum(), False)]
    while stack:
        hist, state, rm, bm, mu_b, mu_r, flagged = stack.pop()
        live = bm.sum() > 0.0
        rows.append(BeliefRow(hist, state.position, state.graph, float(rm.sum() * bm.sum()),
                              _floats(mu_b), _floats(mu_r), bool(live), flagged))
        if not live:
            continue
        if len(hist) > cap:
            raise DepthCapExceeded(f"history of length {len(hist)} exceeds depth cap {cap}")
        children = []
        if state.mover == BLUE:
            for a in played(blue, game.blue_types, bm, hist, state):
                like = likelihood(blue, bm, hist, state, a)
                post, flag = bayes_update(mu_r, like)
                reach = bm * like
                cont = reach * alive_at(a)
                nstate = apply_action(game, state, a)
                if cont.sum() > 0.0:
                    children.append((hist + (a,), nstate, rm, cont, mu_b, cont / cont.sum(), flag))
                else:
                    # every Blue type that played ``a`` is done
                    children.append(BeliefRow(hist + (a,), nstate.position, nstate.graph,
                                              float(rm.sum() * reach.sum()), _floats(mu_b), _floats(post),
                                              False, flag))
        else:
            for a in played(red, game.red_types, rm, hist, state):
                like = likelihood(red, rm, hist, state, a)
                post, flag = bayes_update(mu_b, like)
                children.append((hist + (a,), GameState(state.position, a, 0), rm * like, bm, post, mu_r, flag))
        for child in reversed(children):
            if isinstance(child, BeliefRow):
                rows.append(child)
            else:
                stack.append(child)
    return rows


# ---------------------------------------------------------------- complete information

@dataclass
class ValueTable:
    """State values for a single-type game: ``blue_turn[p-1, k-1]`` and ``red_turn[p-1, k-1]``."""

    blue_turn: np.ndarray
    red_turn: np.ndarray
    blue_policy: np.ndarray
    red_policy: np.ndarray
    iterations: int

    def value(self, state: GameState) -> float:
        table = self.blue_turn if state.parity == 0 else self.red_turn
        return float(table[state.position - 1, state.graph - 1])


def shapley_value_iteration(game: Game, tol: float = 1e-12, max_iterations: int = 100_000) -> ValueTable:
    """Fixed point of the complete-information Bellman operator.

    Blue minimizes stage cost plus continuation, Red maximizes continuation,
    goal positions are worth zero.  Requires exactly one active type per player.
    """
    if len(game.red_types) != 1 or len(game.blue_types) != 1:
        raise ValueError("value iteration needs a single active type per player")
    tr, tb = game.red_types[0], game.blue_types[0]
    n, k_count = game.spec.terrain.node_count, game.spec.terrain.graph_count
    goal = np.zeros(n, dtype=bool)
    goal[[g - 1 for g in game.goals[tb]]] = True
    v_blue = np.zeros((n, k_count))
    v_red = np.zeros((n, k_count))
    pol_b = np.zeros((n, k_count), dtype=np.int64)
    pol_r = np.zeros((n, k_count), dtype=np.int64)
    red_succ = game.red_successors[tr]
    for it in range(1, max_iterations + 1):
        new_b = np.zeros_like(v_blue)
        new_r = np.zeros_like(v_red)
        for p in range(1, n + 1):
            if goal[p - 1]:
                continue
            for k in range(1, k_count + 1):
                best, arg = math.inf, 0
                for q in game.successors[p]:
                    val = game.weight(k, p, q) + (0.0 if goal[q - 1] else v_red[q - 1, k - 1])
                    if val < best - 1e-15:
                        best, arg = val, q
                new_b[p - 1, k - 1] = best
                pol_b[p - 1, k - 1] = arg
                best, arg = -math.inf, 0
                for k2 in red_succ[k]:
                    val = v_blue[p - 1, k2 - 1]
                    if val > best + 1e-15:
                        best, arg = val, k2
                new_r[p - 1, k - 1] = best
                pol_r[p - 1, k - 1] = arg
        delta = max(np.max(np.abs(new_b - v_blue)), np.max(np.abs(new_r - v_red)))
        v_blue, v_red = new_b, new_r
        if delta <= tol:
            return ValueTable(v_blue, v_red, pol_b, pol_r, it)
    raise NonConvergence(f"value iteration did not settle within {max_iterations} sweeps")


def brute_force_value(game: Game, bounds: HorizonBounds | None = None, max_nodes: int = 200_000,
                      method: str = "lp", cfr_gap: float = 1e-7) -> float:
    """Value of the full game tree capped at the horizon bound.

    Blue plays its default beyond the cap.  ``method="lp"`` solves the tree
    exactly with the sequence-form LP; ``method="cfr"`` runs CFR to ``cfr_gap``.
    """
    bounds = bounds or game.bounds
    tree = build_full_game(game, bounds.depth_cap, max_nodes)
    if method == "lp":
        return sequence_form_value(tree)
    if method == "cfr":
        return cfr_solve(tree, CfrConfig(max_iterations=1_000_000, check_period=50, target_gap=cfr_gap)).value
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------- benchmark values

def _unit(n: int, theta: int) -> tuple[float, ...]:
    return tuple(1.0 if i == theta else 0.0 for i in range(1, n + 1))


class SolveCache:
    """Memoized double-oracle solves of one game under alternative priors."""

    def __init__(self, game: Game, config: XdoConfig = XdoConfig()):
        self.game = game
        self.config = config
        self._solves: dict = {}

    def solve(self, red_prior=None, blue_prior=None) -> tuple[Game, XdoResult]:
        spec = self.game.spec
        red_prior = tuple(red_prior or spec.red_prior)
        blue_prior = tuple(blue_prior or spec.blue_prior)
        key = (red_prior, blue_prior)
        if key not in self._solves:
            sub = validate_spec(spec.with_priors(red=red_prior, blue=blue_prior))
            self._solves[key] = (sub, xdo_solve(sub, self.config))
        return self._solves[key]

    def value(self, red_prior=None, blue_prior=None) -> float:
        return self.solve(red_prior, blue_prior)[1].value

    def complete(self, tr: int, tb: int):
        spec = self.game.spec
        return self.solve(_unit(len(spec.red_prior), tr), _unit(len(spec.blue_prior), tb))

    def red_informed(self, tb: int):
        """1S game where only Red's type is private, Blue's type fixed to ``tb``."""
        return self.solve(None, _unit(len(self.game.spec.blue_prior), tb))

    def blue_informed(self, tr: int):
        return self.solve(_unit(len(self.game.spec.red_prior), tr), None)


def _cache(game: Game, config: XdoConfig | None, cache: SolveCache | None) -> SolveCache:
    return cache or SolveCache(game, config or XdoConfig())


def value_CI(game: Game, config: XdoConfig | None = None, cache: SolveCache | None = None) -> float:
    c = _cache(game, config, cache)
    return math.fsum(prob * c.complete(tr, tb)[1].value for tr, tb, prob in game.type_pairs())


def value_1S(game: Game, informed: str, config: XdoConfig | None = None,
             cache: SolveCache | None = None) -> float:
    """Value when only ``informed``'s type is private; the other type is announced."""
    c = _cache(game, config, cache)
    if informed == RED:
        return math.fsum(game.blue_prior(tb) * c.red_informed(tb)[1].value for tb in game.blue_types)
    return math.fsum(game.red_prior(tr) * c.blue_informed(tr)[1].value for tr in game.red_types)


def value_2S(game: Game, config: XdoConfig | None = None, cache: SolveCache | None = None) -> float:
    return _cache(game, config, cache).value()


# ---------------------------------------------------------------- value of information

CONSISTENT, INDETERMINATE, VIOLATED = "consistent", "indeterminate", "violated"


@dataclass(frozen=True)
class VoiReport:
    v_ci: float
    v_1s_r: float
    v_1s_b: float
    v_2s: float
    voi_1sr_r: float
    voi_1sb_b: float
    voi_2s_r: float
    voi_2s_b: float
    proposition2_consistent: bool

    def verdict(self, band: float = 0.0) -> str:
        """Consistency of the two VoI comparisons, ignoring differences within ``band``.

        ``indeterminate`` when either comparison is inside the band.
        """
        d_b = self.voi_1sb_b - self.voi_2s_b
        d_r = self.voi_2s_r - self.voi_1sr_r
        if band > 0.0 and (abs(d_b) <= band or abs(d_r) <= band):
            return INDETERMINATE
        return CONSISTENT if (d_b >= 0) == (d_r >= 0) else VIOLATED

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["rounded"] = {k: round(v, 2) if k.startswith("v_") else round(v, 3)
                          for k, v in doc.items() if isinstance(v, float)}
        return doc


def voi_ratios(v_ci: float, v_1s_r: float, v_1s_b: float, v_2s: float) -> tuple[float, float, float, float]:
    """``(voi_1sr_r, voi_1sb_b, voi_2s_r, voi_2s_b)``: relative value changes from hiding a type."""
    return ((v_1s_r - v_ci) / v_ci, (v_ci - v_1s_b) / v_ci,
            (v_2s - v_1s_b) / v_1s_b, (v_1s_r - v_2s) / v_1s_r)


def voi_report(v_ci: float, v_1s_r: float, v_1s_b: float, v_2s: float) -> VoiReport:
    if v_ci == 0 or v_1s_r == 0 or v_1s_b == 0:
        raise DegenerateValue("a benchmark value used as a VoI denominator is zero")
    r1, b1, r2, b2 = voi_ratios(v_ci, v_1s_r, v_1s_b, v_2s)
    consistent = ((b1 >= b2) == (r1 <= r2)) and ((b1 <= b2) == (r1 >= r2))
    return VoiReport(v_ci, v_1s_r, v_1s_b, v_2s, r1, b1, r2, b2, consistent)


def guard_band(report: VoiReport, epsilon_2: float) -> float:
    """Band in VoI units covering ``2 epsilon_2`` of value error."""
    return 2 * epsilon_2 / min(abs(report.v_ci), abs(report.v_1s_r), abs(report.v_1s_b))


def solve_voi(game: Game, config: XdoConfig | None = None, cache: SolveCache | None = None) -> VoiReport:
    c = _cache(game, config, cache)
    return voi_report(value_CI(game, cache=c), value_1S(game, RED, cache=c),
                      value_1S(game, BLUE, cache=c), value_2S(game, cache=c))


# ---------------------------------------------------------------- deception deltas

@dataclass(frozen=True)
class Delta:
    value: float
    minuend: float
    subtrahend: float

    @classmethod
    def of(cls, minuend: float, subtrahend: float) -> "Delta":
        return cls(minuend - subtrahend, minuend, subtrahend)


@dataclass
class DeceptionReport:
    blue_ci_vs_1s: Delta
    blue_ci_vs_2s: Delta
    red_1s_vs_ci: Delta
    red_2s_vs_ci: Delta
    details: dict = field(default_factory=dict)

    def deltas(self) -> dict[str, Delta]:
        return {"blue_ci_vs_1s": self.blue_ci_vs_1s, "blue_ci_vs_2s": self.blue_ci_vs_2s,
                "red_1s_vs_ci": self.red_1s_vs_ci, "red_2s_vs_ci": self.red_2s_vs_ci}

    def to_dict(self) -> dict:
        doc = {name: asdict(d) for name, d in self.deltas().items()}
        doc["rounded"] = {name: round(d.value, 2) for name, d in self.deltas().items()}
        doc["details"] = self.details
        return doc


def assemble_by_type(player: str, parts: dict[int, BehavioralStrategy]) -> BehavioralStrategy:
    """One strategy whose entries for type ``t`` come from ``parts[t]``."""
    table = {}
    for theta, strat in parts.items():
        table.update({k: v for k, v in strat.table.items() if k.theta == theta})
    return BehavioralStrategy(player, table)


def deception_deltas(game: Game, config: XdoConfig | None = None,
                     cache: SolveCache | None = None) -> DeceptionReport:
    """Cost of playing complete-information strategies in the one-sided games.

    Blue side: inside each Blue-informed game (Red's type announced) Red best
    responds to Blue's CI strategy, to Blue's 2S strategy, and the equilibrium
    value is the reference.  Red side mirrors this with Blue best responding.
    All quantities are expected costs averaged over the announced type.
    """
    c = _cache(game, config, cache)
    two_sided = c.solve()[1]

    br_blue_ci = br_blue_2s = v_1sb = 0.0
    for tr in game.red_types:
        sub, res = c.blue_informed(tr)
        ci = assemble_by_type(BLUE, {tb: c.complete(tr, tb)[1].blue for tb in game.blue_types})
        w = game.red_prior(tr)
        v_1sb += w * res.value
        br_blue_ci += w * best_response(sub, RED, ci).value
        br_blue_2s += w * best_response(sub, RED, two_sided.blue).value

    br_red_ci = br_red_2s = v_1sr = 0.0
    for tb in game.blue_types:
        sub, res = c.red_informed(tb)
        ci = assemble_by_type(RED, {tr: c.complete(tr, tb)[1].red for tr in game.red_types})
        w = game.blue_prior(tb)
        v_1sr += w * res.value
        br_red_ci += w * -best_response(sub, BLUE, ci).value
        br_red_2s += w * -best_response(sub, BLUE, two_sided.red).value

    return DeceptionReport(
        blue_ci_vs_1s=Delta.of(br_blue_ci, v_1sb),
        blue_ci_vs_2s=Delta.of(br_blue_ci, br_blue_2s),
        red_1s_vs_ci=Delta.of(v_1sr, br_red_ci),
        red_2s_vs_ci=Delta.of(br_red_2s, br_red_ci),
        details={"v_1s_b": v_1sb, "v_1s_r": v_1sr, "v_2s": two_sided.value})
