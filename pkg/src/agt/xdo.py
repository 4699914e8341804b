"""Extensive-form double oracle for the indefinite-horizon traversal game.

Populations start with the pure default strategies only.  Each outer
iteration builds the restricted game, solves it with CFR to ``epsilon_1``,
extends the solution by the defaults, computes both full-game best responses
and stops once neither player gains more than ``epsilon_2``.  Otherwise every
best response that beat the threshold joins its player's population.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

from .best_response import best_response
from .cfr import CfrConfig, cfr_solve
from .errors import ConfigInvalid, OuterBudgetExhausted
from .extensive import BehavioralStrategy, PureStrategy, build_restricted_game, evaluate_profile, extend_strategy
from .game import BLUE, RED, Game

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class XdoConfig:
    epsilon_1: float = 0.01
    epsilon_2: float = 0.1
    max_outer: int = 50
    cfr: CfrConfig | None = None
    seed: int = 0
    max_nodes: int = 2_000_000

    def __post_init__(self):
        if not (self.epsilon_1 > 0 and self.epsilon_2 > 0):
            raise ConfigInvalid("epsilon_1 and epsilon_2 must be positive")
        if not self.epsilon_1 < self.epsilon_2 / 2:
            raise ConfigInvalid(f"epsilon_1={self.epsilon_1} must be below epsilon_2/2={self.epsilon_2 / 2}")
        if self.max_outer < 1:
            raise ConfigInvalid("max_outer must be at least 1")

    def cfr_config(self) -> CfrConfig:
        base = self.cfr or CfrConfig()
        return CfrConfig(base.max_iterations, base.check_period, self.epsilon_1)


@dataclass
class IterationRecord:
    iteration: int
    tree_nodes: int
    red_infosets: int
    blue_infosets: int
    max_depth: int
    cfr_iterations: int
    restricted_value: float
    restricted_gap: float
    value: float
    gap_r: float
    gap_b: float
    added_r: bool
    added_b: bool
    population_r: int
    population_b: int
    seconds: float


@dataclass
class XdoResult:
    red: BehavioralStrategy
    blue: BehavioralStrategy
    value: float
    gap_r: float
    gap_b: float
    converged: bool
    log: list[IterationRecord] = field(default_factory=list)
    populations: dict = field(default_factory=dict, repr=False)
    horizon_hint: float = math.nan

    @property
    def iterations(self) -> int:
        return len(self.log)

    def report(self) -> dict:
        return {
            "value": self.value,
            "gap_r": self.gap_r,
            "gap_b": self.gap_b,
            "converged": self.converged,
            "iterations": self.iterations,
            "horizon_hint": self.horizon_hint,
            "log": [asdict(r) for r in self.log],
        }


def horizon_hint(game: Game, config: XdoConfig) -> float:
    """Depth beyond which best responses cannot gain more than ``epsilon_2``.

    Smallest T with ``2 v_bar^2 / (c_min T) <= epsilon_2 - 2 epsilon_1``.
    Logged only; nothing is cut at this depth.
    """
    b = game.bounds
    slack = config.epsilon_2 - 2 * config.epsilon_1
    if b.v_bar == 0 or not math.isfinite(b.c_min):
        return 0.0
    return math.ceil(2 * b.v_bar ** 2 / (b.c_min * slack))


def _add(population: list[PureStrategy], candidate: PureStrategy) -> bool:
    if any(p.mapping == candidate.mapping for p in population):
        return False
    population.append(candidate)
    return True


def xdo_solve(game: Game, config: XdoConfig = XdoConfig(), raise_on_budget: bool = False) -> XdoResult:
    """Run double oracle to an ``epsilon_2``-equilibrium.

    When the outer budget runs out the last profile is returned with
    ``converged=False`` (or :class:`OuterBudgetExhausted` is raised carrying it,
    if ``raise_on_budget``).
    """
    populations = {RED: [PureStrategy(RED)], BLUE: [PureStrategy(BLUE)]}
    cfr_cfg = config.cfr_config()
    records: list[IterationRecord] = []
    hint = horizon_hint(game, config)
    result = None

    for it in range(config.max_outer):
        t0 = time.perf_counter()
        tree = build_restricted_game(game, populations, config.max_nodes)
        solved = cfr_solve(tree, cfr_cfg)
        red = extend_strategy(solved.red)
        blue = extend_strategy(solved.blue)
        value = evaluate_profile(game, red, blue)
        br_r = best_response(game, RED, blue)
        br_b = best_response(game, BLUE, red)
        gap_r = br_r.value - value
        gap_b = br_b.value + value
        added_r = added_b = False
        done = gap_r <= config.epsilon_2 and gap_b <= config.epsilon_2
        if not done:
            if gap_r > config.epsilon_2:
                added_r = _add(populations[RED], br_r.strategy)
            if gap_b > config.epsilon_2:
                added_b = _add(populations[BLUE], br_b.strategy)
        rec = IterationRecord(
            iteration=it, tree_nodes=tree.n_nodes,
            red_infosets=len(tree.infosets_of(RED)), blue_infosets=len(tree.infosets_of(BLUE)),
            max_depth=int(tree.max_depth), cfr_iterations=solved.iterations,
            restricted_value=solved.value, restricted_gap=solved.gap,
            value=value, gap_r=gap_r, gap_b=gap_b, added_r=added_r, added_b=added_b,
            population_r=len(populations[RED]), population_b=len(populations[BLUE]),
            seconds=time.perf_counter() - t0)
        records.append(rec)
        log.info("xdo iter %d: nodes=%d value=%.6g gaps=(%.3g, %.3g)", it, tree.n_nodes, value, gap_r, gap_b)
        result = XdoResult(red, blue, value, gap_r, gap_b, done, records, populations, hint)
        if done:
            return result
        if not (added_r or added_b):
            log.warning("xdo iter %d: exploiting best responses were already in the populations", it)

    if raise_on_budget:
        raise OuterBudgetExhausted(f"no {config.epsilon_2}-equilibrium after {config.max_outer} iterations",
                                   result=result)
    return result
