import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agt.best_response import best_response, full_exploitability
from agt.cfr import _Passes
from agt.extensive import (
    BLUE_NODE,
    RED_NODE,
    BehavioralStrategy,
    InfoKey,
    build_full_game,
    default_strategy,
    evaluate_profile,
    simulate_playout,
)
from agt.game import BLUE, RED
from agt.randgen import random_game

seeds = st.integers(0, 2**32 - 1)


def test_red_responds_to_blue_default(l3):
    res = best_response(l3, RED, default_strategy(BLUE))
    assert res.value == 6
    assert res.strategy.mapping[InfoKey(RED, 1, (2,))] == 2


def test_blue_responds_to_red_default(l3):
    res = best_response(l3, BLUE, default_strategy(RED))
    assert res.value == -2


def test_per_type_red_response(l3_2t):
    res = best_response(l3_2t, RED, default_strategy(BLUE))
    assert res.value == 4
    assert res.strategy.mapping[InfoKey(RED, 1, (2,))] == 2
    assert res.strategy.mapping[InfoKey(RED, 2, (2,))] == 1


def test_equilibrium_has_no_gaps(l3):
    red = BehavioralStrategy(RED, {InfoKey(RED, 1, (2,)): ((2,), (1.0,))})
    assert full_exploitability(l3, red, default_strategy(BLUE)) == (0, 0)


def test_default_profile_gaps(l3):
    assert full_exploitability(l3, default_strategy(RED), default_strategy(BLUE)) == (4, 0)


def test_blue_prefers_cheap_branch(d4):
    assert best_response(d4, BLUE, default_strategy(RED)).value == -2


def _random_profile(game, rng):
    """Random behavioral strategies on the full capped tree."""
    tree = build_full_game(game, max_nodes=5000)
    sigma = rng.random(tree.n_slots) ** 3 + 1e-3
    sums = np.bincount(tree.slot_infoset, weights=sigma, minlength=len(tree.keys))
    sigma = sigma / sums[tree.slot_infoset]
    return tree, sigma, tree.behavioral(RED, sigma), tree.behavioral(BLUE, sigma)


def _opponent_only(tree, sigma, responder):
    """Tree-level best response value against the opponent's part of ``sigma``."""
    value, _ = _Passes(tree).best_response(sigma, responder)
    return value


@given(seeds)
def test_red_response_matches_tree_enumeration(seed):
    rng = np.random.default_rng(seed)
    game = random_game(rng, node_budget=5000)
    tree, sigma, _, blue = _random_profile(game, rng)
    res = best_response(game, RED, blue, depth_cap=tree.max_depth)
    assert res.value == pytest.approx(_opponent_only(tree, sigma, RED_NODE), rel=1e-9, abs=1e-9)


@given(seeds)
def test_blue_response_matches_tree_enumeration(seed):
    rng = np.random.default_rng(seed)
    game = random_game(rng, node_budget=5000)
    tree, sigma, red, _ = _random_profile(game, rng)
    # Red's mix reaches the bottom of the tree; Blue then needs at most one simple path
    cap = tree.max_depth + 2 * game.spec.terrain.node_count
    res = best_response(game, BLUE, red, depth_cap=cap)
    # the capped tree pins Blue to its default late, which can only cost Blue
    assert -res.value <= _opponent_only(tree, sigma, BLUE_NODE) + 1e-9
    unpruned = best_response(game, BLUE, red, depth_cap=cap, prune=False)
    assert unpruned.value == pytest.approx(res.value, rel=1e-9, abs=1e-9)


@given(seeds)
def test_response_value_is_its_evaluation(seed):
    rng = np.random.default_rng(seed)
    game = random_game(rng, node_budget=5000)
    tree, _, red, blue = _random_profile(game, rng)
    cap = tree.max_depth + 2 * game.spec.terrain.node_count
    br_r = best_response(game, RED, blue, cap)
    br_b = best_response(game, BLUE, red, cap)
    red_br = BehavioralStrategy.from_pure(br_r.strategy, game)
    blue_br = BehavioralStrategy.from_pure(br_b.strategy, game)
    assert evaluate_profile(game, red_br, blue, cap) == pytest.approx(br_r.value, rel=1e-9, abs=1e-9)
    assert -evaluate_profile(game, red, blue_br, cap) == pytest.approx(br_b.value, rel=1e-9, abs=1e-9)
    gap_r, gap_b = full_exploitability(game, red, blue, cap)
    assert gap_r >= -1e-9 and gap_b >= -1e-9


@given(seeds)
def test_blue_response_to_pure_profile_is_proper(seed):
    rng = np.random.default_rng(seed)
    game = random_game(rng)
    red = BehavioralStrategy.from_pure(best_response(game, RED, default_strategy(BLUE)).strategy, game)
    blue = BehavioralStrategy.from_pure(best_response(game, BLUE, red).strategy, game)
    for s in range(5):
        play = simulate_playout(game, red, blue, s)
        assert play.terminal_time <= game.bounds.depth_cap
