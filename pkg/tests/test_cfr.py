import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agt.cfr import CfrConfig, cfr_solve, regret_matching, restricted_exploitability, tree_value
from agt.errors import ConfigInvalid, IterationBudgetExhausted
from agt.extensive import InfoKey, PureStrategy, build_restricted_game, default_strategy, tree_from_nested
from agt.game import BLUE, RED

T = ("terminal",)


def matching_pennies():
    # Blue picks first, Red picks without seeing it (one shared info set)
    def red(label):
        return ("r", "R", [("H", 1 if label == "H" else -1, T), ("T", -1 if label == "H" else 1, T)])
    return tree_from_nested(("b", "B", [("H", 0, red("H")), ("T", 0, red("T"))]))


def dominant_red():
    # "up" beats "down" for Red whatever Blue does
    def red():
        return ("r", "R", [("up", 3, T), ("down", 1, T)])
    return tree_from_nested(("b", "B", [("x", 0, red()), ("y", 1, red())]))


def switch_game(l3):
    switch = PureStrategy(RED, {InfoKey(RED, 1, (2,)): 2})
    return build_restricted_game(l3, {RED: [PureStrategy(RED), switch], BLUE: [PureStrategy(BLUE)]})


def test_forced_tree_solves_in_one_iteration(l3):
    tree = build_restricted_game(l3, {RED: [PureStrategy(RED)], BLUE: [PureStrategy(BLUE)]})
    res = cfr_solve(tree)
    assert res.value == 2 and res.gap == 0 and res.iterations == 1
    assert restricted_exploitability(tree, res.sigma) == (0, 0)


def test_switch_is_learned(l3):
    tree = switch_game(l3)
    res = cfr_solve(tree, CfrConfig(target_gap=1e-3))
    assert res.value == pytest.approx(6, abs=1e-3)
    assert res.red.table[InfoKey(RED, 1, (2,))][1][1] >= 0.99
    # the blue side is forced, so its strategy is exact
    assert all(ps == (1.0,) for _, ps in res.blue.table.values())


def test_exploitability_of_staying(l3):
    tree = switch_game(l3)
    sigma = tree.sigma_from(l3, default_strategy(RED), default_strategy(BLUE))
    gap_r, gap_b = restricted_exploitability(tree, sigma)
    assert gap_r == pytest.approx(4)
    assert gap_b == pytest.approx(0)


def test_matching_pennies():
    tree = matching_pennies()
    res = cfr_solve(tree, CfrConfig(target_gap=1e-3))
    assert abs(res.value) <= 1e-3
    assert max(res.gap_r, res.gap_b) <= 1e-3
    for strat in (res.red, res.blue):
        (_, probs), = strat.table.values()
        assert np.allclose(probs, 0.5, atol=0.02)
    # re-measured after the fact
    assert max(restricted_exploitability(tree, res.sigma)) <= 1e-3


def test_dominant_action_concentrates():
    tree = dominant_red()
    res = cfr_solve(tree, CfrConfig(target_gap=1e-3))
    assert res.red.table[InfoKey(RED, 0, ("R",))][1][0] >= 0.99
    assert res.blue.table[InfoKey(BLUE, 0, ("B",))][1][0] >= 0.99
    assert res.value == pytest.approx(3, abs=1e-2)


def test_deterministic():
    a = cfr_solve(matching_pennies(), CfrConfig(target_gap=1e-4))
    b = cfr_solve(matching_pennies(), CfrConfig(target_gap=1e-4))
    assert np.array_equal(a.sigma, b.sigma) and a.iterations == b.iterations


def test_budget_exhaustion_carries_best_result():
    with pytest.raises(IterationBudgetExhausted) as info:
        cfr_solve(dominant_red(), CfrConfig(max_iterations=1, check_period=1, target_gap=1e-9))
    assert info.value.best_gap > 1e-9
    assert info.value.result.gap == info.value.best_gap


@pytest.mark.parametrize("kwargs", [{"target_gap": 0}, {"check_period": 0}, {"max_iterations": 0}])
def test_config_validation(kwargs):
    with pytest.raises(ConfigInvalid):
        CfrConfig(**kwargs)


def test_tree_value_uniform_pennies():
    tree = matching_pennies()
    assert tree_value(tree, tree.uniform_sigma()) == 0


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2), st.lists(st.floats(-10, 10), min_size=2, max_size=2))
def test_regret_matching_on_simplex(r1, r2):
    tree = matching_pennies()
    sigma = regret_matching(tree, np.array(r1 + r2))
    for i in range(len(tree.keys)):
        part = sigma[tree.slot_start[i]:tree.slot_start[i + 1]]
        assert np.all(part >= 0)
        assert part.sum() == pytest.approx(1, abs=1e-12)
        regrets = np.array((r1 + r2)[tree.slot_start[i]:tree.slot_start[i + 1]])
        if np.all(regrets <= 0):
            assert np.allclose(part, 0.5)
