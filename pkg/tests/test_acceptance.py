"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Shared instance sets are solved once per module.  Tolerances are the stated
ones; nothing here is loosened to make a criterion pass.
"""

import time

import numpy as np
import pytest

from agt.analysis import (
    VIOLATED,
    SolveCache,
    bayes_update,
    brute_force_value,
    deception_deltas,
    guard_band,
    shapley_value_iteration,
    solve_voi,
    voi_report,
)
from agt.best_response import full_exploitability
from agt.cfr import CfrConfig, cfr_solve
from agt.errors import DepthCapExceeded
from agt.extensive import BehavioralStrategy, simulate_playout, tree_from_nested
from agt.game import BLUE, RED, validate_spec
from agt.randgen import random_game
from agt.scenario import line3, line3_two_red_types, reference_values, twelve_node, twelve_node_path
from agt.xdo import XdoConfig, xdo_solve

N_RANDOM = 50
N_DEGENERATE = 20
T = ("terminal",)


def _config(game):
    eps2 = 0.05 * game.bounds.v_bar
    return XdoConfig(eps2 / 4, eps2)


def _solve(game, config):
    t0 = time.perf_counter()
    try:
        return xdo_solve(game, config), None, time.perf_counter() - t0
    except DepthCapExceeded as exc:
        return None, exc, time.perf_counter() - t0


@pytest.fixture(scope="module")
def fixture_runs():
    runs = {}
    for name, make, target in (("L3", line3, 6.0), ("L3-2T", line3_two_red_types, 4.0)):
        game = validate_spec(make())
        config = XdoConfig(0.01, 0.1)
        res, err, secs = _solve(game, config)
        runs[name] = dict(game=game, config=config, result=res, error=err, seconds=secs, target=target)
    return runs


@pytest.fixture(scope="module")
def random_runs():
    runs = []
    t0 = time.perf_counter()
    for seed in range(N_RANDOM):
        game = random_game(np.random.default_rng(seed))
        config = _config(game)
        res, err, secs = _solve(game, config)
        runs.append(dict(seed=seed, game=game, config=config, result=res, error=err, seconds=secs,
                         oracle=brute_force_value(game)))
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="module")
def degenerate_runs():
    runs = []
    for seed in range(N_DEGENERATE):
        game = random_game(np.random.default_rng(10_000 + seed), degenerate=True)
        config = _config(game)
        res, err, _ = _solve(game, config)
        runs.append(dict(seed=seed, game=game, config=config, result=res, error=err,
                         shapley=shapley_value_iteration(game).value(game.start),
                         oracle=brute_force_value(game)))
    return runs


@pytest.fixture(scope="module")
def twelve_node_reports():
    game = validate_spec(twelve_node())
    config = XdoConfig(0.01, 0.1)
    cache = SolveCache(game, config)
    return game, config, solve_voi(game, cache=cache), deception_deltas(game, cache=cache)


def test_criterion_1_fixture_equilibria(fixture_runs, gate):
    problems = []
    for name, run in fixture_runs.items():
        res = run["result"]
        if res is None or not res.converged:
            problems.append(f"{name} did not converge")
            continue
        if abs(res.value - run["target"]) > run["config"].epsilon_2:
            problems.append(f"{name} value {res.value:.6f} vs {run['target']}")
        if name == "L3" and res.iterations > 3:
            problems.append(f"L3 took {res.iterations} outer iterations")
        if run["seconds"] >= 1.0:
            problems.append(f"{name} took {run['seconds']:.3f} s")
    l3, l3_2t = fixture_runs["L3"], fixture_runs["L3-2T"]
    detail = (f"L3 {l3['result'].value:.4f} in {l3['result'].iterations} iterations ({l3['seconds']:.3f} s), "
              f"L3-2T {l3_2t['result'].value:.4f} ({l3_2t['seconds']:.3f} s)")
    assert gate(1, not problems, detail + ("; " + "; ".join(problems) if problems else "")), problems


def test_criterion_2_oracle_equivalence(random_runs, gate):
    runs, total = random_runs
    errors, bad = [], []
    for run in runs:
        res = run["result"]
        if res is None or not res.converged:
            bad.append(f"seed {run['seed']} did not converge")
            continue
        err = abs(res.value - run["oracle"])
        errors.append(err / run["config"].epsilon_2)
        if err > run["config"].epsilon_2 + 1e-6:
            bad.append(f"seed {run['seed']}: |{res.value:.6f} - {run['oracle']:.6f}| > eps2")
    ok = not bad and len(runs) >= 50 and total < 300
    detail = (f"{len(runs)} random specs, worst error {max(errors, default=float('nan')):.3f} eps2, "
              f"{total:.1f} s total")
    assert gate(2, ok, detail + ("; " + "; ".join(bad) if bad else "")), bad


def test_criterion_3_exploitability(fixture_runs, random_runs, gate):
    bad, worst = [], -np.inf
    runs = list(fixture_runs.values()) + random_runs[0]
    for run in runs:
        res = run["result"]
        if res is None or not res.converged:
            continue
        eps2 = run["config"].epsilon_2
        gaps = full_exploitability(run["game"], res.red, res.blue)
        worst = max(worst, max(gaps) / eps2)
        if not all(-1e-9 <= g <= eps2 for g in gaps):
            bad.append(f"gaps {gaps} with eps2={eps2}")
    detail = f"{len(runs)} converged profiles, worst gap {worst:.3f} eps2"
    assert gate(3, not bad, detail + ("; " + "; ".join(bad) if bad else "")), bad


def test_criterion_4_complete_information(degenerate_runs, gate):
    bad, worst = [], 0.0
    for run in degenerate_runs:
        res = run["result"]
        tol = run["config"].epsilon_2 + 1e-6
        if res is None or not res.converged:
            bad.append(f"seed {run['seed']} did not converge")
            continue
        vals = (res.value, run["shapley"], run["oracle"])
        spread = max(vals) - min(vals)
        worst = max(worst, spread / run["config"].epsilon_2)
        if spread > tol:
            bad.append(f"seed {run['seed']}: xdo/shapley/oracle = {vals}")
    detail = f"{len(degenerate_runs)} degenerate specs, worst spread {worst:.3f} eps2"
    assert gate(4, not bad, detail + ("; " + "; ".join(bad) if bad else "")), bad


def test_criterion_5_depth_cap(fixture_runs, random_runs, degenerate_runs, gate):
    bad, n_playouts = [], 0
    runs = list(fixture_runs.values()) + random_runs[0] + degenerate_runs
    for run in runs:
        if run["error"] is not None:
            bad.append(f"depth cap hit: {run['error']}")
            continue
        game, res = run["game"], run["result"]
        cap = game.bounds.depth_cap
        reds = [BehavioralStrategy.from_pure(s, game) for s in res.populations[RED]] + [res.red]
        blues = [BehavioralStrategy.from_pure(s, game) for s in res.populations[BLUE]] + [res.blue]
        for red in reds:
            for blue in blues:
                for seed in range(3):
                    try:
                        play = simulate_playout(game, red, blue, seed)
                    except DepthCapExceeded as exc:
                        bad.append(f"playout did not terminate: {exc}")
                        continue
                    n_playouts += 1
                    if play.terminal_time > cap:
                        bad.append(f"playout length {play.terminal_time} > {cap}")
    detail = f"{len(runs)} solves without a depth-cap hit, {n_playouts} population playouts terminated"
    assert gate(5, not bad, detail + ("; " + "; ".join(bad[:3]) if bad else "")), bad


def test_criterion_6_reported_value_identities(gate):
    report = voi_report(18.76, 20.3, 14.7, 18.41)
    printed = {"voi_1sr_r": (0.08, 2), "voi_1sb_b": (0.217, 3), "voi_2s_r": (0.252, 3), "voi_2s_b": (0.09, 2)}
    mismatches = []
    for name, (shown, digits) in printed.items():
        got = round(getattr(report, name), digits)
        if got != shown:
            mismatches.append(f"{name} = {getattr(report, name):.5f} rounds to {got}, printed {shown}")
    mixtures = (round(0.2 * 29 + 0.8 * 14, 10) == 17.0, round(0.2 * 17 + 0.8 * 53, 10) == 45.8)
    ok = not mismatches and report.proposition2_consistent and all(mixtures)
    detail = (f"ratios {report.voi_1sr_r:.4f}/{report.voi_1sb_b:.4f}/{report.voi_2s_r:.4f}/{report.voi_2s_b:.4f}, "
              f"consistent={report.proposition2_consistent}, mixtures 17.0/45.8 {all(mixtures)}")
    assert gate(6, ok, detail + ("; " + "; ".join(mismatches) if mismatches else "")), mismatches


def test_criterion_7_voi_comparisons_agree(random_runs, twelve_node_reports, gate):
    counts = {"cleared": 0, "indeterminate": 0, VIOLATED: 0}
    for run in random_runs[0]:
        game = run["game"]
        if len(game.red_types) == 1 and len(game.blue_types) == 1:
            continue
        report = solve_voi(game, run["config"])
        verdict = report.verdict(guard_band(report, run["config"].epsilon_2))
        counts["cleared" if verdict == "consistent" else verdict] += 1
    _, config, r12, _ = twelve_node_reports
    r12_verdict = r12.verdict(guard_band(r12, config.epsilon_2))
    ok = counts[VIOLATED] == 0 and r12_verdict != VIOLATED
    detail = (f"random multi-type specs: {counts['cleared']} cleared and consistent, "
              f"{counts['indeterminate']} indeterminate, {counts[VIOLATED]} violated; "
              f"twelve-node fixture {r12_verdict}")
    assert gate(7, ok, detail), counts


def test_criterion_8_belief_properties(gate):
    rng = np.random.default_rng(8)
    bad = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 5))
        belief = rng.dirichlet(np.ones(n))
        if rng.random() < 0.2:
            belief = np.eye(n)[rng.integers(n)]
        like = rng.random(n) * (rng.random(n) > 0.2)
        post, flagged = bayes_update(belief, like)
        if abs(post.sum() - 1) > 1e-12 or np.any(post < 0):
            bad += 1
        if belief.max() == 1 and not flagged and not np.array_equal(post, belief):
            bad += 1
        p = rng.random() + 1e-3
        same, _ = bayes_update(belief, np.full(n, p))
        if not np.allclose(same, belief, rtol=0, atol=1e-12):
            bad += 1
    assert gate(8, bad == 0, f"10000 updates, {bad} property violations"), bad


def _pennies():
    def red(label):
        return ("r", "R", [("H", 1 if label == "H" else -1, T), ("T", -1 if label == "H" else 1, T)])
    return tree_from_nested(("b", "B", [("H", 0, red("H")), ("T", 0, red("T"))]))


def _dominant(red_payoffs, blue_offsets):
    def red():
        return ("r", "R", [(f"r{i}", v, T) for i, v in enumerate(red_payoffs)])
    return tree_from_nested(("b", "B", [(f"b{i}", c, red()) for i, c in enumerate(blue_offsets)]))


def test_criterion_9_cfr_sanity(gate):
    res = cfr_solve(_pennies(), CfrConfig(target_gap=1e-3))
    uniform = all(np.allclose(ps, 0.5, atol=0.02) for s in (res.red, res.blue) for _, ps in s.table.values())
    problems = [] if res.gap <= 1e-3 and uniform else [f"pennies gap {res.gap:.2e}, uniform={uniform}"]
    dominant_mass = []
    for red_payoffs, blue_offsets in (((3, 1), (0, 1)), ((1, 2, 5), (2, 0, 4)), ((4, 4.5), (1, 0.5))):
        d = cfr_solve(_dominant(red_payoffs, blue_offsets), CfrConfig(target_gap=1e-3))
        (_, red_probs), = d.red.table.values()
        (_, blue_probs), = d.blue.table.values()
        mass = min(red_probs[int(np.argmax(red_payoffs))], blue_probs[int(np.argmin(blue_offsets))])
        dominant_mass.append(mass)
        if mass < 0.99:
            problems.append(f"dominant mass {mass:.4f} for {red_payoffs}/{blue_offsets}")
    detail = f"pennies gap {res.gap:.2e} after {res.iterations} iterations, dominant mass >= {min(dominant_mass):.4f}"
    assert gate(9, not problems, detail + ("; " + "; ".join(problems) if problems else "")), problems


def test_criterion_10_twelve_node_reports(twelve_node_reports, gate):
    _, _, voi, deltas = twelve_node_reports
    exact = all(d.value == d.minuend - d.subtrahend for d in deltas.deltas().values())
    details_match = (deltas.details["v_1s_b"] == deltas.blue_ci_vs_1s.subtrahend
                     and deltas.details["v_1s_r"] == deltas.red_1s_vs_ci.minuend)
    refs = reference_values(twelve_node_path())
    comparison = ", ".join(f"{k} {getattr(voi, k):.2f} (reference {refs[k]})"
                           for k in ("v_ci", "v_1s_r", "v_1s_b", "v_2s"))
    ok = exact and details_match and voi.proposition2_consistent
    detail = f"deltas exact={exact}, stored evaluations match={details_match}; informational: {comparison}"
    assert gate(10, ok, detail)
