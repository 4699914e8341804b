"""Command-line driver: ``agt {solve,voi,deltas,evaluate,simulate,export} SCENARIO``.

Every command writes its artifacts plus a ``manifest.json`` (config, seed and
sha256 of each artifact) into ``--out``.  Reports contain no timings, so the
same scenario and flags reproduce byte-identical files.

Exit codes: 0 success, 2 an iteration budget ran out, 1 anything invalid.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import plotting
from .analysis import SolveCache, belief_trajectories, deception_deltas, guard_band, solve_voi
from .best_response import full_exploitability
from .cfr import CfrConfig
from .errors import AgtError, IterationBudgetExhausted, OuterBudgetExhausted, UnknownFormat
from .extensive import (
    check_strategy,
    default_strategy,
    evaluate_profile,
    load_strategy,
    save_strategy,
    simulate_playout,
    strategy_to_dict,
)
from .game import BLUE, RED, Game, validate_spec
from .scenario import load_scenario, reference_values
from .xdo import XdoConfig, xdo_solve

log = logging.getLogger("agt")

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2
FORMATS = ("dot", "table", "json")


class Run:
    """Output directory bookkeeping for one command."""

    def __init__(self, args, command: str):
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.args = args
        self.command = command
        self.artifacts: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.out / name
        self.artifacts.append(p)
        return p

    def write_json(self, name: str, doc) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")
        return p

    def write_rows(self, name: str, header, rows) -> Path:
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, delimiter="\t" if name.endswith(".tsv") else ",", lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        return p

    def finish(self) -> None:
        scenario = Path(self.args.scenario)
        manifest = {
            "command": self.command,
            "scenario": str(scenario),
            "scenario_sha256": _sha256(scenario),
            "config": {k: v for k, v in sorted(vars(self.args).items())
                       if k not in ("func", "scenario", "out", "verbose")},
            "out": str(self.out),
            "artifacts": {p.name: _sha256(p) for p in self.artifacts if p.exists()},
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (tuple, set, frozenset)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _config(args) -> XdoConfig:
    cfr = CfrConfig(max_iterations=args.cfr_iters)
    return XdoConfig(epsilon_1=args.eps1, epsilon_2=args.eps2, max_outer=args.max_outer, cfr=cfr,
                     seed=args.seed)


def _load_game(args) -> Game:
    try:
        return validate_spec(load_scenario(args.scenario))
    except AgtError as exc:
        raise AgtError(f"{args.scenario}: {type(exc).__name__}: {exc}") from exc


def _strategies(args, game: Game):
    strategies = {}
    for player, path in ((RED, args.red), (BLUE, args.blue)):
        if path is None:
            strategies[player] = default_strategy(player)
            continue
        strat = load_strategy(path)
        if strat.player != player:
            raise AgtError(f"{path}: strategy belongs to the other player")
        check_strategy(game, strat)
        strategies[player] = strat
    return strategies[RED], strategies[BLUE]


def _report_log(result) -> list[dict]:
    # wall-clock times stay out of the files so reruns are byte-identical
    return [{k: v for k, v in asdict(r).items() if k != "seconds"} for r in result.log]


# --- commands ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    game = _load_game(args)
    config = _config(args)
    run = Run(args, "solve")
    result = xdo_solve(game, config)
    report = result.report()
    report["log"] = _report_log(result)
    run.write_json("result.json", report)
    save_strategy(result.red, run.path("red_strategy.json"))
    save_strategy(result.blue, run.path("blue_strategy.json"))
    header = [k for k in _report_log(result)[0]]
    run.write_rows("iterations.csv", header, [[r[k] for k in header] for r in _report_log(result)])
    plotting.convergence_figure(result, run.path("convergence.png"))
    run.finish()
    print(f"value {result.value:.6f}")
    print(f"gap_r {result.gap_r:.3g}  gap_b {result.gap_b:.3g}  iterations {result.iterations}")
    if not result.converged:
        print(f"no {config.epsilon_2}-equilibrium within {config.max_outer} outer iterations", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_voi(args) -> int:
    game = _load_game(args)
    config = _config(args)
    run = Run(args, "voi")
    cache = SolveCache(game, config)
    report = solve_voi(game, cache=cache)
    verdict = report.verdict(guard_band(report, config.epsilon_2))
    doc = report.to_dict()
    doc["verdict"] = verdict
    refs = reference_values(args.scenario)
    if refs:
        doc["reference"] = {k: refs[k] for k in sorted(refs) if k.startswith(("v_", "voi_"))}
    run.write_json("voi.json", doc)
    plotting.voi_figure(report, run.path("voi.png"))
    run.finish()
    for name in ("v_ci", "v_1s_r", "v_1s_b", "v_2s", "voi_1sr_r", "voi_1sb_b", "voi_2s_r", "voi_2s_b"):
        line = f"{name:10s} {getattr(report, name):.6f}"
        if name in refs:
            line += f"   (reference {refs[name]})"
        print(line)
    print(f"value-of-information comparison: {verdict}")
    return EXIT_OK


def cmd_deltas(args) -> int:
    game = _load_game(args)
    config = _config(args)
    run = Run(args, "deltas")
    cache = SolveCache(game, config)
    deltas = deception_deltas(game, cache=cache)
    report = solve_voi(game, cache=cache)
    doc = deltas.to_dict()
    refs = reference_values(args.scenario)
    ref_d = {k: refs[k] for k in deltas.deltas() if k in refs}
    if ref_d:
        doc["reference"] = ref_d
    run.write_json("deltas.json", doc)
    plotting.voi_figure(report, run.path("deltas.png"), deltas)
    run.finish()
    for name, d in deltas.deltas().items():
        line = f"{name:14s} {d.value:+.6f}  = {d.minuend:.6f} - {d.subtrahend:.6f}"
        if name in ref_d:
            line += f"   (reference {ref_d[name]})"
        print(line)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    game = _load_game(args)
    red, blue = _strategies(args, game)
    run = Run(args, "evaluate")
    value = evaluate_profile(game, red, blue)
    gap_r, gap_b = full_exploitability(game, red, blue)
    doc = {"J": value, "U_r": value, "U_b": -value, "gap_r": gap_r, "gap_b": gap_b}
    run.write_json("evaluation.json", doc)
    run.finish()
    print(f"J {value:.6f}  U_r {value:.6f}  U_b {-value:.6f}")
    print(f"gap_r {gap_r:.6g}  gap_b {gap_b:.6g}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    game = _load_game(args)
    red, blue = _strategies(args, game)
    run = Run(args, "simulate")
    rng = np.random.default_rng(args.seed)
    beliefs = {row.history: row for row in belief_trajectories(game, red, blue)}
    costs = np.empty(args.n)
    rows, steps = [], []
    for i in range(args.n):
        play = simulate_playout(game, red, blue, rng)
        costs[i] = play.cost
        rows.append([i, play.red_type, play.blue_type, play.cost, play.terminal_time,
                     " ".join(map(str, play.actions))])
        if i < args.trace:
            for t in range(play.terminal_time + 1):
                b = beliefs[play.actions[:t]]
                steps.append([i, t, b.position, b.graph, *b.blue_belief, *b.red_belief])
    run.write_rows("playouts.csv", ["run", "red_type", "blue_type", "cost", "steps", "actions"], rows)
    n_r, n_b = len(game.spec.red_types), len(game.spec.blue_types)
    header = ["run", "t", "position", "graph"] + [f"blue_belief_r{t}" for t in range(1, n_r + 1)] + \
             [f"red_belief_b{t}" for t in range(1, n_b + 1)]
    run.write_rows("steps.csv", header, steps)
    std = float(costs.std(ddof=1)) if args.n > 1 else 0.0
    summary = {"n": args.n, "seed": args.seed, "mean": float(costs.mean()), "std": std,
               "stderr": std / math.sqrt(args.n), "expected": evaluate_profile(game, red, blue)}
    run.write_json("summary.json", summary)
    run.finish()
    print(f"n {args.n}  mean {summary['mean']:.6f}  std {std:.6f}  expected {summary['expected']:.6f}")
    return EXIT_OK


def terrain_dot(game: Game, k: int) -> str:
    goals = set().union(*(game.spec.blue_types[t - 1].goals for t in range(1, len(game.spec.blue_types) + 1)))
    lines = [f"digraph terrain_{k} {{"]
    for p in range(1, game.spec.terrain.node_count + 1):
        shape = "doublecircle" if p in goals else "circle"
        lines.append(f'  {p} [shape={shape}];')
    for (p, q) in game.spec.terrain.edges:
        lines.append(f'  {p} -> {q} [label="{game.weight(k, p, q):g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def action_graph_dot(game: Game, theta: int) -> str:
    edges = sorted(game.spec.red_types[theta - 1].action_edges)
    lines = [f"digraph red_type_{theta} {{"]
    for k in range(1, game.spec.terrain.graph_count + 1):
        lines.append(f'  G{k} [label="G{k}"];')
    for k, k2 in edges:
        lines.append(f"  G{k} -> G{k2};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export(args) -> int:
    if args.format not in FORMATS:
        raise UnknownFormat(f"unknown export format {args.format!r}; choose from {', '.join(FORMATS)}")
    game = _load_game(args)
    run = Run(args, "export")
    if args.format == "dot":
        for k in range(1, game.spec.terrain.graph_count + 1):
            run.path(f"terrain_{k}.dot").write_text(terrain_dot(game, k))
        for t in range(1, len(game.spec.red_types) + 1):
            run.path(f"red_type_{t}.dot").write_text(action_graph_dot(game, t))
    else:
        red, blue = _strategies(args, game)
        rows = belief_trajectories(game, red, blue)
        n_r, n_b = len(game.spec.red_types), len(game.spec.blue_types)
        if args.format == "table":
            header = ["history", "position", "graph", "probability", "live"] + \
                     [f"blue_belief_r{t}" for t in range(1, n_r + 1)] + \
                     [f"red_belief_b{t}" for t in range(1, n_b + 1)]
            run.write_rows("beliefs.tsv", header,
                           [[" ".join(map(str, r.history)), r.position, r.graph, r.probability, int(r.live),
                             *r.blue_belief, *r.red_belief] for r in rows])
        else:
            run.write_json("beliefs.json", [asdict(r) for r in rows])
            run.write_json("strategies.json", {"red": strategy_to_dict(red), "blue": strategy_to_dict(blue)})
        plotting.belief_figure(rows, run.path("blue_belief.png"), observer="b")
        plotting.belief_figure(rows, run.path("red_belief.png"), observer="r")
    run.finish()
    print(f"wrote {len(run.artifacts)} files to {run.out}")
    return EXIT_OK


# --- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file")
    common.add_argument("--eps1", type=float, default=0.01, help="restricted-game CFR target gap")
    common.add_argument("--eps2", type=float, default=0.1, help="full-game equilibrium tolerance")
    common.add_argument("--max-outer", type=int, default=50, help="double-oracle iteration budget")
    common.add_argument("--cfr-iters", type=int, default=200_000, help="CFR iteration budget per solve")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="agt-out", help="output directory")
    common.add_argument("--format", default="json", help="export format: dot, table or json")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="agt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_ in (
        ("solve", cmd_solve, "compute an equilibrium with the double oracle"),
        ("voi", cmd_voi, "benchmark values and value of information"),
        ("deltas", cmd_deltas, "cost of complete-information strategies in the one-sided games"),
        ("evaluate", cmd_evaluate, "expected cost and exploitability of a strategy pair"),
        ("simulate", cmd_simulate, "sample playouts of a strategy pair"),
        ("export", cmd_export, "graphs as DOT, beliefs as tables"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        if name in ("evaluate", "simulate", "export"):
            p.add_argument("--red", help="Red strategy file (default strategy if omitted)")
            p.add_argument("--blue", help="Blue strategy file (default strategy if omitted)")
        if name == "simulate":
            p.add_argument("-n", type=int, default=1000, help="number of playouts")
            p.add_argument("--trace", type=int, default=100, help="playouts whose steps are logged")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (IterationBudgetExhausted, OuterBudgetExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (AgtError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
