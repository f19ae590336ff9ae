"""Command-line entry point: simulate, optimize, attack-eval, report."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

from . import engine, gaopt
from .netmodel import active_links
from .scenario import Scenario, ScenarioError, load, with_seed
from .sentinel import DETECTORS

log = logging.getLogger("manetga")

EXIT_OK, EXIT_IO, EXIT_SCENARIO = 0, 1, 2


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _num(x: float) -> str:
    return f"{x:.6f}"


def summary_row(rep: engine.MetricsReport, commodities) -> List[tuple]:
    cols = [
        ("delivery_ratio", _num(rep.delivery_ratio)),
        ("data_sent", rep.data_sent),
        ("data_delivered", rep.data_delivered),
        ("data_dropped", rep.data_dropped),
        ("control_msgs", rep.control_msgs),
        ("blacklist_events", rep.blacklist_events),
    ]
    for det in DETECTORS:
        s = rep.detectors[det]
        cols += [(f"tp_{det}", s.tp), (f"fp_{det}", s.fp), (f"fn_{det}", s.fn)]
    cols += [
        ("max_link_utilization", _num(rep.max_link_utilization)),
        ("route_discoveries", rep.route_discoveries),
    ]
    cols += [(f"delivery_ratio_g{c.g}", _num(rep.commodity_ratio(c.g))) for c in commodities]
    return cols


def write_run(out: str, sc: Scenario, rep: engine.MetricsReport, events) -> None:
    os.makedirs(out, exist_ok=True)
    cols = summary_row(rep, sc.commodities)
    _write_csv(os.path.join(out, "summary.csv"), [c[0] for c in cols], [[c[1] for c in cols]])
    _write_csv(os.path.join(out, "steps.csv"),
               ["step", "data_sent", "data_delivered", "data_dropped", "in_flight", "control_msgs"],
               engine.step_rows(events, engine.total_steps(events)))
    with open(os.path.join(out, "events.log"), "w", encoding="utf-8", newline="\n") as fh:
        for ev in events:
            fh.write(" ".join(_num(x) if isinstance(x, float) else str(x) for x in ev) + "\n")


def cmd_simulate(path: str, out: str, seed: Optional[int] = None, defense: Optional[str] = None) -> int:
    sc = load(path)
    if seed is not None:
        sc = with_seed(sc, seed)
    df = sc.defense.off() if defense == "off" else None
    rep, events = engine.run(sc, df)
    write_run(out, sc, rep, events)
    log.info("simulate: delivery_ratio=%.3f sent=%d", rep.delivery_ratio, rep.data_sent)
    return EXIT_OK


def cmd_optimize(path: str, out: str, seed: Optional[int] = None) -> int:
    sc = load(path)
    if seed is not None:
        sc = with_seed(sc, seed)
    if not sc.commodities:
        raise ScenarioError(1, "demand", "optimize needs at least one demand record")
    net = gaopt.Network.from_links(active_links(sc.topology))
    if net.n == 0:
        raise ScenarioError(1, "link", "topology has no usable links")
    result = gaopt.evolve(net, sc.commodities, sc.ga)
    outcome = gaopt.route_demands(net, result.best, sc.commodities)
    gaopt.backup_paths(net, result.best, sc.commodities, outcome)
    os.makedirs(out, exist_ok=True)
    _write_csv(os.path.join(out, "weights.csv"), ["a", "b", "weight"],
               [(a, b, w) for (a, b), w in zip(net.links, result.best)])
    _write_csv(os.path.join(out, "ga_history.csv"),
               ["generation", "best_fitness", "mean_fitness", "L1_best", "L2_best"],
               [(h.generation, repr(h.best_fitness), repr(h.mean_fitness), repr(h.L1_best), repr(h.L2_best))
                for h in result.history])

    def fmt(p):
        return " ".join(map(str, p)) if p else ""

    _write_csv(os.path.join(out, "paths.csv"), ["commodity", "primary", "backup"],
               [(c.g, fmt(outcome.primary[c.g]), fmt(outcome.backup[c.g])) for c in sc.commodities])
    log.info("optimize: best fitness %r (L1=%s, L2=%s)", result.breakdown.fitness,
             result.breakdown.L1, result.breakdown.L2)
    return EXIT_OK


def cmd_attack_eval(path: str, out: str, defense: str = "both", seed: Optional[int] = None) -> int:
    sc = load(path)
    if seed is not None:
        sc = with_seed(sc, seed)
    if not sc.attackers:
        raise ScenarioError(1, "attacker", "attack-eval needs at least one attacker record")
    on = sc.defense
    if not on.enabled():
        on = replace(on, **{d: True for d in DETECTORS})
    arms = {"off": [("off", on.off())], "on": [("on", on)], "both": [("off", on.off()), ("on", on)]}[defense]
    header, rows = None, []
    for name, df in arms:
        rep, events = engine.run(sc, df)
        write_run(os.path.join(out, name), sc, rep, events)
        cols = [("arm", name)] + summary_row(rep, sc.commodities)
        header = [c[0] for c in cols]
        rows.append([c[1] for c in cols])
    _write_csv(os.path.join(out, "comparison.csv"), header, rows)
    return EXIT_OK


def cmd_report(directory: str) -> int:
    shown = False
    for name in ("comparison.csv", "summary.csv"):
        path = os.path.join(directory, name)
        if not os.path.exists(path):
            continue
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        width = max(len(h) for h in header)
        print(f"== {name}")
        for i, h in enumerate(header):
            print(f"{h:<{width}}  " + "  ".join(f"{r[i]:>12}" for r in body))
        shown = True
        break
    if not shown:
        print(f"no summary.csv or comparison.csv in {directory}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manetga", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the world loop and write summary/steps/events")
    s.add_argument("scenario")
    s.add_argument("--out", default="out")
    s.add_argument("--seed", type=int)
    s.add_argument("--defense", choices=("on", "off"))

    o = sub.add_parser("optimize", help="evolve link weights and emit primary and backup paths")
    o.add_argument("scenario")
    o.add_argument("--out", default="out")
    o.add_argument("--seed", type=int)

    a = sub.add_parser("attack-eval", help="compare runs with defences off and on")
    a.add_argument("scenario")
    a.add_argument("--out", default="out")
    a.add_argument("--seed", type=int)
    a.add_argument("--defense", choices=("on", "off", "both"), default="both")

    r = sub.add_parser("report", help="print a summary table from an output directory")
    r.add_argument("dir")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "simulate":
            return cmd_simulate(args.scenario, args.out, args.seed, args.defense)
        if args.command == "optimize":
            return cmd_optimize(args.scenario, args.out, args.seed)
        if args.command == "attack-eval":
            return cmd_attack_eval(args.scenario, args.out, args.defense, args.seed)
        return cmd_report(args.dir)
    except ScenarioError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
