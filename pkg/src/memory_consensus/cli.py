"""Command-line front door: topology generation, structural checks, exact
probabilities, simulation, and the two consensus-time experiments.

Machine-readable output (CSV/JSON) goes to stdout; the resolved
effective-config line and any human diagnostics go to stderr. Exit codes:
0 success, 1 bad input, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction

from . import experiments as exp
from .graphs import (
    FAMILIES,
    TopologySpec,
    WeightedDigraph,
    dump_graph,
    is_strongly_connected,
    is_well_behaved,
    load_graph_path,
    make_topology,
)
from .memory import MemoryParams, build_memory_graph
from .probability import winprob_memory, winprob_memoryless
from .simulate import RngSpec, random_colours, records_to_csv, run_batch
from .stationary import stationary_distribution


class CliError(Exception):
    """Invalid invocation or input; reported on one line, exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2 with full usage
        raise CliError(message)


def _echo_config(cmd: str, pairs: dict) -> None:
    rendered = " ".join(f"{k}={v}" for k, v in pairs.items())
    print(f"effective-config: cmd={cmd} {rendered}", file=sys.stderr)


def _out_stream(path: str | None):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    return int.from_bytes(os.urandom(8), "little")


def _pvector(args, flags: list[str]) -> tuple[float, ...] | None:
    values = []
    for i, flag in enumerate(flags):
        v = getattr(args, f"p{i}")
        if v is None:
            tail = [f for f in flags[i:] if getattr(args, f[2:]) is not None]
            if tail:
                raise CliError(
                    f"memory probabilities must be contiguous from --p0; missing {flag}"
                )
            break
        values.append(v)
    return tuple(values) or None


def _parse_fraction_or_float(text: str) -> float | Fraction:
    return Fraction(text) if "/" in text else float(text)


def _load_config_file(path: str) -> list[tuple[int, ...]]:
    """Colour-id-per-line blocks separated by blank lines, oldest layer first."""
    layers: list[list[int]] = [[]]
    with open(path, encoding="utf-8") as fp:
        for raw in fp:
            line = raw.strip()
            if line.startswith("#"):
                continue
            if not line:
                if layers[-1]:
                    layers.append([])
                continue
            try:
                layers[-1].append(int(line))
            except ValueError:
                raise CliError(f"{path}: bad colour id {line!r}") from None
    if not layers[-1]:
        layers.pop()
    if not layers:
        raise CliError(f"{path}: no configurations found")
    return [tuple(layer) for layer in layers]


def _topology_from_args(args) -> WeightedDigraph:
    spec = TopologySpec(
        family=args.family,
        n=args.n,
        parts=tuple(args.parts) if getattr(args, "parts", None) else None,
        sides=tuple(args.sides) if getattr(args, "sides", None) else None,
    )
    return make_topology(spec, exact=getattr(args, "exact", False))


def _graph_from_args(args) -> WeightedDigraph:
    if getattr(args, "graph", None):
        return load_graph_path(args.graph)
    if getattr(args, "family", None):
        if args.n is None:
            raise CliError("--family needs --n")
        return _topology_from_args(args)
    raise CliError("need a graph file or --family/--n")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args) -> int:
    g = _topology_from_args(args)
    _echo_config("gen", {
        "family": args.family, "n": args.n, "parts": args.parts,
        "sides": args.sides, "exact": args.exact, "out": args.out or "-",
    })
    fp = _out_stream(args.out)
    try:
        dump_graph(g, fp)
    finally:
        if fp is not sys.stdout:
            fp.close()
    return 0


def _cmd_check(args) -> int:
    g = load_graph_path(args.graph)
    _echo_config("check", {"graph": args.graph, "format": args.format})
    strong = is_strongly_connected(g)
    behaved = is_well_behaved(g) if strong else False
    if args.format == "json":
        print(json.dumps(
            {"n": g.n, "strongly_connected": strong, "well_behaved": behaved},
            sort_keys=True,
        ))
    else:
        print(f"strongly_connected: {str(strong).lower()}")
        print(f"well_behaved: {str(behaved).lower()}")
    return 0


def _cmd_stationary(args) -> int:
    g = load_graph_path(args.graph)
    _echo_config("stationary", {
        "graph": args.graph, "tolerance": args.tolerance, "format": args.format,
    })
    mu = stationary_distribution(g, tolerance=args.tolerance)
    if args.format == "json":
        print(json.dumps({str(v): float(mu[v]) for v in range(g.n)}, sort_keys=False))
    else:
        print("node,influence")
        for v in range(g.n):
            print(f"{v},{float(mu[v])!r}")
    return 0


def _cmd_winprob(args, pflags) -> int:
    g = load_graph_path(args.graph)
    layers = _load_config_file(args.config)
    pvec = _pvector(args, pflags)
    names = args.names.split(",") if args.names else None
    _echo_config("winprob", {
        "graph": args.graph, "config": args.config,
        "p": list(pvec) if pvec else None, "names": args.names,
    })
    mu = stationary_distribution(g)
    if pvec is None and len(layers) == 1:
        dist = winprob_memoryless(g, mu, layers[0])
    else:
        if pvec is None:
            raise CliError(
                f"configuration file has {len(layers)} layers; pass --p0..--pm"
            )
        dist = winprob_memory(g, mu, MemoryParams(pvec), layers)

    def key(c: int) -> str:
        if names is not None:
            if c >= len(names):
                raise CliError(f"colour id {c} has no name in --names")
            return names[c]
        return str(c)

    print(json.dumps({key(c): float(dist[c]) for c in sorted(dist)}, sort_keys=False))
    return 0


def _cmd_simulate(args, pflags) -> int:
    g = _graph_from_args(args)
    pvec = _pvector(args, pflags)
    if pvec is None:
        pvec = (1.0,)
    if args.m is not None and args.m != len(pvec) - 1:
        raise CliError(f"--m {args.m} inconsistent with {len(pvec)} p-values")
    p = MemoryParams(pvec)
    seed = _resolve_seed(args.seed)
    if args.init == "file":
        if not args.init_file:
            raise CliError("--init file needs --init-file")
        layers = _load_config_file(args.init_file)
        initial = layers[0] if len(layers) == 1 else layers
    else:
        initial = random_colours(g.n, args.colours)
    _echo_config("simulate", {
        "graph": args.graph or f"{args.family}:{args.n}", "m": p.m,
        "p": list(pvec), "runs": args.runs, "cap": args.cap, "seed": seed,
        "init": args.init if args.init == "random" else args.init_file,
        "colours": args.colours, "workers": args.workers, "out": args.out or "-",
    })
    records = run_batch(g, p, initial, args.runs, args.cap, RngSpec(seed), args.workers)
    fp = _out_stream(args.out)
    try:
        records_to_csv(records, fp)
    finally:
        if fp is not sys.stdout:
            fp.close()
    return 0


def _experiment_io(args):
    raw_fp = open(args.rounds_out, "w", encoding="utf-8") if args.rounds_out else None
    sink = exp.RawRoundsWriter(raw_fp) if raw_fp else None
    return raw_fp, sink


def _family_list(arg: str | None) -> list[str]:
    families = arg.split(",") if arg else list(FAMILIES)
    for family in families:
        if family not in FAMILIES:
            raise CliError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return families


def _cmd_exp1(args) -> int:
    seed = _resolve_seed(args.seed)
    families = _family_list(args.families)
    if args.p0_grid:
        grid = [float(x) for x in args.p0_grid.split(",")]
    else:
        grid = exp.FULL_P0_GRID if args.full_scale else exp.DESK_P0_GRID
    runs = args.runs or (exp.FULL_EXP1_RUNS if args.full_scale else exp.DESK_EXP1_RUNS)
    sizes = exp.FULL_EXP1_N if args.full_scale else exp.DESK_EXP1_N
    _echo_config("exp1", {
        "families": ",".join(families), "n": args.n or "per-family",
        "p0_grid": ",".join(repr(x) for x in grid), "runs": runs, "seed": seed,
        "cap": args.cap, "full_scale": args.full_scale, "workers": args.workers,
        "out": args.out or "-", "rounds_out": args.rounds_out,
    })
    raw_fp, sink = _experiment_io(args)
    summaries = []
    try:
        for family in families:
            n = args.n or sizes[family]
            summaries.extend(
                exp.experiment1(family, n, grid, runs, seed, cap=args.cap,
                                workers=args.workers, raw_sink=sink)
            )
    finally:
        if raw_fp:
            raw_fp.close()
    fp = _out_stream(args.out)
    try:
        exp.summaries_to_csv(summaries, fp)
    finally:
        if fp is not sys.stdout:
            fp.close()
    return 0


def _cmd_exp2(args) -> int:
    seed = _resolve_seed(args.seed)
    families = _family_list(args.families)
    if args.n_grid:
        n_grid = [int(x) for x in args.n_grid.split(",")]
    else:
        n_grid = exp.FULL_EXP2_N_GRID if args.full_scale else exp.DESK_EXP2_N_GRID
    runs = args.runs or (exp.FULL_EXP2_RUNS if args.full_scale else exp.DESK_EXP2_RUNS)
    _echo_config("exp2", {
        "families": ",".join(families),
        "n_grid": args.n_grid or "per-family", "p0": args.p0, "runs": runs,
        "seed": seed, "cap": args.cap, "full_scale": args.full_scale,
        "workers": args.workers, "out": args.out or "-",
        "rounds_out": args.rounds_out,
    })
    raw_fp, sink = _experiment_io(args)
    try:
        summaries = exp.experiment2(families, n_grid, args.p0, runs, seed,
                                    cap=args.cap, workers=args.workers, raw_sink=sink)
    finally:
        if raw_fp:
            raw_fp.close()
    fp = _out_stream(args.out)
    try:
        exp.summaries_to_csv(summaries, fp)
    finally:
        if fp is not sys.stdout:
            fp.close()
    return 0


def _cmd_dump_memory_graph(args, pflags) -> int:
    g = load_graph_path(args.graph)
    pvec = _pvector(args, pflags)
    if pvec is None:
        raise CliError("dump-memory-graph needs --p0..--pm")
    _echo_config("dump-memory-graph", {
        "graph": args.graph, "p": list(pvec), "out": args.out or "-",
    })
    lg = build_memory_graph(g, MemoryParams(pvec))
    names = [f"L{lg.layer_of(v)}_{lg.base_node_of(v)}" for v in range(lg.base.n)]
    fp = _out_stream(args.out)
    try:
        dump_graph(lg.base, fp, node_names=names)
    finally:
        if fp is not sys.stdout:
            fp.close()
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_p_flags(parser, count: int) -> list[str]:
    flags = []
    for i in range(count):
        parser.add_argument(f"--p{i}", type=_parse_fraction_or_float, default=None,
                            help=argparse.SUPPRESS if i > 1 else f"probability of lag {i}")
        flags.append(f"--p{i}")
    return flags


def build_parser(max_p: int) -> tuple[_Parser, list[str]]:
    parser = _Parser(prog="memcons", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    gen = sub.add_parser("gen", help="generate a topology as a graph file")
    gen.add_argument("--family", required=True, choices=FAMILIES)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--parts", type=int, nargs=2, default=None,
                     help="biclique partition sizes")
    gen.add_argument("--sides", type=int, nargs=2, default=None,
                     help="torus side lengths (both odd)")
    gen.add_argument("--exact", action="store_true", help="rational weights")
    gen.add_argument("-o", "--out", default=None)

    check = sub.add_parser("check", help="strong connectivity and well-behavedness")
    check.add_argument("graph")
    check.add_argument("--format", choices=("lines", "json"), default="lines")

    stat = sub.add_parser("stationary", help="stationary distribution as CSV")
    stat.add_argument("graph")
    stat.add_argument("--tolerance", type=float, default=1e-12)
    stat.add_argument("--format", choices=("csv", "json"), default="csv")

    win = sub.add_parser("winprob", help="exact winning probabilities as JSON")
    win.add_argument("graph")
    win.add_argument("--config", required=True,
                     help="colour ids, one per line; blank lines split layers (oldest first)")
    win.add_argument("--names", default=None, help="comma-separated colour names")
    win_p = _add_p_flags(win, max_p)

    sim = sub.add_parser("simulate", help="seeded Monte Carlo runs as CSV")
    sim.add_argument("graph", nargs="?", default=None)
    sim.add_argument("--family", choices=FAMILIES, default=None)
    sim.add_argument("--n", type=int, default=None)
    sim.add_argument("--m", type=int, default=None)
    sim.add_argument("--runs", type=int, default=100)
    sim.add_argument("--cap", type=int, default=exp.DEFAULT_CAP)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--init", choices=("random", "file"), default="random")
    sim.add_argument("--init-file", default=None)
    sim.add_argument("--colours", type=int, default=2)
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("-o", "--out", default=None)
    sim_p = _add_p_flags(sim, max_p)

    e1 = sub.add_parser("exp1", help="tau vs p0 at fixed n")
    e1.add_argument("--families", default=None, help="comma-separated; default all")
    e1.add_argument("--n", type=int, default=None)
    e1.add_argument("--p0-grid", default=None, help="comma-separated p0 values")
    e1.add_argument("--runs", type=int, default=None)
    e1.add_argument("--seed", type=int, default=None)
    e1.add_argument("--cap", type=int, default=exp.DEFAULT_CAP)
    e1.add_argument("--full-scale", action="store_true")
    e1.add_argument("--workers", type=int, default=None)
    e1.add_argument("-o", "--out", default=None)
    e1.add_argument("--rounds-out", default=None, help="raw per-run rounds CSV")

    e2 = sub.add_parser("exp2", help="tau vs n at fixed p0")
    e2.add_argument("--families", default=None)
    e2.add_argument("--n-grid", default=None, help="comma-separated sizes")
    e2.add_argument("--p0", type=float, default=exp.DESK_EXP2_P0)
    e2.add_argument("--runs", type=int, default=None)
    e2.add_argument("--seed", type=int, default=None)
    e2.add_argument("--cap", type=int, default=exp.DEFAULT_CAP)
    e2.add_argument("--full-scale", action="store_true")
    e2.add_argument("--workers", type=int, default=None)
    e2.add_argument("-o", "--out", default=None)
    e2.add_argument("--rounds-out", default=None)

    dump = sub.add_parser("dump-memory-graph",
                          help="emit the layered memory graph as a graph file")
    dump.add_argument("graph")
    dump.add_argument("-o", "--out", default=None)
    dump_p = _add_p_flags(dump, max_p)

    return parser, win_p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    seen = [int(m.group(1)) for a in argv for m in [re.match(r"--p(\d+)$", a)] if m]
    max_p = max(seen, default=1) + 1
    parser, pflags = build_parser(max_p)
    try:
        args = parser.parse_args(argv)
        if args.cmd == "gen":
            return _cmd_gen(args)
        if args.cmd == "check":
            return _cmd_check(args)
        if args.cmd == "stationary":
            return _cmd_stationary(args)
        if args.cmd == "winprob":
            return _cmd_winprob(args, pflags)
        if args.cmd == "simulate":
            return _cmd_simulate(args, pflags)
        if args.cmd == "exp1":
            return _cmd_exp1(args)
        if args.cmd == "exp2":
            return _cmd_exp2(args)
        if args.cmd == "dump-memory-graph":
            return _cmd_dump_memory_graph(args, pflags)
        raise CliError(f"unknown subcommand {args.cmd!r}")
    except (CliError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # internal failure
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
