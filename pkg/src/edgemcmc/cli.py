"""Command-line front end.

Exit codes: 0 success, 1 usage error (bad flags, unreadable or malformed
input), 2 runtime error (degenerate data, guard exceeded, sampler failure).
"""
from __future__ import annotations

import argparse
import configparser
import csv
import logging
import os
import sys
from contextlib import contextmanager

from . import io as fio
from .bench import METRICS, Experiment, evaluate_posterior, run_experiment
from .cycles import CycleError, build_cycle_catalog
from .graph import GraphError, Prior, fully_connected
from .oracle import GuardExceeded, exact_posterior, expected_edge_probabilities
from .sampler import McmcConfig, SamplerError, infer
from .score import DegenerateFit
from .topologies import CATALOG, get_topology, simulate

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _prior(text):
    try:
        return Prior.parse(text)
    except (ValueError, GraphError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _fraction(text):
    v = float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1)")
    return v


def _cutoff(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return v


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _topology(args):
    if getattr(args, "dag", None):
        return fio.read_dag(args.dag)
    try:
        return get_topology(args.topology)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


# --- subcommands ---------------------------------------------------------------

def cmd_simulate(args):
    topo = _topology(args)
    data = simulate(topo, args.n, args.beta, args.seed)
    with _output(args.out) as out:
        fio.write_data(data, out)


def cmd_infer(args):
    data = fio.read_data(args.data)
    if args.fully_connected:
        g = fully_connected(data.b, data.names)
    else:
        g = fio.read_candidate(args.graph, data.names, data.b)
        if g.b != data.b:
            raise UsageError(f"graph has {g.b} nodes but data has {data.b} columns")
    constraints = fio.read_constraints(args.constraints, g) if args.constraints else None
    try:
        config = McmcConfig(args.iterations, args.burn_in, args.step_size, args.seed, args.debug)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table, trace = infer(data, g, args.prior, config, constraints)
    with _output(args.out) as out:
        fio.write_posterior(table, out)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            fio.write_trace(trace, fh)
    logging.info("acceptance rate %.4f over %d iterations", trace.acceptance_rate, trace.total)


def cmd_oracle(args):
    topo = _topology(args)
    if args.graph:
        g = fio.read_candidate(args.graph, b=topo.b)
    elif args.fully_connected:
        g = fully_connected(topo.b)
    else:
        g = topo.candidate()
    if args.data:
        data = fio.read_data(args.data)
        if data.b != g.b:
            raise UsageError(f"data has {data.b} columns but the graph has {g.b} nodes")
        table = exact_posterior(data, g, args.prior)
    else:
        table = expected_edge_probabilities(topo.true_states(g), g)
    with _output(args.out) as out:
        fio.write_posterior(table, out)


def cmd_evaluate(args):
    topo = _topology(args)
    post = fio.read_posterior(args.posterior, topo.b)
    missing = topo.true_pair_set() - set(post.graph.edges)
    if missing:
        u, v = sorted(missing)[0]
        raise UsageError(f"posterior lacks true edge ({u + 1}, {v + 1})")
    em, values = evaluate_posterior(post, topo, args.cutoff)
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(METRICS)
        w.writerow([fio.fmt(values[k]) for k in METRICS])
        w.writerow([])
        w.writerow(("edge_lo", "edge_hi", "emse"))
        for (u, v), e in zip(post.graph.edges, em):
            w.writerow([u + 1, v + 1, fio.fmt(e)])


def cmd_bench(args):
    if not os.path.isfile(args.config):
        raise UsageError(f"{args.config}: no such file")
    try:
        exp = Experiment.from_file(args.config)
    except (KeyError, ValueError, configparser.Error) as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    report = run_experiment(exp, args.jobs)
    rows = report.rows()
    with _output(args.out) as out:
        w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: fio.fmt(v) if isinstance(v, float) else v for k, v in r.items()})


def cmd_cycles(args):
    if args.topology:
        g = _topology(args).candidate()
    elif args.fully_connected:
        g = fully_connected(args.fully_connected)
    elif args.graph:
        g = fio.read_candidate(args.graph)
    else:
        raise UsageError("give a graph file, --topology or --fully-connected")
    cat = build_cycle_catalog(g)
    if cat.overflow:
        raise GuardExceeded(f"skeleton has more than {cat.cap} simple cycles")
    out = sys.stdout
    out.write("edges\tstates\tlength\tdecimal\n")
    for c in cat.cycles:
        for o in c.orientations:
            out.write("{}\t{}\t{}\t{}\n".format(
                ",".join(str(e + 1) for e in o.edges),
                ",".join(str(s) for s in o.states), o.length, o.decimal))


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="edgemcmc", description="Edge-state MCMC for DAG structure learning.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def topo_args(sp, required=True):
        grp = sp.add_mutually_exclusive_group(required=required)
        grp.add_argument("--topology", help=f"one of: {', '.join(CATALOG)}")
        grp.add_argument("--dag", help="file of 'parent child' lines (1-based)")

    s = sub.add_parser("simulate", help="simulate linear-Gaussian data")
    topo_args(s)
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("infer", help="estimate edge-state posteriors")
    s.add_argument("data")
    s.add_argument("graph", nargs="?", help=".edges pair list or .csv adjacency matrix")
    s.add_argument("--fully-connected", action="store_true")
    s.add_argument("--prior", type=_prior, default=Prior(0.05, 0.05, 0.9))
    s.add_argument("--iterations", type=_positive, default=30_000)
    s.add_argument("--burn-in", type=_fraction, default=0.2)
    s.add_argument("--step-size", type=_positive, default=120)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--constraints")
    s.add_argument("--trace")
    s.add_argument("--out")
    s.add_argument("--debug", action="store_true", help="check acyclicity at every iteration")
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("oracle", help="expected probabilities or exact posterior")
    topo_args(s)
    s.add_argument("--graph")
    s.add_argument("--fully-connected", action="store_true")
    s.add_argument("--data")
    s.add_argument("--prior", type=_prior, default=Prior(0.05, 0.05, 0.9))
    s.add_argument("--out")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("evaluate", help="score a posterior against a topology")
    s.add_argument("--posterior", required=True)
    topo_args(s)
    s.add_argument("--cutoff", type=_cutoff, default=0.5)
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("bench", help="run a replicate experiment grid")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--jobs", type=_positive,
                   default=int(os.environ.get("EDGEMCMC_JOBS", "1") or 1))
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("cycles", help="print the skeleton cycle catalog as TSV")
    s.add_argument("graph", nargs="?")
    grp = s.add_mutually_exclusive_group()
    grp.add_argument("--topology")
    grp.add_argument("--fully-connected", type=_positive, metavar="B")
    s.set_defaults(func=cmd_cycles, dag=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "infer" and bool(args.graph) == bool(args.fully_connected):
        parser.error("infer needs exactly one of a graph file or --fully-connected")
    try:
        args.func(args)
    except (UsageError, fio.FormatError, FileNotFoundError, IsADirectoryError,
            PermissionError, GraphError) as exc:
        print(f"edgemcmc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateFit, GuardExceeded, SamplerError, CycleError, ValueError,
            RuntimeError) as exc:
        print(f"edgemcmc {args.command}: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
