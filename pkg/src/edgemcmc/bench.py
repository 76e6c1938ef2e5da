"""Replicated simulation experiments in the layout of a (topology, N, beta) grid."""
from __future__ import annotations

import configparser
import logging
import os
from dataclasses import dataclass, field, replace
import numpy as np

from . import metrics
from .graph import Prior, fully_connected
from .rng import Stream
from .oracle import expected_edge_probabilities
from .sampler import McmcConfig, posterior_from_trace, run
from .topologies import BASE_NAMES, Topology, get_topology, simulate

log = logging.getLogger(__name__)

METRICS = ("mse1", "mse2", "mse3", "precision", "power")
DATA_ROLE, CHAIN_ROLE = 0, 1


def replicate_seed(master: int, topo: Topology, n: int, beta: float, rep: int, role: int):
    """Seed for one replicate; data seeds depend on the generating topology only."""
    name = topo.data_name if role == DATA_ROLE else topo.name
    try:
        tid = BASE_NAMES.index(name)
    except ValueError:
        tid = 1000 + sum(ord(c) for c in name)
    return np.random.SeedSequence([int(master), tid, int(n), int(round(beta * 1e6)), int(rep), role])


@dataclass
class Experiment:
    topologies: list[str]
    ns: list[int]
    betas: list[float]
    replicates: int = 25
    prior: Prior = Prior(0.05, 0.05, 0.9)
    mcmc: McmcConfig = McmcConfig()
    seed: int = 1
    candidate: str = "skeleton"   # or "full"
    cutoff: float = 0.5

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if self.candidate not in ("skeleton", "full"):
            raise ValueError("candidate must be 'skeleton' or 'full'")
        for t in self.topologies:
            get_topology(t)

    @classmethod
    def from_file(cls, path) -> "Experiment":
        text = open(path).read()
        if not text.lstrip().startswith("["):
            text = "[experiment]\n" + text
        cp = configparser.ConfigParser()
        cp.read_string(text)
        sec = cp[cp.sections()[0]]

        def lst(key, conv):
            return [conv(x) for x in sec[key].replace(",", " ").split()]

        mcmc = McmcConfig(
            iterations=sec.getint("iterations", 30_000),
            burn_in=sec.getfloat("burn_in", 0.2),
            step_size=sec.getint("step_size", 120),
        )
        return cls(
            topologies=lst("topology", str),
            ns=lst("n", int),
            betas=lst("beta", float),
            replicates=sec.getint("replicates", 25),
            prior=Prior.parse(sec.get("prior", "0.05,0.05,0.9")),
            mcmc=mcmc,
            seed=sec.getint("seed", 1),
            candidate=sec.get("candidate", "skeleton"),
            cutoff=sec.getfloat("cutoff", 0.5),
        )

    def cells(self):
        for t in self.topologies:
            for n in self.ns:
                for beta in self.betas:
                    yield t, n, beta


@dataclass
class ReplicateResult:
    topology: str
    n: int
    beta: float
    replicate: int
    emse: list[float]
    values: dict[str, float]
    posterior: np.ndarray = field(repr=False)


@dataclass
class EvalReport:
    experiment: Experiment
    replicates: list[ReplicateResult]

    def rows(self) -> list[dict]:
        out = []
        for t, n, beta in self.experiment.cells():
            reps = [r for r in self.replicates if (r.topology, r.n, r.beta) == (t, n, beta)]
            row = {"topology": t, "n": n, "beta": beta, "replicates": len(reps)}
            for k in METRICS:
                vals = np.array([r.values[k] for r in reps])
                row[f"{k}_mean"] = float(vals.mean())
                row[f"{k}_sd"] = float(vals.std(ddof=1)) if len(vals) > 1 else float("nan")
            out.append(row)
        return out


def evaluate_posterior(posterior, topo: Topology, cutoff: float = 0.5):
    g = posterior.graph
    expected = expected_edge_probabilities(topo.true_states(g), g)
    em = metrics.emse_table(expected, posterior)
    prec, power = metrics.precision_power(posterior, topo.true_pair_set(), cutoff)
    values = {
        "mse1": float(np.mean(em)),
        "mse2": metrics.mse2(expected, posterior),
        "mse3": metrics.mse3(expected, posterior),
        "precision": prec,
        "power": power,
    }
    return em, values


def run_replicate(exp: Experiment, topo_name: str, n: int, beta: float, rep: int) -> ReplicateResult:
    topo = get_topology(topo_name)
    data = simulate(topo, n, beta, replicate_seed(exp.seed, topo, n, beta, rep, DATA_ROLE))
    g = topo.candidate() if exp.candidate == "skeleton" else fully_connected(topo.b)
    cfg = replace(exp.mcmc, seed=0)
    trace = run(data, g, exp.prior, cfg,
                rng=Stream(replicate_seed(exp.seed, topo, n, beta, rep, CHAIN_ROLE)))
    post = posterior_from_trace(trace, g)
    em, values = evaluate_posterior(post, topo, exp.cutoff)
    return ReplicateResult(topo_name, n, beta, rep, em, values, post.probs)


def _task(args):
    return run_replicate(*args)


def run_experiment(exp: Experiment, jobs: int | None = None) -> EvalReport:
    tasks = [(exp, t, n, beta, r) for t, n, beta in exp.cells() for r in range(exp.replicates)]
    if jobs is None:
        jobs = int(os.environ.get("EDGEMCMC_JOBS", "1"))
    if jobs > 1:
        from multiprocessing import Pool
        with Pool(jobs) as pool:
            results = pool.map(_task, tasks)
    else:
        results = [_task(t) for t in tasks]
    return EvalReport(exp, results)
