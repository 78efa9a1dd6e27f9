"""Temporal contagion generator and the independence-test battery.

Outcomes evolve on a network by synchronous logistic updates: each
node's next state depends on its own treatment, its previous state,
and its neighbors' previous states; one unit's treatment never enters
another unit's update. Snapshots of the final time step are the
datasets the battery interrogates: for every nonadjacent ordered pair
it tests marginal independence, independence given the target's
neighbors, and independence given neighbors plus the target's own
treatment.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import CaseDataset
from .errors import ConfigurationError, DegenerateDataError, SeparationWarning
from .fitting import likelihood_ratio_ci_test
from .graph import NetworkGraph, canonical_edge
from .model import PER_NODE, SHARED
from .runtime import parallel_map, replicate_seed

HYPOTHESES = ("a", "b", "c")
HYPOTHESIS_CONDITIONING = {
    "a": "none (marginal)",
    "b": "target's neighbors",
    "c": "target's neighbors and target's treatment",
}


@dataclass(frozen=True)
class TemporalParams:
    """Update-rule coefficients for the synchronous contagion process.

    Scalars broadcast: ``intercepts`` to every node, and
    ``neighbor_influence`` to every edge (a dict keyed by unordered
    label pair gives per-edge values, symmetric by construction).
    """

    intercepts: object = 0.0
    treatment_effect: float = 0.5
    self_persistence: float = 1.5
    neighbor_influence: object = 0.3
    horizon: int = 50
    treatment_prob: float = 0.5

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("horizon must be at least 1")
        if not 0.0 < self.treatment_prob < 1.0:
            raise ConfigurationError("treatment_prob must be inside (0, 1)")
        for name in ("treatment_effect", "self_persistence"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")

    def intercept_vector(self, network: NetworkGraph) -> np.ndarray:
        if np.ndim(self.intercepts) == 0:
            return np.full(network.n, float(self.intercepts))
        vec = np.asarray(self.intercepts, dtype=float)
        if vec.shape != (network.n,):
            raise ConfigurationError(
                f"{len(vec)} intercepts for {network.n} nodes"
            )
        return vec

    def influence_matrix(self, network: NetworkGraph) -> np.ndarray:
        """Symmetric (n, n) matrix of neighbor weights, zero off-edge."""
        w = np.zeros((network.n, network.n))
        if isinstance(self.neighbor_influence, dict):
            given = {
                canonical_edge(u, v): float(val)
                for (u, v), val in self.neighbor_influence.items()
            }
            if set(given) != set(network.edge_list()):
                raise ConfigurationError(
                    "neighbor_influence keys must be exactly the network edges"
                )
        else:
            given = {
                e: float(self.neighbor_influence) for e in network.edge_list()
            }
        for (u, v), val in given.items():
            i, j = network.index(u), network.index(v)
            w[i, j] = w[j, i] = val
        return w


def random_network(n: int, p: float, seed) -> NetworkGraph:
    """Each unordered pair is an edge independently with probability p."""
    if n < 1:
        raise ConfigurationError("network needs at least one node")
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError("edge probability must lie in [0, 1]")
    labels = tuple(f"v{i + 1:02d}" for i in range(n))
    rng = np.random.default_rng(seed)
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.add((labels[i], labels[j]))
    return NetworkGraph(labels, frozenset(edges))


def step_outcomes(
    network: NetworkGraph,
    params: TemporalParams,
    a: np.ndarray,
    y_prev: np.ndarray,
    uniforms: np.ndarray,
) -> np.ndarray:
    """One deterministic synchronous update given the uniform draws.

    Exposes the structural fact that node i's next state is a function
    of (a_i, y^{t-1}, uniforms_i) only: no other unit's treatment enters.
    """
    inter = params.intercept_vector(network)
    w = params.influence_matrix(network)
    fields = (
        inter[None, :]
        + params.treatment_effect * np.atleast_2d(a)
        + params.self_persistence * np.atleast_2d(y_prev)
        + np.atleast_2d(y_prev) @ w
    )
    p_plus = 1.0 / (1.0 + np.exp(-2.0 * fields))
    out = np.where(np.atleast_2d(uniforms) < p_plus, 1.0, -1.0)
    return out if np.ndim(y_prev) == 2 else out[0]


def simulate_trajectories(
    network: NetworkGraph,
    params: TemporalParams,
    n_reps: int,
    seed,
) -> tuple[np.ndarray, np.ndarray]:
    """Full paths: treatments (R, n) and outcomes (R, T+1, n)."""
    if n_reps < 1:
        raise ConfigurationError("n_reps must be positive")
    n = network.n
    rng = np.random.default_rng(seed)
    a = (rng.random((n_reps, n)) < params.treatment_prob).astype(np.int8)
    inter = params.intercept_vector(network)
    p0 = 1.0 / (1.0 + np.exp(-2.0 * inter))
    path = np.empty((n_reps, params.horizon + 1, n), dtype=np.int8)
    y = np.where(rng.random((n_reps, n)) < p0[None, :], 1.0, -1.0)
    path[:, 0] = y
    for t in range(1, params.horizon + 1):
        y = step_outcomes(network, params, a, y, rng.random((n_reps, n)))
        path[:, t] = y
    return a, path


def simulate_temporal(
    network: NetworkGraph,
    params: TemporalParams,
    n_reps: int,
    seed,
) -> CaseDataset:
    """Final-time snapshots as a per-node-treatment dataset."""
    a, path = simulate_trajectories(network, params, n_reps, seed)
    return CaseDataset(
        graph=network,
        treatment_mode=PER_NODE,
        y=path[:, -1],
        a=a,
    )


@dataclass(frozen=True)
class BatteryRow:
    target: str
    probe: str
    hypothesis: str
    p_value: float
    reject: bool


@dataclass(frozen=True)
class BatteryReport:
    """Per-pair test results plus per-hypothesis rejection rates."""

    alpha: float
    rows: tuple[BatteryRow, ...]
    rates: dict[str, float]
    skipped: int = 0


def run_battery(
    data: CaseDataset,
    network: NetworkGraph,
    alpha: float = 0.05,
    threads: int = 1,
) -> BatteryReport:
    """Three independence tests per nonadjacent ordered pair.

    (a) target vs probe marginally; (b) given the target's neighbor
    outcomes; (c) given those neighbors plus the target's own
    treatment. Pairs whose test is undefined (single-class outcomes)
    are skipped and excluded from the rates.
    """
    if tuple(network.node_labels) != tuple(data.graph.node_labels):
        raise ConfigurationError(
            "battery network labels must match the dataset's node labels"
        )
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError("alpha must be inside (0, 1)")
    ordered = [
        (u, v)
        for u in network.node_labels
        for v in network.node_labels
        if u != v and not network.has_edge(u, v)
    ]
    if not ordered:
        raise ConfigurationError(
            "network is complete: no nonadjacent pairs to test"
        )

    def conditioning(target: str, hyp: str) -> list[str]:
        if hyp == "a":
            return []
        cols = [f"y_{v}" for v in network.neighbors(target)]
        if hyp == "c":
            treat = "a" if data.treatment_mode == SHARED else f"a_{target}"
            cols = [treat] + cols
        return cols

    def one(job):
        target, probe, hyp = job
        try:
            p = likelihood_ratio_ci_test(
                data, target, probe, conditioning(target, hyp)
            )
        except DegenerateDataError:
            return BatteryRow(target, probe, hyp, math.nan, False)
        return BatteryRow(target, probe, hyp, p, bool(p < alpha))

    jobs = [(u, v, hyp) for (u, v) in ordered for hyp in HYPOTHESES]
    # ridge fallbacks are routine across many conditioned fits; muted
    # in the main thread because catch_warnings is not thread-safe
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        rows = tuple(parallel_map(one, jobs, threads))
    rates = {}
    skipped = 0
    for hyp in HYPOTHESES:
        valid = [r for r in rows if r.hypothesis == hyp and not math.isnan(r.p_value)]
        skipped += sum(
            1 for r in rows if r.hypothesis == hyp and math.isnan(r.p_value)
        )
        rates[hyp] = (
            sum(1 for r in valid if r.reject) / len(valid) if valid else math.nan
        )
    return BatteryReport(alpha=alpha, rows=rows, rates=rates, skipped=skipped)


def write_battery_csv(report: BatteryReport, path, style: str = "pair") -> None:
    """CSV of all rows. Styles: "pair" (pair_i,pair_m,...,reject) and
    "plain" (i,m,...,reject_at_0.05)."""
    if style == "pair":
        header = ["pair_i", "pair_m", "hypothesis", "p_value", "reject"]
    elif style == "plain":
        header = ["i", "m", "hypothesis", "p_value", "reject_at_0.05"]
    else:
        raise ConfigurationError(f"unknown battery CSV style {style!r}")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in report.rows:
            writer.writerow(
                [r.target, r.probe, r.hypothesis, repr(r.p_value), int(r.reject)]
            )


def conjecture_experiment(
    params: TemporalParams,
    n_networks: int = 10,
    n: int = 9,
    edge_prob: float = 0.3,
    n_reps: int = 1000,
    alpha: float = 0.05,
    seed: int = 0,
    threads: int = 1,
) -> list[tuple[NetworkGraph, BatteryReport]]:
    """Battery over several random networks with per-network substreams.

    Networks whose complement is empty (no nonadjacent pair) are
    regenerated from the next substream so every entry has a report.
    """
    if edge_prob >= 1.0 and n >= 2:
        raise ConfigurationError(
            "network is complete: no nonadjacent pairs to test"
        )
    out = []
    draw = 0
    while len(out) < n_networks:
        net_seed = replicate_seed(seed, 2 * draw)
        data_seed = replicate_seed(seed, 2 * draw + 1)
        draw += 1
        network = random_network(n, edge_prob, net_seed)
        if not network.nonadjacent_pairs():
            if draw > 100 * n_networks:
                raise ConfigurationError(
                    "could not draw a network with nonadjacent pairs"
                )
            continue
        data = simulate_temporal(network, params, n_reps, data_seed)
        out.append((network, run_battery(data, network, alpha, threads)))
    return out
