"""Gibbs sampling from the outcome block and full synthetic-data generation.

Single chains update one node at a time from its exact conditional
(logit = 2 * linear field, because outcomes are +/-1 coded). Dataset
generation runs one independent chain per observation, vectorized
across observations, and layers the confounder and treatment draws on
top: C from its own law, A_i | C_i logistic, Y | A, C from the chain
graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import CaseDataset
from .errors import ConfigurationError, ShapeError
from .graph import NetworkGraph
from .inference import CovariateLaw
from .model import PER_NODE, ChainGraphModel, check_outcome, node_fields

FIXED_SCAN = "fixed"
RANDOM_SCAN = "random_permutation_per_sweep"

# Chain length used per observation when generating datasets.
DEFAULT_GENERATION_SWEEPS = 1000


@dataclass(frozen=True)
class GibbsConfig:
    """Chain settings: total sweeps, warm-up, thinning, seed, scan order."""

    sweeps: int
    burn_in: int = 1000
    thin: int = 10
    seed: int = 0
    scan_order: str = FIXED_SCAN

    def __post_init__(self):
        if self.scan_order not in (FIXED_SCAN, RANDOM_SCAN):
            raise ConfigurationError(
                f"scan_order must be {FIXED_SCAN!r} or {RANDOM_SCAN!r}"
            )
        if self.thin < 1:
            raise ConfigurationError("thin must be at least 1")
        if self.burn_in < 0:
            raise ConfigurationError("burn_in must be nonnegative")
        if self.sweeps <= self.burn_in:
            raise ConfigurationError("sweeps must exceed burn_in")
        if self.seed < 0:
            raise ConfigurationError("seed must be a nonnegative integer")

    @property
    def kept(self) -> int:
        return (self.sweeps - self.burn_in) // self.thin


def _neighbor_tables(model: ChainGraphModel):
    """Per node: (neighbor index tuple, coupling tuple), in label order."""
    labels = model.graph.node_labels
    idx = {lab: i for i, lab in enumerate(labels)}
    tables = []
    for lab in labels:
        nbrs = model.graph.neighbors(lab)
        tables.append(
            (
                tuple(idx[v] for v in nbrs),
                tuple(model.k[tuple(sorted((lab, v)))] for v in nbrs),
            )
        )
    return tables


def node_conditional_prob(
    model: ChainGraphModel, node: str, y, a, c=None
) -> float:
    """P(Y_node = +1 | all other outcomes, a, c).

    The entry of ``y`` at the node itself is ignored. Equals
    sigmoid(2 * (h_i + sum_j k_ij y_j + gamma_i a_i + kappa_i c_i)).
    """
    model.require_valid()
    i = model.graph.index(node)
    yv = check_outcome(model, y)
    fields = node_fields(model, a, c)
    nbr_idx, nbr_k = _neighbor_tables(model)[i]
    field = fields[i]
    for j, w in zip(nbr_idx, nbr_k):
        field += w * yv[j]
    return 1.0 / (1.0 + math.exp(-2.0 * field))


def gibbs_chain(
    model: ChainGraphModel, a, c, config: GibbsConfig
) -> np.ndarray:
    """Run one chain; return kept states as a ((sweeps-burn_in)//thin, n) array.

    Deterministic for a fixed seed and scan order. Each node update
    draws from node_conditional_prob given the current state.
    """
    model.require_valid()
    n = model.n
    fields = node_fields(model, a, c)
    tables = _neighbor_tables(model)
    base = [float(fields[i]) for i in range(n)]
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    y = [1.0 if v else -1.0 for v in rng.random(n) < 0.5]
    kept = np.empty((config.kept, n), dtype=np.int8)
    out_row = 0
    exp = math.exp
    random_scan = config.scan_order == RANDOM_SCAN
    block = 4096
    sweep = 0
    while sweep < config.sweeps:
        todo = min(block, config.sweeps - sweep)
        uniforms = rng.random((todo, n))
        for b in range(todo):
            order = rng.permutation(n) if random_scan else range(n)
            us = uniforms[b]
            for pos, i in enumerate(order):
                field = base[i]
                nbr_idx, nbr_k = tables[i]
                for j, w in zip(nbr_idx, nbr_k):
                    field += w * y[j]
                p_plus = 1.0 / (1.0 + exp(-2.0 * field))
                y[i] = 1.0 if us[pos] < p_plus else -1.0
            sweep += 1
            if sweep > config.burn_in and (sweep - config.burn_in) % config.thin == 0:
                kept[out_row] = y
                out_row += 1
    return kept


def _vectorized_final_states(
    graph: NetworkGraph,
    k: dict,
    base_fields: np.ndarray,
    sweeps: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Independent chains for every row of base_fields; final states only.

    base_fields is (m, n): each row's outcome-independent linear field.
    All m chains advance in lockstep (same scan order, disjoint
    uniforms), which keeps them independent and the whole draw
    deterministic for a fixed generator state.
    """
    m, n = base_fields.shape
    labels = graph.node_labels
    idx = {lab: i for i, lab in enumerate(labels)}
    tables = []
    for lab in labels:
        nbrs = graph.neighbors(lab)
        tables.append(
            (
                np.asarray([idx[v] for v in nbrs], dtype=np.int64),
                np.asarray(
                    [k[tuple(sorted((lab, v)))] for v in nbrs], dtype=float
                ),
            )
        )
    y = np.where(rng.random((m, n)) < 0.5, 1.0, -1.0)
    for _ in range(sweeps):
        us = rng.random((m, n))
        for i in range(n):
            nbr_idx, nbr_k = tables[i]
            field = base_fields[:, i]
            if len(nbr_idx):
                field = field + y[:, nbr_idx] @ nbr_k
            p_plus = 1.0 / (1.0 + np.exp(-2.0 * field))
            y[:, i] = np.where(us[:, i] < p_plus, 1.0, -1.0)
    return y


@dataclass(frozen=True)
class SimulationScaling:
    """Knobs for synthetic-data generation on top of a base h, k model.

    ``alpha`` and ``beta`` multiply the base h and k; every node gets
    treatment effect ``gamma_value`` and confounder effect
    ``kappa_value``. Treatments follow A_i | C_i ~
    Bernoulli(sigmoid(lambda0 + lambda1 C_i)); confounders follow
    ``confounder_law`` (default: zero-field Ising on the same graph
    with uniform coupling 0.3).
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma_value: float = 0.5
    kappa_value: float = 0.3
    treatment_law: tuple[float, float] = (-0.5, 1.0)
    confounder_law: CovariateLaw | None = None

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma_value", "kappa_value"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        lam0, lam1 = self.treatment_law
        for c in (0.0, 1.0):
            t = lam0 + lam1 * c
            if not math.isfinite(t):
                raise ConfigurationError("treatment law must be finite")
            # overflow-safe sigmoid: exponentiate the negative side only
            if t >= 0:
                p = 1.0 / (1.0 + math.exp(-t))
            else:
                e = math.exp(t)
                p = e / (1.0 + e)
            if not 0.0 < p < 1.0:
                raise ConfigurationError(
                    "treatment law gives probability 0 or 1; it must be "
                    "strictly inside (0, 1)"
                )

    def treatment_prob(self, c: np.ndarray) -> np.ndarray:
        lam0, lam1 = self.treatment_law
        return 1.0 / (1.0 + np.exp(-(lam0 + lam1 * c)))


DEFAULT_CONFOUNDER_COUPLING = 0.3


def apply_scaling(
    base_model: ChainGraphModel, scaling: SimulationScaling
) -> ChainGraphModel:
    """The per-node-mode generating model: alpha*h, beta*k, gamma, kappa."""
    n = base_model.n
    return ChainGraphModel(
        graph=base_model.graph,
        h=tuple(scaling.alpha * v for v in base_model.h),
        k={e: scaling.beta * w for e, w in base_model.k.items()},
        gamma=(scaling.gamma_value,) * n,
        treatment_mode=PER_NODE,
        kappa=(scaling.kappa_value,) * n,
    )


def _draw_confounders(
    law: CovariateLaw,
    graph: NetworkGraph,
    n_obs: int,
    sweeps: int,
    rng: np.random.Generator,
) -> np.ndarray:
    if law.kind == "empirical":
        atoms = np.asarray(law.atoms, dtype=np.int8)
        if atoms.shape[1] != graph.n:
            raise ShapeError(
                f"empirical atoms have {atoms.shape[1]} entries, graph has {graph.n}"
            )
        picks = rng.choice(len(atoms), size=n_obs, p=np.asarray(law.weights))
        return atoms[picks].astype(np.int8)
    if law.kind == "product_bernoulli":
        p = np.asarray(law.probs, dtype=float)
        if len(p) != graph.n:
            raise ShapeError(f"{len(p)} probabilities for {graph.n} nodes")
        return (rng.random((n_obs, graph.n)) < p).astype(np.int8)
    spin_model = law.as_outcome_model(graph)
    base = np.repeat(spin_model.h_vec[None, :], n_obs, axis=0)
    spins = _vectorized_final_states(graph, spin_model.k, base, sweeps, rng)
    return ((spins + 1) // 2).astype(np.int8)


def generate_dataset(
    base_model: ChainGraphModel,
    scaling: SimulationScaling,
    n_obs: int,
    seed: int,
    sweeps: int = DEFAULT_GENERATION_SWEEPS,
) -> CaseDataset:
    """Synthetic (Y, A, C) cases from the scaled chain graph model.

    Per observation: C from the confounder law, each A_i | C_i
    logistic, then Y | A, C as the final state of its own Gibbs chain
    of the given length. Observations are independent chains advanced
    in lockstep. Deterministic for a fixed seed, regardless of outer
    parallelism.
    """
    if n_obs < 1:
        raise ConfigurationError("n_obs must be positive")
    if sweeps < 1:
        raise ConfigurationError("sweeps must be positive")
    model = apply_scaling(base_model, scaling)
    model.require_valid()
    graph = model.graph
    law = scaling.confounder_law
    if law is None:
        law = CovariateLaw.ising_uniform(graph, DEFAULT_CONFOUNDER_COUPLING)
    ss = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(seed)
    )
    rng_c, rng_a, rng_y = (np.random.default_rng(s) for s in ss.spawn(3))
    c = _draw_confounders(law, graph, n_obs, sweeps, rng_c)
    a = (rng_a.random((n_obs, graph.n)) < scaling.treatment_prob(c)).astype(np.int8)
    base_fields = (
        model.h_vec[None, :]
        + model.gamma_vec[None, :] * a
        + model.kappa_vec[None, :] * c
    )
    y = _vectorized_final_states(graph, model.k, base_fields, sweeps, rng_y)
    return CaseDataset(
        graph=graph,
        treatment_mode=PER_NODE,
        y=y.astype(np.int8),
        a=a,
        c=c,
    )
