"""Exact probabilities, counterfactuals, and causal effects by enumeration.

Everything here enumerates the 2^n outcome configurations of the
undirected block in log space (streaming max-shifted log-sum-exp), so
results are exact up to float rounding and safe against overflow for
any finite parameters. Enumeration refuses to run above a configurable
node limit.

Counterfactual quantities marginalize the covariates over a
:class:`CovariateLaw`; effects contrast two treatment assignments on
the risk-difference, risk-ratio, or odds-ratio scale.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    CapacityError,
    ConfigurationError,
    ShapeError,
    UndefinedScaleError,
)
from .graph import NetworkGraph, canonical_edge
from .model import (
    SHARED,
    ChainGraphModel,
    log_potential,
    model_fingerprint,
    node_fields,
    treatment_as_vector,
)

ENUM_LIMIT_DEFAULT = 20

RISK_DIFFERENCE = "risk_difference"
RISK_RATIO = "risk_ratio"
ODDS_RATIO = "odds_ratio"
EFFECT_SCALES = (RISK_DIFFERENCE, RISK_RATIO, ODDS_RATIO)
_SCALE_ALIASES = {"rd": RISK_DIFFERENCE, "rr": RISK_RATIO, "or": ODDS_RATIO}

# Cells per (strata x configurations) work block; chunks adapt to it.
_BLOCK_CELLS = 1 << 22

_spin_cache: dict[int, np.ndarray] = {}


def resolve_scale(name: str) -> str:
    key = name.strip().lower()
    key = _SCALE_ALIASES.get(key, key)
    if key not in EFFECT_SCALES:
        raise ConfigurationError(
            f"unknown effect scale {name!r}; choose from {EFFECT_SCALES}"
        )
    return key


def _check_limit(n: int, limit: int | None) -> int:
    limit = ENUM_LIMIT_DEFAULT if limit is None else int(limit)
    if n > limit:
        raise CapacityError(
            f"graph has {n} nodes; enumeration limit is {limit} "
            f"(raise the limit explicitly to proceed)"
        )
    return limit


def spin_chunks(n: int, max_rows: int):
    """Yield blocks of the 2^n sign configurations in binary-count order.

    Row b has entry j equal to +1 when bit j of b is set, else -1, so
    coverage is exactly the plain binary counting order.
    """
    total = 1 << n
    if total <= max_rows and n <= 12:
        if n not in _spin_cache:
            idx = np.arange(total, dtype=np.int64)
            bits = (idx[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
            _spin_cache[n] = bits.astype(float) * 2.0 - 1.0
        yield _spin_cache[n]
        return
    step = max(1, max_rows)
    shifts = np.arange(n, dtype=np.int64)[None, :]
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        yield ((idx[:, None] >> shifts) & 1).astype(float) * 2.0 - 1.0


@dataclass(frozen=True)
class EventPredicate:
    """A set of outcome configurations, by +1-count or listed explicitly.

    ``counts`` holds the admissible numbers of +1 entries; ``configs``
    holds full sign vectors. Exactly one of the two is set.
    """

    counts: frozenset[int] | None = None
    configs: frozenset[tuple[int, ...]] | None = None

    def __post_init__(self):
        if (self.counts is None) == (self.configs is None):
            raise ConfigurationError(
                "event needs exactly one of counts or explicit configs"
            )
        if self.counts is not None:
            counts = frozenset(int(v) for v in self.counts)
            if not counts:
                raise ConfigurationError("event count set is empty")
            if any(v < 0 for v in counts):
                raise ConfigurationError("event counts must be nonnegative")
            object.__setattr__(self, "counts", counts)
        else:
            configs = frozenset(tuple(int(v) for v in cfg) for cfg in self.configs)
            if not configs:
                raise ConfigurationError("event config set is empty")
            sizes = {len(cfg) for cfg in configs}
            if len(sizes) != 1:
                raise ConfigurationError("event configs have mixed lengths")
            for cfg in configs:
                if any(v not in (-1, 1) for v in cfg):
                    raise ConfigurationError("event config entries must be -1 or +1")
            object.__setattr__(self, "configs", configs)

    @classmethod
    def from_counts(cls, counts) -> "EventPredicate":
        return cls(counts=frozenset(counts))

    @classmethod
    def from_configs(cls, vectors) -> "EventPredicate":
        return cls(configs=frozenset(tuple(v) for v in vectors))

    def mask(self, spins: np.ndarray) -> np.ndarray:
        """Boolean membership of each row of a (m, n) sign matrix."""
        n = spins.shape[1]
        if self.counts is not None:
            if max(self.counts) > n:
                raise ConfigurationError(
                    f"event count {max(self.counts)} exceeds {n} nodes"
                )
            plus = (spins > 0).sum(axis=1)
            return np.isin(plus, sorted(self.counts))
        width = len(next(iter(self.configs)))
        if width != n:
            raise ShapeError(f"event configs have length {width}, graph has {n}")
        weights = 1 << np.arange(n, dtype=np.int64)
        codes = (spins > 0).astype(np.int64) @ weights
        wanted = np.asarray(
            sorted(
                int(np.array([(v + 1) // 2 for v in cfg], dtype=np.int64) @ weights)
                for cfg in self.configs
            ),
            dtype=np.int64,
        )
        return np.isin(codes, wanted)


def parse_event(text: str, n_nodes: int | None = None) -> EventPredicate:
    """Parse event syntax: "count=9", "count in {4,5}", "count>=5".

    Inequality forms need ``n_nodes`` to expand the count range.
    """
    s = text.strip().lower()
    m = re.fullmatch(r"count\s*=\s*(\d+)", s)
    if m:
        return EventPredicate.from_counts({int(m.group(1))})
    m = re.fullmatch(r"count\s+in\s+\{\s*(\d+(?:\s*,\s*\d+)*)\s*\}", s)
    if m:
        return EventPredicate.from_counts(
            {int(v) for v in m.group(1).split(",")}
        )
    m = re.fullmatch(r"count\s*(>=|<=)\s*(\d+)", s)
    if m:
        if n_nodes is None:
            raise ConfigurationError(
                f"event {text!r} needs the node count to expand the range"
            )
        bound = int(m.group(2))
        if m.group(1) == ">=":
            counts = set(range(bound, n_nodes + 1))
        else:
            counts = set(range(0, bound + 1))
        if not counts:
            raise ConfigurationError(f"event {text!r} is empty for n={n_nodes}")
        return EventPredicate.from_counts(counts)
    raise ConfigurationError(
        f"cannot parse event {text!r}; use count=K, count in {{K,...}}, "
        f"count>=K, or count<=K"
    )


def event_text(event: EventPredicate):
    """CLI-syntax string for count events; config list for explicit ones."""
    if event.counts is not None:
        vals = sorted(event.counts)
        if len(vals) == 1:
            return f"count={vals[0]}"
        return "count in {" + ",".join(str(v) for v in vals) + "}"
    return {"configs": [list(cfg) for cfg in sorted(event.configs)]}


@dataclass(frozen=True)
class CovariateLaw:
    """Distribution of the binary covariate vector.

    Three kinds: ``empirical`` (weighted atoms), ``product_bernoulli``
    (independent per-node probabilities), and ``ising`` (fields plus
    pairwise couplings on the model's own graph, over +/-1 spins mapped
    to 0/1). Positional entries align with the graph's node order.
    """

    kind: str
    atoms: tuple[tuple[int, ...], ...] = ()
    weights: tuple[float, ...] = ()
    probs: tuple[float, ...] = ()
    fields: tuple[float, ...] = ()
    couplings: tuple[tuple[str, str, float], ...] = ()

    def __post_init__(self):
        if self.kind == "empirical":
            if not self.atoms:
                raise ConfigurationError("empirical law needs at least one atom")
            if len(self.atoms) != len(self.weights):
                raise ConfigurationError("atom/weight count mismatch")
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0):
                raise ConfigurationError("empirical weights must be nonnegative")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ConfigurationError(
                    f"empirical weights sum to {w.sum()!r}, not 1"
                )
            widths = {len(a) for a in self.atoms}
            if len(widths) != 1:
                raise ConfigurationError("empirical atoms have mixed lengths")
            for atom in self.atoms:
                if any(v not in (0, 1) for v in atom):
                    raise ConfigurationError("atom entries must be 0 or 1")
        elif self.kind == "product_bernoulli":
            if not self.probs:
                raise ConfigurationError("product law needs per-node probabilities")
            p = np.asarray(self.probs, dtype=float)
            if np.any((p < 0) | (p > 1)):
                raise ConfigurationError("probabilities must lie in [0, 1]")
        elif self.kind == "ising":
            if not self.fields:
                raise ConfigurationError("ising law needs per-node fields")
            object.__setattr__(
                self,
                "couplings",
                tuple(
                    sorted(
                        (*canonical_edge(u, v), float(w))
                        for u, v, w in self.couplings
                    )
                ),
            )
        else:
            raise ConfigurationError(f"unknown covariate law kind {self.kind!r}")

    @classmethod
    def empirical(cls, atoms, weights) -> "CovariateLaw":
        return cls(
            kind="empirical",
            atoms=tuple(tuple(int(v) for v in a) for a in atoms),
            weights=tuple(float(w) for w in weights),
        )

    @classmethod
    def from_observations(cls, c_matrix) -> "CovariateLaw":
        """Empirical law of observed covariate rows (frequency weights)."""
        c = np.asarray(c_matrix, dtype=np.int8)
        uniq, counts = np.unique(c, axis=0, return_counts=True)
        weights = counts / counts.sum()
        return cls.empirical([tuple(int(v) for v in row) for row in uniq], weights)

    @classmethod
    def product_bernoulli(cls, probs) -> "CovariateLaw":
        return cls(kind="product_bernoulli", probs=tuple(float(p) for p in probs))

    @classmethod
    def ising(cls, fields, couplings) -> "CovariateLaw":
        """Fields per node (graph order) and couplings keyed by label pair."""
        if isinstance(couplings, dict):
            trips = tuple((u, v, w) for (u, v), w in couplings.items())
        else:
            trips = tuple(couplings)
        return cls(kind="ising", fields=tuple(float(f) for f in fields), couplings=trips)

    @classmethod
    def ising_uniform(cls, graph: NetworkGraph, coupling: float) -> "CovariateLaw":
        """Zero fields, one shared coupling on every graph edge."""
        return cls.ising(
            fields=(0.0,) * graph.n,
            couplings={e: float(coupling) for e in graph.edge_list()},
        )

    def as_outcome_model(self, graph: NetworkGraph) -> ChainGraphModel:
        """The ising law as a treatment-free model over +/-1 spins."""
        if self.kind != "ising":
            raise ConfigurationError("only the ising law maps to a spin model")
        k = {(u, v): w for u, v, w in self.couplings}
        missing = set(graph.edge_list()) - set(k)
        extra = set(k) - set(graph.edge_list())
        if missing or extra:
            raise ConfigurationError(
                f"ising couplings do not match graph edges "
                f"(missing {sorted(missing)}, extra {sorted(extra)})"
            )
        if len(self.fields) != graph.n:
            raise ShapeError(
                f"{len(self.fields)} ising fields for {graph.n} nodes"
            )
        return ChainGraphModel(
            graph=graph,
            h=self.fields,
            k=k,
            gamma=(0.0,) * graph.n,
            treatment_mode=SHARED,
        )

    def enumerate_atoms(
        self, graph: NetworkGraph, limit: int | None = None
    ) -> tuple[np.ndarray, np.ndarray]:
        """All covariate atoms with weights: (m, n) 0/1 matrix, (m,) probs."""
        n = graph.n
        if self.kind == "empirical":
            c = np.asarray(self.atoms, dtype=float)
            if c.shape[1] != n:
                raise ShapeError(
                    f"empirical atoms have {c.shape[1]} entries, graph has {n}"
                )
            return c, np.asarray(self.weights, dtype=float)
        _check_limit(n, limit)
        if self.kind == "product_bernoulli":
            if len(self.probs) != n:
                raise ShapeError(f"{len(self.probs)} probabilities for {n} nodes")
            p = np.asarray(self.probs, dtype=float)
            blocks_c = []
            blocks_w = []
            for spins in spin_chunks(n, _BLOCK_CELLS // max(n, 1)):
                c = (spins + 1.0) / 2.0
                blocks_c.append(c)
                blocks_w.append(np.prod(np.where(c == 1.0, p, 1.0 - p), axis=1))
            return np.concatenate(blocks_c), np.concatenate(blocks_w)
        spin_model = self.as_outcome_model(graph)
        spins, probs = enumerate_joint(spin_model, 0, limit=limit)
        return (spins + 1.0) / 2.0, probs


@dataclass(frozen=True)
class EffectEstimate:
    """A counterfactual contrast on one scale, with optional uncertainty."""

    scale: str
    point: float
    se: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    a1: object = None
    a0: object = None
    event: EventPredicate | None = None
    model_fingerprint: str | None = None

    def __post_init__(self):
        if self.scale not in EFFECT_SCALES:
            raise ConfigurationError(f"unknown effect scale {self.scale!r}")
        if self.scale in (RISK_RATIO, ODDS_RATIO) and not self.point > 0:
            raise UndefinedScaleError(
                f"{self.scale} point must be positive, got {self.point!r}"
            )
        if self.ci_low is not None and self.ci_high is not None:
            if not (self.ci_low <= self.point <= self.ci_high):
                raise ConfigurationError(
                    "confidence interval must bracket the point estimate"
                )

    def with_uncertainty(self, se, ci_low, ci_high) -> "EffectEstimate":
        # Percentile intervals from skewed replicates can land beside the
        # full-data point; widen minimally so the bracket always holds.
        lo = min(float(ci_low), self.point)
        hi = max(float(ci_high), self.point)
        return replace(self, se=float(se), ci_low=lo, ci_high=hi)


def effect_to_dict(est: EffectEstimate) -> dict:
    def tr(a):
        if a is None:
            return None
        if np.ndim(a) == 0:
            return int(a)
        return [int(v) for v in a]

    out = {
        "scale": est.scale,
        "point": est.point,
        "a1": tr(est.a1),
        "a0": tr(est.a0),
        "event": None if est.event is None else event_text(est.event),
        "model_fingerprint": est.model_fingerprint,
    }
    if est.se is not None:
        out["se"] = est.se
    if est.ci_low is not None:
        out["ci_low"] = est.ci_low
        out["ci_high"] = est.ci_high
    return out


def _edge_arrays(model: ChainGraphModel):
    pairs = model.graph.edge_index_pairs()
    if not pairs:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    ii, jj = zip(*pairs)
    return np.asarray(ii, dtype=np.int64), np.asarray(jj, dtype=np.int64)


def stratum_log_partitions(
    n: int,
    ii: np.ndarray,
    jj: np.ndarray,
    k_vec: np.ndarray,
    fields: np.ndarray,
    event: EventPredicate | None = None,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Streaming log partition per stratum; optionally the event-restricted one.

    ``fields`` is (S, n): one linear field vector per stratum. Returns
    (logZ, log_event_sum or None), each (S,). Accumulation is
    max-shifted so no exponential ever sees a positive argument.
    """
    S = fields.shape[0]
    run_m = np.full(S, -np.inf)
    run_s = np.zeros(S)
    ev_m = np.full(S, -np.inf)
    ev_s = np.zeros(S)
    max_rows = max(256, _BLOCK_CELLS // max(S, 1))
    for spins in spin_chunks(n, max_rows):
        pair_pot = (spins[:, ii] * spins[:, jj]) @ k_vec if len(k_vec) else 0.0
        phi = fields @ spins.T
        if np.ndim(pair_pot):
            phi = phi + pair_pot[None, :]
        chunk_m = phi.max(axis=1)
        new_m = np.maximum(run_m, chunk_m)
        run_s = run_s * np.exp(run_m - new_m) + np.exp(phi - new_m[:, None]).sum(axis=1)
        run_m = new_m
        if event is not None:
            keep = event.mask(spins)
            if keep.any():
                phi_e = phi[:, keep]
                chunk_m = phi_e.max(axis=1)
                new_m = np.maximum(ev_m, chunk_m)
                ev_s = ev_s * np.exp(ev_m - new_m) + np.exp(
                    phi_e - new_m[:, None]
                ).sum(axis=1)
                ev_m = new_m
    log_z = run_m + np.log(run_s)
    if event is None:
        return log_z, None
    with np.errstate(divide="ignore"):
        log_ev = np.where(ev_s > 0, ev_m + np.log(np.maximum(ev_s, 1e-300)), -np.inf)
    return log_z, log_ev


def stratum_moments(
    n: int,
    ii: np.ndarray,
    jj: np.ndarray,
    k_vec: np.ndarray,
    fields: np.ndarray,
    log_z: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-stratum E[y] (S, n) and E[y_i y_j] over edges (S, E)."""
    S = fields.shape[0]
    first = np.zeros((S, n))
    second = np.zeros((S, len(k_vec)))
    max_rows = max(256, _BLOCK_CELLS // max(S, 1))
    for spins in spin_chunks(n, max_rows):
        pair_prod = spins[:, ii] * spins[:, jj] if len(k_vec) else None
        phi = fields @ spins.T
        if pair_prod is not None:
            phi = phi + (pair_prod @ k_vec)[None, :]
        w = np.exp(phi - log_z[:, None])
        first += w @ spins
        if pair_prod is not None:
            second += w @ pair_prod
    return first, second


def stratum_log_z_and_moments(
    n: int,
    ii: np.ndarray,
    jj: np.ndarray,
    k_vec: np.ndarray,
    fields: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-pass (logZ, E[y], E[y_i y_j]) per stratum.

    Fuses stratum_log_partitions and stratum_moments so the potential
    table is built once; the running sums are rescaled whenever the
    running max shifts, keeping every exponential non-positive.
    """
    S = fields.shape[0]
    n_edges = len(k_vec)
    run_m = np.full(S, -np.inf)
    run_s = np.zeros(S)
    first = np.zeros((S, n))
    second = np.zeros((S, n_edges))
    max_rows = max(256, _BLOCK_CELLS // max(S, 1))
    for spins in spin_chunks(n, max_rows):
        pair_prod = spins[:, ii] * spins[:, jj] if n_edges else None
        phi = fields @ spins.T
        if pair_prod is not None:
            phi = phi + (pair_prod @ k_vec)[None, :]
        chunk_m = phi.max(axis=1)
        new_m = np.maximum(run_m, chunk_m)
        scale = np.exp(run_m - new_m)
        w = np.exp(phi - new_m[:, None])
        run_s = run_s * scale + w.sum(axis=1)
        first = first * scale[:, None] + w @ spins
        if pair_prod is not None:
            second = second * scale[:, None] + w @ pair_prod
        run_m = new_m
    log_z = run_m + np.log(run_s)
    first /= run_s[:, None]
    if n_edges:
        second /= run_s[:, None]
    return log_z, first, second


def _single_fields(model: ChainGraphModel, a, c) -> np.ndarray:
    model.require_valid()
    return node_fields(model, a, c)[None, :]


def log_partition(model: ChainGraphModel, a, c=None, limit: int | None = None) -> float:
    """log of Z(a, c), the normalizing sum over all 2^n outcomes."""
    _check_limit(model.n, limit)
    ii, jj = _edge_arrays(model)
    log_z, _ = stratum_log_partitions(
        model.n, ii, jj, model.k_vec, _single_fields(model, a, c)
    )
    return float(log_z[0])


def joint_prob(model: ChainGraphModel, y, a, c=None, limit: int | None = None) -> float:
    """Exact probability of one full outcome configuration."""
    return float(
        np.exp(log_potential(model, y, a, c) - log_partition(model, a, c, limit))
    )


def event_prob(
    model: ChainGraphModel, a, c, event: EventPredicate, limit: int | None = None
) -> float:
    """P(Y in event | a, c), summing joint probabilities over the event."""
    _check_limit(model.n, limit)
    ii, jj = _edge_arrays(model)
    log_z, log_ev = stratum_log_partitions(
        model.n, ii, jj, model.k_vec, _single_fields(model, a, c), event=event
    )
    return float(np.exp(log_ev[0] - log_z[0]))


def exact_marginals(
    model: ChainGraphModel, a, c=None, limit: int | None = None
) -> np.ndarray:
    """P(Y_i = +1 | a, c) for every node, by enumeration."""
    _check_limit(model.n, limit)
    ii, jj = _edge_arrays(model)
    fields = _single_fields(model, a, c)
    log_z, _ = stratum_log_partitions(model.n, ii, jj, model.k_vec, fields)
    first, _ = stratum_moments(model.n, ii, jj, model.k_vec, fields, log_z)
    return (first[0] + 1.0) / 2.0


def model_expectations(
    model: ChainGraphModel, a, c=None, limit: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """E[y_i] per node and E[y_i y_j] per edge under p(. | a, c).

    These are the partition-function gradients in h and k, which makes
    them both the fitting gradient's model side and a finite-difference
    test target.
    """
    _check_limit(model.n, limit)
    ii, jj = _edge_arrays(model)
    fields = _single_fields(model, a, c)
    log_z, _ = stratum_log_partitions(model.n, ii, jj, model.k_vec, fields)
    first, second = stratum_moments(model.n, ii, jj, model.k_vec, fields, log_z)
    return first[0], second[0]


def enumerate_joint(
    model: ChainGraphModel, a, c=None, limit: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """All 2^n configurations (binary-count order) with their probabilities."""
    _check_limit(model.n, limit)
    model.require_valid()
    ii, jj = _edge_arrays(model)
    fields = _single_fields(model, a, c)
    log_z, _ = stratum_log_partitions(model.n, ii, jj, model.k_vec, fields)
    rows = []
    probs = []
    for spins in spin_chunks(model.n, _BLOCK_CELLS // max(model.n, 1)):
        phi = spins @ fields[0]
        if len(model.k_vec):
            phi = phi + (spins[:, ii] * spins[:, jj]) @ model.k_vec
        rows.append(spins.astype(np.int8))
        probs.append(np.exp(phi - log_z[0]))
    return np.concatenate(rows), np.concatenate(probs)


def counterfactual_event_prob(
    model: ChainGraphModel,
    a,
    event: EventPredicate,
    law: CovariateLaw | None = None,
    limit: int | None = None,
) -> float:
    """P(Y(a) in event), marginalized over the covariate law.

    Without covariates in the model this is just the event probability;
    with covariates, the law supplies p(C = c) and the result is the
    weighted average of event probabilities over its atoms.
    """
    model.require_valid()
    if model.kappa is None:
        if law is not None:
            raise ConfigurationError(
                "covariate law supplied but model has no kappa"
            )
        return event_prob(model, a, None, event, limit)
    if law is None:
        raise ConfigurationError("model has kappa; a covariate law is required")
    _check_limit(model.n, limit)
    atoms, weights = law.enumerate_atoms(model.graph, limit)
    av = treatment_as_vector(model, a)
    base = model.h_vec + model.gamma_vec * av
    fields = base[None, :] + atoms * model.kappa_vec[None, :]
    ii, jj = _edge_arrays(model)
    log_z, log_ev = stratum_log_partitions(
        model.n, ii, jj, model.k_vec, fields, event=event
    )
    return float(weights @ np.exp(log_ev - log_z))


def contrast_on_scale(scale: str, p1: float, p0: float) -> float:
    """Combine the two arm probabilities on the requested scale."""
    scale = resolve_scale(scale)
    if scale == RISK_DIFFERENCE:
        return float(p1 - p0)
    if scale == RISK_RATIO:
        if p0 == 0.0:
            raise UndefinedScaleError("risk ratio undefined: P(event | a0) = 0")
        return float(p1 / p0)
    if p0 == 0.0 or p1 == 1.0:
        raise UndefinedScaleError(
            "odds ratio undefined: P(event | a0) = 0 or P(event | a1) = 1"
        )
    return float((p1 * (1.0 - p0)) / (p0 * (1.0 - p1)))


def causal_effect(
    model: ChainGraphModel,
    a1,
    a0,
    event: EventPredicate,
    scale: str = RISK_DIFFERENCE,
    law: CovariateLaw | None = None,
    limit: int | None = None,
) -> EffectEstimate:
    """Contrast of counterfactual event probabilities under a1 vs a0.

    Uncertainty fields stay unset; the bootstrap fills them in.
    """
    scale = resolve_scale(scale)
    p1 = counterfactual_event_prob(model, a1, event, law, limit)
    p0 = counterfactual_event_prob(model, a0, event, law, limit)
    point = contrast_on_scale(scale, p1, p0)
    return EffectEstimate(
        scale=scale,
        point=float(point),
        a1=a1 if np.ndim(a1) == 0 else tuple(int(v) for v in a1),
        a0=a0 if np.ndim(a0) == 0 else tuple(int(v) for v in a0),
        event=event,
        model_fingerprint=model_fingerprint(model),
    )
