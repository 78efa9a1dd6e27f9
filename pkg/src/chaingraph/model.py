"""Chain graph model parameters and the shared un-normalized log-potential.

The joint outcome law is the exponential family

    p(y | a, c) ∝ exp( Σ_i h_i y_i + Σ_{(i,j) edge} k_ij y_i y_j
                       + Σ_i gamma_i a_i y_i + Σ_i kappa_i c_i y_i )

with outcomes y_i in {-1, +1}, treatments a in {0, 1} (a single scalar
shared by all nodes, or one per node), and optional binary covariates c.
Every inference, sampling, and fitting routine evaluates this one
potential.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, ShapeError
from .graph import NetworkGraph, canonical_edge

SHARED = "shared"
PER_NODE = "per_node"
TREATMENT_MODES = (SHARED, PER_NODE)


@dataclass(frozen=True)
class ChainGraphModel:
    """Parameters bound to a NetworkGraph and a treatment mode.

    ``h`` and ``gamma`` (and ``kappa`` when present) are per-node, in
    ``graph.node_labels`` order. ``k`` is keyed by unordered label pairs;
    keys are canonicalized, so k_ij = k_ji holds structurally.
    Construction only coerces types; see :func:`validate_model` for the
    invariant check.
    """

    graph: NetworkGraph
    h: tuple[float, ...]
    k: dict[tuple[str, str], float]
    gamma: tuple[float, ...]
    treatment_mode: str = SHARED
    kappa: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(float(v) for v in self.h))
        object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))
        if self.kappa is not None:
            object.__setattr__(
                self, "kappa", tuple(float(v) for v in self.kappa)
            )
        object.__setattr__(
            self,
            "k",
            {canonical_edge(u, v): float(w) for (u, v), w in self.k.items()},
        )

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def has_confounders(self) -> bool:
        return self.kappa is not None

    # Array views aligned with graph.node_labels / graph.edge_list().
    @cached_property
    def h_vec(self) -> np.ndarray:
        return np.asarray(self.h, dtype=float)

    @cached_property
    def gamma_vec(self) -> np.ndarray:
        return np.asarray(self.gamma, dtype=float)

    @cached_property
    def kappa_vec(self) -> np.ndarray | None:
        if self.kappa is None:
            return None
        return np.asarray(self.kappa, dtype=float)

    @cached_property
    def k_vec(self) -> np.ndarray:
        return np.asarray([self.k[e] for e in self.graph.edge_list()], dtype=float)

    def require_valid(self):
        problems = validate_model(self)
        if problems:
            raise ShapeError("; ".join(problems))

    def with_params(
        self,
        h=None,
        k=None,
        gamma=None,
        kappa=None,
    ) -> "ChainGraphModel":
        """Copy with some parameter blocks replaced (kappa=() drops it)."""
        new_kappa = self.kappa if kappa is None else (tuple(kappa) or None)
        return ChainGraphModel(
            graph=self.graph,
            h=tuple(h) if h is not None else self.h,
            k=dict(k) if k is not None else self.k,
            gamma=tuple(gamma) if gamma is not None else self.gamma,
            treatment_mode=self.treatment_mode,
            kappa=new_kappa,
        )


def validate_model(model: ChainGraphModel) -> list[str]:
    """All invariant violations of the model, as human-readable strings.

    An empty list means the model is well-formed. Violations are data,
    not exceptions, so callers can report all of them at once.
    """
    out = []
    n = model.graph.n
    if model.treatment_mode not in TREATMENT_MODES:
        out.append(f"unknown treatment_mode {model.treatment_mode!r}")
    if len(model.h) != n:
        out.append("h length mismatch")
    if len(model.gamma) != n:
        out.append("gamma length mismatch")
    if model.kappa is not None and len(model.kappa) != n:
        out.append("kappa length mismatch")
    edges = model.graph.edges
    for pair in sorted(model.k):
        if pair not in edges:
            out.append(f"k indexed by non-edge {pair!r}")
    for e in sorted(edges):
        if e not in model.k:
            out.append(f"k missing entry for edge {e!r}")
    for name, values in (("h", model.h), ("gamma", model.gamma)):
        if any(not math.isfinite(v) for v in values):
            out.append(f"non-finite value in {name}")
    if model.kappa is not None and any(
        not math.isfinite(v) for v in model.kappa
    ):
        out.append("non-finite value in kappa")
    if any(not math.isfinite(v) for v in model.k.values()):
        out.append("non-finite value in k")
    return out


def check_outcome(model: ChainGraphModel, y) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (model.n,):
        raise ShapeError(f"outcome vector has shape {y.shape}, expected ({model.n},)")
    if not np.all(np.abs(y) == 1):
        raise ShapeError("outcome entries must be -1 or +1")
    return y.astype(float)


def treatment_as_vector(model: ChainGraphModel, a) -> np.ndarray:
    """Broadcast a treatment to one value per node.

    Shared mode accepts a scalar in {0,1}; per-node mode a length-n
    binary vector.
    """
    if model.treatment_mode == SHARED:
        if np.ndim(a) != 0:
            raise ShapeError("shared treatment mode expects a scalar treatment")
        a = float(a)
        if a not in (0.0, 1.0):
            raise ShapeError("treatment must be 0 or 1")
        return np.full(model.n, a)
    a = np.asarray(a)
    if a.shape != (model.n,):
        raise ShapeError(
            f"per-node treatment has shape {a.shape}, expected ({model.n},)"
        )
    if not np.all((a == 0) | (a == 1)):
        raise ShapeError("treatment entries must be 0 or 1")
    return a.astype(float)


def check_covariates(model: ChainGraphModel, c) -> np.ndarray | None:
    if model.kappa is None:
        if c is not None:
            raise ConfigurationError(
                "covariate vector supplied but model has no kappa"
            )
        return None
    if c is None:
        raise ConfigurationError("model has kappa but no covariate vector given")
    c = np.asarray(c)
    if c.shape != (model.n,):
        raise ShapeError(
            f"covariate vector has shape {c.shape}, expected ({model.n},)"
        )
    if not np.all((c == 0) | (c == 1)):
        raise ShapeError("covariate entries must be 0 or 1")
    return c.astype(float)


def log_potential(model: ChainGraphModel, y, a, c=None) -> float:
    """Un-normalized log density of one outcome configuration.

    Σ_i h_i y_i + Σ_edges k_ij y_i y_j + Σ_i gamma_i a_i y_i
    + Σ_i kappa_i c_i y_i, with the covariate term dropped when the
    model has no kappa.
    """
    model.require_valid()
    yv = check_outcome(model, y)
    av = treatment_as_vector(model, a)
    cv = check_covariates(model, c)
    total = float(model.h_vec @ yv + (model.gamma_vec * av) @ yv)
    pairs = model.graph.edge_index_pairs()
    if pairs:
        ii, jj = zip(*pairs)
        total += float(model.k_vec @ (yv[list(ii)] * yv[list(jj)]))
    if cv is not None:
        total += float((model.kappa_vec * cv) @ yv)
    return total


def node_fields(model: ChainGraphModel, a, c=None) -> np.ndarray:
    """Per-node linear field h_i + gamma_i a_i (+ kappa_i c_i).

    The outcome-independent part of each node's contribution; the
    remaining interaction part depends on the other outcomes.
    """
    av = treatment_as_vector(model, a)
    cv = check_covariates(model, c)
    fields = model.h_vec + model.gamma_vec * av
    if cv is not None:
        fields = fields + model.kappa_vec * cv
    return fields


def model_to_dict(model: ChainGraphModel) -> dict:
    labels = model.graph.node_labels
    d = {
        "nodes": list(labels),
        "edges": [list(e) for e in model.graph.edge_list()],
        "h": {lab: model.h[i] for i, lab in enumerate(labels)},
        "gamma": {lab: model.gamma[i] for i, lab in enumerate(labels)},
        "k": {f"{u}|{v}": w for (u, v), w in sorted(model.k.items())},
        "treatment_mode": model.treatment_mode,
    }
    if model.kappa is not None:
        d["kappa"] = {lab: model.kappa[i] for i, lab in enumerate(labels)}
    return d


def model_from_dict(d: dict) -> ChainGraphModel:
    labels = tuple(d["nodes"])
    graph = NetworkGraph(labels, frozenset(tuple(e) for e in d["edges"]))
    k = {}
    for key, w in d["k"].items():
        u, _, v = key.partition("|")
        k[(u, v)] = w
    kappa = None
    if "kappa" in d:
        kappa = tuple(d["kappa"][lab] for lab in labels)
    return ChainGraphModel(
        graph=graph,
        h=tuple(d["h"][lab] for lab in labels),
        k=k,
        gamma=tuple(d["gamma"][lab] for lab in labels),
        treatment_mode=d["treatment_mode"],
        kappa=kappa,
    )


def model_to_json(model: ChainGraphModel, fit_meta: dict | None = None) -> str:
    """Canonical JSON text; floats round-trip losslessly.

    ``fit_meta`` (penalties, iterations, converged flags) rides along
    but is ignored by the parser and excluded from the fingerprint.
    """
    d = model_to_dict(model)
    if fit_meta is not None:
        d["fit_meta"] = fit_meta
    return json.dumps(d, indent=2, sort_keys=True)


def model_from_json(text: str) -> ChainGraphModel:
    return model_from_dict(json.loads(text))


def model_fingerprint(model: ChainGraphModel) -> str:
    """Short content hash identifying the model in effect reports."""
    blob = json.dumps(model_to_dict(model), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]
