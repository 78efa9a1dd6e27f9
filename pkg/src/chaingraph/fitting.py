"""Structure learning, parameter fitting, bootstrap, and CI tests.

Node-conditional fits use the x2 logit convention (outcomes are +/-1),
so fitted coefficients estimate the joint model's h, k, gamma, kappa
directly. The L1 path is solved by an accelerated proximal method with
monotone restarts; smooth full-model fits (exact likelihood and
pseudo-likelihood) run under a bounded quasi-Newton optimizer with
analytic gradients and a stationarity check of the result. All
coefficients are capped at +/-20; a cap hit means separation and is
reported as a warning, not hidden.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit
from scipy.stats import chi2

from .data import CaseDataset
from .errors import (
    ConfigurationError,
    DegenerateDataError,
    DegenerateNodeWarning,
    FitConvergenceError,
    BootstrapFailureError,
    SeparationWarning,
    ShapeError,
)
from .graph import NetworkGraph, canonical_edge
from .inference import (
    RISK_DIFFERENCE,
    CovariateLaw,
    EffectEstimate,
    EventPredicate,
    _check_limit,
    causal_effect,
    contrast_on_scale,
    counterfactual_event_prob,
    resolve_scale,
    stratum_log_z_and_moments,
)
from .model import PER_NODE, SHARED, ChainGraphModel
from .runtime import parallel_map, replicate_seed

COEF_CAP = 20.0
NONZERO_EPS = 1e-6
EBIC_GAMMA = 0.5
GRAD_TOL = 1e-6
AND_RULE = "AND"
OR_RULE = "OR"


@dataclass(frozen=True)
class NodewiseFit:
    """One node's penalized conditional logistic fit."""

    node: str
    intercept: float
    neighbor_coeffs: dict[str, float]
    treatment_coeff: float
    covariate_coeff: float | None
    penalty: float
    objective: float = math.nan
    iterations: int = 0
    converged: bool = True

    def selected_neighbors(self, eps: float = NONZERO_EPS) -> frozenset[str]:
        return frozenset(
            lab for lab, w in self.neighbor_coeffs.items() if abs(w) > eps
        )


@dataclass(frozen=True)
class StructureResult:
    """Learned edge set with the per-node selection evidence."""

    selected_edges: frozenset[tuple[str, str]]
    neighborhoods: dict[str, frozenset[str]]
    penalties: dict[str, float]
    rule: str
    ebic: dict[str, float] = field(default_factory=dict)
    excluded_nodes: tuple[str, ...] = ()

    def as_graph(self, node_labels) -> NetworkGraph:
        return NetworkGraph(tuple(node_labels), self.selected_edges)


@dataclass(frozen=True)
class BootstrapSpec:
    """Resampling plan for effect uncertainty."""

    nb: int = 500
    seed: int = 0
    estimand: str = ""
    refit_structure: bool = False

    def __post_init__(self):
        if self.nb < 2:
            raise ConfigurationError("bootstrap needs nb >= 2 replicates")


@dataclass(frozen=True)
class EffectQuery:
    """What bootstrap_effect estimates: contrast, event, scale, fitter."""

    a1: object
    a0: object
    event: EventPredicate
    scale: str = RISK_DIFFERENCE
    method: str = "mle"

    def __post_init__(self):
        object.__setattr__(self, "scale", resolve_scale(self.scale))
        if self.method not in ("mle", "pseudo"):
            raise ConfigurationError("method must be 'mle' or 'pseudo'")


def _treatment_column(data: CaseDataset, node_index: int) -> np.ndarray:
    if data.treatment_mode == SHARED:
        return data.a.astype(float)
    return data.a[:, node_index].astype(float)


def _node_design(data: CaseDataset, node: str):
    """Design matrix for one node's conditional: intercept, other
    outcomes, own treatment, own covariate. Returns (t, X, penalty
    mask, neighbor labels)."""
    i = data.graph.index(node)
    t = data.y[:, i].astype(float)
    if np.all(t == t[0]):
        raise DegenerateDataError(
            f"node {node!r} has a single outcome class; its conditional "
            f"cannot be fit"
        )
    labels = data.graph.node_labels
    others = [j for j in range(data.n_nodes) if j != i]
    cols = [np.ones(data.n_cases), data.y[:, others].astype(float)]
    cols.append(_treatment_column(data, i)[:, None])
    if data.c is not None:
        cols.append(data.c[:, i].astype(float)[:, None])
    X = np.column_stack(
        [c if c.ndim == 2 else c[:, None] for c in cols]
    )
    penalized = np.zeros(X.shape[1], dtype=bool)
    penalized[1 : 1 + len(others)] = True
    return t, X, penalized, [labels[j] for j in others]


def _power_lipschitz(Z: np.ndarray) -> float:
    """Upper bound on the logistic loss curvature: lambda_max(Z'Z) / 4."""
    v = np.ones(Z.shape[1]) / math.sqrt(Z.shape[1])
    lam = 1.0
    for _ in range(20):
        w = Z.T @ (Z @ v)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.25
        v = w / lam
    return max(0.25 * lam * 1.01, 1e-8)


def _prox(beta: np.ndarray, thresh: float, penalized: np.ndarray) -> np.ndarray:
    out = beta.copy()
    shrunk = np.sign(beta) * np.maximum(np.abs(beta) - thresh, 0.0)
    out[penalized] = shrunk[penalized]
    return np.clip(out, -COEF_CAP, COEF_CAP)


def _penalized_objective(Z, beta, l1, penalized, offset=0.0) -> float:
    loss = float(np.logaddexp(0.0, -(Z @ beta + offset)).sum())
    return loss + l1 * float(np.abs(beta[penalized]).sum())


def _monotone_sign(col: np.ndarray) -> int:
    """Sign of a margin column that never changes sign, else 0.

    The logistic loss is strictly monotone in such a column's
    coefficient, so no finite optimum exists and the box-constrained
    optimum sits exactly at the cap (quasi-complete separation)."""
    if np.all(col >= 0.0) and np.any(col > 0.0):
        return 1
    if np.all(col <= 0.0) and np.any(col < 0.0):
        return -1
    return 0


def _fista(
    Z: np.ndarray,
    l1: float,
    penalized: np.ndarray,
    beta0: np.ndarray | None = None,
    max_iter: int = 20000,
    obj_tol: float = 1e-8,
    step_tol: float = 1e-6,
    offset=0.0,
):
    """Minimize sum softplus(-(Z beta + offset)) + l1 * |beta[penalized]|_1
    in the box [-cap, cap], by accelerated proximal descent with monotone
    restarts. Returns (beta, iterations, converged, objective)."""
    d = Z.shape[1]
    if d == 0:
        f0 = _penalized_objective(Z, np.empty(0), l1, penalized, offset)
        return np.empty(0), 0, True, f0
    L = _power_lipschitz(Z)
    beta = np.zeros(d) if beta0 is None else np.clip(beta0, -COEF_CAP, COEF_CAP)
    f_best = _penalized_objective(Z, beta, l1, penalized, offset)
    z = beta.copy()
    tk = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = Z.T @ (-expit(-(Z @ z + offset)))
        cand = _prox(z - g / L, l1 / L, penalized)
        f_cand = _penalized_objective(Z, cand, l1, penalized, offset)
        if f_cand > f_best:
            # momentum overshot: restart from the best point
            z = beta.copy()
            tk = 1.0
            g = Z.T @ (-expit(-(Z @ z + offset)))
            cand = _prox(z - g / L, l1 / L, penalized)
            f_cand = _penalized_objective(Z, cand, l1, penalized, offset)
        step = float(np.max(np.abs(cand - beta)))
        drop = f_best - f_cand
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        z = cand + ((tk - 1.0) / t_next) * (cand - beta)
        z = np.clip(z, -COEF_CAP, COEF_CAP)
        tk = t_next
        beta = cand
        f_best = min(f_best, f_cand)
        if drop < obj_tol or step < step_tol:
            converged = True
            break
    return beta, it, converged, f_best


def node_logistic_fit(
    data: CaseDataset, node: str, l1_penalty: float
) -> NodewiseFit:
    """Penalized conditional logistic fit of one node on all others.

    Maximizes sum log sigmoid(2 t eta) - penalty * |neighbor coeffs|_1
    with intercept, treatment, and covariate coefficients unpenalized.
    Separation caps coefficients at +/-20 with a warning.
    """
    if l1_penalty < 0:
        raise ConfigurationError("l1 penalty must be nonnegative")
    t, X, penalized, nbr_labels = _node_design(data, node)
    Z = 2.0 * t[:, None] * X
    # columns with one-signed margins have no finite optimum; pin them
    # at the cap and fit the rest around that offset. Penalized columns
    # keep a finite optimum whenever the penalty is positive.
    flags = np.array(
        [
            0 if (penalized[j] and l1_penalty > 0) else _monotone_sign(Z[:, j])
            for j in range(Z.shape[1])
        ],
        dtype=int,
    )
    if np.any(flags != 0):
        pinned = flags != 0
        pin_vals = COEF_CAP * flags[pinned].astype(float)
        offset = Z[:, pinned] @ pin_vals
        free_beta, iters, converged, obj = _fista(
            Z[:, ~pinned], l1_penalty, penalized[~pinned], offset=offset
        )
        beta = np.zeros(Z.shape[1])
        beta[pinned] = pin_vals
        beta[~pinned] = free_beta
    else:
        beta, iters, converged, obj = _fista(Z, l1_penalty, penalized)
    if np.any(flags != 0) or np.any(np.abs(beta) >= COEF_CAP - 1e-9):
        warnings.warn(
            f"node {node!r}: separation detected; coefficients capped at "
            f"+/-{COEF_CAP:g}",
            SeparationWarning,
            stacklevel=2,
        )
    nbr = dict(zip(nbr_labels, beta[1 : 1 + len(nbr_labels)]))
    pos = 1 + len(nbr_labels)
    cov = float(beta[pos + 1]) if data.c is not None else None
    return NodewiseFit(
        node=node,
        intercept=float(beta[0]),
        neighbor_coeffs={k: float(v) for k, v in nbr.items()},
        treatment_coeff=float(beta[pos]),
        covariate_coeff=cov,
        penalty=float(l1_penalty),
        objective=-obj,
        iterations=iters,
        converged=converged,
    )


def default_penalty_grid(data: CaseDataset, size: int = 12) -> list[float]:
    """Geometric grid from the no-neighbor threshold down two decades.

    The top value is the largest neighbor-column gradient once each
    node's unpenalized columns are fit alone, which is the smallest
    penalty whose solution has every neighborhood empty. The raw
    cross-moment bound can sit a hair below that once intercepts move,
    leaving phantom sub-threshold coefficients in the selection.
    """
    lam_max = 0.0
    for node in data.graph.node_labels:
        try:
            t, X, penalized, _ = _node_design(data, node)
        except DegenerateDataError:
            continue
        Z = 2.0 * t[:, None] * X
        free = Z[:, ~penalized]
        beta, _, _, _ = _fista(free, 0.0, np.zeros(free.shape[1], dtype=bool))
        grad = Z[:, penalized].T @ (-expit(-(free @ beta)))
        if grad.size:
            lam_max = max(lam_max, float(np.max(np.abs(grad))))
    if lam_max <= 0:
        lam_max = 1.0
    return [float(v) for v in np.geomspace(lam_max, lam_max / 100.0, size)]


def learn_structure(
    data: CaseDataset,
    penalty_grid,
    rule: str = AND_RULE,
) -> StructureResult:
    """Select each node's neighborhood by extended BIC over the grid,
    then symmetrize into an edge set (AND: both endpoints agree).

    Degenerate (single-class) nodes are excluded with a warning and get
    empty neighborhoods.
    """
    if rule not in (AND_RULE, OR_RULE):
        raise ConfigurationError(f"rule must be {AND_RULE!r} or {OR_RULE!r}")
    grid = sorted({float(v) for v in penalty_grid}, reverse=True)
    if not grid:
        raise ConfigurationError("penalty grid is empty")
    if grid[-1] < 0:
        raise ConfigurationError("penalties must be nonnegative")
    labels = data.graph.node_labels
    m = data.n_cases
    p_cand = max(data.n_nodes - 1, 1)
    neighborhoods: dict[str, frozenset[str]] = {}
    penalties: dict[str, float] = {}
    ebic_best: dict[str, float] = {}
    excluded = []
    for node in labels:
        try:
            t, X, penalized, nbr_labels = _node_design(data, node)
        except DegenerateDataError:
            warnings.warn(
                f"node {node!r} excluded from structure learning "
                f"(single outcome class)",
                DegenerateNodeWarning,
                stacklevel=2,
            )
            excluded.append(node)
            neighborhoods[node] = frozenset()
            penalties[node] = math.nan
            ebic_best[node] = math.nan
            continue
        Z = 2.0 * t[:, None] * X
        warm = None
        best = None
        for lam in grid:
            beta, _, _, _ = _fista(Z, lam, penalized, beta0=warm)
            warm = beta
            loglik = -float(np.logaddexp(0.0, -(Z @ beta)).sum())
            nbr_beta = beta[1 : 1 + len(nbr_labels)]
            df = int(np.sum(np.abs(nbr_beta) > NONZERO_EPS))
            score = (
                -2.0 * loglik
                + df * math.log(m)
                + 2.0 * EBIC_GAMMA * df * math.log(p_cand)
            )
            # tolerance absorbs warm-start polish noise so equivalent
            # penalties resolve to the most conservative (largest) one
            if best is None or score < best[0] - 1e-6:
                best = (score, lam, nbr_beta.copy())
        score, lam, nbr_beta = best
        neighborhoods[node] = frozenset(
            lab
            for lab, w in zip(nbr_labels, nbr_beta)
            if abs(w) > NONZERO_EPS
        )
        penalties[node] = lam
        ebic_best[node] = score
    edges = set()
    for i, u in enumerate(labels):
        for v in labels[i + 1 :]:
            in_u = v in neighborhoods[u]
            in_v = u in neighborhoods[v]
            if (rule == AND_RULE and in_u and in_v) or (
                rule == OR_RULE and (in_u or in_v)
            ):
                edges.add(canonical_edge(u, v))
    return StructureResult(
        selected_edges=frozenset(edges),
        neighborhoods=neighborhoods,
        penalties=penalties,
        rule=rule,
        ebic=ebic_best,
        excluded_nodes=tuple(excluded),
    )


def _check_fit_inputs(data: CaseDataset, graph: NetworkGraph, mode):
    if tuple(graph.node_labels) != tuple(data.graph.node_labels):
        raise ShapeError(
            "fit graph labels must match the dataset's node labels in order"
        )
    if mode is not None and mode != data.treatment_mode:
        raise ConfigurationError(
            f"requested mode {mode!r} but data is {data.treatment_mode!r}"
        )
    return data.treatment_mode


def _strata(data: CaseDataset):
    """Distinct (a, c) contexts with weights: (a_s, c_s or None, w)."""
    A = data.treatment_matrix().astype(float)
    if data.c is not None:
        key = np.column_stack([A, data.c.astype(float)])
    else:
        key = A
    uniq, counts = np.unique(key, axis=0, return_counts=True)
    n = data.n_nodes
    a_s = uniq[:, :n]
    c_s = uniq[:, n:] if data.c is not None else None
    w = counts / counts.sum()
    return a_s, c_s, w


def _suff_means(data: CaseDataset, pairs):
    Y = data.y.astype(float)
    A = data.treatment_matrix().astype(float)
    ybar = Y.mean(axis=0)
    if pairs:
        ii, jj = (np.asarray(v, dtype=np.int64) for v in zip(*pairs))
        yybar = (Y[:, ii] * Y[:, jj]).mean(axis=0)
    else:
        ii = jj = np.empty(0, dtype=np.int64)
        yybar = np.empty(0)
    aybar = (A * Y).mean(axis=0)
    cybar = (data.c.astype(float) * Y).mean(axis=0) if data.c is not None else None
    return ybar, yybar, aybar, cybar, ii, jj


def _projected_grad_norm(x, g, cap=COEF_CAP) -> float:
    pg = g.copy()
    at_lo = x <= -cap + 1e-12
    at_hi = x >= cap - 1e-12
    pg[at_lo] = np.minimum(g[at_lo], 0.0)
    pg[at_hi] = np.maximum(g[at_hi], 0.0)
    return float(np.max(np.abs(pg))) if len(pg) else 0.0


def _run_smooth_fit(fun, d, what: str, info: dict | None, pins=None):
    x0 = np.zeros(d)
    bounds = [(-COEF_CAP, COEF_CAP)] * d
    if pins is not None:
        # coordinates with monotone loss are fixed at the cap; the loss
        # gradient there points outward, so stationarity still holds
        for idx in np.nonzero(pins)[0]:
            v = float(COEF_CAP * pins[idx])
            bounds[idx] = (v, v)
            x0[idx] = v
    options = {"maxiter": 5000, "maxfun": 20000, "ftol": 1e-14, "gtol": 1e-9}
    total_iters = 0
    # restarts reset the limited-memory Hessian, which unsticks the
    # line search on the flat ridges strong couplings produce
    for _ in range(5):
        res = minimize(
            fun, x0, jac=True, method="L-BFGS-B", bounds=bounds, options=options
        )
        total_iters += int(res.nit)
        _, g = fun(res.x)
        pg_norm = _projected_grad_norm(res.x, g)
        if pg_norm < GRAD_TOL:
            break
        x0 = res.x
    if pg_norm >= GRAD_TOL:
        raise FitConvergenceError(
            f"{what} did not reach stationarity: projected gradient "
            f"max-norm {pg_norm:.3g} >= {GRAD_TOL:g}"
        )
    if np.any(np.abs(res.x) >= COEF_CAP - 1e-9):
        warnings.warn(
            f"{what}: separation detected; parameters capped at +/-{COEF_CAP:g}",
            SeparationWarning,
            stacklevel=3,
        )
    if info is not None:
        info.update(
            iterations=total_iters,
            converged=True,
            objective=float(-res.fun),
            grad_norm=pg_norm,
        )
    return res.x


def _unpack(theta, n, n_edges, with_kappa):
    h = theta[:n]
    k = theta[n : n + n_edges]
    gamma = theta[n + n_edges : 2 * n + n_edges]
    kappa = theta[2 * n + n_edges :] if with_kappa else None
    return h, k, gamma, kappa


def _mle_objective(data: CaseDataset, graph: NetworkGraph, limit: int | None = None):
    """Mean negative log-likelihood with its analytic gradient.

    Returns (fun, dim) where fun(theta) -> (value, grad). Exposed
    separately from the optimizer so the gradient can be checked
    against finite differences.
    """
    _check_limit(graph.n, limit)
    pairs = graph.edge_index_pairs()
    n, n_edges = graph.n, len(pairs)
    with_kappa = data.c is not None
    ybar, yybar, aybar, cybar, ii, jj = _suff_means(data, pairs)
    a_s, c_s, w = _strata(data)

    def fun(theta):
        h, k, gamma, kappa = _unpack(theta, n, n_edges, with_kappa)
        fields = h[None, :] + gamma[None, :] * a_s
        if with_kappa:
            fields = fields + kappa[None, :] * c_s
        log_z, first, second = stratum_log_z_and_moments(n, ii, jj, k, fields)
        data_part = float(h @ ybar + k @ yybar + gamma @ aybar)
        if with_kappa:
            data_part += float(kappa @ cybar)
        value = float(w @ log_z) - data_part
        gh = w @ first - ybar
        gk = w @ second - yybar
        ggamma = ((w[:, None] * a_s) * first).sum(axis=0) - aybar
        parts = [gh, gk, ggamma]
        if with_kappa:
            parts.append(((w[:, None] * c_s) * first).sum(axis=0) - cybar)
        return value, np.concatenate(parts)

    return fun, 2 * n + n_edges + (n if with_kappa else 0)


def fit_exact_mle(
    data: CaseDataset,
    graph: NetworkGraph,
    mode: str | None = None,
    limit: int | None = None,
    info: dict | None = None,
) -> ChainGraphModel:
    """Maximum likelihood for the joint model on a fixed graph.

    The mean log-likelihood gradient is the empirical mean of each
    sufficient statistic minus its model expectation, computed exactly
    per distinct (a, c) context by enumeration. Deterministic (zero
    initialization, no randomness); the returned point is checked to
    have projected-gradient max-norm below 1e-6.
    """
    mode = _check_fit_inputs(data, graph, mode)
    pairs = graph.edge_index_pairs()
    n, n_edges = graph.n, len(pairs)
    with_kappa = data.c is not None
    fun, d = _mle_objective(data, graph, limit)
    theta = _run_smooth_fit(fun, d, "exact likelihood fit", info)
    h, k, gamma, kappa = _unpack(theta, n, n_edges, with_kappa)
    return ChainGraphModel(
        graph=graph,
        h=tuple(h),
        k={e: float(v) for e, v in zip(graph.edge_list(), k)},
        gamma=tuple(gamma),
        treatment_mode=mode,
        kappa=tuple(kappa) if with_kappa else None,
    )


def _pseudo_flags(data: CaseDataset, pairs, with_kappa: bool) -> np.ndarray:
    """Monotone-margin signs for every pseudo-likelihood coordinate.

    Each coordinate's stacked margin column is sign-tested the same way
    as a single node regression; a coupling's two node blocks carry
    identical products, so one test covers both."""
    Y = data.y.astype(float)
    A = data.treatment_matrix().astype(float)
    cols = [Y[:, i] for i in range(data.n_nodes)]
    cols += [Y[:, i] * Y[:, j] for i, j in pairs]
    cols += [Y[:, i] * A[:, i] for i in range(data.n_nodes)]
    if with_kappa:
        C = data.c.astype(float)
        cols += [Y[:, i] * C[:, i] for i in range(data.n_nodes)]
    return np.array([_monotone_sign(z) for z in cols], dtype=int)


def fit_pseudolikelihood(
    data: CaseDataset,
    graph: NetworkGraph,
    mode: str | None = None,
    info: dict | None = None,
) -> ChainGraphModel:
    """Joint pseudo-likelihood fit: sum of node-conditional likelihoods
    with each k_ij shared symmetrically by its two conditionals.

    No enumeration involved, so any graph size works. Same convergence
    contract and coefficient cap as the exact fit; separation pins the
    affected coordinates at the cap with a warning.
    """
    mode = _check_fit_inputs(data, graph, mode)
    pairs = graph.edge_index_pairs()
    n, n_edges = graph.n, len(pairs)
    with_kappa = data.c is not None
    Y = data.y.astype(float)
    A = data.treatment_matrix().astype(float)
    C = data.c.astype(float) if with_kappa else None
    m = data.n_cases
    if pairs:
        ii, jj = (np.asarray(v, dtype=np.int64) for v in zip(*pairs))
    else:
        ii = jj = np.empty(0, dtype=np.int64)

    def fun(theta):
        h, k, gamma, kappa = _unpack(theta, n, n_edges, with_kappa)
        kmat = np.zeros((n, n))
        kmat[ii, jj] = k
        kmat[jj, ii] = k
        eta = h[None, :] + Y @ kmat + gamma[None, :] * A
        if with_kappa:
            eta = eta + kappa[None, :] * C
        u = 2.0 * Y * eta
        value = float(np.logaddexp(0.0, -u).sum()) / m
        G = (-2.0 * Y * expit(-u)) / m
        gh = G.sum(axis=0)
        gk = (
            (G[:, ii] * Y[:, jj] + G[:, jj] * Y[:, ii]).sum(axis=0)
            if n_edges
            else np.empty(0)
        )
        ggamma = (G * A).sum(axis=0)
        parts = [gh, gk, ggamma]
        if with_kappa:
            parts.append((G * C).sum(axis=0))
        return value, np.concatenate(parts)

    d = 2 * n + n_edges + (n if with_kappa else 0)
    pins = _pseudo_flags(data, pairs, with_kappa)
    theta = _run_smooth_fit(fun, d, "pseudo-likelihood fit", info, pins=pins)
    h, k, gamma, kappa = _unpack(theta, n, n_edges, with_kappa)
    return ChainGraphModel(
        graph=graph,
        h=tuple(h),
        k={e: float(v) for e, v in zip(graph.edge_list(), k)},
        gamma=tuple(gamma),
        treatment_mode=mode,
        kappa=tuple(kappa) if with_kappa else None,
    )


def _fit_by_method(data, graph, method, limit):
    if method == "mle":
        return fit_exact_mle(data, graph, limit=limit)
    return fit_pseudolikelihood(data, graph)


def effect_arms(
    data: CaseDataset,
    graph: NetworkGraph,
    query: EffectQuery,
    limit: int | None = None,
) -> tuple[float, float]:
    """Fit on the data and return the two counterfactual arm
    probabilities (P under a1, P under a0); covariates, when present,
    are marginalized over their empirical law."""
    model = _fit_by_method(data, graph, query.method, limit)
    law = CovariateLaw.from_observations(data.c) if data.c is not None else None
    p1 = counterfactual_event_prob(model, query.a1, query.event, law, limit)
    p0 = counterfactual_event_prob(model, query.a0, query.event, law, limit)
    return p1, p0


def effect_on_data(
    data: CaseDataset,
    graph: NetworkGraph,
    query: EffectQuery,
    limit: int | None = None,
) -> EffectEstimate:
    """Fit on the data and evaluate the query's contrast; covariates,
    when present, are marginalized over their empirical law."""
    model = _fit_by_method(data, graph, query.method, limit)
    law = CovariateLaw.from_observations(data.c) if data.c is not None else None
    return causal_effect(
        model, query.a1, query.a0, query.event, query.scale, law, limit
    )


def bootstrap_effect(
    data: CaseDataset,
    graph: NetworkGraph,
    query: EffectQuery,
    spec: BootstrapSpec,
    penalty_grid=None,
    rule: str = AND_RULE,
    threads: int = 1,
    limit: int | None = None,
    arms: dict | None = None,
) -> EffectEstimate:
    """Case-resampling bootstrap around the full-data effect estimate.

    Each replicate resamples cases with replacement (deterministic
    per-replicate streams from ``spec.seed``), optionally relearns the
    structure, refits, and recomputes the effect. SE is the replicate
    standard deviation; the CI is the 2.5/97.5 percentile range.
    Non-converging replicates are dropped; more than 10% dropped is an
    error. When ``arms`` is a dict it receives point/se/ci summaries of
    the two counterfactual arm probabilities from the same replicates.
    """
    full_model = _fit_by_method(data, graph, query.method, limit)
    full_law = (
        CovariateLaw.from_observations(data.c) if data.c is not None else None
    )
    full_p1 = counterfactual_event_prob(
        full_model, query.a1, query.event, full_law, limit
    )
    full_p0 = counterfactual_event_prob(
        full_model, query.a0, query.event, full_law, limit
    )
    point = causal_effect(
        full_model, query.a1, query.a0, query.event, query.scale, full_law, limit
    )
    m = data.n_cases
    labels = data.graph.node_labels

    def one(r):
        rng = np.random.default_rng(replicate_seed(spec.seed, r))
        sub = data.subset(rng.integers(0, m, size=m))
        try:
            if spec.refit_structure:
                grid = (
                    penalty_grid
                    if penalty_grid is not None
                    else default_penalty_grid(sub)
                )
                structure = learn_structure(sub, grid, rule)
                g = structure.as_graph(labels)
            else:
                g = graph
            p1, p0 = effect_arms(sub, g, query, limit)
            return p1, p0, contrast_on_scale(query.scale, p1, p0)
        except (FitConvergenceError, DegenerateDataError, ValueError):
            return None

    # catch_warnings is not thread-safe, so replicate noise is muted
    # here rather than inside the (possibly threaded) workers
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        warnings.simplefilter("ignore", DegenerateNodeWarning)
        draws = parallel_map(one, range(spec.nb), threads)
    kept = np.asarray([d for d in draws if d is not None], dtype=float)
    dropped = spec.nb - len(kept)
    if dropped > 0.1 * spec.nb:
        raise BootstrapFailureError(
            f"{dropped} of {spec.nb} bootstrap replicates failed to converge"
        )

    def summary(col, center):
        vals = kept[:, col]
        lo, hi = (float(v) for v in np.percentile(vals, [2.5, 97.5]))
        return {
            "point": float(center),
            "se": float(vals.std(ddof=1)),
            "ci_low": min(lo, float(center)),
            "ci_high": max(hi, float(center)),
        }

    if arms is not None:
        arms["p1"] = summary(0, full_p1)
        arms["p0"] = summary(1, full_p0)
        arms["replicates_kept"] = int(len(kept))
        arms["replicates_dropped"] = int(dropped)
    se = float(kept[:, 2].std(ddof=1))
    lo, hi = (float(v) for v in np.percentile(kept[:, 2], [2.5, 97.5]))
    return point.with_uncertainty(se, lo, hi)


def _newton_logistic(Z: np.ndarray, ridge: float = 0.0):
    """Maximize sum log sigmoid(Z beta) - ridge/2 |beta|^2 by Newton
    steps with halving. Returns (loglik, beta, converged)."""
    m, d = Z.shape
    beta = np.zeros(d)

    def loglik(b):
        return -float(np.logaddexp(0.0, -(Z @ b)).sum()) - 0.5 * ridge * float(
            b @ b
        )

    cur = loglik(beta)
    for _ in range(100):
        u = Z @ beta
        g = Z.T @ expit(-u) - ridge * beta
        if float(np.max(np.abs(g))) < 1e-10:
            return cur, beta, True
        wts = expit(u) * expit(-u)
        H = (Z * wts[:, None]).T @ Z + ridge * np.eye(d)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            return cur, beta, False
        scale_f = 1.0
        for _ in range(50):
            nxt = beta + scale_f * step
            val = loglik(nxt)
            if val >= cur - 1e-12:
                beta, cur = nxt, val
                break
            scale_f *= 0.5
        else:
            return cur, beta, False
        if float(np.max(np.abs(beta))) > 1e3:
            return cur, beta, False
    return cur, beta, False


def _resolve_column(data: CaseDataset, name: str) -> np.ndarray:
    labels = data.graph.node_labels
    if name == "a":
        if data.treatment_mode != SHARED:
            raise ConfigurationError(
                "column 'a' exists only in shared treatment mode"
            )
        return data.a.astype(float)
    for prefix, source in (("y_", "y"), ("a_", "a"), ("c_", "c")):
        if name.startswith(prefix):
            lab = name[len(prefix) :]
            if lab not in labels:
                raise ConfigurationError(f"unknown node label in column {name!r}")
            j = data.graph.index(lab)
            if source == "y":
                return data.y[:, j].astype(float)
            if source == "a":
                if data.treatment_mode != PER_NODE:
                    raise ConfigurationError(
                        "per-node treatment columns need per_node mode"
                    )
                return data.a[:, j].astype(float)
            if data.c is None:
                raise ConfigurationError("dataset has no covariates")
            return data.c[:, j].astype(float)
    raise ConfigurationError(
        f"unknown column {name!r}; use y_<label>, a, a_<label>, or c_<label>"
    )


def likelihood_ratio_ci_test(
    data: CaseDataset,
    target: str,
    probe: str,
    conditioning=(),
) -> float:
    """p-value for target-node/probe-node conditional independence.

    Two logistic fits of the target's outcome, with and without the
    probe's outcome, on the named conditioning columns; twice the
    log-likelihood gap is referred to chi-square(1). Separation in
    either fit triggers a ridge (1e-4) refit of both, with a warning.
    """
    if target == probe:
        raise ConfigurationError("target and probe must differ")
    i = data.graph.index(target)
    t = data.y[:, i].astype(float)
    if np.all(t == t[0]):
        raise DegenerateDataError(
            f"target node {target!r} has a single outcome class"
        )
    cols = [np.ones(data.n_cases)]
    for name in conditioning:
        cols.append(_resolve_column(data, name))
    base = np.column_stack(cols)
    probe_col = data.y[:, data.graph.index(probe)].astype(float)
    full = np.column_stack([base, probe_col])
    z0 = 2.0 * t[:, None] * base
    z1 = 2.0 * t[:, None] * full
    ll0, b0, ok0 = _newton_logistic(z0)
    ll1, b1, ok1 = _newton_logistic(z1)
    big = max(
        float(np.max(np.abs(b0))), float(np.max(np.abs(b1)))
    )
    # one-signed margin columns mean no finite optimum exists, however
    # tame the fitted coefficients look
    separated = any(
        _monotone_sign(z[:, j]) for z in (z0, z1) for j in range(z.shape[1])
    )
    if separated or not (ok0 and ok1) or big > 30.0:
        warnings.warn(
            f"separation in CI test ({target!r} vs {probe!r}); "
            f"refitting both models with ridge 1e-4",
            SeparationWarning,
            stacklevel=2,
        )
        ll0, _, _ = _newton_logistic(z0, ridge=1e-4)
        ll1, _, _ = _newton_logistic(z1, ridge=1e-4)
    stat = max(0.0, 2.0 * (ll1 - ll0))
    return float(chi2.sf(stat, df=1))


def f1_edges(true_edges, predicted_edges) -> float:
    """Edge-recovery F1. Both sets empty scores 1.0 (nothing missed)."""
    t = {canonical_edge(u, v) for u, v in true_edges}
    p = {canonical_edge(u, v) for u, v in predicted_edges}
    if not t and not p:
        return 1.0
    tp = len(t & p)
    if tp == 0:
        return 0.0
    precision = tp / len(p)
    recall = tp / len(t)
    return 2.0 * precision * recall / (precision + recall)
