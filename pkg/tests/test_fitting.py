"""Structure learning, likelihood fits, bootstrap, and the CI test."""

import itertools
import warnings

import numpy as np
import pytest
from scipy.stats import kstest

from chaingraph import (
    BootstrapFailureError,
    BootstrapSpec,
    CaseDataset,
    ChainGraphModel,
    ConfigurationError,
    CovariateLaw,
    DegenerateDataError,
    DegenerateNodeWarning,
    EffectQuery,
    EventPredicate,
    NetworkGraph,
    SeparationWarning,
    SimulationScaling,
    apply_scaling,
    bootstrap_effect,
    contrast_on_scale,
    counterfactual_event_prob,
    default_penalty_grid,
    f1_edges,
    fit_exact_mle,
    fit_pseudolikelihood,
    generate_dataset,
    learn_structure,
    likelihood_ratio_ci_test,
    log_partition,
    log_potential,
    node_logistic_fit,
)
from chaingraph.runtime import replicate_seed
from chaingraph.scdb import JUDICIAL_POWER_EDGES, REHNQUIST_PANEL


def judicial_graph():
    return NetworkGraph(REHNQUIST_PANEL.labels, JUDICIAL_POWER_EDGES)


def coin_dataset(m, n=4, seed=0, shared=True):
    rng = np.random.default_rng(seed)
    labels = tuple(f"n{i}" for i in range(n))
    g = NetworkGraph(labels, [])
    return CaseDataset(
        graph=g,
        treatment_mode="shared" if shared else "per_node",
        y=rng.choice([-1, 1], size=(m, n)),
        a=rng.integers(0, 2, size=m if shared else (m, n)),
    )


def chain_data(n_obs, k=0.5, seed=0, sweeps=400, n=3):
    labels = tuple("xyz"[i] for i in range(n))
    g = NetworkGraph(labels, [(labels[i], labels[i + 1]) for i in range(n - 1)])
    base = ChainGraphModel(
        g, h=(0.0,) * n, k={e: k for e in g.edge_list()}, gamma=(0.0,) * n
    )
    sc = SimulationScaling(gamma_value=0.0, kappa_value=0.0)
    d = generate_dataset(base, sc, n_obs, seed=seed, sweeps=sweeps)
    return g, CaseDataset(graph=g, treatment_mode="per_node", y=d.y, a=d.a)


def param_vector(model):
    parts = [model.h_vec, model.k_vec, model.gamma_vec]
    if model.kappa is not None:
        parts.append(model.kappa_vec)
    return np.concatenate(parts)


def mean_loglik(model, data):
    logz = {}
    total = 0.0
    for r in range(data.n_cases):
        a = data.a[r] if data.treatment_mode == "per_node" else int(data.a[r])
        c = None if data.c is None else data.c[r]
        key = (tuple(np.atleast_1d(a)), None if c is None else tuple(c))
        if key not in logz:
            logz[key] = log_partition(model, a, c)
        total += log_potential(model, data.y[r], a, c) - logz[key]
    return total / data.n_cases


def test_balanced_coin_design_has_no_neighbors():
    # every sign pattern equally often, so empirical cross-moments are
    # exactly zero and even a small penalty pins the neighbors at 0
    patterns = np.array(list(itertools.product((-1, 1), repeat=3)))
    y = np.tile(patterns, (25, 1))
    g = NetworkGraph(("p", "q", "r"), [])
    d = CaseDataset(
        graph=g, treatment_mode="shared", y=y, a=np.zeros(len(y), dtype=int)
    )
    for node in g.node_labels:
        fit = node_logistic_fit(d, node, 0.1)
        assert all(abs(w) < 1e-6 for w in fit.neighbor_coeffs.values())


def test_unpenalized_fit_recovers_chain_coefficients():
    g, d = chain_data(2000, k=0.5, seed=3)
    fit = node_logistic_fit(d, "y", 0.0)
    assert fit.neighbor_coeffs["x"] == pytest.approx(0.5, abs=0.15)
    assert fit.neighbor_coeffs["z"] == pytest.approx(0.5, abs=0.15)
    end = node_logistic_fit(d, "x", 0.0)
    assert end.neighbor_coeffs["y"] == pytest.approx(0.5, abs=0.15)
    assert end.neighbor_coeffs["z"] == pytest.approx(0.0, abs=0.15)


def test_fit_objective_beats_generating_parameters():
    g, d = chain_data(1500, k=0.5, seed=5)
    lam = 0.7
    fit = node_logistic_fit(d, "y", lam)

    def objective(intercept, coeffs, treat):
        t = d.y[:, 1].astype(float)
        eta = (
            intercept
            + coeffs[0] * d.y[:, 0]
            + coeffs[1] * d.y[:, 2]
            + treat * d.a[:, 1]
        )
        ll = -np.logaddexp(0.0, -2.0 * t * eta).sum()
        return ll - lam * (abs(coeffs[0]) + abs(coeffs[1]))

    at_truth = objective(0.0, (0.5, 0.5), 0.0)
    at_fit = objective(
        fit.intercept,
        (fit.neighbor_coeffs["x"], fit.neighbor_coeffs["z"]),
        fit.treatment_coeff,
    )
    assert fit.objective == pytest.approx(at_fit, abs=1e-6)
    assert at_fit >= at_truth - 1e-8


def test_perfect_separation_caps_with_warning():
    rng = np.random.default_rng(7)
    g = NetworkGraph(("u", "v"), [])
    y_u = rng.choice([-1, 1], size=400)
    d = CaseDataset(
        graph=g,
        treatment_mode="shared",
        y=np.column_stack([y_u, y_u]),
        a=np.zeros(400, dtype=int),
    )
    with pytest.warns(SeparationWarning):
        fit = node_logistic_fit(d, "u", 0.0)
    assert abs(fit.neighbor_coeffs["v"]) <= 20.0 + 1e-9
    assert abs(fit.neighbor_coeffs["v"]) >= 19.0


def test_single_class_node_is_degenerate():
    d = coin_dataset(100, seed=9)
    stuck = CaseDataset(
        graph=d.graph,
        treatment_mode="shared",
        y=np.column_stack([np.ones(100, dtype=int), d.y[:, 1:]]),
        a=d.a,
    )
    with pytest.raises(DegenerateDataError):
        node_logistic_fit(stuck, "n0", 0.1)


def test_negative_penalty_rejected():
    d = coin_dataset(50)
    with pytest.raises(ConfigurationError):
        node_logistic_fit(d, "n0", -0.5)


def test_penalty_monotonicity():
    g, d = chain_data(800, k=0.6, seed=11)
    grid = default_penalty_grid(d)
    sizes = [
        len(node_logistic_fit(d, "y", lam).selected_neighbors())
        for lam in sorted(grid)
    ]
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))


def test_structure_on_coin_data_is_empty():
    scores = []
    for rep in range(20):
        d = coin_dataset(2000, n=5, seed=100 + rep)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = learn_structure(d, default_penalty_grid(d))
        scores.append(f1_edges(frozenset(), res.selected_edges))
    assert np.mean(scores) >= 0.95


def test_and_result_is_subset_of_or_result():
    for rep in range(5):
        g, d = chain_data(300, k=0.4, seed=200 + rep, sweeps=150)
        grid = default_penalty_grid(d)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            and_res = learn_structure(d, grid, "AND")
            or_res = learn_structure(d, grid, "OR")
        assert and_res.selected_edges <= or_res.selected_edges
        assert and_res.rule == "AND" and or_res.rule == "OR"


def test_ebic_tie_breaks_to_largest_penalty():
    d = coin_dataset(500, seed=13)
    lam_max = max(default_penalty_grid(d))
    grid = [2 * lam_max, 4 * lam_max, 8 * lam_max]
    res = learn_structure(d, grid)
    # every penalty in this grid zeroes all neighbors, so EBIC ties and
    # the largest penalty must win
    assert res.selected_edges == frozenset()
    for node in d.graph.node_labels:
        assert res.penalties[node] == 8 * lam_max


def test_degenerate_node_excluded_with_warning():
    d = coin_dataset(300, n=4, seed=15)
    stuck = CaseDataset(
        graph=d.graph,
        treatment_mode="shared",
        y=np.column_stack([np.full(300, -1, dtype=int), d.y[:, 1:]]),
        a=d.a,
    )
    with pytest.warns(DegenerateNodeWarning):
        res = learn_structure(stuck, default_penalty_grid(stuck))
    assert res.excluded_nodes == ("n0",)
    assert res.neighborhoods["n0"] == frozenset()
    assert not any("n0" in e for e in res.selected_edges)


def test_structure_learning_rejects_bad_inputs():
    d = coin_dataset(50)
    with pytest.raises(ConfigurationError):
        learn_structure(d, [])
    with pytest.raises(ConfigurationError):
        learn_structure(d, [-1.0, 1.0])
    with pytest.raises(ConfigurationError):
        learn_structure(d, [1.0], rule="XOR")


def test_default_penalty_grid_shape():
    d = coin_dataset(200, seed=17)
    grid = default_penalty_grid(d, size=8)
    assert len(grid) == 8
    assert all(v > 0 for v in grid)
    assert grid[0] == max(grid)
    assert grid[0] / grid[-1] == pytest.approx(100.0, rel=1e-9)


def test_f1_edge_cases():
    assert f1_edges(set(), set()) == 1.0
    assert f1_edges({("a", "b")}, set()) == 0.0
    assert f1_edges({("a", "b")}, {("b", "a")}) == 1.0
    assert f1_edges({("a", "b"), ("b", "c")}, {("a", "b")}) == pytest.approx(2 / 3)


def test_exact_mle_recovers_moderate_parameters():
    g = judicial_graph()
    base = ChainGraphModel(
        g, h=(0.0,) * 9, k={e: 0.2 for e in g.edge_list()}, gamma=(0.0,) * 9
    )
    sc = SimulationScaling()
    truth = param_vector(apply_scaling(base, sc))
    max_errs = []
    for rep in range(20):
        d = generate_dataset(base, sc, 2000, seed=replicate_seed(500, rep), sweeps=1000)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            m = fit_exact_mle(d, g)
        max_errs.append(float(np.max(np.abs(param_vector(m) - truth))))
    assert float(np.mean(max_errs)) < 0.15


def test_exact_mle_stationarity_and_optimality():
    g, d = chain_data(1000, k=0.5, seed=19)
    info = {}
    m = fit_exact_mle(d, g, info=info)
    assert info["converged"] and info["grad_norm"] < 1e-6
    truth = ChainGraphModel(
        g,
        h=(0.0,) * 3,
        k={e: 0.5 for e in g.edge_list()},
        gamma=(0.0,) * 3,
        treatment_mode="per_node",
    )
    assert mean_loglik(m, d) >= mean_loglik(truth, d) - 1e-8
    assert info["objective"] == pytest.approx(mean_loglik(m, d), abs=1e-9)


def test_exact_mle_gradient_matches_finite_differences():
    g, d = chain_data(300, k=0.4, seed=21, sweeps=150)
    rng = np.random.default_rng(23)
    from chaingraph.fitting import _mle_objective

    fun, dim = _mle_objective(d, g)
    for _ in range(3):
        theta = rng.uniform(-1.0, 1.0, size=dim)
        _, grad = fun(theta)
        for pos in rng.choice(dim, size=3, replace=False):
            step = np.zeros(dim)
            step[pos] = 1e-5
            up, _ = fun(theta + step)
            dn, _ = fun(theta - step)
            fd = (up - dn) / 2e-5
            assert grad[pos] == pytest.approx(fd, rel=1e-6, abs=1e-10)


def test_exact_mle_is_permutation_equivariant():
    g, d = chain_data(400, k=0.5, seed=25, sweeps=150)
    m = fit_exact_mle(d, g)
    order = (2, 0, 1)
    labels = tuple(g.node_labels[i] for i in order)
    g2 = NetworkGraph(labels, g.edge_list())
    d2 = CaseDataset(
        graph=g2,
        treatment_mode="per_node",
        y=d.y[:, order],
        a=d.a[:, order],
    )
    m2 = fit_exact_mle(d2, g2)
    for pos, lab in enumerate(labels):
        src = g.node_labels.index(lab)
        assert m2.h[pos] == pytest.approx(m.h[src], abs=1e-9)
        assert m2.gamma[pos] == pytest.approx(m.gamma[src], abs=1e-9)
    for e, w in m.k.items():
        assert m2.k[e] == pytest.approx(w, abs=1e-9)


def test_pseudolikelihood_consistency_and_mle_agreement():
    g = judicial_graph()
    base = ChainGraphModel(
        g, h=(0.0,) * 9, k={e: 0.2 for e in g.edge_list()}, gamma=(0.0,) * 9
    )
    sc = SimulationScaling(kappa_value=0.0)
    raw = generate_dataset(base, sc, 20000, seed=77, sweeps=1000)
    d = CaseDataset(graph=g, treatment_mode="per_node", y=raw.y, a=raw.a)
    truth = param_vector(
        ChainGraphModel(
            g,
            h=(0.0,) * 9,
            k={e: 0.2 for e in g.edge_list()},
            gamma=(0.5,) * 9,
            treatment_mode="per_node",
        )
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mp = fit_pseudolikelihood(d, g)
        mm = fit_exact_mle(d, g)
    assert float(np.max(np.abs(param_vector(mp) - truth))) < 0.1
    assert float(np.max(np.abs(param_vector(mp) - param_vector(mm)))) < 0.1


def test_pseudolikelihood_on_coins_has_no_couplings():
    labels = tuple(f"n{i}" for i in range(4))
    g = NetworkGraph(
        labels, [(labels[0], labels[1]), (labels[1], labels[2]), (labels[2], labels[3])]
    )
    rng = np.random.default_rng(27)
    d = CaseDataset(
        graph=g,
        treatment_mode="shared",
        y=rng.choice([-1, 1], size=(4000, 4)),
        a=rng.integers(0, 2, size=4000),
    )
    m = fit_pseudolikelihood(d, g)
    assert all(abs(w) < 0.05 for w in m.k.values())


def test_mode_mismatch_is_rejected():
    g, d = chain_data(100, seed=29, sweeps=60)
    with pytest.raises(ConfigurationError):
        fit_exact_mle(d, g, mode="shared")


def test_bootstrap_on_one_repeated_case_collapses():
    g = NetworkGraph(("x", "y"), [("x", "y")])
    d = CaseDataset(
        graph=g,
        treatment_mode="shared",
        y=np.tile([1, -1], (30, 1)),
        a=np.zeros(30, dtype=int),
    )
    query = EffectQuery(
        a1=1, a0=0, event=EventPredicate.from_counts([2]), method="pseudo"
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        est = bootstrap_effect(d, g, query, BootstrapSpec(nb=20, seed=1))
    assert est.se == 0.0
    assert est.ci_low == est.ci_high == est.point


def test_bootstrap_determinism_across_threads():
    g, d = chain_data(200, k=0.4, seed=31, sweeps=100)
    query = EffectQuery(
        a1=np.ones(3, dtype=int),
        a0=np.zeros(3, dtype=int),
        event=EventPredicate.from_counts([3]),
        method="pseudo",
    )
    spec = BootstrapSpec(nb=24, seed=5)
    arms1, arms8 = {}, {}
    est1 = bootstrap_effect(d, g, query, spec, threads=1, arms=arms1)
    est8 = bootstrap_effect(d, g, query, spec, threads=8, arms=arms8)
    assert est1.point == est8.point
    assert est1.se == est8.se
    assert (est1.ci_low, est1.ci_high) == (est8.ci_low, est8.ci_high)
    assert arms1 == arms8


def test_bootstrap_reports_arm_summaries():
    g, d = chain_data(300, k=0.4, seed=33, sweeps=100)
    query = EffectQuery(
        a1=np.ones(3, dtype=int),
        a0=np.zeros(3, dtype=int),
        event=EventPredicate.from_counts([3]),
        method="pseudo",
    )
    arms = {}
    est = bootstrap_effect(d, g, query, BootstrapSpec(nb=30, seed=7), arms=arms)
    assert arms["replicates_kept"] + arms["replicates_dropped"] == 30
    for side in ("p1", "p0"):
        s = arms[side]
        assert s["ci_low"] <= s["point"] <= s["ci_high"]
        assert s["se"] >= 0.0
    assert est.ci_low <= est.point <= est.ci_high
    assert est.point == pytest.approx(
        contrast_on_scale("risk_difference", arms["p1"]["point"], arms["p0"]["point"]),
        abs=1e-12,
    )


def test_bootstrap_fails_loudly_on_many_drops():
    # node "x" carries a single -1 case; a resample missing it caps the
    # fit, whose event probability then rounds to exactly 1.0 and the
    # odds ratio is undefined, so that replicate drops. The miss chance
    # is (11/12)^12, about 0.35 per replicate, far beyond the 10% gate.
    g = NetworkGraph(("x",), [])
    y = np.concatenate([[-1], np.ones(11, dtype=int)])[:, None]
    d = CaseDataset(
        graph=g, treatment_mode="shared", y=y, a=np.zeros(12, dtype=int)
    )
    query = EffectQuery(
        a1=1,
        a0=0,
        event=EventPredicate.from_counts([1]),
        scale="odds_ratio",
        method="pseudo",
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        with pytest.raises(BootstrapFailureError):
            bootstrap_effect(d, g, query, BootstrapSpec(nb=40, seed=3))


def test_bootstrap_can_refit_structure():
    g, d = chain_data(250, k=0.6, seed=37, sweeps=120)
    query = EffectQuery(
        a1=np.ones(3, dtype=int),
        a0=np.zeros(3, dtype=int),
        event=EventPredicate.from_counts([0]),
        method="pseudo",
    )
    spec = BootstrapSpec(nb=12, seed=9, refit_structure=True)
    est = bootstrap_effect(d, g, query, spec)
    assert est.se is not None and est.se >= 0.0


def test_bootstrap_spec_validation():
    with pytest.raises(ConfigurationError):
        BootstrapSpec(nb=1)
    with pytest.raises(ConfigurationError):
        EffectQuery(a1=1, a0=0, event=EventPredicate.from_counts([1]), method="emcee")


def test_bootstrap_ci_covers_truth():
    g = NetworkGraph(("x", "y", "z"), [("x", "y"), ("y", "z")])
    base = ChainGraphModel(
        g,
        h=(0.1,) * 3,
        k={e: 0.4 for e in g.edge_list()},
        gamma=(0.0,) * 3,
        treatment_mode="per_node",
    )
    sc = SimulationScaling(gamma_value=0.8, kappa_value=0.3)
    truth_model = apply_scaling(base, sc)
    law = CovariateLaw.ising_uniform(g, 0.3)
    ev = EventPredicate.from_counts([3])
    a1, a0 = np.ones(3, dtype=int), np.zeros(3, dtype=int)
    truth = contrast_on_scale(
        "risk_difference",
        counterfactual_event_prob(truth_model, a1, ev, law),
        counterfactual_event_prob(truth_model, a0, ev, law),
    )
    query = EffectQuery(a1=a1, a0=a0, event=ev, method="mle")
    covered = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for outer in range(100):
            d = generate_dataset(
                base, sc, 300, seed=replicate_seed(900, outer), sweeps=200
            )
            est = bootstrap_effect(d, g, query, BootstrapSpec(nb=99, seed=outer))
            covered += est.ci_low <= truth <= est.ci_high
    assert covered >= 90


def test_ci_test_null_calibration():
    g = NetworkGraph(("u", "v"), [])
    rng = np.random.default_rng(1234)
    pvals = []
    for _ in range(1000):
        d = CaseDataset(
            graph=g,
            treatment_mode="shared",
            y=rng.choice([-1, 1], size=(200, 2)),
            a=np.zeros(200, dtype=int),
        )
        pvals.append(likelihood_ratio_ci_test(d, "u", "v"))
    assert kstest(pvals, "uniform").pvalue > 0.01


def test_ci_test_power_on_coupled_pair():
    g = NetworkGraph(("u", "v"), [("u", "v")])
    base = ChainGraphModel(g, h=(0.0, 0.0), k={("u", "v"): 1.0}, gamma=(0.0, 0.0))
    sc = SimulationScaling(gamma_value=0.0, kappa_value=0.0)
    rejections = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for s in range(100):
            d = generate_dataset(base, sc, 1000, seed=replicate_seed(77, s), sweeps=120)
            rejections += likelihood_ratio_ci_test(d, "u", "v") < 0.05
    assert rejections > 90


def test_ci_test_conditioning_blocks_chain_dependence():
    g, d = chain_data(4000, k=0.8, seed=39, sweeps=400)
    marginal = likelihood_ratio_ci_test(d, "x", "z")
    conditioned = likelihood_ratio_ci_test(d, "x", "z", conditioning=["y_y"])
    assert marginal < 0.05
    assert conditioned > marginal


def test_ci_test_separation_fallback():
    g = NetworkGraph(("u", "v"), [])
    y_u = np.array([1, -1] * 30)
    d = CaseDataset(
        graph=g,
        treatment_mode="shared",
        y=np.column_stack([y_u, y_u]),
        a=np.zeros(60, dtype=int),
    )
    with pytest.warns(SeparationWarning):
        p = likelihood_ratio_ci_test(d, "u", "v")
    assert 0.0 <= p < 0.05


def test_ci_test_input_validation():
    d = coin_dataset(100, seed=41)
    with pytest.raises(ConfigurationError):
        likelihood_ratio_ci_test(d, "n0", "n0")
    stuck = CaseDataset(
        graph=d.graph,
        treatment_mode="shared",
        y=np.column_stack([np.ones(100, dtype=int), d.y[:, 1:]]),
        a=d.a,
    )
    with pytest.raises(DegenerateDataError):
        likelihood_ratio_ci_test(stuck, "n0", "n1")
    with pytest.raises(ConfigurationError):
        likelihood_ratio_ci_test(d, "n0", "n1", conditioning=["w_7"])
