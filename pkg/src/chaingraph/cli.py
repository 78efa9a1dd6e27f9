"""Command-line front end for ingestion, fitting, effects, and simulation.

Every subcommand is deterministic given its inputs, flags, and seed,
independent of ``--threads``, and writes a run manifest beside its
outputs. Exit codes: 0 success, 2 validation or usage error, 3
numerical non-convergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .data import read_dataset_csv, write_dataset_csv
from .errors import BootstrapFailureError, ConfigurationError, FitConvergenceError
from .experiments import (
    DEFAULT_EVENT_COUNTS,
    recovery_experiment,
    write_recovery_csv,
)
from .fitting import (
    AND_RULE,
    OR_RULE,
    BootstrapSpec,
    EffectQuery,
    default_penalty_grid,
    fit_exact_mle,
    fit_pseudolikelihood,
    learn_structure,
    bootstrap_effect,
)
from .gibbs import (
    DEFAULT_GENERATION_SWEEPS,
    GibbsConfig,
    SimulationScaling,
    FIXED_SCAN,
    RANDOM_SCAN,
    generate_dataset,
    gibbs_chain,
)
from .graph import NetworkGraph
from .inference import (
    EventPredicate,
    causal_effect,
    effect_to_dict,
    event_text,
    parse_event,
)
from .manifest import RunManifest, file_fingerprint, tool_version, utc_now
from .model import (
    PER_NODE,
    SHARED,
    model_from_json,
    model_to_json,
    model_fingerprint,
)
from .scdb import (
    PANEL_TREATMENT_ASSIGNMENTS,
    REHNQUIST_PANEL,
    binarize_issue,
    judicial_power_model,
    load_cases,
    summarize,
)
from .temporal import (
    TemporalParams,
    conjecture_experiment,
    run_battery,
    write_battery_csv,
)

PROG = "chaingraph"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_IO = 4


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument(
        "--threads", type=int, default=1, help="worker threads; never changes output"
    )
    common.add_argument(
        "--out-dir", default=".", help="directory for output files"
    )
    common.add_argument(
        "--format",
        choices=("json", "csv"),
        default="json",
        help="stdout summary format",
    )
    return common


def _parse_edges(pairs) -> frozenset:
    edges = set()
    for spec in pairs or ():
        parts = [p.strip() for p in spec.split(",")]
        if len(parts) != 2 or not all(parts):
            raise ConfigurationError(
                f"--edges value {spec!r} is not a 'LABEL,LABEL' pair"
            )
        edges.add((parts[0], parts[1]))
    return frozenset(edges)


def _parse_assignment(text: str, model):
    """Treatment flag value: 'all', 'none', '0'/'1', or treated labels."""
    val = text.strip()
    if val in ("1", "all") and model.treatment_mode == SHARED:
        return 1
    if val in ("0", "none") and model.treatment_mode == SHARED:
        return 0
    graph = model.graph
    if model.treatment_mode == SHARED:
        raise ConfigurationError(
            f"shared-treatment model takes 'all'/'none' (or 1/0), got {text!r}"
        )
    if val == "all":
        return np.ones(graph.n, dtype=np.int8)
    if val == "none":
        return np.zeros(graph.n, dtype=np.int8)
    a = np.zeros(graph.n, dtype=np.int8)
    for lab in val.split(","):
        a[graph.index(lab.strip())] = 1
    return a


def _emit(summary: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(["key", "value"])
        for key in sorted(summary):
            val = summary[key]
            if isinstance(val, (dict, list, tuple)):
                val = json.dumps(val, sort_keys=True, default=str)
            writer.writerow([key, val])


def _write_json(obj, path: Path) -> None:
    with path.open("w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _load_model_arg(args):
    if args.model is None:
        return judicial_power_model()
    return model_from_json(Path(args.model).read_text())


def cmd_ingest(args, out_dir: Path):
    report: dict = {}
    dataset = load_cases(
        args.scdb_csv,
        term_range=(args.term_start, args.term_end),
        report=report,
    )
    cases_path = out_dir / "cases.csv"
    write_dataset_csv(
        dataset,
        cases_path,
        extra={"term_range": [args.term_start, args.term_end]},
    )
    summary = summarize(dataset)
    summary["ingest"] = {
        "cases_seen": report["cases_seen"],
        "kept": report["kept"],
        "excluded": report["excluded"],
        "n_excluded": len(report["excluded"]),
    }
    _write_json(summary, out_dir / "summary.json")
    return {"scdb_csv": args.scdb_csv}, summary


def cmd_fit(args, out_dir: Path):
    dataset = read_dataset_csv(args.dataset)
    if args.issue is not None:
        dataset = binarize_issue(dataset, args.issue)
    labels = dataset.graph.node_labels
    fit_meta: dict = {"method": args.method}
    if args.edges:
        graph = NetworkGraph(labels, _parse_edges(args.edges))
        fit_meta["structure"] = "fixed by --edges"
    else:
        grid = (
            tuple(float(v) for v in args.penalties.split(","))
            if args.penalties
            else default_penalty_grid(dataset, args.grid_size)
        )
        structure = learn_structure(dataset, grid, args.rule)
        graph = structure.as_graph(labels)
        fit_meta["structure"] = "learned"
        fit_meta["rule"] = structure.rule
        fit_meta["penalties"] = {
            lab: structure.penalties[lab] for lab in labels
        }
        fit_meta["ebic"] = {lab: structure.ebic[lab] for lab in labels}
        if structure.excluded_nodes:
            fit_meta["excluded_nodes"] = list(structure.excluded_nodes)
    info: dict = {}
    if args.method == "mle":
        model = fit_exact_mle(dataset, graph, info=info)
    else:
        model = fit_pseudolikelihood(dataset, graph, info=info)
    fit_meta.update(info)
    text = model_to_json(model, fit_meta=fit_meta)
    model_path = out_dir / "model.json"
    model_path.write_text(text + "\n")
    summary = {
        "model_file": model_path.name,
        "fingerprint": model_fingerprint(model),
        "n_edges": len(graph.edges),
        "edges": ["{},{}".format(*e) for e in graph.edge_list()],
        "method": args.method,
        "converged": info.get("converged"),
    }
    return {"dataset": args.dataset}, summary


def cmd_effect(args, out_dir: Path):
    model = _load_model_arg(args)
    event = parse_event(args.event, model.n)
    a1 = _parse_assignment(args.a1, model)
    a0 = _parse_assignment(args.a0, model)
    arms: dict = {}
    if args.dataset is not None:
        dataset = read_dataset_csv(args.dataset)
        if args.issue is not None:
            dataset = binarize_issue(dataset, args.issue)
        query = EffectQuery(
            a1=a1, a0=a0, event=event, scale=args.scale, method=args.method
        )
        spec = BootstrapSpec(
            nb=args.nb,
            seed=args.seed,
            estimand=f"{args.scale}:{args.event}",
            refit_structure=args.refit_structure,
        )
        estimate = bootstrap_effect(
            dataset,
            model.graph,
            query,
            spec,
            threads=args.threads,
            arms=arms,
        )
    else:
        if model.kappa is not None:
            raise ConfigurationError(
                "model has covariate terms; supply --dataset so the "
                "covariate law can be estimated"
            )
        estimate = causal_effect(model, a1, a0, event, args.scale)
    report = effect_to_dict(estimate)
    if arms:
        report["arms"] = {"a1": arms["p1"], "a0": arms["p0"]}
        report["bootstrap"] = {
            "nb": args.nb,
            "kept": arms["replicates_kept"],
            "dropped": arms["replicates_dropped"],
        }
    _write_json(report, out_dir / "effect.json")
    ev = event_text(event)
    if not isinstance(ev, str):
        ev = json.dumps(ev, sort_keys=True)
    with (out_dir / "effect_plot.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["event", "treatment", "estimate", "ci_low", "ci_high"])
        if arms:
            writer.writerow(
                [ev, args.a1, repr(arms["p1"]["point"]),
                 repr(arms["p1"]["ci_low"]), repr(arms["p1"]["ci_high"])]
            )
            writer.writerow(
                [ev, args.a0, repr(arms["p0"]["point"]),
                 repr(arms["p0"]["ci_low"]), repr(arms["p0"]["ci_high"])]
            )
        row = [ev, f"{args.a1} vs {args.a0}", repr(estimate.point)]
        if estimate.ci_low is not None:
            row += [repr(estimate.ci_low), repr(estimate.ci_high)]
        else:
            row += ["", ""]
        writer.writerow(row)
    inputs = {"model": args.model, "dataset": args.dataset}
    return inputs, report


def cmd_simulate(args, out_dir: Path):
    base = _load_model_arg(args)
    scaling = SimulationScaling(
        alpha=args.alpha,
        beta=args.beta,
        gamma_value=args.gamma,
        kappa_value=args.kappa,
    )
    if args.replicates < 1:
        raise ConfigurationError("--replicates must be positive")
    if args.replicates == 1:
        dataset = generate_dataset(
            base, scaling, args.n_obs, args.seed, args.sweeps
        )
        path = out_dir / "dataset.csv"
        write_dataset_csv(
            dataset,
            path,
            extra={
                "seed": args.seed,
                "sweeps": args.sweeps,
                "scaling": {
                    "alpha": args.alpha,
                    "beta": args.beta,
                    "gamma": args.gamma,
                    "kappa": args.kappa,
                },
            },
        )
        summary = {"dataset_file": path.name, "n_cases": dataset.n_cases}
        return {"model": args.model}, summary
    if args.treat:
        assignments = tuple(
            tuple(lab.strip() for lab in spec.split(",") if lab.strip())
            for spec in args.treat
        )
    elif base.graph.node_labels == REHNQUIST_PANEL.labels:
        assignments = PANEL_TREATMENT_ASSIGNMENTS
    else:
        assignments = (tuple(base.graph.node_labels),)
    counts = [int(v) for v in args.events.split(",")]
    events = tuple(EventPredicate.from_counts([k]) for k in counts)
    report = recovery_experiment(
        base,
        scaling,
        assignments,
        events,
        n_replicates=args.replicates,
        n_obs=args.n_obs,
        seed=args.seed,
        sweeps=args.sweeps,
        method=args.method,
        threads=args.threads,
    )
    write_recovery_csv(report, out_dir / "recovery.csv")
    summary = {
        "n_replicates": report.n_replicates,
        "n_obs": report.n_obs,
        "avg_abs_bias": report.avg_abs_bias,
        "max_abs_bias": report.max_abs_bias,
        "avg_se": report.avg_se,
        "max_se": report.max_se,
        "param_abs_bias": report.param_abs_bias,
    }
    _write_json(summary, out_dir / "recovery.json")
    summary["recovery_file"] = "recovery.csv"
    return {"model": args.model}, summary


def cmd_gibbs(args, out_dir: Path):
    model = _load_model_arg(args)
    a = _parse_assignment(args.a, model)
    c = None
    if model.kappa is not None:
        c = np.zeros(model.n, dtype=np.int8)
        if args.c not in (None, "none"):
            for lab in args.c.split(","):
                c[model.graph.index(lab.strip())] = 1
    elif args.c is not None:
        raise ConfigurationError("model has no covariate terms; drop --c")
    config = GibbsConfig(
        sweeps=args.sweeps,
        burn_in=args.burn_in,
        thin=args.thin,
        seed=args.seed,
        scan_order=args.scan,
    )
    samples = gibbs_chain(model, a, c, config)
    path = out_dir / "samples.csv"
    labels = model.graph.node_labels
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample"] + [f"y_{lab}" for lab in labels])
        for i, row in enumerate(samples):
            writer.writerow([i] + [int(v) for v in row])
    means = (samples == 1).mean(axis=0)
    summary = {
        "samples_file": path.name,
        "kept": int(samples.shape[0]),
        "marginal_p_plus": {lab: float(means[j]) for j, lab in enumerate(labels)},
    }
    _write_json(summary, out_dir / "gibbs_summary.json")
    return {"model": args.model}, summary


def cmd_conjecture(args, out_dir: Path):
    params = TemporalParams(
        intercepts=args.intercept,
        treatment_effect=args.treatment_effect,
        self_persistence=args.self_persistence,
        neighbor_influence=args.neighbor_influence,
        horizon=args.horizon,
        treatment_prob=args.treatment_prob,
    )
    results = conjecture_experiment(
        params,
        n_networks=args.networks,
        n=args.nodes,
        edge_prob=args.edge_prob,
        n_reps=args.replicates,
        alpha=args.alpha,
        seed=args.seed,
        threads=args.threads,
    )
    networks = []
    per_network = []
    for idx, (network, report) in enumerate(results):
        write_battery_csv(report, out_dir / f"battery_net{idx:02d}.csv", "pair")
        networks.append(
            {
                "index": idx,
                "nodes": list(network.node_labels),
                "edges": ["{},{}".format(*e) for e in network.edge_list()],
            }
        )
        per_network.append({"index": idx, "rates": report.rates})
    _write_json(networks, out_dir / "networks.json")
    agg = {
        hyp: float(np.mean([p["rates"][hyp] for p in per_network]))
        for hyp in ("a", "b", "c")
    }
    summary = {
        "alpha": args.alpha,
        "networks": args.networks,
        "replicates": args.replicates,
        "params": {
            "horizon": args.horizon,
            "treatment_prob": args.treatment_prob,
            "self_persistence": args.self_persistence,
            "neighbor_influence": args.neighbor_influence,
            "treatment_effect": args.treatment_effect,
            "intercept": args.intercept,
        },
        "per_network_rates": per_network,
        "mean_rates": agg,
    }
    _write_json(summary, out_dir / "conjecture_summary.json")
    return {}, summary


def cmd_battery(args, out_dir: Path):
    dataset = read_dataset_csv(args.dataset)
    if args.edges:
        network = NetworkGraph(dataset.graph.node_labels, _parse_edges(args.edges))
    else:
        network = dataset.graph
    report = run_battery(dataset, network, args.alpha, args.threads)
    write_battery_csv(report, out_dir / "battery.csv", "plain")
    summary = {
        "alpha": args.alpha,
        "n_tests": len(report.rows),
        "skipped": report.skipped,
        "rates": report.rates,
    }
    _write_json(summary, out_dir / "battery_summary.json")
    return {"dataset": args.dataset}, summary


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Causal inference on networks of binary outcomes.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", parents=[common], help="court CSV to dataset")
    p.add_argument("scdb_csv", help="justice-centered vote export")
    p.add_argument("--term-start", type=int, default=1994)
    p.add_argument("--term-end", type=int, default=2004)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fit", parents=[common], help="learn structure and fit")
    p.add_argument("dataset", help="dataset CSV (with sidecar manifest)")
    p.add_argument("--issue", help="issue area (name or code) to binarize")
    p.add_argument("--method", choices=("mle", "pseudo"), default="mle")
    p.add_argument("--rule", choices=(AND_RULE, OR_RULE), default=AND_RULE)
    p.add_argument("--penalties", help="comma-separated penalty grid")
    p.add_argument("--grid-size", type=int, default=12)
    p.add_argument(
        "--edges",
        action="append",
        metavar="U,V",
        help="fix this edge (repeatable); skips structure learning",
    )
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("effect", parents=[common], help="counterfactual contrast")
    p.add_argument("--model", help="model JSON (default: reference panel model)")
    p.add_argument("--a1", default="all", help="treated arm (labels/all/none)")
    p.add_argument("--a0", default="none", help="control arm")
    p.add_argument("--event", default="count=9", help="e.g. count=9, count in {4,5}")
    p.add_argument(
        "--scale",
        default="risk_difference",
        help="risk_difference|risk_ratio|odds_ratio (or rd|rr|or)",
    )
    p.add_argument("--dataset", help="dataset CSV enabling the bootstrap")
    p.add_argument("--issue", help="binarize this issue area before fitting")
    p.add_argument("--method", choices=("mle", "pseudo"), default="mle")
    p.add_argument("--nb", type=int, default=500, help="bootstrap replicates")
    p.add_argument("--refit-structure", action="store_true")
    p.set_defaults(func=cmd_effect)

    p = sub.add_parser("simulate", parents=[common], help="synthetic datasets")
    p.add_argument("--model", help="base model JSON (default: reference panel)")
    p.add_argument("--alpha", type=float, default=1.0, help="baseline-field scale")
    p.add_argument("--beta", type=float, default=1.0, help="interaction scale")
    p.add_argument("--gamma", type=float, default=0.5, help="treatment coefficient")
    p.add_argument("--kappa", type=float, default=0.3, help="covariate coefficient")
    p.add_argument("--n-obs", type=int, default=2000)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--sweeps", type=int, default=DEFAULT_GENERATION_SWEEPS)
    p.add_argument("--method", choices=("mle", "pseudo"), default="mle")
    p.add_argument(
        "--events",
        default=",".join(str(k) for k in DEFAULT_EVENT_COUNTS),
        help="comma-separated +1 counts for the recovery table",
    )
    p.add_argument(
        "--treat",
        action="append",
        metavar="LABELS",
        help="treatment assignment (comma-separated labels; repeatable)",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gibbs", parents=[common], help="run one sampler chain")
    p.add_argument("--model", help="model JSON (default: reference panel model)")
    p.add_argument("--a", default="none", help="treatment (labels/all/none)")
    p.add_argument("--c", help="covariate-positive labels (needs kappa)")
    p.add_argument("--sweeps", type=int, default=6000)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--scan", choices=(FIXED_SCAN, RANDOM_SCAN), default=FIXED_SCAN)
    p.set_defaults(func=cmd_gibbs)

    p = sub.add_parser(
        "conjecture", parents=[common], help="temporal-contagion battery study"
    )
    p.add_argument("--networks", type=int, default=10)
    p.add_argument("--nodes", type=int, default=9)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--treatment-prob", type=float, default=0.5)
    p.add_argument("--self-persistence", type=float, default=1.5)
    p.add_argument("--neighbor-influence", type=float, default=0.3)
    p.add_argument("--treatment-effect", type=float, default=0.5)
    p.add_argument("--intercept", type=float, default=0.0)
    p.set_defaults(func=cmd_conjecture)

    p = sub.add_parser(
        "battery", parents=[common], help="independence tests on a dataset"
    )
    p.add_argument("dataset", help="dataset CSV (with sidecar manifest)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument(
        "--edges",
        action="append",
        metavar="U,V",
        help="network edge (repeatable); default: dataset's own graph",
    )
    p.set_defaults(func=cmd_battery)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        flags = {
            k: (str(v) if isinstance(v, Path) else v)
            for k, v in vars(args).items()
            if k != "func"
        }
        started = utc_now()
        inputs, summary = args.func(args, out_dir)
        manifest = RunManifest(
            subcommand=args.subcommand,
            flags=flags,
            input_hashes={
                k: file_fingerprint(v) for k, v in inputs.items() if v
            },
            seed=args.seed,
            version=tool_version(),
            started_at=started,
        )
        manifest.write(out_dir)
        _emit(summary, args.format)
    except (FitConvergenceError, BootstrapFailureError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
