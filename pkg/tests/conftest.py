"""Shared fixtures and builders for the test suite."""

import csv

import numpy as np
import pytest

from chaingraph import (
    ChainGraphModel,
    NetworkGraph,
    judicial_power_model,
)
from chaingraph.scdb import (
    DIRECTION_CONSERVATIVE,
    DIRECTION_LIBERAL,
    REHNQUIST_PANEL,
)


def random_model(rng, n=None, with_kappa=None, mode=None, scale=3.0):
    """A random model on a random graph, parameters within +/-scale."""
    if n is None:
        n = int(rng.integers(1, 6))
    labels = tuple(f"n{i}" for i in range(n))
    edges = [
        (labels[i], labels[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < 0.5
    ]
    graph = NetworkGraph(labels, edges)
    if with_kappa is None:
        with_kappa = bool(rng.integers(0, 2))
    if mode is None:
        mode = "shared" if rng.integers(0, 2) else "per_node"
    unif = lambda size: tuple(float(v) for v in rng.uniform(-scale, scale, size))
    return ChainGraphModel(
        graph=graph,
        h=unif(n),
        k={e: float(rng.uniform(-scale, scale)) for e in graph.edge_list()},
        gamma=unif(n),
        treatment_mode=mode,
        kappa=unif(n) if with_kappa else None,
    )


def random_context(rng, model):
    """A conforming (y, a, c) triple for the model."""
    n = model.n
    y = rng.choice([-1, 1], size=n)
    if model.treatment_mode == "shared":
        a = int(rng.integers(0, 2))
    else:
        a = rng.integers(0, 2, size=n)
    c = rng.integers(0, 2, size=n) if model.kappa is not None else None
    return y, a, c


def model_primitives(model, a, c):
    """Repackage a model for the naive oracles: index-keyed couplings,
    plain lists, treatments broadcast per node."""
    idx = {lab: i for i, lab in enumerate(model.graph.node_labels)}
    k_pairs = {(idx[u], idx[v]): w for (u, v), w in model.k.items()}
    n = model.n
    a_vec = [int(a)] * n if np.ndim(a) == 0 else [int(v) for v in a]
    c_vec = None if c is None else [int(v) for v in c]
    return {
        "a": a_vec,
        "c": c_vec,
        "h": list(model.h),
        "k_pairs": k_pairs,
        "gamma": list(model.gamma),
        "kappa": None if model.kappa is None else list(model.kappa),
    }


@pytest.fixture()
def judicial_model():
    return judicial_power_model()


def chain3_model(k=0.4, h=(0.2, -0.1, 0.3), gamma=(0.0, 0.0, 0.0), kappa=None):
    graph = NetworkGraph(("x", "y", "z"), [("x", "y"), ("y", "z")])
    return ChainGraphModel(
        graph=graph,
        h=h,
        k={("x", "y"): k, ("y", "z"): k},
        gamma=gamma,
        treatment_mode="per_node",
        kappa=kappa,
    )


SCDB_HEADER = ("caseId", "term", "justiceName", "direction", "issueArea")

# SCDB-style source names in seniority order, one per panel label
SOURCE_NAMES = (
    "WHRehnquist",
    "JPStevens",
    "SDOConnor",
    "AScalia",
    "AMKennedy",
    "DHSouter",
    "CThomas",
    "RBGinsburg",
    "SGBreyer",
)


def write_scdb_csv(path, cases, extra_rows=()):
    """Write a justice-centered CSV.

    ``cases`` maps case_id -> (term, issue, votes) where votes is one
    direction code per panel justice in seniority order (None skips the
    row entirely, to fabricate a missing vote).
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SCDB_HEADER)
        for case_id, (term, issue, votes) in cases.items():
            for name, vote in zip(SOURCE_NAMES, votes):
                if vote is None:
                    continue
                w.writerow([case_id, term, name, vote, issue])
        for row in extra_rows:
            w.writerow(row)
    return path


def unanimous_votes(direction):
    return (direction,) * 9


def split_votes(n_liberal):
    """First ``n_liberal`` seniority slots vote liberal, the rest conservative."""
    return (DIRECTION_LIBERAL,) * n_liberal + (DIRECTION_CONSERVATIVE,) * (
        9 - n_liberal
    )


@pytest.fixture()
def scdb_csv(tmp_path):
    """A small well-formed extract: 6 cases, two issue areas."""
    cases = {
        "2000-001": (2000, 9, unanimous_votes(DIRECTION_CONSERVATIVE)),
        "2000-002": (2000, 9, split_votes(5)),
        "2000-003": (2001, 1, unanimous_votes(DIRECTION_LIBERAL)),
        "2000-004": (2001, 1, split_votes(4)),
        "2000-005": (2002, 9, split_votes(2)),
        "2000-006": (2003, 8, unanimous_votes(DIRECTION_CONSERVATIVE)),
    }
    return write_scdb_csv(tmp_path / "scdb.csv", cases)


assert len(SOURCE_NAMES) == len(REHNQUIST_PANEL.labels)
