"""Ingest for justice-centered Supreme Court voting exports.

Turns per-justice vote rows into case-level outcome vectors over a
fixed nine-member panel (the 1994-2004 natural court by default).
A case qualifies only when every panel member cast a codable vote:
direction 2 maps to +1 (liberal), 1 to -1 (conservative), anything
else disqualifies the case. Issue-area codes ride along so a chosen
area can later be binarized into a shared treatment.
"""

from __future__ import annotations

import csv
import io
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import CaseDataset
from .errors import ConfigurationError, EmptyDatasetError, SchemaError
from .graph import NetworkGraph
from .model import SHARED, ChainGraphModel

logger = logging.getLogger(__name__)

DIRECTION_CONSERVATIVE = 1
DIRECTION_LIBERAL = 2

REQUIRED_COLUMNS = ("caseId", "term", "justiceName", "direction", "issueArea")

ISSUE_AREAS = {
    1: "criminal procedure",
    2: "civil rights",
    3: "first amendment",
    4: "due process",
    5: "privacy",
    6: "attorneys",
    7: "unions",
    8: "economic activity",
    9: "judicial power",
    10: "federalism",
    11: "interstate relations",
    12: "federal taxation",
    13: "miscellaneous",
    14: "private action",
}

# sentinel for a kept case whose issueArea field was blank
ISSUE_MISSING = 0


@dataclass(frozen=True)
class CourtPanel:
    """Fixed panel roster in seniority order plus source-name aliases."""

    labels: tuple[str, ...]
    aliases: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ConfigurationError("panel labels must be unique")
        for src, lab in self.aliases.items():
            if lab not in self.labels:
                raise ConfigurationError(
                    f"alias {src!r} points at unknown label {lab!r}"
                )

    @property
    def size(self) -> int:
        return len(self.labels)

    def resolve(self, source_name: str) -> str:
        if source_name in self.aliases:
            return self.aliases[source_name]
        if source_name in self.labels:
            return source_name
        raise SchemaError(f"unknown justice name {source_name!r}")

    def graph(self) -> NetworkGraph:
        return NetworkGraph(self.labels, frozenset())


REHNQUIST_PANEL = CourtPanel(
    labels=(
        "Rehnquist",
        "Stevens",
        "OConnor",
        "Scalia",
        "Kennedy",
        "Souter",
        "Thomas",
        "Ginsburg",
        "Breyer",
    ),
    aliases={
        "WHRehnquist": "Rehnquist",
        "JPStevens": "Stevens",
        "SDOConnor": "OConnor",
        "AScalia": "Scalia",
        "AMKennedy": "Kennedy",
        "DHSouter": "Souter",
        "CThomas": "Thomas",
        "RBGinsburg": "Ginsburg",
        "SGBreyer": "Breyer",
    },
)


def resolve_issue(target) -> int:
    """Issue-area code from a code or a (case-insensitive) name."""
    if isinstance(target, str):
        wanted = target.strip().lower()
        for code, name in ISSUE_AREAS.items():
            if name == wanted:
                return code
        try:
            target = int(target)
        except ValueError:
            raise ConfigurationError(
                f"unknown issue area {wanted!r}; valid: "
                + ", ".join(f"{c}={n}" for c, n in ISSUE_AREAS.items())
            ) from None
    code = int(target)
    if code not in ISSUE_AREAS:
        raise ConfigurationError(
            f"unknown issue-area code {code}; valid codes: "
            + ", ".join(str(c) for c in ISSUE_AREAS)
        )
    return code


def _open_source(csv_source):
    if hasattr(csv_source, "read"):
        return io.StringIO(csv_source.read()), None
    fh = Path(csv_source).open(newline="")
    return fh, fh


def load_cases(
    csv_source,
    panel: CourtPanel = REHNQUIST_PANEL,
    term_range: tuple[int, int] = (1994, 2004),
    report: dict | None = None,
) -> CaseDataset:
    """Full-panel cases in the term range, ordered by case id.

    Rows outside the term range are ignored. A case is excluded, with
    the reason logged, when any panel vote is missing, any direction
    falls outside {1, 2}, or duplicate rows conflict. Raises
    SchemaError for missing columns or unknown justice names within
    range, EmptyDatasetError when nothing qualifies.
    """
    lo, hi = term_range
    stream, owned = _open_source(csv_source)
    try:
        reader = csv.DictReader(stream)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"missing required columns: {', '.join(missing)}")
        votes: dict[str, dict[str, int]] = {}
        issues: dict[str, int] = {}
        bad: dict[str, str] = {}
        for row in reader:
            case_id = (row["caseId"] or "").strip()
            if not case_id:
                raise SchemaError("row with empty caseId")
            try:
                term = int(row["term"])
            except (TypeError, ValueError):
                raise SchemaError(f"non-integer term in case {case_id}") from None
            if not lo <= term <= hi:
                continue
            name = (row["justiceName"] or "").strip()
            if not name:
                raise SchemaError(f"empty justiceName in case {case_id}")
            label = panel.resolve(name)
            raw_dir = (row["direction"] or "").strip()
            case = votes.setdefault(case_id, {})
            if raw_dir in ("1", "2"):
                direction = int(raw_dir)
                if label in case and case[label] != direction:
                    bad[case_id] = f"conflicting votes for {label}"
                case[label] = direction
            else:
                bad.setdefault(case_id, f"uncodable direction for {label}")
            raw_issue = (row["issueArea"] or "").strip()
            if raw_issue:
                try:
                    issues.setdefault(case_id, resolve_issue(raw_issue))
                except ConfigurationError:
                    raise SchemaError(
                        f"invalid issueArea {raw_issue!r} in case {case_id}"
                    ) from None
    finally:
        if owned is not None:
            owned.close()

    kept_ids = []
    excluded: dict[str, str] = {}
    for case_id in sorted(votes):
        if case_id in bad:
            excluded[case_id] = bad[case_id]
            continue
        absent = [lab for lab in panel.labels if lab not in votes[case_id]]
        if absent:
            excluded[case_id] = f"missing votes: {', '.join(absent)}"
            continue
        kept_ids.append(case_id)
    for case_id, reason in excluded.items():
        logger.info("excluding case %s: %s", case_id, reason)
    if report is not None:
        report.update(
            cases_seen=len(votes),
            kept=len(kept_ids),
            excluded=dict(excluded),
            term_range=(lo, hi),
        )
    if not kept_ids:
        raise EmptyDatasetError(
            f"no qualifying cases in terms {lo}-{hi}"
        )

    y = np.empty((len(kept_ids), panel.size), dtype=np.int8)
    for r, case_id in enumerate(kept_ids):
        for j, lab in enumerate(panel.labels):
            y[r, j] = 1 if votes[case_id][lab] == DIRECTION_LIBERAL else -1
    return CaseDataset(
        graph=panel.graph(),
        treatment_mode=SHARED,
        y=y,
        a=np.zeros(len(kept_ids), dtype=np.int8),
        case_ids=tuple(kept_ids),
        issue_codes=tuple(issues.get(cid, ISSUE_MISSING) for cid in kept_ids),
    )


def binarize_issue(dataset: CaseDataset, target) -> CaseDataset:
    """Shared treatment a=1 exactly for cases in the target issue area."""
    if dataset.issue_codes is None:
        raise ConfigurationError("dataset carries no issue codes")
    code = resolve_issue(target)
    a = np.fromiter(
        (1 if c == code else 0 for c in dataset.issue_codes),
        dtype=np.int8,
        count=dataset.n_cases,
    )
    if not a.any():
        warnings.warn(
            f"no cases fall in issue area {code} ({ISSUE_AREAS[code]})",
            UserWarning,
            stacklevel=2,
        )
    return CaseDataset(
        graph=dataset.graph,
        treatment_mode=SHARED,
        y=dataset.y,
        a=a,
        c=dataset.c,
        case_ids=dataset.case_ids,
        issue_codes=dataset.issue_codes,
    )


def summarize(dataset: CaseDataset) -> dict:
    """Issue counts, per-justice vote rates, and majority-outcome rates.

    A case's decision counts as liberal when more than half the panel
    voted +1 (five or more of nine).
    """
    issue_counts = {name: 0 for name in ISSUE_AREAS.values()}
    missing_issue = 0
    if dataset.issue_codes is not None:
        for code in dataset.issue_codes:
            if code == ISSUE_MISSING:
                missing_issue += 1
            else:
                issue_counts[ISSUE_AREAS[code]] += 1
    plus = dataset.y == 1
    justice_rates = {
        lab: {
            "liberal": float(plus[:, j].mean()),
            "conservative": float(1.0 - plus[:, j].mean()),
        }
        for j, lab in enumerate(dataset.graph.node_labels)
    }
    majority_liberal = plus.sum(axis=1) > dataset.n_nodes / 2
    return {
        "n_cases": dataset.n_cases,
        "issue_counts": issue_counts,
        "cases_without_issue": missing_issue,
        "justice_rates": justice_rates,
        "liberal_decision_rate": float(majority_liberal.mean()),
        "conservative_decision_rate": float(1.0 - majority_liberal.mean()),
    }


# Interaction structure recovered for judicial-power cases on this
# panel, with the fitted pairwise and treatment coefficients. Used as
# a realistic nine-node example in simulations and tests.
JUDICIAL_POWER_EDGES = frozenset(
    {
        ("OConnor", "Rehnquist"),
        ("Rehnquist", "Scalia"),
        ("Kennedy", "Rehnquist"),
        ("Rehnquist", "Thomas"),
        ("Souter", "Stevens"),
        ("Ginsburg", "Stevens"),
        ("Breyer", "Stevens"),
        ("Kennedy", "OConnor"),
        ("OConnor", "Souter"),
        ("Breyer", "OConnor"),
        ("Kennedy", "Scalia"),
        ("Scalia", "Thomas"),
        ("Kennedy", "Souter"),
        ("Kennedy", "Thomas"),
        ("Ginsburg", "Kennedy"),
        ("Ginsburg", "Souter"),
        ("Breyer", "Souter"),
        ("Breyer", "Ginsburg"),
    }
)

JUDICIAL_POWER_PAIRWISE = {
    ("OConnor", "Rehnquist"): 1.2308982,
    ("Rehnquist", "Scalia"): 0.6905832,
    ("Kennedy", "Rehnquist"): 1.0626196,
    ("Rehnquist", "Thomas"): 0.7584730,
    ("Souter", "Stevens"): 0.6888480,
    ("Ginsburg", "Stevens"): 0.7816874,
    ("Breyer", "Stevens"): 0.7099157,
    ("Kennedy", "OConnor"): 0.6298417,
    ("OConnor", "Souter"): 0.6776570,
    ("Breyer", "OConnor"): 1.0187295,
    ("Kennedy", "Scalia"): 0.5025447,
    ("Scalia", "Thomas"): 2.0160801,
    ("Kennedy", "Souter"): 0.5637078,
    ("Kennedy", "Thomas"): 0.5575171,
    ("Ginsburg", "Kennedy"): 0.5045031,
    ("Ginsburg", "Souter"): 1.2431446,
    ("Breyer", "Souter"): 0.6058508,
    ("Breyer", "Ginsburg"): 1.0313114,
}

JUDICIAL_POWER_TREATMENT = {
    "Rehnquist": 0.32402724,
    "Stevens": -2.22082220,
    "OConnor": 0.84974616,
    "Scalia": -1.22317942,
    "Kennedy": 0.62502044,
    "Souter": -0.26354494,
    "Thomas": 1.48718375,
    "Ginsburg": -1.14375875,
    "Breyer": 0.05223488,
}


# Six panel treatment assignments used in counterfactual tables: the
# conservative four, the liberal four, and four single justices.
PANEL_TREATMENT_ASSIGNMENTS = (
    ("OConnor", "Scalia", "Kennedy", "Thomas"),
    ("Stevens", "Souter", "Ginsburg", "Breyer"),
    ("Rehnquist",),
    ("Thomas",),
    ("Stevens",),
    ("Scalia",),
)


def judicial_power_model(h=None) -> ChainGraphModel:
    """Reference nine-justice model; baseline fields default to zero."""
    panel = REHNQUIST_PANEL
    graph = NetworkGraph(panel.labels, JUDICIAL_POWER_EDGES)
    if h is None:
        h_vec = (0.0,) * panel.size
    elif np.ndim(h) == 0:
        h_vec = (float(h),) * panel.size
    else:
        h_vec = tuple(float(v) for v in h)
    return ChainGraphModel(
        graph=graph,
        h=h_vec,
        k=dict(JUDICIAL_POWER_PAIRWISE),
        gamma=tuple(JUDICIAL_POWER_TREATMENT[lab] for lab in panel.labels),
        treatment_mode=SHARED,
    )
