"""Metrics series: per-round records plus an end-of-run summary.

Serialization is part of the determinism contract: fixed key order, compact
separators, one JSON object per line.  A run of N rounds emits exactly N+1
lines, the last being the summary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

SUMMARY_KEYS = (
    "rounds",
    "attacker_selection_fraction",
    "mean_reputation_error",
    "convergence_round",
    "rejected_spoofs_total",
    "evidence_availability",
    "mean_misprediction_rate",
)

CONVERGENCE_THRESHOLD = 0.9


@dataclass
class MetricsSeries:
    per_round: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_json_lines(self) -> str:
        lines = [_dumps(rec) for rec in self.per_round]
        lines.append(_dumps(self.summary))
        return "\n".join(lines) + "\n"

    def to_summary_json(self) -> str:
        return json.dumps(self.summary, indent=2, sort_keys=False) + "\n"


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=False)


def build_summary(
    reports: Sequence,
    hosted_ever: int,
    destroyed_total: int,
    discrepancies: Sequence[float],
) -> dict:
    """Fold a run's round reports into the summary record.

    convergence_round is the earliest round from which the best-network
    selection fraction never again drops below the threshold; null if the
    run ends unconverged.
    """
    n = len(reports)
    summary: dict = {k: None for k in SUMMARY_KEYS}
    summary["rounds"] = n
    if n:
        summary["attacker_selection_fraction"] = (
            sum(r.attacker_fraction for r in reports) / n
        )
    else:
        summary["attacker_selection_fraction"] = 0.0
    error_sums: dict = {}
    error_counts: dict = {}
    for report in reports:
        for net_id, err in report.reputation_error.items():
            error_sums[net_id] = error_sums.get(net_id, 0.0) + err
            error_counts[net_id] = error_counts.get(net_id, 0) + 1
    summary["mean_reputation_error"] = {
        net_id: error_sums[net_id] / error_counts[net_id] for net_id in sorted(error_sums)
    }
    summary["convergence_round"] = _convergence_round(reports)
    summary["rejected_spoofs_total"] = sum(r.rejected_spoofs for r in reports)
    summary["evidence_availability"] = (
        1.0 - destroyed_total / hosted_ever if hosted_ever else 1.0
    )
    summary["mean_misprediction_rate"] = (
        sum(discrepancies) / len(discrepancies) if discrepancies else 0.0
    )
    return summary


def _convergence_round(reports: Sequence) -> Optional[int]:
    converged_from = None
    for report in reports:
        if report.best_fraction >= CONVERGENCE_THRESHOLD:
            if converged_from is None:
                converged_from = report.round
        else:
            converged_from = None
    return converged_from


def write_text(path, text: str) -> None:
    """Write metrics output; OSError propagates for the CLI to map."""
    with open(path, "w") as fh:
        fh.write(text)
