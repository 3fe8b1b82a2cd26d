"""Lexical-decision trial-log analysis.

Computes per-rater/per-group accuracy, rejection/acceptance/combined
reaction times, and the dimensionless normalized averages used to compare
raters with very different base speeds: each rater's group means are
divided by that rater's mean of means, then averaged across raters.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import AnalysisError, InputFormatError, MissingCellError

GROUPS = ("DE", "EN", "SV", "FI")
NONWORD_GROUPS = ("DE", "EN", "SV")
PROFICIENCIES = ("B", "I", "A")
ACCEPT = "ACCEPT"
REJECT = "REJECT"

TRIALS_CSV_HEADER = [
    "rater_id",
    "l1",
    "proficiency",
    "word",
    "group",
    "response",
    "rt_seconds",
]


@dataclass
class TrialRecord:
    """One lexical-decision response.

    Group FI means the stimulus was an existing word; the other groups are
    non-words attributed to the model that ranked them highest.
    """

    rater_id: str
    l1: str
    proficiency: str
    word: str
    group: str
    response: str
    rt_seconds: float

    def __post_init__(self) -> None:
        if self.proficiency not in PROFICIENCIES:
            raise ValueError(f"proficiency must be one of {PROFICIENCIES}")
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}")
        if self.response not in (ACCEPT, REJECT):
            raise ValueError("response must be ACCEPT or REJECT")
        if not self.rt_seconds > 0:
            raise ValueError("rt_seconds must be positive")


@dataclass
class ReactionCell:
    """Reaction-time means for one (rater, group) cell.

    A mean of 0 on either side means the rater never gave that response in
    this group; the combined mean is over all trials of the cell, not the
    midpoint of the two sides.
    """

    reject_mean: float
    accept_mean: float
    combined_mean: float
    n_reject: int
    n_accept: int

    @property
    def n_total(self) -> int:
        return self.n_reject + self.n_accept


@dataclass
class RaterGroupStats:
    cells: dict[tuple[str, str], ReactionCell] = field(default_factory=dict)
    rater_order: list[str] = field(default_factory=list)

    def raters(self) -> list[str]:
        return list(self.rater_order)

    def get(self, rater: str, group: str) -> ReactionCell | None:
        return self.cells.get((rater, group))


def _is_correct(record: TrialRecord) -> bool:
    if record.group == "FI":
        return record.response == ACCEPT
    return record.response == REJECT


def accuracy(records: Iterable[TrialRecord]) -> dict[str, dict[str, float]]:
    """Per (rater, group) percentage of correct responses.

    Correct means rejecting a non-word (DE/EN/SV) or accepting an existing
    word (FI). Cells with no trials are simply absent.
    """
    correct: dict[tuple[str, str], int] = {}
    totals: dict[tuple[str, str], int] = {}
    order: list[str] = []
    for record in records:
        key = (record.rater_id, record.group)
        totals[key] = totals.get(key, 0) + 1
        if _is_correct(record):
            correct[key] = correct.get(key, 0) + 1
        if record.rater_id not in order:
            order.append(record.rater_id)
    table: dict[str, dict[str, float]] = {rater: {} for rater in order}
    for (rater, group), total in totals.items():
        table[rater][group] = 100.0 * correct.get((rater, group), 0) / total
    return table


def group_reaction_times(records: Iterable[TrialRecord]) -> RaterGroupStats:
    """Means per (rater, group, response) plus the combined mean per cell."""
    sums: dict[tuple[str, str], dict[str, float]] = {}
    counts: dict[tuple[str, str], dict[str, int]] = {}
    order: list[str] = []
    for record in records:
        key = (record.rater_id, record.group)
        cell_sums = sums.setdefault(key, {ACCEPT: 0.0, REJECT: 0.0})
        cell_counts = counts.setdefault(key, {ACCEPT: 0, REJECT: 0})
        cell_sums[record.response] += record.rt_seconds
        cell_counts[record.response] += 1
        if record.rater_id not in order:
            order.append(record.rater_id)
    stats = RaterGroupStats(rater_order=order)
    for key, cell_counts in counts.items():
        cell_sums = sums[key]
        n_reject, n_accept = cell_counts[REJECT], cell_counts[ACCEPT]
        reject_mean = cell_sums[REJECT] / n_reject if n_reject else 0.0
        accept_mean = cell_sums[ACCEPT] / n_accept if n_accept else 0.0
        combined = (cell_sums[REJECT] + cell_sums[ACCEPT]) / (n_reject + n_accept)
        stats.cells[key] = ReactionCell(
            reject_mean=reject_mean,
            accept_mean=accept_mean,
            combined_mean=combined,
            n_reject=n_reject,
            n_accept=n_accept,
        )
    return stats


def combined_means(stats: RaterGroupStats) -> dict[str, dict[str, float]]:
    """Rater -> group -> combined mean, the input normalized_average wants."""
    table: dict[str, dict[str, float]] = {}
    for (rater, group), cell in stats.cells.items():
        table.setdefault(rater, {})[group] = cell.combined_mean
    return table


def normalized_average(
    per_rater_group_means: Mapping[str, Mapping[str, float]],
    groups: Sequence[str] | None = None,
) -> dict[str, float]:
    """Dimensionless per-group averages with per-rater speed factored out.

    Each rater's group means are divided by that rater's mean over all
    groups in scope; the normalized values are then averaged across raters.
    Every rater must have a mean for every group in scope.
    """
    if not per_rater_group_means:
        raise AnalysisError("no raters to average over")
    if groups is None:
        scope: list[str] = []
        for rater_means in per_rater_group_means.values():
            for group in rater_means:
                if group not in scope:
                    scope.append(group)
    else:
        scope = list(groups)
    if not scope:
        raise AnalysisError("no groups to average over")
    sums = {group: 0.0 for group in scope}
    for rater, rater_means in per_rater_group_means.items():
        for group in scope:
            if group not in rater_means:
                raise MissingCellError(rater, group)
        rater_average = sum(rater_means[group] for group in scope) / len(scope)
        if rater_average == 0:
            raise AnalysisError(f"rater {rater!r} has an all-zero mean of means")
        for group in scope:
            sums[group] += rater_means[group] / rater_average
    n_raters = len(per_rater_group_means)
    return {group: sums[group] / n_raters for group in scope}


CELL_KINDS = ("reject", "accept", "combined")


def normalized_cell_averages(
    stats: RaterGroupStats,
    raters: Sequence[str] | None = None,
    groups: Sequence[str] = GROUPS,
) -> dict[str, dict[str, float]]:
    """Normalized averages over the full (group x response-kind) grid.

    Zero cells (a side the rater never used) are sentinels, not times, so
    they are excluded both from the rater's mean of means and from the
    column averages. Returns group -> kind -> value; a column nobody
    contributed to is absent.
    """
    chosen = stats.raters() if raters is None else list(raters)
    sums: dict[tuple[str, str], float] = {}
    counts: dict[tuple[str, str], int] = {}
    for rater in chosen:
        values: dict[tuple[str, str], float] = {}
        for group in groups:
            cell = stats.get(rater, group)
            if cell is None:
                continue
            if cell.n_reject:
                values[(group, "reject")] = cell.reject_mean
            if cell.n_accept:
                values[(group, "accept")] = cell.accept_mean
            values[(group, "combined")] = cell.combined_mean
        if not values:
            continue
        rater_average = sum(values.values()) / len(values)
        for column, value in values.items():
            sums[column] = sums.get(column, 0.0) + value / rater_average
            counts[column] = counts.get(column, 0) + 1
    table: dict[str, dict[str, float]] = {}
    for (group, kind), total in sums.items():
        table.setdefault(group, {})[kind] = total / counts[(group, kind)]
    return table


def filter_by_proficiency(
    records: Iterable[TrialRecord], allowed: Iterable[str]
) -> list[TrialRecord]:
    """Keep trials from raters at the given proficiency levels."""
    allowed_set = set(allowed)
    bad = allowed_set - set(PROFICIENCIES)
    if bad:
        raise ValueError(f"unknown proficiency levels: {sorted(bad)}")
    kept = [record for record in records if record.proficiency in allowed_set]
    if not kept:
        raise AnalysisError("no raters remain after the proficiency filter")
    return kept


def rater_proficiencies(records: Iterable[TrialRecord]) -> dict[str, str]:
    """First-seen proficiency per rater, in appearance order."""
    table: dict[str, str] = {}
    for record in records:
        table.setdefault(record.rater_id, record.proficiency)
    return table


def read_trials_csv(source: str | Path | TextIO) -> list[TrialRecord]:
    """Parse a trial log CSV with the canonical seven-column header."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as stream:
            return read_trials_csv(stream)
    reader = csv.DictReader(source)
    if reader.fieldnames is None or list(reader.fieldnames) != TRIALS_CSV_HEADER:
        raise InputFormatError(
            f"expected header {','.join(TRIALS_CSV_HEADER)}, "
            f"got {reader.fieldnames}"
        )
    records = []
    for row_number, row in enumerate(reader, start=2):
        try:
            records.append(
                TrialRecord(
                    rater_id=row["rater_id"],
                    l1=row["l1"],
                    proficiency=row["proficiency"].strip().upper(),
                    word=row["word"],
                    group=row["group"].strip().upper(),
                    response=row["response"].strip().upper(),
                    rt_seconds=float(row["rt_seconds"]),
                )
            )
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"row {row_number}: {exc}") from exc
    return records


def write_trials_csv(records: Iterable[TrialRecord], stream: TextIO) -> None:
    writer = csv.writer(stream)
    writer.writerow(TRIALS_CSV_HEADER)
    for record in records:
        writer.writerow(
            [
                record.rater_id,
                record.l1,
                record.proficiency,
                record.word,
                record.group,
                record.response,
                record.rt_seconds,
            ]
        )
