"""Score rankings against graded relevance judgments.

Judgments grade each channel 0-2; grade 2 (by default) counts as relevant,
everything else - including channels nobody judged - as irrelevant. Three
metrics: precision at a cutoff, average precision within the cutoff, and
reciprocal rank of the first relevant entry. All of them depend only on the
sequence of relevance booleans down the ranking.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from .errors import EmptyInput, EmptyRanking, FormatError
from .rank import RankedList

VALID_GRADES = (0, 1, 2)

JUDGMENT_CSV_HEADER = ["node", "grade"]


@dataclass(frozen=True)
class JudgmentSet:
    """node -> grade map on the 0-2 scale with a relevance threshold."""

    grades: dict[str, int]
    relevance_threshold: int = 2

    def __post_init__(self):
        for node, grade in self.grades.items():
            if grade not in VALID_GRADES:
                raise ValueError(f"grade for {node!r} must be one of {VALID_GRADES}, got {grade}")

    def is_relevant(self, node: str) -> bool:
        grade = self.grades.get(node)
        return grade is not None and grade >= self.relevance_threshold

    def relevant_total(self) -> int:
        return sum(1 for g in self.grades.values() if g >= self.relevance_threshold)


@dataclass(frozen=True)
class MetricReport:
    method: str
    k: int
    precision: float
    average_precision: float
    reciprocal_rank: float
    relevant_found: int
    relevant_total: int


def _check_nonempty(ranked: RankedList) -> None:
    if not ranked.entries:
        raise EmptyRanking(f"ranking {ranked.method!r} has no entries")


def _relevance_flags(ranked: RankedList, judgments: JudgmentSet) -> list[bool]:
    return [judgments.is_relevant(e.node) for e in ranked.entries]


def precision_at_k(ranked: RankedList, judgments: JudgmentSet, k: int) -> float:
    """Fraction of the first min(k, N) entries that are relevant."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _check_nonempty(ranked)
    cutoff = min(k, len(ranked.entries))
    hits = sum(_relevance_flags(ranked, judgments)[:cutoff])
    return hits / cutoff


def average_precision(ranked: RankedList, judgments: JudgmentSet, k: int) -> float:
    """Mean of precision-at-r over the relevant ranks r within the cutoff.

    Normalized by the number of relevant entries inside the cutoff, so a
    cutoff list with relevance packed at the top scores 1.0; returns 0 when
    nothing inside the cutoff is relevant.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _check_nonempty(ranked)
    cutoff = min(k, len(ranked.entries))
    flags = _relevance_flags(ranked, judgments)[:cutoff]
    hits = 0
    total = 0.0
    for rank, relevant in enumerate(flags, start=1):
        if relevant:
            hits += 1
            total += hits / rank
    if hits == 0:
        return 0.0
    return total / hits


def reciprocal_rank(ranked: RankedList, judgments: JudgmentSet) -> float:
    """1/r for the first relevant rank r; 0 when nothing is relevant."""
    _check_nonempty(ranked)
    for rank, relevant in enumerate(_relevance_flags(ranked, judgments), start=1):
        if relevant:
            return 1.0 / rank
    return 0.0


def mean_reciprocal_rank(rankings: Iterable[RankedList], judgments: JudgmentSet) -> float:
    values = [reciprocal_rank(r, judgments) for r in rankings]
    if not values:
        raise EmptyInput("mean reciprocal rank needs at least one ranking")
    return sum(values) / len(values)


def evaluate(ranked: RankedList, judgments: JudgmentSet, k: int) -> MetricReport:
    """Bundle all three metrics plus relevance counts into one report."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _check_nonempty(ranked)
    cutoff = min(k, len(ranked.entries))
    found = sum(_relevance_flags(ranked, judgments)[:cutoff])
    return MetricReport(
        method=ranked.method,
        k=k,
        precision=precision_at_k(ranked, judgments, k),
        average_precision=average_precision(ranked, judgments, k),
        reciprocal_rank=reciprocal_rank(ranked, judgments),
        relevant_found=found,
        relevant_total=judgments.relevant_total(),
    )


def read_judgments_csv(
    source: str | Path | IO,
    relevance_threshold: int = 2,
) -> JudgmentSet:
    """Load a ``node,grade`` CSV. Duplicate node rows are an error."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            lines = fh.read().splitlines()
    else:
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        lines = data.splitlines()
    reader = csv.reader(lines)
    rows = iter(reader)
    try:
        header = next(rows)
    except StopIteration:
        return JudgmentSet(grades={}, relevance_threshold=relevance_threshold)
    if header != JUDGMENT_CSV_HEADER:
        raise FormatError(1, f"expected header {','.join(JUDGMENT_CSV_HEADER)!r}, got {','.join(header)!r}")
    grades: dict[str, int] = {}
    for row in rows:
        line_no = reader.line_num
        if len(row) != 2:
            raise FormatError(line_no, f"expected 2 columns, got {len(row)}")
        node, raw_grade = row
        if node in grades:
            raise FormatError(line_no, f"duplicate judgment for node {node!r}")
        try:
            grade = int(raw_grade)
        except ValueError:
            raise FormatError(line_no, f"grade {raw_grade!r} is not an integer") from None
        if grade not in VALID_GRADES:
            raise FormatError(line_no, f"grade must be 0-2, got {grade}")
        grades[node] = grade
    return JudgmentSet(grades=grades, relevance_threshold=relevance_threshold)


def write_judgments_csv(judgments: JudgmentSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(JUDGMENT_CSV_HEADER)
        for node in sorted(judgments.grades):
            writer.writerow([node, judgments.grades[node]])


def report_to_dict(report: MetricReport) -> dict:
    return {
        "method": report.method,
        "k": report.k,
        "precision": report.precision,
        "average_precision": report.average_precision,
        "reciprocal_rank": report.reciprocal_rank,
        "relevant_found": report.relevant_found,
        "relevant_total": report.relevant_total,
    }


def write_report_json(report: MetricReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
