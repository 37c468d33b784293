"""Aggregate interaction records into a weighted directed rating graph.

Edge weight = number of times rater i mentioned ratee j inside the time
window. The graph is the sparse home of those counts; it stays immutable
after construction so rankings can share it freely.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

from .errors import FormatError, UnknownNode
from .ingest import InteractionRecord, valid_handle

GRAPH_CSV_HEADER = ["rater", "ratee", "weight"]


@dataclass(frozen=True)
class TimeWindow:
    """Half-open interval [start, end) in UTC epoch seconds.

    Half-open so consecutive windows partition time without double counting.
    The default window is unbounded (end = +inf).
    """

    start: int = 0
    end: float = math.inf

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"window start {self.start} must be < end {self.end}")

    def contains(self, timestamp: int) -> bool:
        return self.start <= timestamp < self.end

    @property
    def unbounded(self) -> bool:
        return self.start == 0 and math.isinf(self.end)


UNBOUNDED = TimeWindow()


@dataclass(frozen=True)
class RatingGraph:
    """Weighted directed mention graph over a time window.

    ``nodes`` is lexicographically sorted; that ordering anchors every
    deterministic downstream artifact. Absent edge means weight 0; stored
    edges always have weight >= 1 and never form self-loops.
    """

    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], int]
    window: TimeWindow = field(default=UNBOUNDED)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def total_weight(self) -> int:
        return sum(self.edges.values())

    def sorted_edges(self) -> list[tuple[str, str, int]]:
        """Edges as (rater, ratee, weight) sorted by (rater, ratee)."""
        return [(i, j, w) for (i, j), w in sorted(self.edges.items())]


def build_graph(records: Iterable[InteractionRecord], window: TimeWindow = UNBOUNDED) -> RatingGraph:
    """Count mentions per (rater, ratee) pair among records inside the window.

    The node set is every identifier appearing as rater or ratee in a
    retained record; pure raters are kept (they supply reputation even with
    zero inflow). Record order does not matter.
    """
    counts: Counter[tuple[str, str]] = Counter()
    nodes: set[str] = set()
    for rec in records:
        if not window.contains(rec.timestamp):
            continue
        counts[(rec.rater, rec.ratee)] += 1
        nodes.add(rec.rater)
        nodes.add(rec.ratee)
    return RatingGraph(nodes=tuple(sorted(nodes)), edges=dict(counts), window=window)


def from_edge_counts(
    counts: Mapping[tuple[str, str], int],
    window: TimeWindow = UNBOUNDED,
) -> RatingGraph:
    """Build a graph from pre-aggregated (rater, ratee) -> weight counts.

    Equivalent to build_graph on a record stream that repeats each pair
    ``weight`` times inside the window.
    """
    nodes: set[str] = set()
    edges: dict[tuple[str, str], int] = {}
    for (rater, ratee), weight in counts.items():
        if rater == ratee:
            raise ValueError(f"self-loop edge {rater!r} is not allowed")
        if weight < 1:
            raise ValueError(f"edge weight must be >= 1, got {weight} for {(rater, ratee)}")
        edges[(rater, ratee)] = int(weight)
        nodes.add(rater)
        nodes.add(ratee)
    return RatingGraph(nodes=tuple(sorted(nodes)), edges=edges, window=window)


def in_weight(graph: RatingGraph, node: str) -> int:
    """Total mention count flowing into ``node`` (the raw popularity signal)."""
    if node not in graph.nodes:
        raise UnknownNode(node)
    return sum(w for (_, ratee), w in graph.edges.items() if ratee == node)


def in_weights(graph: RatingGraph) -> dict[str, int]:
    """Inflow totals for every node at once; pure raters get 0."""
    totals = dict.fromkeys(graph.nodes, 0)
    for (_, ratee), w in graph.edges.items():
        totals[ratee] += w
    return totals


def write_graph_csv(graph: RatingGraph, path: str | Path) -> None:
    """Snapshot the edge counts, rows sorted by (rater, ratee)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRAPH_CSV_HEADER)
        for rater, ratee, weight in graph.sorted_edges():
            writer.writerow([rater, ratee, weight])


def read_graph_csv(source: str | Path | IO, window: TimeWindow = UNBOUNDED) -> RatingGraph:
    """Load a graph snapshot. The snapshot stores no window, so the caller
    supplies the one the counts were aggregated over (default unbounded)."""
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
        return RatingGraph(nodes=(), edges={}, window=window)
    if header != GRAPH_CSV_HEADER:
        raise FormatError(1, f"expected header {','.join(GRAPH_CSV_HEADER)!r}, got {','.join(header)!r}")
    counts: dict[tuple[str, str], int] = {}
    for row in rows:
        line_no = reader.line_num
        if len(row) != 3:
            raise FormatError(line_no, f"expected 3 columns, got {len(row)}")
        rater, ratee, raw_w = row
        if not valid_handle(rater) or not valid_handle(ratee):
            raise FormatError(line_no, f"invalid handle in edge {rater!r} -> {ratee!r}")
        if rater == ratee:
            raise FormatError(line_no, f"self-loop edge {rater!r}")
        try:
            weight = int(raw_w)
        except ValueError:
            raise FormatError(line_no, f"weight {raw_w!r} is not an integer") from None
        if weight < 1:
            raise FormatError(line_no, f"weight must be >= 1, got {weight}")
        if (rater, ratee) in counts:
            raise FormatError(line_no, f"duplicate edge {rater!r} -> {ratee!r}")
        counts[(rater, ratee)] = weight
    return from_edge_counts(counts, window)
