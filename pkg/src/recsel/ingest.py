"""Rating-data and performance-table ingestion.

Rating files are UTF-8 CSV with columns ``user,item,rating`` and an
optional header line.  Performance files have columns
``dataset,algorithm,measure,value``.  User and item ids are arbitrary
strings; they are densified to integer indices in first-seen order so
downstream code can work with contiguous arrays.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, TextIO

from .errors import (
    DuplicateRating,
    IncompleteTable,
    MalformedLine,
    OutOfScale,
    UnknownMeasure,
)

DEFAULT_SCALE = (1.0, 5.0)

HIGHER_BETTER = "higher-better"
LOWER_BETTER = "lower-better"


@dataclass(frozen=True)
class RatingDataset:
    """A collaborative-filtering problem instance.

    ``users`` and ``items`` hold the original string ids in first-seen
    order; ``ratings`` holds ``(user_index, item_index, value)`` triples
    referring to positions in those tuples.  Each (user, item) pair
    appears at most once and every value lies within ``scale``.
    """

    name: str
    users: tuple[str, ...]
    items: tuple[str, ...]
    ratings: tuple[tuple[int, int, float], ...]
    scale: tuple[float, float] = DEFAULT_SCALE

    def __post_init__(self):
        lo, hi = self.scale
        seen = set()
        for u, i, v in self.ratings:
            if not (0 <= u < len(self.users) and 0 <= i < len(self.items)):
                raise MalformedLine(f"rating refers to unknown user/item index ({u}, {i})")
            if (u, i) in seen:
                raise DuplicateRating(f"duplicate rating for ({self.users[u]}, {self.items[i]})")
            seen.add((u, i))
            if not (lo <= v <= hi) or not math.isfinite(v):
                raise OutOfScale(f"rating {v} outside scale [{lo}, {hi}]")

    @property
    def n_ratings(self) -> int:
        return len(self.ratings)

    def user_index(self) -> dict[str, int]:
        return {u: k for k, u in enumerate(self.users)}

    def item_index(self) -> dict[str, int]:
        return {i: k for k, i in enumerate(self.items)}


@dataclass(frozen=True)
class BipartiteGraph:
    """Weighted user-item graph.

    Node names carry a ``u:`` / ``i:`` partition prefix so the two node
    sets can never collide.  ``weight_range`` preserves the rating scale
    of the source dataset so that edge-weight bucketing stays comparable
    across graphs; when absent, consumers fall back to the observed
    weight range.
    """

    user_nodes: tuple[str, ...]
    item_nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    weight_range: tuple[float, float] | None = None

    def __post_init__(self):
        users = set(self.user_nodes)
        items = set(self.item_nodes)
        if users & items:
            raise MalformedLine("user and item node sets overlap")
        seen = set()
        for u, i, w in self.edges:
            if u not in users or i not in items:
                raise MalformedLine(f"edge ({u}, {i}) does not connect the two partitions")
            if (u, i) in seen:
                raise DuplicateRating(f"parallel edge ({u}, {i})")
            seen.add((u, i))
            if not math.isfinite(w):
                raise OutOfScale(f"non-finite edge weight on ({u}, {i})")

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.user_nodes + self.item_nodes

    @property
    def n_nodes(self) -> int:
        return len(self.user_nodes) + len(self.item_nodes)

    def adjacency(self) -> dict[str, list[tuple[str, float]]]:
        """Neighbor lists for every node, in edge insertion order."""
        adj: dict[str, list[tuple[str, float]]] = {n: [] for n in self.nodes}
        for u, i, w in self.edges:
            adj[u].append((i, w))
            adj[i].append((u, w))
        return adj

    def induced(self, keep: set[str]) -> "BipartiteGraph":
        """Subgraph induced by ``keep``: those nodes plus edges with both ends kept."""
        return BipartiteGraph(
            user_nodes=tuple(n for n in self.user_nodes if n in keep),
            item_nodes=tuple(n for n in self.item_nodes if n in keep),
            edges=tuple(e for e in self.edges if e[0] in keep and e[1] in keep),
            weight_range=self.weight_range,
        )


def user_node(user_id: str) -> str:
    return "u:" + user_id


def item_node(item_id: str) -> str:
    return "i:" + item_id


@dataclass(frozen=True)
class PerformanceTable:
    """Baselevel scores: (dataset, algorithm, measure) -> value.

    Measure directions are always declared explicitly, never inferred.
    Within each dataset, every (dataset, algorithm) pair present for one
    measure must be present for all measures observed for that dataset.
    """

    entries: Mapping[tuple[str, str, str], float]
    directions: Mapping[str, str]

    def __post_init__(self):
        for measure, direction in self.directions.items():
            if direction not in (HIGHER_BETTER, LOWER_BETTER):
                raise UnknownMeasure(f"direction of {measure!r} must be "
                                     f"{HIGHER_BETTER!r} or {LOWER_BETTER!r}")
        per_dataset: dict[str, dict[str, set[str]]] = {}
        for (ds, alg, measure), value in self.entries.items():
            if measure not in self.directions:
                raise UnknownMeasure(f"no direction declared for measure {measure!r}")
            if not math.isfinite(value):
                raise OutOfScale(f"non-finite score for ({ds}, {alg}, {measure})")
            per_dataset.setdefault(ds, {}).setdefault(alg, set()).add(measure)
        for ds, algs in per_dataset.items():
            measures = set().union(*algs.values())
            for alg, have in algs.items():
                missing = measures - have
                if missing:
                    raise IncompleteTable(
                        f"dataset {ds!r}, algorithm {alg!r} missing measures {sorted(missing)}")

    def datasets(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for ds, _, _ in self.entries:
            seen.setdefault(ds)
        return tuple(seen)

    def algorithms(self, dataset: str) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for ds, alg, _ in self.entries:
            if ds == dataset:
                seen.setdefault(alg)
        return tuple(seen)

    def score(self, dataset: str, algorithm: str, measure: str) -> float:
        return self.entries[(dataset, algorithm, measure)]


def _rows(text: str | TextIO | Iterable[str]) -> Iterable[tuple[int, list[str]]]:
    if isinstance(text, str):
        text = io.StringIO(text)
    reader = csv.reader(text)
    for row in reader:
        yield reader.line_num, row


def parse_ratings(text: str | TextIO, scale: tuple[float, float] = DEFAULT_SCALE,
                  name: str = "dataset") -> RatingDataset:
    """Parse ``user,item,rating`` CSV rows into a :class:`RatingDataset`.

    A first line reading exactly ``user,item,rating`` is treated as a
    header.  Duplicate (user, item) pairs are a hard error: silently
    keeping one of the values would corrupt count-based features.
    """
    lo, hi = scale
    users: dict[str, int] = {}
    items: dict[str, int] = {}
    ratings: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    first = True
    for line_num, row in _rows(text):
        if not row:
            continue
        if first and [c.strip().lower() for c in row] == ["user", "item", "rating"]:
            first = False
            continue
        first = False
        if len(row) != 3:
            raise MalformedLine(f"line {line_num}: expected 3 fields, got {len(row)}")
        raw_user, raw_item, raw_value = row
        try:
            value = float(raw_value)
        except ValueError:
            raise MalformedLine(f"line {line_num}: non-numeric rating {raw_value!r}") from None
        if not math.isfinite(value) or not (lo <= value <= hi):
            raise OutOfScale(f"line {line_num}: rating {value} outside scale [{lo}, {hi}]")
        u = users.setdefault(raw_user, len(users))
        i = items.setdefault(raw_item, len(items))
        if (u, i) in seen:
            raise DuplicateRating(f"line {line_num}: duplicate rating for ({raw_user}, {raw_item})")
        seen.add((u, i))
        ratings.append((u, i, value))
    if not ratings:
        raise MalformedLine("no rating rows found")
    return RatingDataset(name=name, users=tuple(users), items=tuple(items),
                         ratings=tuple(ratings), scale=(float(lo), float(hi)))


def serialize_ratings(d: RatingDataset) -> str:
    """Inverse of :func:`parse_ratings` (given the same scale and name)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["user", "item", "rating"])
    for u, i, v in d.ratings:
        writer.writerow([d.users[u], d.items[i], repr(v)])
    return out.getvalue()


def to_bipartite_graph(d: RatingDataset) -> BipartiteGraph:
    """One node per user/item, one weighted edge per rating."""
    return BipartiteGraph(
        user_nodes=tuple(user_node(u) for u in d.users),
        item_nodes=tuple(item_node(i) for i in d.items),
        edges=tuple((user_node(d.users[u]), item_node(d.items[i]), v) for u, i, v in d.ratings),
        weight_range=d.scale,
    )


def parse_performance_table(text: str | TextIO, directions: Mapping[str, str]) -> PerformanceTable:
    """Parse ``dataset,algorithm,measure,value`` rows into a :class:`PerformanceTable`."""
    entries: dict[tuple[str, str, str], float] = {}
    first = True
    for line_num, row in _rows(text):
        if not row:
            continue
        if first and [c.strip().lower() for c in row] == ["dataset", "algorithm", "measure", "value"]:
            first = False
            continue
        first = False
        if len(row) != 4:
            raise MalformedLine(f"line {line_num}: expected 4 fields, got {len(row)}")
        ds, alg, measure, raw_value = row
        try:
            value = float(raw_value)
        except ValueError:
            raise MalformedLine(f"line {line_num}: non-numeric value {raw_value!r}") from None
        key = (ds, alg, measure)
        if key in entries:
            raise DuplicateRating(f"line {line_num}: duplicate cell {key}")
        entries[key] = value
    if not entries:
        raise MalformedLine("no performance rows found")
    return PerformanceTable(entries=entries, directions=dict(directions))


def serialize_performance_table(t: PerformanceTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["dataset", "algorithm", "measure", "value"])
    for (ds, alg, measure), value in t.entries.items():
        writer.writerow([ds, alg, measure, repr(value)])
    return out.getvalue()
