"""Sensitive-data ingestion and counting queries.

An :class:`EventLog` is a partitioned database of categorical events. Counting
a partition gives a :class:`CountVector` (a point of the simplex on the 1/N
grid); counting every partition of a square log gives the empirical transition
matrix wrapped as :class:`TransitionCounts`.
"""

from __future__ import annotations

import csv
import math
import warnings
from collections import Counter
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import MappingError, ShapeError, ValidationError, ZeroCountWarning

__all__ = [
    "CategorySet",
    "EventLog",
    "CountVector",
    "TransitionCounts",
    "ChainDiagnostics",
    "count_query",
    "transition_counts",
    "merge_partitions",
    "merge_categories",
    "validate_chain_structure",
    "read_vector_csv",
    "read_chain_csv",
    "read_merge_map",
    "write_vector_csv",
    "write_chain_csv",
]


@dataclass(frozen=True)
class CategorySet:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(labels) < 3:
            raise ValidationError(f"need at least 3 categories, got {len(labels)}")
        if len(set(labels)) != len(labels):
            dupes = sorted(k for k, v in Counter(labels).items() if v > 1)
            raise ValidationError(f"duplicate category labels: {dupes}")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class EventLog:
    """Partitioned event database; one label per event record."""

    partitions: tuple[tuple[str, ...], ...]
    partition_ids: tuple[str, ...]

    def __post_init__(self):
        parts = tuple(tuple(str(e) for e in p) for p in self.partitions)
        ids = tuple(str(i) for i in self.partition_ids)
        if len(parts) != len(ids):
            raise ShapeError(f"{len(parts)} partitions but {len(ids)} partition ids")
        if len(set(ids)) != len(ids):
            raise ValidationError("partition ids must be distinct")
        for pid, p in zip(ids, parts):
            if not p:
                raise ValidationError(f"partition {pid!r} is empty")
        object.__setattr__(self, "partitions", parts)
        object.__setattr__(self, "partition_ids", ids)

    @classmethod
    def single(cls, events: Iterable[str], partition_id: str = "all") -> "EventLog":
        return cls((tuple(events),), (partition_id,))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.partitions)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    def partition(self, pid: str) -> tuple[str, ...]:
        return self.partitions[self.partition_ids.index(pid)]


@dataclass(frozen=True, eq=False)
class CountVector:
    """Normalised category counts of one partition.

    ``eta`` is the border parameter this vector is tagged with; the vector is
    *bordered* when every entry is at least ``eta`` and ``eta > 0``.
    """

    counts: np.ndarray
    labels: tuple[str, ...]
    eta: float
    probs: np.ndarray = field(init=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).copy()
        if counts.ndim != 1 or counts.size != len(self.labels):
            raise ShapeError("counts must be a vector with one entry per label")
        if np.any(counts < 0) or counts.sum() <= 0:
            raise ValidationError("counts must be non-negative with a positive total")
        counts.setflags(write=False)
        probs = counts / counts.sum()
        probs.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "eta", float(self.eta))
        smallest = probs[probs > 0].min()
        if self.eta < 0 or self.eta > smallest + 1e-15:
            raise ValidationError(f"eta={self.eta} exceeds the smallest positive entry {smallest}")

    @property
    def N(self) -> int:
        return int(self.counts.sum())

    @property
    def n(self) -> int:
        return self.counts.size

    @property
    def has_zero(self) -> bool:
        return bool(np.any(self.counts == 0))

    @property
    def bordered(self) -> bool:
        return bool(self.eta > 0 and not self.has_zero and self.probs.min() >= self.eta - 1e-15)

    def with_eta(self, eta: float) -> "CountVector":
        return CountVector(self.counts, self.labels, eta)

    def __eq__(self, other):
        if not isinstance(other, CountVector):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.eta == other.eta
            and np.array_equal(self.counts, other.counts)
        )

    def __repr__(self):
        return f"CountVector(N={self.N}, n={self.n}, eta={self.eta:.6g}, bordered={self.bordered})"


def default_eta(counts: np.ndarray, slack: bool = False) -> float:
    """Smallest positive fraction; with ``slack`` the next multiple of 1/(4N) strictly below it."""
    counts = np.asarray(counts)
    N = int(counts.sum())
    positive = counts[counts > 0]
    c = int(positive.min())
    if slack:
        return (4 * c - 1) / (4 * N)
    return c / N


def count_query(
    partition: Sequence[str],
    categories: CategorySet,
    eta: float | None = None,
    *,
    slack: bool = False,
    pseudo_count: bool = False,
) -> CountVector:
    """Fraction of records of ``partition`` falling in each category.

    ``eta`` defaults to the smallest positive fraction. Categories with no
    records trigger :class:`ZeroCountWarning`; pass ``pseudo_count=True`` to add
    one record to every category instead.
    """
    if len(partition) == 0:
        raise ValidationError("cannot count an empty partition")
    index = {lab: i for i, lab in enumerate(categories.labels)}
    counts = np.zeros(len(categories), dtype=np.int64)
    for pos, label in enumerate(partition):
        try:
            counts[index[label]] += 1
        except KeyError:
            raise ValidationError(f"record {pos} has unknown category {label!r}") from None
    if pseudo_count:
        counts += 1
    if np.any(counts == 0):
        missing = [categories.labels[i] for i in np.flatnonzero(counts == 0)]
        warnings.warn(
            f"categories {missing} have no records; the counts lie in no bordered simplex "
            "with eta > 0 (merge categories or opt into pseudo counts)",
            ZeroCountWarning,
            stacklevel=2,
        )
    ceiling = default_eta(counts)
    if eta is None:
        eta = default_eta(counts, slack)
    elif eta > ceiling + 1e-15:
        raise ValidationError(f"eta={eta} exceeds the smallest positive fraction {ceiling}")
    return CountVector(counts, categories.labels, eta)


@dataclass(frozen=True, eq=False)
class TransitionCounts:
    """Row ``i`` counts the destinations of the events leaving state ``i``."""

    rows: tuple[CountVector, ...]
    states: CategorySet

    def __post_init__(self):
        rows = tuple(self.rows)
        if len(rows) != len(self.states):
            raise ShapeError(f"{len(rows)} rows for {len(self.states)} states")
        for r in rows:
            if r.labels != self.states.labels:
                raise ShapeError("row labels must match the state labels")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack([r.probs for r in self.rows])

    @property
    def count_matrix(self) -> np.ndarray:
        return np.vstack([r.counts for r in self.rows])

    @property
    def Ns(self) -> np.ndarray:
        return np.array([r.N for r in self.rows])

    @property
    def etas(self) -> np.ndarray:
        return np.array([r.eta for r in self.rows])

    def __eq__(self, other):
        if not isinstance(other, TransitionCounts):
            return NotImplemented
        return self.states == other.states and all(a == b for a, b in zip(self.rows, other.rows))


def transition_counts(
    log: EventLog,
    categories: CategorySet,
    eta: float | Sequence[float] | None = None,
    *,
    slack: bool = False,
    pseudo_count: bool = False,
) -> TransitionCounts:
    """Empirical transition matrix: partition ``i`` holds the departures from state ``i``."""
    if len(log.partitions) != len(categories):
        raise ShapeError(
            f"a transition matrix needs one partition per state: "
            f"{len(log.partitions)} partitions, {len(categories)} states"
        )
    if set(log.partition_ids) != set(categories.labels):
        missing = sorted(set(categories.labels) - set(log.partition_ids))
        extra = sorted(set(log.partition_ids) - set(categories.labels))
        raise ShapeError(f"partition ids do not match states (missing {missing}, unexpected {extra})")
    etas = [eta] * len(categories) if eta is None or np.ndim(eta) == 0 else list(eta)
    if len(etas) != len(categories):
        raise ShapeError("one eta per row is required")
    rows = []
    for label, e in zip(categories.labels, etas):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            row = count_query(log.partition(label), categories, e, slack=slack, pseudo_count=pseudo_count)
        for w in caught:
            warnings.warn(f"row {label!r}: {w.message}", w.category, stacklevel=2)
        rows.append(row)
    return TransitionCounts(tuple(rows), categories)


def merge_categories(categories: CategorySet, mapping: Mapping[str, str]) -> CategorySet:
    """Image of ``categories`` under ``mapping``, in order of first appearance."""
    unmapped = [lab for lab in categories.labels if lab not in mapping]
    if unmapped:
        raise MappingError(f"merge map does not cover labels {unmapped}")
    image = list(dict.fromkeys(mapping[lab] for lab in categories.labels))
    if len(image) < 3:
        raise MappingError(f"merged category set has {len(image)} labels; at least 3 are required")
    return CategorySet(tuple(image))


def merge_partitions(log: EventLog, mapping: Mapping[str, str]) -> EventLog:
    """Relabel every event through ``mapping``.

    If the partition ids are mapped as well (as in a transition log, where ids
    are states), partitions sharing a new id are concatenated in their original
    order. Partition ids absent from ``mapping`` are kept, but only when no id
    is mapped. The total number of events is unchanged.
    """
    events = set()
    for p in log.partitions:
        events.update(p)
    unmapped = sorted(events - set(mapping))
    if unmapped:
        raise MappingError(f"merge map does not cover labels {unmapped}")
    image = {mapping[lab] for lab in events}
    if len(image) < 3:
        raise MappingError(f"merged category set has {len(image)} labels; at least 3 are required")
    mapped_ids = [pid in mapping for pid in log.partition_ids]
    if any(mapped_ids) and not all(mapped_ids):
        missing = [pid for pid, m in zip(log.partition_ids, mapped_ids) if not m]
        raise MappingError(f"merge map covers some partition ids but not {missing}")
    relabel = all(mapped_ids)

    merged: dict[str, list[str]] = {}
    for pid, part in zip(log.partition_ids, log.partitions):
        key = mapping[pid] if relabel else pid
        merged.setdefault(key, []).extend(mapping[e] for e in part)
    return EventLog(tuple(tuple(v) for v in merged.values()), tuple(merged))


@dataclass(frozen=True)
class ChainDiagnostics:
    irreducible: bool
    positive: bool
    zero_entries: tuple[tuple[str, str], ...]
    no_incoming: tuple[str, ...]
    messages: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.irreducible and self.positive


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[start] = True
    frontier = seen.copy()
    while frontier.any():
        nxt = adj[frontier].any(axis=0) & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def is_irreducible(P: np.ndarray) -> bool:
    """Strong connectivity of the digraph with an edge i -> j wherever P[i, j] > 0."""
    adj = np.asarray(P) > 0
    return bool(_reachable(adj, 0).all() and _reachable(adj.T, 0).all())


def validate_chain_structure(tc: TransitionCounts) -> ChainDiagnostics:
    """Check irreducibility and strict positivity of the empirical transition matrix."""
    P = tc.matrix
    labels = tc.states.labels
    irreducible = is_irreducible(P)
    zeros = tuple((labels[i], labels[j]) for i, j in zip(*np.nonzero(P <= 0)))
    positive = not zeros
    incoming = (P > 0) & ~np.eye(len(labels), dtype=bool)
    no_incoming = tuple(labels[j] for j in range(len(labels)) if not incoming[:, j].any())
    msgs = []
    if not irreducible:
        msgs.append("chain is reducible: some state cannot reach another")
    if not positive:
        msgs.append(
            f"{len(zeros)} zero transition(s); bordered-simplex admission would need eta <= 0 "
            "(merge states or use pseudo counts)"
        )
    if no_incoming:
        msgs.append(f"states with no incoming transitions from other states: {list(no_incoming)}")
    return ChainDiagnostics(irreducible, positive, zeros, no_incoming, tuple(msgs))


# CSV ingestion -------------------------------------------------------------


def _read_rows(path, header: tuple[str, ...]) -> list[list[str]]:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ValidationError(f"{path} is empty") from None
        if tuple(c.strip() for c in first) != header:
            raise ValidationError(f"{path}: expected header {','.join(header)!r}, got {','.join(first)!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            cells = [c.strip() for c in row]
            for c in cells:
                if "," in c:
                    raise ValidationError(f"{path}:{lineno}: labels may not contain commas ({c!r})")
                if not c:
                    raise ValidationError(f"{path}:{lineno}: empty label")
            rows.append(cells)
    return rows


def read_vector_csv(path) -> list[str]:
    """Events of a single-partition log; header ``category``."""
    return [r[0] for r in _read_rows(path, ("category",))]


def read_chain_csv(path) -> tuple[EventLog, CategorySet]:
    """Transition events with header ``from_state,to_state``.

    The from-state column induces the partition. States are ordered by first
    appearance in the file (either column).
    """
    rows = _read_rows(path, ("from_state", "to_state"))
    if not rows:
        raise ValidationError(f"{path} has no events")
    states = list(dict.fromkeys(s for r in rows for s in r))
    parts: dict[str, list[str]] = {s: [] for s in states}
    for src, dst in rows:
        parts[src].append(dst)
    empty = [s for s, p in parts.items() if not p]
    if empty:
        raise ValidationError(f"states with no outgoing events: {empty}")
    log = EventLog(tuple(tuple(parts[s]) for s in states), tuple(states))
    return log, CategorySet(tuple(states))


def read_merge_map(path) -> dict[str, str]:
    rows = _read_rows(path, ("old_label", "new_label"))
    mapping: dict[str, str] = {}
    for old, new in rows:
        if old in mapping and mapping[old] != new:
            raise MappingError(f"label {old!r} is mapped twice")
        mapping[old] = new
    return mapping


def _sink(target):
    if hasattr(target, "write"):
        return nullcontext(target)
    return Path(target).open("w", newline="", encoding="utf-8")


def write_vector_csv(target, events: Iterable[str]) -> None:
    """Write events to a path or text stream."""
    with _sink(target) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["category"])
        w.writerows([e] for e in events)


def write_chain_csv(target, log: EventLog) -> None:
    """Write a transition log (partition id = from-state) to a path or text stream."""
    with _sink(target) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["from_state", "to_state"])
        for pid, part in zip(log.partition_ids, log.partitions):
            w.writerows([pid, e] for e in part)


def is_grid_vector(probs: np.ndarray, N: int, tol: float = 1e-12) -> bool:
    scaled = np.asarray(probs) * N
    return bool(np.all(np.abs(scaled - np.round(scaled)) <= tol * N)) and math.isclose(
        float(np.sum(probs)), 1.0, abs_tol=1e-12
    )
