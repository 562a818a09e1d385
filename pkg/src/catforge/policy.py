"""Data-aware slot selection: decide which attribute to request next.

An attribute's score is the product of its Shannon entropy over the live
candidate set, the learned probability that users can answer it, a decay per
join hop, and a penalty if annotated avoid. The product form sends useless
questions (zero entropy, or nobody ever knows the answer) to the bottom and
keeps the argmax stable when all awareness estimates are rescaled.

Evaluation order inside the score is fixed (entropy, then awareness, then
decay, then penalty) so an independently written scorer reproduces the exact
floats, tie-breaks included.
"""

from __future__ import annotations

import json
import threading
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, UnknownColumn, UnknownTable, ValidationError
from .schema import Schema
from .store import CandidateSet, ColumnStats, Datastore


@dataclass(frozen=True)
class PolicyConfig:
    max_join_depth: int = 2
    depth_decay: float = 0.8
    list_threshold: int = 5  # offer a list instead of asking at or below this
    avoid_penalty: float = 0.1

    def __post_init__(self):
        if self.max_join_depth < 0:
            raise ValueError("max_join_depth must be >= 0")
        if not 0.0 < self.depth_decay <= 1.0:
            raise ValueError("depth_decay must be in (0, 1]")
        if self.list_threshold < 1:
            raise ValueError("list_threshold must be >= 1")
        if not 0.0 <= self.avoid_penalty <= 1.0:
            raise ValueError("avoid_penalty must be in [0, 1]")


@dataclass(frozen=True)
class PolicyDecision:
    kind: str  # "ask" | "offer_list" | "resolved" | "exhausted"
    attribute: str = ""
    score: float = 0.0
    rows: tuple = ()  # offer_list: candidate summaries
    entity: object = None  # resolved: the primary key
    remaining: int = 0  # exhausted: candidates left

    @classmethod
    def ask(cls, attribute: str, score: float) -> "PolicyDecision":
        return cls(kind="ask", attribute=attribute, score=score)

    @classmethod
    def offer_list(cls, rows) -> "PolicyDecision":
        return cls(kind="offer_list", rows=tuple(rows))

    @classmethod
    def resolved(cls, entity) -> "PolicyDecision":
        return cls(kind="resolved", entity=entity)

    @classmethod
    def exhausted(cls, remaining: int) -> "PolicyDecision":
        return cls(kind="exhausted", remaining=remaining)


class AwarenessModel:
    """Global per-attribute record of whether users could answer when asked.

    The estimate blends observed counts with the column's Beta-style prior:
    p = (answered + pseudo_known) / (asked + pseudo_asked), clamped just
    inside (0, 1) so degenerate priors cannot produce 0 or 1 exactly. One
    lock serializes writers; readers see atomic snapshots.
    """

    def __init__(self, schema: Schema):
        self.schema = schema
        self._counts: dict[str, tuple[int, int]] = {}  # attribute -> (asked, answered)
        self._lock = threading.Lock()

    def _require(self, attribute: str) -> None:
        table, _, column = attribute.partition(".")
        if not self.schema.has_table(table):
            raise UnknownTable(table)
        if not self.schema.table(table).has_column(column):
            raise UnknownColumn(table, column)

    def counts(self, attribute: str) -> tuple[int, int]:
        self._require(attribute)
        return self._counts.get(attribute, (0, 0))

    def estimate(self, attribute: str) -> float:
        asked, answered = self.counts(attribute)
        pseudo_known, pseudo_asked = self.schema.column(attribute).annotation.awareness_prior
        denominator = asked + pseudo_asked
        if denominator <= 0:
            return 0.5
        p = (answered + pseudo_known) / denominator
        floor = 1.0 / (denominator + 2)
        return min(max(p, floor), 1.0 - floor)

    def record(self, attribute: str, answered: bool) -> None:
        self._require(attribute)
        with self._lock:
            asked, known = self._counts.get(attribute, (0, 0))
            self._counts[attribute] = (asked + 1, known + 1 if answered else known)

    def to_dict(self) -> dict:
        return {
            "counts": {
                attribute: {"asked": asked, "answered": answered}
                for attribute, (asked, answered) in sorted(self._counts.items())
            }
        }

    @classmethod
    def from_dict(cls, schema: Schema, doc: dict, source: str = "<awareness>") -> "AwarenessModel":
        model = cls(schema)
        problems = []
        for attribute, entry in doc.get("counts", {}).items():
            try:
                model._require(attribute)
            except (UnknownTable, UnknownColumn):
                problems.append(f"awareness entry for unknown attribute {attribute!r}")
                continue
            asked = int(entry.get("asked", 0))
            answered = int(entry.get("answered", 0))
            if asked < 0 or answered < 0 or answered > asked:
                problems.append(
                    f"{attribute}: counts must satisfy 0 <= answered <= asked, "
                    f"got asked={asked} answered={answered}"
                )
                continue
            model._counts[attribute] = (asked, answered)
        if problems:
            raise ValidationError(problems)
        return model


def update_awareness(m: AwarenessModel, attribute: str, outcome: str) -> AwarenessModel:
    """Record one ask. outcome is "provided" or "unknown". Mutates m in place
    (single shared learner) and returns it."""
    if outcome not in ("provided", "unknown"):
        raise ValueError(f"outcome must be provided or unknown, got {outcome!r}")
    m.record(attribute, outcome == "provided")
    return m


def save_awareness(m: AwarenessModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(m.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_awareness(path: str | Path, schema: Schema) -> AwarenessModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(str(path), str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return AwarenessModel.from_dict(schema, doc, source=str(path))


def score_attributes(
    store: Datastore,
    c: CandidateSet,
    m: AwarenessModel,
    cfg: PolicyConfig,
    exclude: frozenset = frozenset(),
    stats=None,
) -> list[tuple[str, float]]:
    """Rank every requestable attribute reachable from the candidate base
    table. exclude drops attributes the session may no longer ask (already
    asked, or answered with "don't know"). stats may be a StatsCache.get."""
    if stats is None:
        def stats(cc, attribute):
            return store.column_stats(cc, attribute, max_depth=cfg.max_join_depth)
    ranked = []
    for attribute, depth in store.reachable_attributes(c.base_table, cfg.max_join_depth):
        preference = store.schema.column(attribute).annotation.request_preference
        if preference == "never" or attribute in exclude:
            continue
        entropy = stats(c, attribute).entropy_bits
        score = entropy * m.estimate(attribute) * cfg.depth_decay ** depth
        if preference == "avoid":
            score *= cfg.avoid_penalty
        ranked.append((attribute, score, depth))
    ranked.sort(key=lambda item: (-item[1], item[2], item[0]))
    return [(attribute, score) for attribute, score, _ in ranked]


def next_request(
    store: Datastore,
    c: CandidateSet,
    m: AwarenessModel,
    cfg: PolicyConfig,
    exclude: frozenset = frozenset(),
    stats=None,
) -> PolicyDecision:
    n = len(c)
    if n == 0:
        return PolicyDecision.exhausted(0)
    if n == 1:
        return PolicyDecision.resolved(next(iter(c.row_ids)))
    if n <= cfg.list_threshold:
        rows = store.summaries(c.base_table, c.row_ids, limit=cfg.list_threshold)
        return PolicyDecision.offer_list(rows)
    ranked = score_attributes(store, c, m, cfg, exclude=exclude, stats=stats)
    if not ranked:
        return PolicyDecision.exhausted(n)
    attribute, score = ranked[0]
    return PolicyDecision.ask(attribute, score)


class StatsCache:
    """column_stats memoized by (candidate-set signature, attribute).

    Entries carry the version stamp of every table the statistic depends on;
    a stamp mismatch recomputes. Recomputation replays the candidate set's
    predicates (store.rebuild) so a signature always reflects current data,
    including rows inserted after the set was built.
    """

    def __init__(self, store: Datastore, maxsize: int = 10_000):
        self.store = store
        self.maxsize = maxsize
        self.hits = 0
        self.misses = 0
        self._entries: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, c: CandidateSet, attribute: str) -> ColumnStats:
        stamp = self.store.versions_for(self.store.involved_tables(c, attribute))
        key = (c.signature(), attribute)
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None and entry[0] == stamp:
                self.hits += 1
                self._entries.move_to_end(key)
                return entry[1]
        fresh = self.store.rebuild(c)
        stats = self.store.column_stats(
            fresh, attribute, max_depth=len(self.store.schema.tables)
        )
        with self._lock:
            self.misses += 1
            self._entries[key] = (stamp, stats)
            self._entries.move_to_end(key)
            while len(self._entries) > self.maxsize:
                self._entries.popitem(last=False)
        return stats

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self.hits = 0
            self.misses = 0
