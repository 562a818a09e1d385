"""In-memory relational store: CSV ingestion, predicate filtering, FK joins,
per-attribute statistics, and transaction execution.

Storage is a dict of primary key -> row dict per table. Joins are hash joins
on foreign-key columns, memoized per table pair and invalidated by per-table
version counters. Writes (ingest, transactions) serialize through one lock;
reads operate on the live dicts, which mutate atomically under the lock.
"""

from __future__ import annotations

import csv
import math
import re
import threading
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateKey,
    ForeignKeyViolation,
    HeaderMismatch,
    InvalidPredicate,
    MissingSlot,
    NotFound,
    ParseError,
    TypeMismatch,
    UnjoinableAttribute,
    UnknownColumn,
    UnknownTable,
)
from .schema import Schema, TaskDefinition
from .textmatch import closest_values
from .values import format_value, parse_value, value_sort_key

COMPARISON_OPS = ("eq", "fuzzy_eq", "lt", "le", "gt", "ge")


@dataclass(frozen=True)
class Predicate:
    attribute: str  # qualified "table.column"
    op: str
    value: object
    max_edits: int = 0  # fuzzy_eq only

    @property
    def table(self) -> str:
        return self.attribute.partition(".")[0]

    @property
    def column(self) -> str:
        return self.attribute.partition(".")[2]

    def key(self) -> tuple:
        return (self.attribute, self.op, self.max_edits, format_value(self.value))


@dataclass(frozen=True)
class CandidateSet:
    """Base-table rows still consistent with all predicates so far."""

    base_table: str
    predicates: tuple[Predicate, ...]
    joined_tables: frozenset[str]
    row_ids: frozenset

    def signature(self) -> tuple:
        return (self.base_table, tuple(p.key() for p in self.predicates))

    def __len__(self) -> int:
        return len(self.row_ids)


@dataclass(frozen=True)
class ColumnStats:
    attribute: str
    histogram: dict = field(compare=False)
    distinct: int = 0
    entropy_bits: float = 0.0


@dataclass(frozen=True)
class TransactionResult:
    task: str
    outcome: str  # "committed" | "rejected"
    rows_affected: int = 0
    reason: str = ""
    echo: dict = field(default_factory=dict)
    rows: tuple = ()  # query results


def shannon_entropy_bits(histogram: dict) -> float:
    """H = -sum p*log2(p) over histogram counts, summed in ascending value
    order so independently written implementations agree bit-for-bit."""
    total = sum(histogram.values())
    if total <= 0:
        return 0.0
    h = 0.0
    for value in sorted(histogram, key=value_sort_key):
        p = histogram[value] / total
        if p > 0.0:
            h -= p * math.log2(p)
    return max(h, 0.0)


_KEY_PATTERN = re.compile(r"^(\D*)(\d+)$")


class Datastore:
    def __init__(self, schema: Schema, max_join_depth: int = 2):
        self.schema = schema
        self.default_join_depth = max_join_depth
        self._rows: dict[str, dict] = {t.name: {} for t in schema.tables}
        self._versions: dict[str, int] = {t.name: 0 for t in schema.tables}
        self._global_version = 0
        self._value_counts: dict[tuple[str, str], Counter] = {
            (t.name, c.name): Counter() for t in schema.tables for c in t.columns
        }
        self._edge_maps: dict[tuple, tuple[int, dict]] = {}
        self._join_maps: dict[tuple, tuple[tuple, dict]] = {}
        self._paths: dict[str, dict[str, tuple[str, ...]]] = {}
        self._lock = threading.Lock()

    # -- schema / bookkeeping -------------------------------------------------

    def replace_schema(self, schema: Schema) -> None:
        """Swap in a re-annotated schema; the structure must be unchanged."""
        old = [(t.name, t.primary_key, tuple((c.name, c.semantic_type) for c in t.columns))
               for t in self.schema.tables]
        new = [(t.name, t.primary_key, tuple((c.name, c.semantic_type) for c in t.columns))
               for t in schema.tables]
        if old != new or self.schema.foreign_keys != schema.foreign_keys:
            raise ValueError("replace_schema requires a structurally identical schema")
        self.schema = schema

    def table_version(self, table: str) -> int:
        return self._versions[table]

    @property
    def version(self) -> int:
        return self._global_version

    def versions_for(self, tables) -> tuple:
        return tuple(self._versions[t] for t in sorted(set(tables)))

    def _bump(self, table: str) -> None:
        self._versions[table] += 1
        self._global_version += 1

    def _require_table(self, name: str):
        if name not in self._rows:
            raise UnknownTable(name)
        return self.schema.table(name)

    def row_count(self, table: str) -> int:
        self._require_table(table)
        return len(self._rows[table])

    def all_ids(self, table: str) -> frozenset:
        self._require_table(table)
        return frozenset(self._rows[table])

    def row(self, table: str, pk):
        self._require_table(table)
        try:
            return self._rows[table][pk]
        except KeyError:
            raise NotFound(table, pk) from None

    def has_row(self, table: str, pk) -> bool:
        return pk in self._rows.get(table, ())

    def column_values(self, table: str, column: str) -> list:
        """Distinct non-null values of a column over the whole table, sorted."""
        tbl = self._require_table(table)
        if not tbl.has_column(column):
            raise UnknownColumn(table, column)
        return sorted(self._value_counts[(table, column)], key=value_sort_key)

    def distinct_count(self, table: str, column: str) -> int:
        tbl = self._require_table(table)
        if not tbl.has_column(column):
            raise UnknownColumn(table, column)
        return len(self._value_counts[(table, column)])

    # -- loading --------------------------------------------------------------

    def ingest_csv(self, table: str, path: str | Path) -> int:
        tbl = self._require_table(table)
        col_names = [c.name for c in tbl.columns]
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise HeaderMismatch(table, col_names, []) from None
            if sorted(header) != sorted(col_names):
                raise HeaderMismatch(table, col_names, header)
            cols = [tbl.column(name) for name in header]
            rows = []
            for lineno, record in enumerate(reader, start=2):
                if len(record) != len(cols):
                    raise ParseError(
                        str(path),
                        f"row {lineno}: expected {len(cols)} fields, got {len(record)}",
                    )
                row = {}
                for col, raw in zip(cols, record):
                    try:
                        row[col.name] = parse_value(raw, col.semantic_type)
                    except Exception:
                        raise TypeMismatch(
                            table, col.name, lineno, raw, col.semantic_type
                        ) from None
                if row.get(tbl.primary_key) is None:
                    raise TypeMismatch(table, tbl.primary_key, lineno, "", "non-null key")
                rows.append(row)
        self.insert_rows(table, rows)
        return len(rows)

    def insert_rows(self, table: str, rows: list[dict]) -> None:
        """Bulk append with all-or-nothing duplicate-key checking."""
        tbl = self._require_table(table)
        pk = tbl.primary_key
        normalized = [{c.name: row.get(c.name) for c in tbl.columns} for row in rows]
        with self._lock:
            existing = self._rows[table]
            seen = set()
            for row in normalized:
                key = row[pk]
                if key is None:
                    raise TypeMismatch(table, pk, 0, "", "non-null key")
                if key in existing or key in seen:
                    raise DuplicateKey(table, key)
                seen.add(key)
            for row in normalized:
                existing[row[pk]] = row
                for col, val in row.items():
                    if val is not None:
                        self._value_counts[(table, col)][val] += 1
            self._bump(table)

    # -- joins ----------------------------------------------------------------

    def paths_from(self, base: str) -> dict[str, tuple[str, ...]]:
        """Shortest FK-graph path (inclusive) from base to every reachable
        table; edges are undirected, neighbor order is deterministic."""
        self._require_table(base)
        cached = self._paths.get(base)
        if cached is not None:
            return cached
        paths = {base: (base,)}
        queue = deque([base])
        while queue:
            cur = queue.popleft()
            for nxt in self.schema.fk_neighbors(cur):
                if nxt not in paths:
                    paths[nxt] = paths[cur] + (nxt,)
                    queue.append(nxt)
        self._paths[base] = paths
        return paths

    def join_depth(self, base: str, table: str) -> int | None:
        path = self.paths_from(base).get(table)
        return None if path is None else len(path) - 1

    def reachable_attributes(self, base: str, max_depth: int) -> list[tuple[str, int]]:
        """Qualified columns reachable within max_depth, with their depth,
        ordered by (depth, name)."""
        out = []
        for table, path in self.paths_from(base).items():
            depth = len(path) - 1
            if depth > max_depth:
                continue
            for col in self.schema.table(table).columns:
                out.append((f"{table}.{col.name}", depth))
        out.sort(key=lambda item: (item[1], item[0]))
        return out

    def _edge_map(self, frm: str, to: str) -> dict:
        """Hash map pk(frm) -> tuple of pk(to) for adjacent tables."""
        fk = self.schema.join_edge(frm, to)
        if fk is None:
            raise UnjoinableAttribute(f"{to}.*", frm, 0)
        child = fk.table
        key = (frm, to)
        cached = self._edge_maps.get(key)
        if cached is not None and cached[0] == self._versions[child]:
            return cached[1]
        mapping: dict = {}
        if frm == child:  # child -> parent: follow the FK column
            for pk, row in self._rows[child].items():
                ref = row.get(fk.column)
                mapping[pk] = (ref,) if ref is not None else ()
        else:  # parent -> child: invert the FK column
            tmp: dict = {}
            for pk, row in self._rows[child].items():
                ref = row.get(fk.column)
                if ref is not None:
                    tmp.setdefault(ref, []).append(pk)
            mapping = {k: tuple(v) for k, v in tmp.items()}
        self._edge_maps[key] = (self._versions[child], mapping)
        return mapping

    def join_map(self, base: str, target: str) -> dict:
        """pk(base) -> tuple of related pk(target) along the FK path.
        Memoized until any table on the path changes."""
        path = self.paths_from(base).get(target)
        if path is None:
            raise UnjoinableAttribute(f"{target}.*", base, self.default_join_depth)
        stamp = self.versions_for(path)
        cached = self._join_maps.get((base, target))
        if cached is not None and cached[0] == stamp:
            return cached[1]
        current = {pk: (pk,) for pk in self._rows[base]}
        for frm, to in zip(path, path[1:]):
            edge = self._edge_map(frm, to)
            target_rows = self._rows[to]
            nxt = {}
            for pk, linked in current.items():
                acc: list = []
                for t in linked:
                    acc.extend(r for r in edge.get(t, ()) if r in target_rows)
                nxt[pk] = tuple(acc)
            current = nxt
        self._join_maps[(base, target)] = (stamp, current)
        return current

    # -- candidate sets -------------------------------------------------------

    def open_candidates(self, table: str) -> CandidateSet:
        self._require_table(table)
        return CandidateSet(
            base_table=table,
            predicates=(),
            joined_tables=frozenset({table}),
            row_ids=self.all_ids(table),
        )

    def check_predicate(self, p: Predicate) -> None:
        tbl = self._require_table(p.table)
        if not tbl.has_column(p.column):
            raise UnknownColumn(p.table, p.column)
        if p.op not in COMPARISON_OPS:
            raise InvalidPredicate(f"unknown comparison {p.op!r}")
        if p.op == "fuzzy_eq" and tbl.column(p.column).semantic_type != "text":
            raise InvalidPredicate(
                f"fuzzy_eq requires a text column, {p.attribute} is "
                f"{tbl.column(p.column).semantic_type}"
            )

    def _match_values(self, p: Predicate):
        """For fuzzy_eq: the stored values the probe resolves to (closest
        within max_edits over the whole column; ties widen)."""
        stored = [v for v in self.column_values(p.table, p.column) if isinstance(v, str)]
        matches, _ = closest_values(str(p.value), stored, p.max_edits)
        return frozenset(matches)

    def _value_test(self, p: Predicate):
        if p.op == "fuzzy_eq":
            accepted = self._match_values(p)
            return lambda v: v in accepted
        lit = p.value
        if p.op == "eq":
            return lambda v: v == lit
        if p.op == "lt":
            return lambda v: v < lit
        if p.op == "le":
            return lambda v: v <= lit
        if p.op == "gt":
            return lambda v: v > lit
        return lambda v: v >= lit

    def _satisfying_ids(self, c: CandidateSet, p: Predicate, max_depth: int) -> frozenset:
        depth = self.join_depth(c.base_table, p.table)
        if depth is None or depth > max_depth:
            raise UnjoinableAttribute(p.attribute, c.base_table, max_depth)
        test = self._value_test(p)
        rows = self._rows[c.base_table]
        if p.table == c.base_table:
            out = set()
            for pk in c.row_ids:
                row = rows.get(pk)
                if row is None:  # candidate predates a delete
                    continue
                v = row[p.column]
                if v is not None and test(v):
                    out.add(pk)
            return frozenset(out)
        mapping = self.join_map(c.base_table, p.table)
        joined_rows = self._rows[p.table]
        out = set()
        for pk in c.row_ids:
            for t in mapping.get(pk, ()):
                v = joined_rows[t][p.column]
                if v is not None and test(v):
                    out.add(pk)
                    break
        return frozenset(out)

    def refine(self, c: CandidateSet, p: Predicate, max_depth: int | None = None) -> CandidateSet:
        max_depth = self.default_join_depth if max_depth is None else max_depth
        self.check_predicate(p)
        ids = self._satisfying_ids(c, p, max_depth)
        path = self.paths_from(c.base_table)[p.table]
        return CandidateSet(
            base_table=c.base_table,
            predicates=c.predicates + (p,),
            joined_tables=c.joined_tables | frozenset(path),
            row_ids=ids,
        )

    def rebuild(self, c: CandidateSet) -> CandidateSet:
        """Replay the predicates against current data. Same signature, fresh
        row_ids; a no-op for candidate sets built under the current version."""
        no_limit = len(self.schema.tables)
        fresh = self.open_candidates(c.base_table)
        for p in c.predicates:
            fresh = self.refine(fresh, p, max_depth=no_limit)
        return fresh

    def column_stats(self, c: CandidateSet, attribute: str,
                     max_depth: int | None = None) -> ColumnStats:
        """Histogram of candidate entities per attribute value. Entities with
        several joined values count once under each distinct value; nulls are
        excluded. Entropy normalizes by the histogram total."""
        max_depth = self.default_join_depth if max_depth is None else max_depth
        table, _, column = attribute.partition(".")
        tbl = self._require_table(table)
        if not tbl.has_column(column):
            raise UnknownColumn(table, column)
        depth = self.join_depth(c.base_table, table)
        if depth is None or depth > max_depth:
            raise UnjoinableAttribute(attribute, c.base_table, max_depth)
        hist: Counter = Counter()
        if table == c.base_table:
            rows = self._rows[table]
            for pk in c.row_ids:
                row = rows.get(pk)
                if row is None:  # candidate predates a delete
                    continue
                v = row[column]
                if v is not None:
                    hist[v] += 1
        else:
            mapping = self.join_map(c.base_table, table)
            joined_rows = self._rows[table]
            for pk in c.row_ids:
                linked = mapping.get(pk, ())
                if len(linked) == 1:  # single-valued fast path
                    v = joined_rows[linked[0]][column]
                    if v is not None:
                        hist[v] += 1
                elif linked:
                    vals = {joined_rows[t][column] for t in linked}
                    vals.discard(None)
                    for v in vals:
                        hist[v] += 1
        return ColumnStats(
            attribute=attribute,
            histogram=dict(hist),
            distinct=len(hist),
            entropy_bits=shannon_entropy_bits(hist),
        )

    def involved_tables(self, c: CandidateSet, attribute: str) -> tuple[str, ...]:
        """Tables whose contents the stats of (c, attribute) depend on."""
        tables = {c.base_table}
        for p in c.predicates:
            tables.update(self.paths_from(c.base_table)[p.table])
        tables.update(self.paths_from(c.base_table)[attribute.partition(".")[0]])
        return tuple(sorted(tables))

    def summaries(self, table: str, pks, limit: int | None = None) -> list[dict]:
        """Human-facing row summaries: base columns plus each direct FK
        parent's label column (its first text column)."""
        tbl = self._require_table(table)
        ordered = sorted(pks, key=value_sort_key)
        if limit is not None:
            ordered = ordered[:limit]
        parents = [
            fk for fk in self.schema.foreign_keys if fk.table == table
        ]
        out = []
        for pk in ordered:
            row = self._rows[table][pk]
            summary = {"id": format_value(pk), "values": {}}
            for col in tbl.columns:
                if col.name == tbl.primary_key:
                    continue
                if any(fk.column == col.name for fk in parents):
                    continue
                summary["values"][col.name] = format_value(row[col.name])
            for fk in parents:
                ref = row.get(fk.column)
                if ref is None or ref not in self._rows[fk.references_table]:
                    continue
                parent_tbl = self.schema.table(fk.references_table)
                label_col = next(
                    (c.name for c in parent_tbl.columns if c.semantic_type == "text"),
                    None,
                )
                if label_col is not None:
                    summary["values"][fk.references_table] = format_value(
                        self._rows[fk.references_table][ref][label_col]
                    )
            out.append(summary)
        return out

    # -- transactions ----------------------------------------------------------

    def execute_transaction(self, task: TaskDefinition, params: dict) -> TransactionResult:
        for slot in task.slots:
            if slot.required and params.get(slot.name) is None:
                raise MissingSlot(task.name, slot.name)
        if task.action.type == "insert":
            return self._run_insert(task, params)
        if task.action.type == "delete":
            return self._run_delete(task, params)
        return self._run_query(task, params)

    def _echo(self, params: dict) -> dict:
        return {k: format_value(v) if not isinstance(v, (list, tuple)) else [format_value(x) for x in v]
                for k, v in params.items()}

    def _run_insert(self, task: TaskDefinition, params: dict) -> TransactionResult:
        tbl = self._require_table(task.action.table)
        row = {c.name: None for c in tbl.columns}
        for col_name, slot_name in task.action.values.items():
            if slot_name in params:
                row[col_name] = params[slot_name]
        with self._lock:
            if row[tbl.primary_key] is None:
                row[tbl.primary_key] = self._generate_key(tbl.name)
            elif row[tbl.primary_key] in self._rows[tbl.name]:
                raise DuplicateKey(tbl.name, row[tbl.primary_key])
            for fk in self.schema.foreign_keys:
                if fk.table != tbl.name:
                    continue
                ref = row.get(fk.column)
                if ref is not None and ref not in self._rows[fk.references_table]:
                    raise ForeignKeyViolation(tbl.name, fk.column, ref)
            self._rows[tbl.name][row[tbl.primary_key]] = row
            for col, val in row.items():
                if val is not None:
                    self._value_counts[(tbl.name, col)][val] += 1
            self._bump(tbl.name)
        echo = self._echo(params)
        echo[tbl.primary_key] = format_value(row[tbl.primary_key])
        return TransactionResult(task=task.name, outcome="committed", rows_affected=1, echo=echo)

    def _run_delete(self, task: TaskDefinition, params: dict) -> TransactionResult:
        tbl = self._require_table(task.action.table)
        (_, slot_name), = task.action.values.items()  # {pk column: slot}, validated at load
        key = params.get(slot_name)
        if key is None:
            raise MissingSlot(task.name, slot_name)
        with self._lock:
            if key not in self._rows[tbl.name]:
                raise NotFound(tbl.name, key)
            row = self._rows[tbl.name].pop(key)
            for col, val in row.items():
                if val is not None:
                    counter = self._value_counts[(tbl.name, col)]
                    counter[val] -= 1
                    if counter[val] <= 0:
                        del counter[val]
            self._bump(tbl.name)
        return TransactionResult(
            task=task.name, outcome="committed", rows_affected=1, echo=self._echo(params)
        )

    def _run_query(self, task: TaskDefinition, params: dict) -> TransactionResult:
        tbl = self._require_table(task.action.table)
        bound = None
        for slot in task.entity_slots():
            if slot.table == tbl.name and params.get(slot.name) is not None:
                bound = params[slot.name]
                break
        if bound is None:
            keys = sorted(self._rows[tbl.name], key=value_sort_key)
        elif isinstance(bound, (list, tuple, set, frozenset)):
            keys = sorted((k for k in bound if k in self._rows[tbl.name]), key=value_sort_key)
        else:
            if bound not in self._rows[tbl.name]:
                raise NotFound(tbl.name, bound)
            keys = [bound]
        project = task.action.projection or tuple(c.name for c in tbl.columns)
        rows = tuple(
            {col: format_value(self._rows[tbl.name][k][col]) for col in project}
            for k in keys
        )
        return TransactionResult(
            task=task.name, outcome="committed", rows_affected=0,
            echo=self._echo(params), rows=rows,
        )

    def _generate_key(self, table: str):
        """Fresh primary key: integer max+1, or prefix+digits continuation."""
        tbl = self.schema.table(table)
        pk_type = tbl.column(tbl.primary_key).semantic_type
        existing = self._rows[table]
        if pk_type == "integer":
            return max(existing, default=0) + 1
        prefix = None
        top = 0
        for key in existing:
            m = _KEY_PATTERN.match(str(key))
            if m is None or (prefix is not None and m.group(1) != prefix):
                prefix = None
                break
            prefix = m.group(1)
            top = max(top, int(m.group(2)))
        if prefix is not None and existing:
            return f"{prefix}{top + 1}"
        candidate = f"{table}-{len(existing) + 1}"
        while candidate in existing:
            candidate += "x"
        return candidate
