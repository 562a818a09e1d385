"""Relational schema and task (transaction) definitions.

Schemas and tasks are declared in human-editable JSON files (see
docs/formats.md) rather than introspected from a live DBMS. All types here are
immutable after load; `annotate` is the only mutation path and returns a new
Schema value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ParseError, UnknownColumn, ValidationError

SEMANTIC_TYPES = ("text", "integer", "decimal", "date", "time", "identifier")
REQUEST_PREFERENCES = ("normal", "avoid", "never")

DEFAULT_AWARENESS_PRIOR = (1, 2)


@dataclass(frozen=True)
class ColumnAnnotation:
    """Developer-supplied hints steering the dialogue policy.

    request_preference: never = hard exclusion from requests, avoid = score
    penalty, normal = unpenalized. awareness_prior is a Beta-style pseudo-count
    pair (pseudo_known, pseudo_asked); the default (1, 2) encodes a 0.5 prior
    probability that a user can supply the value.
    """

    request_preference: str = "normal"
    awareness_prior: tuple[int, int] = DEFAULT_AWARENESS_PRIOR
    display_name: str = ""

    def validate(self, where: str) -> list[str]:
        problems = []
        if self.request_preference not in REQUEST_PREFERENCES:
            problems.append(
                f"{where}: request_preference must be one of {REQUEST_PREFERENCES}, "
                f"got {self.request_preference!r}"
            )
        known, asked = self.awareness_prior
        if known < 0 or asked < 0:
            problems.append(f"{where}: awareness_prior pseudo-counts must be non-negative")
        if known > asked:
            problems.append(
                f"{where}: awareness_prior pseudo_known ({known}) exceeds pseudo_asked ({asked})"
            )
        return problems


@dataclass(frozen=True)
class Column:
    name: str
    semantic_type: str
    annotation: ColumnAnnotation = field(default_factory=ColumnAnnotation)

    @property
    def display_name(self) -> str:
        return self.annotation.display_name or self.name.replace("_", " ")


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]
    primary_key: str

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise UnknownColumn(self.name, name)

    def has_column(self, name: str) -> bool:
        return any(col.name == name for col in self.columns)


@dataclass(frozen=True)
class ForeignKey:
    """child table.column references parent table.column (the parent's PK)."""

    table: str
    column: str
    references_table: str
    references_column: str

    def __str__(self) -> str:
        return (
            f"{self.table}.{self.column} -> "
            f"{self.references_table}.{self.references_column}"
        )


@dataclass(frozen=True)
class Schema:
    tables: tuple[Table, ...]
    foreign_keys: tuple[ForeignKey, ...]

    def table(self, name: str) -> Table:
        for tbl in self.tables:
            if tbl.name == name:
                return tbl
        from .errors import UnknownTable

        raise UnknownTable(name)

    def has_table(self, name: str) -> bool:
        return any(tbl.name == name for tbl in self.tables)

    def column(self, qualified: str) -> Column:
        table_name, _, column_name = qualified.partition(".")
        return self.table(table_name).column(column_name)

    def fk_neighbors(self, table: str) -> list[str]:
        """Tables one foreign-key edge away, in deterministic order."""
        out = []
        for fk in self.foreign_keys:
            if fk.table == table and fk.references_table not in out:
                out.append(fk.references_table)
            elif fk.references_table == table and fk.table not in out:
                out.append(fk.table)
        return sorted(out)

    def join_edge(self, a: str, b: str) -> ForeignKey | None:
        """The FK connecting tables a and b in either direction, if any."""
        for fk in self.foreign_keys:
            if {fk.table, fk.references_table} == {a, b}:
                return fk
        return None


@dataclass(frozen=True)
class SlotSpec:
    name: str
    kind: str  # "scalar" | "entity"
    semantic_type: str = ""  # scalar slots only
    table: str = ""  # entity slots only
    required: bool = True


@dataclass(frozen=True)
class TaskAction:
    type: str  # "insert" | "delete" | "query"
    table: str
    # insert: column name -> slot name; delete: {pk column: slot name}
    values: dict = field(default_factory=dict)
    # query only: columns to project (empty = all)
    projection: tuple[str, ...] = ()


@dataclass(frozen=True)
class TaskDefinition:
    name: str
    slots: tuple[SlotSpec, ...]
    action: TaskAction
    confirmation_required: bool = True

    def slot(self, name: str) -> SlotSpec:
        for s in self.slots:
            if s.name == name:
                return s
        raise KeyError(name)

    def entity_slots(self) -> list[SlotSpec]:
        return [s for s in self.slots if s.kind == "entity"]


def _parse_annotation(raw: dict, where: str) -> ColumnAnnotation:
    prior = raw.get("awareness_prior", list(DEFAULT_AWARENESS_PRIOR))
    if not (isinstance(prior, (list, tuple)) and len(prior) == 2):
        raise ParseError(where, f"awareness_prior must be a [known, asked] pair, got {prior!r}")
    return ColumnAnnotation(
        request_preference=raw.get("request_preference", "normal"),
        awareness_prior=(int(prior[0]), int(prior[1])),
        display_name=raw.get("display_name", ""),
    )


def _load_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(path), str(exc)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(str(path), "top-level value must be an object")
    return doc


def schema_from_dict(doc: dict, source: str = "<schema>") -> Schema:
    tables = []
    for traw in doc.get("tables", []):
        if "name" not in traw or "primary_key" not in traw:
            raise ParseError(source, f"table entry missing name/primary_key: {traw!r}")
        columns = []
        for craw in traw.get("columns", []):
            if "name" not in craw or "semantic_type" not in craw:
                raise ParseError(
                    source, f"column entry in table {traw['name']!r} missing name/semantic_type"
                )
            where = f"{traw['name']}.{craw['name']}"
            columns.append(
                Column(
                    name=craw["name"],
                    semantic_type=craw["semantic_type"],
                    annotation=_parse_annotation(craw.get("annotation", {}), where),
                )
            )
        tables.append(
            Table(name=traw["name"], columns=tuple(columns), primary_key=traw["primary_key"])
        )
    fks = []
    for fraw in doc.get("foreign_keys", []):
        try:
            fks.append(
                ForeignKey(
                    table=fraw["table"],
                    column=fraw["column"],
                    references_table=fraw["references_table"],
                    references_column=fraw["references_column"],
                )
            )
        except KeyError as exc:
            raise ParseError(source, f"foreign key entry missing field {exc}") from exc
    schema = Schema(tables=tuple(tables), foreign_keys=tuple(fks))
    problems = validate_schema(schema)
    if problems:
        raise ValidationError(problems)
    return schema


def validate_schema(schema: Schema) -> list[str]:
    problems = []
    if not schema.tables:
        problems.append("schema must contain at least one table")
    seen_tables = set()
    for tbl in schema.tables:
        if tbl.name in seen_tables:
            problems.append(f"duplicate table name {tbl.name!r}")
        seen_tables.add(tbl.name)
        seen_cols = set()
        for col in tbl.columns:
            if col.name in seen_cols:
                problems.append(f"duplicate column {tbl.name}.{col.name}")
            seen_cols.add(col.name)
            if col.semantic_type not in SEMANTIC_TYPES:
                problems.append(
                    f"{tbl.name}.{col.name}: semantic_type must be one of "
                    f"{SEMANTIC_TYPES}, got {col.semantic_type!r}"
                )
            problems.extend(col.annotation.validate(f"{tbl.name}.{col.name}"))
        if tbl.primary_key not in seen_cols:
            problems.append(
                f"table {tbl.name!r}: primary_key {tbl.primary_key!r} is not a column"
            )
    by_name = {t.name: t for t in schema.tables}
    for fk in schema.foreign_keys:
        if fk.table == fk.references_table:
            problems.append(f"foreign key {fk} is a self-reference (unsupported)")
            continue
        child = by_name.get(fk.table)
        parent = by_name.get(fk.references_table)
        if child is None or not child.has_column(fk.column):
            problems.append(f"foreign key {fk}: child column does not exist")
            continue
        if parent is None or not parent.has_column(fk.references_column):
            problems.append(f"foreign key {fk}: parent column does not exist")
            continue
        if parent.primary_key != fk.references_column:
            problems.append(
                f"foreign key {fk}: parent column is not {fk.references_table!r}'s primary key"
            )
    return problems


def load_schema(path: str | Path) -> Schema:
    return schema_from_dict(_load_json(path), source=str(path))


def schema_to_dict(schema: Schema) -> dict:
    return {
        "tables": [
            {
                "name": tbl.name,
                "primary_key": tbl.primary_key,
                "columns": [
                    {
                        "name": col.name,
                        "semantic_type": col.semantic_type,
                        "annotation": {
                            "request_preference": col.annotation.request_preference,
                            "awareness_prior": list(col.annotation.awareness_prior),
                            "display_name": col.annotation.display_name,
                        },
                    }
                    for col in tbl.columns
                ],
            }
            for tbl in schema.tables
        ],
        "foreign_keys": [
            {
                "table": fk.table,
                "column": fk.column,
                "references_table": fk.references_table,
                "references_column": fk.references_column,
            }
            for fk in schema.foreign_keys
        ],
    }


def save_schema(schema: Schema, path: str | Path) -> None:
    """Rewrite the schema file in place, preserving key order."""
    Path(path).write_text(
        json.dumps(schema_to_dict(schema), indent=2) + "\n", encoding="utf-8"
    )


def annotate(schema: Schema, table: str, column: str, annotation: ColumnAnnotation) -> Schema:
    """Return a copy of the schema with one column's annotation replaced."""
    problems = annotation.validate(f"{table}.{column}")
    if problems:
        raise ValidationError(problems)
    target = schema.table(table).column(column)  # raises UnknownTable/UnknownColumn
    new_tables = []
    for tbl in schema.tables:
        if tbl.name != table:
            new_tables.append(tbl)
            continue
        new_columns = tuple(
            replace(col, annotation=annotation) if col.name == column else col
            for col in tbl.columns
        )
        new_tables.append(replace(tbl, columns=new_columns))
    del target
    return replace(schema, tables=tuple(new_tables))


def tasks_from_dict(doc: dict, schema: Schema, source: str = "<tasks>") -> list[TaskDefinition]:
    tasks = []
    problems = []
    for traw in doc.get("tasks", []):
        if "name" not in traw:
            raise ParseError(source, f"task entry missing name: {traw!r}")
        name = traw["name"]
        slots = []
        for sraw in traw.get("slots", []):
            kind = sraw.get("kind")
            if kind not in ("scalar", "entity"):
                raise ParseError(source, f"task {name!r}: slot kind must be scalar or entity")
            slots.append(
                SlotSpec(
                    name=sraw["name"],
                    kind=kind,
                    semantic_type=sraw.get("semantic_type", ""),
                    table=sraw.get("table", ""),
                    required=sraw.get("required", True),
                )
            )
        araw = traw.get("action", {})
        if araw.get("type") not in ("insert", "delete", "query"):
            raise ParseError(source, f"task {name!r}: action type must be insert/delete/query")
        action = TaskAction(
            type=araw["type"],
            table=araw.get("table", ""),
            values=dict(araw.get("values", {})),
            projection=tuple(araw.get("projection", [])),
        )
        tasks.append(
            TaskDefinition(
                name=name,
                slots=tuple(slots),
                action=action,
                confirmation_required=traw.get(
                    "confirmation_required", action.type in ("insert", "delete")
                ),
            )
        )
    for task in tasks:
        slot_names = {s.name for s in task.slots}
        for slot in task.slots:
            if slot.kind == "entity" and not schema.has_table(slot.table):
                problems.append(
                    f"task {task.name!r}: slot {slot.name!r} references unknown table {slot.table!r}"
                )
            if slot.kind == "scalar" and slot.semantic_type not in SEMANTIC_TYPES:
                problems.append(
                    f"task {task.name!r}: slot {slot.name!r} has invalid semantic_type "
                    f"{slot.semantic_type!r}"
                )
        action = task.action
        if not schema.has_table(action.table):
            problems.append(
                f"task {task.name!r}: action references unknown table {action.table!r}"
            )
        else:
            tbl = schema.table(action.table)
            for col, slot in action.values.items():
                if not tbl.has_column(col):
                    problems.append(
                        f"task {task.name!r}: action maps unknown column "
                        f"{action.table}.{col}"
                    )
                if slot not in slot_names:
                    problems.append(
                        f"task {task.name!r}: action references undeclared slot {slot!r}"
                    )
            for col in action.projection:
                if not tbl.has_column(col):
                    problems.append(
                        f"task {task.name!r}: projection names unknown column "
                        f"{action.table}.{col}"
                    )
            if action.type == "delete" and list(action.values) != [tbl.primary_key]:
                problems.append(
                    f"task {task.name!r}: delete must map exactly the primary key "
                    f"{action.table}.{tbl.primary_key}"
                )
    if problems:
        raise ValidationError(problems)
    return tasks


def load_tasks(path: str | Path, schema: Schema) -> list[TaskDefinition]:
    return tasks_from_dict(_load_json(path), schema, source=str(path))


def tasks_to_dict(tasks: list[TaskDefinition]) -> dict:
    out = []
    for task in tasks:
        slots = []
        for s in task.slots:
            entry: dict = {"name": s.name, "kind": s.kind, "required": s.required}
            if s.kind == "scalar":
                entry["semantic_type"] = s.semantic_type
            else:
                entry["table"] = s.table
            slots.append(entry)
        action: dict = {"type": task.action.type, "table": task.action.table}
        if task.action.values:
            action["values"] = dict(task.action.values)
        if task.action.projection:
            action["projection"] = list(task.action.projection)
        out.append(
            {
                "name": task.name,
                "slots": slots,
                "action": action,
                "confirmation_required": task.confirmation_required,
            }
        )
    return {"tasks": out}
