"""Exception types shared across the package.

Every error that names a schema object carries enough context (table, column,
task, row number) to be actionable without a debugger.
"""

from __future__ import annotations


class CatforgeError(Exception):
    """Base class for all package errors."""


class ParseError(CatforgeError):
    """A schema/task/template file is syntactically malformed."""

    def __init__(self, path: str, detail: str):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")


class ValidationError(CatforgeError):
    """One or more declarative-file invariants are violated.

    Collects every violation found so the user can fix them in one pass.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnknownTable(CatforgeError):
    def __init__(self, table: str):
        self.table = table
        super().__init__(f"unknown table {table!r}")


class UnknownColumn(CatforgeError):
    def __init__(self, table: str, column: str):
        self.table = table
        self.column = column
        super().__init__(f"unknown column {table}.{column}")


class HeaderMismatch(CatforgeError):
    def __init__(self, table: str, expected: list[str], got: list[str]):
        self.table = table
        self.expected = expected
        self.got = got
        super().__init__(
            f"CSV header for {table!r} does not match schema: expected {expected}, got {got}"
        )


class TypeMismatch(CatforgeError):
    def __init__(self, table: str, column: str, row: int, raw: str, semantic_type: str):
        self.table = table
        self.column = column
        self.row = row
        self.raw = raw
        self.semantic_type = semantic_type
        super().__init__(
            f"{table}.{column} row {row}: {raw!r} is not a valid {semantic_type}"
        )


class DuplicateKey(CatforgeError):
    def __init__(self, table: str, value):
        self.table = table
        self.value = value
        super().__init__(f"duplicate primary key {value!r} in table {table!r}")


class InvalidPredicate(CatforgeError):
    def __init__(self, detail: str):
        super().__init__(detail)


class UnjoinableAttribute(CatforgeError):
    def __init__(self, attribute: str, base_table: str, max_depth: int):
        self.attribute = attribute
        self.base_table = base_table
        self.max_depth = max_depth
        super().__init__(
            f"attribute {attribute!r} is not reachable from {base_table!r} "
            f"within join depth {max_depth}"
        )


class MissingSlot(CatforgeError):
    def __init__(self, task: str, slot: str):
        self.task = task
        self.slot = slot
        super().__init__(f"task {task!r} is missing a value for required slot {slot!r}")


class ForeignKeyViolation(CatforgeError):
    def __init__(self, table: str, column: str, value):
        self.table = table
        self.column = column
        self.value = value
        super().__init__(
            f"{table}.{column}={value!r} does not reference an existing row"
        )


class NotFound(CatforgeError):
    def __init__(self, table: str, key):
        self.table = table
        self.key = key
        super().__init__(f"no row with primary key {key!r} in table {table!r}")


class EmptyColumn(CatforgeError):
    def __init__(self, attribute: str):
        self.attribute = attribute
        super().__init__(f"no values available to sample from {attribute!r}")


class UnboundPlaceholder(CatforgeError):
    def __init__(self, template: str, placeholder: str):
        self.template = template
        self.placeholder = placeholder
        super().__init__(
            f"template {template!r} uses placeholder {{{placeholder}}} without a binding"
        )


class NoTasks(CatforgeError):
    pass


class NoFlows(CatforgeError):
    pass


class InsufficientCorpus(CatforgeError):
    pass


class Unparseable(CatforgeError):
    def __init__(self, raw: str, semantic_type: str):
        self.raw = raw
        self.semantic_type = semantic_type
        super().__init__(f"cannot parse {raw!r} as {semantic_type}")


class MissingTemplate(CatforgeError):
    def __init__(self, action: str):
        self.action = action
        super().__init__(f"no response template for action {action!r}")


class AgentNotReady(CatforgeError):
    def __init__(self, detail: str = "pipeline has not produced trained models yet"):
        super().__init__(detail)


class IoError(CatforgeError):
    def __init__(self, path: str, detail: str):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")


class EmptyTable(CatforgeError):
    def __init__(self, table: str, detail: str = "table has no rows"):
        self.table = table
        super().__init__(f"{table!r}: {detail}")
