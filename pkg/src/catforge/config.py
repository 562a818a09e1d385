"""Workspace configuration loaded from a catforge.toml file.

Every knob has a default, so an empty file (or a missing [section]) is
valid; unknown keys inside known sections are rejected to catch typos.
All paths are resolved relative to the file's directory.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ParseError, ValidationError
from .nlu import NluConfig
from .policy import PolicyConfig


@dataclass(frozen=True)
class PathsConfig:
    schema: Path = Path("schema.json")
    tasks: Path = Path("tasks.json")
    templates: Path = Path("templates.json")
    lexicon: Path = Path("lexicon.txt")
    responses: Path = Path("responses.json")
    data_dir: Path = Path("data")
    artifacts_dir: Path = Path("artifacts")

    def resolved(self, root: Path) -> "PathsConfig":
        return PathsConfig(**{
            name: root / getattr(self, name)
            for name in self.__dataclass_fields__
        })


@dataclass(frozen=True)
class DatagenConfig:
    per_template: int = 15
    paraphrase_k: int = 4
    integer_range: tuple[int, int] = (1, 10)
    corpus_seed: int = 7
    flow_seed: int = 11
    flows: int = 1000

    def __post_init__(self):
        problems = []
        if self.per_template < 1:
            problems.append(f"per_template must be at least 1, got {self.per_template}")
        if self.paraphrase_k < 0:
            problems.append(f"paraphrase_k must not be negative, got {self.paraphrase_k}")
        low, high = self.integer_range
        if low > high:
            problems.append(f"integer_range low exceeds high: [{low}, {high}]")
        if self.flows < 1:
            problems.append(f"flows must be at least 1, got {self.flows}")
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True)
class AppConfig:
    root: Path
    paths: PathsConfig = field(default_factory=PathsConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    nlu: NluConfig = field(default_factory=NluConfig)
    datagen: DatagenConfig = field(default_factory=DatagenConfig)
    clock: dt.datetime | None = None


_SECTION_FIELDS = {
    "paths": set(PathsConfig.__dataclass_fields__),
    "policy": set(PolicyConfig.__dataclass_fields__),
    "nlu": set(NluConfig.__dataclass_fields__),
    "datagen": set(DatagenConfig.__dataclass_fields__),
    "session": {"clock"},
}


def _section(doc: dict, name: str, source: str) -> dict:
    raw = doc.get(name, {})
    if not isinstance(raw, dict):
        raise ParseError(source, f"[{name}] must be a table")
    unknown = sorted(set(raw) - _SECTION_FIELDS[name])
    if unknown:
        raise ValidationError(
            [f"{source}: unknown key {k!r} in [{name}]" for k in unknown]
        )
    return raw


def config_from_dict(doc: dict, root: Path, source: str = "<config>") -> AppConfig:
    stray = sorted(set(doc) - set(_SECTION_FIELDS))
    if stray:
        raise ValidationError(
            [f"{source}: unknown section [{name}]" for name in stray]
        )
    paths_raw = {k: Path(v) for k, v in _section(doc, "paths", source).items()}
    clock_raw = _section(doc, "session", source).get("clock")
    clock = None
    if clock_raw is not None:
        if isinstance(clock_raw, dt.datetime):
            clock = clock_raw  # toml parsers produce datetimes natively
        else:
            try:
                clock = dt.datetime.fromisoformat(str(clock_raw))
            except ValueError as exc:
                raise ParseError(source, f"session.clock: {exc}") from exc
    datagen_raw = dict(_section(doc, "datagen", source))
    if "integer_range" in datagen_raw:
        value = datagen_raw["integer_range"]
        if not (isinstance(value, (list, tuple)) and len(value) == 2):
            raise ParseError(source, f"datagen.integer_range must be a [low, high] pair, got {value!r}")
        datagen_raw["integer_range"] = (int(value[0]), int(value[1]))
    try:
        return AppConfig(
            root=root,
            paths=PathsConfig(**paths_raw).resolved(root),
            policy=PolicyConfig(**_section(doc, "policy", source)),
            nlu=NluConfig(**_section(doc, "nlu", source)),
            datagen=DatagenConfig(**datagen_raw),
            clock=clock,
        )
    except (ValueError, TypeError) as exc:
        raise ValidationError([f"{source}: {exc}"]) from exc


def load_config(path: str | Path) -> AppConfig:
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(str(path), str(exc)) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(str(path), str(exc)) from exc
    return config_from_dict(doc, root=path.parent.resolve(), source=str(path))


def default_config(root: str | Path) -> AppConfig:
    root = Path(root).resolve()
    return AppConfig(root=root, paths=PathsConfig().resolved(root))
