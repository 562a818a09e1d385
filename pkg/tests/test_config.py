import datetime as dt
from pathlib import Path

import pytest

from catforge.config import (
    AppConfig,
    DatagenConfig,
    PathsConfig,
    config_from_dict,
    default_config,
    load_config,
)
from catforge.errors import ParseError, ValidationError

ROOT = Path("/srv/agent")


def test_empty_document_gives_all_defaults():
    cfg = config_from_dict({}, ROOT)
    assert cfg.root == ROOT
    assert cfg.paths.schema == ROOT / "schema.json"
    assert cfg.paths.data_dir == ROOT / "data"
    assert cfg.paths.artifacts_dir == ROOT / "artifacts"
    assert cfg.policy.max_join_depth == 2
    assert cfg.policy.depth_decay == 0.8
    assert cfg.nlu.confidence_floor == 0.3
    assert cfg.datagen.per_template == 15
    assert cfg.datagen.integer_range == (1, 10)
    assert cfg.clock is None


def test_sections_override_individual_fields():
    doc = {
        "paths": {"schema": "defs/schema.json", "artifacts_dir": "out"},
        "policy": {"list_threshold": 3},
        "nlu": {"confidence_floor": 0.5},
        "datagen": {"per_template": 2, "integer_range": [2, 6]},
    }
    cfg = config_from_dict(doc, ROOT)
    assert cfg.paths.schema == ROOT / "defs/schema.json"
    assert cfg.paths.artifacts_dir == ROOT / "out"
    assert cfg.paths.tasks == ROOT / "tasks.json"  # untouched default
    assert cfg.policy.list_threshold == 3
    assert cfg.policy.depth_decay == 0.8
    assert cfg.nlu.confidence_floor == 0.5
    assert cfg.datagen.per_template == 2
    assert cfg.datagen.integer_range == (2, 6)


def test_clock_accepts_iso_string_and_native_datetime():
    stamp = dt.datetime(2024, 6, 1, 18, 0)
    for raw in ("2024-06-01T18:00:00", stamp):
        cfg = config_from_dict({"session": {"clock": raw}}, ROOT)
        assert cfg.clock == stamp


def test_bad_clock_string_is_a_parse_error():
    with pytest.raises(ParseError):
        config_from_dict({"session": {"clock": "six pm"}}, ROOT)


def test_unknown_key_inside_section_is_rejected():
    with pytest.raises(ValidationError) as err:
        config_from_dict({"policy": {"max_depth": 3}}, ROOT)
    assert "max_depth" in str(err.value)


def test_unknown_section_is_rejected():
    with pytest.raises(ValidationError) as err:
        config_from_dict({"polcy": {"list_threshold": 3}}, ROOT)
    assert "polcy" in str(err.value)


def test_section_must_be_a_table():
    with pytest.raises(ParseError):
        config_from_dict({"policy": "strict"}, ROOT)


def test_integer_range_must_be_a_pair():
    for bad in ([1], [1, 2, 3], 5, "1-10"):
        with pytest.raises(ParseError):
            config_from_dict({"datagen": {"integer_range": bad}}, ROOT)


def test_inverted_integer_range_is_rejected():
    with pytest.raises(ValidationError):
        DatagenConfig(integer_range=(9, 2))


def test_field_validation_errors_surface_as_validation_errors():
    with pytest.raises(ValidationError):
        config_from_dict({"policy": {"depth_decay": 0.0}}, ROOT)
    with pytest.raises(ValidationError):
        config_from_dict({"datagen": {"per_template": 0}}, ROOT)
    with pytest.raises(ValidationError):
        config_from_dict({"nlu": {"confidence_floor": 1.5}}, ROOT)


def test_load_config_resolves_paths_against_file_directory(tmp_path):
    (tmp_path / "catforge.toml").write_text(
        '[paths]\nschema = "defs/schema.json"\n'
        "[session]\nclock = 2024-06-01T18:00:00\n",
        encoding="utf-8",
    )
    cfg = load_config(tmp_path / "catforge.toml")
    assert cfg.root == tmp_path.resolve()
    assert cfg.paths.schema == tmp_path.resolve() / "defs/schema.json"
    assert cfg.clock == dt.datetime(2024, 6, 1, 18, 0)


def test_load_config_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_config(tmp_path / "absent.toml")


def test_load_config_bad_toml_is_a_parse_error(tmp_path):
    path = tmp_path / "catforge.toml"
    path.write_text("[policy\nlist_threshold = 3\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_config(path)


def test_default_config_matches_empty_document():
    assert default_config(ROOT) == config_from_dict({}, Path(ROOT).resolve())


def test_paths_resolved_is_pure():
    base = PathsConfig()
    resolved = base.resolved(ROOT)
    assert base.schema == Path("schema.json")
    assert resolved.schema.is_absolute()
    assert isinstance(resolved, PathsConfig)


def test_app_config_is_immutable():
    cfg = default_config(ROOT)
    with pytest.raises(AttributeError):
        cfg.clock = dt.datetime(2030, 1, 1)
