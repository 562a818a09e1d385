import json

import pytest

from catforge.errors import ParseError, UnknownColumn, UnknownTable, ValidationError
from catforge.schema import (
    ColumnAnnotation,
    annotate,
    load_schema,
    load_tasks,
    save_schema,
    schema_from_dict,
    schema_to_dict,
    tasks_from_dict,
    tasks_to_dict,
    validate_schema,
)

from conftest import TRIO_SCHEMA, TRIO_TASKS


def test_round_trip_through_file(trio_schema, tmp_path):
    path = tmp_path / "schema.json"
    save_schema(trio_schema, path)
    again = load_schema(path)
    assert again == trio_schema


def test_to_dict_preserves_declaration_order(trio_schema):
    doc = schema_to_dict(trio_schema)
    assert [t["name"] for t in doc["tables"]] == ["person", "city", "country"]
    assert [c["name"] for c in doc["tables"][0]["columns"]] == [
        "id",
        "name",
        "age",
        "city_id",
    ]


def test_bad_json_reports_line(tmp_path):
    path = tmp_path / "schema.json"
    path.write_text('{\n  "tables": [\n    {"name": }\n  ]\n}')
    with pytest.raises(ParseError) as err:
        load_schema(path)
    assert "line 3" in str(err.value)


def test_empty_schema_rejected():
    with pytest.raises(ValidationError) as err:
        schema_from_dict({"tables": [], "foreign_keys": []})
    assert "at least one table" in str(err.value)


def test_validation_collects_every_violation():
    doc = json.loads(json.dumps(TRIO_SCHEMA))
    doc["tables"][0]["columns"][1]["semantic_type"] = "varchar"
    doc["tables"][1]["primary_key"] = "nope"
    doc["foreign_keys"].append(
        {
            "table": "person",
            "column": "city_id",
            "references_table": "person",
            "references_column": "id",
        }
    )
    with pytest.raises(ValidationError) as err:
        schema_from_dict(doc)
    text = str(err.value)
    assert "semantic_type" in text
    assert "primary_key" in text
    assert "self-reference" in text
    assert len(err.value.violations) >= 3


def test_fk_parent_column_must_be_its_primary_key():
    doc = json.loads(json.dumps(TRIO_SCHEMA))
    doc["foreign_keys"][0]["references_column"] = "city_name"
    with pytest.raises(ValidationError) as err:
        schema_from_dict(doc)
    assert "primary key" in str(err.value)


def test_duplicate_names_rejected():
    doc = json.loads(json.dumps(TRIO_SCHEMA))
    doc["tables"].append(doc["tables"][0])
    doc["tables"][1]["columns"].append({"name": "id", "semantic_type": "identifier"})
    problems = validate_schema(_build_unvalidated(doc))
    assert any("duplicate table" in p for p in problems)
    assert any("duplicate column" in p for p in problems)


def _build_unvalidated(doc):
    # Build the value objects without the load-time validation gate.
    from catforge.schema import Column, ForeignKey, Schema, Table

    tables = tuple(
        Table(
            name=t["name"],
            primary_key=t["primary_key"],
            columns=tuple(
                Column(name=c["name"], semantic_type=c["semantic_type"])
                for c in t["columns"]
            ),
        )
        for t in doc["tables"]
    )
    fks = tuple(ForeignKey(**f) for f in doc["foreign_keys"])
    return Schema(tables=tables, foreign_keys=fks)


def test_lookup_helpers(trio_schema):
    assert trio_schema.table("city").primary_key == "id"
    assert trio_schema.column("person.age").semantic_type == "integer"
    assert trio_schema.fk_neighbors("city") == ["country", "person"]
    edge = trio_schema.join_edge("country", "city")
    assert edge is not None and edge.table == "city"
    assert trio_schema.join_edge("person", "country") is None
    with pytest.raises(UnknownTable):
        trio_schema.table("planet")
    with pytest.raises(UnknownColumn):
        trio_schema.column("person.salary")


def test_annotate_returns_new_schema(trio_schema):
    ann = ColumnAnnotation(request_preference="avoid", awareness_prior=(9, 10))
    updated = annotate(trio_schema, "person", "age", ann)
    assert updated.column("person.age").annotation == ann
    assert trio_schema.column("person.age").annotation.request_preference == "normal"
    # everything else untouched
    assert updated.column("person.name").annotation == trio_schema.column("person.name").annotation


def test_annotate_validates_inputs(trio_schema):
    with pytest.raises(ValidationError):
        annotate(trio_schema, "person", "age", ColumnAnnotation(request_preference="maybe"))
    with pytest.raises(ValidationError):
        annotate(trio_schema, "person", "age", ColumnAnnotation(awareness_prior=(3, 2)))
    with pytest.raises(UnknownColumn):
        annotate(trio_schema, "person", "salary", ColumnAnnotation())


def test_display_name_defaults_to_spaced_column(trio_schema):
    assert trio_schema.column("city.city_name").display_name == "city name"
    named = annotate(
        trio_schema, "city", "city_name", ColumnAnnotation(display_name="city")
    )
    assert named.column("city.city_name").display_name == "city"


def test_tasks_round_trip(trio_schema, trio_tasks):
    doc = tasks_to_dict(trio_tasks)
    again = tasks_from_dict(doc, trio_schema)
    assert again == trio_tasks


def test_task_confirmation_defaults(trio_tasks):
    by_name = {t.name: t for t in trio_tasks}
    assert by_name["add_person"].confirmation_required
    assert by_name["remove_person"].confirmation_required
    assert not by_name["list_people"].confirmation_required


def test_task_validation_catches_bad_references(trio_schema):
    doc = json.loads(json.dumps(TRIO_TASKS))
    doc["tasks"][0]["slots"][2]["table"] = "metropolis"
    doc["tasks"][0]["action"]["values"]["salary"] = "person_age"
    doc["tasks"][2]["action"]["projection"].append("salary")
    with pytest.raises(ValidationError) as err:
        tasks_from_dict(doc, trio_schema)
    text = str(err.value)
    assert "metropolis" in text
    assert "person.salary" in text
    assert len(err.value.violations) >= 3


def test_delete_task_must_map_primary_key(trio_schema):
    doc = json.loads(json.dumps(TRIO_TASKS))
    doc["tasks"][1]["action"]["values"] = {"name": "person"}
    with pytest.raises(ValidationError) as err:
        tasks_from_dict(doc, trio_schema)
    assert "primary key" in str(err.value)


def test_tasks_load_from_file(trio_schema, tmp_path):
    path = tmp_path / "tasks.json"
    path.write_text(json.dumps(TRIO_TASKS))
    tasks = load_tasks(path, trio_schema)
    assert [t.name for t in tasks] == ["add_person", "remove_person", "list_people"]
    assert tasks[0].slot("home_city").kind == "entity"
    assert tasks[0].entity_slots() == [tasks[0].slot("home_city")]
