import pytest
from hypothesis import strategies as st

from catforge.schema import schema_from_dict, tasks_from_dict
from catforge.store import Datastore, Predicate

TRIO_SCHEMA = {
    "tables": [
        {
            "name": "person",
            "primary_key": "id",
            "columns": [
                {"name": "id", "semantic_type": "identifier"},
                {"name": "name", "semantic_type": "text"},
                {"name": "age", "semantic_type": "integer"},
                {"name": "city_id", "semantic_type": "identifier"},
            ],
        },
        {
            "name": "city",
            "primary_key": "id",
            "columns": [
                {"name": "id", "semantic_type": "identifier"},
                {"name": "city_name", "semantic_type": "text"},
                {"name": "country_id", "semantic_type": "identifier"},
            ],
        },
        {
            "name": "country",
            "primary_key": "id",
            "columns": [
                {"name": "id", "semantic_type": "identifier"},
                {"name": "country_name", "semantic_type": "text"},
            ],
        },
    ],
    "foreign_keys": [
        {
            "table": "person",
            "column": "city_id",
            "references_table": "city",
            "references_column": "id",
        },
        {
            "table": "city",
            "column": "country_id",
            "references_table": "country",
            "references_column": "id",
        },
    ],
}

TRIO_TASKS = {
    "tasks": [
        {
            "name": "add_person",
            "slots": [
                {"name": "person_name", "kind": "scalar", "semantic_type": "text"},
                {"name": "person_age", "kind": "scalar", "semantic_type": "integer"},
                {"name": "home_city", "kind": "entity", "table": "city"},
            ],
            "action": {
                "type": "insert",
                "table": "person",
                "values": {
                    "name": "person_name",
                    "age": "person_age",
                    "city_id": "home_city",
                },
            },
        },
        {
            "name": "remove_person",
            "slots": [{"name": "person", "kind": "entity", "table": "person"}],
            "action": {"type": "delete", "table": "person", "values": {"id": "person"}},
        },
        {
            "name": "list_people",
            "slots": [
                {"name": "person", "kind": "entity", "table": "person", "required": False},
            ],
            "action": {
                "type": "query",
                "table": "person",
                "projection": ["id", "name", "age"],
            },
        },
    ]
}


@pytest.fixture
def trio_schema():
    return schema_from_dict(TRIO_SCHEMA)


@pytest.fixture
def trio_tasks(trio_schema):
    return tasks_from_dict(TRIO_TASKS, trio_schema)


NAMES = ["Ada", "Bo", "Cy", "Dee"]
CITY_NAMES = ["Alba", "Alta", "Brumal"]
COUNTRY_NAMES = ["Xanadu", "Ys"]


@st.composite
def store_and_predicates(draw):
    """Random small dataset over the trio schema plus a refinement chain."""
    schema = schema_from_dict(TRIO_SCHEMA)
    n_country = draw(st.integers(1, 2))
    n_city = draw(st.integers(1, 4))
    n_person = draw(st.integers(1, 6))
    countries = [
        {"id": f"K{i}", "country_name": draw(st.sampled_from(COUNTRY_NAMES))}
        for i in range(n_country)
    ]
    cities = [
        {
            "id": f"c{i}",
            "city_name": draw(st.sampled_from(CITY_NAMES)),
            "country_id": draw(
                st.one_of(st.none(), st.sampled_from([c["id"] for c in countries]))
            ),
        }
        for i in range(n_city)
    ]
    persons = [
        {
            "id": f"p{i}",
            "name": draw(st.sampled_from(NAMES)),
            "age": draw(st.one_of(st.none(), st.integers(20, 24))),
            "city_id": draw(
                st.one_of(st.none(), st.sampled_from([c["id"] for c in cities]))
            ),
        }
        for i in range(n_person)
    ]
    base = draw(st.sampled_from(["person", "city", "country"]))
    predicate_pool = st.one_of(
        st.builds(
            Predicate,
            attribute=st.just("person.age"),
            op=st.sampled_from(["eq", "lt", "ge"]),
            value=st.integers(20, 24),
        ),
        st.builds(
            Predicate,
            attribute=st.just("city.city_name"),
            op=st.just("eq"),
            value=st.sampled_from(CITY_NAMES),
        ),
        st.builds(
            Predicate,
            attribute=st.just("person.name"),
            op=st.just("fuzzy_eq"),
            value=st.sampled_from(["Adda", "Bo", "Co", "Dee"]),
            max_edits=st.integers(0, 2),
        ),
        st.builds(
            Predicate,
            attribute=st.just("country.country_name"),
            op=st.just("eq"),
            value=st.sampled_from(COUNTRY_NAMES),
        ),
    )
    predicates = draw(st.lists(predicate_pool, max_size=3))
    return schema, countries, cities, persons, base, predicates


@pytest.fixture
def trio_store(trio_schema):
    """Three countries, four cities, eight people. Small enough to check any
    statistic by hand."""
    store = Datastore(trio_schema)
    store.insert_rows(
        "country",
        [
            {"id": "X", "country_name": "Xanadu"},
            {"id": "Y", "country_name": "Ys"},
            {"id": "Z", "country_name": "Zembla"},
        ],
    )
    store.insert_rows(
        "city",
        [
            {"id": "c1", "city_name": "Alba", "country_id": "X"},
            {"id": "c2", "city_name": "Brumal", "country_id": "X"},
            {"id": "c3", "city_name": "Cinder", "country_id": "Y"},
            {"id": "c4", "city_name": "Dunmore", "country_id": "Z"},
        ],
    )
    store.insert_rows(
        "person",
        [
            {"id": "p1", "name": "Ada", "age": 30, "city_id": "c1"},
            {"id": "p2", "name": "Bo", "age": 30, "city_id": "c1"},
            {"id": "p3", "name": "Cy", "age": 41, "city_id": "c2"},
            {"id": "p4", "name": "Dee", "age": 52, "city_id": "c2"},
            {"id": "p5", "name": "Edu", "age": 30, "city_id": "c3"},
            {"id": "p6", "name": "Fio", "age": 63, "city_id": "c3"},
            {"id": "p7", "name": "Gus", "age": None, "city_id": "c4"},
            {"id": "p8", "name": "Hal", "age": 74, "city_id": None},
        ],
    )
    return store
