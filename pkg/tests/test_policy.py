import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catforge.errors import UnknownColumn, ValidationError
from catforge.policy import (
    AwarenessModel,
    PolicyConfig,
    PolicyDecision,
    StatsCache,
    load_awareness,
    next_request,
    save_awareness,
    score_attributes,
    update_awareness,
)
from catforge.schema import ColumnAnnotation, annotate, schema_from_dict
from catforge.store import Datastore, Predicate
from catforge.values import format_value

import oracles
from conftest import store_and_predicates


def eq(attribute, value):
    return Predicate(attribute=attribute, op="eq", value=value)


CFG = PolicyConfig()


# -- config -------------------------------------------------------------------


def test_config_defaults():
    assert CFG == PolicyConfig(
        max_join_depth=2, depth_decay=0.8, list_threshold=5, avoid_penalty=0.1
    )


@pytest.mark.parametrize(
    "kwargs",
    [
        {"max_join_depth": -1},
        {"depth_decay": 0.0},
        {"depth_decay": 1.5},
        {"list_threshold": 0},
        {"avoid_penalty": -0.1},
        {"avoid_penalty": 2.0},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        PolicyConfig(**kwargs)


# -- awareness ----------------------------------------------------------------


def test_default_prior_gives_even_odds(trio_schema):
    m = AwarenessModel(trio_schema)
    assert m.estimate("person.age") == 0.5


def test_one_answer_shifts_estimate(trio_schema):
    m = AwarenessModel(trio_schema)
    update_awareness(m, "person.age", "provided")
    assert m.estimate("person.age") == 2 / 3
    assert m.counts("person.age") == (1, 1)


def test_repeated_unknowns_sink_estimate(trio_schema):
    m = AwarenessModel(trio_schema)
    for _ in range(10):
        update_awareness(m, "person.age", "unknown")
    assert m.estimate("person.age") == 1 / 12


def test_annotation_prior_feeds_estimate(trio_schema):
    # see /root/notes/decisions.md: prior (9,10) means 9 answered of 10 asked
    schema = annotate(
        trio_schema, "city", "city_name", ColumnAnnotation(awareness_prior=(9, 10))
    )
    m = AwarenessModel(schema)
    assert m.estimate("city.city_name") == 9 / 10


def test_degenerate_priors_stay_inside_unit_interval(trio_schema):
    schema = annotate(
        trio_schema, "person", "age", ColumnAnnotation(awareness_prior=(0, 0))
    )
    m = AwarenessModel(schema)
    assert m.estimate("person.age") == 0.5
    for _ in range(5):
        update_awareness(m, "person.age", "provided")
    assert m.estimate("person.age") == 1.0 - 1.0 / 7  # clamped below 1


@given(
    st.integers(0, 50),
    st.integers(0, 50),
    st.integers(0, 9),
    st.integers(0, 9),
)
def test_estimate_always_strictly_inside_unit_interval(
    asked_extra, answered_frac, known, asked_prior_extra
):
    asked = asked_extra
    answered = min(answered_frac, asked)
    prior = (known, known + asked_prior_extra)
    schema = schema_from_dict(
        {
            "tables": [
                {
                    "name": "t",
                    "primary_key": "id",
                    "columns": [
                        {"name": "id", "semantic_type": "identifier"},
                        {
                            "name": "x",
                            "semantic_type": "text",
                            "annotation": {"awareness_prior": list(prior)},
                        },
                    ],
                }
            ],
            "foreign_keys": [],
        }
    )
    m = AwarenessModel(schema)
    for i in range(asked):
        update_awareness(m, "t.x", "provided" if i < answered else "unknown")
    assert 0.0 < m.estimate("t.x") < 1.0


def test_unknown_attribute_rejected(trio_schema):
    m = AwarenessModel(trio_schema)
    with pytest.raises(UnknownColumn):
        m.estimate("person.salary")
    with pytest.raises(UnknownColumn):
        update_awareness(m, "person.salary", "provided")
    with pytest.raises(ValueError):
        update_awareness(m, "person.age", "maybe")


def test_awareness_round_trip(trio_schema, tmp_path):
    m = AwarenessModel(trio_schema)
    update_awareness(m, "person.age", "provided")
    update_awareness(m, "person.age", "unknown")
    update_awareness(m, "city.city_name", "provided")
    path = tmp_path / "awareness.json"
    save_awareness(m, path)
    again = load_awareness(path, trio_schema)
    assert again.counts("person.age") == (2, 1)
    assert again.counts("city.city_name") == (1, 1)
    assert again.estimate("person.age") == m.estimate("person.age")


def test_awareness_load_rejects_bad_counts(trio_schema, tmp_path):
    path = tmp_path / "awareness.json"
    path.write_text(json.dumps({"counts": {"person.age": {"asked": 1, "answered": 3}}}))
    with pytest.raises(ValidationError):
        load_awareness(path, trio_schema)
    path.write_text(json.dumps({"counts": {"person.salary": {"asked": 1, "answered": 0}}}))
    with pytest.raises(ValidationError):
        load_awareness(path, trio_schema)


# -- scoring ------------------------------------------------------------------


DEPTH_SCHEMA = {
    "tables": [
        {
            "name": "thing",
            "primary_key": "id",
            "columns": [
                {
                    "name": "id",
                    "semantic_type": "identifier",
                    "annotation": {"request_preference": "never"},
                },
                {"name": "quad", "semantic_type": "text"},
                {
                    "name": "parent_id",
                    "semantic_type": "identifier",
                    "annotation": {"request_preference": "never"},
                },
            ],
        },
        {
            "name": "parent",
            "primary_key": "id",
            "columns": [
                {
                    "name": "id",
                    "semantic_type": "identifier",
                    "annotation": {"request_preference": "never"},
                },
                {"name": "octo", "semantic_type": "text"},
            ],
        },
    ],
    "foreign_keys": [
        {
            "table": "thing",
            "column": "parent_id",
            "references_table": "parent",
            "references_column": "id",
        }
    ],
}


@pytest.fixture
def depth_store():
    """16 things: quad is uniform over 4 values (2 bits at depth 0), octo over
    8 values one join away (3 bits at depth 1)."""
    store = Datastore(schema_from_dict(DEPTH_SCHEMA))
    store.insert_rows(
        "parent", [{"id": f"P{j}", "octo": f"o{j}"} for j in range(8)]
    )
    store.insert_rows(
        "thing",
        [
            {"id": f"t{i}", "quad": f"q{i % 4}", "parent_id": f"P{i % 8}"}
            for i in range(16)
        ],
    )
    return store


def test_decay_trades_off_against_entropy(depth_store):
    m = AwarenessModel(depth_store.schema)
    ranked = score_attributes(depth_store, depth_store.open_candidates("thing"), m, CFG)
    assert ranked[0][0] == "parent.octo"
    assert ranked[0][1] == pytest.approx(1.2)  # 3.0 * 0.5 * 0.8
    assert ranked[1] == ("thing.quad", pytest.approx(1.0))  # 2.0 * 0.5


def test_never_columns_absent_even_with_maximal_entropy(depth_store):
    m = AwarenessModel(depth_store.schema)
    ranked = score_attributes(depth_store, depth_store.open_candidates("thing"), m, CFG)
    assert [a for a, _ in ranked] == ["parent.octo", "thing.quad"]


def test_zero_entropy_scores_zero_but_stays_listed(trio_store):
    m = AwarenessModel(trio_store.schema)
    c = trio_store.refine(
        trio_store.open_candidates("person"), eq("city.city_name", "Alba")
    )
    ranked = dict(score_attributes(trio_store, c, m, CFG))
    assert ranked["city.city_name"] == 0.0  # both remaining people live in Alba
    assert ranked["person.name"] > 0.0
    attrs = [a for a, _ in score_attributes(trio_store, c, m, CFG)]
    assert sorted(attrs) == sorted(set(attrs))  # each attribute exactly once


def test_avoid_penalty_applies(trio_store):
    schema = annotate(
        trio_store.schema, "person", "name", ColumnAnnotation(request_preference="avoid")
    )
    trio_store.replace_schema(schema)
    m = AwarenessModel(schema)
    c = trio_store.open_candidates("person")
    ranked = dict(score_attributes(trio_store, c, m, CFG))
    # name has 3 bits of entropy but the 0.1 penalty sinks it below age
    assert ranked["person.name"] == pytest.approx(3.0 * 0.5 * 0.1)
    assert ranked["person.name"] < ranked["person.age"]


def test_exclude_drops_attributes(trio_store):
    m = AwarenessModel(trio_store.schema)
    c = trio_store.open_candidates("person")
    ranked = score_attributes(
        trio_store, c, m, CFG, exclude=frozenset({"person.id", "person.name"})
    )
    assert all(a not in ("person.id", "person.name") for a, _ in ranked)


def test_ties_break_by_depth_then_name(trio_store):
    # person.id and person.name both have 3 bits; same depth, so lexicographic
    m = AwarenessModel(trio_store.schema)
    decision = next_request(trio_store, trio_store.open_candidates("person"), m, CFG)
    assert decision.kind == "ask"
    assert decision.attribute == "person.id"
    assert decision.score == pytest.approx(1.5)


# -- decisions ----------------------------------------------------------------


def test_single_candidate_resolves(trio_store):
    m = AwarenessModel(trio_store.schema)
    c = trio_store.refine(trio_store.open_candidates("person"), eq("person.name", "Ada"))
    decision = next_request(trio_store, c, m, CFG)
    assert decision == PolicyDecision.resolved("p1")


def test_few_candidates_offer_list(trio_store):
    m = AwarenessModel(trio_store.schema)
    c = trio_store.refine(trio_store.open_candidates("person"), eq("person.age", 30))
    decision = next_request(trio_store, c, m, CFG)
    assert decision.kind == "offer_list"
    assert [row["id"] for row in decision.rows] == ["p1", "p2", "p5"]


def test_no_candidates_exhausts(trio_store):
    m = AwarenessModel(trio_store.schema)
    c = trio_store.refine(trio_store.open_candidates("person"), eq("person.age", 999))
    assert next_request(trio_store, c, m, CFG) == PolicyDecision.exhausted(0)


def test_nothing_requestable_exhausts(trio_store):
    m = AwarenessModel(trio_store.schema)
    c = trio_store.open_candidates("person")
    everything = frozenset(
        a for a, _ in trio_store.reachable_attributes("person", CFG.max_join_depth)
    )
    decision = next_request(trio_store, c, m, CFG, exclude=everything)
    assert decision == PolicyDecision.exhausted(8)


def test_progress_against_truthful_user(trio_store):
    """Ask/refine cycles settle within the number of requestable attributes."""
    m = AwarenessModel(trio_store.schema)
    target = trio_store.row("person", "p4")
    c = trio_store.open_candidates("person")
    excluded = set()
    requestable = [
        a for a, _ in trio_store.reachable_attributes("person", CFG.max_join_depth)
    ]
    for _ in range(len(requestable)):
        decision = next_request(trio_store, c, m, CFG, exclude=frozenset(excluded))
        if decision.kind in ("resolved", "offer_list"):
            break
        assert decision.kind == "ask"
        excluded.add(decision.attribute)
        table, _, column = decision.attribute.partition(".")
        if table == "person":
            value = target[column]
        else:
            related = oracles.ref_related_pks(
                trio_store.schema,
                {t: dict(trio_store._rows[t]) for t in ("person", "city", "country")},
                "person",
                table,
                "p4",
            )
            value = trio_store.row(table, related[0])[column] if related else None
        if value is None:
            continue  # truthful "don't know"
        c = trio_store.refine(c, eq(decision.attribute, value))
        assert "p4" in c.row_ids
    else:
        pytest.fail("policy never settled")


@given(st.floats(min_value=0.05, max_value=1.0), store_and_predicates())
@settings(max_examples=60, deadline=None)
def test_argmax_survives_awareness_rescaling(lam, case):
    schema, countries, cities, persons, base, predicates = case
    store = Datastore(schema)
    store.insert_rows("country", countries)
    store.insert_rows("city", cities)
    store.insert_rows("person", persons)
    c = store.open_candidates(base)
    for p in predicates:
        c = store.refine(c, p)
    m = AwarenessModel(schema)

    class Scaled:
        def estimate(self, attribute):
            return lam * m.estimate(attribute)

    base_ranking = score_attributes(store, c, m, CFG)
    if len(base_ranking) < 2 or base_ranking[0][1] <= base_ranking[1][1]:
        return  # rescaling only guaranteed to preserve a unique maximum
    scaled_ranking = score_attributes(store, c, Scaled(), CFG)
    assert scaled_ranking[0][0] == base_ranking[0][0]


@given(store_and_predicates(), st.data())
@settings(max_examples=80, deadline=None)
def test_never_marked_attribute_is_never_asked(case, data):
    schema, countries, cities, persons, base, predicates = case
    never_attr = data.draw(
        st.sampled_from(["person.name", "person.age", "city.city_name"])
    )
    table, _, column = never_attr.partition(".")
    schema = annotate(schema, table, column, ColumnAnnotation(request_preference="never"))
    store = Datastore(schema)
    store.insert_rows("country", countries)
    store.insert_rows("city", cities)
    store.insert_rows("person", persons)
    m = AwarenessModel(schema)
    for i in range(data.draw(st.integers(0, 5))):
        update_awareness(m, never_attr, "provided")  # even heavy positive history
    c = store.open_candidates(base)
    for p in predicates:
        c = store.refine(c, p)
    assert all(a != never_attr for a, _ in score_attributes(store, c, m, CFG))
    decision = next_request(store, c, m, CFG)
    if decision.kind == "ask":
        assert decision.attribute != never_attr


# -- policy matches the brute-force scorer --------------------------------------


@given(store_and_predicates())
@settings(max_examples=80, deadline=None)
def test_decisions_match_reference_scorer(case):
    schema, countries, cities, persons, base, predicates = case
    store = Datastore(schema)
    store.insert_rows("country", countries)
    store.insert_rows("city", cities)
    store.insert_rows("person", persons)
    rows = {
        "country": {r["id"]: r for r in countries},
        "city": {r["id"]: r for r in cities},
        "person": {r["id"]: r for r in persons},
    }
    m = AwarenessModel(schema)
    c = store.open_candidates(base)
    for p in predicates:
        c = store.refine(c, p)

    got_ranking = score_attributes(store, c, m, CFG)
    want_ranking = oracles.ref_score_attributes(schema, rows, base, c.row_ids, {}, CFG)
    assert got_ranking == want_ranking  # scores bit-for-bit, order included

    got = next_request(store, c, m, CFG)
    want = oracles.ref_next_request(schema, rows, base, c.row_ids, {}, CFG)
    if want[0] == "ask":
        assert (got.kind, got.attribute, got.score) == want
    elif want[0] == "offer_list":
        assert got.kind == "offer_list"
        assert tuple(r["id"] for r in got.rows) == tuple(format_value(k) for k in want[1])
    elif want[0] == "resolved":
        assert (got.kind, got.entity) == want
    else:
        assert (got.kind, got.remaining) == want


# -- cache ----------------------------------------------------------------------


def test_cache_serves_hits_and_tracks_counters(trio_store):
    cache = StatsCache(trio_store)
    c = trio_store.open_candidates("person")
    first = cache.get(c, "person.age")
    second = cache.get(c, "person.age")
    assert (cache.hits, cache.misses) == (1, 1)
    assert first == second
    assert first == trio_store.column_stats(c, "person.age")


def test_cache_recomputes_after_commit_on_involved_table(trio_store):
    cache = StatsCache(trio_store)
    c = trio_store.open_candidates("person")
    before = cache.get(c, "person.age")
    trio_store.insert_rows(
        "person", [{"id": "p9", "name": "Ina", "age": 30, "city_id": "c1"}]
    )
    after = cache.get(c, "person.age")
    assert (cache.hits, cache.misses) == (0, 2)
    assert after.histogram[30] == before.histogram[30] + 1


def test_cache_survives_commits_on_uninvolved_tables(trio_store):
    cache = StatsCache(trio_store)
    c = trio_store.open_candidates("person")
    cache.get(c, "person.age")
    trio_store.insert_rows("country", [{"id": "W", "country_name": "Wye"}])
    cache.get(c, "person.age")
    assert (cache.hits, cache.misses) == (1, 1)


def test_cache_eviction_bounds_memory(trio_store):
    cache = StatsCache(trio_store, maxsize=2)
    c = trio_store.open_candidates("person")
    for attribute in ("person.age", "person.name", "city.city_name"):
        cache.get(c, attribute)
    assert len(cache._entries) == 2


@given(store_and_predicates())
@settings(max_examples=40, deadline=None)
def test_decisions_identical_with_and_without_cache(case):
    schema, countries, cities, persons, base, predicates = case
    store = Datastore(schema)
    store.insert_rows("country", countries)
    store.insert_rows("city", cities)
    store.insert_rows("person", persons)
    m = AwarenessModel(schema)
    cache = StatsCache(store)
    c = store.open_candidates(base)
    for p in predicates:
        c = store.refine(c, p)
        plain = next_request(store, c, m, CFG)
        cached = next_request(store, c, m, CFG, stats=cache.get)
        cached_again = next_request(store, c, m, CFG, stats=cache.get)
        assert plain == cached == cached_again
