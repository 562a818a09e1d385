import json

import pytest

from catforge.benchmark import (
    AdaptationSpec,
    BenchmarkReport,
    StrategyStats,
    _goal_value,
    run_benchmark,
)
from catforge.errors import EmptyTable, ValidationError
from catforge.fixture import adaptation_rows, benchmark_schema, build_benchmark_store
from catforge.schema import schema_from_dict
from catforge.store import Datastore


def small_store(rows, column_type="text"):
    schema = schema_from_dict(
        {
            "tables": [
                {
                    "name": "thing",
                    "primary_key": "id",
                    "columns": [
                        {"name": "id", "semantic_type": "identifier",
                         "annotation": {"request_preference": "never"}},
                        {"name": "label", "semantic_type": column_type},
                    ],
                }
            ],
            "foreign_keys": [],
        }
    )
    store = Datastore(schema)
    store.insert_rows("thing", rows)
    return store


# -- aggregate math ----------------------------------------------------------


def test_strategy_stats_hand_oracle():
    # mean 4.5; median (4+5)/2; p90 by nearest rank: ceil(0.9*10)=9th -> 8
    stats = StrategyStats.from_turns("data_aware", list(range(10)), failures=2)
    assert stats.trials == 10
    assert stats.mean_turns == 4.5
    assert stats.median_turns == 4.5
    assert stats.p90_turns == 8.0
    assert stats.failures == 2


def test_strategy_stats_single_and_empty():
    one = StrategyStats.from_turns("static", [3], failures=0)
    assert (one.mean_turns, one.median_turns, one.p90_turns) == (3.0, 3.0, 3.0)
    empty = StrategyStats.from_turns("random", [], failures=0)
    assert empty.trials == 0
    assert empty.mean_turns == 0.0


# -- validation ----------------------------------------------------------------


def test_zero_trials_rejected():
    store = build_benchmark_store(scale=50, seed=1)
    with pytest.raises(ValidationError):
        run_benchmark(store, n_trials=0)


def test_unknown_strategy_rejected():
    store = build_benchmark_store(scale=50, seed=1)
    with pytest.raises(ValidationError):
        run_benchmark(store, strategies=("data_aware", "psychic"), n_trials=5)


def test_empty_table_rejected():
    store = Datastore(benchmark_schema())
    with pytest.raises(EmptyTable):
        run_benchmark(store, n_trials=5)


# -- trial mechanics -----------------------------------------------------------


def test_below_threshold_needs_no_questions():
    store = small_store([{"id": f"t{i}", "label": f"v{i}"} for i in range(4)])
    report = run_benchmark(store, n_trials=10, seed=1, base_table="thing")
    for stats in report.strategies.values():
        assert stats.mean_turns == 0.0
        assert stats.failures == 0


def test_indistinguishable_rows_fail():
    # one askable attribute shared by all rows: a single wasted question,
    # then nothing left to ask
    store = small_store([{"id": f"t{i}", "label": "same"} for i in range(10)])
    report = run_benchmark(store, n_trials=8, seed=1, base_table="thing")
    for stats in report.strategies.values():
        assert stats.failures == 8
        assert stats.mean_turns == 1.0


def test_goal_value_follows_foreign_keys():
    store = build_benchmark_store(scale=30, seed=3)
    row = store.row("customer", "C1")
    city = store.row("city", row["city_id"])["city_name"]
    assert _goal_value(store, "customer", "C1", "city.city_name") == city
    assert _goal_value(store, "customer", "C1", "customer.age") == row["age"]


# -- the paired comparison -------------------------------------------------------


@pytest.fixture(scope="module")
def medium_report():
    store = build_benchmark_store(scale=3000, seed=42)
    return run_benchmark(store, n_trials=120, seed=42)


def test_strategy_ordering(medium_report):
    da = medium_report.strategies["data_aware"].mean_turns
    static = medium_report.strategies["static"].mean_turns
    rand = medium_report.strategies["random"].mean_turns
    assert da <= static
    assert da < rand


def test_equal_trial_counts(medium_report):
    counts = {s.trials for s in medium_report.strategies.values()}
    assert counts == {120}


def test_same_seed_is_byte_identical():
    a = run_benchmark(build_benchmark_store(scale=400, seed=7), n_trials=30, seed=9)
    b = run_benchmark(build_benchmark_store(scale=400, seed=7), n_trials=30, seed=9)
    assert a.to_json() == b.to_json()


def test_trials_do_not_depend_on_strategy_set():
    # paired design: dropping strategies must not change the others' trials
    alone = run_benchmark(
        build_benchmark_store(scale=400, seed=7),
        strategies=("data_aware",), n_trials=25, seed=3,
    )
    together = run_benchmark(
        build_benchmark_store(scale=400, seed=7), n_trials=25, seed=3
    )
    assert alone.strategies["data_aware"] == together.strategies["data_aware"]


def test_report_json_shape(medium_report):
    doc = json.loads(medium_report.to_json())
    assert doc["trials"] == 120
    assert doc["seed"] == 42
    assert set(doc["strategies"]) == {"data_aware", "static", "random"}
    for entry in doc["strategies"].values():
        assert set(entry) == {"trials", "mean_turns", "median_turns", "p90_turns", "failures"}
    assert "adaptation" not in doc


# -- adaptation mode -----------------------------------------------------------


def test_adaptation_splits_halves_and_mutates_store():
    store = build_benchmark_store(scale=600, seed=11)
    extra = adaptation_rows(600, seed=12, start_index=601)
    report = run_benchmark(
        store, n_trials=40, seed=11,
        adaptation=AdaptationSpec(table="customer", rows=extra),
    )
    assert store.row_count("customer") == 1200
    assert report.ingest_at_trial == 20
    assert all(s.trials == 20 for s in report.pre_ingest.values())
    assert all(s.trials == 20 for s in report.post_ingest.values())
    assert all(s.trials == 40 for s in report.strategies.values())
    doc = json.loads(report.to_json())
    assert doc["adaptation"]["ingest_at_trial"] == 20
    assert set(doc["adaptation"]["post_ingest"]) == {"data_aware", "static", "random"}


def test_report_without_adaptation_has_no_halves(medium_report):
    assert medium_report.ingest_at_trial is None
    assert medium_report.pre_ingest == {}
    assert medium_report.post_ingest == {}
