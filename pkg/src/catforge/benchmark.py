"""Turn-count comparison of attribute-selection strategies.

Each trial samples a goal row and a truthful simulated user whose
per-attribute knowledge is drawn from the awareness priors, then replays
the identical goal and knowledge against every strategy (paired design).
A turn is one attribute request; narrowing below the list threshold ends
the trial. Answers refine the candidate set exactly like live dialogue,
so the goal row always stays in it.
"""

from __future__ import annotations

import json
import math
import random
import statistics
from dataclasses import dataclass, field

from .errors import EmptyTable, ValidationError
from .policy import AwarenessModel, PolicyConfig, StatsCache, next_request
from .schema import Schema
from .store import Datastore, Predicate
from .values import value_sort_key

STRATEGIES = ("data_aware", "static", "random")


@dataclass(frozen=True)
class StrategyStats:
    strategy: str
    trials: int
    mean_turns: float
    median_turns: float
    p90_turns: float
    failures: int

    @classmethod
    def from_turns(cls, strategy: str, turns: list[int], failures: int) -> "StrategyStats":
        if not turns:
            return cls(strategy, 0, 0.0, 0.0, 0.0, failures)
        ordered = sorted(turns)
        # nearest-rank percentile
        p90 = ordered[max(0, math.ceil(0.9 * len(ordered)) - 1)]
        return cls(
            strategy=strategy,
            trials=len(turns),
            mean_turns=statistics.fmean(ordered),
            median_turns=float(statistics.median(ordered)),
            p90_turns=float(p90),
            failures=failures,
        )

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "mean_turns": self.mean_turns,
            "median_turns": self.median_turns,
            "p90_turns": self.p90_turns,
            "failures": self.failures,
        }


@dataclass(frozen=True)
class AdaptationSpec:
    """Rows ingested into `table` once half the trials have run, to test
    whether a strategy tracks distribution changes."""

    table: str
    rows: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))


@dataclass(frozen=True)
class BenchmarkReport:
    base_table: str
    trials: int
    seed: int
    strategies: dict = field(default_factory=dict)  # name -> StrategyStats
    pre_ingest: dict = field(default_factory=dict)
    post_ingest: dict = field(default_factory=dict)
    ingest_at_trial: int | None = None

    def to_dict(self) -> dict:
        out = {
            "base_table": self.base_table,
            "trials": self.trials,
            "seed": self.seed,
            "strategies": {k: v.to_dict() for k, v in self.strategies.items()},
        }
        if self.ingest_at_trial is not None:
            out["adaptation"] = {
                "ingest_at_trial": self.ingest_at_trial,
                "pre_ingest": {k: v.to_dict() for k, v in self.pre_ingest.items()},
                "post_ingest": {k: v.to_dict() for k, v in self.post_ingest.items()},
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _requestable(store: Datastore, base_table: str, cfg: PolicyConfig) -> list[str]:
    return [
        attribute
        for attribute, _ in store.reachable_attributes(base_table, cfg.max_join_depth)
        if store.schema.column(attribute).annotation.request_preference != "never"
    ]


def _static_order(store: Datastore, base_table: str, cfg: PolicyConfig) -> list[str]:
    """Whole-table distinct counts, highest first; frozen by the caller."""
    c = store.open_candidates(base_table)
    counted = [
        (attribute, store.column_stats(c, attribute, max_depth=cfg.max_join_depth).distinct)
        for attribute in _requestable(store, base_table, cfg)
    ]
    counted.sort(key=lambda item: (-item[1], item[0]))
    return [attribute for attribute, _ in counted]


def _goal_value(store: Datastore, base_table: str, pk, attribute: str):
    """The goal row's value for a possibly joined attribute. Multi-valued
    joins answer with the smallest value; no value means the user cannot
    answer truthfully and counts as not knowing."""
    table, _, column = attribute.partition(".")
    if table == base_table:
        return store.row(base_table, pk)[column]
    path = store.paths_from(base_table).get(table)
    if path is None:
        return None
    pks = (pk,)
    for frm, to in zip(path, path[1:]):
        edges = store._edge_map(frm, to)
        pks = tuple(p2 for p in pks for p2 in edges.get(p, ()))
        if not pks:
            return None
    values = [
        v for p in pks if (v := store.row(table, p)[column]) is not None
    ]
    return min(values, key=value_sort_key) if values else None


@dataclass
class _Trial:
    goal: object
    knowledge: dict
    random_order: list


def _draw_trial(pks: list, attributes: list[str], m: AwarenessModel,
                seed: int, index: int) -> _Trial:
    rng = random.Random(seed * 1_000_003 + index)
    goal = rng.choice(pks)
    knowledge = {a: rng.random() < m.estimate(a) for a in attributes}
    order = list(attributes)
    rng.shuffle(order)
    return _Trial(goal=goal, knowledge=knowledge, random_order=order)


def _run_trial(
    store: Datastore,
    base_table: str,
    trial: _Trial,
    strategy: str,
    static_order: list[str],
    m: AwarenessModel,
    cfg: PolicyConfig,
    stats,
) -> tuple[int, bool]:
    """(turns, failed). One turn per attribute request; the user answers
    with the goal row's value when they know the attribute and it is
    filled, otherwise the ask is spent for nothing."""
    c = store.open_candidates(base_table)
    asked: set[str] = set()
    turns = 0
    while True:
        if len(c.row_ids) <= cfg.list_threshold:
            return turns, False
        if strategy == "data_aware":
            decision = next_request(store, c, m, cfg, exclude=frozenset(asked), stats=stats)
            attribute = decision.attribute if decision.kind == "ask" else None
        else:
            order = static_order if strategy == "static" else trial.random_order
            attribute = next((a for a in order if a not in asked), None)
        if attribute is None:
            return turns, True
        turns += 1
        asked.add(attribute)
        if not trial.knowledge[attribute]:
            continue
        value = _goal_value(store, base_table, trial.goal, attribute)
        if value is None:
            continue
        c = store.refine(
            c, Predicate(attribute=attribute, op="eq", value=value),
            max_depth=cfg.max_join_depth,
        )


def run_benchmark(
    store: Datastore,
    schema: Schema | None = None,
    strategies=STRATEGIES,
    n_trials: int = 500,
    profile=None,
    seed: int = 42,
    *,
    base_table: str = "customer",
    config: PolicyConfig | None = None,
    adaptation: AdaptationSpec | None = None,
) -> BenchmarkReport:
    """Paired strategy comparison on one entity table.

    The static order is frozen from whole-table statistics before any trial
    runs. With `adaptation` set, its rows are ingested after trial
    n_trials // 2 (mutating `store`) and the report carries separate
    pre/post-ingest aggregates. `profile` is accepted for interface parity;
    identification trials involve no aborts or confirmations, so simulated
    users here are always minimal truthful responders.
    """
    del profile
    cfg = config or PolicyConfig()
    problems = []
    if n_trials < 1:
        problems.append(f"n_trials must be at least 1, got {n_trials}")
    unknown = [s for s in strategies if s not in STRATEGIES]
    if unknown:
        problems.append(f"unknown strategies: {unknown}; valid: {list(STRATEGIES)}")
    if not strategies:
        problems.append("at least one strategy is required")
    if problems:
        raise ValidationError(problems)
    if store.row_count(base_table) == 0:
        raise EmptyTable(base_table)

    m = AwarenessModel(schema or store.schema)
    attributes = _requestable(store, base_table, cfg)
    static_order = _static_order(store, base_table, cfg)
    cache = StatsCache(store)
    ingest_at = n_trials // 2 if adaptation is not None else None

    turns: dict[str, list[int]] = {s: [] for s in strategies}
    failed: dict[str, list[bool]] = {s: [] for s in strategies}
    pks = sorted(store.all_ids(base_table), key=value_sort_key)
    for index in range(n_trials):
        if adaptation is not None and index == ingest_at:
            store.insert_rows(adaptation.table, list(adaptation.rows))
            pks = sorted(store.all_ids(base_table), key=value_sort_key)
        trial = _draw_trial(pks, attributes, m, seed, index)
        for strategy in strategies:
            t, f = _run_trial(
                store, base_table, trial, strategy, static_order, m, cfg, cache.get
            )
            turns[strategy].append(t)
            failed[strategy].append(f)

    def summarize(subset: slice) -> dict:
        return {
            s: StrategyStats.from_turns(s, turns[s][subset], sum(failed[s][subset]))
            for s in strategies
        }

    everything = slice(None)
    return BenchmarkReport(
        base_table=base_table,
        trials=n_trials,
        seed=seed,
        strategies=summarize(everything),
        pre_ingest=summarize(slice(None, ingest_at)) if ingest_at is not None else {},
        post_ingest=summarize(slice(ingest_at, None)) if ingest_at is not None else {},
        ingest_at_trial=ingest_at,
    )
