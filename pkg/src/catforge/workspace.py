"""A workspace directory holding everything one agent needs: the config
file, schema/task/template definitions, CSV data, and trained artifacts.

The pipeline is file-based on purpose: generate() and train() read and
write documented formats, so every stage can be inspected, diffed, and
re-run, and a service restart reconstructs the exact same agent.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path

from .config import AppConfig, load_config
from .datagen import (
    DMPolicy,
    derive_dm_policy,
    expand_templates,
    load_flows,
    load_lexicon,
    load_templates,
    load_utterances,
    paraphrase,
    save_flows,
    save_utterances,
    simulate_dialogues,
)
from .engine import DialogueEngine, load_responses
from .errors import IoError, ParseError
from .nlu import NluPipeline, load_model, save_model, train_intent_classifier
from .policy import AwarenessModel, StatsCache, load_awareness, save_awareness
from .schema import Schema, TaskDefinition, load_schema, load_tasks, save_schema
from .store import Datastore

UTTERANCES = "utterances.jsonl"
FLOWS = "flows.jsonl"
NLU_MODEL = "nlu_model.json"
DM_POLICY = "dm_policy.json"
AWARENESS = "awareness.json"
ARTIFACTS = (UTTERANCES, FLOWS, NLU_MODEL, DM_POLICY, AWARENESS)


def ingest_order(schema: Schema) -> list[str]:
    """Table names parents-first so foreign key checks pass on ingestion."""
    pending = {t.name: set() for t in schema.tables}
    for fk in schema.foreign_keys:
        if fk.table != fk.references_table:
            pending[fk.table].add(fk.references_table)
    order = []
    while pending:
        ready = sorted(name for name, deps in pending.items() if not deps)
        if not ready:
            order.extend(sorted(pending))  # FK cycle: deterministic fallback
            break
        for name in ready:
            del pending[name]
            order.append(name)
        for deps in pending.values():
            deps.difference_update(ready)
    return order


@dataclass(frozen=True)
class PipelineStatus:
    stage: str  # "idle" | "generating" | "training" | "ready"
    utterances: int
    flows: int
    timestamps: dict

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "counts": {"utterances": self.utterances, "flows": self.flows},
            "timestamps": dict(self.timestamps),
        }


class Workspace:
    def __init__(self, root: str | Path, config: AppConfig | None = None):
        self.root = Path(root)
        self.config = config or load_config(self.root / "catforge.toml")

    # -- definition files -----------------------------------------------------

    def schema(self) -> Schema:
        return load_schema(self.config.paths.schema)

    def tasks(self, schema: Schema | None = None) -> list[TaskDefinition]:
        return load_tasks(self.config.paths.tasks, schema or self.schema())

    def templates(self, schema: Schema, tasks: list[TaskDefinition]):
        return load_templates(
            self.config.paths.templates, schema, tasks,
            default_range=self.config.datagen.integer_range,
        )

    def responses(self) -> dict:
        return load_responses(self.config.paths.responses)

    def save_schema(self, schema: Schema) -> None:
        save_schema(schema, self.config.paths.schema)

    def build_store(self, schema: Schema | None = None) -> Datastore:
        """Fresh store with every table's CSV ingested (if present)."""
        schema = schema or self.schema()
        store = Datastore(schema, max_join_depth=self.config.policy.max_join_depth)
        for table in ingest_order(schema):
            path = self.config.paths.data_dir / f"{table}.csv"
            if path.exists():
                store.ingest_csv(table, path)
        return store

    # -- artifacts --------------------------------------------------------------

    def artifact(self, name: str) -> Path:
        return self.config.paths.artifacts_dir / name

    def _write_artifact(self, name: str, writer) -> Path:
        path = self.artifact(name)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            writer(path)
        except OSError as exc:
            raise IoError(str(path), str(exc)) from exc
        return path

    def generate(self) -> dict:
        """Expand templates into a training corpus and self-play flows."""
        schema = self.schema()
        tasks = self.tasks(schema)
        store = self.build_store(schema)
        templates = self.templates(schema, tasks)
        lexicon = load_lexicon(self.config.paths.lexicon)
        cfg = self.config.datagen
        variants = []
        for i, template in enumerate(templates):
            variants.append(template)
            variants.extend(
                paraphrase(template, lexicon, cfg.paraphrase_k, cfg.corpus_seed * 7919 + i)
            )
        corpus = expand_templates(variants, schema, store, cfg.per_template, cfg.corpus_seed)
        flows = simulate_dialogues(tasks, schema, store, None, cfg.flows, cfg.flow_seed)
        self._write_artifact(UTTERANCES, lambda p: save_utterances(corpus, p))
        self._write_artifact(FLOWS, lambda p: save_flows(flows, p))
        return {"templates": len(templates), "utterances": len(corpus), "flows": len(flows)}

    def train(self) -> dict:
        """Fit the intent model and dialogue policy from generated artifacts."""
        schema = self.schema()
        corpus = load_utterances(self.artifact(UTTERANCES))
        flows = load_flows(self.artifact(FLOWS))
        model = train_intent_classifier(corpus, self.config.nlu)
        dm = derive_dm_policy(flows)
        awareness_path = self.artifact(AWARENESS)
        if awareness_path.exists():  # keep counts learned from live sessions
            awareness = load_awareness(awareness_path, schema)
        else:
            awareness = AwarenessModel(schema)
        self._write_artifact(NLU_MODEL, lambda p: save_model(model, p))
        self._write_artifact(
            DM_POLICY,
            lambda p: p.write_text(json.dumps(dm.to_dict(), indent=2) + "\n", encoding="utf-8"),
        )
        self._write_artifact(AWARENESS, lambda p: save_awareness(awareness, p))
        return {
            "intents": len(model.intents),
            "vocabulary": len(model.vocabulary),
            "dm_states": len(dm.table),
        }

    def save_awareness_state(self, awareness: AwarenessModel) -> Path:
        return self._write_artifact(AWARENESS, lambda p: save_awareness(awareness, p))

    # -- status and runtime ------------------------------------------------------

    def _count_lines(self, name: str) -> int:
        path = self.artifact(name)
        if not path.exists():
            return 0
        with open(path, encoding="utf-8") as fh:
            return sum(1 for line in fh if line.strip())

    def is_ready(self) -> bool:
        try:
            load_model(self.artifact(NLU_MODEL))
            DMPolicy.from_dict(
                json.loads(self.artifact(DM_POLICY).read_text(encoding="utf-8"))
            )
        except (OSError, ValueError, KeyError, ParseError):
            return False
        return True

    def status(self, stage: str | None = None) -> PipelineStatus:
        """Artifact-derived status; `stage` overrides for in-flight runs."""
        timestamps = {}
        for name in ARTIFACTS:
            path = self.artifact(name)
            if path.exists():
                mtime = dt.datetime.fromtimestamp(path.stat().st_mtime)
                timestamps[name] = mtime.isoformat(timespec="seconds")
        if stage is None:
            stage = "ready" if self.is_ready() else "idle"
        return PipelineStatus(
            stage=stage,
            utterances=self._count_lines(UTTERANCES),
            flows=self._count_lines(FLOWS),
            timestamps=timestamps,
        )

    def build_engine(
        self,
        store: Datastore | None = None,
        clock: dt.datetime | None = None,
    ) -> DialogueEngine:
        """The runtime agent over trained artifacts. Reuses `store` when the
        caller already holds one so live edits stay visible to the engine."""
        schema = self.schema()
        tasks = self.tasks(schema)
        store = store or self.build_store(schema)
        model = load_model(self.artifact(NLU_MODEL))
        nlu = NluPipeline(model, store, tasks, self.config.nlu, clock or self.config.clock)
        dm = DMPolicy.from_dict(
            json.loads(self.artifact(DM_POLICY).read_text(encoding="utf-8"))
        )
        awareness_path = self.artifact(AWARENESS)
        if awareness_path.exists():
            awareness = load_awareness(awareness_path, schema)
        else:
            awareness = AwarenessModel(schema)
        return DialogueEngine(
            store=store,
            tasks=tasks,
            nlu=nlu,
            dm_policy=dm,
            awareness=awareness,
            responses=self.responses(),
            policy_config=self.config.policy,
            stats_cache=StatsCache(store),
        )
