"""Understanding user turns: intent classification and slot extraction.

The intent model is a multinomial token-count classifier trained on the
synthesized corpus, with slot values abstracted to type tokens so it learns
sentence frames rather than the values themselves. Slot extraction matches
text n-grams against gazetteers of live database values with a bounded edit
distance, which is what corrects user misspellings. Both stages are pure and
deterministic; the pipeline only rebuilds gazetteers when the store version
moves.
"""

from __future__ import annotations

import datetime as dt
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .datagen import AnnotatedUtterance
from .errors import InsufficientCorpus, ParseError, Unparseable
from .schema import SlotSpec, TaskDefinition
from .store import Datastore
from .textmatch import damerau_levenshtein, fold, match_threshold
from .values import NUMBER_WORDS, format_value, parse_value

FALLBACK_INTENT = "fallback"

# slot-type tokens like <movie_title> survive tokenization as single units
_TOKEN = re.compile(r"<[a-z0-9_]+>|[a-z0-9']+")
_WORD_SPAN = re.compile(r"[A-Za-z0-9':-]+")
_ISO_DATE = re.compile(r"\b\d{4}-\d{2}-\d{2}\b")
_CLOCK_TIME = re.compile(r"\b\d{1,2}:\d{2}\b")
_DECIMAL = re.compile(r"\b\d+\.\d+\b")
_INTEGER = re.compile(r"\b\d+\b")

RELATIVE_DAYS = {"today": 0, "tonight": 0, "tomorrow": 1}

# function words may equal a gazetteer value outright, but a fuzzy match
# from "to" or "is" to some two-letter name is always noise
_STOPWORDS = frozenset(
    """a an and any all are at be by can could did do for get got had has have
    he her him his how i in is it its let may me my new no not now of off on
    one or our out per she so that the them then there these they this those
    to want was we what when who why will with would yes you your please""".split()
)


@dataclass(frozen=True)
class NluConfig:
    smoothing: float = 1.0
    confidence_floor: float = 0.3
    fuzzy_cap: int = 2  # hard edit-distance cap regardless of value length
    max_ngram: int = 5

    def __post_init__(self):
        if self.smoothing <= 0:
            raise ValueError(f"smoothing must be positive, got {self.smoothing}")
        if not 0.0 <= self.confidence_floor <= 1.0:
            raise ValueError(f"confidence_floor must be in [0, 1], got {self.confidence_floor}")
        if self.fuzzy_cap < 0 or self.max_ngram < 1:
            raise ValueError("fuzzy_cap must be >= 0 and max_ngram >= 1")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def slotted_text(utterance: AnnotatedUtterance) -> str:
    """The utterance with each slot value replaced by its type token."""
    text = utterance.text
    for slot in sorted(utterance.slots, key=lambda s: s.start, reverse=True):
        text = text[: slot.start] + f"<{slot.name}>" + text[slot.end :]
    return text


@dataclass
class IntentModel:
    """Multinomial naive-Bayes intent classifier over abstracted tokens."""

    intents: tuple[str, ...]
    priors: dict  # intent -> prior probability
    token_counts: dict  # intent -> {token: count}
    total_tokens: dict  # intent -> sum of its token counts
    vocabulary: frozenset
    smoothing: float = 1.0


def train_intent_classifier(
    corpus: list[AnnotatedUtterance], config: NluConfig | None = None
) -> IntentModel:
    """Fit token statistics per intent. The corpus must cover >= 2 intents."""
    config = config or NluConfig()
    if not corpus:
        raise InsufficientCorpus("empty corpus")
    doc_counts: Counter = Counter()
    token_counts: dict[str, Counter] = {}
    vocabulary = set()
    for utterance in corpus:
        tokens = tokenize(slotted_text(utterance))
        doc_counts[utterance.intent] += 1
        bucket = token_counts.setdefault(utterance.intent, Counter())
        bucket.update(tokens)
        vocabulary.update(tokens)
    if len(doc_counts) < 2:
        raise InsufficientCorpus(
            f"need at least 2 intents, corpus has {len(doc_counts)}"
        )
    total_docs = sum(doc_counts.values())
    intents = tuple(sorted(doc_counts))
    return IntentModel(
        intents=intents,
        priors={i: doc_counts[i] / total_docs for i in intents},
        token_counts={i: dict(token_counts[i]) for i in intents},
        total_tokens={i: sum(token_counts[i].values()) for i in intents},
        vocabulary=frozenset(vocabulary),
        smoothing=config.smoothing,
    )


def intent_distribution(model: IntentModel, text: str) -> dict:
    """Posterior probability per intent; values sum to 1."""
    tokens = tokenize(text)
    # +1 in the denominator reserves smoothed mass for unseen tokens
    denom_extra = model.smoothing * (len(model.vocabulary) + 1)
    log_scores = {}
    for intent in model.intents:
        counts = model.token_counts[intent]
        denom = model.total_tokens[intent] + denom_extra
        score = math.log(model.priors[intent])
        for token in tokens:
            score += math.log((counts.get(token, 0) + model.smoothing) / denom)
        log_scores[intent] = score
    peak = max(log_scores.values())
    expd = {intent: math.exp(s - peak) for intent, s in log_scores.items()}
    total = sum(expd.values())
    return {intent: v / total for intent, v in expd.items()}


def classify(
    model: IntentModel, text: str, config: NluConfig | None = None
) -> tuple[str, float]:
    """Argmax intent and its posterior; low confidence yields the fallback."""
    config = config or NluConfig()
    posterior = intent_distribution(model, text)
    intent, confidence = min(posterior.items(), key=lambda kv: (-kv[1], kv[0]))
    if confidence < config.confidence_floor:
        return FALLBACK_INTENT, confidence
    return intent, confidence


def model_to_dict(model: IntentModel) -> dict:
    return {
        "smoothing": model.smoothing,
        "intents": list(model.intents),
        "priors": {i: model.priors[i] for i in model.intents},
        "token_counts": {
            i: dict(sorted(model.token_counts[i].items())) for i in model.intents
        },
        "total_tokens": {i: model.total_tokens[i] for i in model.intents},
        "vocabulary": sorted(model.vocabulary),
    }


def model_from_dict(doc: dict) -> IntentModel:
    return IntentModel(
        intents=tuple(doc["intents"]),
        priors=dict(doc["priors"]),
        token_counts={i: dict(c) for i, c in doc["token_counts"].items()},
        total_tokens=dict(doc["total_tokens"]),
        vocabulary=frozenset(doc["vocabulary"]),
        smoothing=doc.get("smoothing", 1.0),
    )


def save_model(model: IntentModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2), encoding="utf-8")


def load_model(path: str | Path) -> IntentModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(str(path), str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return model_from_dict(doc)


# -- value normalization --------------------------------------------------------


def normalize_value(raw: str, semantic_type: str, clock: dt.datetime | None = None):
    """Surface form to typed value. Relative day words resolve against the
    session clock; number words cover one through twenty, larger counts must
    be digits."""
    raw = raw.strip()
    if not raw:
        raise Unparseable(raw, semantic_type)
    folded = fold(raw)
    if semantic_type == "integer" and folded in NUMBER_WORDS:
        return NUMBER_WORDS[folded]
    if semantic_type == "date" and folded in RELATIVE_DAYS:
        now = clock if clock is not None else dt.datetime.now()
        return now.date() + dt.timedelta(days=RELATIVE_DAYS[folded])
    return parse_value(raw, semantic_type)


# -- slot extraction --------------------------------------------------------------


@dataclass(frozen=True)
class Gazetteer:
    """One entity slot's live value list, bound to the store column the
    values came from."""

    slot: str
    attribute: str  # qualified table.column
    values: tuple[str, ...]


@dataclass(frozen=True)
class SlotMatch:
    slot: str
    value: object  # normalized: a store value for entities, typed for scalars
    raw: str  # the text span as the user wrote it
    start: int
    end: int
    distance: int


@dataclass(frozen=True)
class NluResult:
    intent: str
    confidence: float
    slots: tuple[SlotMatch, ...] = ()


def label_column(table) -> str | None:
    """The column users name rows by: the first text column."""
    for column in table.columns:
        if column.semantic_type == "text":
            return column.name
    return None


def build_gazetteers(store: Datastore, tasks: list[TaskDefinition]) -> list[Gazetteer]:
    """One gazetteer per entity slot, from the slot table's label column."""
    out: dict[tuple[str, str], Gazetteer] = {}
    for task in tasks:
        for slot in task.entity_slots():
            table = store.schema.table(slot.table)
            column = label_column(table)
            if column is None:
                continue
            key = (slot.name, f"{slot.table}.{column}")
            if key in out:
                continue
            values = tuple(
                format_value(v) for v in store.column_values(slot.table, column)
            )
            out[key] = Gazetteer(slot=slot.name, attribute=key[1], values=values)
    return [out[key] for key in sorted(out)]


def _ngram_spans(text: str, max_ngram: int) -> list[tuple[int, int]]:
    words = [(m.start(), m.end()) for m in _WORD_SPAN.finditer(text)]
    spans = []
    for i in range(len(words)):
        for j in range(i, min(i + max_ngram, len(words))):
            spans.append((words[i][0], words[j][1]))
    return spans


def _entity_candidates(
    text: str, gazetteers: list[Gazetteer], config: NluConfig
) -> list[SlotMatch]:
    candidates = []
    spans = _ngram_spans(text, config.max_ngram)
    for gazetteer in gazetteers:
        for value in gazetteer.values:
            value_f = fold(value)
            threshold = match_threshold(value_f, config.fuzzy_cap)
            for start, end in spans:
                raw = text[start:end]
                if abs(len(raw) - len(value_f)) > threshold:
                    continue
                raw_f = fold(raw)
                cap = 0 if raw_f in _STOPWORDS else threshold
                d = damerau_levenshtein(raw_f, value_f, cap=cap)
                if d <= cap:
                    candidates.append(
                        SlotMatch(gazetteer.slot, value, raw, start, end, d)
                    )
    return candidates


def _scalar_candidates(
    text: str, scalar_slots: list[SlotSpec], clock: dt.datetime | None
) -> list[SlotMatch]:
    candidates = []
    for slot in scalar_slots:
        found: list[tuple[int, int, str]] = []
        if slot.semantic_type == "integer":
            found = [(m.start(), m.end(), m.group()) for m in _INTEGER.finditer(text)]
            for m in _WORD_SPAN.finditer(text):
                if m.group().lower() in NUMBER_WORDS:
                    found.append((m.start(), m.end(), m.group()))
            found.sort()
        elif slot.semantic_type == "decimal":
            found = [(m.start(), m.end(), m.group()) for m in _DECIMAL.finditer(text)]
        elif slot.semantic_type == "date":
            found = [(m.start(), m.end(), m.group()) for m in _ISO_DATE.finditer(text)]
            for m in _WORD_SPAN.finditer(text):
                if m.group().lower() in RELATIVE_DAYS:
                    found.append((m.start(), m.end(), m.group()))
            found.sort()
        elif slot.semantic_type == "time":
            found = [(m.start(), m.end(), m.group()) for m in _CLOCK_TIME.finditer(text)]
        for start, end, raw in found:
            try:
                value = normalize_value(raw, slot.semantic_type, clock)
            except Unparseable:
                continue
            candidates.append(SlotMatch(slot.name, value, raw, start, end, 0))
    return candidates


def extract_slots(
    text: str,
    gazetteers: list[Gazetteer],
    scalar_slots: list[SlotSpec] | tuple = (),
    config: NluConfig | None = None,
    clock: dt.datetime | None = None,
) -> list[SlotMatch]:
    """Non-overlapping slot matches, best first.

    Entity slots fuzzy-match gazetteer values over text n-grams; scalar slots
    use pattern rules per semantic type. Competing matches are ranked by
    (distance, longer value, earlier position) and each slot is filled at
    most once.
    """
    config = config or NluConfig()
    candidates = _entity_candidates(text, gazetteers, config)
    candidates += _scalar_candidates(text, list(scalar_slots), clock)
    candidates.sort(
        key=lambda m: (m.distance, -(m.end - m.start), m.start, m.slot, str(m.value))
    )
    picked: list[SlotMatch] = []
    taken_slots = set()
    for match in candidates:
        if match.slot in taken_slots:
            continue
        if any(match.start < p.end and p.start < match.end for p in picked):
            continue
        picked.append(match)
        taken_slots.add(match.slot)
    picked.sort(key=lambda m: m.start)
    return picked


# -- assembled pipeline ------------------------------------------------------------


class NluPipeline:
    """Classifier plus live-store slot extraction behind one parse() call.

    Gazetteers are immutable snapshots rebuilt only when a relevant table
    version moves, so database edits reflect in matching without retraining.
    """

    def __init__(
        self,
        model: IntentModel,
        store: Datastore,
        tasks: list[TaskDefinition],
        config: NluConfig | None = None,
        clock: dt.datetime | None = None,
    ):
        self.model = model
        self.store = store
        self.tasks = list(tasks)
        self.config = config or NluConfig()
        self.clock = clock
        self._tables = tuple(
            sorted({s.table for t in self.tasks for s in t.entity_slots()})
        )
        self._stamp: tuple | None = None
        self._gazetteers: list[Gazetteer] = []

    def gazetteers(self) -> list[Gazetteer]:
        stamp = self.store.versions_for(self._tables)
        if stamp != self._stamp:
            self._gazetteers = build_gazetteers(self.store, self.tasks)
            self._stamp = stamp
        return self._gazetteers

    def _scalar_slots(self, task: TaskDefinition | None) -> list[SlotSpec]:
        tasks = [task] if task is not None else self.tasks
        out = []
        seen = set()
        for t in tasks:
            for slot in t.slots:
                if slot.kind == "scalar" and slot.name not in seen:
                    seen.add(slot.name)
                    out.append(slot)
        return out

    def parse(self, text: str, task: TaskDefinition | None = None) -> NluResult:
        """Slots first, then intent over the value-abstracted text."""
        slots = extract_slots(
            text,
            self.gazetteers(),
            self._scalar_slots(task),
            self.config,
            self.clock,
        )
        abstracted = text
        for match in sorted(slots, key=lambda m: m.start, reverse=True):
            abstracted = (
                abstracted[: match.start] + f"<{match.slot}>" + abstracted[match.end :]
            )
        intent, confidence = classify(self.model, abstracted, self.config)
        return NluResult(intent=intent, confidence=confidence, slots=tuple(slots))
