"""Offline training-data synthesis.

Two generators feed the models: utterance expansion (fill templates with
real database values, then paraphrase by rule) produces the NLU corpus, and
dialogue self-play (a scripted user simulator with sampled behaviors against
the slot-filling loop) produces abstract flows the dialogue policy is derived
from. Both are pure functions of their inputs plus a seed.
"""

from __future__ import annotations

import json
import random
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import (
    EmptyColumn,
    NoFlows,
    NoTasks,
    ParseError,
    UnboundPlaceholder,
    ValidationError,
)
from .schema import Schema, TaskDefinition
from .store import Datastore
from .values import format_value

BUILTIN_INTENTS = ("affirm", "deny", "abort", "unknown_value", "greet", "bye")

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


def intent_labels(tasks: list[TaskDefinition]) -> frozenset:
    """The closed intent set: one request per task, one inform per slot,
    plus the fixed built-ins."""
    labels = set(BUILTIN_INTENTS)
    for task in tasks:
        labels.add(f"request_{task.name}")
        for slot in task.slots:
            labels.add(f"inform({slot.name})")
    return frozenset(labels)


@dataclass(frozen=True)
class Binding:
    """Where a placeholder's values come from: a database column, or a
    synthetic integer range for scalar slots."""

    column: str = ""  # qualified table.column
    low: int = 1
    high: int = 10

    @property
    def is_column(self) -> bool:
        return bool(self.column)


@dataclass(frozen=True)
class UtteranceTemplate:
    text: str
    intent: str
    bindings: tuple[tuple[str, Binding], ...] = ()

    def binding_map(self) -> dict[str, Binding]:
        return dict(self.bindings)

    def placeholders(self) -> list[str]:
        return _PLACEHOLDER.findall(self.text)


@dataclass(frozen=True)
class SlotFill:
    name: str
    value: str  # surface form as it appears in the text
    start: int
    end: int


@dataclass(frozen=True)
class AnnotatedUtterance:
    text: str
    intent: str
    slots: tuple[SlotFill, ...] = ()


def validate_templates(
    templates: list[UtteranceTemplate], schema: Schema, tasks: list[TaskDefinition]
) -> list[str]:
    problems = []
    allowed = intent_labels(tasks)
    for i, template in enumerate(templates):
        where = f"template {i} ({template.text[:40]!r})"
        if template.intent not in allowed:
            problems.append(f"{where}: intent {template.intent!r} not in the derived set")
        bound = template.binding_map()
        for name in template.placeholders():
            if name not in bound:
                problems.append(f"{where}: placeholder {{{name}}} has no binding")
        for name, binding in template.bindings:
            if binding.is_column:
                table, _, column = binding.column.partition(".")
                if not schema.has_table(table) or not schema.table(table).has_column(column):
                    problems.append(f"{where}: binding {name} -> unknown column {binding.column}")
            elif binding.low > binding.high:
                problems.append(f"{where}: binding {name} has an empty integer range")
    return problems


def templates_from_dict(
    doc: dict,
    schema: Schema,
    tasks: list[TaskDefinition],
    source: str = "<templates>",
    default_range: tuple[int, int] = (1, 10),
) -> list[UtteranceTemplate]:
    templates = []
    for traw in doc.get("templates", []):
        if "text" not in traw or "intent" not in traw:
            raise ParseError(source, f"template entry missing text/intent: {traw!r}")
        bindings = []
        for name, braw in traw.get("bindings", {}).items():
            if "column" in braw:
                bindings.append((name, Binding(column=braw["column"])))
            elif "integer_range" in braw:
                low, high = braw["integer_range"]
                bindings.append((name, Binding(low=int(low), high=int(high))))
            elif braw.get("integer"):
                # range left to configuration rather than pinned in the file
                low, high = default_range
                bindings.append((name, Binding(low=int(low), high=int(high))))
            else:
                raise ParseError(
                    source, f"binding {name!r} needs a column or integer_range"
                )
        templates.append(
            UtteranceTemplate(
                text=traw["text"], intent=traw["intent"], bindings=tuple(bindings)
            )
        )
    problems = validate_templates(templates, schema, tasks)
    if problems:
        raise ValidationError(problems)
    return templates


def templates_to_dict(templates: list[UtteranceTemplate]) -> dict:
    out = []
    for t in templates:
        entry: dict = {"text": t.text, "intent": t.intent}
        if t.bindings:
            entry["bindings"] = {
                name: (
                    {"column": b.column}
                    if b.is_column
                    else {"integer_range": [b.low, b.high]}
                )
                for name, b in t.bindings
            }
        out.append(entry)
    return {"templates": out}


def load_templates(
    path: str | Path,
    schema: Schema,
    tasks: list[TaskDefinition],
    default_range: tuple[int, int] = (1, 10),
) -> list[UtteranceTemplate]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(str(path), str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return templates_from_dict(doc, schema, tasks, source=str(path), default_range=default_range)


# -- expansion -------------------------------------------------------------------


class _Sampler:
    """Uniform without replacement, reshuffling each time the pool drains."""

    def __init__(self, values: list, rng: random.Random):
        if not values:
            raise ValueError("empty pool")
        self._pool = list(values)
        self._rng = rng
        self._queue: list = []

    def take(self):
        if not self._queue:
            self._queue = list(self._pool)
            self._rng.shuffle(self._queue)
        return self._queue.pop()


def expand_templates(
    templates: list[UtteranceTemplate],
    schema: Schema,
    store: Datastore,
    n_per_template: int,
    seed: int,
) -> list[AnnotatedUtterance]:
    """n_per_template filled copies of each template, spans included."""
    rng = random.Random(seed)
    out = []
    for template in templates:
        bound = template.binding_map()
        samplers: dict[str, _Sampler] = {}
        for name in template.placeholders():
            binding = bound.get(name)
            if binding is None:
                raise UnboundPlaceholder(template.text, name)
            if binding.is_column:
                table, _, column = binding.column.partition(".")
                values = store.column_values(table, column)
                if not values:
                    raise EmptyColumn(binding.column)
                samplers[name] = _Sampler(values, rng)
            else:
                samplers[name] = _Sampler(
                    list(range(binding.low, binding.high + 1)), rng
                )
        for _ in range(n_per_template):
            fills = {name: samplers[name].take() for name in samplers}
            out.append(_realize(template, fills))
    return out


def _realize(template: UtteranceTemplate, fills: dict) -> AnnotatedUtterance:
    parts = []
    slots = []
    cursor = 0
    # split() with one capture group alternates literal, name, literal, ...
    for i, piece in enumerate(_PLACEHOLDER.split(template.text)):
        if i % 2:
            surface = format_value(fills[piece])
            slots.append(
                SlotFill(name=piece, value=surface, start=cursor, end=cursor + len(surface))
            )
            parts.append(surface)
            cursor += len(surface)
        else:
            parts.append(piece)
            cursor += len(piece)
    return AnnotatedUtterance(
        text="".join(parts), intent=template.intent, slots=tuple(slots)
    )


def save_utterances(utterances: list[AnnotatedUtterance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u in utterances:
            fh.write(
                json.dumps(
                    {
                        "text": u.text,
                        "intent": u.intent,
                        "slots": [
                            {"name": s.name, "value": s.value, "start": s.start, "end": s.end}
                            for s in u.slots
                        ],
                    }
                )
                + "\n"
            )


def load_utterances(path: str | Path) -> list[AnnotatedUtterance]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), f"line {lineno}: {exc.msg}") from exc
            out.append(
                AnnotatedUtterance(
                    text=doc["text"],
                    intent=doc["intent"],
                    slots=tuple(
                        SlotFill(s["name"], s["value"], s["start"], s["end"])
                        for s in doc.get("slots", [])
                    ),
                )
            )
    return out


# -- paraphrasing ------------------------------------------------------------------


POLITENESS_PREFIXES = ("Hi, ", "Hello, ", "Excuse me, ")
POLITENESS_SUFFIXES = (", please", ", thanks", ", thank you")

# declarative <-> desiderative and similar phrase rewrites, applied both ways
REWRITES = (
    ("i need", "i would like"),
    ("i want to", "i would like to"),
    ("can you", "could you"),
    ("show me", "let me see"),
    ("give me", "get me"),
)


def load_lexicon(path: str | Path) -> list[list[str]]:
    """Synonym groups, one comma-separated group per line. '#' comments."""
    groups = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        group = [w.strip().lower() for w in line.split(",") if w.strip()]
        if len(group) >= 2:
            groups.append(group)
    return groups


def _protect(text: str) -> tuple[str, list[str]]:
    names = _PLACEHOLDER.findall(text)
    protected = _PLACEHOLDER.sub("\x00", text)
    return protected, names


def _restore(protected: str, names: list[str]) -> str:
    out = protected
    for name in names:
        out = out.replace("\x00", "{" + name + "}", 1)
    return out


def _match_case(replacement: str, original: str) -> str:
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def _phrase_swaps(text: str, lexicon) -> list[str]:
    """Every single-rule application: synonym substitution (all occurrences
    of one word), or one phrase rewrite in either direction."""
    results = []
    for group in lexicon:
        for word in group:
            pattern = re.compile(rf"\b{re.escape(word)}\b", re.IGNORECASE)
            if not pattern.search(text):
                continue
            for other in group:
                if other == word:
                    continue
                swapped = pattern.sub(lambda m: _match_case(other, m.group(0)), text)
                if swapped != text:
                    results.append(swapped)
    for a, b in REWRITES:
        for src, dst in ((a, b), (b, a)):
            pattern = re.compile(rf"\b{re.escape(src)}\b", re.IGNORECASE)
            if pattern.search(text):
                swapped = pattern.sub(lambda m: _match_case(dst, m.group(0)), text)
                if swapped != text:
                    results.append(swapped)
    return results


def _politeness_variants(text: str) -> list[str]:
    results = []
    lowered = text.lower()
    if not any(lowered.startswith(p.lower()) for p in POLITENESS_PREFIXES):
        for prefix in POLITENESS_PREFIXES:
            body = text
            # keep "I ..." capitalized; otherwise the sentence continues in lowercase
            if body[:1].isupper() and not (body.startswith("I ") or body.startswith("I'")):
                body = body[:1].lower() + body[1:]
            results.append(prefix + body)
    stripped = text.rstrip(".!?")
    tail = text[len(stripped):]
    if not any(stripped.lower().endswith(s.lower()) for s in POLITENESS_SUFFIXES):
        for suffix in POLITENESS_SUFFIXES:
            results.append(stripped + suffix + tail)
    return results


def paraphrase(
    template: UtteranceTemplate, lexicon, k: int, seed: int
) -> list[UtteranceTemplate]:
    """Up to k distinct rewrites of the template. Placeholders and intent are
    untouched; duplicates (including the source) are dropped."""
    protected, names = _protect(template.text)
    seen = {protected}
    variants: list[str] = []
    queue = [protected]
    rng = random.Random(seed)
    while queue and len(variants) < k:
        current = queue.pop(0)
        candidates = _phrase_swaps(current, lexicon) + _politeness_variants(current)
        rng.shuffle(candidates)
        for candidate in candidates:
            if candidate in seen:
                continue
            seen.add(candidate)
            variants.append(candidate)
            queue.append(candidate)
            if len(variants) >= k:
                break
    return [replace(template, text=_restore(v, names)) for v in variants]


# -- dialogue self-play ----------------------------------------------------------


@dataclass(frozen=True)
class UserProfile:
    p_abort: float = 0.1
    p_overanswer: float = 0.2
    p_change_mind: float = 0.1

    def __post_init__(self):
        for name in ("p_abort", "p_overanswer", "p_change_mind"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


DEFAULT_PROFILES = (
    UserProfile(p_abort=0.0, p_overanswer=0.0, p_change_mind=0.0),
    UserProfile(p_abort=0.0, p_overanswer=0.5, p_change_mind=0.2),
    UserProfile(p_abort=0.3, p_overanswer=0.1, p_change_mind=0.1),
)


@dataclass(frozen=True)
class DialogueFlow:
    turns: tuple[tuple[str, str], ...]  # (actor, action label)
    task: str
    profile: UserProfile = UserProfile()
    seed: int = 0
    goals: tuple[tuple[str, str], ...] = ()  # entity slot -> chosen row id


def inform_label(slot_names) -> str:
    return f"inform({','.join(sorted(slot_names))})"


def phase_after(bot_action: str, current: str) -> str:
    """The dialogue phase following a bot action; mirrored by the runtime
    engine so derived policy keys line up."""
    if bot_action.startswith("identify_"):
        return "identifying_" + bot_action[len("identify_"):]
    if bot_action.startswith("request_slot("):
        return "collecting_" + bot_action[len("request_slot("):-1]
    if bot_action == "confirm":
        return "confirming"
    return current


def simulate_dialogues(
    tasks: list[TaskDefinition],
    schema: Schema,
    store: Datastore | None,
    profiles,
    n: int,
    seed: int,
) -> list[DialogueFlow]:
    """n abstract flows from self-play. Entity identification collapses into
    one identify_<table> bot action; per-flow behavior comes from a sampled
    profile. Deterministic under seed."""
    if not tasks:
        raise NoTasks()
    profiles = list(profiles) if profiles else list(DEFAULT_PROFILES)
    rng = random.Random(seed)
    flows = []
    for _ in range(n):
        task = rng.choice(tasks)
        profile = rng.choice(profiles)
        goals = []
        if store is not None:
            for slot in task.entity_slots():
                ids = sorted(store.all_ids(slot.table), key=format_value)
                if ids:
                    goals.append((slot.name, format_value(rng.choice(ids))))
        flows.append(_play_one(task, profile, rng, tuple(sorted(goals)), seed))
    return flows


def _play_one(
    task: TaskDefinition,
    profile: UserProfile,
    rng: random.Random,
    goals: tuple,
    seed: int,
) -> DialogueFlow:
    turns: list[tuple[str, str]] = [("user", f"request_{task.name}")]
    filled: set[str] = set()
    changed_mind = False

    def remaining() -> list:
        return [s for s in task.slots if s.name not in filled]

    while True:
        pending = remaining()
        if pending:
            slot = pending[0]
            if slot.kind == "entity":
                turns.append(("bot", f"identify_{slot.table}"))
            else:
                turns.append(("bot", f"request_slot({slot.name})"))
            if rng.random() < profile.p_abort:
                turns.append(("user", "abort"))
                turns.append(("bot", "handle_abort"))
                break
            informed = [slot.name]
            others = [s.name for s in pending[1:]]
            if others and rng.random() < profile.p_overanswer:
                informed.append(rng.choice(others))
            turns.append(("user", inform_label(informed)))
            filled.update(informed)
            continue
        turns.append(("bot", "confirm"))
        if rng.random() < profile.p_abort:
            turns.append(("user", "abort"))
            turns.append(("bot", "handle_abort"))
            break
        if not changed_mind and filled and rng.random() < profile.p_change_mind:
            changed_mind = True
            slot_name = rng.choice(sorted(filled))
            turns.append(("user", inform_label([slot_name])))
            continue  # bot re-confirms with the updated value
        turns.append(("user", "affirm"))
        turns.append(("bot", "execute_transaction"))
        break
    return DialogueFlow(
        turns=tuple(turns), task=task.name, profile=profile, seed=seed, goals=goals
    )


def flow_violations(flow: DialogueFlow, tasks: list[TaskDefinition]) -> list[str]:
    """Structural checks; an empty list means the flow is well formed."""
    problems = []
    turns = flow.turns
    if not turns:
        return ["flow has no turns"]
    task_names = {t.name for t in tasks}
    actor0, action0 = turns[0]
    if actor0 != "user" or not action0.startswith("request_"):
        problems.append(f"first turn must be a user request, got {turns[0]}")
    elif action0[len("request_"):] not in task_names:
        problems.append(f"first turn requests unknown task: {action0}")
    for i in range(1, len(turns)):
        if turns[i][0] == turns[i - 1][0]:
            problems.append(f"turns {i - 1} and {i} have the same actor")
    if turns[-1] not in (("bot", "execute_transaction"), ("bot", "handle_abort")):
        problems.append(f"last turn not terminal: {turns[-1]}")
    for i, (actor, action) in enumerate(turns):
        if action == "execute_transaction":
            if i < 2 or turns[i - 1] != ("user", "affirm") or turns[i - 2] != ("bot", "confirm"):
                problems.append(f"execute_transaction at turn {i} lacks confirm/affirm")
            if i != len(turns) - 1:
                problems.append(f"execute_transaction at turn {i} is not terminal")
    return problems


def save_flows(flows: list[DialogueFlow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for flow in flows:
            fh.write(
                json.dumps(
                    {
                        "turns": [list(t) for t in flow.turns],
                        "task": flow.task,
                        "profile": {
                            "p_abort": flow.profile.p_abort,
                            "p_overanswer": flow.profile.p_overanswer,
                            "p_change_mind": flow.profile.p_change_mind,
                        },
                        "seed": flow.seed,
                        "goals": dict(flow.goals),
                    }
                )
                + "\n"
            )


def load_flows(path: str | Path) -> list[DialogueFlow]:
    flows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), f"line {lineno}: {exc.msg}") from exc
            flows.append(
                DialogueFlow(
                    turns=tuple((a, b) for a, b in doc["turns"]),
                    task=doc["task"],
                    profile=UserProfile(**doc.get("profile", {})),
                    seed=doc.get("seed", 0),
                    goals=tuple(sorted(doc.get("goals", {}).items())),
                )
            )
    return flows


# -- dialogue policy from flows -----------------------------------------------------


def _action_priority(action: str) -> tuple[int, str]:
    """Fixed tie-break order for equally common actions: safety first, then
    commit steps, then questions, lexicographic within a class."""
    if action == "handle_abort":
        rank = 0
    elif action == "execute_transaction":
        rank = 1
    elif action == "confirm":
        rank = 2
    elif action.startswith("identify_"):
        rank = 3
    elif action.startswith("request_slot("):
        rank = 4
    else:
        rank = 5
    return (rank, action)


@dataclass(frozen=True)
class DMPolicy:
    """Next-bot-action table keyed by (task, phase, last user action)."""

    table: tuple[tuple[tuple[str, str, str], str], ...] = ()
    support: tuple[tuple[tuple[str, str, str], tuple[int, int]], ...] = field(
        default=(), compare=False
    )

    def __post_init__(self):
        object.__setattr__(self, "_lookup", dict(self.table))

    def action_for(self, task: str, phase: str, last_user_action: str) -> str | None:
        return self._lookup.get((task, phase, last_user_action))

    def to_dict(self) -> dict:
        support = dict(self.support)
        entries = []
        for key, action in sorted(self.table):
            votes, total = support.get(key, (0, 0))
            entries.append(
                {
                    "task": key[0],
                    "phase": key[1],
                    "user_action": key[2],
                    "action": action,
                    "votes": votes,
                    "total": total,
                }
            )
        return {"policy": entries}

    @classmethod
    def from_dict(cls, doc: dict) -> "DMPolicy":
        table = []
        support = []
        for entry in doc.get("policy", []):
            key = (entry["task"], entry["phase"], entry["user_action"])
            table.append((key, entry["action"]))
            support.append((key, (entry.get("votes", 0), entry.get("total", 0))))
        return cls(table=tuple(sorted(table)), support=tuple(sorted(support)))


def derive_dm_policy(flows: list[DialogueFlow]) -> DMPolicy:
    """Majority next bot action per abstracted state, ties broken by the
    fixed action priority."""
    if not flows:
        raise NoFlows()
    votes: dict[tuple[str, str, str], Counter] = {}
    for flow in flows:
        phase = "opening"
        for i, (actor, action) in enumerate(flow.turns):
            if actor == "bot":
                phase = phase_after(action, phase)
                continue
            if i + 1 >= len(flow.turns):
                break
            key = (flow.task, phase, action)
            votes.setdefault(key, Counter())[flow.turns[i + 1][1]] += 1
    table = []
    support = []
    for key, counter in votes.items():
        best = min(
            counter.items(), key=lambda item: (-item[1], _action_priority(item[0]))
        )
        table.append((key, best[0]))
        support.append((key, (best[1], sum(counter.values()))))
    return DMPolicy(table=tuple(sorted(table)), support=tuple(sorted(support)))
