"""Runtime dialogue management.

Each user turn runs one pipeline: understand the text, consume every slot
value it carries (over-answers included), pick the next high-level action
from the derived dialogue policy (with total rule fallbacks), and for entity
identification defer the which-attribute choice to the data-aware slot
policy. Transactions only execute after an explicit confirm/affirm pair.

The engine has no randomness of its own: replaying the same user texts
against the same store snapshot reproduces the transcript exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .datagen import DMPolicy, inform_label
from .errors import AgentNotReady, MissingTemplate, ParseError, Unparseable
from .nlu import (
    FALLBACK_INTENT,
    Gazetteer,
    NluPipeline,
    SlotMatch,
    extract_slots,
    label_column,
    normalize_value,
    tokenize,
)
from .policy import AwarenessModel, PolicyConfig, next_request, update_awareness
from .schema import SlotSpec, TaskDefinition
from .store import Datastore, Predicate, TransactionResult
from .values import format_value, value_sort_key

CONTROL_INTENTS = frozenset(
    {"affirm", "deny", "abort", "unknown_value", "greet", "bye", FALLBACK_INTENT}
)

_CLARIFY = "__clarify__"  # internal: the turn could not be used; apologize
_STEP_LIMIT = 25


@dataclass(frozen=True)
class AgentResponse:
    action: str  # "ask:<attr>", "request_slot:<slot>", "offer_list", ...
    text: str
    choices: tuple = ()  # offer_list only: row summaries
    transaction: TransactionResult | None = None


@dataclass
class DialogueState:
    session_id: str
    task: str | None = None
    phase: str = "idle"  # idle | opening | identifying:<slot> | filling:<slot> | confirming
    filled: dict = field(default_factory=dict)  # slot name -> typed value
    skipped: set = field(default_factory=set)  # optional slots the user waived
    candidates: object = None  # CandidateSet while identifying
    identify_slot: str | None = None  # entity slot the candidate set belongs to
    asked: set = field(default_factory=set)  # (slot, attribute) asked this episode
    declined: set = field(default_factory=set)  # (slot, attribute) answered unknown
    pending: dict = field(default_factory=dict)  # entity slot -> [Predicate]
    last_asked_attribute: str | None = None
    offer_ids: tuple = ()  # pks behind the last offered list, display order
    transcript: list = field(default_factory=list)

    def reset_task(self) -> None:
        self.task = None
        self.phase = "idle"
        self.filled = {}
        self.skipped = set()
        self.candidates = None
        self.identify_slot = None
        self.asked = set()
        self.declined = set()
        self.pending = {}
        self.last_asked_attribute = None
        self.offer_ids = ()


def load_responses(path: str | Path) -> dict:
    """NLG templates: action label -> list of template strings."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(str(path), str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    out = {}
    for action, templates in doc.items():
        if isinstance(templates, str):
            templates = [templates]
        out[action] = list(templates)
    return out


def render_response(responses: dict, action: str, context: dict) -> str:
    """First template for the action, placeholders filled. An exact action
    key ("ask:customer.city") beats its family key ("ask")."""
    templates = responses.get(action)
    if not templates:
        templates = responses.get(action.partition(":")[0])
    if not templates:
        raise MissingTemplate(action)
    try:
        return templates[0].format(**context)
    except (KeyError, IndexError) as exc:
        raise MissingTemplate(f"{action}: missing placeholder {exc}") from exc


def decide_action(
    policy: DMPolicy | None,
    key: tuple[str, str, str],
    task: TaskDefinition,
    filled: dict,
    skipped: set,
) -> str:
    """Total next-action choice: derived-policy lookup, then rule fallback.

    Fallback order: abort is always honored; the first unfinished slot is
    requested in declaration order; with nothing left to collect, confirm;
    an affirm while confirming executes.
    """
    _, phase, user_action = key
    if user_action == "abort":
        return "handle_abort"
    action = policy.action_for(*key) if policy is not None else None
    if action is not None and _action_applies(action, task, filled, skipped):
        return action
    if phase == "confirming" and user_action == "affirm":
        return "execute_transaction"
    for slot in task.slots:
        if slot.name in filled or slot.name in skipped:
            continue
        if slot.kind == "entity":
            return f"identify_{slot.table}"
        return f"request_slot({slot.name})"
    return "confirm"


def _action_applies(action: str, task: TaskDefinition, filled: dict, skipped: set) -> bool:
    """A derived action is only taken when its target still needs work and
    execution is not being skipped past confirmation."""
    done = set(filled) | skipped
    if action.startswith("request_slot("):
        return action[len("request_slot("):-1] not in done
    if action.startswith("identify_"):
        table = action[len("identify_"):]
        return any(
            s.kind == "entity" and s.table == table and s.name not in done
            for s in task.slots
        )
    if action == "execute_transaction":
        return all(s.name in done or not s.required for s in task.slots)
    return True


class DialogueEngine:
    """Session runtime wiring NLU, the DM policy, and the slot policy over
    one shared store. Sessions are independent; step one session at a time."""

    def __init__(
        self,
        store: Datastore,
        tasks: list[TaskDefinition],
        nlu: NluPipeline | None,
        dm_policy: DMPolicy | None,
        awareness: AwarenessModel,
        responses: dict,
        policy_config: PolicyConfig | None = None,
        stats_cache=None,
    ):
        self.store = store
        self.tasks = {t.name: t for t in tasks}
        self.nlu = nlu
        self.dm_policy = dm_policy
        self.awareness = awareness
        self.responses = responses
        self.policy_config = policy_config or PolicyConfig()
        self.stats_cache = stats_cache
        self._session_counter = 0

    # -- sessions ---------------------------------------------------------------

    def new_session(self) -> DialogueState:
        if self.nlu is None:
            raise AgentNotReady("no NLU model loaded")
        self._session_counter += 1
        return DialogueState(session_id=f"s{self._session_counter}")

    # -- the step pipeline --------------------------------------------------------

    def step(self, state: DialogueState, text: str) -> tuple[DialogueState, AgentResponse]:
        if self.nlu is None:
            raise AgentNotReady("no NLU model loaded")
        task = self.tasks.get(state.task) if state.task else None
        result = self.nlu.parse(text, task=task)
        target = task
        if target is None and result.intent.startswith("request_"):
            target = self.tasks.get(result.intent[len("request_"):])
        matches = list(result.slots)
        if target is not None:
            matches += self._constraint_matches(text, target, matches)
        return self.step_parsed(state, result.intent, matches, text=text)

    def step_parsed(
        self,
        state: DialogueState,
        intent: str,
        matches: list[SlotMatch],
        text: str = "",
    ) -> tuple[DialogueState, AgentResponse]:
        """The engine behind step(), taking an already-understood turn."""
        state.transcript.append(
            {
                "actor": "user",
                "text": text,
                "intent": intent,
                "slots": {m.slot: format_value(m.value) for m in matches},
            }
        )
        response = self._advance(state, intent, matches, text)
        state.transcript.append(
            {"actor": "bot", "action": response.action, "text": response.text}
        )
        return state, response

    def _advance(self, state: DialogueState, intent: str, matches, text: str) -> AgentResponse:
        if intent == "greet" and state.task is None:
            return self._respond("greet", {})
        if intent == "bye" and state.task is None:
            return self._respond("bye", {})
        if intent == "abort":
            state.reset_task()
            return self._respond("abort_confirmed", {})
        if intent.startswith("request_"):
            return self._start_task(state, intent[len("request_"):], matches)
        if state.task is None:
            return self._respond("clarify", {})

        task = self.tasks[state.task]
        user_action = self._resolve_turn(state, task, intent, matches, text)
        if user_action == _CLARIFY:
            return self._respond("clarify", {})
        return self._drive(state, task, user_action)

    # -- starting and resolving turns ----------------------------------------------

    def _start_task(self, state: DialogueState, name: str, matches) -> AgentResponse:
        if name not in self.tasks:
            return self._respond("clarify", {})
        if state.task is not None:
            return self._respond(
                "task_in_progress", {"task": state.task.replace("_", " ")}
            )
        state.reset_task()
        state.task = name
        state.phase = "opening"
        task = self.tasks[name]
        self._consume(state, task, matches)
        return self._drive(state, task, f"request_{name}")

    def _resolve_turn(
        self, state: DialogueState, task: TaskDefinition, intent: str, matches, text: str
    ) -> str:
        """Fold the parsed turn into state and name the abstract user action
        for the policy key."""
        if state.offer_ids and state.phase.startswith("identifying:"):
            # a short bare number right after an offer is a pick, not a
            # value for some integer slot
            pick = self._offer_choice(state, text)
            if pick is not None and len(tokenize(text)) <= 3:
                slot_name = state.phase.partition(":")[2]
                state.filled[slot_name] = pick
                state.candidates = None
                state.identify_slot = None
                state.offer_ids = ()
                return inform_label([slot_name])

        consumed = self._consume(state, task, matches)

        if state.phase.startswith("identifying:"):
            return self._resolve_identifying(state, task, intent, consumed, text)
        if state.phase.startswith("filling:"):
            return self._resolve_filling(state, task, intent, consumed, text)

        if state.phase == "confirming" and intent == "deny" and not consumed:
            # nothing specific contested: re-open the first slot
            first = task.slots[0]
            state.filled.pop(first.name, None)
            state.skipped.discard(first.name)
            state.pending.pop(first.name, None)
            return "deny"
        if consumed:
            return inform_label(sorted({m.slot for m in consumed}))
        if intent in CONTROL_INTENTS and intent != FALLBACK_INTENT:
            return intent
        return _CLARIFY

    def _resolve_identifying(
        self, state: DialogueState, task: TaskDefinition, intent: str, consumed, text: str
    ) -> str:
        slot_name = state.phase.partition(":")[2]
        asked = state.last_asked_attribute

        if consumed:
            if asked and any(m.slot == slot_name for m in consumed):
                update_awareness(self.awareness, asked, "provided")
                state.last_asked_attribute = None
            return inform_label(sorted({m.slot for m in consumed}))

        if state.offer_ids:
            pick = self._offer_choice(state, text)
            if pick is not None:
                state.filled[slot_name] = pick
                state.candidates = None
                state.identify_slot = None
                state.offer_ids = ()
                return inform_label([slot_name])

        if asked:
            # a concrete value in the text beats a soft intent label: phrases
            # like "I live in Veyrane" can classify as unknown_value, yet the
            # city name is right there
            predicate = self._answer_predicate(text, asked)
            if predicate is not None:
                update_awareness(self.awareness, asked, "provided")
                state.pending.setdefault(slot_name, []).append(predicate)
                state.last_asked_attribute = None
                return inform_label([slot_name])

        if intent == "unknown_value" and asked:
            update_awareness(self.awareness, asked, "unknown")
            state.declined.add((slot_name, asked))
            state.last_asked_attribute = None
            return inform_label([slot_name])

        return _CLARIFY

    def _resolve_filling(
        self, state: DialogueState, task: TaskDefinition, intent: str, consumed, text: str
    ) -> str:
        slot_name = state.phase.partition(":")[2]
        spec = task.slot(slot_name)
        if consumed:
            return inform_label(sorted({m.slot for m in consumed}))
        if intent == "unknown_value":
            if not spec.required:
                state.skipped.add(slot_name)
            return "unknown_value"
        if intent in ("affirm", "deny", "greet", "bye"):
            return _CLARIFY
        # bare-value answer: extraction found nothing, take the text itself
        if spec.semantic_type == "text" and len(text.split()) > 4:
            return _CLARIFY
        try:
            state.filled[slot_name] = normalize_value(
                text, spec.semantic_type, self.nlu.clock if self.nlu else None
            )
            return inform_label([slot_name])
        except Unparseable:
            return _CLARIFY

    def _offer_choice(self, state: DialogueState, text: str):
        """A numbered pick from the last offered list, if the text is one."""
        spec = SlotSpec(name="choice", kind="scalar", semantic_type="integer")
        found = extract_slots(text, [], [spec])
        if len(found) != 1:
            return None
        index = found[0].value
        if 1 <= index <= len(state.offer_ids):
            return state.offer_ids[index - 1]
        return None

    def _consume(self, state: DialogueState, task: TaskDefinition, matches) -> list:
        """Fold every extracted slot value into state; returns what was used."""
        used = []
        slot_names = {s.name: s for s in task.slots}
        for match in matches:
            if "." in match.slot:
                # constraint on an entity table column, e.g. screening.show_date
                table = match.slot.partition(".")[0]
                spec = next(
                    (s for s in task.entity_slots() if s.table == table), None
                )
                if spec is None:
                    continue
                predicate = Predicate(attribute=match.slot, op="eq", value=match.value)
                self._queue_predicate(state, spec.name, predicate)
                used.append(
                    SlotMatch(spec.name, match.value, match.raw,
                              match.start, match.end, match.distance)
                )
                continue
            spec = slot_names.get(match.slot)
            if spec is None:
                continue
            if spec.kind == "scalar":
                state.filled[match.slot] = match.value
                state.skipped.discard(match.slot)
                used.append(match)
                continue
            column = label_column(self.store.schema.table(spec.table))
            if column is None:
                continue
            op = "eq" if match.distance == 0 else "fuzzy_eq"
            predicate = Predicate(
                attribute=f"{spec.table}.{column}",
                op=op,
                value=match.value,
                max_edits=match.distance,
            )
            self._queue_predicate(state, spec.name, predicate)
            used.append(match)
        return used

    def _queue_predicate(self, state: DialogueState, slot_name: str, predicate) -> None:
        """Record an identification constraint.

        Re-informing a resolved slot, or re-answering an attribute already
        constrained, is a change of mind: the candidate set is rebuilt from
        scratch with the superseded constraint replaced.
        """
        pending = state.pending.setdefault(slot_name, [])
        if slot_name in state.filled:
            del state.filled[slot_name]
            pending[:] = [predicate]
            if state.identify_slot == slot_name:
                state.candidates = None
                state.identify_slot = None
            return
        applied = []
        if state.identify_slot == slot_name and state.candidates is not None:
            applied = list(state.candidates.predicates)
        if any(p.attribute == predicate.attribute for p in applied):
            keep = [p for p in applied if p.attribute != predicate.attribute]
            pending[:] = keep + [
                p for p in pending if p.attribute != predicate.attribute
            ] + [predicate]
            state.candidates = None
            state.identify_slot = None
        else:
            pending[:] = [p for p in pending if p.attribute != predicate.attribute]
            pending.append(predicate)

    def _answer_predicate(self, text: str, attribute: str):
        """Interpret free text as a value for the attribute the bot just
        asked about."""
        column = self.store.schema.column(attribute)
        table, _, name = attribute.partition(".")
        config = self.nlu.config if self.nlu else None
        clock = self.nlu.clock if self.nlu else None
        if column.semantic_type in ("text", "identifier"):
            values = tuple(
                format_value(v) for v in self.store.column_values(table, name)
            )
            gazetteer = Gazetteer(slot=attribute, attribute=attribute, values=values)
            found = extract_slots(text, [gazetteer], config=config)
        else:
            spec = SlotSpec(name=attribute, kind="scalar", semantic_type=column.semantic_type)
            found = extract_slots(text, [], [spec], config=config, clock=clock)
        if not found:
            return None
        match = found[0]
        op = "eq" if match.distance == 0 else "fuzzy_eq"
        return Predicate(attribute=attribute, op=op, value=match.value, max_edits=match.distance)

    def _constraint_matches(self, text: str, task: TaskDefinition, existing) -> list:
        """Date/time mentions bound to entity-table columns, so "tonight"
        can constrain a screening without being a declared slot."""
        specs = []
        for slot in task.entity_slots():
            for column in self.store.schema.table(slot.table).columns:
                if column.semantic_type in ("date", "time"):
                    specs.append(
                        SlotSpec(
                            name=f"{slot.table}.{column.name}",
                            kind="scalar",
                            semantic_type=column.semantic_type,
                        )
                    )
        if not specs:
            return []
        clock = self.nlu.clock if self.nlu else None
        config = self.nlu.config if self.nlu else None
        found = extract_slots(text, [], specs, config=config, clock=clock)
        return [
            m for m in found
            if not any(m.start < e.end and e.start < m.end for e in existing)
        ]

    # -- driving to the next question -------------------------------------------------

    def _dm_phase(self, state: DialogueState, task: TaskDefinition) -> str:
        if state.phase.startswith("identifying:"):
            slot = task.slot(state.phase.partition(":")[2])
            return f"identifying_{slot.table}"
        if state.phase.startswith("filling:"):
            return "collecting_" + state.phase.partition(":")[2]
        if state.phase == "confirming":
            return "confirming"
        return "opening"

    def _drive(self, state: DialogueState, task: TaskDefinition, user_action: str) -> AgentResponse:
        """Apply bot actions until one produces a user-facing response."""
        for _ in range(_STEP_LIMIT):
            # identification is a subdialogue: the derived policy treats it as
            # one opaque identify_<table> action, so while a slot is still
            # narrowing, an inform keeps feeding that slot instead of letting
            # the policy step past it to the next one
            if user_action.startswith("inform(") and state.identify_slot is not None:
                slot = next(
                    (s for s in task.slots if s.name == state.identify_slot), None
                )
                if slot is not None:
                    response = self._identify_step(state, task, slot)
                    if response is not None:
                        return response
                    user_action = "inform()"
                    continue
            key = (task.name, self._dm_phase(state, task), user_action)
            action = decide_action(
                self.dm_policy, key, task, state.filled, state.skipped
            )
            response = self._apply(state, task, action)
            if response is not None:
                return response
            user_action = "inform()"  # internal continuation after a resolution
        state.reset_task()
        return self._respond("clarify", {})

    def _apply(self, state: DialogueState, task: TaskDefinition, action: str) -> AgentResponse | None:
        if action == "handle_abort":
            state.reset_task()
            return self._respond("abort_confirmed", {})

        if action.startswith("identify_"):
            slot = self._slot_for_identify(task, action[len("identify_"):], state)
            if slot is None:
                return None  # everything on that table already resolved
            return self._identify_step(state, task, slot)

        if action.startswith("request_slot("):
            name = action[len("request_slot("):-1]
            if name in state.filled or name in state.skipped:
                return None
            state.phase = f"filling:{name}"
            return self._respond(
                f"request_slot:{name}",
                {"slot": name.replace("_", " "), "task": task.name.replace("_", " ")},
            )

        if action == "confirm":
            if any(s.required and s.name not in state.filled for s in task.slots):
                return None  # fallback rules will request what is missing
            state.phase = "confirming"
            return AgentResponse(
                action="confirm",
                text=render_response(
                    self.responses,
                    f"confirm:{task.name}",
                    {"task": task.name.replace("_", " "), "summary": self._echo(state, task)},
                ),
            )

        if action == "execute_transaction":
            if state.phase != "confirming":
                return None  # never execute without an explicit confirm step
            return self._execute(state, task)

        return None

    def _slot_for_identify(self, task: TaskDefinition, table: str, state: DialogueState):
        for slot in task.entity_slots():
            if (
                slot.table == table
                and slot.name not in state.filled
                and slot.name not in state.skipped
            ):
                return slot
        return None

    def _identify_step(self, state: DialogueState, task: TaskDefinition, slot) -> AgentResponse | None:
        if state.identify_slot != slot.name or state.candidates is None:
            if state.identify_slot and state.candidates is not None:
                # park the in-flight identification; its constraints replay later
                parked = state.pending.setdefault(state.identify_slot, [])
                parked[:0] = list(state.candidates.predicates)
            state.candidates = self.store.open_candidates(slot.table)
            state.identify_slot = slot.name
        for predicate in state.pending.pop(slot.name, []):
            state.candidates = self.store.refine(
                state.candidates, predicate, max_depth=self.policy_config.max_join_depth
            )
        state.phase = f"identifying:{slot.name}"
        state.offer_ids = ()
        if (
            task.action.type == "query"
            and slot.table == task.action.table
            and 1 <= len(state.candidates.row_ids) <= 3 * self.policy_config.list_threshold
        ):
            # a query task wants the matching rows themselves; bind the whole
            # remaining list once it is reasonably narrow
            state.filled[slot.name] = tuple(
                sorted(state.candidates.row_ids, key=value_sort_key)
            )
            state.candidates = None
            state.identify_slot = None
            state.last_asked_attribute = None
            return None
        exclude = frozenset(
            attr for (s, attr) in (state.asked | state.declined) if s == slot.name
        )
        decision = next_request(
            self.store,
            state.candidates,
            self.awareness,
            self.policy_config,
            exclude=exclude,
            stats=self.stats_cache.get if self.stats_cache else None,
        )
        if decision.kind == "resolved":
            state.filled[slot.name] = decision.entity
            state.candidates = None
            state.identify_slot = None
            state.last_asked_attribute = None
            return None  # continue driving: next slot or confirm
        if decision.kind == "ask":
            state.asked.add((slot.name, decision.attribute))
            state.last_asked_attribute = decision.attribute
            display = self.store.schema.column(decision.attribute).display_name
            return self._respond(
                f"ask:{decision.attribute}",
                {"attribute": display, "entity": slot.table.replace("_", " ")},
            )
        if decision.kind == "offer_list":
            return self._offer(state, slot, decision.rows)
        # exhausted: with a shortish list left, offer it anyway rather than
        # give up; otherwise apologize and start the identification over
        remaining = state.candidates.row_ids
        if 2 <= len(remaining) <= 3 * self.policy_config.list_threshold:
            rows = self.store.summaries(
                slot.table, remaining, limit=self.policy_config.list_threshold
            )
            return self._offer(state, slot, rows)
        state.candidates = None
        state.identify_slot = None
        state.last_asked_attribute = None
        state.phase = "opening"
        return self._respond("no_match", {"entity": slot.table.replace("_", " ")})

    def _offer(self, state: DialogueState, slot, rows) -> AgentResponse:
        state.last_asked_attribute = None
        ordered = sorted(state.candidates.row_ids, key=value_sort_key)
        ordered = ordered[: self.policy_config.list_threshold]
        state.offer_ids = tuple(ordered)
        listing = "\n".join(
            f"{i + 1}. {self._choice_line(row)}" for i, row in enumerate(rows)
        )
        return AgentResponse(
            action="offer_list",
            text=render_response(
                self.responses,
                "offer_list",
                {"choices": listing, "entity": slot.table.replace("_", " ")},
            ),
            choices=rows,
        )

    def _choice_line(self, row: dict) -> str:
        values = ", ".join(str(v) for v in row["values"].values())
        return f"{values} (id {row['id']})" if values else f"id {row['id']}"

    def _execute(self, state: DialogueState, task: TaskDefinition) -> AgentResponse:
        params = dict(state.filled)
        for slot in task.slots:
            params.setdefault(slot.name, None)
        result = self.store.execute_transaction(task, params)
        state.reset_task()
        if result.outcome == "committed":
            echo = ", ".join(
                f"{k.replace('_', ' ')}: {v}" for k, v in result.echo.items()
            )
            listing = self._result_listing(task, params, result)
            text = render_response(
                self.responses,
                f"inform_result:{task.name}",
                {
                    "task": task.name.replace("_", " "),
                    "echo": echo,
                    "count": (
                        len(result.rows) if task.action.type == "query"
                        else result.rows_affected
                    ),
                    "listing": listing,
                },
            )
        else:
            text = render_response(
                self.responses, "transaction_failed", {"reason": result.reason}
            )
        return AgentResponse(action="inform_result", text=text, transaction=result)

    def _result_listing(self, task: TaskDefinition, params: dict, result) -> str:
        # query answers read better with foreign keys swapped for the parent
        # row's label, same as the candidate summaries shown while narrowing
        if task.action.type == "query":
            slot = next(
                (s for s in task.slots if s.kind == "entity" and s.table == task.action.table),
                None,
            )
            bound = params.get(slot.name) if slot else None
            if bound is not None:
                ids = list(bound) if isinstance(bound, (list, tuple, frozenset)) else [bound]
                rows = self.store.summaries(task.action.table, sorted(ids, key=value_sort_key))
                return "\n".join(self._choice_line(row) for row in rows)
        return "\n".join(
            ", ".join(f"{k}: {v}" for k, v in row.items()) for row in result.rows
        )

    def _echo(self, state: DialogueState, task: TaskDefinition) -> str:
        parts = []
        for slot in task.slots:
            if slot.name in state.filled:
                value = state.filled[slot.name]
                if isinstance(value, (list, tuple, frozenset)):
                    shown = ", ".join(format_value(v) for v in sorted(value, key=value_sort_key))
                else:
                    shown = format_value(value)
                parts.append(f"{slot.name.replace('_', ' ')}: {shown}")
        return ", ".join(parts)

    def _respond(self, action: str, context: dict) -> AgentResponse:
        return AgentResponse(
            action=action, text=render_response(self.responses, action, context)
        )
