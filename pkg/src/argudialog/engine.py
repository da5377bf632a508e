"""Turn-based dialogue sessions over an argumentation knowledge base.

Each user utterance is routed by intent: stop requests end the session,
explanation requests justify the last reply, and statements activate facts.
A statement either yields a defensible reply immediately or starts an
elicitation round in which the engine asks about facts that could defend a
candidate reply, one prompt per turn.  No prompt is ever asked twice in a
session, and abandoned candidates are not retried within the same query, so
every conversation does bounded work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

from .core import (
    ArgumentationGraph,
    Explanation,
    UnknownArgumentError,
    classify_replies,
    defence_candidates,
    explain,
    is_acceptable,
    natural_key,
    set_supports,
)
from .kb import InvalidKbError, KbDocument, validate_kb
from .matching import Intent, Matcher, MatcherConfig


class Phase(str, Enum):
    AWAITING_INPUT = "awaiting_input"
    ELICITING = "eliciting"
    TERMINATED = "terminated"


class EventKind(str, Enum):
    REPLY_GIVEN = "REPLY_GIVEN"
    PROMPT = "PROMPT"
    EXPLANATION = "EXPLANATION"
    TERMINATED = "TERMINATED"
    NO_MATCH = "NO_MATCH"
    CONFLICT_DROPPED = "CONFLICT_DROPPED"
    NO_REPLY_POSSIBLE = "NO_REPLY_POSSIBLE"


class ConflictPolicy(str, Enum):
    """What to do when a matched fact contradicts already-activated facts."""

    KEEP_FIRST = "keep-first"
    KEEP_LATEST = "keep-latest"
    TERMINATE = "terminate"


class SessionTerminatedError(RuntimeError):
    """An utterance arrived for a session that has already ended."""


@dataclass(frozen=True)
class DialogueEvent:
    kind: EventKind
    payload: dict[str, Any] = field(default_factory=dict)


@dataclass
class SessionState:
    """Mutable per-conversation state.

    activated holds the stated facts in activation order; round_facts
    accumulates the current elicitation round's activations until the round
    completes and they are folded into activated.
    """

    activated: list[str] = field(default_factory=list)
    last_reply: str | None = None
    phase: Phase = Phase.AWAITING_INPUT
    pending_prompts: list[str] = field(default_factory=list)
    round_facts: list[str] = field(default_factory=list)
    candidate: str | None = None
    asked: set[str] = field(default_factory=set)
    excluded: set[str] = field(default_factory=set)

    @property
    def activated_set(self) -> frozenset[str]:
        return frozenset(self.activated)


def select_candidate_reply(
    graph: ArgumentationGraph, activated: Iterable[str], candidates: Iterable[str]
) -> str:
    """Deterministic choice: most supporters in the activated set first,
    natural id order as the tie-breaker."""
    activated_set = frozenset(activated)
    pool = list(candidates)
    if not pool:
        raise ValueError("no candidate replies to select from")
    return min(
        pool,
        key=lambda rid: (-len(activated_set & graph.supporters(rid)), natural_key(rid)),
    )


def prompt_text_for(status_id: str, kb: KbDocument) -> str:
    """The elicitation question for a status: its prompt, or a generic one."""
    status = kb.graph.statuses_by_id.get(status_id)
    if status is None:
        raise UnknownArgumentError(f"unknown status id: {status_id}")
    return status.prompt or f"Is it true that: {status.fact_text}?"


def explanation_payload(explanation: Explanation, kb: KbDocument) -> dict[str, Any]:
    """JSON-ready rendering of an explanation, with fact and reply texts."""
    graph = kb.graph
    supporters = sorted(explanation.supporters, key=natural_key)
    return {
        "supporters": supporters,
        "supporter_facts": [graph.statuses_by_id[s].fact_text for s in supporters],
        "not_given": [
            {
                "reply_id": record.reply_id,
                "reply_text": graph.replies_by_id[record.reply_id].reply_text,
                "attackers": sorted(record.attackers_in_activated, key=natural_key),
                "attacker_facts": [
                    graph.statuses_by_id[a].fact_text
                    for a in sorted(record.attackers_in_activated, key=natural_key)
                ],
                "reason": record.reason.value,
            }
            for record in explanation.not_given
        ],
    }


class DialogueEngine:
    """Shares one knowledge base and matcher across any number of sessions."""

    def __init__(
        self,
        kb: KbDocument,
        matcher_config: MatcherConfig | None = None,
        conflict_policy: ConflictPolicy = ConflictPolicy.KEEP_FIRST,
    ):
        report = validate_kb(kb)
        if report.errors:
            first = report.errors[0]
            raise InvalidKbError(
                f"knowledge base failed validation: {first.code} at {first.locus}"
            )
        self.kb = kb
        self.graph = kb.graph
        self.matcher = Matcher(kb, matcher_config)
        self.conflict_policy = conflict_policy

    def start_session(self) -> SessionState:
        return SessionState()

    def handle_utterance(self, state: SessionState, text: str) -> list[DialogueEvent]:
        """Process one utterance, mutating state and returning the events."""
        if state.phase is Phase.TERMINATED:
            raise SessionTerminatedError("the session has already ended")
        events: list[DialogueEvent] = []
        intent = self.matcher.detect_intent(text)
        if intent is Intent.STOP:
            self._terminate(state, events)
            return events
        if intent is Intent.EXPLAIN:
            if state.last_reply is None:
                events.append(
                    DialogueEvent(
                        EventKind.NO_MATCH,
                        {
                            "message": "There is no reply to explain yet."
                            " Tell me about your situation first."
                        },
                    )
                )
            else:
                explanation = explain(self.graph, state.activated_set, state.last_reply)
                payload = explanation_payload(explanation, self.kb)
                payload["reply_id"] = state.last_reply
                events.append(DialogueEvent(EventKind.EXPLANATION, payload))
            return events

        matches = self.matcher.compute_matches(text)
        kept = self._apply_conflict_policy(state, [m.status_id for m in matches], events)
        if state.phase is Phase.TERMINATED:
            return events
        if state.phase is Phase.AWAITING_INPUT:
            self._new_query_turn(state, kept, bool(matches), events)
        else:
            self._elicitation_step(state, kept, events)
        return events

    # Conflict handling ----------------------------------------------------

    def _conflicting(self, left: str, right: str) -> bool:
        return (left, right) in self.graph.attacks or (right, left) in self.graph.attacks

    def _apply_conflict_policy(
        self, state: SessionState, matched: list[str], events: list[DialogueEvent]
    ) -> list[str]:
        """Filter matched status ids so the activated set stays conflict-free.

        keep-first drops the newcomer, keep-latest evicts the older facts,
        terminate ends the session on the first contradiction.
        """
        kept: list[str] = []
        dropped: list[str] = []
        for status_id in matched:
            active = set(state.activated) | set(state.round_facts) | set(kept)
            if status_id in active:
                kept.append(status_id)
                continue
            conflicts = [m for m in active if self._conflicting(status_id, m)]
            if not conflicts:
                kept.append(status_id)
            elif self.conflict_policy is ConflictPolicy.KEEP_FIRST:
                dropped.append(status_id)
            elif self.conflict_policy is ConflictPolicy.KEEP_LATEST:
                for old in conflicts:
                    for collection in (state.activated, state.round_facts, kept):
                        if old in collection:
                            collection.remove(old)
                dropped.extend(conflicts)
                kept.append(status_id)
            else:
                events.append(
                    DialogueEvent(EventKind.CONFLICT_DROPPED, {"dropped": [status_id]})
                )
                self._terminate(state, events)
                return kept
        if dropped:
            events.append(DialogueEvent(EventKind.CONFLICT_DROPPED, {"dropped": dropped}))
        return kept

    # Turn handling ---------------------------------------------------------

    def _new_query_turn(
        self,
        state: SessionState,
        matched: list[str],
        had_matches: bool,
        events: list[DialogueEvent],
    ) -> None:
        state.excluded.clear()
        if not matched:
            if not had_matches:
                events.append(
                    DialogueEvent(
                        EventKind.NO_MATCH,
                        {"message": "Sorry, I could not relate that to anything I know."},
                    )
                )
            return
        for status_id in matched:
            if status_id not in state.activated:
                state.activated.append(status_id)
        classification = classify_replies(self.graph, state.activated_set, matched)
        if classification.consistent:
            reply = select_candidate_reply(
                self.graph, state.activated_set, classification.consistent
            )
            self._give_reply(state, reply, events)
        elif classification.potentially_consistent:
            self._begin_elicitation(state, classification.potentially_consistent, events)
        else:
            self._no_reply_possible(state, events)

    def _elicitation_step(
        self, state: SessionState, matched: list[str], events: list[DialogueEvent]
    ) -> None:
        for status_id in matched:
            if status_id not in state.round_facts:
                state.round_facts.append(status_id)
        if state.pending_prompts:
            self._emit_next_prompt(state, events)
            return
        # Round complete: fold the round's facts in and re-judge the candidate.
        for status_id in state.round_facts:
            if status_id not in state.activated:
                state.activated.append(status_id)
        round_facts = list(state.round_facts)
        state.round_facts = []
        candidate = state.candidate
        state.candidate = None
        activated = state.activated_set
        if (
            candidate is not None
            and set_supports(self.graph, activated, candidate)
            and is_acceptable(self.graph, activated, candidate)
        ):
            self._give_reply(state, candidate, events)
            return
        if candidate is not None:
            state.excluded.add(candidate)
        classification = classify_replies(self.graph, activated, round_facts)
        if classification.consistent:
            reply = select_candidate_reply(
                self.graph, activated, classification.consistent
            )
            self._give_reply(state, reply, events)
            return
        self._begin_elicitation(state, classification.potentially_consistent, events)

    def _begin_elicitation(
        self,
        state: SessionState,
        candidates: frozenset[str],
        events: list[DialogueEvent],
    ) -> None:
        """Pick the first candidate that still has unasked defence prompts and
        start its round; terminate when no candidate remains."""
        activated = state.activated_set
        pool = sorted(
            candidates - state.excluded,
            key=lambda rid: (
                -len(activated & self.graph.supporters(rid)),
                natural_key(rid),
            ),
        )
        for reply_id in pool:
            askable = [
                status_id
                for status_id in defence_candidates(self.graph, activated, reply_id)
                if status_id not in state.asked
            ]
            if askable:
                state.candidate = reply_id
                state.pending_prompts = askable
                state.round_facts = []
                state.phase = Phase.ELICITING
                self._emit_next_prompt(state, events)
                return
            state.excluded.add(reply_id)
        self._no_reply_possible(state, events)

    # Event emission ----------------------------------------------------------

    def _emit_next_prompt(self, state: SessionState, events: list[DialogueEvent]) -> None:
        status_id = state.pending_prompts.pop(0)
        state.asked.add(status_id)
        events.append(
            DialogueEvent(
                EventKind.PROMPT,
                {"status_id": status_id, "text": prompt_text_for(status_id, self.kb)},
            )
        )

    def _give_reply(self, state: SessionState, reply_id: str, events: list[DialogueEvent]) -> None:
        state.last_reply = reply_id
        state.phase = Phase.AWAITING_INPUT
        state.candidate = None
        state.pending_prompts = []
        state.round_facts = []
        events.append(
            DialogueEvent(
                EventKind.REPLY_GIVEN,
                {
                    "reply_id": reply_id,
                    "text": self.graph.replies_by_id[reply_id].reply_text,
                },
            )
        )

    def _no_reply_possible(self, state: SessionState, events: list[DialogueEvent]) -> None:
        events.append(
            DialogueEvent(
                EventKind.NO_REPLY_POSSIBLE,
                {
                    "message": "I cannot give you a reliable answer based on what"
                    " you have told me. Please consult a professional."
                },
            )
        )
        self._terminate(state, events)

    def _terminate(self, state: SessionState, events: list[DialogueEvent]) -> None:
        state.phase = Phase.TERMINATED
        state.candidate = None
        state.pending_prompts = []
        state.round_facts = []
        events.append(DialogueEvent(EventKind.TERMINATED, {}))


def event_to_dict(event: DialogueEvent) -> dict[str, Any]:
    """Wire form of an event: {"kind", "payload"} with JSON-ready payload."""
    return {"kind": event.kind.value, "payload": dict(event.payload)}
