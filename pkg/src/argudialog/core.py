"""Reasoning over an argumentation graph of user facts and candidate replies.

The graph holds two kinds of arguments: status arguments (facts a user can
state about themselves) and reply arguments (answers the system may give).
Attacks run from a status to a status or a reply; supports run from a status
to a reply.  All reasoning happens against an activated set of status ids,
i.e. the facts the user has stated so far.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable


class ArgumentationError(Exception):
    """Base class for reasoning errors."""


class UnknownArgumentError(ArgumentationError):
    """An id does not name any argument in the graph."""


def natural_key(identifier: str) -> tuple:
    """Sort key that orders digit runs numerically, so n2 sorts before n10."""
    return tuple(
        int(part) if part.isdigit() else part
        for part in re.split(r"(\d+)", identifier)
    )


def natural_sorted(ids: Iterable[str]) -> list[str]:
    return sorted(ids, key=natural_key)


@dataclass(frozen=True)
class StatusArgument:
    """A fact node the user can activate by stating it.

    annotations: sentences a user might type to state this fact; matching
    scores an utterance against each and keeps the best.
    prompt: question to ask when the system needs this fact confirmed.
    """

    id: str
    fact_text: str
    annotations: tuple[str, ...]
    prompt: str | None = None


@dataclass(frozen=True)
class ReplyArgument:
    """A candidate system answer."""

    id: str
    reply_text: str


@dataclass(frozen=True)
class ArgumentationGraph:
    """Immutable knowledge graph of status and reply arguments."""

    statuses: tuple[StatusArgument, ...]
    replies: tuple[ReplyArgument, ...]
    attacks: frozenset[tuple[str, str]]
    supports: frozenset[tuple[str, str]]

    @cached_property
    def status_ids(self) -> frozenset[str]:
        return frozenset(s.id for s in self.statuses)

    @cached_property
    def reply_ids(self) -> frozenset[str]:
        return frozenset(r.id for r in self.replies)

    @cached_property
    def statuses_by_id(self) -> dict[str, StatusArgument]:
        return {s.id: s for s in self.statuses}

    @cached_property
    def replies_by_id(self) -> dict[str, ReplyArgument]:
        return {r.id: r for r in self.replies}

    @cached_property
    def _attackers_index(self) -> dict[str, frozenset[str]]:
        index: dict[str, set[str]] = {}
        for src, dst in self.attacks:
            index.setdefault(dst, set()).add(src)
        return {dst: frozenset(srcs) for dst, srcs in index.items()}

    @cached_property
    def _supporters_index(self) -> dict[str, frozenset[str]]:
        index: dict[str, set[str]] = {}
        for src, dst in self.supports:
            index.setdefault(dst, set()).add(src)
        return {dst: frozenset(srcs) for dst, srcs in index.items()}

    def attackers(self, target: str) -> frozenset[str]:
        """All status ids with an attack edge into target."""
        return self._attackers_index.get(target, frozenset())

    def supporters(self, reply_id: str) -> frozenset[str]:
        """All status ids with a support edge into reply_id."""
        return self._supporters_index.get(reply_id, frozenset())

    def has_argument(self, identifier: str) -> bool:
        return identifier in self.status_ids or identifier in self.reply_ids


class WithheldReason(str, Enum):
    """Why an alternative reply was not the one given."""

    ATTACKED_BY_ACTIVATED = "attacked_by_activated"
    NOT_DEFENDED = "not_defended"


@dataclass(frozen=True)
class ReplyClassification:
    """Replies a new batch of facts makes available.

    consistent: supported by the new facts and defended against every
    attacker in the whole graph by the activated set.
    potentially_consistent: supported by the new facts, not attacked by the
    activated set, but not (yet) defended; eliciting more facts may promote
    them to consistent.
    """

    consistent: frozenset[str]
    potentially_consistent: frozenset[str]


@dataclass(frozen=True)
class NotGivenRecord:
    """An alternative reply the activated set supports but which was withheld."""

    reply_id: str
    attackers_in_activated: frozenset[str]
    reason: WithheldReason


@dataclass(frozen=True)
class Explanation:
    """Why a reply was given: its activated supporters, plus every other
    supported reply and what ruled it out."""

    supporters: frozenset[str]
    not_given: tuple[NotGivenRecord, ...]


def _checked_members(graph: ArgumentationGraph, members: Iterable[str]) -> frozenset[str]:
    checked = frozenset(members)
    unknown = checked - graph.status_ids
    if unknown:
        raise UnknownArgumentError(
            f"unknown status id(s): {', '.join(natural_sorted(unknown))}"
        )
    return checked


def _checked_reply(graph: ArgumentationGraph, reply_id: str) -> str:
    if reply_id not in graph.reply_ids:
        raise UnknownArgumentError(f"unknown reply id: {reply_id}")
    return reply_id


def set_attacks(graph: ArgumentationGraph, members: Iterable[str], target: str) -> bool:
    """True iff some member of the set has an attack edge into target."""
    checked = _checked_members(graph, members)
    if not graph.has_argument(target):
        raise UnknownArgumentError(f"unknown argument id: {target}")
    return bool(checked & graph.attackers(target))


def set_supports(graph: ArgumentationGraph, members: Iterable[str], reply_id: str) -> bool:
    """True iff some member of the set has a support edge into the reply."""
    checked = _checked_members(graph, members)
    _checked_reply(graph, reply_id)
    return bool(checked & graph.supporters(reply_id))


def is_conflict_free(graph: ArgumentationGraph, members: Iterable[str]) -> bool:
    """True iff no member attacks another member (the empty set qualifies)."""
    checked = _checked_members(graph, members)
    return not any(checked & graph.attackers(member) for member in checked)


def is_acceptable(graph: ArgumentationGraph, members: Iterable[str], reply_id: str) -> bool:
    """True iff the set defends the reply from every attacker in the graph.

    Every attacker of the reply, wherever it sits in the graph, must itself
    be attacked by some member of the set.  One step of defence only; the
    defenders are not themselves checked.
    """
    checked = _checked_members(graph, members)
    _checked_reply(graph, reply_id)
    return all(
        checked & graph.attackers(attacker)
        for attacker in graph.attackers(reply_id)
    )


def classify_replies(
    graph: ArgumentationGraph,
    activated: Iterable[str],
    new_facts: Iterable[str],
) -> ReplyClassification:
    """Split the replies supported by new_facts into consistent and
    potentially consistent, judged against the whole activated set.

    Replies supported by new_facts but attacked by the activated set land in
    neither bucket.  new_facts must be a subset of activated.
    """
    activated_set = _checked_members(graph, activated)
    new_set = _checked_members(graph, new_facts)
    if not new_set <= activated_set:
        raise ValueError("new facts must be a subset of the activated set")
    consistent: set[str] = set()
    potential: set[str] = set()
    for reply in graph.replies:
        if not new_set & graph.supporters(reply.id):
            continue
        # The exclusion is stated outright rather than left to acceptability:
        # for a conflict-free activated set an attacked reply can never be
        # acceptable anyway, but classification must not depend on that.
        if activated_set & graph.attackers(reply.id):
            continue
        if is_acceptable(graph, activated_set, reply.id):
            consistent.add(reply.id)
        else:
            potential.add(reply.id)
    return ReplyClassification(frozenset(consistent), frozenset(potential))


def defence_candidates(
    graph: ArgumentationGraph,
    activated: Iterable[str],
    reply_id: str,
) -> list[str]:
    """Status ids that could defend the reply if the user confirmed them.

    For each attacker of the reply not already countered by the activated
    set, every status outside the set that attacks that attacker is a
    candidate.  Deduplicated; ordered by (attacker id, defender id) in
    natural id order so prompts come out in a stable, human-sensible order.
    """
    activated_set = _checked_members(graph, activated)
    _checked_reply(graph, reply_id)
    seen: set[str] = set()
    ordered: list[str] = []
    for attacker in natural_sorted(graph.attackers(reply_id)):
        if activated_set & graph.attackers(attacker):
            continue
        for defender in natural_sorted(graph.attackers(attacker) - activated_set):
            if defender not in seen:
                seen.add(defender)
                ordered.append(defender)
    return ordered


def explain(
    graph: ArgumentationGraph,
    activated: Iterable[str],
    reply_id: str,
) -> Explanation:
    """Explain a given reply against the activated set.

    supporters: activated facts supporting the reply.  not_given: one record
    per other reply the activated set supports, with the activated attackers
    that rule it out, or a not-defended marker when nothing in the set
    attacks it but its own attackers were never countered.
    """
    activated_set = _checked_members(graph, activated)
    _checked_reply(graph, reply_id)
    supporters = activated_set & graph.supporters(reply_id)
    withheld: list[NotGivenRecord] = []
    for other in natural_sorted(graph.reply_ids):
        if other == reply_id:
            continue
        if not activated_set & graph.supporters(other):
            continue
        attackers_in_activated = activated_set & graph.attackers(other)
        reason = (
            WithheldReason.ATTACKED_BY_ACTIVATED
            if attackers_in_activated
            else WithheldReason.NOT_DEFENDED
        )
        withheld.append(
            NotGivenRecord(other, frozenset(attackers_in_activated), reason)
        )
    return Explanation(frozenset(supporters), tuple(withheld))


def oracle_classify(
    graph: ArgumentationGraph,
    activated: Iterable[str],
    new_facts: Iterable[str],
) -> ReplyClassification:
    """Reference classifier written as literal definition-chasing loops.

    Deliberately naive: scans the raw edge tuples with no indexes or early
    exits, so it stays an independent check on classify_replies.  Intended
    for small graphs in tests.
    """
    activated_list = list(dict.fromkeys(activated))
    new_list = list(dict.fromkeys(new_facts))
    for member in activated_list + new_list:
        if member not in [s.id for s in graph.statuses]:
            raise UnknownArgumentError(f"unknown status id(s): {member}")
    for member in new_list:
        if member not in activated_list:
            raise ValueError("new facts must be a subset of the activated set")

    consistent: set[str] = set()
    potential: set[str] = set()
    for reply in graph.replies:
        supported = False
        for fact in new_list:
            for src, dst in graph.supports:
                if src == fact and dst == reply.id:
                    supported = True
        if not supported:
            continue

        defended_from_all = True
        for attacker_src, attacked_dst in graph.attacks:
            if attacked_dst != reply.id:
                continue
            countered = False
            for member in activated_list:
                for src2, dst2 in graph.attacks:
                    if src2 == member and dst2 == attacker_src:
                        countered = True
            if not countered:
                defended_from_all = False

        attacked_by_activated = False
        for member in activated_list:
            for src, dst in graph.attacks:
                if src == member and dst == reply.id:
                    attacked_by_activated = True

        if attacked_by_activated:
            continue
        if defended_from_all:
            consistent.add(reply.id)
        else:
            potential.add(reply.id)
    return ReplyClassification(frozenset(consistent), frozenset(potential))
