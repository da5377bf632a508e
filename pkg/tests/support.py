"""Shared test helpers: seeded random knowledge bases and set utilities."""

from __future__ import annotations

import random
import string
from typing import Iterator

from argudialog.core import ArgumentationGraph, ReplyArgument, StatusArgument, is_conflict_free
from argudialog.kb import KbDocument

MORGAN_OPENER = "Hi, I am Morgan and I suffer from latex allergy, can I get vaccinated?"


def random_word(rng: random.Random) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(4, 9)))


def random_graph(
    rng: random.Random,
    max_statuses: int = 16,
    max_replies: int = 8,
    density: float | None = None,
) -> ArgumentationGraph:
    """A structurally valid random graph: no self-attacks, no dangling edges,
    every status carrying one synthetic annotation."""
    n_statuses = rng.randint(1, max_statuses)
    n_replies = rng.randint(1, max_replies)
    if density is None:
        density = rng.uniform(0.05, 0.4)
    statuses = tuple(
        StatusArgument(
            id=f"s{i}",
            fact_text=f"fact {i} holds",
            annotations=(" ".join(random_word(rng) for _ in range(3)),),
            prompt=f"Is fact {i} true?" if rng.random() < 0.8 else None,
        )
        for i in range(1, n_statuses + 1)
    )
    replies = tuple(
        ReplyArgument(id=f"r{i}", reply_text=f"reply number {i}")
        for i in range(1, n_replies + 1)
    )
    status_ids = [s.id for s in statuses]
    targets = status_ids + [r.id for r in replies]
    attacks = frozenset(
        (src, dst)
        for src in status_ids
        for dst in targets
        if src != dst and rng.random() < density
    )
    supports = frozenset(
        (src, reply.id)
        for src in status_ids
        for reply in replies
        if rng.random() < density
    )
    return ArgumentationGraph(statuses, replies, attacks, supports)


def as_document(graph: ArgumentationGraph) -> KbDocument:
    return KbDocument(version="1", graph=graph, metadata={})


def random_subset(rng: random.Random, items) -> frozenset[str]:
    return frozenset(x for x in items if rng.random() < 0.5)


def conflict_free_repair(graph: ArgumentationGraph, members) -> frozenset[str]:
    """Greedily drop members until nothing in the set attacks anything in it."""
    kept: set[str] = set()
    for status_id in sorted(members):
        clashes = any(
            (status_id, other) in graph.attacks or (other, status_id) in graph.attacks
            for other in kept
        )
        if not clashes:
            kept.add(status_id)
    return frozenset(kept)


def conflict_free_supersets(
    graph: ArgumentationGraph, base: frozenset[str]
) -> Iterator[frozenset[str]]:
    """Every conflict-free superset of base (base itself must be conflict-free)."""
    rest = sorted(graph.status_ids - base)
    for mask in range(1 << len(rest)):
        candidate = base | {rest[i] for i in range(len(rest)) if mask >> i & 1}
        if is_conflict_free(graph, candidate):
            yield frozenset(candidate)
