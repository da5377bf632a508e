"""Utterance matching: lexical vectors, similarity measures, node activation,
and intent detection.

The default pipeline is fully deterministic: text is normalized, turned into
a sparse count vector of word unigrams plus boundary-padded character
trigrams, and compared against each status annotation with Bray-Curtis (or
cosine) similarity.  An external embedding service can replace the lexical
vectors; on any provider failure the matcher falls back to the lexical path
and logs a warning.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Iterable

import requests

from .core import natural_key

if TYPE_CHECKING:
    from .kb import KbDocument

log = logging.getLogger(__name__)

SentenceVector = dict[str, float]

DEFAULT_THRESHOLD = 0.55
DEFAULT_EXCLUSIVE_MARGIN = 0.02
DEFAULT_STOP_SENTENCES = ("bye", "goodbye", "quit", "stop", "thanks, that's all")
DEFAULT_EXPLAIN_SENTENCES = (
    "why?",
    "why not?",
    "explain",
    "can you explain that?",
    "how did you decide?",
)

_NON_WORD = re.compile(r"[^\w]+", re.UNICODE)
# Keeps trigram features from colliding with unigrams of three-letter words;
# "#" cannot survive normalization, so the namespace is safe.
_TRIGRAM_PREFIX = "#"


class Measure(str, Enum):
    BRAY_CURTIS = "bray-curtis"
    COSINE = "cosine"


class Intent(str, Enum):
    STATEMENT = "statement"
    STOP = "stop"
    EXPLAIN = "explain"


class ProviderError(RuntimeError):
    """The external embedding service was unreachable or answered nonsense."""


@dataclass(frozen=True)
class ProviderConfig:
    url: str
    timeout: float = 5.0


@dataclass(frozen=True)
class MatcherConfig:
    threshold: float = DEFAULT_THRESHOLD
    measure: Measure = Measure.BRAY_CURTIS
    exclusive_margin: float = DEFAULT_EXCLUSIVE_MARGIN
    provider: ProviderConfig | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.exclusive_margin < 0.0:
            raise ValueError("exclusive_margin must be nonnegative")


def normalize_text(text: str) -> str:
    """Lowercase, fold punctuation to spaces, collapse runs of whitespace."""
    return " ".join(_NON_WORD.sub(" ", text.lower()).split())


def vectorize(text: str) -> SentenceVector:
    """Sparse count vector of word unigrams and padded character trigrams.

    Each word contributes its unigram plus the trigrams of "^word$", so
    "no" yields features no, ^no, no$.  Deterministic by construction.
    """
    weights: SentenceVector = {}
    for word in normalize_text(text).split():
        weights[word] = weights.get(word, 0.0) + 1.0
        padded = f"^{word}$"
        for i in range(len(padded) - 2):
            key = _TRIGRAM_PREFIX + padded[i : i + 3]
            weights[key] = weights.get(key, 0.0) + 1.0
    return weights


def bray_curtis_sim(u: SentenceVector, v: SentenceVector) -> float:
    """1 minus the Bray-Curtis dissimilarity; 0 when both vectors are empty.

    For nonnegative vectors the result lies in [0, 1].
    """
    total = sum(u.values()) + sum(v.values())
    if total == 0:
        return 0.0
    diff = sum(abs(u.get(k, 0.0) - v.get(k, 0.0)) for k in u.keys() | v.keys())
    return 1.0 - diff / total


def cosine_sim(u: SentenceVector, v: SentenceVector) -> float:
    """Cosine of the angle between two sparse vectors; 0 if either is empty."""
    if not u or not v:
        return 0.0
    norm_u = math.sqrt(sum(w * w for w in u.values()))
    norm_v = math.sqrt(sum(w * w for w in v.values()))
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    dot = sum(w * v[k] for k, w in u.items() if k in v)
    return dot / (norm_u * norm_v)


_MEASURES: dict[Measure, Callable[[SentenceVector, SentenceVector], float]] = {
    Measure.BRAY_CURTIS: bray_curtis_sim,
    Measure.COSINE: cosine_sim,
}


def _embed_batch(texts: list[str], provider: ProviderConfig) -> list[SentenceVector]:
    try:
        response = requests.post(
            provider.url, json={"texts": texts}, timeout=provider.timeout
        )
        response.raise_for_status()
        payload = response.json()
    except requests.RequestException as exc:
        raise ProviderError(f"embedding provider unreachable: {exc}") from exc
    except ValueError as exc:
        raise ProviderError("embedding provider returned invalid JSON") from exc
    vectors = payload.get("vectors") if isinstance(payload, dict) else None
    if not isinstance(vectors, list) or len(vectors) != len(texts):
        raise ProviderError("embedding provider response missing matching 'vectors'")
    out: list[SentenceVector] = []
    for vec in vectors:
        if not isinstance(vec, list) or not all(
            isinstance(x, (int, float)) for x in vec
        ):
            raise ProviderError("embedding provider returned a non-numeric vector")
        out.append({str(i): float(x) for i, x in enumerate(vec)})
    return out


def embed_with_provider(text: str, provider: ProviderConfig) -> SentenceVector:
    """Fetch one embedding from the external service.

    Dense components are keyed by their index.  Values may be negative, so
    such vectors are only meaningful under the cosine measure.
    """
    return _embed_batch([text], provider)[0]


@dataclass(frozen=True)
class MatchResult:
    status_id: str
    score: float
    matched_annotation: str


class Matcher:
    """Scores utterances against a knowledge base's status annotations."""

    def __init__(self, kb: "KbDocument", config: MatcherConfig | None = None):
        self.config = config or MatcherConfig()
        self.graph = kb.graph
        self._stop_sentences = kb.stop_sentences or DEFAULT_STOP_SENTENCES
        self._explain_sentences = kb.explain_sentences or DEFAULT_EXPLAIN_SENTENCES
        self._stop_vectors = [(s, vectorize(s)) for s in self._stop_sentences]
        self._explain_vectors = [(s, vectorize(s)) for s in self._explain_sentences]
        self._lexical_table = {
            status.id: [(a, vectorize(a)) for a in status.annotations]
            for status in self.graph.statuses
        }
        self._mutual_pairs = [
            (left, right)
            for left in sorted(self.graph.status_ids)
            for right in sorted(self.graph.status_ids)
            if left < right
            and (left, right) in self.graph.attacks
            and (right, left) in self.graph.attacks
        ]
        self._provider_table: dict[str, list[tuple[str, SentenceVector]]] | None = None
        if self.config.provider is not None:
            try:
                self._provider_table = self._embed_annotations(self.config.provider)
            except ProviderError as exc:
                log.warning("embedding provider unavailable, using lexical matching: %s", exc)

    def _embed_annotations(
        self, provider: ProviderConfig
    ) -> dict[str, list[tuple[str, SentenceVector]]]:
        texts: list[str] = []
        spans: list[tuple[str, str]] = []
        for status in self.graph.statuses:
            for annotation in status.annotations:
                texts.append(annotation)
                spans.append((status.id, annotation))
        vectors = _embed_batch(texts, provider)
        table: dict[str, list[tuple[str, SentenceVector]]] = {
            status.id: [] for status in self.graph.statuses
        }
        for (status_id, annotation), vector in zip(spans, vectors):
            table[status_id].append((annotation, vector))
        return table

    def _score_table(self, text: str) -> dict[str, tuple[float, str]]:
        """Best (score, annotation) per status id, over the active pipeline."""
        if self._provider_table is not None and self.config.provider is not None:
            try:
                query = embed_with_provider(text, self.config.provider)
                return self._best_scores(query, self._provider_table, cosine_sim)
            except ProviderError as exc:
                log.warning("embedding provider failed, using lexical matching: %s", exc)
        query = vectorize(text)
        return self._best_scores(query, self._lexical_table, _MEASURES[self.config.measure])

    @staticmethod
    def _best_scores(
        query: SentenceVector,
        table: dict[str, list[tuple[str, SentenceVector]]],
        sim: Callable[[SentenceVector, SentenceVector], float],
    ) -> dict[str, tuple[float, str]]:
        scores: dict[str, tuple[float, str]] = {}
        for status_id, annotated in table.items():
            best_score, best_annotation = 0.0, annotated[0][0] if annotated else ""
            for annotation, vector in annotated:
                value = sim(query, vector)
                if value > best_score:
                    best_score, best_annotation = value, annotation
            scores[status_id] = (best_score, best_annotation)
        return scores

    def compute_matches(self, text: str) -> list[MatchResult]:
        """Status nodes the utterance activates.

        The exclusivity rule runs on the raw scores before thresholding: of
        two mutually attacking nodes the strictly higher scorer survives, and
        both are dropped when their scores differ by at most the exclusivity
        margin (the utterance is too ambiguous between a fact and its
        opposite to trust).  Running it before the threshold keeps the result
        monotone in the threshold.  Results are ordered by descending score,
        then natural id order.
        """
        scores = self._score_table(text)
        dropped: set[str] = set()
        for left, right in self._mutual_pairs:
            left_score, right_score = scores[left][0], scores[right][0]
            if abs(left_score - right_score) <= self.config.exclusive_margin:
                dropped.add(left)
                dropped.add(right)
            elif left_score > right_score:
                dropped.add(right)
            else:
                dropped.add(left)
        results = [
            MatchResult(status_id, score, annotation)
            for status_id, (score, annotation) in scores.items()
            if status_id not in dropped and score >= self.config.threshold
        ]
        results.sort(key=lambda m: (-m.score, natural_key(m.status_id)))
        return results

    def detect_intent(self, text: str) -> Intent:
        """Classify an utterance as a stop request, an explanation request,
        or an ordinary statement.

        Always uses the lexical pipeline: intent sentences are short fixed
        phrases, and routing must stay deterministic even when an embedding
        provider is configured.
        """
        query = vectorize(text)
        sim = _MEASURES[self.config.measure]
        stop_score = max((sim(query, v) for _, v in self._stop_vectors), default=0.0)
        explain_score = max(
            (sim(query, v) for _, v in self._explain_vectors), default=0.0
        )
        if max(stop_score, explain_score) < self.config.threshold:
            return Intent.STATEMENT
        return Intent.STOP if stop_score >= explain_score else Intent.EXPLAIN

    def intent_sentences(self, intent: Intent) -> tuple[str, ...]:
        """The configured sentences for a non-statement intent."""
        if intent is Intent.STOP:
            return tuple(self._stop_sentences)
        if intent is Intent.EXPLAIN:
            return tuple(self._explain_sentences)
        raise ValueError("statements have no fixed sentence list")
