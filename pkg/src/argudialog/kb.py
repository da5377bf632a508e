"""Knowledge-base documents: the JSON file format, validation, and fixtures.

A document wraps an argumentation graph together with matching annotations,
optional elicitation prompts, optional intent sentence lists, and free-form
metadata.  Parsing is strict by default (unknown fields are rejected); a
lenient mode downgrades unknown fields to warnings.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .core import (
    ArgumentationGraph,
    ReplyArgument,
    StatusArgument,
    natural_key,
    natural_sorted,
)

KB_VERSION = "1"
_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]+$")

# Error codes (a document with any of these must not be loaded into a session).
SYNTAX_ERROR = "SYNTAX_ERROR"
SCHEMA_ERROR = "SCHEMA_ERROR"
UNKNOWN_VERSION = "UNKNOWN_VERSION"
BAD_ID = "BAD_ID"
DUPLICATE_ID = "DUPLICATE_ID"
DANGLING_EDGE = "DANGLING_EDGE"
SELF_ATTACK = "SELF_ATTACK"
EMPTY_FACT_TEXT = "EMPTY_FACT_TEXT"
EMPTY_ANNOTATIONS = "EMPTY_ANNOTATIONS"
EMPTY_REPLY_TEXT = "EMPTY_REPLY_TEXT"
EMPTY_INTENTS = "EMPTY_INTENTS"

# Warning codes (lints; the document still loads).
UNKNOWN_FIELD = "UNKNOWN_FIELD"
NO_SUPPORTER = "NO_SUPPORTER"
REMARK_VIOLATION = "REMARK_VIOLATION"
AMBIGUOUS_ATTACK_PAIR = "AMBIGUOUS_ATTACK_PAIR"
MISSING_PROMPT = "MISSING_PROMPT"


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    locus: str
    message: str


@dataclass
class ValidationReport:
    errors: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict[str, Any]:
        return {
            "errors": [vars(issue) for issue in self.errors],
            "warnings": [vars(issue) for issue in self.warnings],
        }


class KbParseError(ValueError):
    """Raised when a document cannot be parsed or fails validation."""

    def __init__(self, issue: ValidationIssue, report: ValidationReport | None = None):
        super().__init__(f"{issue.code} at {issue.locus}: {issue.message}")
        self.issue = issue
        self.report = report or ValidationReport(errors=[issue])


class InvalidKbError(ValueError):
    """Raised when a session is started over a document with validation errors."""


@dataclass(frozen=True)
class KbDocument:
    version: str
    graph: ArgumentationGraph
    metadata: dict[str, Any] = field(default_factory=dict)
    stop_sentences: tuple[str, ...] | None = None
    explain_sentences: tuple[str, ...] | None = None
    # Lenient-parse warnings ride along for validate_kb; not part of identity.
    parse_warnings: tuple[ValidationIssue, ...] = field(default=(), compare=False)


def _schema_error(path: str, message: str) -> KbParseError:
    return KbParseError(ValidationIssue(SCHEMA_ERROR, path, message))


def _string(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise _schema_error(path, f"expected a string, got {type(value).__name__}")
    return value


def _string_list(value: Any, path: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise _schema_error(path, "expected a list of strings")
    return tuple(value)


def _object(value: Any, path: str) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise _schema_error(path, f"expected an object, got {type(value).__name__}")
    return value


def _edge_list(value: Any, path: str) -> tuple[tuple[str, str], ...]:
    if not isinstance(value, list):
        raise _schema_error(path, "expected a list of [source, target] pairs")
    edges: list[tuple[str, str]] = []
    for i, entry in enumerate(value):
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(e, str) for e in entry)
        ):
            raise _schema_error(f"{path}[{i}]", "expected a [source, target] string pair")
        edges.append((entry[0], entry[1]))
    return tuple(edges)


def _check_fields(
    obj: dict[str, Any],
    allowed: set[str],
    path: str,
    strict: bool,
    warnings: list[ValidationIssue],
) -> None:
    for key in obj:
        if key not in allowed:
            if strict:
                raise _schema_error(f"{path}.{key}", "unknown field")
            warnings.append(
                ValidationIssue(UNKNOWN_FIELD, f"{path}.{key}", "unknown field ignored")
            )


def build_document(data: bytes | str, strict: bool = True) -> KbDocument:
    """Decode JSON and shape-check it into a KbDocument.

    Raises KbParseError for malformed JSON or wrong field shapes.  Graph-level
    problems (duplicate ids, dangling edges, self-attacks, ...) are left for
    validate_kb so they can be reported rather than thrown.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise KbParseError(
                ValidationIssue(SYNTAX_ERROR, f"byte {exc.start}", "not valid UTF-8")
            ) from exc
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise KbParseError(
            ValidationIssue(
                SYNTAX_ERROR, f"line {exc.lineno} column {exc.colno}", exc.msg
            )
        ) from exc

    root = _object(payload, "$")
    warnings: list[ValidationIssue] = []
    _check_fields(
        root,
        {"version", "metadata", "statuses", "replies", "attacks", "supports", "intents"},
        "$",
        strict,
        warnings,
    )
    version = _string(root.get("version"), "$.version")
    metadata = _object(root.get("metadata", {}), "$.metadata")

    statuses: list[StatusArgument] = []
    raw_statuses = root.get("statuses", [])
    if not isinstance(raw_statuses, list):
        raise _schema_error("$.statuses", "expected a list")
    for i, raw in enumerate(raw_statuses):
        path = f"$.statuses[{i}]"
        obj = _object(raw, path)
        _check_fields(obj, {"id", "fact_text", "annotations", "prompt"}, path, strict, warnings)
        prompt = obj.get("prompt")
        if prompt is not None:
            prompt = _string(prompt, f"{path}.prompt")
        statuses.append(
            StatusArgument(
                id=_string(obj.get("id"), f"{path}.id"),
                fact_text=_string(obj.get("fact_text"), f"{path}.fact_text"),
                annotations=_string_list(obj.get("annotations"), f"{path}.annotations"),
                prompt=prompt,
            )
        )

    replies: list[ReplyArgument] = []
    raw_replies = root.get("replies", [])
    if not isinstance(raw_replies, list):
        raise _schema_error("$.replies", "expected a list")
    for i, raw in enumerate(raw_replies):
        path = f"$.replies[{i}]"
        obj = _object(raw, path)
        _check_fields(obj, {"id", "reply_text"}, path, strict, warnings)
        replies.append(
            ReplyArgument(
                id=_string(obj.get("id"), f"{path}.id"),
                reply_text=_string(obj.get("reply_text"), f"{path}.reply_text"),
            )
        )

    attacks = _edge_list(root.get("attacks", []), "$.attacks")
    supports = _edge_list(root.get("supports", []), "$.supports")

    stop_sentences: tuple[str, ...] | None = None
    explain_sentences: tuple[str, ...] | None = None
    if "intents" in root:
        intents = _object(root["intents"], "$.intents")
        _check_fields(intents, {"stop", "explain"}, "$.intents", strict, warnings)
        if "stop" in intents:
            stop_sentences = _string_list(intents["stop"], "$.intents.stop")
        if "explain" in intents:
            explain_sentences = _string_list(intents["explain"], "$.intents.explain")

    graph = ArgumentationGraph(
        statuses=tuple(statuses),
        replies=tuple(replies),
        attacks=frozenset(attacks),
        supports=frozenset(supports),
    )
    return KbDocument(
        version=version,
        graph=graph,
        metadata=metadata,
        stop_sentences=stop_sentences,
        explain_sentences=explain_sentences,
        parse_warnings=tuple(warnings),
    )


def validate_kb(doc: KbDocument) -> ValidationReport:
    """Check a document against every graph invariant and lint.

    Errors make the document unloadable; warnings flag likely authoring
    mistakes.  Lints only run once the document is error-free, since they
    assume a well-formed graph.
    """
    report = ValidationReport(warnings=list(doc.parse_warnings))
    graph = doc.graph

    if doc.version != KB_VERSION:
        report.errors.append(
            ValidationIssue(
                UNKNOWN_VERSION,
                "$.version",
                f"unsupported version {doc.version!r}; this build reads version {KB_VERSION!r}",
            )
        )

    seen: set[str] = set()
    for node in list(graph.statuses) + list(graph.replies):
        if not _ID_PATTERN.match(node.id):
            report.errors.append(
                ValidationIssue(BAD_ID, node.id, "ids may contain only letters, digits, _ and -")
            )
        if node.id in seen:
            report.errors.append(
                ValidationIssue(DUPLICATE_ID, node.id, "id used by more than one node")
            )
        seen.add(node.id)

    for status in graph.statuses:
        if not status.fact_text.strip():
            report.errors.append(
                ValidationIssue(EMPTY_FACT_TEXT, status.id, "fact_text must be nonempty")
            )
        if not status.annotations or not all(a.strip() for a in status.annotations):
            report.errors.append(
                ValidationIssue(
                    EMPTY_ANNOTATIONS, status.id, "every status needs nonempty annotations"
                )
            )

    for reply in graph.replies:
        if not reply.reply_text.strip():
            report.errors.append(
                ValidationIssue(EMPTY_REPLY_TEXT, reply.id, "reply_text must be nonempty")
            )

    for name, sentences in (
        ("stop", doc.stop_sentences),
        ("explain", doc.explain_sentences),
    ):
        if sentences is not None and (
            not sentences or not all(s.strip() for s in sentences)
        ):
            report.errors.append(
                ValidationIssue(
                    EMPTY_INTENTS,
                    f"$.intents.{name}",
                    "intent sentence lists must be nonempty when present",
                )
            )

    for src, dst in sorted(graph.attacks):
        locus = f"attack {src}->{dst}"
        if src == dst:
            report.errors.append(ValidationIssue(SELF_ATTACK, locus, "a node cannot attack itself"))
            continue
        if src in graph.reply_ids:
            report.errors.append(
                ValidationIssue(SCHEMA_ERROR, locus, "attacks must originate from a status node")
            )
        elif src not in graph.status_ids:
            report.errors.append(ValidationIssue(DANGLING_EDGE, locus, f"unknown source {src!r}"))
        if not graph.has_argument(dst):
            report.errors.append(ValidationIssue(DANGLING_EDGE, locus, f"unknown target {dst!r}"))

    for src, dst in sorted(graph.supports):
        locus = f"support {src}->{dst}"
        if src in graph.reply_ids:
            report.errors.append(
                ValidationIssue(SCHEMA_ERROR, locus, "supports must originate from a status node")
            )
        elif src not in graph.status_ids:
            report.errors.append(ValidationIssue(DANGLING_EDGE, locus, f"unknown source {src!r}"))
        if dst in graph.status_ids:
            report.errors.append(
                ValidationIssue(SCHEMA_ERROR, locus, "supports must point at a reply node")
            )
        elif dst not in graph.reply_ids:
            report.errors.append(ValidationIssue(DANGLING_EDGE, locus, f"unknown target {dst!r}"))

    if report.errors:
        return report

    _lint(doc, report)
    return report


def _lint(doc: KbDocument, report: ValidationReport) -> None:
    # Deferred import: matching pulls in the similarity machinery this lint
    # reuses, and itself type-checks against this module.
    from .matching import DEFAULT_EXCLUSIVE_MARGIN, bray_curtis_sim, vectorize

    graph = doc.graph

    for reply_id in natural_sorted(graph.reply_ids):
        if not graph.supporters(reply_id):
            report.warnings.append(
                ValidationIssue(
                    NO_SUPPORTER, reply_id, "no status supports this reply; it can never be given"
                )
            )
        for attacker in natural_sorted(graph.attackers(reply_id)):
            if not graph.attackers(attacker):
                report.warnings.append(
                    ValidationIssue(
                        REMARK_VIOLATION,
                        reply_id,
                        f"attacker {attacker} has no counter-attacker, so eliciting"
                        f" facts can never defend this reply from it",
                    )
                )

    # Mutually attacking statuses whose annotations sit too close together
    # would be ambiguous to match: an utterance equal to one annotation would
    # score within the exclusivity margin of the other, dropping both.
    vectors = {
        status.id: [(a, vectorize(a)) for a in status.annotations]
        for status in graph.statuses
    }
    for left in natural_sorted(graph.status_ids):
        for right in natural_sorted(graph.status_ids):
            if left >= right:
                continue
            if (left, right) in graph.attacks and (right, left) in graph.attacks:
                closest = max(
                    (
                        bray_curtis_sim(lv, rv)
                        for _, lv in vectors[left]
                        for _, rv in vectors[right]
                    ),
                    default=0.0,
                )
                if closest >= 1.0 - DEFAULT_EXCLUSIVE_MARGIN:
                    report.warnings.append(
                        ValidationIssue(
                            AMBIGUOUS_ATTACK_PAIR,
                            f"{left}|{right}",
                            "annotations of these mutually attacking statuses are nearly"
                            " identical; utterances between them will match neither",
                        )
                    )

    defence_ids: set[str] = set()
    for reply_id in graph.reply_ids:
        for attacker in graph.attackers(reply_id):
            defence_ids.update(graph.attackers(attacker))
    for status in graph.statuses:
        if status.id in defence_ids and status.prompt is None:
            report.warnings.append(
                ValidationIssue(
                    MISSING_PROMPT,
                    status.id,
                    "this status may be asked about during elicitation but has no"
                    " prompt; a generic question will be synthesized",
                )
            )


def parse_kb(data: bytes | str, strict: bool = True) -> KbDocument:
    """Parse and fully validate a document; raise KbParseError on any error."""
    doc = build_document(data, strict=strict)
    report = validate_kb(doc)
    if report.errors:
        raise KbParseError(report.errors[0], report)
    return doc


def serialize_kb(doc: KbDocument) -> str:
    """Render a document back to its JSON format.

    Node order is preserved; edge sets are emitted in natural id order.
    parse_kb(serialize_kb(doc)) yields a document equal to doc.
    """
    payload: dict[str, Any] = {"version": doc.version}
    if doc.metadata:
        payload["metadata"] = doc.metadata
    payload["statuses"] = [
        {
            "id": s.id,
            "fact_text": s.fact_text,
            "annotations": list(s.annotations),
            **({"prompt": s.prompt} if s.prompt is not None else {}),
        }
        for s in doc.graph.statuses
    ]
    payload["replies"] = [
        {"id": r.id, "reply_text": r.reply_text} for r in doc.graph.replies
    ]
    edge_key = lambda edge: (natural_key(edge[0]), natural_key(edge[1]))
    payload["attacks"] = [list(edge) for edge in sorted(doc.graph.attacks, key=edge_key)]
    payload["supports"] = [list(edge) for edge in sorted(doc.graph.supports, key=edge_key)]
    intents: dict[str, list[str]] = {}
    if doc.stop_sentences is not None:
        intents["stop"] = list(doc.stop_sentences)
    if doc.explain_sentences is not None:
        intents["explain"] = list(doc.explain_sentences)
    if intents:
        payload["intents"] = intents
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def load_kb(path: str | Path, strict: bool = True) -> KbDocument:
    """Read and parse a document from disk."""
    return parse_kb(Path(path).read_bytes(), strict=strict)


def builtin_case_study_kb() -> KbDocument:
    """The bundled vaccination-eligibility example knowledge base."""
    data = resources.files("argudialog").joinpath("data/covid_vaccine.json").read_bytes()
    return parse_kb(data)
