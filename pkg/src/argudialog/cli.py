"""Command-line tooling: interactive chat, KB validation, transcript replay,
one-shot reasoning, and the HTTP service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .core import (
    UnknownArgumentError,
    classify_replies,
    natural_sorted,
)
from .engine import (
    ConflictPolicy,
    DialogueEngine,
    DialogueEvent,
    EventKind,
    Phase,
)
from .kb import (
    InvalidKbError,
    KbDocument,
    KbParseError,
    build_document,
    validate_kb,
)
from .matching import MatcherConfig, Measure, ProviderConfig
from .service import DEFAULT_GREETING, create_app

EXIT_OK = 0
EXIT_IO = 1
EXIT_MISMATCH = 1
EXIT_INVALID = 2


def _matcher_options(command):
    command = click.option(
        "--threshold",
        type=float,
        default=0.55,
        show_default=True,
        envvar="ARGUDIALOG_THRESHOLD",
        help="Minimum similarity for an utterance to activate a fact.",
    )(command)
    command = click.option(
        "--measure",
        type=click.Choice([m.value for m in Measure]),
        default=Measure.BRAY_CURTIS.value,
        show_default=True,
        envvar="ARGUDIALOG_MEASURE",
        help="Similarity measure for the lexical matcher.",
    )(command)
    command = click.option(
        "--conflict-policy",
        type=click.Choice([p.value for p in ConflictPolicy]),
        default=ConflictPolicy.KEEP_FIRST.value,
        show_default=True,
        envvar="ARGUDIALOG_CONFLICT_POLICY",
        help="How to treat facts that contradict earlier ones.",
    )(command)
    command = click.option(
        "--provider-url",
        default=None,
        envvar="ARGUDIALOG_PROVIDER_URL",
        help="Optional external embedding service endpoint.",
    )(command)
    command = click.option(
        "--provider-timeout",
        type=float,
        default=5.0,
        show_default=True,
        envvar="ARGUDIALOG_PROVIDER_TIMEOUT",
        help="Timeout in seconds for the embedding service.",
    )(command)
    return command


def _build_matcher_config(
    threshold: float, measure: str, provider_url: str | None, provider_timeout: float
) -> MatcherConfig:
    provider = ProviderConfig(provider_url, provider_timeout) if provider_url else None
    return MatcherConfig(
        threshold=threshold, measure=Measure(measure), provider=provider
    )


def _read_kb(path: str) -> KbDocument:
    """Load a knowledge base, exiting 1 on I/O trouble and 2 when invalid."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    try:
        doc = build_document(data, strict=False)
    except KbParseError as exc:
        click.echo(f"invalid knowledge base: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    report = validate_kb(doc)
    if report.errors:
        for issue in report.errors:
            click.echo(f"error {issue.code} at {issue.locus}: {issue.message}", err=True)
        sys.exit(EXIT_INVALID)
    return doc


def render_event(event: DialogueEvent) -> str:
    """One human-readable line per event, for the terminal chat."""
    payload = event.payload
    if event.kind is EventKind.PROMPT:
        return f"[PROMPT] {payload['text']}"
    if event.kind is EventKind.REPLY_GIVEN:
        return f"[REPLY] {payload['text']}"
    if event.kind is EventKind.EXPLANATION:
        because = "; ".join(payload["supporter_facts"]) or "(nothing you said)"
        parts = [f"[EXPLAIN] because: {because}"]
        withheld = []
        for record in payload["not_given"]:
            if record["attacker_facts"]:
                ruled_out = ", ".join(record["attacker_facts"])
                withheld.append(f"'{record['reply_text']}' (ruled out by: {ruled_out})")
            else:
                withheld.append(
                    f"'{record['reply_text']}' (not fully defended by the stated facts)"
                )
        if withheld:
            parts.append(f"not given: {'; '.join(withheld)}")
        return "; ".join(parts)
    if event.kind is EventKind.NO_MATCH:
        return f"[NO_MATCH] {payload['message']}"
    if event.kind is EventKind.CONFLICT_DROPPED:
        return f"[CONFLICT_DROPPED] ignored: {', '.join(payload['dropped'])}"
    if event.kind is EventKind.NO_REPLY_POSSIBLE:
        return f"[NO_REPLY_POSSIBLE] {payload['message']}"
    if event.kind is EventKind.TERMINATED:
        return "[TERMINATED] Goodbye."
    return f"[{event.kind.value}] {json.dumps(payload, ensure_ascii=False)}"


@click.group()
def main() -> None:
    """Argumentation-backed dialogue system."""


@main.command()
@click.option("--kb", "kb_path", required=True, envvar="ARGUDIALOG_KB", help="Knowledge base JSON file.")
@_matcher_options
def chat(
    kb_path: str,
    threshold: float,
    measure: str,
    conflict_policy: str,
    provider_url: str | None,
    provider_timeout: float,
) -> None:
    """Chat on stdin/stdout until a stop sentence or end of input."""
    doc = _read_kb(kb_path)
    engine = DialogueEngine(
        doc,
        _build_matcher_config(threshold, measure, provider_url, provider_timeout),
        ConflictPolicy(conflict_policy),
    )
    click.echo(f"[GREETING] {doc.metadata.get('greeting') or DEFAULT_GREETING}")
    state = engine.start_session()
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        for event in engine.handle_utterance(state, text):
            click.echo(render_event(event))
        if state.phase is Phase.TERMINATED:
            break
    sys.exit(EXIT_OK)


@main.command()
@click.argument("kb_path", type=click.Path())
@click.option("--strict", is_flag=True, help="Treat warnings as failures too.")
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
def validate(kb_path: str, strict: bool, as_json: bool) -> None:
    """Validate a knowledge base file and report every error and warning."""
    try:
        data = Path(kb_path).read_bytes()
    except OSError as exc:
        click.echo(f"cannot read {kb_path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    try:
        doc = build_document(data, strict=False)
    except KbParseError as exc:
        report = exc.report
    else:
        report = validate_kb(doc)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
    else:
        for issue in report.errors:
            click.echo(f"error {issue.code} at {issue.locus}: {issue.message}")
        for issue in report.warnings:
            click.echo(f"warning {issue.code} at {issue.locus}: {issue.message}")
        click.echo(
            f"{len(report.errors)} error(s), {len(report.warnings)} warning(s)"
        )
    if report.errors or (strict and report.warnings):
        sys.exit(EXIT_INVALID)
    sys.exit(EXIT_OK)


def _parse_transcript(path: str) -> list[tuple[int, str, list[tuple[int, str, str]]]]:
    """Parse a replay script into (line, utterance, expectations) turns.

    Lines are 'U: <text>' for user input, 'E: <KIND>[ <substring>]' for an
    expected event, '#' comments, and blanks.
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    turns: list[tuple[int, str, list[tuple[int, str, str]]]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("U:"):
            turns.append((lineno, line[2:].strip(), []))
        elif line.startswith("E:"):
            if not turns:
                click.echo(f"line {lineno}: expectation before any utterance", err=True)
                sys.exit(EXIT_INVALID)
            body = line[2:].strip()
            kind, _, substring = body.partition(" ")
            if kind not in EventKind.__members__:
                click.echo(f"line {lineno}: unknown event kind {kind!r}", err=True)
                sys.exit(EXIT_INVALID)
            turns[-1][2].append((lineno, kind, substring.strip()))
        else:
            click.echo(f"line {lineno}: unrecognized line {line!r}", err=True)
            sys.exit(EXIT_INVALID)
    return turns


@main.command()
@click.option("--kb", "kb_path", required=True, envvar="ARGUDIALOG_KB", help="Knowledge base JSON file.")
@click.argument("transcript", type=click.Path())
@_matcher_options
def replay(
    kb_path: str,
    transcript: str,
    threshold: float,
    measure: str,
    conflict_policy: str,
    provider_url: str | None,
    provider_timeout: float,
) -> None:
    """Run a scripted transcript and check the emitted events against it."""
    doc = _read_kb(kb_path)
    engine = DialogueEngine(
        doc,
        _build_matcher_config(threshold, measure, provider_url, provider_timeout),
        ConflictPolicy(conflict_policy),
    )
    turns = _parse_transcript(transcript)
    state = engine.start_session()
    checked = 0
    for lineno, text, expectations in turns:
        if state.phase is Phase.TERMINATED:
            click.echo(f"FAIL line {lineno}: session already terminated before {text!r}")
            sys.exit(EXIT_MISMATCH)
        events = engine.handle_utterance(state, text)
        if len(events) != len(expectations):
            got = ", ".join(e.kind.value for e in events) or "(none)"
            wanted = ", ".join(kind for _, kind, _ in expectations) or "(none)"
            click.echo(f"FAIL line {lineno}: expected events [{wanted}], got [{got}]")
            sys.exit(EXIT_MISMATCH)
        for event, (exp_line, kind, substring) in zip(events, expectations):
            rendered = json.dumps(event.payload, ensure_ascii=False, sort_keys=True)
            if event.kind.value != kind:
                click.echo(
                    f"FAIL line {exp_line}: expected {kind}, got {event.kind.value}"
                )
                sys.exit(EXIT_MISMATCH)
            if substring and substring not in rendered:
                click.echo(
                    f"FAIL line {exp_line}: {substring!r} not found in {rendered}"
                )
                sys.exit(EXIT_MISMATCH)
            checked += 1
    click.echo(f"PASS ({len(turns)} turn(s), {checked} event(s) checked)")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--kb", "kb_path", required=True, envvar="ARGUDIALOG_KB", help="Knowledge base JSON file.")
@click.option("--facts", default="", help="Comma-separated activated status ids.")
@click.option(
    "--new",
    "new_facts",
    default=None,
    help="Comma-separated newly stated ids (defaults to --facts).",
)
@click.option("--json", "as_json", is_flag=True, help="Emit the result as JSON.")
def reason(kb_path: str, facts: str, new_facts: str | None, as_json: bool) -> None:
    """Classify replies for a given activated set, without any dialogue."""
    doc = _read_kb(kb_path)
    graph = doc.graph
    activated = [t.strip() for t in facts.split(",") if t.strip()]
    stated = (
        activated
        if new_facts is None
        else [t.strip() for t in new_facts.split(",") if t.strip()]
    )
    try:
        classification = classify_replies(graph, activated, stated)
    except (UnknownArgumentError, ValueError) as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_INVALID)
    excluded = []
    for reply_id in natural_sorted(graph.reply_ids):
        if reply_id in classification.consistent:
            continue
        if reply_id in classification.potentially_consistent:
            continue
        if not set(stated) & graph.supporters(reply_id):
            continue
        attackers = natural_sorted(set(activated) & graph.attackers(reply_id))
        excluded.append({"reply_id": reply_id, "attackers": attackers})
    if as_json:
        click.echo(
            json.dumps(
                {
                    "consistent": natural_sorted(classification.consistent),
                    "potentially_consistent": natural_sorted(
                        classification.potentially_consistent
                    ),
                    "excluded": excluded,
                },
                indent=2,
            )
        )
    else:
        click.echo(
            "consistent: "
            + (", ".join(natural_sorted(classification.consistent)) or "(none)")
        )
        click.echo(
            "potentially consistent: "
            + (
                ", ".join(natural_sorted(classification.potentially_consistent))
                or "(none)"
            )
        )
        for entry in excluded:
            click.echo(
                f"excluded: {entry['reply_id']} (attacked by"
                f" {', '.join(entry['attackers'])})"
            )
    sys.exit(EXIT_OK)


@main.command()
@click.option("--kb", "kb_path", required=True, envvar="ARGUDIALOG_KB", help="Knowledge base JSON file.")
@click.option(
    "--listen",
    default="127.0.0.1:8080",
    show_default=True,
    envvar="ARGUDIALOG_LISTEN",
    help="host:port to bind.",
)
@click.option(
    "--allow-origin",
    default=None,
    envvar="ARGUDIALOG_ALLOW_ORIGIN",
    help="Origin allowed to call the API from a browser (CORS).",
)
@_matcher_options
def serve(
    kb_path: str,
    listen: str,
    allow_origin: str | None,
    threshold: float,
    measure: str,
    conflict_policy: str,
    provider_url: str | None,
    provider_timeout: float,
) -> None:
    """Serve the HTTP API."""
    import uvicorn

    doc = _read_kb(kb_path)
    app = create_app(
        doc,
        matcher_config=_build_matcher_config(
            threshold, measure, provider_url, provider_timeout
        ),
        conflict_policy=ConflictPolicy(conflict_policy),
        allow_origin=allow_origin,
    )
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        click.echo(f"--listen must look like host:port, got {listen!r}", err=True)
        sys.exit(EXIT_INVALID)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")


if __name__ == "__main__":
    main()
