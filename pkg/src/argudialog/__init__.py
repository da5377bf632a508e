"""Argumentation-backed dialogue system.

The engine only ever gives replies it can defend against every known
counterargument, asks targeted questions when a defence is still missing,
and can explain any reply it gave on demand.
"""

from .core import (
    ArgumentationGraph,
    Explanation,
    NotGivenRecord,
    ReplyArgument,
    ReplyClassification,
    StatusArgument,
    UnknownArgumentError,
    WithheldReason,
    classify_replies,
    defence_candidates,
    explain,
    is_acceptable,
    is_conflict_free,
    oracle_classify,
    set_attacks,
    set_supports,
)
from .engine import (
    ConflictPolicy,
    DialogueEngine,
    DialogueEvent,
    EventKind,
    Phase,
    SessionState,
    SessionTerminatedError,
    select_candidate_reply,
)
from .kb import (
    InvalidKbError,
    KbDocument,
    KbParseError,
    ValidationIssue,
    ValidationReport,
    builtin_case_study_kb,
    load_kb,
    parse_kb,
    serialize_kb,
    validate_kb,
)
from .matching import (
    Intent,
    Matcher,
    MatcherConfig,
    MatchResult,
    Measure,
    ProviderConfig,
    bray_curtis_sim,
    cosine_sim,
    vectorize,
)

__version__ = "0.1.0"
