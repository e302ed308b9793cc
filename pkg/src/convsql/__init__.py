"""Conversational text-to-SQL data tooling.

Parse and canonicalize the Spider-family SQL dialect, derive auxiliary
task labels, mutate gold SQL under a seeded budget, assemble two-stage
Seq2Seq training corpora, drive context-chained inference against any
/generate endpoint, and score predictions with set-based exact match.
"""

from convsql.ast_nodes import SqlQuery
from convsql.canonical import canonicalize, qualify_columns
from convsql.corpus import (
    CorpusConfig,
    DatasetSpec,
    Separators,
    TaskSample,
    build_finetune_corpus,
    build_input,
    build_pretrain_corpus,
    corpus_stats,
    load_interactions,
    make_samples,
    write_corpus,
    write_manifest,
)
from convsql.errors import (
    ConvsqlError,
    EndpointError,
    InteractionParseError,
    LexError,
    MissingPrediction,
    SchemaFormatError,
    SqlSyntaxError,
    UnknownIdentifier,
    UnsupportedFeature,
)
from convsql.evaluation import (
    EvalReport,
    classify_difficulty,
    evaluate,
    exact_match,
    load_predictions,
)
from convsql.inference import (
    InferenceRun,
    ModelEndpoint,
    find_context_leaks,
    resolve_generator,
    run_dataset,
    run_interaction,
    write_predictions,
)
from convsql.labels import (
    ChangeTag,
    Interaction,
    RspLabel,
    Turn,
    TwpLabel,
    build_fup_target,
    compute_turn_switch,
    extract_related_schema,
    serialize_rsp,
    serialize_twp,
)
from convsql.lexer import SCANNER_BACKEND, tokenize_sql
from convsql.parser import parse_sql
from convsql.perturb import (
    PerturbConfig,
    PerturbSite,
    SiteKind,
    enumerate_sites,
    perturb_sql,
)
from convsql.printer import print_sql
from convsql.schema import Column, DatabaseSchema, Table, load_schemas, serialize_schema

__version__ = "0.1.0"

__all__ = [
    "SCANNER_BACKEND",
    "ChangeTag",
    "Column",
    "ConvsqlError",
    "CorpusConfig",
    "DatabaseSchema",
    "DatasetSpec",
    "EndpointError",
    "EvalReport",
    "InferenceRun",
    "Interaction",
    "InteractionParseError",
    "LexError",
    "MissingPrediction",
    "ModelEndpoint",
    "PerturbConfig",
    "PerturbSite",
    "RspLabel",
    "SchemaFormatError",
    "Separators",
    "SiteKind",
    "SqlQuery",
    "SqlSyntaxError",
    "Table",
    "TaskSample",
    "Turn",
    "TwpLabel",
    "UnknownIdentifier",
    "UnsupportedFeature",
    "build_finetune_corpus",
    "build_fup_target",
    "build_input",
    "build_pretrain_corpus",
    "canonicalize",
    "classify_difficulty",
    "compute_turn_switch",
    "corpus_stats",
    "enumerate_sites",
    "evaluate",
    "exact_match",
    "extract_related_schema",
    "find_context_leaks",
    "load_interactions",
    "load_predictions",
    "load_schemas",
    "make_samples",
    "parse_sql",
    "perturb_sql",
    "print_sql",
    "qualify_columns",
    "resolve_generator",
    "run_dataset",
    "run_interaction",
    "serialize_rsp",
    "serialize_schema",
    "serialize_twp",
    "tokenize_sql",
    "write_corpus",
    "write_manifest",
    "write_predictions",
]
