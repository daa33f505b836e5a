"""Subjective-knowledge-grounded task-oriented dialogue engine.

Detects subjective knowledge-seeking turns, tracks the entities under
discussion, selects relevant review sentences, aggregates their
sentiments, and renders a two-sided grounded response; ships with the
benchmark harness that evaluates every stage.
"""

from .corpus import (
    DialogueContext,
    Entity,
    InstanceLabel,
    KnowledgeBase,
    KnowledgeSnippet,
    SnippetRef,
    Speaker,
    Split,
    Utterance,
    corpus_stats,
    load_knowledge_base,
    load_split,
    tokenize,
)
from .errors import (
    AlignmentError,
    ConfigError,
    DataError,
    ExternalServiceError,
    GenerationError,
    IntegrityError,
    ParseError,
    ProtocolError,
    SktodError,
)
from .pipeline import Artifacts, PipelineConfig, RunResult, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "Artifacts",
    "AlignmentError",
    "ConfigError",
    "DataError",
    "DialogueContext",
    "Entity",
    "ExternalServiceError",
    "GenerationError",
    "InstanceLabel",
    "IntegrityError",
    "KnowledgeBase",
    "KnowledgeSnippet",
    "ParseError",
    "PipelineConfig",
    "ProtocolError",
    "RunResult",
    "SktodError",
    "SnippetRef",
    "Speaker",
    "Split",
    "Utterance",
    "corpus_stats",
    "load_knowledge_base",
    "load_split",
    "run_pipeline",
    "tokenize",
    "__version__",
]
