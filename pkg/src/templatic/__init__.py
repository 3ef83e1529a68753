"""Toolkit for generating and scoring templatic views of documents.

A *templatic view* renders the same underlying content in a specific
format (slide deck, poster, blog post). This package scores generated
views against references with a precision/recall framework built from
pluggable text-similarity metrics plus order and length penalties, drives
a two-step LLM generation pipeline, and analyses human-preference data.
"""

from .panels import (
    BLOG,
    POSTER,
    SLIDES,
    Panel,
    PanelSequence,
    Role,
    TemplateKind,
    TokenizerConfig,
    make_sequence,
    template_from_name,
    tokenize,
)
from .tae import (
    Alignment,
    CorpusScore,
    Direction,
    RankPair,
    TaeScore,
    align,
    corpus_score,
    length_penalty,
    order_penalty,
    quality,
    replicate_and_rank,
    spearman,
    tae_score,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Panel",
    "PanelSequence",
    "Role",
    "TemplateKind",
    "TokenizerConfig",
    "SLIDES",
    "POSTER",
    "BLOG",
    "make_sequence",
    "template_from_name",
    "tokenize",
    "Alignment",
    "RankPair",
    "TaeScore",
    "CorpusScore",
    "Direction",
    "align",
    "quality",
    "replicate_and_rank",
    "spearman",
    "order_penalty",
    "length_penalty",
    "tae_score",
    "corpus_score",
]
