"""fex: natural-language feature extraction for C codebases.

A retrieval index over source terms (with optional latent rank reduction)
drives a source-level dependency-closure slicer: a `(terms, threshold)`
query selects seed locations, and the slicer closes over data and control
dependencies to produce a syntactically complete code module.
"""

from .corpus import (
    Corpus,
    CorpusError,
    Document,
    Location,
    TermEntry,
    build_corpus,
    normalize,
    reduce_lsi,
)
from .evalharness import EvalReport, evaluate, grep_baseline, precision_recall
from .progmodel import ProgramModel, build_program_model, resolve_definitions
from .project import SourceProject
from .query import CorpusSlice, Query, build_query_vector, score_documents, slice_corpus
from .slicer import FeatureSlice, SliceState, extract_feature
from .store import load_corpus, save_corpus

__version__ = "0.1.0"

__all__ = [
    "Corpus", "CorpusError", "CorpusSlice", "Document", "EvalReport",
    "FeatureSlice", "Location", "ProgramModel", "Query", "SliceState",
    "SourceProject", "TermEntry", "build_corpus", "build_program_model",
    "build_query_vector", "evaluate", "extract_feature", "grep_baseline",
    "load_corpus", "normalize", "precision_recall", "reduce_lsi",
    "resolve_definitions", "save_corpus", "score_documents", "slice_corpus",
]
