"""Querying the corpus: score documents, filter by threshold, gather seeds.

Two retrieval models are supported over the same corpus:

* ``vsm`` - cosine similarity between the query vector and raw TDM columns.
* ``lsi`` - the query is folded into the reduced space as
  ``q_k = sigma^-1 . U_k^T . q`` and compared by cosine against the rows of
  ``V_k`` (the documents' reduced-space coordinates). Requires a corpus
  built with a reduction.

All functions are pure over an immutable corpus: repeated identical queries
return identical slices, and concurrent evaluation needs no coordination.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Location
from .lexer import CTX_COMMENT

MODEL_VSM = "vsm"
MODEL_LSI = "lsi"
MODEL_AUTO = "auto"


class QueryError(Exception):
    pass


@dataclass(frozen=True)
class Query:
    terms: tuple[str, ...]
    threshold: float

    def __post_init__(self):
        if not self.terms or any(not t for t in self.terms):
            raise QueryError("query needs at least one non-empty term")
        if not all(t == t.lower().strip() for t in self.terms):
            raise QueryError("query terms must be lowercase and trimmed")
        if not 0.0 <= self.threshold <= 1.0:
            raise QueryError(
                f"threshold must lie in [0, 1], got {self.threshold}"
            )

    @classmethod
    def parse(cls, terms: str, threshold: float) -> "Query":
        parts = tuple(t.strip().lower() for t in terms.split(",") if t.strip())
        return cls(parts, threshold)


@dataclass(frozen=True)
class CorpusSlice:
    query: Query
    retained_documents: tuple[tuple[int, float], ...]  # (doc id, score)
    related_terms: dict[str, tuple[Location, ...]]
    diagnostics: tuple[str, ...] = ()

    def seed_locations(self) -> list[Location]:
        seeds: list[Location] = []
        for term in sorted(self.related_terms):
            seeds.extend(self.related_terms[term])
        return sorted(set(seeds))


def resolve_model(corpus: Corpus, model: str) -> str:
    """``auto`` picks lsi when a reduction is stored, vsm otherwise."""
    if model == MODEL_AUTO:
        return MODEL_LSI if corpus.reduction is not None else MODEL_VSM
    if model not in (MODEL_VSM, MODEL_LSI):
        raise QueryError(f"unknown retrieval model: {model}")
    return model


def build_query_vector(corpus: Corpus, query: Query) -> np.ndarray:
    """Indicator vector over corpus terms: 1 where a corpus term exactly
    equals a query term, 0 elsewhere. All-zero when no term matches."""
    vec = np.zeros(len(corpus.term_index), dtype=np.float64)
    for term in query.terms:
        idx = corpus.term_index.get(term)
        if idx is not None:
            vec[idx] = 1.0
    return vec


def score_documents(corpus: Corpus, query_vector: np.ndarray, model: str) -> np.ndarray:
    """Per-document similarity in [-1, 1]; zero vectors score 0."""
    if model == MODEL_VSM:
        return _cosine_columns(query_vector, corpus.tdm)
    if model == MODEL_LSI:
        red = corpus.reduction
        if red is None:
            raise QueryError("corpus has no reduction; re-index with --lsi-rank")
        qnorm = np.linalg.norm(query_vector)
        if qnorm == 0:
            return np.zeros(corpus.tdm.shape[1])
        folded = (red.u.T @ query_vector) / red.sigma
        return _cosine_rows(folded, red.v)
    raise QueryError(f"unknown retrieval model: {model}")


def _cosine_columns(vec: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    vnorm = np.linalg.norm(vec)
    scores = np.zeros(matrix.shape[1])
    if vnorm == 0:
        return scores
    col_norms = np.linalg.norm(matrix, axis=0)
    nz = col_norms > 0
    scores[nz] = (vec @ matrix[:, nz]) / (vnorm * col_norms[nz])
    return scores


def _cosine_rows(vec: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    vnorm = np.linalg.norm(vec)
    scores = np.zeros(matrix.shape[0])
    if vnorm == 0:
        return scores
    row_norms = np.linalg.norm(matrix, axis=1)
    nz = row_norms > 0
    scores[nz] = (matrix[nz] @ vec) / (vnorm * row_norms[nz])
    return scores


def slice_corpus(corpus: Corpus, query: Query, model: str = MODEL_AUTO) -> CorpusSlice:
    """Retain documents scoring >= threshold and gather related terms.

    A related term is any corpus term containing some query term as a
    substring (case-insensitive). Its locations are restricted to retained
    documents and to identifier/macro contexts: comment occurrences stay
    searchable through the TDM but cannot anchor statements, so they never
    become seeds.
    """
    model = resolve_model(corpus, model)
    vec = build_query_vector(corpus, query)
    scores = score_documents(corpus, vec, model)
    retained = tuple(
        (doc.id, float(scores[doc.id]))
        for doc in corpus.documents
        if scores[doc.id] >= query.threshold
    )
    diagnostics: list[str] = []
    if not retained:
        diagnostics.append(
            "no documents met the threshold; try a lower -s/--threshold value"
        )
    retained_ids = {d for d, _s in retained}

    by_file: dict[str, list] = {}
    for doc in corpus.documents:
        by_file.setdefault(doc.file, []).append(doc)

    related: dict[str, tuple[Location, ...]] = {}
    for term, entry in corpus.terms.items():
        if not any(q in term for q in query.terms):
            continue
        kept: list[Location] = []
        for loc in entry.locations:
            if loc.context == CTX_COMMENT:
                continue
            doc = _containing_document(corpus, by_file, loc)
            if doc is not None and doc.id in retained_ids:
                kept.append(loc)
        if kept:
            related[term] = tuple(kept)
    return CorpusSlice(query, retained, related, tuple(diagnostics))


def _containing_document(corpus: Corpus, by_file: dict, loc: Location):
    from .corpus import _line_in_document

    for doc in by_file.get(loc.file, ()):
        if _line_in_document(doc, loc.line, corpus.documents):
            return doc
    return None


# --------------------------------------------------------------------------
# Query report: the textual seed format shared with external term sources
# --------------------------------------------------------------------------

REPORT_MAGIC = "FEXQ"
_CTX_TO_LETTER = {"identifier": "i", "comment": "c", "macro": "m"}
_LETTER_TO_CTX = {v: k for k, v in _CTX_TO_LETTER.items()}


def render_query_report(corpus: Corpus, slice_: CorpusSlice, model: str) -> str:
    """Serialize a corpus slice; any text-search tool can produce the same
    shape, which `fex slice --seeds` accepts in place of a query."""
    lines = [f"{REPORT_MAGIC}\t1"]
    lines.append(
        f"query\t{','.join(slice_.query.terms)}\t{slice_.query.threshold:g}\t{model}"
    )
    by_id = {d.id: d for d in corpus.documents}
    for doc_id, score in slice_.retained_documents:
        doc = by_id[doc_id]
        lines.append(f"document\t{doc_id}\t{score:.9g}\t{doc.kind}\t{doc.name}\t{doc.file}")
    for term in sorted(slice_.related_terms):
        locs = slice_.related_terms[term]
        lines.append(f"term\t{term}\t{len(locs)}")
        for loc in locs:
            lines.append(
                f"{loc.file}\t{loc.line}\t{loc.column}\t{_CTX_TO_LETTER[loc.context]}"
            )
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_seed_report(text: str) -> list[Location]:
    """Parse the locations out of a query report (or an externally produced
    file of the same shape)."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(REPORT_MAGIC):
        raise QueryError("not a seed report (bad magic)")
    seeds: list[Location] = []
    i = 1
    while i < len(lines):
        fields = lines[i].split("\t")
        if fields[0] == "term":
            count = int(fields[2])
            for j in range(i + 1, i + 1 + count):
                file, line, col, ctx = lines[j].split("\t")
                seeds.append(Location(file, int(line), int(col), _LETTER_TO_CTX[ctx]))
            i += count + 1
            continue
        i += 1
    return sorted(set(seeds))
