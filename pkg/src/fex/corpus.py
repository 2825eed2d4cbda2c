"""Building the retrieval corpus: terms, documents, and the weighted TDM.

A corpus maps every normalized term to its source locations and program
contexts, and holds a term-document matrix whose columns are documents
(functions, or a file's top-level declarations) and whose entries are
weights under one of three schemes:

* ``raw``      - occurrence counts
* ``tfidf``    - tf * ln(N / df)
* ``lognorm``  - log10(1 + tf) / log10(1 + max_tf(doc)), the default; the
                 most frequent term of each document weighs exactly 1.0

An optional rank-k SVD factorization can be attached for reduced-space
(latent) scoring. A built corpus is immutable; per-file scanning could run
in parallel, the merge into documents and matrix is a deterministic
sequential fold over the sorted file list.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import lexer
from .project import SourceProject

WEIGHTING_RAW = "raw"
WEIGHTING_TFIDF = "tfidf"
WEIGHTING_LOGNORM = "lognorm"
WEIGHTINGS = (WEIGHTING_RAW, WEIGHTING_TFIDF, WEIGHTING_LOGNORM)

DOC_FUNCTION = "function"
DOC_FILE_DECLS = "file-declarations"

# The 32 C89 keywords plus the five C99 additions we filter as well.
C_KEYWORDS = frozenset(
    """auto break case char const continue default do double else enum extern
    float for goto if int long register return short signed sizeof static
    struct switch typedef union unsigned void volatile while
    inline restrict _Bool _Complex _Imaginary""".split()
)

DEFAULT_LSI_RANK = 300


class CorpusError(Exception):
    pass


@dataclass(frozen=True, order=True)
class Location:
    file: str
    line: int
    column: int
    context: str  # identifier | comment | macro


@dataclass(frozen=True)
class Document:
    id: int
    kind: str  # function | file-declarations
    name: str
    file: str
    span: tuple[int, int]


@dataclass(frozen=True)
class TermEntry:
    term: str
    locations: tuple[Location, ...]
    df: int


@dataclass(frozen=True)
class Reduction:
    rank: int
    sigma: np.ndarray  # (k,) strictly positive, non-increasing
    u: np.ndarray      # (terms, k)
    v: np.ndarray      # (docs, k); row d holds document d's coordinates


@dataclass(frozen=True)
class Corpus:
    project_fingerprint: str
    file_hashes: tuple[tuple[str, str], ...]
    documents: tuple[Document, ...]
    terms: dict[str, TermEntry]
    term_index: dict[str, int]
    tdm: np.ndarray  # (terms, docs)
    weighting: str
    reduction: Reduction | None = None
    diagnostics: tuple[str, ...] = ()

    @property
    def term_list(self) -> list[str]:
        return sorted(self.term_index, key=self.term_index.get)

    def document_of_location(self, loc: Location) -> Document | None:
        for doc in self.documents:
            if doc.file != loc.file:
                continue
            if _line_in_document(doc, loc.line, self.documents):
                return doc
        return None


_CAMEL_RE = re.compile(
    r"[0-9]+|[A-Z]+(?![a-z])|[A-Z][a-z0-9]*|[a-z][a-z0-9]*"
)


def _camel_humps(segment: str) -> list[str]:
    """Split one underscore-free segment on case boundaries.

    ALL-CAPS runs stay one hump ("UNSUPPORTED" -> unsupported); a trailing
    capitalized word is split off an acronym run ("HTTPServer" -> http,
    server). Digit runs stay attached to nothing, forming their own hump.
    """
    return _CAMEL_RE.findall(segment)


def normalize(token_text: str) -> set[str]:
    """Normalize a word token into its set of lowercase terms.

    The result is the full token, each underscore-separated segment, and
    each camel-case hump of every segment, all lowercased and de-duplicated:
    ``parse_axisCommand`` -> {parse, axiscommand, axis, command,
    parse_axiscommand}. Every output term maps back to the originating
    token's location.
    """
    terms = {token_text.lower()}
    segments = [s for s in token_text.split("_") if s]
    for seg in segments:
        terms.add(seg.lower())
        for hump in _camel_humps(seg):
            terms.add(hump.lower())
    terms.discard("")
    return terms


# --------------------------------------------------------------------------
# Function detection and document segmentation
# --------------------------------------------------------------------------

@dataclass
class FunctionSpan:
    name: str
    start_line: int
    end_line: int


def scan_function_spans(tokens: list[lexer.Token]) -> tuple[list[FunctionSpan], bool]:
    """Find top-level function definitions by brace-balanced bodies.

    A definition is a top-level ``name(params) {`` with no ``=`` between
    statement start and the parameter list. Returns (spans, balanced);
    ``balanced`` is False when brace tracking failed for the file.
    """
    code = [
        t for t in tokens
        if t.context == lexer.CTX_IDENTIFIER and t.kind in (lexer.WORD, lexer.PUNCT)
    ]
    spans: list[FunctionSpan] = []
    depth = 0
    stmt_start_idx = 0
    eq_seen = False
    i = 0
    n = len(code)
    while i < n:
        t = code[i]
        if t.kind == lexer.PUNCT:
            if t.text == "{":
                if depth == 0 and not eq_seen:
                    name_tok, open_ok = _signature_name(code, stmt_start_idx, i)
                    if name_tok is not None and open_ok:
                        start_line = code[stmt_start_idx].line
                        close_line, j = _match_brace(code, i)
                        if close_line is None:
                            return spans, False
                        spans.append(FunctionSpan(name_tok.text, start_line, close_line))
                        i = j
                        stmt_start_idx = i + 1
                        eq_seen = False
                        i += 1
                        continue
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth < 0:
                    return spans, False
                if depth == 0:
                    stmt_start_idx = i + 1
                    eq_seen = False
            elif t.text == ";" and depth == 0:
                stmt_start_idx = i + 1
                eq_seen = False
            elif t.text == "=" and depth == 0:
                eq_seen = True
        i += 1
    return spans, depth == 0


def _signature_name(code, start, brace_idx):
    """The word right before a balanced parameter list ending at brace_idx."""
    depth = 0
    open_idx = None
    for j in range(brace_idx - 1, start - 1, -1):
        t = code[j]
        if t.kind != lexer.PUNCT:
            continue
        if t.text == ")":
            depth += 1
        elif t.text == "(":
            depth -= 1
            if depth == 0:
                open_idx = j
                break
    if open_idx is None or open_idx == start:
        return None, False
    name = code[open_idx - 1]
    if name.kind != lexer.WORD or name.text in C_KEYWORDS:
        return None, False
    return name, True


def _match_brace(code, open_idx):
    depth = 0
    for j in range(open_idx, len(code)):
        if code[j].kind != lexer.PUNCT:
            continue
        if code[j].text == "{":
            depth += 1
        elif code[j].text == "}":
            depth -= 1
            if depth == 0:
                return code[j].line, j
    return None, None


def segment_documents(
    project: SourceProject,
    lexed: dict[str, tuple[list[lexer.Token], lexer.ScanResult]],
) -> tuple[list[Document], list[str]]:
    """Split files into documents: one per function, one per file's
    top-level declarations. Files with unbalanced braces fall back to a
    single file-declarations document."""
    documents: list[Document] = []
    diagnostics: list[str] = []
    next_id = 0
    for rel, _text in project.files:
        tokens, scan = lexed[rel]
        word_lines = {t.line for t in tokens if t.kind == lexer.WORD}
        spans, balanced = scan_function_spans(tokens)
        if not balanced:
            diagnostics.append(
                f"{rel}: unbalanced braces; treating whole file as declarations"
            )
            spans = []
        covered: set[int] = set()
        for s in spans:
            covered.update(range(s.start_line, s.end_line + 1))
        decl_lines = sorted(word_lines - covered)
        entries: list[tuple[int, str, str, tuple[int, int]]] = []
        for s in spans:
            entries.append((s.start_line, DOC_FUNCTION, s.name, (s.start_line, s.end_line)))
        if decl_lines:
            entries.append((decl_lines[0], DOC_FILE_DECLS, rel, (decl_lines[0], decl_lines[-1])))
        for start, kind, name, span in sorted(entries):
            documents.append(Document(next_id, kind, name, rel, span))
            next_id += 1
    return documents, diagnostics


def _line_in_document(doc: Document, line: int, all_docs: tuple[Document, ...]) -> bool:
    if doc.kind == DOC_FUNCTION:
        return doc.span[0] <= line <= doc.span[1]
    # File-declarations own every line of the file not claimed by a function.
    if not (doc.span[0] <= line <= doc.span[1]):
        return False
    for other in all_docs:
        if other.kind == DOC_FUNCTION and other.file == doc.file:
            if other.span[0] <= line <= other.span[1]:
                return False
    return True


# --------------------------------------------------------------------------
# Corpus construction
# --------------------------------------------------------------------------

def _quantize(value: float) -> float:
    """Clamp a weight to the 9 significant digits the corpus file carries,
    so that save -> load -> save is byte-identical by construction."""
    return float(f"{value:.9g}")


def build_corpus(
    project: SourceProject,
    weighting: str = WEIGHTING_LOGNORM,
    keyword_filter: bool = True,
    reduction_rank: int | None = None,
) -> Corpus:
    """Index a project into an immutable retrieval corpus."""
    if weighting not in WEIGHTINGS:
        raise CorpusError(f"unknown weighting scheme: {weighting}")
    diagnostics: list[str] = []
    lexed: dict[str, tuple[list[lexer.Token], lexer.ScanResult]] = {}
    for rel, text in project.files:
        tokens, scan = lexer.lex(text, rel)
        lexed[rel] = (tokens, scan)
        diagnostics.extend(scan.diagnostics)

    documents, seg_diags = segment_documents(project, lexed)
    diagnostics.extend(seg_diags)

    occurrences: dict[str, list[Location]] = {}
    for rel, _text in project.files:
        tokens, _scan = lexed[rel]
        for tok in tokens:
            if tok.kind != lexer.WORD or tok.directive_keyword:
                continue
            loc = Location(rel, tok.line, tok.col, tok.context)
            for term in normalize(tok.text):
                if keyword_filter and term in C_KEYWORDS:
                    continue
                occurrences.setdefault(term, []).append(loc)

    if not occurrences:
        raise CorpusError("empty corpus: project contains no word tokens")

    term_list = sorted(occurrences)
    term_index = {t: i for i, t in enumerate(term_list)}

    # Assign every location to its document by line membership.
    doc_lookup: dict[str, list[Document]] = {}
    for doc in documents:
        doc_lookup.setdefault(doc.file, []).append(doc)

    docs_tuple = tuple(documents)
    counts = np.zeros((len(term_list), len(documents)), dtype=np.float64)
    term_entries: dict[str, TermEntry] = {}
    for term, locs in occurrences.items():
        locs_sorted = tuple(sorted(locs))
        doc_ids: set[int] = set()
        for loc in locs_sorted:
            for doc in doc_lookup.get(loc.file, ()):
                if _line_in_document(doc, loc.line, docs_tuple):
                    counts[term_index[term], doc.id] += 1.0
                    doc_ids.add(doc.id)
                    break
        term_entries[term] = TermEntry(term, locs_sorted, max(len(doc_ids), 1))

    tdm = _weight_matrix(counts, weighting)
    tdm = np.vectorize(_quantize, otypes=[np.float64])(tdm)
    tdm.setflags(write=False)

    corpus = Corpus(
        project_fingerprint=project.fingerprint(),
        file_hashes=tuple(project.file_hashes()),
        documents=docs_tuple,
        terms=term_entries,
        term_index=term_index,
        tdm=tdm,
        weighting=weighting,
        diagnostics=tuple(diagnostics),
    )
    if reduction_rank is not None:
        corpus = reduce_lsi(corpus, reduction_rank)
    return corpus


def _weight_matrix(counts: np.ndarray, weighting: str) -> np.ndarray:
    if weighting == WEIGHTING_RAW:
        return counts.copy()
    if weighting == WEIGHTING_TFIDF:
        n_docs = counts.shape[1]
        df = (counts > 0).sum(axis=1)
        idf = np.where(df > 0, np.log(n_docs / np.maximum(df, 1)), 0.0)
        return counts * idf[:, None]
    # lognorm
    out = np.zeros_like(counts)
    max_tf = counts.max(axis=0)
    for d in range(counts.shape[1]):
        if max_tf[d] <= 0:
            continue
        denom = math.log10(1.0 + max_tf[d])
        col = counts[:, d]
        nz = col > 0
        out[nz, d] = np.log10(1.0 + col[nz]) / denom
    return out


def reduce_lsi(corpus: Corpus, rank: int | str | None) -> Corpus:
    """Attach the top-k singular triplets of the TDM to the corpus.

    ``rank`` may be the string "auto" for min(300, min(#terms, #docs)).
    Ranks beyond what the matrix supports are clamped with a diagnostic.
    """
    diagnostics = list(corpus.diagnostics)
    limit = min(corpus.tdm.shape)
    if rank == "auto" or rank is None:
        k = min(DEFAULT_LSI_RANK, limit)
    else:
        k = int(rank)
        if k <= 0:
            raise CorpusError(f"reduction rank must be positive, got {k}")
        if k > limit:
            diagnostics.append(
                f"reduction rank {k} clamped to {limit} (matrix is {corpus.tdm.shape[0]}x{corpus.tdm.shape[1]})"
            )
            k = limit

    u, s, vt = np.linalg.svd(corpus.tdm, full_matrices=False)
    positive = int((s > s[0] * 1e-12).sum()) if s.size and s[0] > 0 else 0
    if positive == 0:
        raise CorpusError("matrix has no positive singular values; cannot reduce")
    if k > positive:
        diagnostics.append(f"reduction rank {k} clamped to numerical rank {positive}")
        k = positive

    u, s, vt = u[:, :k].copy(), s[:k].copy(), vt[:k].copy()
    # Deterministic sign convention: largest-magnitude entry of each left
    # singular vector is positive.
    for j in range(k):
        pivot = np.argmax(np.abs(u[:, j]))
        if u[pivot, j] < 0:
            u[:, j] *= -1
            vt[j, :] *= -1
    v = vt.T.copy()
    for arr in (u, s, v):
        arr.setflags(write=False)

    return Corpus(
        project_fingerprint=corpus.project_fingerprint,
        file_hashes=corpus.file_hashes,
        documents=corpus.documents,
        terms=corpus.terms,
        term_index=corpus.term_index,
        tdm=corpus.tdm,
        weighting=corpus.weighting,
        reduction=Reduction(rank=k, sigma=s, u=u, v=v),
        diagnostics=tuple(diagnostics),
    )
