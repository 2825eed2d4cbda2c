"""Corpus persistence: a versioned, self-describing, tab-separated text format.

Layout (all sections mandatory except ``reduction``)::

    FEXC <version>
    weighting <scheme>
    fingerprint <sha256>
    files <n>              then n lines: <path> <content-sha256>
    documents <n>          then n lines: <id> <kind> <name> <file-idx> <start> <end>
    terms <n>              then per term: <term> <df> <nloc>
                           followed by nloc lines: <file-idx> <line> <col> <i|c|m>
    tdm <nnz>              then nnz lines: <term-idx> <doc-idx> <weight>
    reduction <k>          optional; sigma line, then k-column u rows, v rows
    end

TDM weights are printed with 9 significant digits; the in-memory corpus is
quantized to the same precision at build time, so save -> load -> save is
byte-identical. Reduction factors are stored at full precision because the
orthogonality of the factors is checked far below 1e-9.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .corpus import Corpus, Document, Location, Reduction, TermEntry
from .project import SourceProject

MAGIC = "FEXC"
VERSION = 1

_CTX_TO_LETTER = {"identifier": "i", "comment": "c", "macro": "m"}
_LETTER_TO_CTX = {v: k for k, v in _CTX_TO_LETTER.items()}


class CorpusFormatError(Exception):
    pass


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dump_corpus(corpus), encoding="utf-8")


def dump_corpus(corpus: Corpus) -> str:
    lines: list[str] = []
    emit = lines.append
    emit(f"{MAGIC}\t{VERSION}")
    emit(f"weighting\t{corpus.weighting}")
    emit(f"fingerprint\t{corpus.project_fingerprint}")
    emit(f"files\t{len(corpus.file_hashes)}")
    file_index = {}
    for i, (rel, digest) in enumerate(corpus.file_hashes):
        file_index[rel] = i
        emit(f"{rel}\t{digest}")
    emit(f"documents\t{len(corpus.documents)}")
    for doc in corpus.documents:
        emit(
            f"{doc.id}\t{doc.kind}\t{doc.name}\t{file_index[doc.file]}"
            f"\t{doc.span[0]}\t{doc.span[1]}"
        )
    terms = sorted(corpus.term_index, key=corpus.term_index.get)
    emit(f"terms\t{len(terms)}")
    for term in terms:
        entry = corpus.terms[term]
        emit(f"{term}\t{entry.df}\t{len(entry.locations)}")
        for loc in entry.locations:
            emit(
                f"{file_index[loc.file]}\t{loc.line}\t{loc.column}"
                f"\t{_CTX_TO_LETTER[loc.context]}"
            )
    rows, cols = np.nonzero(corpus.tdm)
    emit(f"tdm\t{len(rows)}")
    for r, c in zip(rows.tolist(), cols.tolist()):
        emit(f"{r}\t{c}\t{corpus.tdm[r, c]:.9g}")
    if corpus.reduction is not None:
        red = corpus.reduction
        emit(f"reduction\t{red.rank}")
        emit("sigma\t" + "\t".join(repr(x) for x in red.sigma.tolist()))
        for row in red.u.tolist():
            emit("u\t" + "\t".join(repr(x) for x in row))
        for row in red.v.tolist():
            emit("v\t" + "\t".join(repr(x) for x in row))
    emit("end")
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self) -> list[str]:
        if self.pos >= len(self.lines):
            raise CorpusFormatError("truncated or corrupt corpus file")
        fields = self.lines[self.pos].split("\t")
        self.pos += 1
        return fields

    def expect(self, keyword: str) -> list[str]:
        fields = self.next()
        if fields[0] != keyword:
            raise CorpusFormatError(
                f"corrupt corpus file: expected section '{keyword}', found '{fields[0]}'"
            )
        return fields


def load_corpus(
    path: str | Path,
    project: SourceProject | None = None,
) -> tuple[Corpus, list[str]]:
    """Load a corpus file; returns (corpus, warnings).

    When ``project`` is given its fingerprint is checked against the stored
    one; a mismatch produces a warning but the load still succeeds (callers
    that require matching sources, like slicing, enforce it themselves).
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusFormatError(f"cannot read corpus file: {exc}") from exc
    corpus = parse_corpus(text)
    warnings: list[str] = []
    if project is not None and project.fingerprint() != corpus.project_fingerprint:
        warnings.append(
            "project fingerprint does not match the indexed sources; "
            "the corpus may be stale"
        )
    return corpus, warnings


def parse_corpus(text: str) -> Corpus:
    reader = _Reader(text)
    header = reader.next()
    if header[0] != MAGIC:
        raise CorpusFormatError("not a corpus file (bad magic)")
    version = int(header[1])
    if version != VERSION:
        raise CorpusFormatError(
            f"corpus format version {version} is not supported (expected {VERSION})"
        )
    weighting = reader.expect("weighting")[1]
    fingerprint = reader.expect("fingerprint")[1]

    n_files = int(reader.expect("files")[1])
    file_hashes: list[tuple[str, str]] = []
    for _ in range(n_files):
        rel, digest = reader.next()
        file_hashes.append((rel, digest))
    index_to_file = {i: rel for i, (rel, _d) in enumerate(file_hashes)}

    n_docs = int(reader.expect("documents")[1])
    documents = []
    for _ in range(n_docs):
        doc_id, kind, name, fidx, start, end = reader.next()
        documents.append(
            Document(int(doc_id), kind, name, index_to_file[int(fidx)], (int(start), int(end)))
        )

    n_terms = int(reader.expect("terms")[1])
    terms: dict[str, TermEntry] = {}
    term_index: dict[str, int] = {}
    for i in range(n_terms):
        term, df, nloc = reader.next()
        locations = []
        for _ in range(int(nloc)):
            fidx, line, col, ctx = reader.next()
            locations.append(
                Location(index_to_file[int(fidx)], int(line), int(col), _LETTER_TO_CTX[ctx])
            )
        terms[term] = TermEntry(term, tuple(locations), int(df))
        term_index[term] = i

    nnz = int(reader.expect("tdm")[1])
    tdm = np.zeros((n_terms, n_docs), dtype=np.float64)
    for _ in range(nnz):
        r, c, w = reader.next()
        tdm[int(r), int(c)] = float(w)
    tdm.setflags(write=False)

    reduction = None
    fields = reader.next()
    if fields[0] == "reduction":
        k = int(fields[1])
        sigma = np.array([float(x) for x in reader.expect("sigma")[1:]], dtype=np.float64)
        u = np.zeros((n_terms, k), dtype=np.float64)
        for r in range(n_terms):
            row = reader.expect("u")[1:]
            u[r, :] = [float(x) for x in row]
        v = np.zeros((n_docs, k), dtype=np.float64)
        for r in range(n_docs):
            row = reader.expect("v")[1:]
            v[r, :] = [float(x) for x in row]
        for arr in (sigma, u, v):
            arr.setflags(write=False)
        reduction = Reduction(rank=k, sigma=sigma, u=u, v=v)
        fields = reader.next()
    if fields[0] != "end":
        raise CorpusFormatError("corrupt corpus file: missing end marker")

    return Corpus(
        project_fingerprint=fingerprint,
        file_hashes=tuple(file_hashes),
        documents=tuple(documents),
        terms=terms,
        term_index=term_index,
        tdm=tdm,
        weighting=weighting,
        reduction=reduction,
    )
