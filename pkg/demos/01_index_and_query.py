"""Index the bundled fixture and explore it with a few queries.

Run from the repository root: python demos/01_index_and_query.py
"""
from pathlib import Path

from fex.corpus import build_corpus
from fex.project import SourceProject
from fex.query import Query, slice_corpus
from fex.store import save_corpus

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "grbl_like"


def main() -> None:
    project = SourceProject.load(FIXTURE)
    corpus = build_corpus(project, reduction_rank="auto")
    print(f"indexed {len(corpus.file_hashes)} file(s): "
          f"{len(corpus.terms)} terms, {len(corpus.documents)} document(s)")

    # the most frequent term of a document weighs exactly 1.0
    weights = sorted(
        ((corpus.tdm[i, 0], t) for t, i in corpus.term_index.items()), reverse=True
    )
    print("\nheaviest terms in parse_command:")
    for w, t in weights[:6]:
        print(f"  {w:.2f}  {t}")

    for terms, threshold in ((("axis",), 0.85), (("move",), 0.5), (("unit",), 0.5)):
        result = slice_corpus(corpus, Query(terms, threshold))
        print(f"\nquery {','.join(terms)} @ {threshold}:")
        for doc_id, score in result.retained_documents:
            doc = corpus.documents[doc_id]
            print(f"  {score:.4f}  {doc.name}")
        print(f"  related terms: {sorted(result.related_terms)}")
        print(f"  seed lines: {sorted({l.line for l in result.seed_locations()})}")

    out = Path("grbl.fexc")
    save_corpus(corpus, out)
    print(f"\ncorpus persisted to {out} (re-runs are byte-identical)")


if __name__ == "__main__":
    main()
