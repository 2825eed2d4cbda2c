"""Score extractions against the bundled ground truth, next to grep.

Run from the repository root: python demos/03_evaluate_extraction.py
"""
from pathlib import Path

from fex.corpus import build_corpus
from fex.evalharness import (
    TOOL_GREP,
    evaluate,
    grep_baseline,
    load_manifest,
    render_report_table,
    render_scatter,
)
from fex.progmodel import build_program_model
from fex.project import SourceProject
from fex.query import Query, slice_corpus
from fex.slicer import extract_feature

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "synthetic"


def main() -> None:
    project = SourceProject.load(FIXTURE)
    corpus = build_corpus(project, reduction_rank="auto")
    model = build_program_model(project)
    manifest = load_manifest(FIXTURE / "truth.manifest")

    reports = []
    for module in manifest.modules:
        result = slice_corpus(corpus, Query(module.search_terms, 0.1))
        feature = extract_feature(model, project, result, ipd_limit=2)
        lines = {(f, ln) for f, ls in feature.lines.items() for ln in ls}
        reports.append(evaluate(lines, module, project, manifest.fingerprint))
        baseline = grep_baseline(project, list(module.search_terms))
        reports.append(
            evaluate(baseline, module, project, manifest.fingerprint, tool=TOOL_GREP)
        )

    print(render_report_table(reports))
    print("scatter data (precision, recall, label):")
    print(render_scatter(reports))


if __name__ == "__main__":
    main()
