"""Extract the axis feature from the fixture and show why each line stayed.

Run from the repository root: python demos/02_slice_feature.py
"""
from pathlib import Path

from fex.corpus import build_corpus
from fex.progmodel import build_program_model
from fex.project import SourceProject
from fex.query import Query, slice_corpus
from fex.slicer import extract_feature

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "grbl_like"


def main() -> None:
    project = SourceProject.load(FIXTURE)
    corpus = build_corpus(project, reduction_rank="auto")
    model = build_program_model(project)

    result = slice_corpus(corpus, Query(("axis",), 0.85))
    feature = extract_feature(model, project, result, ipd_limit=2)

    source = project.file_text("parse_command.c").splitlines()
    origins = feature.origins["parse_command.c"]
    retained = set(feature.lines["parse_command.c"])
    print("line  origin            source")
    for i, text in enumerate(source, start=1):
        mark = origins.get(i, "") if i in retained else "(dropped)"
        print(f"{i:>4}  {mark:<17} {text}")

    print("\nrendered module:\n")
    print(feature.rendered["parse_command.c"])


if __name__ == "__main__":
    main()
