"""Command-line front end: index, query, slice, eval, grep-baseline, serve.

The workflow is two-phase: ``index`` builds and persists the corpus once;
``query``/``slice`` reuse it for as many searches as needed. Exit codes:
0 success, 1 usage error, 2 data error (corrupt corpus, fingerprint or
manifest mismatch, empty result where the command requires one).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from . import corpus as corpus_mod
from . import evalharness, query as query_mod, slicer, store
from .progmodel import build_program_model
from .project import ProjectError, SourceProject

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

log = logging.getLogger("fex")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build and persist a corpus for a project")
    p_index.add_argument("project", help="project root directory")
    p_index.add_argument("-o", "--out", required=True, help="corpus output file")
    p_index.add_argument("--weighting", choices=list(corpus_mod.WEIGHTINGS),
                         default=corpus_mod.WEIGHTING_LOGNORM)
    p_index.add_argument("--lsi-rank", nargs="?", const="auto", default=None,
                         help="attach a rank-k reduction (default k when bare: min(300, matrix limit))")
    p_index.add_argument("--no-headers", action="store_true",
                         help="exclude .h files from indexing")
    p_index.add_argument("--no-keyword-filter", action="store_true")

    p_query = sub.add_parser("query", help="score documents and list related terms")
    p_query.add_argument("corpus", help="corpus file from `fex index`")
    p_query.add_argument("-t", "--terms", required=True, help="comma-separated terms")
    p_query.add_argument("-s", "--threshold", type=float, default=0.85)
    p_query.add_argument("--model", choices=["auto", "vsm", "lsi"], default="auto")
    p_query.add_argument("-o", "--out", help="write the seed report here")

    p_slice = sub.add_parser("slice", help="extract the feature module for a query")
    p_slice.add_argument("corpus", help="corpus file from `fex index`")
    p_slice.add_argument("-t", "--terms", help="comma-separated terms")
    p_slice.add_argument("-s", "--threshold", type=float, default=0.85)
    p_slice.add_argument("--ipd", type=int, default=slicer.DEFAULT_IPD_LIMIT,
                         help="inter-procedural distance limit (0 disables)")
    p_slice.add_argument("--model", choices=["auto", "vsm", "lsi"], default="auto")
    p_slice.add_argument("--project", default=".", help="project root (for source text)")
    p_slice.add_argument("-o", "--out", default="fex-slice",
                         help="output directory for the module")
    p_slice.add_argument("--seeds", help="seed report file (overrides -t)")
    p_slice.add_argument("--no-headers", action="store_true")
    p_slice.add_argument("--dump-model", action="store_true",
                         help="print the program model instead of slicing")

    p_eval = sub.add_parser("eval", help="compare a slice against a ground-truth manifest")
    p_eval.add_argument("slice_dir", help="directory produced by `fex slice`")
    p_eval.add_argument("--truth", required=True, help="ground-truth manifest file")
    p_eval.add_argument("--project", default=".")
    p_eval.add_argument("--module", help="manifest module name (default: first)")
    p_eval.add_argument("--classify", action="store_true",
                        help="also tag missing/additional lines by root cause")
    p_eval.add_argument("--scatter", help="write (precision, recall, label) rows here")
    p_eval.add_argument("--no-headers", action="store_true")

    p_grep = sub.add_parser("grep-baseline", help="substring-match baseline extraction")
    p_grep.add_argument("project", help="project root directory")
    p_grep.add_argument("-t", "--terms", required=True)
    p_grep.add_argument("--truth", help="manifest to score the baseline against")
    p_grep.add_argument("--module", help="manifest module name (default: first)")
    p_grep.add_argument("--emit-seeds", help="write the matches as a seed report here")
    p_grep.add_argument("--no-headers", action="store_true")

    p_serve = sub.add_parser("serve", help="HTTP service over a corpus and its project")
    p_serve.add_argument("corpus")
    p_serve.add_argument("--project", default=".")
    p_serve.add_argument("--port", type=int, default=8190)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--assets", help="directory of built UI assets to serve at /")
    p_serve.add_argument("--no-headers", action="store_true")

    return parser


def _load_corpus(path: str, project: SourceProject | None = None):
    try:
        corpus, warnings = store.load_corpus(path, project)
    except store.CorpusFormatError as exc:
        raise DataError(str(exc)) from exc
    for w in warnings:
        log.warning(w)
    return corpus


def _load_project(path: str, include_headers: bool) -> SourceProject:
    try:
        return SourceProject.load(path, include_headers=include_headers)
    except ProjectError as exc:
        raise DataError(str(exc)) from exc


def _parse_query(terms: str | None, threshold: float) -> query_mod.Query:
    if not terms:
        raise UsageError("missing -t/--terms")
    try:
        return query_mod.Query.parse(terms, threshold)
    except query_mod.QueryError as exc:
        raise UsageError(str(exc)) from exc


def cmd_index(args) -> int:
    started = time.perf_counter()
    rank = args.lsi_rank
    if rank is not None and rank != "auto":
        try:
            rank = int(rank)
        except ValueError:
            raise UsageError(f"--lsi-rank takes an integer, got {rank!r}")
        if rank <= 0:
            raise UsageError(f"--lsi-rank must be positive, got {rank}")
    project = _load_project(args.project, not args.no_headers)
    try:
        corpus = corpus_mod.build_corpus(
            project,
            weighting=args.weighting,
            keyword_filter=not args.no_keyword_filter,
            reduction_rank=rank,
        )
    except corpus_mod.CorpusError as exc:
        raise DataError(str(exc)) from exc
    store.save_corpus(corpus, args.out)
    for diag in corpus.diagnostics:
        log.warning(diag)
    elapsed = time.perf_counter() - started
    print(
        f"indexed {len(corpus.file_hashes)} files: {len(corpus.terms)} terms, "
        f"{len(corpus.documents)} documents in {elapsed * 1000:.0f} ms -> {args.out}"
    )
    return EXIT_OK


def cmd_query(args) -> int:
    q = _parse_query(args.terms, args.threshold)
    corpus = _load_corpus(args.corpus)
    try:
        model = query_mod.resolve_model(corpus, args.model)
        result = query_mod.slice_corpus(corpus, q, model)
    except query_mod.QueryError as exc:
        raise DataError(str(exc)) from exc
    by_id = {d.id: d for d in corpus.documents}
    for doc_id, score in sorted(result.retained_documents, key=lambda p: -p[1]):
        doc = by_id[doc_id]
        print(f"{score:8.4f}  {doc.kind:<17s} {doc.name} ({doc.file})")
    for term in sorted(result.related_terms):
        locs = result.related_terms[term]
        place = ", ".join(f"{l.file}:{l.line}:{l.column}" for l in locs[:6])
        more = "" if len(locs) <= 6 else f" (+{len(locs) - 6} more)"
        print(f"related {term}: {place}{more}")
    for diag in result.diagnostics:
        print(f"note: {diag}", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(
            query_mod.render_query_report(corpus, result, model), encoding="utf-8"
        )
    return EXIT_OK


def cmd_slice(args) -> int:
    started = time.perf_counter()
    project = _load_project(args.project, not args.no_headers)
    corpus = _load_corpus(args.corpus, project)
    if corpus.project_fingerprint != project.fingerprint():
        raise DataError(
            "corpus fingerprint does not match the project; re-run `fex index`"
        )
    model = build_program_model(project)
    if args.dump_model:
        from .progmodel import dump_model

        print(dump_model(model), end="")
        return EXIT_OK

    seeds = None
    corpus_slice = None
    if args.seeds:
        try:
            seeds = query_mod.parse_seed_report(Path(args.seeds).read_text(encoding="utf-8"))
        except (OSError, query_mod.QueryError) as exc:
            raise DataError(f"cannot read seed report: {exc}") from exc
        provenance = f"extracted from seeds file {args.seeds}, ipd_limit={args.ipd}"
    else:
        q = _parse_query(args.terms, args.threshold)
        retrieval = query_mod.resolve_model(corpus, args.model)
        try:
            corpus_slice = query_mod.slice_corpus(corpus, q, retrieval)
        except query_mod.QueryError as exc:
            raise DataError(str(exc)) from exc
        provenance = (
            f"extracted by fex: terms={','.join(q.terms)} threshold={q.threshold:g} "
            f"ipd_limit={args.ipd} model={retrieval}"
        )

    feature = slicer.extract_feature(
        model, project, corpus_slice, ipd_limit=args.ipd, seeds=seeds,
        provenance=provenance,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / slicer.REPORT_NAME).write_text(
        slicer.render_slice_report(feature, provenance), encoding="utf-8"
    )
    for rel, text in feature.rendered.items():
        target = out / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    elapsed = time.perf_counter() - started
    for diag in feature.state.diagnostics:
        print(f"note: {diag}", file=sys.stderr)
    for rel in sorted(feature.lines):
        print(f"{rel}: {len(feature.lines[rel])} lines retained")
    print(f"slice written to {out} in {elapsed * 1000:.0f} ms")
    if not feature.lines:
        raise DataError("empty seeds: no statements matched the query")
    return EXIT_OK


def _truth_for(args, project: SourceProject):
    try:
        manifest = evalharness.load_manifest(args.truth)
    except (OSError, evalharness.EvalError) as exc:
        raise DataError(str(exc)) from exc
    name = args.module or manifest.modules[0].name
    try:
        module = manifest.module(name)
    except evalharness.EvalError as exc:
        raise DataError(str(exc)) from exc
    return manifest, module


def cmd_eval(args) -> int:
    project = _load_project(args.project, not args.no_headers)
    manifest, module = _truth_for(args, project)
    report_path = Path(args.slice_dir) / slicer.REPORT_NAME
    try:
        lines_map, origins = slicer.parse_slice_report(
            report_path.read_text(encoding="utf-8")
        )
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read slice report: {exc}") from exc
    slice_lines = {(f, ln) for f, lines in lines_map.items() for ln in lines}
    try:
        report = evalharness.evaluate(
            slice_lines, module, project, manifest.fingerprint, tool=evalharness.TOOL_FEX
        )
    except evalharness.EvalError as exc:
        raise DataError(str(exc)) from exc
    print(evalharness.render_report_table([report]), end="")
    print(evalharness.render_report_machine([report]), end="")
    if args.classify:
        model = build_program_model(project)
        missing_tags, additional_tags = evalharness.classify_diff(report, origins, model)
        for (f, ln), tag in missing_tags.items():
            print(f"missing\t{f}:{ln}\t{tag}")
        for (f, ln), tag in additional_tags.items():
            print(f"additional\t{f}:{ln}\t{tag}")
    if args.scatter:
        Path(args.scatter).write_text(
            evalharness.render_scatter([report]), encoding="utf-8"
        )
    return EXIT_OK


def cmd_grep(args) -> int:
    project = _load_project(args.project, not args.no_headers)
    terms = [t.strip().lower() for t in args.terms.split(",") if t.strip()]
    if not terms:
        raise UsageError("missing -t/--terms")
    lines = evalharness.grep_baseline(project, terms)
    if args.emit_seeds:
        _write_grep_seeds(args.emit_seeds, project, terms, lines)
    if args.truth:
        manifest, module = _truth_for(args, project)
        report = evalharness.evaluate(
            lines, module, project, manifest.fingerprint, tool=evalharness.TOOL_GREP
        )
        print(evalharness.render_report_table([report]), end="")
        print(evalharness.render_report_machine([report]), end="")
    else:
        for f, ln in sorted(lines):
            print(f"{f}:{ln}")
    return EXIT_OK


def _write_grep_seeds(path: str, project: SourceProject, terms, lines) -> None:
    """Emit grep matches in the seed-report shape `fex slice --seeds` takes."""
    rows = [f"{query_mod.REPORT_MAGIC}\t1", f"query\t{','.join(terms)}\t0\tgrep"]
    by_term: dict[str, list[tuple[str, int, int]]] = {t: [] for t in terms}
    texts = dict(project.files)
    for f, ln in sorted(lines):
        low = texts[f].splitlines()[ln - 1].lower()
        for t in terms:
            col = low.find(t)
            if col >= 0:
                by_term[t].append((f, ln, col + 1))
    for t in terms:
        rows.append(f"term\t{t}\t{len(by_term[t])}")
        for f, ln, col in by_term[t]:
            rows.append(f"{f}\t{ln}\t{col}\ti")
    rows.append("end")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def cmd_serve(args) -> int:
    from .service import run_server

    project = _load_project(args.project, not args.no_headers)
    corpus = _load_corpus(args.corpus, project)
    run_server(corpus, project, host=args.host, port=args.port, assets=args.assets)
    return EXIT_OK


_COMMANDS = {
    "index": cmd_index,
    "query": cmd_query,
    "slice": cmd_slice,
    "eval": cmd_eval,
    "grep-baseline": cmd_grep,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("FEX_LOG", "WARNING").upper(),
        format="fex: %(levelname)s: %(message)s",
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fex: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"fex: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
