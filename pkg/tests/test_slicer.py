import pytest

from fex import lexer
from fex.corpus import build_corpus
from fex.progmodel import build_program_model
from fex.project import SourceProject
from fex.query import Query, slice_corpus
from fex.slicer import (
    ORIGIN_BLOCK,
    ORIGIN_DATA,
    ORIGIN_JUMP,
    ORIGIN_SEED,
    complete_blocks,
    extract_feature,
    parse_slice_report,
    process_statement,
    render_slice_report,
    run_worklist,
    seed,
)
from conftest import GRBL_SEED_LINES, GRBL_SLICE_LINES


def lines_of(state, model, file):
    out = set()
    for sid in state.relevant:
        stmt = model.statements[sid]
        if stmt.file == file:
            out.update(range(stmt.line_span[0], stmt.line_span[1] + 1))
    return out


@pytest.fixture()
def grbl_slice(grbl_corpus):
    return slice_corpus(grbl_corpus, Query(("axis",), 0.85))


def test_seed_marks_the_expected_lines(grbl_model, grbl_slice):
    state = seed(grbl_model, grbl_slice)
    assert lines_of(state, grbl_model, "parse_command.c") == GRBL_SEED_LINES
    assert all(origin == ORIGIN_SEED for origin in state.relevant.values())
    assert all(state.ip_depth[s] == 0 for s in state.relevant)


def test_seed_empty_slice_is_empty_state(grbl_model, grbl_corpus):
    empty = slice_corpus(grbl_corpus, Query(("nonexistent",), 0.85))
    state = seed(grbl_model, empty)
    assert state.relevant == {}


def test_macro_context_seed_marks_directive_statement(grbl_model, grbl_corpus):
    s = slice_corpus(grbl_corpus, Query(("fail",), 0.0))
    state = seed(grbl_model, s)
    stmt = grbl_model.statement_at("parse_command.c", 13)
    assert state.relevant.get(stmt.id) == ORIGIN_SEED


def test_stray_seed_location_skipped_with_diagnostic(grbl_model):
    from fex.corpus import Location
    from fex.slicer import seed_from_locations

    state = seed_from_locations(
        grbl_model, [Location("parse_command.c", 4, 8, "identifier")]
    )
    # line 4 is a comment line: no statement surrounds it
    assert state.relevant == {}
    assert any("outside every statement" in d for d in state.diagnostics)


def test_process_statement_pulls_data_dependencies(grbl_model, grbl_slice):
    state = seed(grbl_model, grbl_slice)
    stmt9 = grbl_model.statement_at("parse_command.c", 9)
    process_statement(grbl_model, state, stmt9, ipd_limit=2)
    marked = lines_of(state, grbl_model, "parse_command.c")
    assert {2, 6, 7} <= marked
    assert stmt9.id in state.processed


def test_process_statement_without_deps_only_flips_processed(grbl_model):
    from fex.slicer import SliceState

    stmt16 = grbl_model.statement_at("parse_command.c", 16)  # bare brace
    state = SliceState()
    state.mark(stmt16.id, ORIGIN_SEED, 0)
    process_statement(grbl_model, state, stmt16, ipd_limit=2)
    assert set(state.relevant) == {stmt16.id}
    assert stmt16.id in state.processed


def test_ipd_zero_never_marks_callee_bodies(calls_project):
    corpus = build_corpus(calls_project, reduction_rank="auto")
    model = build_program_model(calls_project)
    s = slice_corpus(corpus, Query(("speed",), 0.3))
    feat = extract_feature(model, calls_project, s, ipd_limit=0)
    assert "apply_scale" not in {
        model.statements[sid].enclosing_function for sid in feat.state.relevant
    }


def test_call_flow_marks_callee_header_and_body(calls_project):
    corpus = build_corpus(calls_project, reduction_rank="auto")
    model = build_program_model(calls_project)
    s = slice_corpus(corpus, Query(("speed",), 0.3))
    feat0 = extract_feature(model, calls_project, s, ipd_limit=0)
    feat1 = extract_feature(model, calls_project, s, ipd_limit=1)
    lines0 = set(feat0.lines.get("speed.c", []))
    lines1 = set(feat1.lines.get("speed.c", []))
    assert lines0 < lines1
    assert {3, 4, 5, 6} <= lines1  # apply_scale header + body + close
    assert 1 in lines1  # scale_factor global pulled by the callee body
    # depth accounting: callee statements sit one call edge from the seeds
    depths = {
        model.statements[sid].enclosing_function: depth
        for sid, depth in feat1.state.ip_depth.items()
    }
    assert depths["apply_scale"] == 1
    assert depths["compute_speed"] == 0


def test_return_flow_only_reaches_already_relevant_call_sites(calls_project):
    corpus = build_corpus(calls_project, reduction_rank="auto")
    model = build_program_model(calls_project)
    # `scaled` is local to apply_scale, so all seeds land there; the relevant
    # return statement must not drag in the (irrelevant) caller
    s = slice_corpus(corpus, Query(("scaled",), 0.3))
    assert {loc.line for loc in s.seed_locations()} == {4, 5}
    feat = extract_feature(model, calls_project, s, ipd_limit=2)
    funcs = {model.statements[sid].enclosing_function for sid in feat.state.relevant}
    assert "compute_speed" not in funcs


def test_complete_blocks_reaches_published_line_set(grbl_model, grbl_slice):
    state = seed(grbl_model, grbl_slice)
    run_worklist(grbl_model, state, 2)
    complete_blocks(grbl_model, state)
    assert lines_of(state, grbl_model, "parse_command.c") == set(GRBL_SLICE_LINES)


def test_top_level_statement_completion_adds_header_and_close():
    text = "void solo(void) {\n    int only_line = 1;\n}\n"
    proj = SourceProject.from_mapping({"solo.c": text})
    model = build_program_model(proj)
    from fex.slicer import SliceState

    state = SliceState()
    state.mark(model.statement_at("solo.c", 2).id, ORIGIN_SEED, 0)
    complete_blocks(model, state)
    assert lines_of(state, model, "solo.c") == {1, 2, 3}


def test_three_nested_blocks_all_closed():
    text = (
        "void nested(int a) {\n"
        "    if (a) {\n"
        "        while (a) {\n"
        "            if (a) {\n"
        "                a = 0;\n"
        "            }\n"
        "        }\n"
        "    }\n"
        "}\n"
    )
    proj = SourceProject.from_mapping({"nested.c": text})
    model = build_program_model(proj)
    from fex.slicer import SliceState

    state = SliceState()
    state.mark(model.statement_at("nested.c", 5).id, ORIGIN_SEED, 0)
    complete_blocks(model, state)
    assert lines_of(state, model, "nested.c") == set(range(1, 10))


def test_seed_containment(synthetic_project, synthetic_model, synthetic_corpus):
    # seeds never drop out of the final relevant set, and every seed line is
    # present in the rendered output
    for terms in (("stats", "stat"), ("transport",), ("queue",)):
        s = slice_corpus(synthetic_corpus, Query(terms, 0.1))
        state_before = seed(synthetic_model, s)
        feat = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=2)
        assert set(state_before.relevant) <= set(feat.state.relevant)
        for loc in s.seed_locations():
            assert loc.line in feat.lines.get(loc.file, []), loc


def test_extract_feature_reproduces_published_slice(grbl_project, grbl_model, grbl_slice):
    feat = extract_feature(grbl_model, grbl_project, grbl_slice, ipd_limit=2)
    assert feat.lines == {"parse_command.c": GRBL_SLICE_LINES}
    origins = feat.origins["parse_command.c"]
    assert {ln for ln, o in origins.items() if o == ORIGIN_SEED} == GRBL_SEED_LINES
    assert origins[3] == ORIGIN_JUMP
    assert origins[8] == ORIGIN_BLOCK
    assert origins[1] == ORIGIN_DATA  # param def of `input` pulled by line 6/7


def test_trailing_return_is_not_required(grbl_project, grbl_model, grbl_slice):
    feat = extract_feature(grbl_model, grbl_project, grbl_slice, ipd_limit=2)
    assert 17 not in feat.lines["parse_command.c"]


def test_whole_function_seed_yields_function_verbatim(synthetic_project, synthetic_model):
    # seeds already covering a whole function: closure adds nothing beyond
    # its own dependencies; every function line is retained verbatim
    from fex.corpus import Location

    fn = synthetic_model.functions["transport_drain"]
    seeds = [
        Location("transport.c", synthetic_model.statements[sid].line_span[0], 1, "identifier")
        for sid in (fn.header_stmt, *fn.body_stmts)
    ]
    feat = extract_feature(synthetic_model, synthetic_project, None, ipd_limit=0, seeds=seeds)
    assert set(feat.lines["transport.c"]) >= {11, 12, 13, 14, 15, 16}


def test_empty_seeds_empty_slice_with_diagnostic(grbl_project, grbl_model, grbl_corpus):
    s = slice_corpus(grbl_corpus, Query(("nonexistent",), 0.85))
    feat = extract_feature(grbl_model, grbl_project, s, ipd_limit=2)
    assert feat.lines == {} and feat.rendered == {}
    assert any("empty seeds" in d for d in feat.state.diagnostics)


def test_every_relevant_statement_has_one_origin_and_depth(synthetic_project, synthetic_model, synthetic_corpus):
    s = slice_corpus(synthetic_corpus, Query(("stats", "stat"), 0.1))
    feat = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=2)
    for sid in feat.state.relevant:
        assert feat.state.relevant[sid] in {
            "seed", "data-dep", "call-def", "return-flow",
            "block-completion", "jump-completion", "declaration-pull",
        }
        assert feat.state.ip_depth[sid] >= 0
    # seeds are all at depth zero
    for sid, origin in feat.state.relevant.items():
        if origin == ORIGIN_SEED:
            assert feat.state.ip_depth[sid] == 0


def test_declaration_pull_includes_and_prototypes(synthetic_project, synthetic_model):
    # seed one statement inside transport_send; block completion retains the
    # definition, and declaration-pull then fetches its prototype from the
    # other file plus the #include lines of contributing files
    from fex.corpus import Location

    seeds = [Location("transport.c", 7, 5, "identifier")]
    feat = extract_feature(synthetic_model, synthetic_project, None, ipd_limit=0, seeds=seeds)
    assert 1 in feat.lines["transport.c"]  # the #include line
    pulled = {
        (synthetic_model.statements[sid].file, synthetic_model.statements[sid].line_span[0])
        for sid, origin in feat.state.relevant.items()
        if origin == "declaration-pull" and synthetic_model.statements[sid].is_prototype
    }
    assert ("dispatch.c", 4) in pulled


def test_define_directive_not_pulled_unseeded(grbl_project, grbl_model, grbl_slice):
    feat = extract_feature(grbl_model, grbl_project, grbl_slice, ipd_limit=2)
    assert 13 not in feat.lines["parse_command.c"]


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def brace_balanced(text: str) -> bool:
    scan = lexer.tokenize(text)
    depth = 0
    for t in scan.tokens:
        if t.kind == lexer.PUNCT and t.context == lexer.CTX_IDENTIFIER:
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth < 0:
                    return False
    return depth == 0


def test_rendered_fixture_is_brace_balanced(grbl_project, grbl_model, grbl_slice):
    feat = extract_feature(grbl_model, grbl_project, grbl_slice, ipd_limit=2)
    text = feat.rendered["parse_command.c"]
    assert brace_balanced(text)
    # retained lines appear verbatim, in original order
    original = grbl_project.file_text("parse_command.c").splitlines()
    body = [l for l in text.splitlines() if not l.startswith("/* extracted")]
    assert body == [original[i - 1] for i in GRBL_SLICE_LINES]


def test_rendered_output_reparses_under_subset_grammar(grbl_project, grbl_model, grbl_slice):
    feat = extract_feature(grbl_model, grbl_project, grbl_slice, ipd_limit=2)
    reparsed = build_program_model(
        SourceProject.from_mapping({"slice.c": feat.rendered["parse_command.c"]})
    )
    assert not any("unbalanced" in d or "stray" in d for d in reparsed.diagnostics)


def test_two_file_slice_renders_two_modules(synthetic_project, synthetic_model, synthetic_corpus):
    s = slice_corpus(synthetic_corpus, Query(("stats", "stat"), 0.1))
    feat = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=0)
    assert {"counters.c", "transport.c", "dispatch.c"} >= set(feat.rendered)
    assert len(feat.rendered) >= 2
    for text in feat.rendered.values():
        assert brace_balanced(text)


def test_provenance_header_lists_query(grbl_project, grbl_model, grbl_slice):
    feat = extract_feature(
        grbl_model, grbl_project, grbl_slice, ipd_limit=2,
        provenance="extracted by fex: terms=axis threshold=0.85 ipd_limit=2 model=lsi",
    )
    head = feat.rendered["parse_command.c"].splitlines()[0]
    assert "terms=axis" in head and "threshold=0.85" in head and "ipd_limit=2" in head


def test_slice_determinism(synthetic_project, synthetic_model, synthetic_corpus):
    s = slice_corpus(synthetic_corpus, Query(("stats", "stat"), 0.1))
    a = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=2)
    b = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=2)
    assert a.lines == b.lines and a.rendered == b.rendered


def test_ipd_monotonicity(synthetic_project, synthetic_model, synthetic_corpus):
    s = slice_corpus(synthetic_corpus, Query(("stats",), 0.1))
    prev: set = set()
    for ipd in (0, 1, 2):
        feat = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=ipd)
        lines = {(f, ln) for f, ls in feat.lines.items() for ln in ls}
        assert prev <= lines
        prev = lines


def test_threshold_monotonicity_of_slices(synthetic_project, synthetic_model, synthetic_corpus):
    prev: set | None = None
    for threshold in (0.9, 0.5, 0.1):
        s = slice_corpus(synthetic_corpus, Query(("stats", "stat"), threshold))
        feat = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=2)
        lines = {(f, ln) for f, ls in feat.lines.items() for ln in ls}
        if prev is not None:
            assert prev <= lines
        prev = lines


def test_closure_soundness(synthetic_project, synthetic_model, synthetic_corpus):
    from fex.progmodel import HEADER_KINDS, K_CLOSE, K_FUNCTION, K_OPEN, resolve_definitions

    s = slice_corpus(synthetic_corpus, Query(("stats", "stat"), 0.1))
    ipd = 2
    feat = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=ipd)
    for sid in feat.state.relevant:
        stmt = synthetic_model.statements[sid]
        if stmt.kind in HEADER_KINDS | {K_FUNCTION, K_OPEN, K_CLOSE}:
            continue
        for var in stmt.var_uses:
            defs = resolve_definitions(synthetic_model, stmt, var)
            if not defs:
                assert var in synthetic_model.external_symbols
                continue
            assert any(d in feat.state.relevant for d in defs), (stmt.line_span, var)


def test_slice_report_round_trip(synthetic_project, synthetic_model, synthetic_corpus):
    s = slice_corpus(synthetic_corpus, Query(("transport",), 0.1))
    feat = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=2)
    text = render_slice_report(feat, provenance="terms=transport")
    lines, origins = parse_slice_report(text)
    assert lines == feat.lines
    for f, per_line in origins.items():
        for ln, origin in per_line.items():
            assert feat.origins[f][ln] == origin


def test_case_labels_pulled_for_marked_switch_bodies(synthetic_project, synthetic_model, synthetic_corpus):
    s = slice_corpus(synthetic_corpus, Query(("transport",), 0.1))
    feat = extract_feature(synthetic_model, synthetic_project, s, ipd_limit=2)
    dispatch = set(feat.lines.get("dispatch.c", []))
    if 19 in dispatch:  # transport_send call site
        assert 18 in dispatch  # its case label rides along
