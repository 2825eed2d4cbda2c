"""Dependency-closure slicing from retrieval seeds to a rendered module.

Starting from the statements containing seed locations, a worklist closes
over four flow rules:

1. intra-procedural data flow: every use pulls in its resolving definitions;
2. call flow: a call to a known function pulls in its definition (header and
   body) one inter-procedural step deeper, bounded by the distance limit;
3. return flow: a relevant return marks the statements consuming its value
   at call sites that are already relevant;
4. facts flowing around a call stay relevant (marking is monotone; nothing
   is ever unmarked).

Block completion then makes the result syntactically whole: enclosing block
openers/closers and controlling headers up to the function header, bodies of
seeded control headers, unconditional jumps that gate control flow into
marked code, and finally prototypes of retained functions plus the
``#include`` lines of contributing files. Rendering emits retained lines
verbatim. One extraction is single-threaded over the shared immutable
model; independent extractions can run concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import Location
from .lexer import CTX_COMMENT
from .progmodel import (
    HEADER_KINDS,
    K_CASE,
    K_CLOSE,
    K_MACRO,
    K_OPEN,
    K_RETURN,
    K_SWITCH,
    ProgramModel,
    Statement,
    resolve_definitions,
)
from .project import SourceProject
from .query import CorpusSlice

ORIGIN_SEED = "seed"
ORIGIN_DATA = "data-dep"
ORIGIN_CALL = "call-def"
ORIGIN_RETURN = "return-flow"
ORIGIN_BLOCK = "block-completion"
ORIGIN_JUMP = "jump-completion"
ORIGIN_DECL = "declaration-pull"

DEFAULT_IPD_LIMIT = 2


@dataclass
class SliceState:
    relevant: dict[int, str] = field(default_factory=dict)  # stmt id -> origin
    ip_depth: dict[int, int] = field(default_factory=dict)
    processed: set[int] = field(default_factory=set)
    diagnostics: list[str] = field(default_factory=list)

    def mark(self, stmt_id: int, origin: str, depth: int) -> bool:
        """Mark a statement relevant; first discovery wins the origin.

        Re-marking at a smaller inter-procedural depth re-opens the
        statement for processing with the larger budget.
        """
        if stmt_id not in self.relevant:
            self.relevant[stmt_id] = origin
            self.ip_depth[stmt_id] = depth
            return True
        if depth < self.ip_depth[stmt_id]:
            self.ip_depth[stmt_id] = depth
            self.processed.discard(stmt_id)
            return True
        return False


@dataclass
class FeatureSlice:
    state: SliceState
    lines: dict[str, list[int]]      # file -> sorted retained lines
    rendered: dict[str, str]         # file -> module text
    origins: dict[str, dict[int, str]]  # file -> line -> origin reason


def seed(model: ProgramModel, corpus_slice: CorpusSlice) -> SliceState:
    """Mark the statement surrounding every seed location of a query."""
    return seed_from_locations(model, corpus_slice.seed_locations())


def seed_from_locations(model: ProgramModel, locations: list[Location]) -> SliceState:
    """Seed from a bare location list (queries or external term sources)."""
    state = SliceState()
    for loc in locations:
        if loc.context == CTX_COMMENT:
            continue
        stmt = model.statement_at(loc.file, loc.line)
        if stmt is None:
            state.diagnostics.append(
                f"seed at {loc.file}:{loc.line}:{loc.column} lies outside every statement; skipped"
            )
            continue
        state.mark(stmt.id, ORIGIN_SEED, 0)
    return state


def process_statement(
    model: ProgramModel, state: SliceState, stmt: Statement, ipd_limit: int
) -> None:
    """Apply the four flow rules to one relevant, unprocessed statement."""
    depth = state.ip_depth[stmt.id]

    # (1) intra-procedural data flow
    for var in stmt.var_uses:
        for def_id in resolve_definitions(model, stmt, var):
            state.mark(def_id, ORIGIN_DATA, depth)

    # (2) call flow into known callees, depth-bounded
    for callee in stmt.callees:
        fn = model.functions.get(callee)
        if fn is None:
            continue  # external
        if depth + 1 > ipd_limit:
            continue
        state.mark(fn.header_stmt, ORIGIN_CALL, depth + 1)
        for body_id in fn.body_stmts:
            state.mark(body_id, ORIGIN_CALL, depth + 1)

    # (3) return flow to already-relevant consumers
    if stmt.kind == K_RETURN or (stmt.contains_jump and stmt.kind in HEADER_KINDS):
        fn_name = stmt.enclosing_function
        if fn_name is not None:
            for call_id, _var in model.assign_from_call:
                call_stmt = model.statements[call_id]
                if fn_name in call_stmt.callees and call_id in state.relevant:
                    state.mark(call_id, ORIGIN_RETURN, depth + 1)

    # (4) call-to-return: facts survive calls; marking is monotone, so
    # there is nothing to do.

    state.processed.add(stmt.id)


def run_worklist(model: ProgramModel, state: SliceState, ipd_limit: int) -> None:
    while True:
        pending = sorted(sid for sid in state.relevant if sid not in state.processed)
        if not pending:
            return
        for sid in pending:
            if sid in state.processed:
                continue
            process_statement(model, state, model.statements[sid], ipd_limit)


def complete_blocks(model: ProgramModel, state: SliceState) -> bool:
    """Mark the structure needed for a syntactically complete rendering.

    Returns True when new statements were marked (callers loop the worklist
    back over them).
    """
    changed_any = False
    while True:
        changed = False
        for sid in sorted(state.relevant):
            stmt = model.statements[sid]
            depth = state.ip_depth[sid]

            # Braceless controlling headers.
            header = model.controllers.get(sid)
            if header is not None:
                changed |= state.mark(header, ORIGIN_BLOCK, depth)

            # Enclosing blocks: openers, closers, controlling headers,
            # transitively up to the function header.
            for block in model.block_chain(stmt):
                changed |= state.mark(block.open_stmt, ORIGIN_BLOCK, depth)
                changed |= state.mark(block.close_stmt, ORIGIN_BLOCK, depth)
                if block.controlling_stmt is not None:
                    changed |= state.mark(block.controlling_stmt, ORIGIN_BLOCK, depth)

            # Brace balance: whatever a marked statement opens must close.
            for bid in stmt.opens_blocks:
                changed |= state.mark(model.blocks[bid].close_stmt, ORIGIN_BLOCK, depth)

            # Inside a switch block, the nearest preceding case label governs
            # whether control reaches a marked statement.
            block_id = stmt.enclosing_block
            if block_id is not None:
                block = model.blocks[block_id]
                governing = block.controlling_stmt
                if (
                    governing is not None
                    and model.statements[governing].kind == K_SWITCH
                    and stmt.kind != K_CASE
                ):
                    label = _nearest_case_label(model, block, stmt)
                    if label is not None:
                        changed |= state.mark(label, ORIGIN_BLOCK, depth)

            # Bodies of seeded control headers: the statements the header
            # directly governs belong to the feature the seed named.
            if state.relevant[sid] == ORIGIN_SEED and stmt.kind in HEADER_KINDS:
                for block in model.blocks:
                    if block.controlling_stmt == sid:
                        for body in _block_member_ids(model, block):
                            changed |= state.mark(body, ORIGIN_BLOCK, depth)
                for body_id, head in model.controllers.items():
                    if head == sid:
                        changed |= state.mark(body_id, ORIGIN_BLOCK, depth)

        changed |= _complete_jumps(model, state)
        changed_any |= changed
        if not changed:
            return changed_any


def _nearest_case_label(model: ProgramModel, block, stmt: Statement) -> int | None:
    label = None
    for sid in _block_member_ids(model, block):
        if sid >= stmt.id:
            break
        if model.statements[sid].kind == K_CASE:
            label = sid
    return label


def _block_member_ids(model: ProgramModel, block) -> list[int]:
    open_stmt = model.statements[block.open_stmt]
    close_stmt = model.statements[block.close_stmt]
    return [
        s.id for s in model.statements[open_stmt.id + 1 : close_stmt.id]
        if s.file == open_stmt.file
    ]


def _complete_jumps(model: ProgramModel, state: SliceState) -> bool:
    """Mark unconditional jumps that gate control flow into marked code.

    A jump is required when some marked non-brace statement follows it
    inside its (marked) block: dropping the jump would change whether that
    code is reached. Jumps after the last marked statement of their block
    are never required.
    """
    changed = False
    marked_blocks: set[int] = set()
    for sid in state.relevant:
        stmt = model.statements[sid]
        for block in model.block_chain(stmt):
            marked_blocks.add(block.id)
    for stmt in model.statements:
        if stmt.id in state.relevant or not stmt.contains_jump:
            continue
        if stmt.enclosing_block not in marked_blocks:
            continue
        block = model.blocks[stmt.enclosing_block]
        close_id = block.close_stmt
        for sid in state.relevant:
            later = model.statements[sid]
            if (
                stmt.id < sid < close_id
                and later.kind not in (K_OPEN, K_CLOSE)
                and later.enclosing_function == stmt.enclosing_function
            ):
                changed |= state.mark(stmt.id, ORIGIN_JUMP, state.ip_depth[sid])
                break
    return changed


def _pull_declarations(model: ProgramModel, state: SliceState) -> bool:
    """Prototypes of retained function definitions and the #include lines of
    contributing files."""
    changed = False
    for fn in model.functions.values():
        if fn.header_stmt in state.relevant:
            depth = state.ip_depth[fn.header_stmt]
            for proto in fn.declaration_sites:
                changed |= state.mark(proto, ORIGIN_DECL, depth)
    touched_files = {model.statements[sid].file for sid in state.relevant}
    for stmt in model.statements:
        if stmt.kind == K_MACRO and stmt.is_include and stmt.file in touched_files:
            changed |= state.mark(stmt.id, ORIGIN_DECL, 0)
    return changed


def extract_feature(
    model: ProgramModel,
    project: SourceProject,
    corpus_slice: CorpusSlice | None,
    ipd_limit: int = DEFAULT_IPD_LIMIT,
    seeds: list[Location] | None = None,
    provenance: str = "",
) -> FeatureSlice:
    """Seed, close to fixed point, complete structure, and render."""
    if seeds is not None:
        state = seed_from_locations(model, seeds)
    else:
        state = seed(model, corpus_slice)
    if corpus_slice is not None:
        state.diagnostics.extend(corpus_slice.diagnostics)
    if not state.relevant:
        state.diagnostics.append("empty seeds: nothing to slice")
        return FeatureSlice(state, {}, {}, {})

    run_worklist(model, state, ipd_limit)
    while True:
        changed = complete_blocks(model, state)
        run_worklist(model, state, ipd_limit)
        changed |= _pull_declarations(model, state)
        run_worklist(model, state, ipd_limit)
        if not changed:
            break

    lines: dict[str, set[int]] = {}
    origins: dict[str, dict[int, str]] = {}
    for sid, origin in state.relevant.items():
        stmt = model.statements[sid]
        file_lines = lines.setdefault(stmt.file, set())
        file_origins = origins.setdefault(stmt.file, {})
        for line in range(stmt.line_span[0], stmt.line_span[1] + 1):
            file_lines.add(line)
            file_origins.setdefault(line, origin)

    sorted_lines = {f: sorted(ls) for f, ls in sorted(lines.items())}
    rendered = render_slice(model, state, project, provenance)
    return FeatureSlice(state, sorted_lines, rendered, origins)


def render_slice(
    model: ProgramModel,
    state: SliceState,
    project: SourceProject,
    provenance: str = "",
) -> dict[str, str]:
    """Emit retained lines verbatim, one output module per contributing file.

    Retained macro-directive lines are printed first so includes land at the
    top; everything else keeps its original order. A provenance comment
    records how the module was produced.
    """
    per_file: dict[str, tuple[list[int], list[int]]] = {}
    for sid in state.relevant:
        stmt = model.statements[sid]
        macro_lines, code_lines = per_file.setdefault(stmt.file, ([], []))
        target = macro_lines if stmt.kind == K_MACRO else code_lines
        for line in range(stmt.line_span[0], stmt.line_span[1] + 1):
            target.append(line)

    rendered: dict[str, str] = {}
    for rel in sorted(per_file):
        macro_lines, code_lines = per_file[rel]
        text_lines = project.file_text(rel).splitlines()
        out: list[str] = []
        if provenance:
            out.append(f"/* {provenance} */")
        for line in sorted(set(macro_lines)):
            out.append(text_lines[line - 1])
        for line in sorted(set(code_lines) - set(macro_lines)):
            out.append(text_lines[line - 1])
        rendered[rel] = "\n".join(out) + "\n"
    return rendered


# --------------------------------------------------------------------------
# Slice report
# --------------------------------------------------------------------------

REPORT_MAGIC = "FEXS"
REPORT_NAME = "SLICE_REPORT"


def render_slice_report(feature: FeatureSlice, provenance: str = "") -> str:
    lines = [f"{REPORT_MAGIC}\t1"]
    if provenance:
        lines.append(f"provenance\t{provenance}")
    for diag in feature.state.diagnostics:
        lines.append(f"diagnostic\t{diag}")
    for rel in sorted(feature.lines):
        lines.append(f"file\t{rel}")
        lines.append("lines\t" + "\t".join(str(x) for x in feature.lines[rel]))
        for line in feature.lines[rel]:
            lines.append(f"origin\t{line}\t{feature.origins[rel].get(line, '?')}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_slice_report(text: str) -> tuple[dict[str, list[int]], dict[str, dict[int, str]]]:
    lines_map: dict[str, list[int]] = {}
    origins: dict[str, dict[int, str]] = {}
    current: str | None = None
    rows = text.splitlines()
    if not rows or not rows[0].startswith(REPORT_MAGIC):
        raise ValueError("not a slice report (bad magic)")
    for row in rows[1:]:
        fields = row.split("\t")
        if fields[0] == "file":
            current = fields[1]
            lines_map[current] = []
            origins[current] = {}
        elif fields[0] == "lines" and current is not None:
            lines_map[current] = [int(x) for x in fields[1:] if x]
        elif fields[0] == "origin" and current is not None:
            origins[current][int(fields[1])] = fields[2]
    return lines_map, origins
