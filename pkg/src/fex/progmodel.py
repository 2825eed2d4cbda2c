"""Statement-level program model for a C subset.

Source files are segmented into statements carrying variable uses and
definitions, call sites, and block structure. The model is built directly
on the source text (no compiler IR), at whole-statement granularity: all
physical lines of a multi-line construct (initializers, wrapped calls,
wrapped conditions) belong to one statement, and no two statements share a
line. Constructs outside the subset degrade to opaque expression statements
whose uses conservatively include every identifier, with a diagnostic.

Definition/use extraction is lexical:

* left-hand sides of the ``=`` family and declarators define;
* every other identifier occurrence uses;
* ``&x`` counts as a use and a potential definition;
* ``*p = x`` and ``p->f = x`` conservatively define ``p``;
* struct field names after ``.``/``->`` feed the corpus, not def-use.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from . import lexer
from .corpus import C_KEYWORDS
from .project import SourceProject

# Statement kinds; merged lines take the highest-priority kind present.
K_FUNCTION = "function-header"
K_MACRO = "macro-directive"
K_IF = "if-header"
K_ELSE = "else-header"
K_LOOP = "loop-header"
K_SWITCH = "switch-header"
K_CASE = "case-label"
K_RETURN = "return"
K_JUMP = "break-continue-goto"
K_DECL = "declaration"
K_ASSIGN = "assignment"
K_EXPR = "expression"
K_OPEN = "block-open"
K_CLOSE = "block-close"

_KIND_PRIORITY = [
    K_FUNCTION, K_MACRO, K_IF, K_ELSE, K_LOOP, K_SWITCH, K_CASE,
    K_RETURN, K_JUMP, K_DECL, K_ASSIGN, K_EXPR, K_OPEN, K_CLOSE,
]
_PRIORITY = {k: i for i, k in enumerate(_KIND_PRIORITY)}

HEADER_KINDS = {K_IF, K_ELSE, K_LOOP, K_SWITCH}
CONTROL_KINDS = HEADER_KINDS | {K_CASE}

_CONTROL_WORDS = {"if", "else", "for", "while", "do", "switch"}
_TYPE_WORDS = {
    "void", "char", "short", "int", "long", "float", "double", "signed",
    "unsigned", "_Bool", "_Complex", "_Imaginary", "struct", "union", "enum",
    "const", "volatile", "static", "extern", "register", "auto", "inline",
    "restrict", "typedef",
}


@dataclass
class Statement:
    id: int
    file: str
    line_span: tuple[int, int]
    kind: str
    var_uses: tuple[str, ...] = ()
    var_defs: tuple[str, ...] = ()
    callees: tuple[str, ...] = ()
    enclosing_block: int | None = None
    enclosing_function: str | None = None
    contains_jump: bool = False
    opens_blocks: tuple[int, ...] = ()
    closes_blocks: tuple[int, ...] = ()
    is_prototype: bool = False
    is_include: bool = False
    is_opaque: bool = False


@dataclass
class Block:
    id: int
    open_stmt: int
    close_stmt: int | None
    parent: int | None
    controlling_stmt: int | None  # governing if/loop/switch header, if any
    function: str | None


@dataclass
class FunctionDef:
    name: str
    params: tuple[str, ...]
    file: str
    header_stmt: int
    body_block: int
    body_stmts: tuple[int, ...] = ()
    return_sites: tuple[int, ...] = ()
    declaration_sites: tuple[int, ...] = ()


@dataclass
class ProgramModel:
    statements: list[Statement]
    blocks: list[Block]
    functions: dict[str, FunctionDef]
    globals: dict[str, tuple[int, ...]]
    call_edges: list[tuple[int, str]]
    assign_from_call: list[tuple[int, str]]
    controllers: dict[int, int]  # braceless body stmt -> header stmt
    diagnostics: list[str]
    external_symbols: set[str] = field(default_factory=set)
    _line_maps: dict[str, tuple[list[int], list[Statement]]] = field(default_factory=dict)
    _def_sites: dict[tuple[str | None, str], list[int]] = field(default_factory=dict)

    def statement_at(self, file: str, line: int) -> Statement | None:
        starts, stmts = self._line_maps.get(file, ([], []))
        i = bisect.bisect_right(starts, line) - 1
        if i >= 0 and stmts[i].line_span[0] <= line <= stmts[i].line_span[1]:
            return stmts[i]
        return None

    def block_chain(self, stmt: Statement):
        b = stmt.enclosing_block
        while b is not None:
            block = self.blocks[b]
            yield block
            b = block.parent


# --------------------------------------------------------------------------
# Raw syntactic units (pre line-merge)
# --------------------------------------------------------------------------

@dataclass
class _Unit:
    kind: str
    tokens: list[lexer.Token]
    start_line: int
    end_line: int
    block_path: tuple[int, ...]  # block id stack at creation (innermost last)
    function: str | None
    contains_jump: bool = False
    opens_block: int | None = None
    closes_block: int | None = None
    is_prototype: bool = False
    is_include: bool = False
    is_opaque: bool = False
    controller_unit: int | None = None  # index of governing braceless header


class _FileParser:
    """One pass over a file's code tokens producing units and blocks."""

    def __init__(self, rel: str, tokens: list[lexer.Token], scan: lexer.ScanResult,
                 block_id_start: int, diagnostics: list[str]):
        self.rel = rel
        self.diagnostics = diagnostics
        # Directive tokens form their own units; comments never reach here.
        self.code = [
            t for t in tokens
            if t.context == lexer.CTX_IDENTIFIER
        ]
        self.directive_units = self._collect_directives(tokens, scan)
        self.units: list[_Unit] = []
        self.blocks: list[Block] = []
        self.block_id_start = block_id_start
        self.stack: list[int] = []  # local block ids
        self.current: list[lexer.Token] = []
        self.pending_headers: list[int] = []  # unit indexes awaiting a body
        self.current_function: str | None = None
        self.function_body_block: int | None = None
        self.functions: list[FunctionDef] = []

    # -- helpers ------------------------------------------------------------

    def _collect_directives(self, tokens, scan) -> list[_Unit]:
        """One unit per directive; the lexer's spans carry the continuation
        structure, so adjacent but separate directives stay separate."""
        by_line: dict[int, list[lexer.Token]] = {}
        for t in tokens:
            if t.context == lexer.CTX_MACRO:
                by_line.setdefault(t.line, []).append(t)
        units: list[_Unit] = []
        for start, end in scan.directive_spans:
            toks = [t for ln in range(start, end + 1) for t in by_line.get(ln, [])]
            units.append(_Unit(
                kind=K_MACRO, tokens=toks, start_line=start, end_line=end,
                block_path=(), function=None,
                is_include=bool(scan.include_lines & set(range(start, end + 1))),
            ))
        return units

    def _block(self, local_id: int) -> Block:
        return self.blocks[local_id]

    def _new_block(self, open_unit: int, controlling: int | None) -> int:
        local = len(self.blocks)
        parent = self.stack[-1] if self.stack else None
        self.blocks.append(Block(
            id=self.block_id_start + local,
            open_stmt=open_unit,          # unit index for now; patched later
            close_stmt=None,
            parent=self.block_id_start + parent if parent is not None else None,
            controlling_stmt=controlling,  # unit index for now
            function=self.current_function,
        ))
        self.stack.append(local)
        return local

    def _finish_unit(self, unit: _Unit) -> int:
        idx = len(self.units)
        if unit.kind not in (K_OPEN, K_CLOSE) and self.pending_headers:
            # A completed statement satisfies the innermost braceless header.
            header = self.pending_headers.pop()
            unit.controller_unit = header
        self.units.append(unit)
        return idx

    def _make_unit(self, kind: str, toks: list[lexer.Token], **kw) -> _Unit:
        return _Unit(
            kind=kind, tokens=toks,
            start_line=toks[0].line if toks else 0,
            end_line=toks[-1].line if toks else 0,
            block_path=tuple(self.block_id_start + b for b in self.stack),
            function=self.current_function,
            **kw,
        )

    # -- main loop ------------------------------------------------------------

    def parse(self) -> None:
        toks = self.code
        i = 0
        n = len(toks)
        while i < n:
            t = toks[i]
            if t.kind == lexer.PUNCT and t.text == "{":
                i = self._handle_open(i)
            elif t.kind == lexer.PUNCT and t.text == "}":
                i = self._handle_close(i)
            elif t.kind == lexer.WORD and t.text in _CONTROL_WORDS and not self.current:
                i = self._handle_header(i)
            elif (
                t.kind == lexer.WORD and not self.current
                and t.text in ("case", "default")
            ):
                i = self._handle_label(i)
            elif (
                t.kind == lexer.WORD and not self.current and self.stack
                and i + 1 < n and toks[i + 1].kind == lexer.PUNCT
                and toks[i + 1].text == ":" and t.text not in C_KEYWORDS
            ):
                # goto label
                unit = self._make_unit(K_CASE, [t, toks[i + 1]])
                self._finish_unit(unit)
                i += 2
            else:
                i = self._accumulate(i)
        if self.current:
            # Trailing tokens without a terminator: close as best we can.
            self._close_plain_unit(opaque=True)
        if self.stack:
            self.diagnostics.append(f"{self.rel}: unbalanced braces at end of file")

    def _handle_open(self, i: int) -> int:
        toks = self.code
        if self.current:
            if self._current_is_aggregate():
                return self._consume_aggregate(i)
            last_kind, header_idx = self._close_header_or_signature(i)
            if last_kind is not None:
                # The brace belongs to the header unit, so a brace on its own
                # line still lands inside a statement span.
                self.units[header_idx].tokens.append(toks[i])
                self.units[header_idx].end_line = toks[i].line
                local = self._new_block(header_idx, header_idx if last_kind in HEADER_KINDS else None)
                if last_kind == K_FUNCTION:
                    self.function_body_block = local
                return i + 1
            # Unexpected brace inside an unterminated statement: treat the
            # braces as an aggregate so scanning stays on the rails.
            self.diagnostics.append(
                f"{self.rel}:{toks[i].line}: unexpected '{{' inside statement; degraded precision"
            )
            return self._consume_aggregate(i)
        # Bare compound block.
        unit = self._make_unit(K_OPEN, [toks[i]])
        idx = self._finish_unit(unit)
        self._new_block(idx, None)
        return i + 1

    def _current_is_aggregate(self) -> bool:
        depth = 0
        saw_eq = False
        saw_paren = False
        for t in self.current:
            if t.kind != lexer.PUNCT:
                continue
            if t.text in "([":
                depth += 1
                if t.text == "(":
                    saw_paren = True
            elif t.text in ")]":
                depth -= 1
            elif t.text == "=" and depth == 0:
                saw_eq = True
        if saw_eq:
            return True
        lead = next((t for t in self.current if t.kind == lexer.WORD), None)
        if lead is not None and lead.text in ("struct", "union", "enum", "typedef") and not saw_paren:
            return True
        return False

    def _consume_aggregate(self, i: int) -> int:
        toks = self.code
        depth = 0
        while i < len(toks):
            t = toks[i]
            self.current.append(t)
            if t.kind == lexer.PUNCT:
                if t.text == "{":
                    depth += 1
                elif t.text == "}":
                    depth -= 1
                    if depth == 0:
                        return i + 1
            i += 1
        self.diagnostics.append(f"{self.rel}: unterminated initializer braces")
        return i

    def _close_header_or_signature(self, brace_idx: int):
        """Close self.current before a '{'. Returns (kind, unit index) when it
        formed a control header or function signature, else (None, None)."""
        toks = self.current
        first = next((t for t in toks if t.kind == lexer.WORD), None)
        if first is not None and first.text in _CONTROL_WORDS:
            kind = _header_kind(first.text, toks)
            unit = self._make_unit(kind, toks)
            _analyze_unit(unit)
            self.current = []
            return kind, self._finish_unit(unit)
        if not self.stack:
            name, params = _signature_parts(toks)
            if name is not None:
                unit = self._make_unit(K_FUNCTION, toks)
                unit.function = name
                _analyze_unit(unit)
                unit_idx = self._finish_unit(unit)
                self.current = []
                self.current_function = name
                self.functions.append(FunctionDef(
                    name=name, params=params, file=self.rel,
                    header_stmt=unit_idx, body_block=-1,
                ))
                return K_FUNCTION, unit_idx
        return None, None

    def _handle_close(self, i: int) -> int:
        toks = self.code
        if self.current:
            self._close_plain_unit(opaque=True)
            self.diagnostics.append(
                f"{self.rel}:{toks[i].line}: statement not terminated before '}}'; degraded precision"
            )
        if not self.stack:
            self.diagnostics.append(f"{self.rel}:{toks[i].line}: stray '}}'")
            return i + 1
        close_toks = [toks[i]]
        i += 1
        local = self.stack[-1]
        block = self._block(local)
        controlling = block.controlling_stmt
        # `do { ... } while (cond);` : the loop tail belongs to the close line.
        if (
            controlling is not None
            and self.units[controlling].kind == K_LOOP
            and self.units[controlling].tokens
            and self.units[controlling].tokens[0].text == "do"
            and i < len(toks) and toks[i].kind == lexer.WORD and toks[i].text == "while"
        ):
            while i < len(toks):
                close_toks.append(toks[i])
                if toks[i].kind == lexer.PUNCT and toks[i].text == ";":
                    i += 1
                    break
                i += 1
        unit = self._make_unit(K_CLOSE, close_toks)
        _analyze_unit(unit)
        idx = self._finish_unit(unit)
        self.stack.pop()
        block.close_stmt = idx
        if self.stack == [] and self.current_function is not None:
            self._finalize_function(local)
        return i

    def _finalize_function(self, body_local: int) -> None:
        fn = self.functions[-1]
        fn.body_block = self.block_id_start + body_local
        self.current_function = None
        self.function_body_block = None
        self.pending_headers.clear()

    def _handle_header(self, i: int) -> int:
        toks = self.code
        t = toks[i]
        collected = [t]
        i += 1
        word = t.text
        if word == "else" and i < len(toks) and toks[i].kind == lexer.WORD and toks[i].text == "if":
            collected.append(toks[i])
            i += 1
            word = "else if"
        if word not in ("do", "else"):
            # Consume the (possibly multi-line) parenthesized condition.
            if i < len(toks) and toks[i].kind == lexer.PUNCT and toks[i].text == "(":
                depth = 0
                while i < len(toks):
                    collected.append(toks[i])
                    if toks[i].kind == lexer.PUNCT:
                        if toks[i].text == "(":
                            depth += 1
                        elif toks[i].text == ")":
                            depth -= 1
                            if depth == 0:
                                i += 1
                                break
                    i += 1
        kind = _header_kind(collected[0].text, collected)
        unit = self._make_unit(kind, collected)
        _analyze_unit(unit)
        # `if (x) return;` : the inline body merges into this line later, but
        # the header still governs whatever statement follows when no brace
        # opens. Register as pending; a following '{' or statement claims it.
        idx = self._finish_unit(unit)
        if i < len(toks) and toks[i].kind == lexer.PUNCT and toks[i].text == "{":
            # Fold the brace into the header so an Allman-style brace line
            # stays inside the header statement's span.
            unit.tokens.append(toks[i])
            unit.end_line = toks[i].line
            self._new_block(idx, idx)
            return i + 1
        if i < len(toks) and toks[i].kind == lexer.PUNCT and toks[i].text == ";":
            # Empty body: `while (spin());` style. Nothing pends.
            return i + 1
        self.pending_headers.append(idx)
        return i

    def _handle_label(self, i: int) -> int:
        toks = self.code
        collected = []
        while i < len(toks):
            collected.append(toks[i])
            if toks[i].kind == lexer.PUNCT and toks[i].text == ":":
                i += 1
                break
            i += 1
        unit = self._make_unit(K_CASE, collected)
        _analyze_unit(unit)
        self._finish_unit(unit)
        return i

    def _accumulate(self, i: int) -> int:
        toks = self.code
        pdepth = 0
        while i < len(toks):
            t = toks[i]
            if t.kind == lexer.PUNCT:
                if t.text in "([":
                    pdepth += 1
                elif t.text in ")]":
                    if pdepth == 0:
                        self.current.append(t)
                        self._close_plain_unit(opaque=True)
                        self.diagnostics.append(
                            f"{self.rel}:{t.line}: unexpected '{t.text}'; degraded precision"
                        )
                        return i + 1
                    pdepth -= 1
                elif t.text == ";" and pdepth == 0:
                    self.current.append(t)
                    self._close_plain_unit()
                    return i + 1
                elif t.text in "{}" and pdepth == 0:
                    return i  # let the main loop decide
            self.current.append(t)
            i += 1
        return i

    def _close_plain_unit(self, opaque: bool = False) -> None:
        toks = self.current
        self.current = []
        if not toks:
            return
        kind = _classify_plain(toks, at_top_level=not self.stack)
        unit = self._make_unit(kind, toks)
        unit.is_opaque = opaque
        _analyze_unit(unit)
        if opaque:
            # Out-of-subset construct: keep it as an opaque expression with
            # conservative uses covering every identifier.
            unit.kind = K_EXPR
            words = {
                t.text for t in toks
                if t.kind == lexer.WORD and t.text not in C_KEYWORDS
            }
            unit.__dict__["uses"] = set(unit.__dict__.get("uses", set())) | words
        self._finish_unit(unit)


def _header_kind(word: str, toks) -> str:
    if word == "if":
        return K_IF
    if word == "else":
        return K_ELSE  # plain else and `else if` alike
    if word in ("for", "while", "do"):
        return K_LOOP
    if word == "switch":
        return K_SWITCH
    return K_EXPR


def _classify_plain(toks, at_top_level: bool) -> str:
    first = next((t for t in toks if t.kind == lexer.WORD), None)
    if first is not None:
        if first.text == "return":
            return K_RETURN
        if first.text in ("break", "continue", "goto"):
            return K_JUMP
    if _has_assign(toks):
        if _looks_like_declaration(toks):
            return K_DECL
        return K_ASSIGN
    if _looks_like_declaration(toks):
        return K_DECL
    return K_EXPR


def _has_assign(toks) -> bool:
    depth = 0
    for t in toks:
        if t.kind != lexer.PUNCT:
            continue
        if t.text in "([":
            depth += 1
        elif t.text in ")]":
            depth -= 1
        elif depth == 0 and t.text in lexer.ASSIGN_OPS:
            return True
    return False


def _looks_like_declaration(toks) -> bool:
    words = [t for t in toks if t.kind == lexer.WORD]
    if not words:
        return False
    if words[0].text in _TYPE_WORDS:
        return True
    # `foo_t *x ...` / `foo_t x ...`: two leading words (or word * word)
    # before any operator is a declaration under the subset grammar.
    seen_word = False
    for t in toks:
        if t.kind == lexer.WORD:
            if t.text in C_KEYWORDS and t.text not in _TYPE_WORDS:
                return False
            if seen_word:
                return True
            seen_word = True
        elif t.kind == lexer.PUNCT and t.text == "*":
            continue
        else:
            return False
    return False


# --------------------------------------------------------------------------
# Def/use/callee extraction
# --------------------------------------------------------------------------

def _analyze_unit(unit: _Unit) -> None:
    toks = unit.tokens
    uses: set[str] = set()
    defs: set[str] = set()
    callees: set[str] = set()

    if unit.kind == K_FUNCTION:
        name, params = _signature_parts(toks)
        defs.update(params)
        unit.__dict__["uses"] = uses
        unit.__dict__["defs"] = defs
        unit.__dict__["callees"] = callees
        return

    word_idx = [j for j, t in enumerate(toks) if t.kind == lexer.WORD]
    is_decl = unit.kind == K_DECL

    def prev_punct(j):
        return toks[j - 1].text if j > 0 and toks[j - 1].kind == lexer.PUNCT else None

    def next_punct(j):
        return toks[j + 1].text if j + 1 < len(toks) and toks[j + 1].kind == lexer.PUNCT else None

    # Assignment targets: walk back from each assignment operator.
    assign_targets: set[int] = set()
    depth = 0
    for j, t in enumerate(toks):
        if t.kind != lexer.PUNCT:
            continue
        if t.text in "([":
            depth += 1
        elif t.text in ")]":
            depth -= 1
        elif t.text in lexer.ASSIGN_OPS:
            base = _lvalue_base(toks, j)
            if base is not None:
                assign_targets.add(base)
        elif t.text in lexer.INCDEC_OPS:
            # i++ / ++i
            for k in (j - 1, j + 1):
                if 0 <= k < len(toks) and toks[k].kind == lexer.WORD \
                        and toks[k].text not in C_KEYWORDS:
                    assign_targets.add(k)
                    uses.add(toks[k].text)
                    break

    declarators: set[int] = set()
    if is_decl:
        declarators = _declarator_positions(toks)

    goto_targets = {
        j + 1 for j in range(len(toks) - 1)
        if toks[j].kind == lexer.WORD and toks[j].text == "goto"
    }

    for j in word_idx:
        t = toks[j]
        if t.text in C_KEYWORDS:
            continue
        if j in goto_targets:
            continue  # a label, not a variable
        p = prev_punct(j)
        if p in (".", "->"):
            continue  # field name: corpus vocabulary, not def-use
        if next_punct(j) == "(":
            callees.add(t.text)
            continue
        if j in assign_targets or j in declarators:
            defs.add(t.text)
            if p in lexer.ASSIGN_OPS or p in ("&",):
                uses.add(t.text)
            continue
        if p == "&" and _is_unary_amp(toks, j - 1):
            uses.add(t.text)
            defs.add(t.text)  # address taken: callee may write through it
            continue
        uses.add(t.text)

    unit.__dict__["uses"] = uses
    unit.__dict__["defs"] = defs
    unit.__dict__["callees"] = callees
    if unit.kind in (K_RETURN, K_JUMP):
        unit.contains_jump = True
    first = next((t for t in toks if t.kind == lexer.WORD), None)
    if first is not None and first.text in ("return", "break", "continue", "goto"):
        unit.contains_jump = True


def _lvalue_base(toks, op_idx) -> int | None:
    """Index of the base identifier of the lvalue ending just before op_idx."""
    j = op_idx - 1
    depth = 0
    base = None
    while j >= 0:
        t = toks[j]
        if t.kind == lexer.PUNCT:
            if t.text == "]":
                depth += 1
            elif t.text == "[":
                depth -= 1
            elif depth == 0 and t.text not in (".", "->", "*", ")", "]"):
                break
        elif t.kind == lexer.WORD and depth == 0:
            if t.text in C_KEYWORDS:
                break
            base = j
            # Keep walking: `a.b.c = x` should land on `a`.
            if j > 0 and toks[j - 1].kind == lexer.PUNCT and toks[j - 1].text in (".", "->", "*"):
                j -= 1
                continue
            break
        j -= 1
    return base


def _declarator_positions(toks) -> set[int]:
    """Identifier positions declared by a declaration statement."""
    positions: set[int] = set()
    # Split on top-level commas, find the last word of each chunk that sits
    # before '=' (or the terminator), skipping words inside [] or ().
    depth = 0
    chunk: list[int] = []
    chunks: list[list[int]] = []
    limit = len(toks)
    for j in range(limit):
        t = toks[j]
        if t.kind == lexer.PUNCT:
            if t.text in "([{":
                depth += 1
            elif t.text in ")]}":
                depth -= 1
            elif depth == 0 and t.text == ",":
                chunks.append(chunk)
                chunk = []
                continue
            elif depth == 0 and t.text == ";":
                break
        chunk.append(j)
    chunks.append(chunk)

    first_chunk = True
    for ch in chunks:
        cut = len(ch)
        d = 0
        for pos, j in enumerate(ch):
            t = toks[j]
            if t.kind == lexer.PUNCT:
                if t.text in "([{":
                    d += 1
                elif t.text in ")]}":
                    d -= 1
                elif t.text == "=" and d == 0:
                    cut = pos
                    break
        candidate = None
        for pos in range(cut - 1, -1, -1):
            j = ch[pos]
            t = toks[j]
            if t.kind == lexer.WORD and t.text not in C_KEYWORDS:
                candidate = j
                break
            if t.kind == lexer.WORD:
                break
        if candidate is not None:
            # Skip array-size words: require the candidate not inside [].
            positions.add(candidate)
        first_chunk = False
    return positions


def _is_unary_amp(toks, amp_idx) -> bool:
    j = amp_idx - 1
    if j < 0:
        return True
    t = toks[j]
    if t.kind == lexer.PUNCT and t.text not in (")", "]"):
        return True
    return False


def _signature_parts(toks) -> tuple[str | None, tuple[str, ...]]:
    """(function name, parameter names) of a signature token list."""
    depth = 0
    open_idx = close_idx = None
    for j, t in enumerate(toks):
        if t.kind != lexer.PUNCT:
            continue
        if t.text == "(":
            if depth == 0 and open_idx is None:
                open_idx = j
            depth += 1
        elif t.text == ")":
            depth -= 1
            if depth == 0 and open_idx is not None:
                close_idx = j
                break
    if open_idx is None or close_idx is None or open_idx == 0:
        return None, ()
    name_tok = toks[open_idx - 1]
    if name_tok.kind != lexer.WORD or name_tok.text in C_KEYWORDS:
        return None, ()
    for t in toks[:open_idx]:
        if t.kind == lexer.PUNCT and t.text == "=":
            return None, ()
    params: list[str] = []
    chunk: list[lexer.Token] = []
    d = 0
    for t in toks[open_idx + 1 : close_idx]:
        if t.kind == lexer.PUNCT:
            if t.text in "([":
                d += 1
            elif t.text in ")]":
                d -= 1
            elif t.text == "," and d == 0:
                _append_param(chunk, params)
                chunk = []
                continue
        chunk.append(t)
    _append_param(chunk, params)
    return name_tok.text, tuple(params)


def _append_param(chunk, params) -> None:
    words = [t.text for t in chunk if t.kind == lexer.WORD and t.text not in C_KEYWORDS]
    if words:
        params.append(words[-1])


# --------------------------------------------------------------------------
# Model assembly
# --------------------------------------------------------------------------

def build_program_model(project: SourceProject) -> ProgramModel:
    """Parse every file and link calls, prototypes, and globals."""
    statements: list[Statement] = []
    blocks: list[Block] = []
    functions: dict[str, FunctionDef] = {}
    globals_map: dict[str, list[int]] = {}
    call_edges: list[tuple[int, str]] = []
    assign_from_call: list[tuple[int, str]] = []
    controllers: dict[int, int] = {}
    diagnostics: list[str] = []
    line_maps: dict[str, tuple[list[int], list[Statement]]] = {}
    prototype_sites: dict[str, list[int]] = {}

    for rel, text in project.files:
        tokens, scan = lexer.lex(text, rel)
        parser = _FileParser(rel, tokens, scan, len(blocks), diagnostics)
        parser.parse()

        all_units = parser.units + parser.directive_units
        order = sorted(range(len(all_units)), key=lambda u: (all_units[u].start_line, all_units[u].tokens[0].col if all_units[u].tokens else 0))

        # Merge units whose line ranges overlap into whole-line statements.
        merged_groups: list[list[int]] = []
        for u in order:
            unit = all_units[u]
            if (
                merged_groups
                and unit.start_line <= max(all_units[x].end_line for x in merged_groups[-1])
            ):
                merged_groups[-1].append(u)
                continue
            merged_groups.append([u])

        unit_to_stmt: dict[int, int] = {}
        file_stmts: list[Statement] = []
        for group in merged_groups:
            sid = len(statements)
            units = [all_units[u] for u in group]
            for u in group:
                unit_to_stmt[u] = sid
            kind = min((u.kind for u in units), key=lambda k: _PRIORITY[k])
            span = (min(u.start_line for u in units), max(u.end_line for u in units))
            uses = sorted(set().union(*(u.__dict__.get("uses", set()) for u in units)))
            defs = sorted(set().union(*(u.__dict__.get("defs", set()) for u in units)))
            callees = sorted(set().union(*(u.__dict__.get("callees", set()) for u in units)))
            paths = [u.block_path for u in units]
            shallow = min(paths, key=len) if paths else ()
            stmt = Statement(
                id=sid,
                file=rel,
                line_span=span,
                kind=kind,
                var_uses=tuple(uses),
                var_defs=tuple(defs),
                callees=tuple(callees),
                enclosing_block=shallow[-1] if shallow else None,
                enclosing_function=next((u.function for u in units if u.function), None),
                contains_jump=any(u.contains_jump for u in units),
                is_prototype=any(u.is_prototype for u in units),
                is_include=any(u.is_include for u in units),
                is_opaque=any(u.is_opaque for u in units),
            )
            statements.append(stmt)
            file_stmts.append(stmt)

        # Patch block endpoints from unit indexes to statement ids.
        for local, block in enumerate(parser.blocks):
            block.open_stmt = unit_to_stmt[block.open_stmt]
            if block.close_stmt is not None:
                block.close_stmt = unit_to_stmt[block.close_stmt]
            else:
                block.close_stmt = block.open_stmt
                diagnostics.append(f"{rel}: block never closed; degraded structure")
            if block.controlling_stmt is not None:
                block.controlling_stmt = unit_to_stmt[block.controlling_stmt]
            blocks.append(block)

        # Braceless controllers, now in statement ids.
        for u_idx, unit in enumerate(parser.units):
            if unit.controller_unit is not None:
                body = unit_to_stmt[u_idx]
                header = unit_to_stmt[unit.controller_unit]
                if body != header:
                    controllers[body] = header

        # opens/closes bookkeeping on statements.
        opens: dict[int, list[int]] = {}
        closes: dict[int, list[int]] = {}
        for block in parser.blocks:
            opens.setdefault(block.open_stmt, []).append(block.id)
            closes.setdefault(block.close_stmt, []).append(block.id)
        for stmt in file_stmts:
            stmt.opens_blocks = tuple(opens.get(stmt.id, ()))
            stmt.closes_blocks = tuple(closes.get(stmt.id, ()))

        # Functions of this file.
        for fn in parser.functions:
            fn.header_stmt = unit_to_stmt[fn.header_stmt]
            if fn.body_block < 0:
                diagnostics.append(f"{rel}: function {fn.name} has no body block")
                continue
            body_ids = [
                s.id for s in file_stmts
                if s.enclosing_function == fn.name and s.id != fn.header_stmt
            ]
            fn.body_stmts = tuple(body_ids)
            fn.return_sites = tuple(
                s.id for s in file_stmts
                if s.id in set(body_ids) and s.kind == K_RETURN
            )
            functions[fn.name] = fn

        starts = [s.line_span[0] for s in file_stmts]
        line_maps[rel] = (starts, file_stmts)

    # Fix enclosing_function: body statements know their function via block
    # chains; fill from block.function where the unit-level tag was empty.
    for stmt in statements:
        if stmt.enclosing_function is None and stmt.enclosing_block is not None:
            stmt.enclosing_function = blocks[stmt.enclosing_block].function
    # Directive statements inside a function body: attach by line position.
    for rel, (starts, file_stmts) in line_maps.items():
        for stmt in file_stmts:
            if stmt.kind == K_MACRO and stmt.enclosing_block is None:
                for fn in functions.values():
                    if fn.file != rel:
                        continue
                    header = statements[fn.header_stmt]
                    close = statements[blocks[fn.body_block].close_stmt]
                    if header.line_span[0] < stmt.line_span[0] < close.line_span[1]:
                        stmt.enclosing_block = fn.body_block
                        stmt.enclosing_function = fn.name
                        break

    # Prototypes first: a top-level declaration whose "callee" matches a
    # known function is its declaration site, not a call, and its parameter
    # names are not definitions.
    fn_names = set(functions)
    for stmt in statements:
        if (
            stmt.enclosing_function is None
            and stmt.kind == K_DECL
            and any(c in fn_names for c in stmt.callees)
        ):
            stmt.is_prototype = True
            stmt.var_defs = ()
            for callee in stmt.callees:
                if callee in fn_names:
                    prototype_sites.setdefault(callee, []).append(stmt.id)
    for name, sites in prototype_sites.items():
        functions[name].declaration_sites = tuple(sites)

    # Globals and call edges.
    for stmt in statements:
        if stmt.enclosing_function is None and stmt.kind == K_DECL and not stmt.is_prototype:
            for name in stmt.var_defs:
                globals_map.setdefault(name, []).append(stmt.id)
        if stmt.is_prototype:
            continue
        for callee in stmt.callees:
            call_edges.append((stmt.id, callee))
        if stmt.kind in (K_DECL, K_ASSIGN) and stmt.callees and stmt.var_defs:
            for var in stmt.var_defs:
                assign_from_call.append((stmt.id, var))

    model = ProgramModel(
        statements=statements,
        blocks=blocks,
        functions=functions,
        globals={k: tuple(v) for k, v in globals_map.items()},
        call_edges=call_edges,
        assign_from_call=assign_from_call,
        controllers=controllers,
        diagnostics=diagnostics,
        _line_maps=line_maps,
    )
    _index_defs(model)
    return model


def _index_defs(model: ProgramModel) -> None:
    for stmt in model.statements:
        for var in stmt.var_defs:
            key = (stmt.enclosing_function, var)
            model._def_sites.setdefault(key, []).append(stmt.id)


def resolve_definitions(model: ProgramModel, stmt: Statement, var: str) -> set[int]:
    """Statements that may define ``var`` as observed by ``stmt``.

    Walks lexically backward through the enclosing function. A preceding
    definition kills everything older only when it dominates the use site
    with no intervening control flow (its block encloses the use and the
    region between them is branch- and jump-free); otherwise all maximal
    candidates are kept, over-approximating merges from branches. Falls back
    to function parameters, then file-level globals. Unresolvable names are
    recorded as external symbols and yield the empty set.
    """
    fn_name = stmt.enclosing_function
    candidates = [
        model.statements[sid]
        for sid in model._def_sites.get((fn_name, var), [])
        if sid < stmt.id
    ] if fn_name is not None else []

    result: set[int] = set()
    killed_rest = False
    ancestors = {b.id for b in model.block_chain(stmt)}
    for cand in sorted(candidates, key=lambda s: -s.id):
        result.add(cand.id)
        if cand.enclosing_block in ancestors and _sequential_between(model, cand, stmt):
            killed_rest = True
            break

    if not killed_rest and fn_name is not None:
        fn = model.functions.get(fn_name)
        if fn is not None and var in fn.params:
            result.add(fn.header_stmt)
            killed_rest = True

    if not killed_rest and var in model.globals:
        result.update(model.globals[var])

    if not result:
        model.external_symbols.add(var)
    return result


def _sequential_between(model: ProgramModel, first: Statement, second: Statement) -> bool:
    """True when no control-flow statement sits strictly between the two."""
    for sid in range(first.id + 1, second.id):
        s = model.statements[sid]
        if s.enclosing_function != second.enclosing_function:
            continue
        if s.kind in CONTROL_KINDS or s.contains_jump:
            return False
        if s.opens_blocks or s.closes_blocks:
            return False
    return True


def dump_model(model: ProgramModel) -> str:
    """Structured-text debug dump used by tests and the CLI --dump flag."""
    lines = []
    for stmt in model.statements:
        lines.append(
            f"{stmt.file}:{stmt.line_span[0]}-{stmt.line_span[1]}\t{stmt.kind}"
            f"\tdefs={','.join(stmt.var_defs)}\tuses={','.join(stmt.var_uses)}"
            f"\tcalls={','.join(stmt.callees)}"
            f"\tfn={stmt.enclosing_function or '-'}"
        )
    return "\n".join(lines) + "\n"
