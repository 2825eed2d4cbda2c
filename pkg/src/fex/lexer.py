"""Tokenizer and context classifier for C source text.

Scanning is total: every byte of input is consumed, and anything that does
not form a recognized token degrades to a punctuation token. Word tokens
carry the 1-based line/column of their first character. Comment text is
scanned for words too, because comments are searchable; a second pass
(`classify_contexts`) stamps each token with one of the three program
contexts: identifier, comment, or macro (preprocessor directive line,
including backslash continuations).
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace

WORD = "word"
NUMBER = "number"
STRING = "string-literal"
PUNCT = "punctuation"

CTX_IDENTIFIER = "identifier"
CTX_COMMENT = "comment"
CTX_MACRO = "macro"

# Longest-match first so `>>=` is not read as `>` `>` `=`.
_OPERATORS = [
    ">>=", "<<=", "...",
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
]

ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}
INCDEC_OPS = {"++", "--"}


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int
    kind: str
    context: str = CTX_IDENTIFIER
    # True for the directive name right after `#` (define, include, ...):
    # part of preprocessor syntax, not program vocabulary.
    directive_keyword: bool = False


@dataclass
class ScanResult:
    """Raw token stream plus the region info needed to classify contexts."""

    tokens: list[Token]
    comment_lines: set[int]          # lines with at least one comment char
    code_lines: set[int]             # lines with at least one non-comment, non-blank char
    comment_ranges: list[tuple[int, int]]  # (start_offset, end_offset) into the text
    directive_lines: set[int]
    directive_spans: list[tuple[int, int]]  # one (first, last) per directive
    include_lines: set[int]          # subset of directive lines: #include
    line_offsets: list[int]
    diagnostics: list[str] = field(default_factory=list)

    def offset_in_comment(self, offset: int) -> bool:
        i = bisect.bisect_right(self.comment_ranges, (offset, float("inf"))) - 1
        if i < 0:
            return False
        start, end = self.comment_ranges[i]
        return start <= offset < end


def _is_word_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(file_text: str, file_path: str | None = None) -> ScanResult:
    """Scan C source into an ordered token stream with 1-based positions.

    String literals and numbers are produced as tokens but are never turned
    into searchable terms. Words inside comments are emitted so comment text
    stays searchable. Malformed constructs degrade to punctuation; lexing
    never fails.
    """
    tokens: list[Token] = []
    comment_lines: set[int] = set()
    code_lines: set[int] = set()
    comment_ranges: list[tuple[int, int]] = []
    directive_lines: set[int] = set()
    include_lines: set[int] = set()
    diagnostics: list[str] = []
    where = file_path or "<text>"

    line_offsets = [0]
    for i, ch in enumerate(file_text):
        if ch == "\n":
            line_offsets.append(i + 1)

    n = len(file_text)
    i = 0
    line = 1
    col = 1
    in_directive = False
    directive_word_pending = False
    directive_spans: list[tuple[int, int]] = []
    directive_start = 0

    def advance(k: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if i < n and file_text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    def scan_comment_words(start: int, end: int, start_line: int, start_col: int) -> None:
        """Emit word tokens found inside a comment region."""
        ln, cl = start_line, start_col
        j = start
        while j < end:
            ch = file_text[j]
            if _is_word_start(ch):
                k = j
                while k < end and _is_word_char(file_text[k]):
                    k += 1
                tokens.append(Token(file_text[j:k], ln, cl, WORD))
                cl += k - j
                j = k
                continue
            if ch == "\n":
                ln += 1
                cl = 1
            else:
                cl += 1
            j += 1

    while i < n:
        ch = file_text[i]

        if ch == "\n":
            if in_directive:
                # A directive ends at a newline unless escaped.
                back = i - 1
                while back >= 0 and file_text[back] in " \t":
                    back -= 1
                if back < 0 or file_text[back] != "\\":
                    in_directive = False
                    directive_spans.append((directive_start, line))
            advance()
            continue

        if ch in " \t\r\v\f":
            advance()
            continue

        # Line comment.
        if ch == "/" and i + 1 < n and file_text[i + 1] == "/":
            start, start_line, start_col = i, line, col
            comment_lines.add(line)
            while i < n and file_text[i] != "\n":
                advance()
            comment_ranges.append((start, i))
            scan_comment_words(start + 2, i, start_line, start_col + 2)
            continue

        # Block comment.
        if ch == "/" and i + 1 < n and file_text[i + 1] == "*":
            start, start_line, start_col = i, line, col
            advance(2)
            closed = False
            while i < n:
                if file_text[i] == "*" and i + 1 < n and file_text[i + 1] == "/":
                    advance(2)
                    closed = True
                    break
                advance()
            if not closed:
                diagnostics.append(f"{where}:{start_line}: unterminated block comment")
            for ln in range(start_line, line + 1):
                comment_lines.add(ln)
            end = i - 2 if closed else i
            comment_ranges.append((start, i))
            scan_comment_words(start + 2, end, start_line, start_col + 2)
            continue

        code_lines.add(line)

        # Preprocessor directive: first non-blank char of a line is '#'.
        if ch == "#" and not in_directive:
            at_line_start = all(
                c in " \t" for c in file_text[line_offsets[line - 1] : i]
            )
            if at_line_start:
                in_directive = True
                directive_word_pending = True
                directive_start = line
                directive_lines.add(line)
                tokens.append(Token("#", line, col, PUNCT))
                advance()
                continue

        if in_directive:
            directive_lines.add(line)

        # String and character literals (one token, contents opaque).
        if ch in "\"'":
            quote = ch
            start_line, start_col, start = line, col, i
            advance()
            while i < n and file_text[i] != "\n":
                if file_text[i] == "\\" and i + 1 < n:
                    advance(2)
                    continue
                if file_text[i] == quote:
                    advance()
                    break
                advance()
            tokens.append(Token(file_text[start:i], start_line, start_col, STRING))
            continue

        if _is_word_start(ch):
            start_line, start_col, start = line, col, i
            while i < n and _is_word_char(file_text[i]):
                advance()
            text = file_text[start:i]
            is_directive_name = in_directive and directive_word_pending
            if is_directive_name:
                directive_word_pending = False
                if text == "include":
                    include_lines.add(start_line)
            tokens.append(
                Token(text, start_line, start_col, WORD, directive_keyword=is_directive_name)
            )
            continue

        if ch.isdigit() or (ch == "." and i + 1 < n and file_text[i + 1].isdigit()):
            start_line, start_col, start = line, col, i
            while i < n:
                c = file_text[i]
                if c.isalnum() or c == "." or c == "_":
                    advance()
                elif c in "+-" and file_text[i - 1] in "eEpP":
                    advance()
                else:
                    break
            tokens.append(Token(file_text[start:i], start_line, start_col, NUMBER))
            continue

        # Operators and punctuation; multi-char operators matched greedily.
        for op in _OPERATORS:
            if file_text.startswith(op, i):
                tokens.append(Token(op, line, col, PUNCT))
                advance(len(op))
                break
        else:
            tokens.append(Token(ch, line, col, PUNCT))
            advance()

    if in_directive:
        directive_spans.append((directive_start, line))

    result = ScanResult(
        tokens=tokens,
        comment_lines=comment_lines,
        code_lines=code_lines,
        comment_ranges=comment_ranges,
        directive_lines=directive_lines,
        directive_spans=directive_spans,
        include_lines=include_lines,
        line_offsets=line_offsets,
        diagnostics=diagnostics,
    )
    return result


def classify_contexts(scan: ScanResult, file_text: str) -> list[Token]:
    """Stamp every token with its program context.

    Tokens inside `//...` or `/*...*/` regions are comment context; tokens on
    a preprocessor directive line (including continuation lines) are macro
    context; everything else is identifier context.
    """
    classified: list[Token] = []
    for tok in scan.tokens:
        offset = scan.line_offsets[tok.line - 1] + tok.col - 1
        if scan.offset_in_comment(offset):
            ctx = CTX_COMMENT
        elif tok.line in scan.directive_lines:
            ctx = CTX_MACRO
        else:
            ctx = CTX_IDENTIFIER
        classified.append(replace(tok, context=ctx))
    return classified


def lex(file_text: str, file_path: str | None = None) -> tuple[list[Token], ScanResult]:
    """Tokenize and classify in one call; returns (tokens, scan regions)."""
    scan = tokenize(file_text, file_path)
    return classify_contexts(scan, file_text), scan


def comment_only_lines(file_text: str) -> set[int]:
    """Lines whose non-whitespace content lies entirely within comments."""
    scan = tokenize(file_text)
    return scan.comment_lines - scan.code_lines


def blank_lines(file_text: str) -> set[int]:
    scan = tokenize(file_text)
    total = set(range(1, len(file_text.splitlines()) + 1))
    return total - scan.comment_lines - scan.code_lines
