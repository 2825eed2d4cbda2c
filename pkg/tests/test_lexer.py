from hypothesis import given, strategies as st

from fex import lexer


def words(tokens):
    return [(t.text, t.line, t.col) for t in tokens if t.kind == lexer.WORD]


def test_empty_input_yields_no_tokens():
    scan = lexer.tokenize("")
    assert scan.tokens == []


def test_signature_token_positions():
    # First line of the running example: every word token carries the exact
    # 1-based line/column of its first character.
    scan = lexer.tokenize("bool parse_command(char* input) {")
    ws = words(scan.tokens)
    assert ("parse_command", 1, 6) in ws
    assert ("input", 1, 26) in ws


def test_three_line_snippet_hand_tokenized():
    # Hand oracle: `int a;` puts a at (1,5); the comment word `note` is
    # emitted; `int b;` puts b at (3,5).
    text = "int a;\n// note\nint b;"
    scan = lexer.tokenize(text)
    ws = words(scan.tokens)
    assert ("a", 1, 5) in ws
    assert ("b", 3, 5) in ws
    assert any(t == ("note", 2, 4) for t in ws)


def test_tokens_in_textual_order():
    scan = lexer.tokenize("int a = f(b) + c;\nint d;\n")
    positions = [(t.line, t.col) for t in scan.tokens]
    assert positions == sorted(positions)


def test_string_and_number_tokens_kinds():
    scan = lexer.tokenize('x = "hello world" + 0x1f + 1.5e-3;')
    kinds = {t.text: t.kind for t in scan.tokens}
    assert kinds['"hello world"'] == lexer.STRING
    assert kinds["0x1f"] == lexer.NUMBER
    assert kinds["1.5e-3"] == lexer.NUMBER
    # words inside string literals never become tokens
    assert "hello" not in kinds


def test_comment_context_classification():
    tokens, _ = lexer.lex("    /* mm or inches */")
    by_text = {t.text: t for t in tokens}
    assert by_text["mm"].context == lexer.CTX_COMMENT
    assert by_text["mm"].line == 1 and by_text["mm"].col == 8
    assert by_text["inches"].context == lexer.CTX_COMMENT


def test_macro_context_classification():
    tokens, _ = lexer.lex("   #define FAIL UNSUPPORTED_COMMAND\n")
    by_text = {t.text: t for t in tokens}
    assert by_text["UNSUPPORTED_COMMAND"].context == lexer.CTX_MACRO
    assert (by_text["UNSUPPORTED_COMMAND"].line, by_text["UNSUPPORTED_COMMAND"].col) == (1, 17)
    assert by_text["FAIL"].context == lexer.CTX_MACRO
    # the directive name itself is syntax, not vocabulary
    assert by_text["define"].directive_keyword


def test_macro_continuation_lines():
    tokens, _ = lexer.lex("#define LONG_MACRO \\\n    alpha + beta\nint gamma;")
    by_text = {t.text: t for t in tokens}
    assert by_text["alpha"].context == lexer.CTX_MACRO
    assert by_text["beta"].context == lexer.CTX_MACRO
    assert by_text["gamma"].context == lexer.CTX_IDENTIFIER


def test_plain_code_is_identifier_context():
    tokens, _ = lexer.lex("int width = 3;")
    by_text = {t.text: t for t in tokens}
    assert by_text["width"].context == lexer.CTX_IDENTIFIER


def test_unterminated_block_comment_diagnosed():
    tokens, scan = lexer.lex("int a;\n/* trailing words\nkeep going")
    assert any("unterminated block comment" in d for d in scan.diagnostics)
    by_text = {t.text: t for t in tokens}
    assert by_text["trailing"].context == lexer.CTX_COMMENT
    assert by_text["going"].context == lexer.CTX_COMMENT


def test_multi_char_operators_lex_whole():
    scan = lexer.tokenize("a->b >>= c; d != e;")
    punct = [t.text for t in scan.tokens if t.kind == lexer.PUNCT]
    assert "->" in punct and ">>=" in punct and "!=" in punct


def test_comment_only_and_blank_lines():
    text = "int a;\n\n// just a comment\nint b; // tail comment\n   /* boxed */\n"
    assert lexer.comment_only_lines(text) == {3, 5}
    assert lexer.blank_lines(text) == {2}


def test_include_lines_tracked():
    scan = lexer.tokenize('#include "counters.h"\n#define X 1\n')
    assert scan.include_lines == {1}
    assert scan.directive_lines == {1, 2}
    assert scan.directive_spans == [(1, 1), (2, 2)]


_source_text = st.text(
    alphabet=st.sampled_from(
        list("abcXY_09 \t\n;(){}*/=+-<>!&|,.\"'#\\")
    ),
    max_size=200,
)


@given(_source_text)
def test_every_token_points_at_its_own_text(text):
    # lexing is total, and every token's 1-based (line, col) addresses the
    # exact spot of its first character in the source
    scan = lexer.tokenize(text)
    lines = text.split("\n")
    for tok in scan.tokens:
        if tok.kind == lexer.STRING:
            continue  # strings may be cut short at EOL on unterminated input
        line = lines[tok.line - 1]
        assert line[tok.col - 1 : tok.col - 1 + len(tok.text)] == tok.text


@given(_source_text)
def test_classification_is_total_and_single_valued(text):
    tokens, _scan = lexer.lex(text)
    for tok in tokens:
        assert tok.context in (
            lexer.CTX_IDENTIFIER, lexer.CTX_COMMENT, lexer.CTX_MACRO
        )
