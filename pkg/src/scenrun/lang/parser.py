"""Recursive-descent parser producing :class:`~scenrun.lang.ast.Node` trees.

Grammar (INDENT/DEDENT/NEWLINE come from the lexer)::

    file        := import* decl*
    import      := "import" dotted_name NEWLINE
    decl        := scenario | actor_decl | struct_decl | action_decl
    scenario    := "scenario" IDENT ":" NEWLINE INDENT (field | do_dir)+ DEDENT
    actor_decl  := "actor" IDENT ["inherits" dotted_name] (":" fields | NEWLINE)
    struct_decl := "struct" IDENT ["inherits" dotted_name] (":" fields | NEWLINE)
    action_decl := "action" dotted_name ["inherits" dotted_name] (":" fields | NEWLINE)
    fields      := NEWLINE INDENT field+ DEDENT
    field       := IDENT ":" ["list" "of"] dotted_name ["=" expr] NEWLINE
    do_dir      := "do" composition
    composition := ("serial" | "parallel") ":" NEWLINE INDENT behavior+ DEDENT
    behavior    := [IDENT ":"] (composition | invocation | wait_st | emit_st)
    invocation  := dotted_name "(" [arg ("," arg)*] ")" (with_blk | NEWLINE)
    with_blk    := "with" ":" NEWLINE INDENT keep+ DEDENT
    keep        := "keep" "(" "it" "." IDENT ("==" | "in") expr ")" NEWLINE
    wait_st     := "wait" expr NEWLINE
    emit_st     := "emit" IDENT NEWLINE
    arg         := [IDENT ":"] expr
    expr        := literal | list | dotted_name ["(" [arg ("," arg)*] ")"]
"""

from __future__ import annotations

from typing import Iterable

from .ast import Node, NodeKind
from .diagnostics import Diagnostic, OscError
from .lexer import Token, TokenKind, decode_string, tokenize


class ParseError(OscError):
    pass


class _Fail(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


def _describe(tok: Token) -> str:
    if tok.kind in (TokenKind.NEWLINE, TokenKind.INDENT, TokenKind.DEDENT, TokenKind.EOF):
        return {
            TokenKind.NEWLINE: "end of line",
            TokenKind.INDENT: "indentation",
            TokenKind.DEDENT: "end of block",
            TokenKind.EOF: "end of file",
        }[tok.kind]
    return f"{tok.kind.value} {tok.text!r}"


_DECL_KEYWORDS = ("scenario", "actor", "struct", "action")


class Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind is not TokenKind.EOF:
            raise ValueError("token stream must end with EOF")
        self.toks = tokens
        self.i = 0
        self.errors: list[Diagnostic] = []

    # -- token helpers -------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else self.toks[-1]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind is not TokenKind.EOF:
            self.i += 1
        return tok

    def fail(self, expected: Iterable[str], tok: Token | None = None) -> _Fail:
        tok = tok or self.peek()
        exp = ", ".join(sorted(set(expected)))
        return _Fail(Diagnostic(f"unexpected {_describe(tok)}; expected {exp}", tok.span))

    def expect_op(self, text: str) -> Token:
        if not self.peek().is_op(text):
            raise self.fail([repr(text)])
        return self.advance()

    def expect_kw(self, text: str) -> Token:
        if not self.peek().is_kw(text):
            raise self.fail([repr(text)])
        return self.advance()

    def expect(self, kind: TokenKind, what: str) -> Token:
        if self.peek().kind is not kind:
            raise self.fail([what])
        return self.advance()

    def sync(self) -> None:
        """Skip the rest of the current statement, including any nested block."""
        depth = 0
        while self.peek().kind is not TokenKind.EOF:
            tok = self.peek()
            if tok.kind is TokenKind.DEDENT:
                if depth == 0:
                    return
                depth -= 1
                self.advance()
                if depth == 0 and self.peek().kind is not TokenKind.INDENT:
                    return
                continue
            self.advance()
            if tok.kind is TokenKind.INDENT:
                depth += 1
            elif tok.kind is TokenKind.NEWLINE and depth == 0 and self.peek().kind is not TokenKind.INDENT:
                return

    # -- file level ----------------------------------------------------

    def parse_file(self) -> Node:
        root = Node(NodeKind.File, self.peek().span)
        seen_decl = False
        while self.peek().kind is not TokenKind.EOF:
            tok = self.peek()
            try:
                if tok.kind in (TokenKind.NEWLINE, TokenKind.DEDENT):
                    self.advance()
                elif tok.is_kw("import"):
                    node = self.parse_import()
                    if seen_decl:
                        self.errors.append(Diagnostic("import must precede all declarations", tok.span))
                    root.children.append(node)
                elif tok.kind is TokenKind.KEYWORD and tok.text in _DECL_KEYWORDS:
                    seen_decl = True
                    root.children.append(self.parse_decl())
                elif tok.kind is TokenKind.INDENT:
                    self.errors.append(Diagnostic("unexpected indentation at top level", tok.span))
                    self.advance()
                    self.sync()
                else:
                    self.errors.append(
                        Diagnostic(f"statement outside any scenario or declaration: {_describe(tok)}", tok.span)
                    )
                    self.sync()
            except _Fail as f:
                self.errors.append(f.diagnostic)
                self.sync()
        return root

    def parse_import(self) -> Node:
        start = self.expect_kw("import")
        name = self.parse_dotted()
        self.expect(TokenKind.NEWLINE, "end of line")
        return Node(NodeKind.Import, start.span, {"name": name})

    def parse_dotted(self) -> str:
        parts = [self.expect(TokenKind.IDENTIFIER, "identifier").text]
        while self.peek().is_op(".") and self.peek(1).kind is TokenKind.IDENTIFIER:
            self.advance()
            parts.append(self.advance().text)
        return ".".join(parts)

    def parse_decl(self) -> Node:
        tok = self.advance()
        if tok.text == "scenario":
            return self.parse_scenario(tok)
        kind = {"actor": NodeKind.ActorDecl, "struct": NodeKind.StructDecl, "action": NodeKind.ActionDecl}[tok.text]
        if kind is NodeKind.ActionDecl:
            name = self.parse_dotted()
        else:
            name = self.expect(TokenKind.IDENTIFIER, "identifier").text
        node = Node(kind, tok.span, {"name": name})
        if self.peek().is_kw("inherits"):
            self.advance()
            node.attrs["inherits"] = self.parse_dotted()
        if self.peek().kind is TokenKind.NEWLINE:
            self.advance()
            return node
        self.expect_op(":")
        self.expect(TokenKind.NEWLINE, "end of line")
        self.expect(TokenKind.INDENT, "indented block")
        while self.peek().kind not in (TokenKind.DEDENT, TokenKind.EOF):
            try:
                node.children.append(self.parse_field())
            except _Fail as f:
                self.errors.append(f.diagnostic)
                self.sync()
        self.expect(TokenKind.DEDENT, "end of block")
        return node

    def parse_field(self) -> Node:
        name_tok = self.expect(TokenKind.IDENTIFIER, "field name")
        self.expect_op(":")
        node = Node(NodeKind.FieldDecl, name_tok.span, {"name": name_tok.text})
        a, b = self.peek(), self.peek(1)
        if a.kind is TokenKind.IDENTIFIER and a.text == "list" and b.kind is TokenKind.IDENTIFIER and b.text == "of":
            self.advance()
            self.advance()
            node.attrs["list"] = "true"
        node.attrs["type"] = self.parse_dotted()
        if self.peek().is_op("="):
            self.advance()
            node.children.append(self.parse_expr())
        self.expect(TokenKind.NEWLINE, "end of line")
        return node

    def parse_scenario(self, start: Token) -> Node:
        name = self.expect(TokenKind.IDENTIFIER, "scenario name").text
        node = Node(NodeKind.ScenarioDecl, start.span, {"name": name})
        self.expect_op(":")
        self.expect(TokenKind.NEWLINE, "end of line")
        self.expect(TokenKind.INDENT, "indented block")
        seen_do = False
        while self.peek().kind not in (TokenKind.DEDENT, TokenKind.EOF):
            tok = self.peek()
            try:
                if tok.is_kw("do"):
                    self.advance()
                    directive = Node(NodeKind.DoDirective, tok.span, {}, [self.parse_composition()])
                    if seen_do:
                        self.errors.append(
                            Diagnostic(f"'do' directive appears more than once in scenario {name!r}", tok.span)
                        )
                    seen_do = True
                    node.children.append(directive)
                elif tok.kind is TokenKind.IDENTIFIER and self.peek(1).is_op(":"):
                    node.children.append(self.parse_field())
                else:
                    raise self.fail(["field declaration", "'do'"])
            except _Fail as f:
                self.errors.append(f.diagnostic)
                self.sync()
        self.expect(TokenKind.DEDENT, "end of block")
        return node

    # -- behaviors -------------------------------------------------------

    def parse_composition(self, label: str | None = None) -> Node:
        tok = self.peek()
        if not (tok.is_kw("serial") or tok.is_kw("parallel")):
            raise self.fail(["'serial'", "'parallel'"])
        self.advance()
        node = Node(NodeKind.Composition, tok.span, {"operator": tok.text})
        if label is not None:
            node.attrs["label"] = label
        self.expect_op(":")
        self.expect(TokenKind.NEWLINE, "end of line")
        self.expect(TokenKind.INDENT, "indented block")
        while self.peek().kind not in (TokenKind.DEDENT, TokenKind.EOF):
            try:
                node.children.append(self.parse_behavior())
            except _Fail as f:
                self.errors.append(f.diagnostic)
                self.sync()
        self.expect(TokenKind.DEDENT, "end of block")
        return node

    def parse_behavior(self) -> Node:
        label = None
        tok = self.peek()
        if tok.kind is TokenKind.IDENTIFIER and self.peek(1).is_op(":"):
            label = tok.text
            self.advance()
            self.advance()
            tok = self.peek()
        if tok.is_kw("serial") or tok.is_kw("parallel"):
            return self.parse_composition(label)
        if tok.is_kw("wait"):
            self.advance()
            node = Node(NodeKind.WaitStatement, tok.span, {}, [self.parse_expr()])
            self.expect(TokenKind.NEWLINE, "end of line")
        elif tok.is_kw("emit"):
            self.advance()
            event = self.expect(TokenKind.IDENTIFIER, "event name")
            node = Node(NodeKind.EmitStatement, tok.span, {"event": event.text})
            self.expect(TokenKind.NEWLINE, "end of line")
        elif tok.kind is TokenKind.IDENTIFIER:
            node = self.parse_invocation()
            if self.peek().is_kw("with"):
                node.children.append(self.parse_with())
            else:
                self.expect(TokenKind.NEWLINE, "end of line")
        else:
            raise self.fail(["'serial'", "'parallel'", "'wait'", "'emit'", "action invocation", "label"])
        if label is not None:
            node.attrs["label"] = label
        return node

    def parse_invocation(self) -> Node:
        tok = self.peek()
        name = self.parse_dotted()
        node = Node(NodeKind.Invocation, tok.span, {"name": name})
        self.expect_op("(")
        if not self.peek().is_op(")"):
            while True:
                node.children.append(self.parse_arg())
                if not self.peek().is_op(","):
                    break
                self.advance()
                if self.peek().is_op(")"):
                    break
        self.expect_op(")")
        return node

    def parse_arg(self) -> Node:
        tok = self.peek()
        if tok.kind is TokenKind.IDENTIFIER and self.peek(1).is_op(":"):
            self.advance()
            self.advance()
            return Node(NodeKind.NamedArgument, tok.span, {"name": tok.text}, [self.parse_expr()])
        return self.parse_expr()

    def parse_with(self) -> Node:
        tok = self.expect_kw("with")
        node = Node(NodeKind.WithBlock, tok.span)
        self.expect_op(":")
        self.expect(TokenKind.NEWLINE, "end of line")
        self.expect(TokenKind.INDENT, "indented block")
        while self.peek().kind not in (TokenKind.DEDENT, TokenKind.EOF):
            try:
                node.children.append(self.parse_keep())
            except _Fail as f:
                self.errors.append(f.diagnostic)
                self.sync()
        self.expect(TokenKind.DEDENT, "end of block")
        return node

    def parse_keep(self) -> Node:
        tok = self.expect_kw("keep")
        self.expect_op("(")
        self.expect_kw("it")
        self.expect_op(".")
        field_tok = self.expect(TokenKind.IDENTIFIER, "parameter name")
        rel = self.peek()
        if rel.is_op("=="):
            relation = "=="
        elif rel.is_kw("in"):
            relation = "in"
        else:
            raise self.fail(["'=='", "'in'"])
        self.advance()
        value = self.parse_expr()
        self.expect_op(")")
        self.expect(TokenKind.NEWLINE, "end of line")
        return Node(NodeKind.KeepConstraint, tok.span, {"field": field_tok.text, "relation": relation}, [value])

    # -- expressions -----------------------------------------------------

    def parse_expr(self) -> Node:
        tok = self.peek()
        if tok.kind is TokenKind.STRING:
            self.advance()
            return Node(NodeKind.Literal, tok.span, {"type": "string", "value": decode_string(tok.text)})
        if tok.kind is TokenKind.NUMBER:
            self.advance()
            return Node(NodeKind.Literal, tok.span, {"type": "number", "text": tok.text})
        if tok.kind is TokenKind.PHYSICAL_LITERAL:
            self.advance()
            return Node(NodeKind.Literal, tok.span, {"type": "physical", "text": tok.number_text, "unit": tok.unit})
        if tok.is_op("["):
            self.advance()
            node = Node(NodeKind.ListLiteral, tok.span)
            node.children.append(self.parse_expr())
            while self.peek().is_op(","):
                self.advance()
                if self.peek().is_op("]"):
                    break
                node.children.append(self.parse_expr())
            self.expect_op("]")
            return node
        if tok.kind is TokenKind.IDENTIFIER:
            if self._is_call_ahead():
                return self.parse_invocation()
            return Node(NodeKind.MemberRef, tok.span, {"name": self.parse_dotted()})
        raise self.fail(["literal", "list", "name"])

    def _is_call_ahead(self) -> bool:
        j = 1
        while self.peek(j).is_op(".") and self.peek(j + 1).kind is TokenKind.IDENTIFIER:
            j += 2
        return self.peek(j).is_op("(")


def parse(tokens: list[Token]) -> Node:
    """Parse a token stream into a File node; raises ParseError."""
    parser = Parser(tokens)
    root = parser.parse_file()
    if parser.errors:
        raise ParseError(parser.errors)
    return root


def parse_source(source: str | bytes, file: str = "<input>") -> Node:
    """Tokenize and parse in one go. Bytes must decode as UTF-8."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            from .diagnostics import SourceSpan

            raise ParseError([Diagnostic(f"source is not valid UTF-8: {exc.reason}", SourceSpan(file, 1, 1))])
    return parse(tokenize(source, file))
