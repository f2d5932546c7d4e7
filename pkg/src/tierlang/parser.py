"""Recursive-descent parser producing a Program AST.

The concrete grammar is documented in docs/grammar.md.  It is Java-flavored:
classes need no `class` keyword (one is tolerated), assignment is written
`:=` (a bare `=` is tolerated), and there is no field-access operator; the
only postfix form is a method call.
"""

from .errors import Diagnostic, ParseError
from .lexer import Token, tokenize
from .syntax import (
    BOOLEAN,
    CHAR,
    INT,
    PRIMITIVE_TYPES,
    Assign,
    Call,
    ClassDecl,
    Const,
    ConstructorDecl,
    Expression,
    ExprCall,
    If,
    Instruction,
    MethodDecl,
    New,
    Null,
    OpApply,
    Program,
    Seq,
    Skip,
    This,
    TypeName,
    Var,
    While,
)

_COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")


class Parser:
    def __init__(self, source: str, filename: str = "<input>"):
        self.filename = filename
        self.tokens, self.comp_markers = tokenize(source, filename)
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        idx = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.cur
        raise ParseError(Diagnostic(self.filename, tok.line, tok.col, "E_PARSE", msg))

    def expect(self, text: str) -> Token:
        if self.cur.text != text or self.cur.kind not in ("sym", "kw"):
            self.error(f"expected {text!r}, found {self.cur.text!r}")
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.cur.kind in ("sym", "kw") and self.cur.text == text:
            self.advance()
            return True
        return False

    def expect_ident(self) -> Token:
        if self.cur.kind != "id":
            self.error(f"expected identifier, found {self.cur.text!r}")
        return self.advance()

    def at_assign_op(self) -> bool:
        return self.cur.kind == "sym" and self.cur.text in (":=", "=")

    # -- entry point --------------------------------------------------------

    def parse_program(self) -> Program:
        classes = {}
        mains = []
        while self.cur.kind != "eof":
            cls, main = self.parse_class()
            if cls.name in classes:
                self.error(f"duplicate class {cls.name!r}")
            classes[cls.name] = cls
            if main is not None:
                mains.append((cls.name, main))
        if not classes:
            self.error("empty program")
        if not mains:
            self.error("no executable class: a `void main()` method is required")
        if len(mains) > 1:
            self.error("more than one executable class declares `void main()`")
        exe, (init, segments) = mains[0][0], mains[0][1]
        return Program(
            classes=classes,
            exe_class=exe,
            init=init,
            comp_segments=segments,
            source_file=self.filename,
        )

    # -- declarations -------------------------------------------------------

    def parse_class(self):
        while self.cur.kind == "kw" and self.cur.text in ("public", "private", "class"):
            self.advance()
        name_tok = self.expect_ident()
        superclass = None
        if self.accept("extends"):
            superclass = self.expect_ident().text
        self.expect("{")

        fields, ctors, methods = [], [], []
        main = None
        while not self.accept("}"):
            if self.cur.kind == "eof":
                self.error("unterminated class body")
            while self.cur.kind == "kw" and self.cur.text in ("public", "private"):
                self.advance()
            if self.cur.kind == "id" and self.cur.text == name_tok.text and self.peek().text == "(":
                ctors.append(self.parse_constructor(name_tok.text))
                continue
            tname = self.parse_type()
            member = self.expect_ident()
            if self.accept(";"):
                fields.append((member.text, tname))
                continue
            if self.cur.text != "(":
                self.error("expected ';' or '(' after member name")
            if member.text == "main" and tname.is_void:
                main = self.parse_main_method(member)
                continue
            methods.append(self.parse_method(name_tok.text, tname, member))

        cls = ClassDecl(
            name=name_tok.text,
            superclass=superclass,
            fields=fields,
            constructors=ctors,
            methods=methods,
            line=name_tok.line,
            col=name_tok.col,
        )
        return cls, main

    def parse_type(self) -> TypeName:
        tok = self.cur
        if tok.kind == "id" or tok.text in PRIMITIVE_TYPES:
            self.advance()
            return TypeName(tok.text)
        self.error(f"expected type name, found {tok.text!r}")

    def parse_params(self):
        self.expect("(")
        params = []
        if not self.accept(")"):
            while True:
                t = self.parse_type()
                n = self.expect_ident()
                params.append((n.text, t))
                if self.accept(")"):
                    break
                self.expect(",")
        return params

    def parse_constructor(self, cls: str) -> ConstructorDecl:
        name = self.expect_ident()
        params = self.parse_params()
        self.expect("{")
        body, ret = self.parse_statements(allow_return=False)
        assert ret is None
        return ConstructorDecl(
            cls=cls, params=params, body=body, line=name.line, col=name.col
        )

    def parse_method(self, owner: str, rtype: TypeName, name: Token) -> MethodDecl:
        params = self.parse_params()
        self.expect("{")
        body, ret = self.parse_statements(allow_return=True)
        return MethodDecl(
            name=name.text,
            owner=owner,
            params=params,
            return_type=rtype,
            body=body,
            return_var=ret[0] if ret else None,
            return_line=ret[1] if ret else 0,
            line=name.line,
            col=name.col,
        )

    def parse_main_method(self, name: Token):
        params = self.parse_params()
        if params:
            self.error("main() takes no parameters", name)
        open_tok = self.expect("{")
        stmts, ret = self.parse_statements(allow_return=False, keep_list=True)
        del ret
        close_tok = self.tokens[self.pos - 1]
        lo = (open_tok.line, open_tok.col)
        hi = (close_tok.line, close_tok.col)
        markers = [m for m in self.comp_markers if lo <= m <= hi]
        if not markers:
            self.error("missing //Comp marker in main()", name)
        segments = _split_by_markers(stmts, markers)
        init = _as_instruction(segments[0], name.line)
        comps = [_as_instruction(seg, name.line) for seg in segments[1:]]
        if not comps:
            comps = [Skip(line=name.line)]
        return init, comps

    # -- statements ---------------------------------------------------------

    def parse_statements(self, allow_return: bool, keep_list: bool = False):
        stmts = []
        ret = None
        while not self.accept("}"):
            if self.cur.kind == "eof":
                self.error("unterminated block")
            if self.cur.kind == "kw" and self.cur.text == "return":
                if not allow_return:
                    self.error("return is only allowed at the end of a method body")
                tok = self.advance()
                var = self.expect_ident()
                self.expect(";")
                ret = (var.text, tok.line)
                self.expect("}")
                break
            stmts.append(self.parse_statement())
        if keep_list:
            return stmts, ret
        return _as_instruction(stmts, self.cur.line), ret

    def parse_statement(self) -> Instruction:
        tok = self.cur
        if tok.text == ";":
            self.advance()
            return Skip(line=tok.line, col=tok.col)
        if tok.text == "while":
            self.advance()
            self.expect("(")
            guard = self.parse_expression()
            self.expect(")")
            self.expect("{")
            body, _ = self.parse_statements(allow_return=False)
            return While(guard=guard, body=body, line=tok.line, col=tok.col)
        if tok.text == "if":
            self.advance()
            self.expect("(")
            guard = self.parse_expression()
            self.expect(")")
            self.expect("{")
            then, _ = self.parse_statements(allow_return=False)
            if self.accept("else"):
                self.expect("{")
                els, _ = self.parse_statements(allow_return=False)
            else:
                els = Skip(line=tok.line, col=tok.col)
            return If(guard=guard, then=then, els=els, line=tok.line, col=tok.col)

        # typed declaration: Type ident :=/= expr ;
        if (
            tok.kind == "id" or (tok.kind == "kw" and tok.text in PRIMITIVE_TYPES)
        ) and self.peek().kind == "id":
            decl_type = self.parse_type()
            name = self.expect_ident()
            if not self.at_assign_op():
                self.error("expected ':=' in declaration")
            self.advance()
            expr = self.parse_expression()
            self.expect(";")
            return Assign(
                decl=decl_type, target=name.text, expr=expr, line=tok.line, col=tok.col
            )

        # plain assignment: ident :=/= expr ;
        if tok.kind == "id" and self.peek().kind == "sym" and self.peek().text in (":=", "="):
            name = self.advance()
            self.advance()
            expr = self.parse_expression()
            self.expect(";")
            return Assign(
                decl=None, target=name.text, expr=expr, line=tok.line, col=tok.col
            )

        # otherwise it must be a call statement
        expr = self.parse_expression()
        self.expect(";")
        if not isinstance(expr, Call):
            self.error("only method calls may be used as statements", tok)
        return ExprCall(call=expr, line=tok.line, col=tok.col)

    # -- expressions --------------------------------------------------------

    def parse_expression(self) -> Expression:
        return self.parse_ternary()

    def parse_ternary(self) -> Expression:
        cond = self.parse_or()
        if self.cur.text == "?" and self.cur.kind == "sym":
            tok = self.advance()
            then = self.parse_or()
            self.expect(":")
            els = self.parse_or()
            return OpApply(op="?:", args=[cond, then, els], line=tok.line, col=tok.col)
        return cond

    def _binop_chain(self, sub, ops):
        left = sub()
        while self.cur.kind == "sym" and self.cur.text in ops:
            tok = self.advance()
            right = sub()
            left = _make_op(tok.text, left, right, tok)
        return left

    def parse_or(self):
        return self._binop_chain(self.parse_and, ("||",))

    def parse_and(self):
        return self._binop_chain(self.parse_equality, ("&&",))

    def parse_equality(self):
        return self._binop_chain(self.parse_relational, ("==", "!="))

    def parse_relational(self):
        return self._binop_chain(self.parse_additive, ("<", "<=", ">", ">="))

    def parse_additive(self):
        return self._binop_chain(self.parse_multiplicative, ("+", "-"))

    def parse_multiplicative(self):
        return self._binop_chain(self.parse_unary, ("*", "/", "%"))

    def parse_unary(self) -> Expression:
        if self.cur.kind == "sym" and self.cur.text == "!":
            tok = self.advance()
            inner = self.parse_unary()
            return OpApply(op="!", args=[inner], line=tok.line, col=tok.col)
        return self.parse_postfix()

    def parse_postfix(self) -> Expression:
        expr = self.parse_primary()
        while self.cur.kind == "sym" and self.cur.text == ".":
            dot = self.advance()
            name = self.expect_ident()
            if self.cur.text != "(":
                self.error(
                    "field access is not part of the language; write a getter",
                    dot,
                )
            self.expect("(")
            args = self.parse_args()
            expr = Call(
                recv=expr, method=name.text, args=args, line=dot.line, col=dot.col
            )
        return expr

    def parse_args(self):
        args = []
        if not self.accept(")"):
            while True:
                args.append(self.parse_expression())
                if self.accept(")"):
                    break
                self.expect(",")
        return args

    def parse_primary(self) -> Expression:
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            return Const(value=int(tok.text), type=INT, line=tok.line, col=tok.col)
        if tok.kind == "char":
            self.advance()
            return Const(value=tok.text, type=CHAR, line=tok.line, col=tok.col)
        if tok.kind == "kw":
            if tok.text == "true" or tok.text == "false":
                self.advance()
                return Const(
                    value=tok.text == "true", type=BOOLEAN, line=tok.line, col=tok.col
                )
            if tok.text == "null":
                self.advance()
                return Null(line=tok.line, col=tok.col)
            if tok.text == "this":
                self.advance()
                return This(line=tok.line, col=tok.col)
            if tok.text == "new":
                self.advance()
                cls = self.expect_ident()
                self.expect("(")
                args = self.parse_args()
                return New(cls=cls.text, args=args, line=tok.line, col=tok.col)
        if tok.kind == "id":
            self.advance()
            return Var(name=tok.text, line=tok.line, col=tok.col)
        if tok.text == "(":
            self.advance()
            inner = self.parse_expression()
            self.expect(")")
            return inner
        self.error(f"expected expression, found {tok.text!r}")


def _make_op(op: str, left: Expression, right: Expression, tok: Token) -> Expression:
    # `x + k` with a literal k is the positive partial-application operator
    # +k; bare + over two non-literal ints is untypable but still evaluable.
    if op == "+":
        if isinstance(right, Const) and right.type == INT:
            return OpApply(op=f"+{right.value}", args=[left], line=tok.line, col=tok.col)
        if isinstance(left, Const) and left.type == INT:
            return OpApply(op=f"+{left.value}", args=[right], line=tok.line, col=tok.col)
    return OpApply(op=op, args=[left, right], line=tok.line, col=tok.col)


def _as_instruction(stmts: list, line: int) -> Instruction:
    if not stmts:
        return Skip(line=line)
    if len(stmts) == 1:
        return stmts[0]
    return Seq(items=list(stmts), line=stmts[0].line)


def _split_by_markers(stmts: list, markers: list) -> list:
    segments = [[]]
    remaining = list(markers)
    for s in stmts:
        while remaining and (s.line, s.col) > remaining[0]:
            segments.append([])
            remaining.pop(0)
        segments[-1].append(s)
    while remaining:
        segments.append([])
        remaining.pop(0)
    return segments


def parse(source: str, filename: str = "<input>") -> Program:
    """Parses source text into a Program (the frontend entry point)."""
    return Parser(source, filename).parse_program()
