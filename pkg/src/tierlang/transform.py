"""Alpha-renaming and instruction flattening.

Flattening hoists compound subexpressions into fresh `$fN` temporaries so
that every operator, constructor, and call argument is atomic, and every
loop/branch guard is a single variable.  A loop whose guard had to be
hoisted re-evaluates it at the end of the body.  Local and parameter
variables and primitive constants stay in place; field reads, `null`,
`this`, and nested expressions are hoisted (this is the reading of the
flattening equations that reproduces the worked examples).
"""

import copy
from dataclasses import dataclass

from .classtable import ClassTable, build_class_table
from .syntax import (
    BOOLEAN,
    CHAR,
    INT,
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
    ctor_signature,
    main_signature,
    method_signature,
)
from .typecheck import NULL_T, ProgramTypes, TypeChecker


# ---------------------------------------------------------------------------
# Alpha renaming


def alpha_rename(program: Program) -> Program:
    """Returns a copy in which local/parameter names are globally unique.

    A name used by more than one context (or clashing with any field name)
    is renamed to name_1, name_2, ... in declaration order; unique names are
    kept as-is.  Field names are never touched.
    """
    program = copy.deepcopy(program)
    field_names = set()
    for cls in program.classes.values():
        field_names.update(f for f, _ in cls.fields)

    contexts = _context_bodies(program)
    counts: dict[str, int] = {}
    for _, params, body, _ in contexts:
        for name in _declared_names(params, body):
            counts[name] = counts.get(name, 0) + 1

    taken = set(field_names)
    taken.update(n for n, c in counts.items() if c == 1 and n not in field_names)
    suffix: dict[str, int] = {}

    for _, params, body, retvar_setter in contexts:
        mapping = {}
        for name in _declared_names(params, body):
            if counts[name] > 1 or name in field_names:
                k = suffix.get(name, 0) + 1
                candidate = f"{name}_{k}"
                while candidate in taken or candidate in counts:
                    k += 1
                    candidate = f"{name}_{k}"
                suffix[name] = k
                taken.add(candidate)
                mapping[name] = candidate
        if mapping:
            for i, (pname, ptype) in enumerate(params):
                if pname in mapping:
                    params[i] = (mapping[pname], ptype)
            _rename_instr(body, mapping)
            retvar_setter(mapping)
    return program


def _context_bodies(program: Program):
    """Yields (kind, params, body, return-var updater) per context, in order."""
    out = []
    for cls in program.classes.values():
        for ctor in cls.constructors:
            out.append(("ctor", ctor.params, ctor.body, lambda m: None))
        for m in cls.methods:

            def setter(mapping, m=m):
                if m.return_var in mapping:
                    m.return_var = mapping[m.return_var]

            out.append(("method", m.params, m.body, setter))
    main_body = Seq(items=[program.init] + list(program.comp_segments))
    out.append(("main", [], main_body, lambda m: None))
    return out


def _declared_names(params, body):
    names = [n for n, _ in params]
    for i in _iter_instr(body):
        if isinstance(i, Assign) and i.decl is not None:
            names.append(i.target)
    # preserve first-seen order, dropping repeats
    seen = set()
    ordered = []
    for n in names:
        if n not in seen:
            seen.add(n)
            ordered.append(n)
    return ordered


def _iter_instr(i: Instruction):
    yield i
    if isinstance(i, Seq):
        for item in i.items:
            yield from _iter_instr(item)
    elif isinstance(i, While):
        yield from _iter_instr(i.body)
    elif isinstance(i, If):
        yield from _iter_instr(i.then)
        yield from _iter_instr(i.els)


def _rename_expr(e: Expression, mapping):
    if isinstance(e, Var):
        if e.name in mapping:
            e.name = mapping[e.name]
    elif isinstance(e, OpApply):
        for a in e.args:
            _rename_expr(a, mapping)
    elif isinstance(e, New):
        for a in e.args:
            _rename_expr(a, mapping)
    elif isinstance(e, Call):
        _rename_expr(e.recv, mapping)
        for a in e.args:
            _rename_expr(a, mapping)


def _rename_instr(i: Instruction, mapping):
    if isinstance(i, Assign):
        if i.target in mapping:
            i.target = mapping[i.target]
        _rename_expr(i.expr, mapping)
    elif isinstance(i, Seq):
        for item in i.items:
            _rename_instr(item, mapping)
    elif isinstance(i, While):
        _rename_expr(i.guard, mapping)
        _rename_instr(i.body, mapping)
    elif isinstance(i, If):
        _rename_expr(i.guard, mapping)
        _rename_instr(i.then, mapping)
        _rename_instr(i.els, mapping)
    elif isinstance(i, ExprCall):
        _rename_expr(i.call, mapping)


# ---------------------------------------------------------------------------
# Flattening


@dataclass
class FlatProgram:
    """A flattened program together with the tables built over it."""

    program: Program  # flattened bodies, ctx-stamped instructions
    table: ClassTable  # resolves into the flattened declarations
    types: ProgramTypes
    source: Program  # the alpha-renamed, unflattened original
    source_table: ClassTable

    @property
    def init(self) -> Instruction:
        return self.program.init

    @property
    def comp(self) -> Instruction:
        return self.program.comp

    @property
    def comp_segments(self) -> list:
        return self.program.comp_segments

    @property
    def main_ctx(self) -> str:
        return main_signature(self.program.exe_class).key()


class _Fresh:
    """Fresh temporary source, guarded by the $ sigil.

    The counter is shared program-wide so temporaries stay globally unique;
    re-parsing flattened output then needs no further renaming.
    """

    def __init__(self, flattener: "Flattener", ctx: str):
        self.flattener = flattener
        self.types = flattener.types
        self.ctx = ctx

    def make(self, t: TypeName) -> str:
        while True:
            self.flattener.temp_counter += 1
            name = f"$f{self.flattener.temp_counter}"
            if (self.ctx, name) not in self.types.var_types:
                break
        self.types.declare(self.ctx, name, t)
        return name


class Flattener:
    def __init__(self, checker: TypeChecker):
        self.checker = checker
        self.types = checker.types
        self.table = checker.table
        self.temp_counter = 0

    # -- policy --------------------------------------------------------

    def arg_stays(self, ctx: str, e: Expression) -> bool:
        """Operator/constructor/call arguments that need no temporary."""
        if isinstance(e, Const):
            return True
        if isinstance(e, Var):
            return not self.types.is_field(ctx, e.name)
        return False

    def recv_stays(self, e: Expression) -> bool:
        return isinstance(e, (Var, This))

    # -- expressions ----------------------------------------------------

    def _hoist(self, ctx, fresh, e: Expression, expected: TypeName | None):
        """Returns (instructions, atom) with e reduced to a variable."""
        t = expected
        if t is None or t == NULL_T:
            t = self.checker.expr_type_quiet(ctx, e)
        if t is None or t == NULL_T:
            t = TypeName(next(iter(self.table.classes)))
        name = fresh.make(t)
        pre = self.flatten_instr(
            Assign(decl=t, target=name, expr=e, line=e.line, col=e.col), ctx, fresh
        )
        return pre, Var(name=name, line=e.line, col=e.col)

    def _flatten_args(self, ctx, fresh, args, expected_types):
        pre, out = [], []
        for a, exp in zip(args, expected_types):
            if self.arg_stays(ctx, a):
                out.append(a)
            else:
                p, atom = self._hoist(ctx, fresh, a, exp)
                pre.extend(p)
                out.append(atom)
        return pre, out

    def _expected_op_args(self, ctx, e: OpApply):
        from .operators import lookup

        spec = lookup(e.op)
        arg_types = [self.checker.expr_type_quiet(ctx, a) for a in e.args]
        same = None
        for kind, t in zip(spec.arg_kinds, arg_types):
            if kind == "same" and t not in (None, NULL_T):
                same = t
        out = []
        for kind in spec.arg_kinds:
            if kind == "int":
                out.append(INT)
            elif kind == "boolean":
                out.append(BOOLEAN)
            elif kind == "char":
                out.append(CHAR)
            else:
                out.append(same)
        return out

    def flatten_assign(self, ctx, fresh, i: Assign):
        e = i.expr
        if isinstance(e, (Var, Const, Null, This)):
            return [self._mk(i, ctx, i.decl, i.target, e)]
        if isinstance(e, OpApply):
            pre, args = self._flatten_args(
                ctx, fresh, e.args, self._expected_op_args(ctx, e)
            )
            new_e = OpApply(op=e.op, args=args, line=e.line, col=e.col)
            return pre + [self._mk(i, ctx, i.decl, i.target, new_e)]
        if isinstance(e, New):
            ctor = self.table.resolve_ctor(e.cls, len(e.args))
            expected = [t for _, t in ctor.params] if ctor else [None] * len(e.args)
            pre, args = self._flatten_args(ctx, fresh, e.args, expected)
            new_e = New(cls=e.cls, args=args, line=e.line, col=e.col)
            return pre + [self._mk(i, ctx, i.decl, i.target, new_e)]
        if isinstance(e, Call):
            pre = []
            recv = e.recv
            if not self.recv_stays(recv):
                p, recv = self._hoist(ctx, fresh, recv, None)
                pre.extend(p)
            decl = self.checker.resolve_call(ctx, e)
            expected = [t for _, t in decl.params] if decl else [None] * len(e.args)
            p, args = self._flatten_args(ctx, fresh, e.args, expected)
            pre.extend(p)
            new_e = Call(recv=recv, method=e.method, args=args, line=e.line, col=e.col)
            return pre + [self._mk(i, ctx, i.decl, i.target, new_e)]
        raise TypeError(f"unknown expression {e!r}")

    def _mk(self, origin: Assign | None, ctx, decl, target, expr):
        node = Assign(
            decl=decl,
            target=target,
            expr=expr,
            line=origin.line if origin else expr.line,
            col=origin.col if origin else expr.col,
        )
        node.ctx = ctx
        return node

    # -- instructions ----------------------------------------------------

    def flatten_instr(self, i: Instruction, ctx: str, fresh: _Fresh) -> list:
        """Returns the flattened instruction as a list of meta-instructions."""
        if isinstance(i, Skip):
            out = Skip(line=i.line, col=i.col)
            out.ctx = ctx
            return [out]
        if isinstance(i, Assign):
            return self.flatten_assign(ctx, fresh, i)
        if isinstance(i, Seq):
            out = []
            for item in i.items:
                out.extend(self.flatten_instr(item, ctx, fresh))
            return out
        if isinstance(i, ExprCall):
            flat = self.flatten_assign(
                ctx, fresh, Assign(decl=None, target="", expr=i.call, line=i.line, col=i.col)
            )
            last = flat[-1]
            node = ExprCall(call=last.expr, line=i.line, col=i.col)
            node.ctx = ctx
            return flat[:-1] + [node]
        if isinstance(i, While):
            body = self.flatten_instr(i.body, ctx, fresh)
            if isinstance(i.guard, Var):
                node = While(
                    guard=i.guard, body=_seq(body, i.line), line=i.line, col=i.col
                )
                node.ctx = ctx
                return [node]
            gname = fresh.make(BOOLEAN)
            head = self.flatten_instr(
                Assign(decl=BOOLEAN, target=gname, expr=i.guard, line=i.line, col=i.col),
                ctx,
                fresh,
            )
            tail = self.flatten_instr(
                Assign(
                    decl=None,
                    target=gname,
                    expr=copy.deepcopy(i.guard),
                    line=i.line,
                    col=i.col,
                ),
                ctx,
                fresh,
            )
            node = While(
                guard=Var(name=gname, line=i.line, col=i.col),
                body=_seq(body + tail, i.line),
                line=i.line,
                col=i.col,
            )
            node.ctx = ctx
            return head + [node]
        if isinstance(i, If):
            then = _seq(self.flatten_instr(i.then, ctx, fresh), i.line)
            els = _seq(self.flatten_instr(i.els, ctx, fresh), i.line)
            if isinstance(i.guard, Var):
                node = If(guard=i.guard, then=then, els=els, line=i.line, col=i.col)
                node.ctx = ctx
                return [node]
            gname = fresh.make(BOOLEAN)
            head = self.flatten_instr(
                Assign(decl=BOOLEAN, target=gname, expr=i.guard, line=i.line, col=i.col),
                ctx,
                fresh,
            )
            node = If(
                guard=Var(name=gname, line=i.line, col=i.col),
                then=then,
                els=els,
                line=i.line,
                col=i.col,
            )
            node.ctx = ctx
            return head + [node]
        raise TypeError(f"cannot flatten {i!r}")

    def flatten_body(self, i: Instruction, ctx: str) -> Instruction:
        fresh = _Fresh(self, ctx)
        return _seq(self.flatten_instr(i, ctx, fresh), i.line)


def _seq(items: list, line: int) -> Instruction:
    if not items:
        return Skip(line=line)
    if len(items) == 1:
        return items[0]
    node = Seq(items=items, line=items[0].line)
    node.ctx = items[0].ctx
    return node


def flatten_program(program: Program, checker: TypeChecker) -> FlatProgram:
    """Flattens every body; `program` must be alpha-renamed and type-correct."""
    f = Flattener(checker)
    classes = {}
    for cls in program.classes.values():
        ctors = []
        for ctor in cls.constructors:
            ctx = ctor_signature(ctor).key()
            ctors.append(
                ConstructorDecl(
                    cls=ctor.cls,
                    params=list(ctor.params),
                    body=f.flatten_body(ctor.body, ctx),
                    line=ctor.line,
                    col=ctor.col,
                )
            )
        methods = []
        for m in cls.methods:
            ctx = method_signature(m).key()
            methods.append(
                MethodDecl(
                    name=m.name,
                    owner=m.owner,
                    params=list(m.params),
                    return_type=m.return_type,
                    body=f.flatten_body(m.body, ctx),
                    return_var=m.return_var,
                    return_line=m.return_line,
                    line=m.line,
                    col=m.col,
                )
            )
        classes[cls.name] = ClassDecl(
            name=cls.name,
            superclass=cls.superclass,
            fields=list(cls.fields),
            constructors=ctors,
            methods=methods,
            line=cls.line,
            col=cls.col,
        )

    main_ctx = main_signature(program.exe_class).key()
    init = f.flatten_body(program.init, main_ctx)
    segments = [f.flatten_body(seg, main_ctx) for seg in program.comp_segments]

    flat = Program(
        classes=classes,
        exe_class=program.exe_class,
        init=init,
        comp_segments=segments,
        source_file=program.source_file,
    )
    flat_table = build_class_table(flat)
    return FlatProgram(
        program=flat,
        table=flat_table,
        types=checker.types,
        source=program,
        source_table=checker.table,
    )
