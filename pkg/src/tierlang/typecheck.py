"""Tier-free type checking (the plain, tier-erased judgment).

This pass validates base types for the whole program -- the initialization
instruction is held to exactly this standard and nothing more -- and records
the declared type of every variable per context.  Later stages (flattening,
interpretation, tier inference) read types from the resulting ProgramTypes.
"""

from dataclasses import dataclass, field

from .classtable import ClassTable
from .errors import DiagnosticSink
from .operators import lookup as op_lookup
from .syntax import (
    BOOLEAN,
    Assign,
    Call,
    Const,
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

NULL_T = TypeName("$null")


@dataclass
class ProgramTypes:
    """Declared types of variables, keyed by context (signature string)."""

    table: ClassTable
    var_types: dict = field(default_factory=dict)  # (ctx, name) -> TypeName
    ctx_owner: dict = field(default_factory=dict)  # ctx -> class name
    ctx_sig: dict = field(default_factory=dict)  # ctx -> Signature

    def declare(self, ctx: str, name: str, t: TypeName):
        self.var_types[(ctx, name)] = t

    def var_type(self, ctx: str, name: str) -> TypeName | None:
        """Type of a name in a context: local/param first, then field, then this."""
        t = self.var_types.get((ctx, name))
        if t is not None:
            return t
        owner = self.ctx_owner.get(ctx)
        if owner is not None:
            if name == "this":
                return TypeName(owner)
            ft = self.table.field_type(owner, name)
            if ft is not None:
                return ft
        return None

    def is_field(self, ctx: str, name: str) -> bool:
        if (ctx, name) in self.var_types:
            return False
        owner = self.ctx_owner.get(ctx)
        return owner is not None and self.table.field_type(owner, name) is not None


def assignable(src: TypeName, dst: TypeName, table: ClassTable) -> bool:
    if src == dst:
        return True
    if src == NULL_T:
        return dst.is_reference and table.has_class(dst.name)
    if src.is_reference and dst.is_reference:
        return table.subclass_of(src.name, dst.name)
    return False


class TypeChecker:
    """Runs the tier-erased check over every body in the program."""

    def __init__(self, program: Program, table: ClassTable):
        self.program = program
        self.table = table
        self.sink = DiagnosticSink(file=program.source_file)
        self.types = ProgramTypes(table=table)

    def run(self):
        """Returns (ProgramTypes, diagnostics)."""
        for cls in self.program.classes.values():
            for ctor in cls.constructors:
                ctx = ctor_signature(ctor).key()
                self.types.ctx_owner[ctx] = cls.name
                self.types.ctx_sig[ctx] = ctor_signature(ctor)
                self._check_body(ctx, ctor.params, ctor.body)
            for m in cls.methods:
                ctx = method_signature(m).key()
                self.types.ctx_owner[ctx] = cls.name
                self.types.ctx_sig[ctx] = method_signature(m)
                self._check_body(ctx, m.params, m.body)
                if m.return_var is not None:
                    rt = self.types.var_type(ctx, m.return_var)
                    if rt is None:
                        self._err(m.return_line, 0, f"unknown return variable {m.return_var!r}")
                    elif not assignable(rt, m.return_type, self.table):
                        self._err(
                            m.return_line,
                            0,
                            f"return variable {m.return_var!r} has type {rt}, "
                            f"expected {m.return_type}",
                        )
        main_ctx = main_signature(self.program.exe_class).key()
        self.types.ctx_owner[main_ctx] = self.program.exe_class
        self.types.ctx_sig[main_ctx] = main_signature(self.program.exe_class)
        body = Seq(items=[self.program.init] + list(self.program.comp_segments))
        self._check_body(main_ctx, [], body)
        return self.types, self.sink.items

    # ------------------------------------------------------------------

    def _err(self, line, col, message, code="E_TYPE"):
        self.sink.add(line, col, code, message)

    def _valid_type(self, t: TypeName, line, col, allow_void=False) -> bool:
        if t.is_primitive:
            if t.is_void and not allow_void:
                self._err(line, col, "void is not a value type")
                return False
            return True
        if not self.table.has_class(t.name):
            self._err(line, col, f"unknown class {t.name!r}")
            return False
        return True

    def _check_body(self, ctx: str, params, body: Instruction):
        for name, t in params:
            self._valid_type(t, 0, 0)
            self.types.declare(ctx, name, t)
        self._check_instr(ctx, body)

    def _check_instr(self, ctx: str, i: Instruction):
        if isinstance(i, Skip):
            return
        if isinstance(i, Assign):
            et = self.expr_type(ctx, i.expr)
            if i.decl is not None:
                if self._valid_type(i.decl, i.line, i.col):
                    self.types.declare(ctx, i.target, i.decl)
                    if et is not None and not assignable(et, i.decl, self.table):
                        self._err(
                            i.line,
                            i.col,
                            f"cannot assign {et} to {i.decl} {i.target!r}",
                        )
            else:
                tt = self.types.var_type(ctx, i.target)
                if tt is None:
                    self._err(i.line, i.col, f"unknown variable {i.target!r}")
                elif et is not None and not assignable(et, tt, self.table):
                    self._err(
                        i.line,
                        i.col,
                        f"cannot assign {et} to {tt} variable {i.target!r}",
                    )
            return
        if isinstance(i, Seq):
            for item in i.items:
                self._check_instr(ctx, item)
            return
        if isinstance(i, While) or isinstance(i, If):
            gt = self.expr_type(ctx, i.guard)
            if gt is not None and gt != BOOLEAN:
                self._err(i.line, i.col, f"guard must be boolean, found {gt}")
            if isinstance(i, While):
                self._check_instr(ctx, i.body)
            else:
                self._check_instr(ctx, i.then)
                self._check_instr(ctx, i.els)
            return
        if isinstance(i, ExprCall):
            self.expr_type(ctx, i.call)
            return
        raise TypeError(f"unexpected instruction {i!r}")

    # ------------------------------------------------------------------

    def expr_type(self, ctx: str, e: Expression) -> TypeName | None:
        """Synthesizes the base type of an expression, or None after an error."""
        if isinstance(e, Var):
            t = self.types.var_type(ctx, e.name)
            if t is None:
                self._err(e.line, e.col, f"unknown variable {e.name!r}")
            return t
        if isinstance(e, Const):
            return e.type
        if isinstance(e, Null):
            return NULL_T
        if isinstance(e, This):
            owner = self.types.ctx_owner.get(ctx)
            if owner is None:
                self._err(e.line, e.col, "this used outside a class context")
                return None
            return TypeName(owner)
        if isinstance(e, OpApply):
            return self._op_type(ctx, e)
        if isinstance(e, New):
            return self._new_type(ctx, e)
        if isinstance(e, Call):
            return self._call_type(ctx, e)
        raise TypeError(f"unknown expression {e!r}")

    def _op_type(self, ctx: str, e: OpApply) -> TypeName | None:
        spec = op_lookup(e.op)
        if spec is None:
            self._err(e.line, e.col, f"unknown operator {e.op!r}")
            return None
        if len(e.args) != spec.arity:
            self._err(e.line, e.col, f"operator {e.op!r} takes {spec.arity} operands")
            return None
        arg_types = [self.expr_type(ctx, a) for a in e.args]
        if any(t is None for t in arg_types):
            return spec.result
        same: TypeName | None = None
        for kind, t, a in zip(spec.arg_kinds, arg_types, e.args):
            if kind == "same":
                if t != NULL_T:
                    if same is None:
                        same = t
                    elif not (
                        assignable(t, same, self.table)
                        or assignable(same, t, self.table)
                    ):
                        self._err(
                            a.line, a.col, f"operands of {e.op!r} must have one type"
                        )
            elif kind in ("int", "boolean", "char"):
                if t.name != kind:
                    self._err(
                        a.line, a.col, f"operand of {e.op!r} must be {kind}, found {t}"
                    )
        if e.op == "?:":
            return same if same is not None else spec.result
        return spec.result

    def _new_type(self, ctx: str, e: New) -> TypeName | None:
        if not self.table.has_class(e.cls):
            self._err(e.line, e.col, f"unknown class {e.cls!r}")
            return None
        ctor = self.table.resolve_ctor(e.cls, len(e.args))
        if ctor is None:
            self._err(
                e.line,
                e.col,
                f"no {len(e.args)}-argument constructor in class {e.cls!r}",
            )
            return TypeName(e.cls)
        for a, (pname, ptype) in zip(e.args, ctor.params):
            at = self.expr_type(ctx, a)
            if at is not None and not assignable(at, ptype, self.table):
                self._err(
                    a.line,
                    a.col,
                    f"constructor argument {pname!r} expects {ptype}, found {at}",
                )
        return TypeName(e.cls)

    def _call_type(self, ctx: str, e: Call) -> TypeName | None:
        rt = self.expr_type(ctx, e.recv)
        if rt is None:
            return None
        if rt == NULL_T:
            self._err(e.line, e.col, "cannot resolve a method on the null literal")
            return None
        if not rt.is_reference or not self.table.has_class(rt.name):
            self._err(e.line, e.col, f"receiver of {e.method!r} must be an object")
            return None
        m = self.table.resolve(rt.name, e.method, len(e.args))
        if m is None:
            self._err(
                e.line,
                e.col,
                f"no method {e.method!r}/{len(e.args)} reachable from class {rt.name!r}",
            )
            return None
        for a, (pname, ptype) in zip(e.args, m.params):
            at = self.expr_type(ctx, a)
            if at is not None and not assignable(at, ptype, self.table):
                self._err(
                    a.line,
                    a.col,
                    f"argument {pname!r} of {e.method!r} expects {ptype}, found {at}",
                )
        return m.return_type

    def resolve_call(self, ctx: str, e: Call) -> MethodDecl | None:
        """Static resolution of a call's defining method (no diagnostics)."""
        rt = self.expr_type_quiet(ctx, e.recv)
        if rt is None or rt == NULL_T or not rt.is_reference:
            return None
        return self.table.resolve(rt.name, e.method, len(e.args))

    def expr_type_quiet(self, ctx: str, e: Expression) -> TypeName | None:
        before = len(self.sink.items)
        t = self.expr_type(ctx, e)
        del self.sink.items[before:]
        return t


def check_types(program: Program, table: ClassTable):
    """Runs the tier-erased check; returns (ProgramTypes, diagnostics)."""
    return TypeChecker(program, table).run()
