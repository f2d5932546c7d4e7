"""AST for the abstract object-oriented language, plus printing and sizing.

Instruction nodes compare by identity: the interpreter, the call graph and
the constraint encoder all key tables on particular occurrences, so two
structurally equal instructions must stay distinguishable.
"""

import itertools
from dataclasses import dataclass, field

PRIMITIVE_TYPES = ("void", "boolean", "int", "char")


@dataclass(frozen=True)
class TypeName:
    """A base type: one of the fixed primitives or a class name."""

    name: str

    @property
    def is_primitive(self) -> bool:
        return self.name in PRIMITIVE_TYPES

    @property
    def is_reference(self) -> bool:
        return self.name not in PRIMITIVE_TYPES

    @property
    def is_void(self) -> bool:
        return self.name == "void"

    def __str__(self) -> str:
        return self.name


VOID = TypeName("void")
BOOLEAN = TypeName("boolean")
INT = TypeName("int")
CHAR = TypeName("char")


# ---------------------------------------------------------------------------
# Expressions


@dataclass(eq=False)
class Expression:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)


@dataclass(eq=False)
class Var(Expression):
    name: str = ""


@dataclass(eq=False)
class Const(Expression):
    """Primitive constant with its literal type."""

    value: object = None
    type: TypeName = BOOLEAN


@dataclass(eq=False)
class Null(Expression):
    pass


@dataclass(eq=False)
class This(Expression):
    pass


@dataclass(eq=False)
class OpApply(Expression):
    op: str = ""
    args: list = field(default_factory=list)


@dataclass(eq=False)
class New(Expression):
    cls: str = ""
    args: list = field(default_factory=list)


@dataclass(eq=False)
class Call(Expression):
    recv: Expression = None
    method: str = ""
    args: list = field(default_factory=list)


def is_atomic(e: Expression) -> bool:
    """Expressions the flattener may keep in place of a variable."""
    return isinstance(e, (Var, Const, Null, This))


# ---------------------------------------------------------------------------
# Instructions

# itertools.count is atomic under CPython, so concurrent runs that expand
# calls (allocating runtime instruction nodes) cannot collide on uids
_uid_counter = itertools.count(1)


def _next_uid() -> int:
    return next(_uid_counter)


@dataclass(eq=False)
class Instruction:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)
    # context key (owning method/constructor/main), stamped by the flattener
    ctx: str = field(default="", kw_only=True)
    uid: int = field(default_factory=_next_uid, kw_only=True)


@dataclass(eq=False)
class Skip(Instruction):
    pass


@dataclass(eq=False)
class Assign(Instruction):
    decl: TypeName | None = None
    target: str = ""
    expr: Expression = None


@dataclass(eq=False)
class Seq(Instruction):
    items: list = field(default_factory=list)


@dataclass(eq=False)
class While(Instruction):
    guard: Expression = None
    body: Instruction = None


@dataclass(eq=False)
class If(Instruction):
    guard: Expression = None
    then: Instruction = None
    els: Instruction = None


@dataclass(eq=False)
class ExprCall(Instruction):
    """A method call used as a statement."""

    call: Call = None


# Runtime-only meta-instructions.  They never occur in flattened source; the
# interpreter materializes them while expanding method and constructor calls.


@dataclass(eq=False)
class PushMark(Instruction):
    frame: object = None


@dataclass(eq=False)
class PopMark(Instruction):
    pass


@dataclass(eq=False)
class RetAssign(Instruction):
    """Copies the callee's return variable into a caller variable.

    Executes while the callee frame is still on top: the value is read there
    and written one frame below, which is what makes returned values visible
    to the caller.
    """

    target: str = ""
    retvar: str = ""
    caller_ctx: str = ""
    callee_ctx: str = ""


# ---------------------------------------------------------------------------
# Declarations


@dataclass(eq=False)
class ConstructorDecl:
    cls: str
    params: list  # [(name, TypeName)]
    body: Instruction
    line: int = 0
    col: int = 0


@dataclass(eq=False)
class MethodDecl:
    name: str
    owner: str
    params: list  # [(name, TypeName)]
    return_type: TypeName
    body: Instruction
    return_var: str | None = None
    return_line: int = 0
    line: int = 0
    col: int = 0


@dataclass(eq=False)
class ClassDecl:
    name: str
    superclass: str | None
    fields: list  # [(name, TypeName)] declared in this class only
    constructors: list
    methods: list
    line: int = 0
    col: int = 0


@dataclass(eq=False)
class Program:
    """A class collection plus the split main body of the executable class."""

    classes: dict  # name -> ClassDecl, insertion ordered
    exe_class: str
    init: Instruction
    comp_segments: list  # one Instruction per //Comp segment
    source_file: str = "<input>"

    @property
    def comp(self) -> Instruction:
        if len(self.comp_segments) == 1:
            return self.comp_segments[0]
        return Seq(items=list(self.comp_segments))


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True)
class Signature:
    """Identifies one method, constructor, or the main entry point."""

    kind: str  # "method" | "ctor" | "main"
    name: str
    owner: str
    params: tuple  # tuple[TypeName, ...]
    ret: TypeName

    def key(self) -> str:
        args = ",".join(t.name for t in self.params)
        if self.kind == "ctor":
            return f"{self.owner}({args})"
        return f"{self.ret} {self.name}^{self.owner}({args})"

    def __str__(self) -> str:
        return self.key()


def method_signature(m: MethodDecl) -> Signature:
    return Signature(
        "method", m.name, m.owner, tuple(t for _, t in m.params), m.return_type
    )


def ctor_signature(c: ConstructorDecl) -> Signature:
    return Signature(
        "ctor", c.cls, c.cls, tuple(t for _, t in c.params), TypeName(c.cls)
    )


def main_signature(exe_class: str) -> Signature:
    return Signature("main", "main", exe_class, (), VOID)


# ---------------------------------------------------------------------------
# Pretty printing


def expr_to_source(e: Expression) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        if e.type == BOOLEAN:
            return "true" if e.value else "false"
        if e.type == CHAR:
            return f"'{e.value}'"
        return str(e.value)
    if isinstance(e, Null):
        return "null"
    if isinstance(e, This):
        return "this"
    if isinstance(e, OpApply):
        return _op_to_source(e)
    if isinstance(e, New):
        return f"new {e.cls}({', '.join(expr_to_source(a) for a in e.args)})"
    if isinstance(e, Call):
        args = ", ".join(expr_to_source(a) for a in e.args)
        return f"{expr_to_source(e.recv)}.{e.method}({args})"
    raise TypeError(f"unknown expression {e!r}")


def _op_to_source(e: OpApply) -> str:
    def paren(a):
        s = expr_to_source(a)
        return f"({s})" if isinstance(a, (OpApply,)) else s

    if e.op == "!":
        return f"!{paren(e.args[0])}"
    if e.op == "?:":
        return f"{paren(e.args[0])} ? {paren(e.args[1])} : {paren(e.args[2])}"
    if e.op.startswith("+") and len(e.op) > 1:  # partial-application +k
        return f"{paren(e.args[0])} + {e.op[1:]}"
    if e.op.startswith("-") and len(e.op) > 1:
        return f"{paren(e.args[0])} - {e.op[1:]}"
    return f"{paren(e.args[0])} {e.op} {paren(e.args[1])}"


def instr_to_lines(i: Instruction, indent: int = 0) -> list:
    pad = "  " * indent
    if isinstance(i, Skip):
        return [pad + ";"]
    if isinstance(i, Assign):
        decl = f"{i.decl} " if i.decl is not None else ""
        return [pad + f"{decl}{i.target} := {expr_to_source(i.expr)};"]
    if isinstance(i, Seq):
        out = []
        for item in i.items:
            out.extend(instr_to_lines(item, indent))
        return out or [pad + ";"]
    if isinstance(i, While):
        out = [pad + f"while ({expr_to_source(i.guard)}) {{"]
        out.extend(instr_to_lines(i.body, indent + 1))
        out.append(pad + "}")
        return out
    if isinstance(i, If):
        out = [pad + f"if ({expr_to_source(i.guard)}) {{"]
        out.extend(instr_to_lines(i.then, indent + 1))
        out.append(pad + "} else {")
        out.extend(instr_to_lines(i.els, indent + 1))
        out.append(pad + "}")
        return out
    if isinstance(i, ExprCall):
        return [pad + expr_to_source(i.call) + ";"]
    if isinstance(i, PushMark):
        return [pad + "push(...);"]
    if isinstance(i, PopMark):
        return [pad + "pop;"]
    if isinstance(i, RetAssign):
        return [pad + f"{i.target} := {i.retvar}; /* return */"]
    raise TypeError(f"unknown instruction {i!r}")


def program_to_source(p: Program) -> str:
    lines = []
    for cls in p.classes.values():
        ext = f" extends {cls.superclass}" if cls.superclass else ""
        lines.append(f"{cls.name}{ext} {{")
        for fname, ftype in cls.fields:
            lines.append(f"  {ftype} {fname};")
        for ctor in cls.constructors:
            params = ", ".join(f"{t} {n}" for n, t in ctor.params)
            lines.append(f"  {cls.name}({params}) {{")
            lines.extend(instr_to_lines(ctor.body, 2))
            lines.append("  }")
        for m in cls.methods:
            params = ", ".join(f"{t} {n}" for n, t in m.params)
            lines.append(f"  {m.return_type} {m.name}({params}) {{")
            lines.extend(instr_to_lines(m.body, 2))
            if m.return_var is not None:
                lines.append(f"    return {m.return_var};")
            lines.append("  }")
        if cls.name == p.exe_class:
            lines.append("  void main() {")
            lines.extend(instr_to_lines(p.init, 2))
            for seg in p.comp_segments:
                lines.append("    //Comp")
                lines.extend(instr_to_lines(seg, 2))
            lines.append("  }")
        lines.append("}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Symbol counting


def expr_size(e: Expression) -> int:
    """Number of symbols in an expression (each node and identifier counts 1)."""
    if isinstance(e, (Var, Const, Null, This)):
        return 1
    if isinstance(e, OpApply):
        return 1 + sum(expr_size(a) for a in e.args)
    if isinstance(e, New):
        return 2 + sum(expr_size(a) for a in e.args)
    if isinstance(e, Call):
        return 2 + expr_size(e.recv) + sum(expr_size(a) for a in e.args)
    raise TypeError(f"unknown expression {e!r}")


def instr_size(i: Instruction) -> int:
    """Number of symbols in an instruction; sequencing itself is free."""
    if isinstance(i, Skip):
        return 1
    if isinstance(i, Assign):
        return 1 + (1 if i.decl is not None else 0) + 1 + expr_size(i.expr)
    if isinstance(i, Seq):
        return sum(instr_size(x) for x in i.items) if i.items else 1
    if isinstance(i, While):
        return 1 + expr_size(i.guard) + instr_size(i.body)
    if isinstance(i, If):
        return 1 + expr_size(i.guard) + instr_size(i.then) + instr_size(i.els)
    if isinstance(i, ExprCall):
        return 1 + expr_size(i.call)
    if isinstance(i, (PushMark, PopMark)):
        return 1
    if isinstance(i, RetAssign):
        return 3
    raise TypeError(f"unknown instruction {i!r}")


def program_size(p: Program) -> int:
    total = instr_size(p.init) + sum(instr_size(s) for s in p.comp_segments)
    for cls in p.classes.values():
        total += 1 + len(cls.fields)
        for ctor in cls.constructors:
            total += 1 + len(ctor.params) + instr_size(ctor.body)
        for m in cls.methods:
            total += 1 + len(m.params) + instr_size(m.body)
            if m.return_var is not None:
                total += 2
    return total


def iter_instructions(i: Instruction):
    """Yields every instruction node in evaluation-order, including i."""
    yield i
    if isinstance(i, Seq):
        for item in i.items:
            yield from iter_instructions(item)
    elif isinstance(i, While):
        yield from iter_instructions(i.body)
    elif isinstance(i, If):
        yield from iter_instructions(i.then)
        yield from iter_instructions(i.els)
