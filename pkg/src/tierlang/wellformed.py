"""Structural well-formedness: the four program conditions plus toponymy.

Checked conditions:
  * class names are unique (the parser already rejects duplicates);
  * every local is declared-and-initialized exactly once, before first use;
  * a method's output type is void iff it has no return statement;
  * signatures are unique and never differ only in the return type;
  * within a class, an identifier is a field, a parameter, or a local --
    never two of those at once.
"""

from .classtable import ClassTable
from .errors import DiagnosticSink
from .syntax import (
    Assign,
    Call,
    Expression,
    ExprCall,
    If,
    Instruction,
    New,
    OpApply,
    Program,
    Seq,
    Skip,
    Var,
    While,
)


def check_well_formed(program: Program, table: ClassTable | None = None) -> list:
    """Returns a list of Diagnostics; empty means well-formed."""
    sink = DiagnosticSink(file=program.source_file)

    for cls in program.classes.values():
        seen_sigs = {}
        seen_named = {}
        for m in cls.methods:
            key = (m.name, tuple(t.name for _, t in m.params))
            if key in seen_sigs:
                other = seen_sigs[key]
                if other.return_type != m.return_type:
                    sink.add(
                        m.line,
                        m.col,
                        "E_SIG_RET",
                        f"signatures of {m.name!r} in {cls.name!r} differ only "
                        "in return type",
                    )
                else:
                    sink.add(
                        m.line,
                        m.col,
                        "E_SIG_DUP",
                        f"duplicate signature for {m.name!r} in {cls.name!r}",
                    )
            seen_sigs[key] = m
            seen_named.setdefault(m.name, []).append(m)

            returns = m.return_var is not None
            if m.return_type.is_void and returns:
                sink.add(
                    m.return_line,
                    0,
                    "E_RET_VOID",
                    f"void method {m.name!r} must not return a variable",
                )
            if not m.return_type.is_void and not returns:
                sink.add(
                    m.line,
                    m.col,
                    "E_RET_MISSING",
                    f"method {m.name!r} declares {m.return_type} but has no return",
                )

        field_names = {f for f, _ in cls.fields}
        declared_fields = set()
        for f, _ in cls.fields:
            if f in declared_fields:
                sink.add(cls.line, cls.col, "E_FIELD_DUP", f"duplicate field {f!r}")
            declared_fields.add(f)

        for ctor in cls.constructors:
            if table is not None:
                inherited = table.field_names(cls.name)
            else:
                inherited = field_names
            _check_body(sink, ctor.params, ctor.body, inherited, None)
        for m in cls.methods:
            if table is not None:
                inherited = table.field_names(cls.name)
            else:
                inherited = field_names
            _check_body(sink, m.params, m.body, inherited, m)

    exe_fields = (
        table.field_names(program.exe_class)
        if table is not None
        else {f for f, _ in program.classes[program.exe_class].fields}
    )
    main_body = Seq(items=[program.init] + list(program.comp_segments))
    _check_body(sink, [], main_body, exe_fields, None)

    return sink.items


def _check_body(sink, params, body, field_names, method):
    param_names = set()
    for name, _ in params:
        if name in param_names:
            sink.add(0, 0, "E_PARAM_DUP", f"duplicate parameter {name!r}")
        if name in field_names:
            sink.add(
                0,
                0,
                "E_SHADOW",
                f"parameter {name!r} shadows a field of the class",
            )
        param_names.add(name)

    declared = set()

    def use(e: Expression):
        if isinstance(e, Var):
            name = e.name
            if name in param_names or name in field_names or name in declared:
                return
            sink.add(
                e.line,
                e.col,
                "E_UNDECLARED",
                f"variable {name!r} used before its declaration",
            )
            declared.add(name)  # report once
        elif isinstance(e, OpApply):
            for a in e.args:
                use(a)
        elif isinstance(e, New):
            for a in e.args:
                use(a)
        elif isinstance(e, Call):
            use(e.recv)
            for a in e.args:
                use(a)

    def walk(i: Instruction):
        if isinstance(i, Skip):
            return
        if isinstance(i, Assign):
            use(i.expr)
            name = i.target
            if i.decl is not None:
                if name in declared:
                    sink.add(
                        i.line,
                        i.col,
                        "E_REDECLARED",
                        f"local {name!r} declared more than once",
                    )
                elif name in param_names:
                    sink.add(
                        i.line, i.col, "E_SHADOW", f"local {name!r} shadows a parameter"
                    )
                elif name in field_names:
                    sink.add(
                        i.line, i.col, "E_SHADOW", f"local {name!r} shadows a field"
                    )
                declared.add(name)
            else:
                if (
                    name not in declared
                    and name not in param_names
                    and name not in field_names
                ):
                    sink.add(
                        i.line,
                        i.col,
                        "E_UNDECLARED",
                        f"assignment to {name!r} before its typed declaration",
                    )
                    declared.add(name)
            return
        if isinstance(i, Seq):
            for item in i.items:
                walk(item)
            return
        if isinstance(i, While):
            use(i.guard)
            walk(i.body)
            return
        if isinstance(i, If):
            use(i.guard)
            walk(i.then)
            walk(i.els)
            return
        if isinstance(i, ExprCall):
            use(i.call)
            return
        raise TypeError(f"unexpected instruction {i!r}")

    walk(body)

    if method is not None and method.return_var is not None:
        name = method.return_var
        if name not in declared and name not in param_names and name not in field_names:
            sink.add(
                method.return_line,
                0,
                "E_UNDECLARED",
                f"return variable {name!r} is not declared",
            )
