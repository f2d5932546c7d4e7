"""Reference evaluator: a direct tree-walking interpreter.

This evaluator runs the *unflattened* program with plain recursive
evaluation.  It exists as an independent oracle for the small-step
pointer-graph machine: both must produce the same final heap shape and the
same primitive variable values on every terminating program.  Keep it
simple and obviously correct; performance is a non-goal.
"""

from dataclasses import dataclass, field

from .classtable import ClassTable
from .errors import AooError
from .operators import apply as op_apply, lookup as op_lookup
from .syntax import (
    Assign,
    Call,
    Const,
    Expression,
    ExprCall,
    If,
    Instruction,
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
from .typecheck import ProgramTypes
from .values import NULL_REF, NodeRef, default_value


class OracleBudgetExceeded(AooError):
    pass


@dataclass
class RefHeap:
    labels: dict = field(default_factory=lambda: {0: "null"})
    arrows: dict = field(default_factory=dict)  # (node id, field) -> value
    next_id: int = 1

    def new_node(self, label: str) -> NodeRef:
        nid = self.next_id
        self.next_id += 1
        self.labels[nid] = label
        return NodeRef(nid)


class _Env:
    __slots__ = ("ctx", "owner", "this", "vars")

    def __init__(self, ctx: str, owner: str, this: NodeRef, vars: dict):
        self.ctx = ctx
        self.owner = owner
        self.this = this
        self.vars = vars


@dataclass
class RefResult:
    heap: RefHeap
    main_vars: dict  # user variables of main, name -> value
    input_shape: object = None


class RefEvaluator:
    def __init__(
        self,
        program: Program,
        table: ClassTable,
        types: ProgramTypes,
        budget: int = 10_000_000,
    ):
        self.program = program
        self.table = table
        self.types = types
        self.heap = RefHeap()
        self.budget = budget

    def _tick(self):
        self.budget -= 1
        if self.budget <= 0:
            raise OracleBudgetExceeded("reference evaluator budget exhausted")

    # -- variable access --------------------------------------------------

    def _field_default(self, cls: str, name: str):
        return default_value(self.table.field_type(cls, name))

    def _read(self, env: _Env, name: str):
        if name == "this":
            return env.this
        if name not in env.vars and self.types.is_field(env.ctx, name):
            if env.this != NULL_REF:
                key = (env.this.id, name)
                if key in self.heap.arrows:
                    return self.heap.arrows[key]
            return self._field_default(env.owner, name)
        if name in env.vars:
            return env.vars[name]
        t = self.types.var_type(env.ctx, name)
        return default_value(t) if t is not None else NULL_REF

    def _write(self, env: _Env, name: str, value):
        if self.types.is_field(env.ctx, name):
            if env.this != NULL_REF:
                self.heap.arrows[(env.this.id, name)] = value
            return  # assigning a field of null skips silently
        env.vars[name] = value

    # -- expressions -------------------------------------------------------

    def eval_expr(self, env: _Env, e: Expression):
        self._tick()
        if isinstance(e, Var):
            return self._read(env, e.name)
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Null):
            return NULL_REF
        if isinstance(e, This):
            return env.this
        if isinstance(e, OpApply):
            spec = op_lookup(e.op)
            args = [self.eval_expr(env, a) for a in e.args]
            return op_apply(spec, args)
        if isinstance(e, New):
            return self._eval_new(env, e)
        if isinstance(e, Call):
            return self._eval_call(env, e)
        raise TypeError(f"unknown expression {e!r}")

    def _eval_new(self, env: _Env, e: New):
        args = [self.eval_expr(env, a) for a in e.args]
        node = self.heap.new_node(e.cls)
        ctor = self.table.resolve_ctor(e.cls, len(e.args))
        ctx = ctor_signature(ctor).key()
        callee = _Env(ctx, e.cls, node, {n: v for (n, _), v in zip(ctor.params, args)})
        self.exec_instr(callee, ctor.body)
        return node

    def _eval_call(self, env: _Env, e: Call):
        # Mirror flattening: a compound receiver is evaluated before the
        # arguments, a plain variable receiver is read at dispatch time.
        recv_first = not isinstance(e.recv, (Var, This))
        recv = self.eval_expr(env, e.recv) if recv_first else None
        args = [self.eval_expr(env, a) for a in e.args]
        if not recv_first:
            recv = self.eval_expr(env, e.recv)

        if isinstance(recv, NodeRef) and recv != NULL_REF:
            dyn_cls = self.heap.labels[recv.id]
        else:
            static = self.types.var_type(env.ctx, e.recv.name) if isinstance(e.recv, Var) else None
            if static is None and isinstance(e.recv, This):
                static = TypeName(env.owner)
            if static is None or not static.is_reference:
                raise AooError(f"cannot dispatch {e.method!r} on {recv!r}")
            dyn_cls = static.name
        decl = self.table.resolve(dyn_cls, e.method, len(e.args))
        if decl is None:
            raise AooError(f"method {e.method!r} not found on class {dyn_cls!r}")
        ctx = method_signature(decl).key()
        callee = _Env(
            ctx, decl.owner, recv, {n: v for (n, _), v in zip(decl.params, args)}
        )
        self.exec_instr(callee, decl.body)
        if decl.return_var is not None:
            return self._read(callee, decl.return_var)
        return None

    # -- instructions --------------------------------------------------------

    def exec_instr(self, env: _Env, i: Instruction):
        self._tick()
        if isinstance(i, Skip):
            return
        if isinstance(i, Assign):
            self._write(env, i.target, self.eval_expr(env, i.expr))
            return
        if isinstance(i, Seq):
            for item in i.items:
                self.exec_instr(env, item)
            return
        if isinstance(i, While):
            while self.eval_expr(env, i.guard) is True:
                self.exec_instr(env, i.body)
            return
        if isinstance(i, If):
            if self.eval_expr(env, i.guard) is True:
                self.exec_instr(env, i.then)
            else:
                self.exec_instr(env, i.els)
            return
        if isinstance(i, ExprCall):
            self._eval_call(env, i.call)
            return
        raise TypeError(f"unexpected instruction {i!r}")

    # -- entry point -----------------------------------------------------

    def run(self) -> RefResult:
        main_ctx = main_signature(self.program.exe_class).key()
        env = _Env(main_ctx, self.program.exe_class, NULL_REF, {})
        self.exec_instr(env, self.program.init)
        for seg in self.program.comp_segments:
            self.exec_instr(env, seg)
        user_vars = {k: v for k, v in env.vars.items() if not k.startswith("$")}
        return RefResult(heap=self.heap, main_vars=user_vars)


def reference_run(program, table, types, budget: int = 10_000_000) -> RefResult:
    """Runs the whole program (Init then Comp) with the tree-walking oracle."""
    return RefEvaluator(program, table, types, budget).run()
