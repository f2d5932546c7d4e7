"""Tier inference by reduction to 2-SAT.

One boolean per (context, variable) -- true means tier 1 -- plus one per
instruction occurrence modeling its minimal derivable tier, and one
annotation tier per method.  Clause shapes follow the typing rules in
least-tier normal form: sequencing joins become child-to-parent
implications, branch tiers imply their guard, while-guards and loop
instructions are pinned to 1, reference assignments tie both sides,
primitive assignments only bound the target from above, neutral operators
tie their operands, and positive operators plus constructor arguments and
results force 0.  Each clause carries its originating rule and location so
an unsatisfiable core names the offending constructs.

Inference is monomorphic: every method signature gets one tier context,
exactly what the declarative checker replays, so the satisfiability verdict
agrees with brute-force enumeration over assignments.
"""

from dataclasses import dataclass, field

from .callgraph import CallGraph
from .operators import OTHER, POSITIVE, lookup as op_lookup
from .syntax import (
    Assign,
    Call,
    Const,
    ExprCall,
    If,
    Instruction,
    New,
    Null,
    OpApply,
    Seq,
    Skip,
    This,
    Var,
    While,
    method_signature,
)
from .tiers import TierAssignment
from .transform import FlatProgram
from .twosat import ClauseSet, solve_2sat

FREE = None
ZERO = "zero"


@dataclass
class InferResult:
    satisfiable: bool
    assignment: TierAssignment | None = None
    core: list = field(default_factory=list)
    pinned: set = field(default_factory=set)

    def core_messages(self) -> list:
        return [f"({rule}) {ctx}:{line}" for rule, ctx, line in self.core]


class Encoder:
    def __init__(self, flat: FlatProgram, graph: CallGraph, comp: Instruction | None = None,
                 pinned: set | None = None):
        self.flat = flat
        self.graph = graph
        self.types = flat.types
        self.table = flat.table
        self.comp = comp if comp is not None else flat.comp
        self.pinned = pinned or set()
        self.cs = ClauseSet()
        self.reachable = self._reachable_from(self.comp)

    # -- reachability over an arbitrary computational instruction ----------

    def _reachable_from(self, comp: Instruction) -> list:
        from .callgraph import _calls_in
        from .syntax import ctor_signature

        seen = []
        seen_set = set()
        work = []

        def visit_body(ctx_owner, ctx, body):
            for instr, site in _calls_in(body):
                if isinstance(site, New):
                    ctor = self.table.resolve_ctor(site.cls, len(site.args))
                    if ctor is not None:
                        work.append(ctor_signature(ctor).key())
                else:
                    for key in getattr(instr, "dispatch_sigs", []) or []:
                        work.append(key)

        visit_body(self.flat.program.exe_class, self.flat.main_ctx, comp)
        while work:
            key = work.pop(0)
            if key in seen_set:
                continue
            seen_set.add(key)
            seen.append(key)
            decl = self.graph.method_decl.get(key)
            ctor = self.graph.ctor_decl.get(key)
            if decl is not None:
                visit_body(decl.owner, key, decl.body)
                for o in self.table.overrides(decl):
                    work.append(method_signature(o).key())
            elif ctor is not None:
                visit_body(ctor.cls, key, ctor.body)
        return seen

    # -- variables -----------------------------------------------------------

    def v(self, ctx: str, name: str) -> int:
        return self.cs.var(("v", ctx, name))

    def ivar(self, node: Instruction) -> int:
        return self.cs.var(("i", node.uid))

    def gvar(self, sig_key: str) -> int:
        return self.cs.var(("g", sig_key))

    def tier_variable_names(self) -> list:
        """The (kind, ...) keys brute-force enumeration must range over."""
        return [n for n in self.cs.names if n[0] in ("v", "g")]

    # -- encoding -------------------------------------------------------------

    def encode(self) -> ClauseSet:
        main_ctx = self.flat.main_ctx
        self._self_rule(main_ctx, self.flat.program.exe_class, None)
        self.encode_instr(self.comp, main_ctx)

        for key in self.reachable:
            decl = self.graph.method_decl.get(key)
            ctor = self.graph.ctor_decl.get(key)
            if decl is not None:
                self._self_rule(key, decl.owner, decl)
                root = self.ivar(decl.body)
                self.encode_instr(decl.body, key)
                self.cs.implies(root, self.gvar(key), ("Body", key, decl.line))
                if key in self.pinned:
                    origin = ("Safety", key, decl.line)
                    self.cs.unit(self.v(key, "this"), origin)
                    for pname, _ in decl.params:
                        self.cs.unit(self.v(key, pname), origin)
                    self.cs.unit(self.gvar(key), origin)
            elif ctor is not None:
                origin = ("Cons", key, ctor.line)
                self._self_rule(key, ctor.cls, None)
                self.cs.unit(-self.v(key, "this"), origin)
                for pname, _ in ctor.params:
                    self.cs.unit(-self.v(key, pname), origin)
                self.encode_instr(ctor.body, key)
                self.cs.unit(-self.ivar(ctor.body), origin)

        # overrides carry the tier vector of the method they override
        tied = set()
        for key in self.reachable:
            decl = self.graph.method_decl.get(key)
            if decl is None:
                continue
            for o in self.table.overrides(decl):
                okey = method_signature(o).key()
                if okey not in self.reachable or (key, okey) in tied:
                    continue
                tied.add((key, okey))
                origin = ("OR", okey, o.line)
                self.cs.equiv(self.v(key, "this"), self.v(okey, "this"), origin)
                for (pa, _), (pb, _) in zip(decl.params, o.params):
                    self.cs.equiv(self.v(key, pa), self.v(okey, pb), origin)
                if decl.return_var is not None and o.return_var is not None:
                    self.cs.equiv(
                        self.v(key, decl.return_var), self.v(okey, o.return_var), origin
                    )
                self.cs.equiv(self.gvar(key), self.gvar(okey), origin)
        return self.cs

    def _self_rule(self, ctx: str, owner: str, decl):
        this = self.v(ctx, "this")
        for fname, _ in self.table.fields(owner):
            self.cs.equiv(self.v(ctx, fname), this, ("Self", ctx, 0))

    # expression encoding: returns (tier representation, beta literals)
    # tier is FREE, ZERO, or an int literal over a context variable

    def encode_expr(self, e, ctx: str):
        if isinstance(e, Var):
            return self.v(ctx, e.name), []
        if isinstance(e, (Const, Null)):
            return FREE, []
        if isinstance(e, This):
            return self.v(ctx, "this"), []
        if isinstance(e, OpApply):
            return self._encode_op(e, ctx)
        if isinstance(e, New):
            return self._encode_new(e, ctx)
        if isinstance(e, Call):
            return self._encode_call(e, ctx)
        raise TypeError(f"unknown expression {e!r}")

    def _encode_op(self, e: OpApply, ctx: str):
        spec = op_lookup(e.op)
        origin = ("Op", ctx, e.line)
        if spec is None or spec.classification == OTHER:
            self.cs.contradiction(origin)
            return FREE, []
        lits = []
        for a in e.args:
            t, _ = self.encode_expr(a, ctx)
            if isinstance(t, int):
                lits.append(t)
        if spec.classification == POSITIVE:
            for lit in lits:
                self.cs.unit(-lit, origin)
            return ZERO, []
        for a, b in zip(lits, lits[1:]):
            self.cs.equiv(a, b, origin)
        return (lits[0] if lits else FREE), []

    def _encode_new(self, e: New, ctx: str):
        origin = ("New", ctx, e.line)
        for a in e.args:
            t, _ = self.encode_expr(a, ctx)
            if isinstance(t, int):
                self.cs.unit(-t, origin)
        return ZERO, []

    def _encode_call(self, e: Call, ctx: str):
        decl = self._static_resolve(e, ctx)
        if decl is None:
            self.cs.contradiction(("C", ctx, e.line))
            return FREE, []
        key = method_signature(decl).key()
        origin = ("C", ctx, e.line)
        rt, _ = self.encode_expr(e.recv, ctx)
        if isinstance(rt, int):
            self.cs.equiv(rt, self.v(key, "this"), origin)
        for a, (pname, _) in zip(e.args, decl.params):
            at, _ = self.encode_expr(a, ctx)
            pv = self.v(key, pname)
            if isinstance(at, int):
                self.cs.equiv(at, pv, origin)
            elif at == ZERO:
                self.cs.unit(-pv, origin)
        ret = self.v(key, decl.return_var) if decl.return_var is not None else FREE
        return ret, [self.gvar(key)]

    def _static_resolve(self, e: Call, ctx: str):
        if isinstance(e.recv, This):
            owner = self.types.ctx_owner.get(ctx)
            return self.table.resolve(owner, e.method, len(e.args)) if owner else None
        t = self.types.var_type(ctx, e.recv.name)
        if t is None or not t.is_reference:
            return None
        return self.table.resolve(t.name, e.method, len(e.args))

    # instruction encoding ---------------------------------------------------

    def encode_instr(self, i: Instruction, ctx: str):
        iv = self.ivar(i)
        if isinstance(i, Skip):
            return
        if isinstance(i, Assign):
            et, betas = self.encode_expr(i.expr, ctx)
            origin = ("Ass", ctx, i.line)
            tv = self.v(ctx, i.target)
            self.cs.implies(tv, iv, origin)
            if self.types.is_field(ctx, i.target):
                self.cs.unit(-tv, origin)
                if isinstance(et, int):
                    self.cs.unit(-et, origin)
            else:
                ttype = self.types.var_type(ctx, i.target)
                primitive = ttype is not None and ttype.is_primitive
                if isinstance(et, int):
                    if primitive:
                        self.cs.implies(tv, et, origin)
                    else:
                        self.cs.equiv(tv, et, origin)
                elif et == ZERO:
                    self.cs.unit(-tv, origin)
            if isinstance(et, int):
                self.cs.implies(et, iv, origin)
            for b in betas:
                self.cs.implies(b, iv, origin)
            return
        if isinstance(i, ExprCall):
            et, betas = self._encode_call(i.call, ctx)
            origin = ("Ass", ctx, i.line)
            if isinstance(et, int):
                self.cs.implies(et, iv, origin)
            for b in betas:
                self.cs.implies(b, iv, origin)
            return
        if isinstance(i, Seq):
            for item in i.items:
                self.encode_instr(item, ctx)
                self.cs.implies(self.ivar(item), iv, ("Seq", ctx, item.line))
            return
        if isinstance(i, While):
            origin = ("Wh", ctx, i.line)
            self.cs.unit(self.v(ctx, i.guard.name), origin)
            self.cs.unit(iv, origin)
            self.encode_instr(i.body, ctx)
            return
        if isinstance(i, If):
            origin = ("If", ctx, i.line)
            g = self.v(ctx, i.guard.name)
            self.encode_instr(i.then, ctx)
            self.encode_instr(i.els, ctx)
            self.cs.implies(self.ivar(i.then), g, origin)
            self.cs.implies(self.ivar(i.els), g, origin)
            self.cs.equiv(iv, g, origin)
            return
        raise TypeError(f"cannot encode {i!r}")

    # model extraction -------------------------------------------------------

    def assignment_from(self, model: dict) -> TierAssignment:
        t = TierAssignment()
        contexts = [self.flat.main_ctx] + list(self.reachable)
        for ctx in contexts:
            for name in self._context_vars(ctx):
                t.set_tier(ctx, name, 1 if model.get(("v", ctx, name), False) else 0)
        for key in self.reachable:
            if key in self.graph.method_decl:
                t.gammas[key] = 1 if model.get(("g", key), False) else 0
        return t

    def _context_vars(self, ctx: str) -> list:
        names = {"this"}
        for (c, n) in self.types.var_types:
            if c == ctx:
                names.add(n)
        owner = self.types.ctx_owner.get(ctx)
        if owner is not None:
            names.update(f for f, _ in self.table.fields(owner))
        return sorted(names)


def infer(
    flat: FlatProgram,
    graph: CallGraph,
    comp: Instruction | None = None,
    pinned: set | None = None,
) -> InferResult:
    """Finds a tier assignment for one computational instruction, or unsat."""
    enc = Encoder(flat, graph, comp=comp, pinned=pinned)
    cs = enc.encode()
    res = solve_2sat(cs)
    if not res.satisfiable:
        return InferResult(False, core=res.core, pinned=set(pinned or ()))
    return InferResult(
        True, assignment=enc.assignment_from(res.model), pinned=set(pinned or ())
    )


def recursive_reachable(flat: FlatProgram, graph: CallGraph) -> list:
    """Recursive method signatures reachable from the computational instruction."""
    return sorted(
        k
        for k in graph.reachable_from_comp()
        if k in graph.method_decl and graph.is_recursive(k)
    )


def infer_with_safety_pinning(flat: FlatProgram, graph: CallGraph) -> InferResult:
    """Prefers assignments that pin recursive methods to the safe shape.

    Tries all recursive methods pinned at tier-1 this/params and annotation
    1; on unsat, keeps a maximal pinnable subset (greedy, deterministic
    order); an empty subset degrades to plain typability.
    """
    rec = recursive_reachable(flat, graph)
    if rec:
        full = infer(flat, graph, pinned=set(rec))
        if full.satisfiable:
            return full
        kept: set = set()
        for key in rec:
            if infer(flat, graph, pinned=kept | {key}).satisfiable:
                kept.add(key)
        return infer(flat, graph, pinned=kept)
    return infer(flat, graph)


@dataclass
class SegmentResult:
    index: int
    result: InferResult


@dataclass
class DeclassifiedResult:
    accepted: bool
    segments: list  # of SegmentResult
    failing_index: int | None = None

    @property
    def assignment(self):
        return self.segments[-1].result.assignment if self.segments else None


def check_declassified(flat: FlatProgram, graph: CallGraph, pin: bool = True) -> DeclassifiedResult:
    """Types each computational segment with its predecessors as input.

    A program `Init //Comp I1 //Comp I2 ...` is accepted iff for every i the
    program whose initialization is Init I1..I(i-1) and whose computational
    instruction is Ii can be typed.
    """
    segments = flat.comp_segments
    out = []
    for idx, seg in enumerate(segments):
        if pin:
            rec = [
                k
                for k in Encoder(flat, graph, comp=seg).reachable
                if k in graph.method_decl and graph.is_recursive(k)
            ]
            res = infer(flat, graph, comp=seg, pinned=set(rec))
            if not res.satisfiable and rec:
                res = infer(flat, graph, comp=seg)
        else:
            res = infer(flat, graph, comp=seg)
        out.append(SegmentResult(idx, res))
        if not res.satisfiable:
            return DeclassifiedResult(False, out, failing_index=idx)
    return DeclassifiedResult(True, out)
