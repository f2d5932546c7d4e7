"""Declarative tier checking of a flattened program against an assignment.

Accepts iff the initialization instruction passes the tier-erased check
(already guaranteed for compiled programs), every context reachable from
the computational instruction is coherent (field tiers equal the tier of
`this`, constructor bodies stay at tier 0 with tier-0 parameters, override
families carry one tier vector), and the computational instruction itself
derives at void(1) -- which, with instruction subtyping, means every rule's
side conditions hold and each guard's tier matches its branches.

The checker computes, per instruction, the *minimal derivable tier*;
subtyping can only raise an instruction from 0 to 1, so an `if` needs its
branches' minimal tiers to sit at or below the guard tier, and a `while`
pins its guard (and itself) at tier 1.
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
    PopMark,
    PushMark,
    RetAssign,
    Seq,
    Skip,
    This,
    Var,
    While,
    method_signature,
)
from .tiers import TIER0, TIER1, TierAssignment
from .transform import FlatProgram

FREE = -1  # expression tier not pinned by the context (constants, null)


@dataclass
class Violation:
    rule: str
    ctx: str
    line: int
    col: int
    message: str

    def to_json(self):
        return {
            "rule": self.rule,
            "context": self.ctx,
            "line": self.line,
            "col": self.col,
            "message": self.message,
        }

    def __str__(self):
        return f"({self.rule}) at {self.ctx}:{self.line}: {self.message}"


@dataclass
class CheckResult:
    accepted: bool
    violations: list = field(default_factory=list)

    def first(self):
        return self.violations[0] if self.violations else None


class TierChecker:
    def __init__(self, flat: FlatProgram, graph: CallGraph, assignment: TierAssignment):
        self.flat = flat
        self.graph = graph
        self.t = assignment
        self.types = flat.types
        self.table = flat.table
        self.violations: list[Violation] = []

    # -- helpers -------------------------------------------------------------

    def _bad(self, rule, ctx, node, message):
        self.violations.append(
            Violation(rule, ctx, getattr(node, "line", 0), getattr(node, "col", 0), message)
        )

    def _is_field(self, ctx: str, name: str) -> bool:
        return self.types.is_field(ctx, name)

    def _var_tier(self, ctx: str, name: str) -> int:
        return self.t.tier(ctx, name)

    # -- context coherence -----------------------------------------------------

    def check_context_coherence(self, reachable: list):
        for key in reachable:
            decl = self.graph.method_decl.get(key)
            ctor = self.graph.ctor_decl.get(key)
            owner = decl.owner if decl else (ctor.cls if ctor else None)
            if owner is None:
                continue
            this_t = self.t.tier(key, "this")
            for fname, _ in self.table.fields(owner):
                if self.t.tier(key, fname) != this_t:
                    self._bad(
                        "Self",
                        key,
                        decl or ctor,
                        f"field {fname!r} has tier {self.t.tier(key, fname)} but "
                        f"this has tier {this_t}",
                    )
            if ctor is not None:
                for pname, _ in ctor.params:
                    if self.t.tier(key, pname) != TIER0:
                        self._bad(
                            "Cons", key, ctor, f"constructor parameter {pname!r} must be tier 0"
                        )
                if self.t.tier(key, "this") != TIER0:
                    self._bad("Cons", key, ctor, "constructed object must be tier 0")
                m = self.min_tier(ctor.body, key)
                if m is not None and m != TIER0:
                    self._bad("Cons", key, ctor, "constructor body must type at void(0)")
            if decl is not None:
                m = self.min_tier(decl.body, key)
                gamma = self.t.gamma(key)
                if m is not None and gamma < m:
                    self._bad(
                        "Body",
                        key,
                        decl,
                        f"annotation tier {gamma} below the body's minimal tier {m}",
                    )

        # override families carry identical tier vectors
        seen_pairs = set()
        for key in reachable:
            decl = self.graph.method_decl.get(key)
            if decl is None:
                continue
            for o in self.table.overrides(decl):
                okey = method_signature(o).key()
                pair = (key, okey)
                if pair in seen_pairs:
                    continue
                seen_pairs.add(pair)
                self._check_override(key, decl, okey, o)

    def _check_override(self, key, decl, okey, odecl):
        a = self.t.method_type(key, decl)
        b = self.t.method_type(okey, odecl)
        if a != b:
            self._bad(
                "OR",
                okey,
                odecl,
                f"override {okey} has tier vector {b}, expected {a} from {key}",
            )

    # -- expressions -----------------------------------------------------------

    def expr_tier(self, e, ctx: str):
        """Returns (tier or FREE, annotation tier) for a meta-expression."""
        if isinstance(e, Var):
            return self._var_tier(ctx, e.name), TIER0
        if isinstance(e, (Const, Null)):
            return FREE, TIER0
        if isinstance(e, This):
            return self._var_tier(ctx, "this"), TIER0
        if isinstance(e, OpApply):
            return self._op_tier(e, ctx)
        if isinstance(e, New):
            return self._new_tier(e, ctx)
        if isinstance(e, Call):
            return self._call_tier(e, ctx)
        raise TypeError(f"unknown expression {e!r}")

    def _op_tier(self, e: OpApply, ctx: str):
        spec = op_lookup(e.op)
        if spec is None or spec.classification == OTHER:
            self._bad(
                "Op",
                ctx,
                e,
                f"operator {e.op!r} admits no tiered type (classified other)",
            )
            return FREE, TIER0
        fixed = []
        for a in e.args:
            t, _ = self.expr_tier(a, ctx)
            if t != FREE:
                fixed.append((a, t))
        if spec.classification == POSITIVE:
            for a, t in fixed:
                if t != TIER0:
                    self._bad(
                        "Op",
                        ctx,
                        a,
                        f"operand of positive operator {e.op!r} must be tier 0",
                    )
            return TIER0, TIER0
        # neutral: all operands share one tier, which is the output tier
        tiers = {t for _, t in fixed}
        if len(tiers) > 1:
            self._bad(
                "Op", ctx, e, f"operands of {e.op!r} carry distinct tiers {sorted(tiers)}"
            )
            return max(tiers), TIER0
        if not tiers:
            return FREE, TIER0
        return tiers.pop(), TIER0

    def _new_tier(self, e: New, ctx: str):
        for a in e.args:
            t, _ = self.expr_tier(a, ctx)
            if t not in (FREE, TIER0):
                self._bad("New", ctx, a, "constructor arguments must be tier 0")
        return TIER0, TIER0

    def _call_tier(self, e: Call, ctx: str):
        decl = None
        recv_cls = self._static_class(e, ctx)
        if recv_cls is not None:
            decl = self.table.resolve(recv_cls, e.method, len(e.args))
        if decl is None:
            self._bad("C", ctx, e, f"cannot resolve method {e.method!r}")
            return FREE, TIER0
        key = method_signature(decl).key()
        recv_tier, _ = self.expr_tier(e.recv, ctx)
        this_tier = self.t.tier(key, "this")
        if recv_tier not in (FREE, this_tier):
            self._bad(
                "C",
                ctx,
                e,
                f"receiver tier {recv_tier} does not match {key} (this is tier {this_tier})",
            )
        for a, (pname, _) in zip(e.args, decl.params):
            at, _ = self.expr_tier(a, ctx)
            pt = self.t.tier(key, pname)
            if at not in (FREE, pt):
                self._bad(
                    "C",
                    ctx,
                    a,
                    f"argument for {pname!r} has tier {at}, {key} expects {pt}",
                )
        if decl.return_var is not None:
            ret = self.t.tier(key, decl.return_var)
        else:
            ret = FREE
        return ret, self.t.gamma(key)

    def _static_class(self, e: Call, ctx: str):
        if isinstance(e.recv, This):
            owner = self.types.ctx_owner.get(ctx)
            return owner
        if isinstance(e.recv, Var):
            t = self.types.var_type(ctx, e.recv.name)
            return t.name if t is not None and t.is_reference else None
        return None

    # -- instructions ------------------------------------------------------------

    def min_tier(self, i: Instruction, ctx: str):
        """Minimal derivable tier of an instruction, or None after violations."""
        if isinstance(i, Skip):
            return TIER0
        if isinstance(i, (PushMark, PopMark)):
            return TIER0
        if isinstance(i, RetAssign):
            return self._assign_min(
                i, i.caller_ctx, i.target, None, self._var_tier(i.callee_ctx, i.retvar), TIER0
            )
        if isinstance(i, Assign):
            et, beta = self.expr_tier(i.expr, ctx)
            return self._assign_min(i, ctx, i.target, i.expr, et, beta)
        if isinstance(i, ExprCall):
            et, beta = self._call_tier(i.call, ctx)
            alpha = et if et != FREE else TIER0
            return max(alpha, beta)
        if isinstance(i, Seq):
            worst = TIER0
            for item in i.items:
                m = self.min_tier(item, ctx)
                if m is None:
                    return None
                worst = max(worst, m)
            return worst
        if isinstance(i, While):
            g = self._var_tier(ctx, i.guard.name)
            if g != TIER1:
                self._bad("Wh", ctx, i, f"while guard {i.guard.name!r} must be tier 1")
            self.min_tier(i.body, ctx)
            return TIER1
        if isinstance(i, If):
            g = self._var_tier(ctx, i.guard.name)
            mt = self.min_tier(i.then, ctx)
            me = self.min_tier(i.els, ctx)
            for m, branch in ((mt, "then"), (me, "else")):
                if m is not None and m > g:
                    self._bad(
                        "If",
                        ctx,
                        i,
                        f"{branch} branch needs tier {m} but the guard "
                        f"{i.guard.name!r} is tier {g}",
                    )
            return g
        raise TypeError(f"cannot type {i!r}")

    def _assign_min(self, node, ctx, target, expr, et, beta):
        """Side conditions of the assignment rule; returns the minimal tier."""
        if target == "":
            alpha = et if et != FREE else TIER0
            return max(alpha, beta)
        tt = self._var_tier(ctx, target)
        if self._is_field(ctx, target):
            if tt != TIER0:
                self._bad("Ass", ctx, node, f"assigned field {target!r} must be tier 0")
            if et not in (FREE, TIER0):
                self._bad(
                    "Ass", ctx, node, f"expression assigned to field {target!r} must be tier 0"
                )
            return max(TIER0, beta)
        ttype = self.types.var_type(ctx, target)
        primitive = ttype is not None and ttype.is_primitive
        if et == FREE:
            alpha = tt  # constants/null adopt the target's tier
        else:
            alpha = et
            if primitive:
                if tt > et:
                    self._bad(
                        "Ass",
                        ctx,
                        node,
                        f"primitive {target!r} (tier {tt}) cannot receive tier {et}",
                    )
            else:
                if tt != et:
                    self._bad(
                        "Ass",
                        ctx,
                        node,
                        f"reference {target!r} (tier {tt}) must equal expression tier {et}",
                    )
        return max(alpha, beta)

    # -- entry ----------------------------------------------------------------

    def run(self) -> CheckResult:
        reachable = self.graph.reachable_from_comp()
        self.check_context_coherence(reachable)
        main_ctx = self.flat.main_ctx
        self.min_tier(self.flat.comp, main_ctx)
        return CheckResult(accepted=not self.violations, violations=self.violations)


def check_program(flat: FlatProgram, graph: CallGraph, assignment: TierAssignment) -> CheckResult:
    """Checks one tier assignment; Init is covered by the tier-erased pass."""
    return TierChecker(flat, graph, assignment).run()


def check_runtime_instruction(
    flat: FlatProgram, graph: CallGraph, assignment: TierAssignment, cont
) -> CheckResult:
    """Types a runtime continuation under the extended push/pop rules.

    Each node carries its origin context; the whole continuation types at
    void(1) via subtyping iff no rule is violated.
    """
    checker = TierChecker(flat, graph, assignment)
    node = cont
    while node is not None:
        head, node = node
        ctx = getattr(head, "ctx", flat.main_ctx) or flat.main_ctx
        checker.min_tier(head, ctx)
    return CheckResult(accepted=not checker.violations, violations=checker.violations)
