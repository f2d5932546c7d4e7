"""Symbolic polynomial bounds and their empirical validation.

For a safe program with n1 tier-1 variables in the computational
instruction, intricacy nu, and level lambda, the reported bounds over the
input size n are:

    steps  = O(n^(n1*(nu+lambda)))            (conditional on termination)
    heap   = O(max(n, n^(n1*(nu+lambda))))
    stack  = O(n^(n1*(nu+2*lambda)))

Validation re-runs a program at scaled input sizes, fits the constant at
the smallest size, and checks the larger sizes stay within a slack factor.
"""

import re
from dataclasses import dataclass, field

from .callgraph import CallGraph, IntricacyUndefined, program_intricacy, program_level
from .syntax import Assign, Call, Expression, New, OpApply, This, Var, While
from .tiers import TIER1, TierAssignment
from .transform import FlatProgram


@dataclass
class BoundReport:
    n1: int
    nu: int | None
    lam: int
    time_exponent: int | None
    stack_exponent: int | None

    @property
    def heap_exponent(self):
        return self.time_exponent

    def _poly(self, e):
        if e is None:
            return "undefined"
        if e == 0:
            return "O(1)"
        return "O(n^%d)" % e

    @property
    def time_str(self):
        return self._poly(self.time_exponent)

    @property
    def heap_str(self):
        if self.time_exponent is None:
            return "undefined"
        if self.time_exponent <= 1:
            return "O(n)"
        return "O(max(n, n^%d))" % self.time_exponent

    @property
    def stack_str(self):
        return self._poly(self.stack_exponent)

    def to_json(self):
        return {
            "n1": self.n1,
            "nu": self.nu,
            "lambda": self.lam,
            "time": self.time_str,
            "heap": self.heap_str,
            "stack": self.stack_str,
            "time_exponent": self.time_exponent,
            "stack_exponent": self.stack_exponent,
        }


# ---------------------------------------------------------------------------
# Counting tier-1 variables


def _reads(e: Expression):
    if isinstance(e, Var):
        yield e.name
    elif isinstance(e, This):
        yield "this"
    elif isinstance(e, OpApply):
        for a in e.args:
            yield from _reads(a)
    elif isinstance(e, New):
        for a in e.args:
            yield from _reads(a)
    elif isinstance(e, Call):
        yield from _reads(e.recv)
        for a in e.args:
            yield from _reads(a)


def _roots_fixpoint(flat: FlatProgram, graph: CallGraph, assignment: TierAssignment):
    """Attributes derived variables to the user tier-1 variables they read.

    A user variable of the main context roots itself when tier 1.  Temps,
    parameters, `this`, and fields inherit the union of the roots of what
    they are assigned from (arguments and receivers at every call site for
    parameters and `this`, `this` for fields).  Iterated to a fixpoint.
    """
    from .callgraph import _calls_in, _walk

    main_ctx = flat.main_ctx
    roots: dict = {}
    pinned = set()

    def var_roots(ctx, name):
        return roots.setdefault((ctx, name), set())

    for name, tier in assignment.contexts.get(main_ctx, {}).items():
        if not name.startswith("$") and name != "this":
            pinned.add((main_ctx, name))
            if tier == TIER1:
                roots[(main_ctx, name)] = {name}

    bodies = [(main_ctx, flat.comp)]
    for key in graph.reachable_from_comp():
        decl = graph.method_decl.get(key) or graph.ctor_decl.get(key)
        if decl is not None:
            bodies.append((key, decl.body))

    changed = True
    while changed:
        changed = False

        def absorb(ctx, name, new):
            if (ctx, name) in pinned:
                return False
            cur = var_roots(ctx, name)
            if not new.issubset(cur):
                cur.update(new)
                return True
            return False

        for ctx, body in bodies:
            owner = flat.types.ctx_owner.get(ctx)
            if owner is not None:
                for fname, _ in flat.table.fields(owner):
                    changed |= absorb(ctx, fname, var_roots(ctx, "this"))
            for node in _walk(body):
                if isinstance(node, Assign) and not isinstance(node.expr, (New,)):
                    incoming = set()
                    for r in _reads(node.expr):
                        incoming |= var_roots(ctx, r)
                    changed |= absorb(ctx, node.target, incoming)
            for instr, site in _calls_in(body):
                if isinstance(site, New):
                    ctor = flat.table.resolve_ctor(site.cls, len(site.args))
                    if ctor is None:
                        continue
                    from .syntax import ctor_signature

                    ckey = ctor_signature(ctor).key()
                    for a, (pname, _) in zip(site.args, ctor.params):
                        incoming = set()
                        for r in _reads(a):
                            incoming |= var_roots(ctx, r)
                        changed |= absorb(ckey, pname, incoming)
                    continue
                for key in getattr(instr, "dispatch_sigs", []) or []:
                    decl = graph.method_decl.get(key)
                    if decl is None:
                        continue
                    recv_roots = set()
                    for r in _reads(site.recv):
                        recv_roots |= var_roots(ctx, r)
                    changed |= absorb(key, "this", recv_roots)
                    for a, (pname, _) in zip(site.args, decl.params):
                        incoming = set()
                        for r in _reads(a):
                            incoming |= var_roots(ctx, r)
                        changed |= absorb(key, pname, incoming)
                    if isinstance(instr, Assign) and decl.return_var is not None:
                        changed |= absorb(
                            ctx, instr.target, var_roots(key, decl.return_var)
                        )
    return roots


def count_tier1(flat: FlatProgram, graph: CallGraph, assignment: TierAssignment) -> int:
    """Number of tier-1 variables driving the computational instruction.

    User variables of the main context count directly by tier.  Derived
    variables (flattening temporaries, and everything living in callee
    contexts) are attributed to the tier-1 user variables they read and
    count only when rooted in at least two of them, so a loop over one
    tier-1 list contributes exactly one variable.
    """
    roots = _roots_fixpoint(flat, graph, assignment)
    main_ctx = flat.main_ctx
    counted = set()
    extra = 0
    main_tiers = assignment.contexts.get(main_ctx, {})
    occurring = _vars_occurring(flat)
    for name, tier in main_tiers.items():
        if name == "this" or name.startswith("$"):
            continue
        if tier == TIER1 and (main_ctx, name) in occurring:
            counted.add(name)
    seen_rootsets = set()
    for (ctx, name), rs in roots.items():
        is_user_main = ctx == main_ctx and not name.startswith("$") and name != "this"
        if is_user_main:
            continue
        if assignment.tier(ctx, name) != TIER1:
            continue
        if len(rs) >= 2:
            key = frozenset(rs)
            if key not in seen_rootsets:
                seen_rootsets.add(key)
                extra += 1
    return len(counted) + extra


def _vars_occurring(flat: FlatProgram):
    """(ctx, name) pairs occurring in Comp or in reachable bodies."""
    from .callgraph import _walk

    out = set()

    def scan(ctx, body):
        for node in _walk(body):
            if isinstance(node, Assign):
                out.add((ctx, node.target))
                for r in _reads(node.expr):
                    out.add((ctx, r))
            elif isinstance(node, While) and isinstance(node.guard, Var):
                out.add((ctx, node.guard.name))
            else:
                guard = getattr(node, "guard", None)
                if isinstance(guard, Var):
                    out.add((ctx, guard.name))
                call = getattr(node, "call", None)
                if call is not None:
                    for r in _reads(call):
                        out.add((ctx, r))

    scan(flat.main_ctx, flat.comp)
    return out


# ---------------------------------------------------------------------------
# Bound assembly


def bound_report(
    flat: FlatProgram, graph: CallGraph, assignment: TierAssignment
) -> BoundReport:
    n1 = count_tier1(flat, graph, assignment)
    lam = program_level(graph)
    try:
        nu = program_intricacy(graph)
    except IntricacyUndefined:
        nu = None
    time_e = None if nu is None else n1 * (nu + lam)
    stack_e = None if nu is None else n1 * (nu + 2 * lam)
    return BoundReport(n1=n1, nu=nu, lam=lam, time_exponent=time_e, stack_exponent=stack_e)


def per_loop_exponents(
    flat: FlatProgram, graph: CallGraph, assignment: TierAssignment
) -> list:
    """Experimental: a refined exponent per top-level while nest of Comp.

    Counts only tier-1 user variables assigned inside each nest; the nest
    exponent is that count times (nest intricacy + program level).
    """
    from .callgraph import _walk, intricacy

    lam = program_level(graph)
    out = []
    main_ctx = flat.main_ctx
    for node in _walk(flat.comp):
        if not isinstance(node, While):
            continue
        assigned = set()
        for inner in _walk(node):
            if isinstance(inner, Assign) and not inner.target.startswith("$"):
                if assignment.tier(main_ctx, inner.target) == TIER1:
                    assigned.add(inner.target)
        try:
            nest_nu = intricacy(graph, node, None)
        except IntricacyUndefined:
            nest_nu = None
        exponent = None if nest_nu is None else max(1, len(assigned)) * (nest_nu + lam)
        out.append(
            {
                "line": node.line,
                "tier1_assigned": sorted(assigned),
                "intricacy": nest_nu,
                "exponent": exponent,
            }
        )
    return out


# ---------------------------------------------------------------------------
# Empirical validation


@dataclass
class ValidationRow:
    n: int
    input_size: int
    steps: int
    max_heap: int
    max_stack: int
    outcome: str

    def to_json(self):
        return {
            "n": self.n,
            "input_size": self.input_size,
            "steps": self.steps,
            "max_heap_nodes": self.max_heap,
            "max_stack_size": self.max_stack,
            "outcome": self.outcome,
        }


@dataclass
class ValidationVerdict:
    rows: list
    time_ok: bool
    heap_ok: bool
    stack_ok: bool
    slack: float
    fitted: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.time_ok and self.heap_ok and self.stack_ok

    def to_json(self):
        return {
            "rows": [r.to_json() for r in self.rows],
            "time_ok": self.time_ok,
            "heap_ok": self.heap_ok,
            "stack_ok": self.stack_ok,
            "ok": self.ok,
            "slack": self.slack,
            "fitted_constants": self.fitted,
        }


_SCALE_RE = re.compile(r"(int\s+n\s*:=\s*)(\d+)(\s*;)")


def scale_source(source: str, n: int) -> str:
    """Rewrites the first `int n := <literal>;` to the requested size."""
    out, count = _SCALE_RE.subn(lambda m: f"{m.group(1)}{n}{m.group(3)}", source, count=1)
    if count == 0:
        raise ValueError("program has no `int n := <literal>;` scaling hook")
    return out


def validate(
    compile_fn,
    source: str,
    report: BoundReport,
    sizes: list,
    budget: int = 10_000_000,
    slack: float = 1.5,
    tiers: dict | None = None,
    recursive_sigs: set | None = None,
) -> ValidationVerdict:
    """Runs the program at each size and checks the fitted bounds hold.

    `compile_fn` maps source text to a FlatProgram.  The constant for each
    metric is fitted at the smallest size; every larger size must stay
    within `slack` times the fitted bound.  Non-terminating rows are
    excluded from the fit and flagged; passing the safe tier assignment
    enables divergence detection so such rows stop early.
    """
    from .interp import Runner

    rows = []
    for n in sorted(sizes):
        flat = compile_fn(scale_source(source, n))
        runner = Runner(flat, budget=budget)
        result = runner.run(
            tiers=tiers,
            detect_divergence=tiers is not None,
            recursive_sigs=recursive_sigs,
        )
        rows.append(
            ValidationRow(
                n=n,
                input_size=_total_size(result.input_config),
                steps=result.metrics.steps,
                max_heap=result.metrics.max_heap_nodes,
                max_stack=result.metrics.max_stack_size,
                outcome=result.metrics.outcome,
            )
        )

    usable = [r for r in rows if r.outcome == "terminated"]
    if not usable or report.time_exponent is None:
        return ValidationVerdict(rows, False, False, False, slack)

    def bound_time(n):
        return float(n ** max(report.time_exponent, 0))

    def bound_heap(n):
        return float(max(n, n ** max(report.time_exponent, 0)))

    def bound_stack(n):
        # the initial stack is part of the input, so like the heap it never
        # drops below |I|; the exponent bounds the growth beyond it
        return float(max(n, n ** max(report.stack_exponent, 0)))

    base = usable[0]
    fits = {
        "time": base.steps / bound_time(base.n),
        "heap": base.max_heap / bound_heap(base.n),
        "stack": base.max_stack / bound_stack(base.n),
    }

    def holds(metric, value_of, bound_of):
        c = fits[metric]
        return all(value_of(r) <= slack * c * bound_of(r.n) for r in usable)

    return ValidationVerdict(
        rows=rows,
        time_ok=holds("time", lambda r: r.steps, bound_time),
        heap_ok=holds("heap", lambda r: r.max_heap, bound_heap),
        stack_ok=holds("stack", lambda r: r.max_stack, bound_stack),
        slack=slack,
        fitted=fits,
    )


def _total_size(config) -> int:
    from .interp import sizes as config_sizes

    return config_sizes(config)[2]
