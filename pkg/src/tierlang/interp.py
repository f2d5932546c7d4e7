"""Small-step pointer-graph semantics for flattened programs.

A configuration pairs a pointer graph (nodes labeled by classes, one arrow
per (node, field)) with a stack of frames.  One reduction step consumes the
head of a continuation list of meta-instructions.  Method and constructor
calls expand, in a single step, into an explicit push; body; [return copy];
pop sequence, so the stack behaviour stays observable to the metering and
to the subject-reduction checks.

Field reads resolve through the graph arrow of the current object whenever
`this` is non-null; the copies pushed into a frame at call time only serve
the null-receiver case.  Writing a field of a null `this` skips.
"""

from dataclasses import dataclass, field as dc_field

from .errors import AooError, StuckError
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
    ctor_signature,
    method_signature,
)
from .operators import apply as op_apply, lookup as op_lookup
from .transform import FlatProgram
from .typecheck import ProgramTypes
from .values import NULL_REF, NodeRef, default_value, value_size, value_token

OUTCOME_TERMINATED = "terminated"
OUTCOME_BUDGET = "budget-exhausted"
OUTCOME_DIVERGENCE = "divergence-detected"


# ---------------------------------------------------------------------------
# Memory model


@dataclass
class PointerGraph:
    labels: dict = dc_field(default_factory=lambda: {0: "null"})
    arrows: dict = dc_field(default_factory=dict)  # (node id, field) -> value
    next_id: int = 1

    def new_node(self, label: str) -> NodeRef:
        nid = self.next_id
        self.next_id += 1
        self.labels[nid] = label
        return NodeRef(nid)

    def set_arrow(self, src: NodeRef, field: str, value):
        # replaces any previous arrow with the same source and label
        self.arrows[(src.id, field)] = value

    def get_arrow(self, src: NodeRef, field: str):
        return self.arrows.get((src.id, field))

    @property
    def node_count(self) -> int:
        return len(self.labels)

    def copy(self) -> "PointerGraph":
        return PointerGraph(dict(self.labels), dict(self.arrows), self.next_id)


@dataclass
class Frame:
    ctx: str  # context key (signature string)
    cls: str  # defining class of the running method (field universe)
    mapping: dict  # variable -> value
    # tier of the instruction whose call pushed this frame; frames pushed by
    # tier-0 instructions are transient tier-0 work and invisible to the
    # observational tier-1 equivalence
    origin_tier: int = 1

    def size(self) -> int:
        return 1 + sum(value_size(v) for v in self.mapping.values())

    def copy(self) -> "Frame":
        return Frame(self.ctx, self.cls, dict(self.mapping), self.origin_tier)


@dataclass
class Config:
    graph: PointerGraph
    stack: list  # of Frame, top last
    stack_size: int = 0  # cached sum of frame sizes

    @property
    def top(self) -> Frame:
        return self.stack[-1]

    def copy(self) -> "Config":
        return Config(
            self.graph.copy(), [f.copy() for f in self.stack], self.stack_size
        )


@dataclass
class RunMetrics:
    steps: int = 0
    max_heap_nodes: int = 0
    max_stack_size: int = 0
    outcome: str = OUTCOME_TERMINATED

    def to_json(self) -> dict:
        return {
            "steps": self.steps,
            "max_heap_nodes": self.max_heap_nodes,
            "max_stack_size": self.max_stack_size,
            "outcome": self.outcome,
        }


def sizes(config: Config):
    """Returns (heap, stack, total) per the size definition."""
    heap = config.graph.node_count
    stack = sum(f.size() for f in config.stack)
    return heap, stack, heap + stack


def mapping_size(mapping: dict) -> int:
    return sum(value_size(v) for v in mapping.values())


# ---------------------------------------------------------------------------
# Machine


class Machine:
    """Owns one flattened program and executes configurations over it."""

    def __init__(self, flat: FlatProgram):
        self.flat = flat
        self.table = flat.table
        self.types: ProgramTypes = flat.types
        self.main_ctx = flat.main_ctx
        # optional TierView; when present, frames pushed by tier-0-typed
        # instructions are marked invisible to the observational equivalence
        self.tier_view = None

    # -- variable access ----------------------------------------------------

    def _is_field(self, frame: Frame, name: str) -> bool:
        if (frame.ctx, name) in self.types.var_types:
            return False
        return self.table.field_type(frame.cls, name) is not None

    def read_in_frame(self, config: Config, frame: Frame, name: str):
        if name == "this":
            return frame.mapping.get("this", NULL_REF)
        if self._is_field(frame, name):
            this = frame.mapping.get("this", NULL_REF)
            if this != NULL_REF:
                arrow = config.graph.get_arrow(this, name)
                if arrow is not None:
                    return arrow
                return default_value(self.table.field_type(frame.cls, name))
            if name in frame.mapping:  # copy pushed at call time
                return frame.mapping[name]
            return default_value(self.table.field_type(frame.cls, name))
        if name in frame.mapping:
            return frame.mapping[name]
        t = self.types.var_type(frame.ctx, name)
        if t is None:
            raise StuckError(f"variable {name!r} unknown in context {frame.ctx}")
        return default_value(t)

    def read(self, config: Config, name: str):
        return self.read_in_frame(config, config.top, name)

    def write(self, config: Config, name: str, value, frame_index: int = -1):
        frame = config.stack[frame_index]
        if name != "this" and self._is_field(frame, name):
            this = frame.mapping.get("this", NULL_REF)
            if this != NULL_REF:
                config.graph.set_arrow(this, name, value)
            return  # field write on null this: skip
        had = name in frame.mapping
        old = frame.mapping.get(name)
        frame.mapping[name] = value
        config.stack_size += value_size(value) - (value_size(old) if had else 0)

    # -- initial configurations ----------------------------------------------

    def initial_config(self) -> Config:
        mapping = {}
        for (ctx, name), t in self.types.var_types.items():
            if ctx == self.main_ctx:
                mapping[name] = default_value(t)
        frame = Frame(self.main_ctx, self.flat.program.exe_class, mapping)
        config = Config(PointerGraph(), [frame])
        config.stack_size = frame.size()
        return config

    # -- continuations ---------------------------------------------------------

    @staticmethod
    def cont_of(instr: Instruction, tail=None):
        """Builds a cons-list continuation; Seq trees are linearized."""
        items = []

        def collect(i):
            if isinstance(i, Seq):
                for x in i.items:
                    collect(x)
            else:
                items.append(i)

        collect(instr)
        cont = tail
        for node in reversed(items):
            cont = (node, cont)
        return cont

    # -- single step -----------------------------------------------------------

    def step(self, config: Config, cont):
        """Performs exactly one reduction; returns the new continuation.

        The configuration is updated in place.  Raises StuckError when no
        rule applies (unreachable for type-correct flattened programs).
        """
        if cont is None:
            raise StuckError("cannot step the empty meta-instruction")
        node, rest = cont

        if isinstance(node, Skip):
            return rest
        if isinstance(node, Assign):
            return self._step_assign(config, node, rest)
        if isinstance(node, ExprCall):
            return self._expand_call(config, node.call, None, node.ctx, rest)
        if isinstance(node, While):
            guard = self.read(config, node.guard.name)
            if guard is True:
                return self.cont_of(node.body, cont)
            if guard is False:
                return rest
            raise StuckError(f"while guard {node.guard.name!r} is not a boolean")
        if isinstance(node, If):
            guard = self.read(config, node.guard.name)
            if guard is True:
                return self.cont_of(node.then, rest)
            if guard is False:
                return self.cont_of(node.els, rest)
            raise StuckError(f"if guard {node.guard.name!r} is not a boolean")
        if isinstance(node, PushMark):
            frame = node.frame
            config.stack.append(frame)
            config.stack_size += frame.size()
            return rest
        if isinstance(node, PopMark):
            frame = config.stack.pop()
            config.stack_size -= frame.size()
            return rest
        if isinstance(node, RetAssign):
            value = self.read(config, node.retvar)
            self.write(config, node.target, value, frame_index=-2)
            return rest
        raise StuckError(f"no rule applies to {type(node).__name__}")

    def _atom(self, config: Config, e):
        if isinstance(e, Var):
            return self.read(config, e.name)
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Null):
            return NULL_REF
        if isinstance(e, This):
            return config.top.mapping.get("this", NULL_REF)
        raise StuckError(f"argument {e!r} is not atomic")

    def _step_assign(self, config: Config, node: Assign, rest):
        e = node.expr
        if isinstance(e, (Var, Const, Null, This)):
            self.write(config, node.target, self._atom(config, e))
            return rest
        if isinstance(e, OpApply):
            spec = op_lookup(e.op)
            if spec is None:
                raise StuckError(f"unknown operator {e.op!r}")
            args = [self._atom(config, a) for a in e.args]
            _check_operands(spec, e.op, args)
            self.write(config, node.target, op_apply(spec, args))
            return rest
        if isinstance(e, New):
            return self._expand_new(config, e, node, rest)
        if isinstance(e, Call):
            return self._expand_call(config, e, node.target, node.ctx, rest)
        raise StuckError(f"cannot evaluate {e!r}")

    def _expand_new(self, config: Config, e: New, node: Assign, rest):
        args = [self._atom(config, a) for a in e.args]
        obj = config.graph.new_node(e.cls)
        self.write(config, node.target, obj)
        ctor = self.table.resolve_ctor(e.cls, len(e.args))
        if ctor is None:
            raise StuckError(f"no constructor {e.cls}/{len(e.args)}")
        ctx = ctor_signature(ctor).key()
        mapping = dict(config.top.mapping)
        mapping["this"] = obj
        for fname, ftype in self.table.fields(e.cls):
            mapping[fname] = default_value(ftype)
        for (pname, _), v in zip(ctor.params, args):
            mapping[pname] = v
        # constructor calls type at tier 0: the activation is invisible work
        origin = 0 if self.tier_view is not None else 1
        frame = Frame(ctx, e.cls, mapping, origin_tier=origin)
        push = PushMark(frame=frame)
        push.ctx = ctx
        pop = PopMark()
        pop.ctx = ctx
        return (push, self.cont_of(ctor.body, (pop, rest)))

    def _expand_call(self, config: Config, e: Call, target, caller_ctx, rest):
        recv = self._atom(config, e.recv)
        args = [self._atom(config, a) for a in e.args]
        if isinstance(recv, NodeRef) and recv != NULL_REF:
            dyn_cls = config.graph.labels[recv.id]
        else:
            dyn_cls = self._static_recv_class(config, e)
        decl = self.table.resolve(dyn_cls, e.method, len(e.args))
        if decl is None:
            raise StuckError(f"method {e.method!r}/{len(e.args)} not found on {dyn_cls!r}")
        ctx = method_signature(decl).key()
        runtime_cls = dyn_cls

        mapping = dict(config.top.mapping)
        mapping["this"] = recv
        for fname, ftype in self.table.fields(runtime_cls):
            if isinstance(recv, NodeRef) and recv != NULL_REF:
                arrow = config.graph.get_arrow(recv, fname)
                mapping[fname] = arrow if arrow is not None else default_value(ftype)
            else:
                mapping[fname] = default_value(ftype)
        for (pname, _), v in zip(decl.params, args):
            mapping[pname] = v
        # the call instruction's tier is the join of the result tier and the
        # method annotation; a tier-0 call is confined tier-0 work and its
        # activation stays invisible to the observational equivalence
        origin = 1
        if self.tier_view is not None:
            ret_tier = (
                self.tier_view.tier(ctx, decl.return_var)
                if decl.return_var is not None
                else 0
            )
            origin = max(ret_tier, self.tier_view.gamma(ctx))
        frame = Frame(ctx, decl.owner, mapping, origin_tier=origin)

        push = PushMark(frame=frame)
        push.ctx = ctx
        pop = PopMark()
        pop.ctx = ctx
        tail = (pop, rest)
        if target is not None and decl.return_var is not None:
            ret = RetAssign(
                target=target,
                retvar=decl.return_var,
                caller_ctx=caller_ctx,
                callee_ctx=ctx,
            )
            ret.ctx = ctx
            tail = (ret, tail)
        return (push, self.cont_of(decl.body, tail))

    def _static_recv_class(self, config: Config, e: Call) -> str:
        if isinstance(e.recv, This):
            return config.top.cls
        t = self.types.var_type(config.top.ctx, e.recv.name)
        if t is None or not t.is_reference:
            raise StuckError(f"receiver {e.recv!r} has no class")
        return t.name


def _check_operands(spec, op, args):
    for kind, a in zip(spec.arg_kinds, args):
        if kind == "int" and (isinstance(a, bool) or not isinstance(a, int)):
            raise StuckError(f"operator {op!r} applied to non-int {a!r}")
        if kind == "boolean" and not isinstance(a, bool):
            raise StuckError(f"operator {op!r} applied to non-boolean {a!r}")


# ---------------------------------------------------------------------------
# Tier-1 views: equivalence, fingerprints, traces


def observed_frames(config: Config, observational: bool) -> list:
    """The frames the tier-1 equivalence compares.

    Observationally, the stack is cut at the first frame pushed by a
    tier-0-typed instruction: by confinement such activations (and anything
    they push) only perform tier-0 work, so they are transient noise for
    the tier-1 view.  The strict variant, used as the divergence memo key,
    keeps every frame.
    """
    if not observational:
        return list(config.stack)
    out = []
    for frame in config.stack:
        if frame.origin_tier == 0:
            break
        out.append(frame)
    return out


def tier1_reachable(machine: Machine, config: Config, view, observational=False):
    """Nodes and arrows reachable from tier-1 reference variables."""
    roots = []
    for frame in observed_frames(config, observational):
        for name in view.tier1_names(frame.ctx):
            v = machine.read_in_frame(config, frame, name)
            if isinstance(v, NodeRef) and v != NULL_REF:
                roots.append(v.id)
    adjacency = {}
    for (src, fld), tgt in config.graph.arrows.items():
        adjacency.setdefault(src, []).append((fld, tgt))
    seen = set()
    work = list(roots)
    arrows = {}
    while work:
        nid = work.pop()
        if nid in seen:
            continue
        seen.add(nid)
        for fld, tgt in adjacency.get(nid, ()):
            arrows[(nid, fld)] = tgt
            if isinstance(tgt, NodeRef) and tgt != NULL_REF and tgt.id not in seen:
                work.append(tgt.id)
    return seen, arrows


def tier1_fingerprint(machine: Machine, config: Config, view, observational=False):
    """Hashable digest of the tier-1 part of a configuration."""
    frames = []
    for frame in observed_frames(config, observational):
        vals = tuple(
            (name, value_token(machine.read_in_frame(config, frame, name)))
            for name in view.tier1_names(frame.ctx)
        )
        frames.append((frame.ctx, vals))
    nodes, arrows = tier1_reachable(machine, config, view, observational)
    graph_part = tuple(
        sorted(
            (src, fld, value_token(tgt) if not isinstance(tgt, NodeRef) else ("ref", tgt.id))
            for (src, fld), tgt in arrows.items()
        )
    )
    labels = tuple(sorted((n, config.graph.labels.get(n)) for n in nodes))
    return (tuple(frames), labels, graph_part)


def tier1_equivalent(machine: Machine, a: Config, b: Config, view) -> bool:
    """The configuration equivalence: equal tier-1 subgraphs, and stacks that
    agree on tier-1 variables frame for frame, ignoring transient tier-0
    activations."""
    fa = observed_frames(a, True)
    fb = observed_frames(b, True)
    if len(fa) != len(fb):
        return False
    for xa, xb in zip(fa, fb):
        if xa.ctx != xb.ctx:
            return False
        for name in view.tier1_names(xa.ctx):
            va = machine.read_in_frame(a, xa, name)
            vb = machine.read_in_frame(b, xb, name)
            if va != vb:
                return False
    na, aa = tier1_reachable(machine, a, view, True)
    nb, ab = tier1_reachable(machine, b, view, True)
    if na != nb or aa != ab:
        return False
    la = {n: a.graph.labels.get(n) for n in na}
    lb = {n: b.graph.labels.get(n) for n in nb}
    return la == lb


# ---------------------------------------------------------------------------
# Full runs


@dataclass
class RunResult:
    input_config: Config
    final_config: Config | None
    metrics: RunMetrics


class Runner:
    def __init__(self, flat: FlatProgram, budget: int = 10_000_000):
        self.machine = Machine(flat)
        self.flat = flat
        self.budget = budget

    def run_init(self) -> Config:
        """Executes Init from the initial configuration, yielding the input."""
        config = self.machine.initial_config()
        cont = self.machine.cont_of(self.flat.init)
        steps = 0
        while cont is not None:
            cont = self.machine.step(config, cont)
            steps += 1
            if steps > self.budget:
                raise AooError("initialization exceeded the step budget")
        return config

    def run_comp(
        self,
        input_config: Config,
        comp: Instruction | None = None,
        tiers=None,
        detect_divergence: bool = False,
        recursive_sigs: set | None = None,
        on_step=None,
    ):
        """Executes Comp from the input; returns (final or None, metrics).

        `tiers` is a TierView; passing it marks tier-0 call activations on
        their frames and enables divergence detection when requested.
        """
        machine = self.machine
        machine.tier_view = tiers
        config = input_config
        comp = comp if comp is not None else self.flat.comp
        cont = machine.cont_of(comp)
        metrics = RunMetrics()
        heap0, stack0, _ = sizes(config)
        config.stack_size = stack0
        metrics.max_heap_nodes = heap0
        metrics.max_stack_size = stack0

        memo = {}
        memo_cells = {}
        recursive_sigs = recursive_sigs or set()

        while cont is not None:
            head = cont[0]
            if detect_divergence and tiers is not None:
                watch = isinstance(head, While) or (
                    isinstance(head, (Assign, ExprCall))
                    and _call_sig_key(head) in recursive_sigs
                )
                if watch:
                    key = (id(cont), tier1_fingerprint(machine, config, tiers))
                    if key in memo:
                        metrics.outcome = OUTCOME_DIVERGENCE
                        return None, metrics
                    memo[key] = True
                    memo_cells[id(cont)] = cont  # keep ids stable
            cont = machine.step(config, cont)
            metrics.steps += 1
            if config.graph.node_count > metrics.max_heap_nodes:
                metrics.max_heap_nodes = config.graph.node_count
            if config.stack_size > metrics.max_stack_size:
                metrics.max_stack_size = config.stack_size
            if on_step is not None:
                on_step(config, cont, metrics)
            if metrics.steps >= self.budget and cont is not None:
                metrics.outcome = OUTCOME_BUDGET
                return None, metrics
        metrics.outcome = OUTCOME_TERMINATED
        return config, metrics

    def run(self, tiers=None, detect_divergence=False, recursive_sigs=None) -> RunResult:
        input_config = self.run_init()
        snapshot = input_config.copy()
        final, metrics = self.run_comp(
            input_config,
            tiers=tiers,
            detect_divergence=detect_divergence,
            recursive_sigs=recursive_sigs,
        )
        return RunResult(input_config=snapshot, final_config=final, metrics=metrics)


def _call_sig_key(node) -> str | None:
    if isinstance(node, ExprCall):
        return getattr(node, "resolved_sig", None)
    if isinstance(node, Assign) and isinstance(node.expr, Call):
        return getattr(node, "resolved_sig", None)
    return None


def trace_tier1(
    machine: Machine,
    start: Config,
    comp: Instruction,
    tiers,
    budget: int = 1_000_000,
):
    """The distinct tier-1 configuration sequence of one execution.

    Records each configuration that is not tier-1 equivalent to its
    successor, then the final one.  Returns (snapshots, exhausted_flag).
    """
    config = start
    machine.tier_view = tiers
    cont = machine.cont_of(comp)
    out = []
    steps = 0
    prev_fp = tier1_fingerprint(machine, config, tiers, observational=True)
    while cont is not None:
        before = config.copy()
        cont = machine.step(config, cont)
        steps += 1
        fp = tier1_fingerprint(machine, config, tiers, observational=True)
        if fp != prev_fp:
            out.append(before)
        prev_fp = fp
        if steps >= budget:
            return out, True
    out.append(config.copy())
    return out, False
