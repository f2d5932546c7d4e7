"""The decidable safety criterion for recursive methods.

A well-typed program is safe when every recursive method reachable from
the computational instruction (1) makes exactly one syntactic call into its
own recursion class, (2) has a while-free body (intricacy zero), and
(3) carries tier-1 `this` and parameters with annotation tier 1 in the
recorded assignment.  Verdicts never block the pipeline: failures are
reported per item and per method.
"""

from dataclasses import dataclass, field

from .callgraph import (
    CallGraph,
    IntricacyUndefined,
    intricacy,
    levels,
    program_intricacy,
    program_level,
)
from .syntax import Assign, Call, ExprCall
from .tiers import TIER1, TierAssignment
from .transform import FlatProgram


@dataclass
class MethodSafety:
    sig: str
    recursion_class: list
    item1_calls: int
    item1_ok: bool
    item2_nu: int | None
    item2_ok: bool
    item3_ok: bool
    item3_detail: str
    level: int

    @property
    def safe(self) -> bool:
        return self.item1_ok and self.item2_ok and self.item3_ok

    def to_json(self):
        return {
            "signature": self.sig,
            "recursion_class": self.recursion_class,
            "item1": {"calls_into_class": self.item1_calls, "ok": self.item1_ok},
            "item2": {"intricacy": self.item2_nu, "ok": self.item2_ok},
            "item3": {"ok": self.item3_ok, "detail": self.item3_detail},
            "level": self.level,
            "safe": self.safe,
        }


@dataclass
class SafetyReport:
    safe: bool
    methods: list = field(default_factory=list)  # MethodSafety, recursive only
    program_level: int = 0
    program_intricacy: int | None = None

    def to_json(self):
        return {
            "safe": self.safe,
            "recursive_methods": [m.to_json() for m in self.methods],
            "level": self.program_level,
            "intricacy": self.program_intricacy,
        }


def _count_class_calls(flat: FlatProgram, graph: CallGraph, body, rec_class: set) -> int:
    """Syntactic call sites whose dispatch may land in the recursion class."""
    from .callgraph import _walk

    count = 0
    for node in _walk(body):
        sigs = []
        if isinstance(node, Assign) and isinstance(node.expr, Call):
            sigs = getattr(node, "dispatch_sigs", []) or []
        elif isinstance(node, ExprCall):
            sigs = getattr(node, "dispatch_sigs", []) or []
        if any(s in rec_class for s in sigs):
            count += 1
    return count


def check_safety(
    flat: FlatProgram, graph: CallGraph, assignment: TierAssignment
) -> SafetyReport:
    """Evaluates the three safety items; requires a typable assignment."""
    lv = levels(graph)
    reachable = set(graph.reachable_from_comp())
    methods = []
    for key in sorted(reachable):
        decl = graph.method_decl.get(key)
        if decl is None or not graph.is_recursive(key):
            continue
        rec_class = set(graph.recursion_class(key))
        calls = _count_class_calls(flat, graph, decl.body, rec_class)
        item1 = calls == 1

        try:
            nu = intricacy(graph, decl.body, graph.scc_of.get(key))
            item2 = nu == 0
        except IntricacyUndefined:
            nu = None
            item2 = False

        this_t, params, _, gamma = assignment.method_type(key, decl)
        item3 = this_t == TIER1 and all(p == TIER1 for p in params) and gamma == TIER1
        detail = (
            f"this tier {this_t}, parameter tiers {list(params)}, annotation {gamma}"
        )
        methods.append(
            MethodSafety(
                sig=key,
                recursion_class=sorted(rec_class),
                item1_calls=calls,
                item1_ok=item1,
                item2_nu=nu,
                item2_ok=item2,
                item3_ok=item3,
                item3_detail=detail,
                level=lv[key],
            )
        )

    try:
        nu_p = program_intricacy(graph)
    except IntricacyUndefined:
        nu_p = None
    return SafetyReport(
        safe=all(m.safe for m in methods),
        methods=methods,
        program_level=program_level(graph),
        program_intricacy=nu_p,
    )


def branchwise_relaxation(flat: FlatProgram, graph: CallGraph) -> dict:
    """Diagnostic only: at most one recursive call per syntactic branch.

    Reports, per recursive method, whether every conditional branch contains
    at most one call into the recursion class.  Never changes the verdict.
    """
    from .callgraph import _walk
    from .syntax import If, Seq, Skip, While

    def max_calls_any_path(body, rec_class):
        if isinstance(body, Seq):
            return sum(max_calls_any_path(x, rec_class) for x in body.items)
        if isinstance(body, If):
            return max(
                max_calls_any_path(body.then, rec_class),
                max_calls_any_path(body.els, rec_class),
            )
        if isinstance(body, While):
            return max_calls_any_path(body.body, rec_class)
        if isinstance(body, Skip):
            return 0
        sigs = []
        if isinstance(body, Assign) and isinstance(body.expr, Call):
            sigs = getattr(body, "dispatch_sigs", []) or []
        elif isinstance(body, ExprCall):
            sigs = getattr(body, "dispatch_sigs", []) or []
        return 1 if any(s in rec_class for s in sigs) else 0

    out = {}
    for key in sorted(set(graph.reachable_from_comp())):
        decl = graph.method_decl.get(key)
        if decl is None or not graph.is_recursive(key):
            continue
        rec_class = set(graph.recursion_class(key))
        out[key] = max_calls_any_path(decl.body, rec_class) <= 1
    return out
