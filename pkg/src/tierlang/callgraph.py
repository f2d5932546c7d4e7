"""Call relation over method signatures, recursion detection, level, intricacy.

Edges follow every syntactic call, statically resolved to the least
superclass defining the method, and additionally run from each method to
every override of it in a subclass (overriding methods are treated as
callable from the overridden one, which keeps the recursion classes
computable).  Constructors and the main entry participate as extra nodes so
reachability from the computational instruction is available, but recursion
classes and levels are reported for methods.
"""

from dataclasses import dataclass, field

from .syntax import (
    Assign,
    Call,
    ExprCall,
    If,
    Instruction,
    New,
    Seq,
    Skip,
    This,
    While,
    ctor_signature,
    method_signature,
)
from .transform import FlatProgram

COMP_NODE = "$comp"
INIT_NODE = "$init"


@dataclass
class CallGraph:
    flat: FlatProgram
    edges: dict = field(default_factory=dict)  # key -> sorted list of keys
    method_decl: dict = field(default_factory=dict)  # sig key -> MethodDecl
    ctor_decl: dict = field(default_factory=dict)  # sig key -> ConstructorDecl
    scc_of: dict = field(default_factory=dict)  # key -> scc id
    sccs: list = field(default_factory=list)  # scc id -> [keys]
    recursive: set = field(default_factory=set)  # method sig keys with s <+ s

    def succ(self, key: str) -> list:
        return self.edges.get(key, [])

    def reachable(self, start: str) -> list:
        seen = []
        work = [start]
        seen_set = set()
        while work:
            cur = work.pop(0)
            if cur in seen_set:
                continue
            seen_set.add(cur)
            seen.append(cur)
            work.extend(self.succ(cur))
        return seen

    def reachable_from_comp(self) -> list:
        """Method/constructor keys reachable from the computational instruction."""
        return [k for k in self.reachable(COMP_NODE) if k != COMP_NODE]

    def recursion_class(self, key: str) -> list:
        """The set [s]: signatures mutually reachable with s, when recursive."""
        if key not in self.recursive:
            return []
        return [k for k in self.sccs[self.scc_of[key]] if k in self.method_decl]

    def is_recursive(self, key: str) -> bool:
        return key in self.recursive


def _calls_in(instr: Instruction):
    """Yields (node, Call or New) for every call/new site in a flattened body."""
    for node in _walk(instr):
        if isinstance(node, Assign):
            if isinstance(node.expr, (Call, New)):
                yield node, node.expr
        elif isinstance(node, ExprCall):
            yield node, node.call


def _walk(i: Instruction):
    yield i
    if isinstance(i, Seq):
        for x in i.items:
            yield from _walk(x)
    elif isinstance(i, While):
        yield from _walk(i.body)
    elif isinstance(i, If):
        yield from _walk(i.then)
        yield from _walk(i.els)


def build_call_graph(flat: FlatProgram) -> CallGraph:
    g = CallGraph(flat)
    table = flat.table
    types = flat.types

    bodies = {}  # node key -> (ctx key, instruction, owner class)
    for cls in flat.program.classes.values():
        for m in cls.methods:
            key = method_signature(m).key()
            g.method_decl[key] = m
            bodies[key] = (key, m.body, cls.name)
        for c in cls.constructors:
            key = ctor_signature(c).key()
            g.ctor_decl[key] = c
            bodies[key] = (key, c.body, cls.name)
    main_ctx = flat.main_ctx
    exe = flat.program.exe_class
    bodies[COMP_NODE] = (main_ctx, flat.comp, exe)
    bodies[INIT_NODE] = (main_ctx, flat.init, exe)

    edges = {k: set() for k in bodies}
    for node_key, (ctx, body, owner) in bodies.items():
        for instr, site in _calls_in(body):
            if isinstance(site, New):
                ctor = table.resolve_ctor(site.cls, len(site.args))
                if ctor is not None:
                    edges[node_key].add(ctor_signature(ctor).key())
                continue
            recv = site.recv
            if isinstance(recv, This):
                recv_cls = owner
            else:
                t = types.var_type(ctx, recv.name)
                recv_cls = t.name if t is not None and t.is_reference else None
            if recv_cls is None:
                continue
            decl = table.resolve(recv_cls, site.method, len(site.args))
            if decl is None:
                continue
            primary = method_signature(decl).key()
            candidates = [primary] + [
                method_signature(o).key() for o in table.overrides(decl)
            ]
            instr.resolved_sig = primary
            instr.dispatch_sigs = candidates
            edges[node_key].add(primary)

    # override edges: the overridden method "calls" each override
    for key, decl in list(g.method_decl.items()):
        for o in table.overrides(decl):
            edges[key].add(method_signature(o).key())

    g.edges = {k: sorted(v) for k, v in edges.items()}
    _compute_sccs(g)
    return g


def _compute_sccs(g: CallGraph):
    order = sorted(g.edges)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    counter = [1]
    sccs = []

    for root in order:
        if root in index:
            continue
        work = [(root, iter(g.succ(root)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(g.succ(succ))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                members = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    members.append(w)
                    if w == node:
                        break
                sid = len(sccs)
                sccs.append(sorted(members))
                for w in members:
                    g.scc_of[w] = sid
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    g.sccs = sccs

    for key in g.method_decl:
        sid = g.scc_of[key]
        members = g.sccs[sid]
        if len(members) > 1:
            g.recursive.add(key)
        elif key in g.succ(key):
            g.recursive.add(key)


# ---------------------------------------------------------------------------
# Level


def levels(g: CallGraph) -> dict:
    """The level of every node, by DP over the SCC condensation."""
    memo: dict[int, int] = {}

    def scc_level(sid: int) -> int:
        if sid in memo:
            return memo[sid]
        members = g.sccs[sid]
        succ_levels = [
            scc_level(g.scc_of[t])
            for m in members
            for t in g.succ(m)
            if g.scc_of[t] != sid
        ]
        below = max(succ_levels, default=0)
        recursive = len(members) > 1 or any(m in g.succ(m) for m in members)
        memo[sid] = below + 1 if recursive else below
        return memo[sid]

    return {key: scc_level(g.scc_of[key]) for key in g.edges}


def level(g: CallGraph, sig_key: str) -> int:
    return levels(g)[sig_key]


def program_level(g: CallGraph) -> int:
    """Max level over methods reachable from the computational instruction."""
    lv = levels(g)
    reach = [k for k in g.reachable_from_comp() if k in g.method_decl]
    return max((lv[k] for k in reach), default=0)


# ---------------------------------------------------------------------------
# Intricacy


class IntricacyUndefined(Exception):
    """A recursive method body contains a while loop."""

    def __init__(self, sig_key: str):
        super().__init__(f"intricacy undefined: while loop in recursive {sig_key}")
        self.sig_key = sig_key


def _scc_has_while(g: CallGraph, sid: int) -> str | None:
    for key in g.sccs[sid]:
        decl = g.method_decl.get(key)
        if decl is None:
            continue
        for node in _walk(decl.body):
            if isinstance(node, While):
                return key
    return None


def intricacy(g: CallGraph, instr: Instruction, own_scc: int | None = None) -> int:
    """Nested while depth of a meta-instruction, traversing method calls.

    Calls dispatch to every candidate body; a call that stays inside the
    caller's own recursion class contributes 0 (the class was first checked
    to be while-free, otherwise IntricacyUndefined is raised).
    """
    memo: dict[str, int] = {}

    def of_sig(key: str) -> int:
        if key in memo:
            return memo[key]
        sid = g.scc_of.get(key)
        members = g.sccs[sid] if sid is not None else [key]
        recursive = len(members) > 1 or key in g.succ(key)
        if recursive:
            offender = _scc_has_while(g, sid)
            if offender is not None:
                raise IntricacyUndefined(offender)
        memo[key] = 0  # breaks in-SCC cycles: such calls contribute 0
        decl = g.method_decl.get(key) or g.ctor_decl.get(key)
        if decl is not None:
            memo[key] = of_instr(decl.body, sid)
        return memo[key]

    def of_call(node, sid) -> int:
        sigs = getattr(node, "dispatch_sigs", None)
        if not sigs:
            return 0
        return max((of_sig(s) for s in sigs), default=0)

    def of_instr(i: Instruction, sid) -> int:
        if isinstance(i, Skip):
            return 0
        if isinstance(i, Assign):
            if isinstance(i.expr, Call):
                return of_call(i, sid)
            return 0
        if isinstance(i, ExprCall):
            return of_call(i, sid)
        if isinstance(i, Seq):
            return max((of_instr(x, sid) for x in i.items), default=0)
        if isinstance(i, If):
            return max(of_instr(i.then, sid), of_instr(i.els, sid))
        if isinstance(i, While):
            return 1 + of_instr(i.body, sid)
        return 0

    return of_instr(instr, own_scc)


def method_intricacy(g: CallGraph, sig_key: str) -> int:
    decl = g.method_decl.get(sig_key) or g.ctor_decl.get(sig_key)
    if decl is None:
        raise KeyError(sig_key)
    return intricacy(g, decl.body, g.scc_of.get(sig_key))


def program_intricacy(g: CallGraph) -> int:
    """Max intricacy over Comp and every body reachable from it."""
    best = intricacy(g, g.flat.comp, g.scc_of.get(COMP_NODE))
    for key in g.reachable_from_comp():
        decl = g.method_decl.get(key) or g.ctor_decl.get(key)
        if decl is None:
            continue
        best = max(best, intricacy(g, decl.body, g.scc_of.get(key)))
    return best
