"""2-SAT solving over an implication graph.

Satisfiability is decided with Tarjan's strongly-connected components: a
formula is unsatisfiable iff some variable shares a component with its
negation.  The extracted model is deterministic, and a greedy pass then
lowers every literal that can be lowered, so unconstrained variables come
out false (tier 0).
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Clause:
    a: int  # literal: +v or -v, v >= 1
    b: int
    origin: object = None  # (rule, location) tag for unsat cores

    def literals(self):
        return (self.a, self.b)


@dataclass
class ClauseSet:
    """A growable 2-CNF with named boolean variables."""

    names: list = field(default_factory=list)  # index -> name (var = index+1)
    index: dict = field(default_factory=dict)  # name -> var
    clauses: list = field(default_factory=list)

    def var(self, name) -> int:
        v = self.index.get(name)
        if v is None:
            v = len(self.names) + 1
            self.names.append(name)
            self.index[name] = v
        return v

    def add(self, a: int, b: int, origin=None):
        self.clauses.append(Clause(a, b, origin))

    # convenience constraint forms -------------------------------------

    def unit(self, lit: int, origin=None):
        self.add(lit, lit, origin)

    def implies(self, a: int, b: int, origin=None):
        """a -> b, i.e. (!a | b)."""
        self.add(-a, b, origin)

    def equiv(self, a: int, b: int, origin=None):
        self.implies(a, b, origin)
        self.implies(b, a, origin)

    def contradiction(self, origin=None):
        v = self.var(("$false", len(self.clauses)))
        self.unit(v, origin)
        self.unit(-v, origin)


@dataclass
class SatResult:
    satisfiable: bool
    model: dict | None = None  # name -> bool
    core: list = field(default_factory=list)  # clause origins on unsat


def solve_2sat(cs: ClauseSet) -> SatResult:
    n = len(cs.names)
    # literal encoding: lit +v -> 2(v-1), -v -> 2(v-1)+1
    def enc(lit):
        v = abs(lit) - 1
        return 2 * v + (0 if lit > 0 else 1)

    def neg(x):
        return x ^ 1

    graph = [[] for _ in range(2 * n)]
    for c in cs.clauses:
        # (a | b) == (!a -> b) and (!b -> a)
        graph[neg(enc(c.a))].append(enc(c.b))
        graph[neg(enc(c.b))].append(enc(c.a))

    comp = _tarjan_scc(graph)

    for v in range(n):
        if comp[2 * v] == comp[2 * v + 1]:
            name = cs.names[v]
            return SatResult(False, None, _unsat_core(cs, v + 1))

    # var true iff its positive literal's component is later in reverse
    # topological order than the negative one
    assign = {}
    for v in range(n):
        assign[cs.names[v]] = comp[2 * v] < comp[2 * v + 1]

    _minimize(cs, assign)
    return SatResult(True, assign)


def _tarjan_scc(graph):
    """Iterative Tarjan; components are numbered in reverse topological order."""
    n = len(graph)
    index = [0] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack = []
    counter = [1]
    comp_count = [0]

    for root in range(n):
        if index[root]:
            continue
        work = [(root, 0)]
        while work:
            node, ei = work[-1]
            if ei == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            edges = graph[node]
            while ei < len(edges):
                succ = edges[ei]
                ei += 1
                if not index[succ]:
                    work[-1] = (node, ei)
                    work.append((succ, 0))
                    advanced = True
                    break
                if on_stack[succ]:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = comp_count[0]
                    if w == node:
                        break
                comp_count[0] += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            else:
                pass
    return comp


def _minimize(cs: ClauseSet, assign: dict):
    """Replaces the model with the least one when the clause set allows it.

    The generated constraint systems are Horn-shaped (implications,
    equivalences, units), so starting from all-false and propagating forced
    positives yields the unique minimal model.  If propagation fails (a
    genuinely non-Horn clause or a conflict), fall back to a greedy
    variable-at-a-time lowering of the solver's model.
    """
    least = _least_model(cs)
    if least is not None:
        assign.update(least)
        return

    by_var: dict[int, list] = {}
    for c in cs.clauses:
        for lit in c.literals():
            by_var.setdefault(abs(lit), []).append(c)

    def lit_true(lit):
        val = assign[cs.names[abs(lit) - 1]]
        return val if lit > 0 else not val

    changed = True
    while changed:
        changed = False
        for v in range(1, len(cs.names) + 1):
            name = cs.names[v - 1]
            if not assign[name]:
                continue
            assign[name] = False
            if all(lit_true(c.a) or lit_true(c.b) for c in by_var.get(v, ())):
                changed = True
            else:
                assign[name] = True


def _least_model(cs: ClauseSet):
    n = len(cs.names)
    value = [False] * n

    def lit_val(lit):
        v = value[abs(lit) - 1]
        return v if lit > 0 else not v

    watch: dict[int, list] = {}  # literal -> clauses containing it
    for c in cs.clauses:
        watch.setdefault(c.a, []).append(c)
        if c.b != c.a:
            watch.setdefault(c.b, []).append(c)

    queue = []
    for c in cs.clauses:
        if c.a == c.b:
            if c.a > 0 and not value[c.a - 1]:
                value[c.a - 1] = True
                queue.append(c.a)
        elif c.a > 0 and c.b > 0:
            return None  # two distinct positive literals: not Horn

    while queue:
        lit = queue.pop()
        # clauses containing the now-false literal -lit force their other side
        for c in watch.get(-lit, ()):
            other = c.b if c.a == -lit else c.a
            if lit_val(other):
                continue
            if other < 0:
                return None  # would need to lower a forced-true variable
            value[other - 1] = True
            queue.append(other)

    for c in cs.clauses:
        if not lit_val(c.a) and not lit_val(c.b):
            return None
    return {cs.names[i]: value[i] for i in range(n)}


def _unsat_core(cs: ClauseSet, v: int) -> list:
    """Clause origins on implication paths v -> !v and !v -> v."""
    n = len(cs.names)

    def enc(lit):
        return 2 * (abs(lit) - 1) + (0 if lit > 0 else 1)

    def neg(x):
        return x ^ 1

    edges: dict[int, list] = {}
    for c in cs.clauses:
        edges.setdefault(neg(enc(c.a)), []).append((enc(c.b), c))
        edges.setdefault(neg(enc(c.b)), []).append((enc(c.a), c))

    def path(src, dst):
        prev = {src: None}
        queue = [src]
        while queue:
            cur = queue.pop(0)
            if cur == dst:
                break
            for nxt, clause in edges.get(cur, ()):
                if nxt not in prev:
                    prev[nxt] = (cur, clause)
                    queue.append(nxt)
        if dst not in prev:
            return []
        out = []
        cur = dst
        while prev[cur] is not None:
            cur, clause = prev[cur]
            out.append(clause)
        return out[::-1]

    pos, negl = enc(v), enc(-v)
    core = path(pos, negl) + path(negl, pos)
    seen = []
    for c in core:
        if c.origin is not None and c.origin not in seen:
            seen.append(c.origin)
    return seen
