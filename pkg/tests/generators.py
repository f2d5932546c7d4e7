"""Random well-formed programs plus a brute-force typability oracle.

The generator emits small programs over ints, booleans, and one list class,
built so they always parse, are well-formed, and pass the tier-erased type
check -- only tier inference is in question.  The oracle enumerates every
tier assignment over the constraint variables the encoder would use and
replays each through the declarative checker; annotation tiers are not
enumerated but derived as the least fixpoint, which suffices because
raising an annotation only ever adds constraints.
"""

import itertools
import random

from tierlang.callgraph import build_call_graph
from tierlang.inference import Encoder
from tierlang.pipeline import compile_source
from tierlang.tiers import TierAssignment
from tierlang.tiercheck import TierChecker, check_program

LIST_CLASS = """
L {
  boolean mark;
  L rest;
  L(boolean m, L r) { mark := m; rest := r; }
  L getRest() { return rest; }
  boolean getMark() { return mark; }
  void setRest(L r) { rest := r; }
  int count() {
    int c := 1;
    if (rest != null) {
      c := rest.count();
      c := c + 1;
    } else { ; }
    return c;
  }
}
"""


class ProgramGen:
    def __init__(self, rng: random.Random, max_stmts: int = 7):
        self.rng = rng
        self.max_stmts = max_stmts
        self.ints = []
        self.bools = []
        self.lists = []
        self.counter = 0

    def fresh(self, prefix):
        self.counter += 1
        return f"{prefix}{self.counter}"

    def _decls(self):
        out = []
        for _ in range(self.rng.randint(1, 3)):
            v = self.fresh("i")
            self.ints.append(v)
            out.append(f"int {v} := {self.rng.randint(0, 5)};")
        for _ in range(self.rng.randint(1, 2)):
            v = self.fresh("b")
            self.bools.append(v)
            out.append(f"boolean {v} := {self.rng.choice(['true', 'false'])};")
        for _ in range(self.rng.randint(1, 2)):
            v = self.fresh("l")
            self.lists.append(v)
            out.append(f"L {v} := new L(true, null);")
        return out

    def _int_expr(self):
        r = self.rng.random()
        if r < 0.3:
            return str(self.rng.randint(0, 3))
        if r < 0.5:
            return self.rng.choice(self.ints)
        if r < 0.7:
            return f"{self.rng.choice(self.ints)} + {self.rng.randint(1, 2)}"
        if r < 0.9:
            return f"{self.rng.choice(self.ints)} - {self.rng.choice(self.ints)}"
        return f"{self.rng.choice(self.lists)}.count()"

    def _bool_expr(self):
        r = self.rng.random()
        if r < 0.25:
            return f"{self.rng.choice(self.ints)} > 0"
        if r < 0.5:
            return f"{self.rng.choice(self.bools)} && {self.rng.choice(self.bools)}"
        if r < 0.7:
            return f"{self.rng.choice(self.lists)} != null"
        if r < 0.85:
            return self.rng.choice(self.bools)
        return f"{self.rng.choice(self.lists)}.getMark()"

    def _stmt(self, depth):
        r = self.rng.random()
        if r < 0.30:
            return [f"{self.rng.choice(self.ints)} := {self._int_expr()};"]
        if r < 0.45:
            return [f"{self.rng.choice(self.bools)} := {self._bool_expr()};"]
        if r < 0.58:
            lhs = self.rng.choice(self.lists)
            rhs = self.rng.random()
            if rhs < 0.4:
                return [f"{lhs} := {self.rng.choice(self.lists)}.getRest();"]
            if rhs < 0.7:
                return [f"{lhs} := new L({self.rng.choice(self.bools)}, null);"]
            return [f"{lhs} := {self.rng.choice(self.lists)};"]
        if r < 0.70:
            # only cycle-free rests, so count() always terminates
            arg = self.rng.choice(["null", f"new L({self.rng.choice(self.bools)}, null)"])
            return [f"{self.rng.choice(self.lists)}.setRest({arg});"]
        if r < 0.85 and depth < 2:
            guard = self.rng.choice(self.bools)
            inner = self._stmt(depth + 1)
            return [f"if ({guard}) {{"] + ["  " + s for s in inner] + ["} else { ; }"]
        if depth < 2:
            guard = self.rng.choice(self.bools)
            body = self._stmt(depth + 1)
            # dropping the guard as the last body statement keeps every
            # generated program terminating
            tick = f"{guard} := false;"
            return (
                [f"while ({guard}) {{"]
                + ["  " + s for s in body]
                + ["  " + tick, "}"]
            )
        return [";"]

    def generate(self) -> str:
        decls = self._decls()
        stmts = []
        for _ in range(self.rng.randint(2, self.max_stmts)):
            stmts.extend(self._stmt(0))
        body = "\n    ".join(decls + ["//Comp"] + stmts)
        return LIST_CLASS + "Exe {\n  void main() {\n    " + body + "\n  }\n}\n"


def generate_program(seed: int, max_stmts: int = 7) -> str:
    return ProgramGen(random.Random(seed), max_stmts).generate()


def brute_force_typable(flat, graph, max_vars: int = 16):
    """Enumerates tier assignments and replays them through the checker.

    Returns (typable, var_count); var_count > max_vars yields (None, count)
    so callers can skip oversized instances.
    """
    enc = Encoder(flat, graph)
    enc.encode()
    var_names = [n for n in enc.cs.names if n[0] == "v"]
    gamma_sigs = sorted({n[1] for n in enc.cs.names if n[0] == "g"})
    if len(var_names) > max_vars:
        return None, len(var_names)

    for bits in itertools.product((0, 1), repeat=len(var_names)):
        assignment = TierAssignment()
        for (_, ctx, name), tier in zip(var_names, bits):
            assignment.set_tier(ctx, name, tier)
        _derive_gammas(flat, graph, assignment, gamma_sigs)
        if check_program(flat, graph, assignment).accepted:
            return True, len(var_names)
    return False, len(var_names)


def _derive_gammas(flat, graph, assignment, sigs):
    """Least fixpoint of annotation tiers: gamma >= minimal body tier,
    equal across override families."""
    for s in sigs:
        assignment.gammas[s] = 0
    for _ in range(len(sigs) + 1):
        changed = False
        checker = TierChecker(flat, graph, assignment)
        for s in sigs:
            decl = graph.method_decl.get(s)
            if decl is None:
                continue
            m = checker.min_tier(decl.body, s)
            if m is not None and m > assignment.gammas[s]:
                assignment.gammas[s] = m
                changed = True
        # override families share one annotation
        from tierlang.syntax import method_signature

        for s in sigs:
            decl = graph.method_decl.get(s)
            if decl is None:
                continue
            for o in flat.table.overrides(decl):
                okey = method_signature(o).key()
                if okey in assignment.gammas:
                    hi = max(assignment.gammas[s], assignment.gammas[okey])
                    if assignment.gammas[s] != hi or assignment.gammas[okey] != hi:
                        assignment.gammas[s] = hi
                        assignment.gammas[okey] = hi
                        changed = True
        if not changed:
            break


def compile_generated(src: str):
    compiled = compile_source(src, "<generated>")
    return compiled.flat, compiled.graph
