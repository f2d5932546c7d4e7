"""Acceptance suite: the analyzer's exit criteria, one test per criterion.

Each criterion prints a PASS line when it holds (run with `pytest -s` to see
them); any failure shows as a normal pytest failure.  Tolerances are pinned
here and nowhere else.
"""

import time

import pytest

from generators import brute_force_typable, compile_generated, generate_program
from tierlang.bounds import scale_source
from tierlang.callgraph import intricacy, levels
from tierlang.corpus import entries, load_source
from tierlang.heapshape import canonical_shape
from tierlang.inference import infer
from tierlang.interp import Machine, Runner, tier1_equivalent, trace_tier1
from tierlang.pipeline import analyze, compile_source, validate_bounds
from tierlang.syntax import program_to_source
from tierlang.tiers import TierAssignment
from tierlang.tiercheck import check_program, check_runtime_instruction
from tierlang.values import NodeRef

from test_noninterference import mutate_tier0


def report(criterion: int, detail: str):
    print(f"ACCEPTANCE CRITERION {criterion}: PASS -- {detail}")


def test_criterion_1_typability_verdicts():
    """getQueue accepts 1->1 and 0->0, rejects mixed; exp and expo reject."""
    start = time.perf_counter()
    src = """
    BList {
      boolean value;
      BList queue;
      BList(boolean v, BList q) { value := v; queue := q; }
      BList getQueue() { return queue; }
    }
    Exe { void main() { BList a := new BList(true, null); BList r := null;
      //Comp
      r := a.getQueue(); } }
    """
    c = compile_source(src, "gq.aoo")
    gq = "BList getQueue^BList()"

    def assignment(this_t, a_t, r_t):
        t = TierAssignment()
        for var in ("this", "value", "queue"):
            t.set_tier(gq, var, this_t)
        t.gammas[gq] = 0
        t.set_tier(c.flat.main_ctx, "a", a_t)
        t.set_tier(c.flat.main_ctx, "r", r_t)
        return t

    t1 = time.perf_counter()
    assert check_program(c.flat, c.graph, assignment(1, 1, 1)).accepted
    assert time.perf_counter() - t1 < 1.0
    t1 = time.perf_counter()
    assert check_program(c.flat, c.graph, assignment(0, 0, 0)).accepted
    assert time.perf_counter() - t1 < 1.0

    mixed = assignment(0, 0, 1)
    mixed.set_tier(gq, "queue", 1)  # getQueue at BList(0) -> BList(1)
    t1 = time.perf_counter()
    assert not check_program(c.flat, c.graph, mixed).accepted
    assert time.perf_counter() - t1 < 1.0

    for name in ("exp", "expo_add"):
        t1 = time.perf_counter()
        comp = compile_source(load_source(name + ".aoo"), name)
        assert not infer(comp.flat, comp.graph).satisfiable
        assert time.perf_counter() - t1 < 1.0

    report(1, f"getQueue both tiers + mixed rejected; exp/expo unsat "
              f"({time.perf_counter() - start:.2f}s)")


def test_criterion_2_safety_verdicts():
    """length is safe with level 1; the decrement driver fails item 3."""
    a = analyze(load_source("blist_methods.aoo"), "blist_methods.aoo")
    assert a.typable and a.safe
    length = [m for m in a.safety.methods if "length" in m.sig]
    assert len(length) == 1 and length[0].safe and length[0].level == 1

    d = analyze(load_source("blist_decrement.aoo"), "blist_decrement.aoo")
    assert d.typable and not d.safe
    decr = d.safety.methods[0]
    assert decr.item1_ok and decr.item2_ok and not decr.item3_ok
    report(2, "length safe (level 1); decrement driver unsafe via item 3")


def test_criterion_3_level_and_intricacy_values():
    c = compile_source(load_source("blist_methods.aoo"), "blist_methods.aoo")
    lv = levels(c.graph)
    expected = {
        "BList getQueue^BList()": 0,
        "boolean getValue^BList()": 0,
        "void setQueue^BList(BList)": 0,
        "boolean isEqual^BList(BList)": 0,
        "void decrement^BList()": 1,
        "int length^BList()": 1,
    }
    for sig, want in expected.items():
        assert lv[sig] == want, (sig, lv[sig], want)

    nested = load_source("blist_methods.aoo").replace(
        """    int len := a.length();
    boolean eq := a.isEqual(b);
    BList q := a.getQueue();
    boolean v := q.getValue();
    d.setQueue(c);""",
        """    boolean x := true;
    boolean y := true;
    boolean eq := true;
    while (x) {
      while (y) {
        eq := a.isEqual(b);
      }
    }""",
    )
    n = compile_source(nested, "nested.aoo")
    assert intricacy(n.graph, n.flat.comp) == 3
    report(3, "levels 0/0/0/0 and 1/1; double-while around isEqual has depth 3")


def test_criterion_4_bound_reports():
    a = analyze(load_source("blist_loop.aoo"), "blist_loop.aoo")
    b = a.bounds
    assert (b.n1, b.nu, b.lam) == (1, 1, 0)
    assert b.time_exponent == 1 and b.stack_exponent == 1
    assert (b.time_str, b.heap_str, b.stack_str) == ("O(n^1)", "O(n)", "O(n^1)")

    r = analyze(load_source("ring.aoo"), "ring.aoo")
    assert r.bounds.n1 == 2 and r.bounds.nu == 1 and r.bounds.lam == 0
    assert r.bounds.time_exponent == 2
    report(4, "list walk: n1=1 -> O(n^1)/O(n)/O(n^1); ring search: n1=2 -> O(n^2)")


def test_criterion_5_empirical_validation():
    """List walk at n in {8..256}: the constant fitted at n=8 holds within
    x1.5 at every larger size, for steps, heap, and stack."""
    start = time.perf_counter()
    sizes = [8, 16, 32, 64, 128, 256]
    verdict = validate_bounds(
        load_source("blist_loop.aoo"), "blist_loop.aoo", sizes=sizes
    )
    assert verdict is not None
    assert [r.n for r in verdict.rows] == sizes
    assert all(r.outcome == "terminated" for r in verdict.rows)
    assert verdict.slack == 1.5
    assert verdict.time_ok and verdict.heap_ok and verdict.stack_ok
    base = verdict.rows[0]
    top = verdict.rows[-1]
    assert top.steps <= 1.5 * (base.steps / 8) * 256
    assert top.max_heap <= 1.5 * (base.max_heap / 8) * 256
    assert top.max_stack <= 1.5 * (base.max_stack / 8) * 256
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    report(5, f"steps/heap/stack fit c*n over n=8..256 within x1.5 ({elapsed:.1f}s)")


def test_criterion_6_interpreter_oracle_equivalence():
    """Every corpus program, three input sizes where scalable: the
    small-step machine and the tree-walking reference agree on the final
    heap shape and all primitive main variables.  (Divergent programs have
    no final configuration and are excluded by construction.)"""
    compared = 0
    for e in entries():
        if e.divergent:
            continue
        sizes = (4, 8, 12) if e.scalable else (None,)
        for n in sizes:
            source = load_source(e.file)
            if n is not None:
                source = scale_source(source, n)
            flat = compile_source(source, e.file).flat
            runner = Runner(flat, budget=2_000_000)
            result = runner.run()
            assert result.metrics.outcome == "terminated", e.name
            machine = Machine(flat)
            ref = reference = None
            from tierlang.refeval import reference_run

            reference = reference_run(flat.source, flat.source_table, flat.types)
            user_vars = sorted(
                name
                for (ctx, name) in flat.types.var_types
                if ctx == flat.main_ctx and not name.startswith("$")
            )
            left = [(v, machine.read(result.final_config, v)) for v in user_vars]
            right = [(v, reference.main_vars.get(v)) for v in user_vars]
            for (v, vi), (_, vr) in zip(left, right):
                if not isinstance(vi, NodeRef):
                    assert vi == vr, (e.name, n, v)
            assert canonical_shape(
                result.final_config.graph.labels,
                result.final_config.graph.arrows,
                left,
            ) == canonical_shape(reference.heap.labels, reference.heap.arrows, right)
            assert result.final_config.graph.node_count == len(reference.heap.labels)
            compared += 1
    report(6, f"{compared} runs matched the reference evaluator exactly")


def test_criterion_7_inference_oracle():
    """50 random flat programs with at most 16 tier variables: the 2-SAT
    verdict equals brute-force enumeration through the checker."""
    start = time.perf_counter()
    agreed = 0
    seed = 0
    var_counts = []
    while agreed < 50:
        seed += 1
        assert seed < 500, "generator starved"
        src = generate_program(seed, max_stmts=4)
        flat, graph = compile_generated(src)
        verdict, nvars = brute_force_typable(flat, graph, max_vars=16)
        if verdict is None:
            continue
        got = infer(flat, graph).satisfiable
        assert got == verdict, f"seed {seed}: infer={got} brute-force={verdict}"
        var_counts.append(nvars)
        agreed += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    report(
        7,
        f"50/50 agreement (tier variables {min(var_counts)}..{max(var_counts)}, "
        f"{elapsed:.1f}s)",
    )


def test_criterion_8_noninterference_suite():
    """100 randomized input pairs differing only on tier-0 data: tier-1
    traces are equivalent entry for entry, with zero counterexamples."""
    start = time.perf_counter()
    programs = ["blist_loop", "ring", "blist_length", "blist_clone", "add", "mult"]
    pairs = 0
    seed = 0
    while pairs < 100:
        name = programs[pairs % len(programs)]
        seed += 1
        a = analyze(load_source(name + ".aoo"), name)
        assert a.safe
        machine = Machine(a.compiled.flat)
        runner = Runner(a.compiled.flat, budget=500_000)
        base = runner.run_init()
        tiers = a.assignment.tier1_view()
        left = base.copy()
        right = base.copy()
        mutate_tier0(a, machine, right, seed)
        tl, el = trace_tier1(machine, left, a.compiled.flat.comp, tiers, 200_000)
        tr, er = trace_tier1(machine, right, a.compiled.flat.comp, tiers, 200_000)
        assert not el and not er
        assert len(tl) == len(tr), (name, seed)
        for cl, cr in zip(tl, tr):
            assert tier1_equivalent(machine, cl, cr, tiers), (name, seed)
        pairs += 1
    elapsed = time.perf_counter() - start
    report(8, f"100 pairs, zero counterexamples ({elapsed:.1f}s)")


def test_criterion_9_subject_reduction_suite():
    """Along every typable single-segment corpus run, the remaining
    continuation re-typechecks under the extended rules, sampled every 100
    steps."""
    start = time.perf_counter()
    checked_total = 0
    for e in entries():
        if not e.typable or e.segments > 1:
            continue
        a = analyze(load_source(e.file), e.file)
        flat, graph = a.compiled.flat, a.compiled.graph
        runner = Runner(flat, budget=20_000)
        input_config = runner.run_init()
        failures = []
        counter = [0]

        def on_step(config, cont, metrics):
            if metrics.steps % 100 != 0 or cont is None:
                return
            res = check_runtime_instruction(flat, graph, a.assignment, cont)
            counter[0] += 1
            if not res.accepted:
                failures.append((e.name, metrics.steps, str(res.first())))

        tiers = a.assignment.tier1_view() if a.safe else None
        recursive = {k for k in graph.method_decl if graph.is_recursive(k)}
        runner.run_comp(
            input_config,
            tiers=tiers,
            detect_divergence=tiers is not None,
            recursive_sigs=recursive,
            on_step=on_step,
        )
        # also check the very first continuation
        res0 = check_runtime_instruction(
            flat, graph, a.assignment, runner.machine.cont_of(flat.comp)
        )
        assert res0.accepted, e.name
        assert not failures, failures[:3]
        checked_total += counter[0] + 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    report(9, f"{checked_total} sampled continuations re-typechecked ({elapsed:.1f}s)")


def test_criterion_10_flattening_laws():
    """Idempotence on every corpus file, the quadratic size bound under one
    global constant, and typability agreement before/after flattening."""
    from tierlang.parser import parse
    from tierlang.syntax import program_size

    worst = 0.0
    for e in entries():
        source = load_source(e.file)
        flat = compile_source(source, e.file).flat
        printed = program_to_source(flat.program)
        again = compile_source(printed, e.file).flat
        assert program_to_source(again.program) == printed, e.name  # idempotent

        n = program_size(parse(source, e.file))
        m = program_size(flat.program)
        worst = max(worst, m / (n * n))

        before = analyze(source, e.file).typable
        after = analyze(printed, e.file).typable
        assert before == after == e.typable, e.name
    assert worst <= 1.0
    report(10, f"idempotent; |flatten(P)| <= c|P|^2 with c={worst:.3f}; "
               "typability preserved both ways")
