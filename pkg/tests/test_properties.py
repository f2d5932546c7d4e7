"""Property-based coverage: solver, round-trips, differential evaluation."""

import itertools

from hypothesis import given, settings, strategies as st

from generators import compile_generated, generate_program
from tierlang.heapshape import canonical_shape
from tierlang.interp import Machine, Runner
from tierlang.parser import parse
from tierlang.refeval import reference_run
from tierlang.syntax import program_to_source
from tierlang.twosat import ClauseSet, solve_2sat
from tierlang.values import NodeRef


@st.composite
def clause_sets(draw):
    nvars = draw(st.integers(1, 8))
    cs = ClauseSet()
    vars = [cs.var(f"x{i}") for i in range(nvars)]
    nclauses = draw(st.integers(0, 20))
    for _ in range(nclauses):
        a = draw(st.sampled_from(vars)) * draw(st.sampled_from((1, -1)))
        b = draw(st.sampled_from(vars)) * draw(st.sampled_from((1, -1)))
        cs.add(a, b)
    return cs


def _brute_sat(cs):
    for bits in itertools.product((False, True), repeat=len(cs.names)):
        def val(lit):
            v = bits[abs(lit) - 1]
            return v if lit > 0 else not v

        if all(val(c.a) or val(c.b) for c in cs.clauses):
            return True
    return False


@given(clause_sets())
@settings(max_examples=150, deadline=None)
def test_solver_agrees_with_enumeration(cs):
    got = solve_2sat(cs)
    assert got.satisfiable == _brute_sat(cs)
    if got.satisfiable:
        def val(lit):
            v = got.model[cs.names[abs(lit) - 1]]
            return v if lit > 0 else not v

        assert all(val(c.a) or val(c.b) for c in cs.clauses)


@given(st.integers(1, 2000))
@settings(max_examples=40, deadline=None)
def test_generated_programs_roundtrip(seed):
    src = generate_program(seed)
    p1 = parse(src, "gen.aoo")
    printed = program_to_source(p1)
    assert program_to_source(parse(printed)) == printed


@given(st.integers(1, 2000))
@settings(max_examples=25, deadline=None)
def test_generated_programs_flatten_idempotent(seed):
    flat, _ = compile_generated(generate_program(seed))
    printed = program_to_source(flat.program)
    again, _ = compile_generated(printed)
    assert program_to_source(again.program) == printed


@given(st.integers(1, 3000))
@settings(max_examples=30, deadline=None)
def test_generated_programs_interp_matches_reference(seed):
    src = generate_program(seed)
    flat, _ = compile_generated(src)
    runner = Runner(flat, budget=300_000)
    result = runner.run()
    assert result.metrics.outcome == "terminated"  # generator ensures this
    machine = Machine(flat)
    final = result.final_config

    ref = reference_run(flat.source, flat.source_table, flat.types)
    main_ctx = flat.main_ctx
    user_vars = sorted(
        n for (c, n) in flat.types.var_types if c == main_ctx and not n.startswith("$")
    )
    left = [(n, machine.read(final, n)) for n in user_vars]
    right = [(n, ref.main_vars.get(n)) for n in user_vars]
    for (n, vi), (_, vr) in zip(left, right):
        if not isinstance(vi, NodeRef):
            assert vi == vr, (seed, n)
    assert canonical_shape(
        final.graph.labels, final.graph.arrows, left
    ) == canonical_shape(ref.heap.labels, ref.heap.arrows, right)


@given(st.integers(1, 3000))
@settings(max_examples=20, deadline=None)
def test_generated_programs_heap_monotone(seed):
    flat, _ = compile_generated(generate_program(seed))
    runner = Runner(flat, budget=300_000)
    config = runner.run_init()
    counts = [config.graph.node_count]
    runner.run_comp(
        config, on_step=lambda c, k, m: counts.append(c.graph.node_count)
    )
    assert all(a <= b for a, b in zip(counts, counts[1:]))
