"""Interpreter vs the independent tree-walking reference evaluator.

Both evaluators must agree on the final pointer-graph shape and on every
primitive user variable of main, for every corpus program, at several input
sizes where the program scales.
"""

import pytest

from tierlang.bounds import scale_source
from tierlang.corpus import entries, load_source
from tierlang.heapshape import canonical_shape
from tierlang.interp import Machine, Runner
from tierlang.pipeline import compile_source
from tierlang.refeval import reference_run
from tierlang.values import NodeRef

SIZES = (4, 8, 12)


def _cases():
    for e in entries():
        if e.divergent:
            continue  # no final configuration to compare
        if e.scalable:
            for n in SIZES:
                yield pytest.param(e, n, id=f"{e.name}-n{n}")
        else:
            yield pytest.param(e, None, id=e.name)


@pytest.mark.parametrize("entry,n", list(_cases()))
def test_final_state_matches_reference(entry, n):
    source = load_source(entry.file)
    if n is not None:
        source = scale_source(source, n)
    compiled = compile_source(source, entry.file)
    flat = compiled.flat

    runner = Runner(flat, budget=2_000_000)
    result = runner.run()
    assert result.metrics.outcome == "terminated"
    machine = Machine(flat)
    final = result.final_config

    ref = reference_run(flat.source, flat.source_table, flat.types)

    main_ctx = flat.main_ctx
    user_vars = sorted(
        name
        for (ctx, name) in flat.types.var_types
        if ctx == main_ctx and not name.startswith("$")
    )

    interp_roots = [(name, machine.read(final, name)) for name in user_vars]
    ref_roots = [(name, ref.main_vars.get(name)) for name in user_vars]

    # primitive values agree exactly
    for (name, vi), (_, vr) in zip(interp_roots, ref_roots):
        if not isinstance(vi, NodeRef):
            assert vi == vr, f"{entry.name}: {name}: {vi!r} != {vr!r}"

    # heap shapes agree up to node renumbering
    shape_i = canonical_shape(final.graph.labels, final.graph.arrows, interp_roots)
    shape_r = canonical_shape(ref.heap.labels, ref.heap.arrows, ref_roots)
    assert shape_i == shape_r

    # and the total allocation counts agree
    assert final.graph.node_count == len(ref.heap.labels)
