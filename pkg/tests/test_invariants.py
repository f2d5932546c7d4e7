"""Cross-cutting invariants promised by the analysis."""

import os
import subprocess
import sys

import pytest

from tierlang.corpus import entries, load_source
from tierlang.interp import Machine, Runner, tier1_fingerprint
from tierlang.pipeline import analyze
from tierlang.tiercheck import TierChecker

SAFE = [e.name for e in entries() if e.typable and e.safe and not e.divergent
        and e.segments == 1]


def test_field_tiers_equal_this_tier_in_accepted_assignments():
    for name in ("blist_methods", "ring", "override", "tree_value"):
        a = analyze(load_source(name + ".aoo"), name)
        assert a.typable
        flat = a.compiled.flat
        for ctx, vars in a.assignment.contexts.items():
            owner = flat.types.ctx_owner.get(ctx)
            if owner is None:
                continue
            this_t = vars.get("this", 0)
            for fname, _ in flat.table.fields(owner):
                if fname in vars:
                    assert vars[fname] == this_t, (name, ctx, fname)


def test_constructor_contexts_are_tier0():
    for name in ("blist_loop", "ring", "blist_clone"):
        a = analyze(load_source(name + ".aoo"), name)
        graph = a.compiled.graph
        for key in graph.reachable_from_comp():
            ctor = graph.ctor_decl.get(key)
            if ctor is None:
                continue
            assert a.assignment.tier(key, "this") == 0, (name, key)
            for pname, _ in ctor.params:
                assert a.assignment.tier(key, pname) == 0, (name, key, pname)


def test_safety_implies_branchwise_relaxation():
    from tierlang.safety import branchwise_relaxation

    for name in SAFE:
        a = analyze(load_source(name + ".aoo"), name)
        if not a.safety.methods:
            continue
        branch = branchwise_relaxation(a.compiled.flat, a.compiled.graph)
        for m in a.safety.methods:
            if m.safe:
                assert branch[m.sig], (name, m.sig)


@pytest.mark.parametrize("name", ["blist_loop", "blist_clone", "blist_methods"])
def test_confinement_tier0_steps_never_touch_tier1(name):
    """Stepping an instruction whose minimal tier is 0 leaves every tier-1
    variable and the tier-1 subgraph unchanged."""
    a = analyze(load_source(name + ".aoo"), name)
    assert a.safe
    flat, graph = a.compiled.flat, a.compiled.graph
    machine = Machine(flat)
    runner = Runner(flat, budget=50_000)
    config = runner.run_init()
    tiers = a.assignment.tier1_view()
    checker = TierChecker(flat, graph, a.assignment)

    from tierlang.syntax import Assign, RetAssign

    cont = machine.cont_of(flat.comp)
    steps = 0
    violations = []
    while cont is not None and steps < 2_000:
        head = cont[0]
        ctx = getattr(head, "ctx", flat.main_ctx) or flat.main_ctx
        watch = isinstance(head, (Assign, RetAssign))
        before = len(checker.violations)
        m = checker.min_tier(head, ctx)
        del checker.violations[before:]
        fp_before = (
            tier1_fingerprint(machine, config, tiers) if watch and m == 0 else None
        )
        cont = machine.step(config, cont)
        steps += 1
        if fp_before is not None:
            fp_after = tier1_fingerprint(machine, config, tiers)
            if fp_before != fp_after:
                violations.append((steps, type(head).__name__))
    assert not violations, violations[:3]


def test_budget_env_variable_controls_default(tmp_path):
    src = """
    C { C() { ; } void loop() { this.loop(); } }
    Exe { void main() { C c := new C(); //Comp
      c.loop(); } }
    """
    f = tmp_path / "loop.aoo"
    f.write_text(src)
    env = dict(os.environ, AOO_BUDGET="300")
    proc = subprocess.run(
        [sys.executable, "-m", "tierlang.cli", "run", str(f)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 3, proc.stdout + proc.stderr
    assert "budget-exhausted" in proc.stdout
