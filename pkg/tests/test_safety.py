"""Call graph, recursion classes, level, intricacy, and the safety items."""

import pytest

from tierlang.callgraph import (
    IntricacyUndefined,
    build_call_graph,
    intricacy,
    level,
    levels,
    method_intricacy,
    program_intricacy,
    program_level,
)
from tierlang.corpus import load_source
from tierlang.pipeline import analyze, compile_source
from tierlang.safety import branchwise_relaxation, check_safety


def _sig(name, owner, ret, params=""):
    return f"{ret} {name}^{owner}({params})"


def test_call_graph_edges_and_recursion(get_compiled):
    c = get_compiled("blist_methods")
    g = c.graph
    is_equal = _sig("isEqual", "BList", "boolean", "BList")
    get_queue = _sig("getQueue", "BList", "BList")
    get_value = _sig("getValue", "BList", "boolean")
    length = _sig("length", "BList", "int")
    assert get_queue in g.succ(is_equal)
    assert get_value in g.succ(is_equal)
    assert is_equal not in g.succ(get_queue)
    assert not g.is_recursive(is_equal)
    assert g.recursion_class(is_equal) == []
    assert g.is_recursive(length)
    assert g.recursion_class(length) == [length]


def test_method_with_no_calls_is_isolated(get_compiled):
    g = get_compiled("blist_methods").graph
    get_queue = _sig("getQueue", "BList", "BList")
    assert g.succ(get_queue) == []


def test_override_edges(get_compiled):
    g = get_compiled("override").graph
    fa = _sig("f", "A", "void", "int")
    fb = _sig("f", "B", "void", "int")
    assert fb in g.succ(fa)  # overriding method callable from the overridden
    assert fa in g.reachable("$comp")
    assert fb in g.reachable("$comp")


def test_levels_match_worked_example(get_compiled):
    g = get_compiled("blist_methods").graph
    lv = levels(g)
    assert lv[_sig("getQueue", "BList", "BList")] == 0
    assert lv[_sig("getValue", "BList", "boolean")] == 0
    assert lv[_sig("setQueue", "BList", "void", "BList")] == 0
    assert lv[_sig("isEqual", "BList", "boolean", "BList")] == 0
    assert lv[_sig("length", "BList", "int")] == 1
    assert lv[_sig("decrement", "BList", "void")] == 1
    assert lv[_sig("clone", "BList", "BList")] == 1


def test_mutual_recursion_level():
    src = """
    C {
      C() { ; }
      void ping() { this.pong(); }
      void pong() { this.ping(); }
    }
    Exe { void main() { C c := new C(); //Comp
      c.ping(); } }
    """
    g = compile_source(src, "m.aoo").graph
    ping = _sig("ping", "C", "void")
    pong = _sig("pong", "C", "void")
    assert g.is_recursive(ping) and g.is_recursive(pong)
    assert set(g.recursion_class(ping)) == {ping, pong}
    lv = levels(g)
    assert lv[ping] == 1 and lv[pong] == 1


def test_intricacy_of_nested_whiles_around_isequal(get_compiled):
    """Two whiles around an isEqual call: 2 + nu(isEqual body) = 3."""
    src = load_source("blist_methods.aoo").replace(
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
    c = compile_source(src, "nested.aoo")
    assert intricacy(c.graph, c.flat.comp) == 3


def test_intricacy_of_isequal_body(get_compiled):
    g = get_compiled("blist_methods").graph
    assert method_intricacy(g, _sig("isEqual", "BList", "boolean", "BList")) == 1


def test_intricacy_of_single_assignment():
    c = compile_source(
        "Exe { void main() { int x := 0; //Comp\n x := 3; } }", "a.aoo"
    )
    assert intricacy(c.graph, c.flat.comp) == 0


def test_intricacy_undefined_for_recursive_body_with_while():
    src = """
    C {
      C() { ; }
      void spin(int k) {
        boolean go := k > 0;
        while (go) { go := false; }
        this.spin(k);
      }
    }
    Exe { void main() { C c := new C(); int k := 1; //Comp
      c.spin(k); } }
    """
    c = compile_source(src, "spin.aoo")
    sig = _sig("spin", "C", "void", "int")
    with pytest.raises(IntricacyUndefined):
        method_intricacy(c.graph, sig)
    # ...and safety reports it as an item-2 failure instead of looping
    a = analyze(src, "spin.aoo")
    assert a.typable
    m = [m for m in a.safety.methods if m.sig == sig][0]
    assert not m.item2_ok and m.item2_nu is None


def test_safety_length_safe(get_analysis):
    a = get_analysis("blist_methods")
    assert a.safe
    length = [m for m in a.safety.methods if "length" in m.sig][0]
    assert length.item1_ok and length.item2_ok and length.item3_ok
    assert length.level == 1


def test_safety_decrement_driver_unsafe(get_analysis):
    a = get_analysis("blist_decrement")
    assert a.typable and not a.safe
    decr = [m for m in a.safety.methods if "decrement" in m.sig][0]
    assert decr.item1_ok and decr.item2_ok and not decr.item3_ok
    assert "tier 0" in decr.item3_detail


def test_safety_vacuous_without_recursion(get_analysis):
    a = get_analysis("blist_loop")
    assert a.safe
    assert a.safety.methods == []


def test_tree_value_fails_item1_only(get_analysis):
    a = get_analysis("tree_value")
    assert a.typable and not a.safe
    m = a.safety.methods[0]
    assert not m.item1_ok and m.item1_calls == 2
    assert m.item2_ok and m.item3_ok


def test_branchwise_relaxation_diagnostic(get_analysis):
    a = get_analysis("tree_value")
    branch = branchwise_relaxation(a.compiled.flat, a.compiled.graph)
    sig = a.safety.methods[0].sig
    assert branch[sig] is True  # one call per conditional branch
    v = get_analysis("tree_visit")
    branchv = branchwise_relaxation(v.compiled.flat, v.compiled.graph)
    assert branchv[v.safety.methods[0].sig] is False  # two sequential calls

    # the relaxation never changes the verdict
    assert not a.safe and not v.safe


def test_program_level_restricted_to_reachable(get_compiled, get_analysis):
    # blist_loop's class carries no recursive method reachable from Comp
    a = get_analysis("blist_loop")
    assert a.safety.program_level == 0
    b = get_analysis("blist_length")
    assert b.safety.program_level == 1


def test_safety_check_is_fast(get_analysis):
    import time

    a = get_analysis("blist_methods")
    start = time.perf_counter()
    for _ in range(20):
        check_safety(a.compiled.flat, a.compiled.graph, a.assignment)
    elapsed = time.perf_counter() - start
    assert elapsed < 2.0
