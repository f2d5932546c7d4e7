"""Bundled example programs with their expected analysis verdicts.

Every entry records what the analyzer must report for the file; the corpus
command (and the regression tests) re-derive the verdicts on each build and
compare.  `scalable` marks programs whose Init contains the `int n := k;`
size hook used by empirical bound validation.
"""

from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    file: str
    typable: bool
    safe: bool | None = None  # None: not applicable (untypable)
    n1: int | None = None
    nu: int | None = None
    lam: int | None = None
    time_exponent: int | None = None
    stack_exponent: int | None = None
    scalable: bool = False
    divergent: bool = False  # Comp does not terminate on the default input
    segments: int = 1

    def expected_json(self):
        return {
            "typable": self.typable,
            "safe": self.safe,
            "n1": self.n1,
            "nu": self.nu,
            "lambda": self.lam,
        }


CATALOG = [
    CorpusEntry(
        "blist_loop", "blist_loop.aoo", typable=True, safe=True,
        n1=1, nu=1, lam=0, time_exponent=1, stack_exponent=1, scalable=True,
    ),
    CorpusEntry(
        "blist_methods", "blist_methods.aoo", typable=True, safe=True,
        n1=5, nu=1, lam=1, time_exponent=10, stack_exponent=15,
    ),
    CorpusEntry(
        "blist_decrement", "blist_decrement.aoo", typable=True, safe=False,
    ),
    CorpusEntry(
        "blist_length", "blist_length.aoo", typable=True, safe=True,
        n1=1, nu=0, lam=1, time_exponent=1, stack_exponent=2, scalable=True,
    ),
    CorpusEntry(
        "blist_clone", "blist_clone.aoo", typable=True, safe=True,
        n1=1, nu=0, lam=1, time_exponent=1, stack_exponent=2, scalable=True,
    ),
    CorpusEntry(
        "blist_graph", "blist_graph.aoo", typable=True, safe=True,
        n1=0, nu=0, lam=0, time_exponent=0, stack_exponent=0,
    ),
    CorpusEntry(
        "ring", "ring.aoo", typable=True, safe=True,
        n1=2, nu=1, lam=0, time_exponent=2, stack_exponent=2, scalable=True,
    ),
    CorpusEntry(
        "ring_all_true", "ring_all_true.aoo", typable=True, safe=True,
        n1=2, nu=1, lam=0, time_exponent=2, stack_exponent=2,
        scalable=True, divergent=True,
    ),
    CorpusEntry("exp", "exp.aoo", typable=False),
    CorpusEntry("expo_add", "expo_add.aoo", typable=False),
    CorpusEntry(
        "add", "add.aoo", typable=True, safe=True,
        n1=1, nu=1, lam=0, time_exponent=1, stack_exponent=1, scalable=True,
    ),
    CorpusEntry(
        "mult", "mult.aoo", typable=True, safe=True,
        n1=2, nu=2, lam=0, time_exponent=4, stack_exponent=4, scalable=True,
    ),
    CorpusEntry(
        "tree_value", "tree_value.aoo", typable=True, safe=False,
        n1=3, nu=0, lam=1, time_exponent=3, stack_exponent=6,
    ),
    CorpusEntry(
        "tree_visit", "tree_visit.aoo", typable=True, safe=False,
    ),
    CorpusEntry(
        "declassified", "declassified.aoo", typable=True, safe=True,
        segments=3,
    ),
    CorpusEntry(
        "override", "override.aoo", typable=True, safe=True,
        n1=0, nu=1, lam=0, time_exponent=0, stack_exponent=0,
    ),
    CorpusEntry(
        "exe_min", "exe_min.aoo", typable=True, safe=True,
        n1=0, nu=0, lam=0, time_exponent=0, stack_exponent=0,
    ),
]


def load_source(file: str) -> str:
    return resources.files("tierlang").joinpath("corpus").joinpath(file).read_text()


def entries() -> list:
    return list(CATALOG)


def entry(name: str) -> CorpusEntry:
    for e in CATALOG:
        if e.name == name:
            return e
    raise KeyError(name)


def verify_entry(e: CorpusEntry) -> list:
    """Re-derives one entry's verdicts; returns mismatch descriptions."""
    from .pipeline import analyze

    problems = []
    a = analyze(load_source(e.file), e.file)
    if a.typable != e.typable:
        problems.append(f"typable: expected {e.typable}, got {a.typable}")
    if not e.typable:
        return problems
    if e.safe is not None and a.safe != e.safe:
        problems.append(f"safe: expected {e.safe}, got {a.safe}")
    if e.segments > 1:
        got = len(a.declassified.segments) if a.declassified else 1
        if got != e.segments:
            problems.append(f"segments: expected {e.segments}, got {got}")
    if a.bounds is not None:
        for field_name, expected in (
            ("n1", e.n1),
            ("nu", e.nu),
            ("lam", e.lam),
            ("time_exponent", e.time_exponent),
            ("stack_exponent", e.stack_exponent),
        ):
            if expected is None:
                continue
            got = getattr(a.bounds, field_name)
            if got != expected:
                problems.append(f"{field_name}: expected {expected}, got {got}")
    return problems


def verify_all() -> dict:
    """Runs the whole catalog; returns {name: [problems]} for failures only."""
    failures = {}
    for e in CATALOG:
        problems = verify_entry(e)
        if problems:
            failures[e.name] = problems
    return failures
