"""End-to-end pipeline: parse, check, flatten, infer, safety, bounds, run."""

import os
from dataclasses import dataclass, field

from .bounds import BoundReport, ValidationVerdict, bound_report, per_loop_exponents, validate
from .callgraph import CallGraph, build_call_graph
from .classtable import build_class_table
from .errors import AooError, Diagnostic, ParseError, WellFormednessError
from .inference import (
    DeclassifiedResult,
    InferResult,
    check_declassified,
    infer,
    infer_with_safety_pinning,
)
from .interp import Runner, RunResult
from .parser import parse
from .safety import SafetyReport, check_safety
from .tiers import TierAssignment
from .transform import FlatProgram, alpha_rename, flatten_program
from .typecheck import TypeChecker
from .wellformed import check_well_formed

DEFAULT_BUDGET = int(os.environ.get("AOO_BUDGET", 10_000_000))


class CompileError(AooError):
    """Parse, well-formedness, or base-type failure, with diagnostics."""

    def __init__(self, stage: str, diagnostics: list):
        super().__init__(f"{stage}: " + "; ".join(str(d) for d in diagnostics))
        self.stage = stage
        self.diagnostics = diagnostics


@dataclass
class Compiled:
    flat: FlatProgram
    graph: CallGraph

    @property
    def program(self):
        return self.flat.program


def compile_source(source: str, filename: str = "<input>") -> Compiled:
    """Runs the frontend: parse, well-formedness, base types, flattening."""
    try:
        program = parse(source, filename)
    except ParseError as e:
        raise CompileError("parse", [e.diagnostic]) from e
    try:
        table = build_class_table(program)
    except WellFormednessError as e:
        raise CompileError("well-formedness", e.diagnostics) from e
    diags = check_well_formed(program, table)
    if diags:
        raise CompileError("well-formedness", diags)
    renamed = alpha_rename(program)
    table2 = build_class_table(renamed)
    checker = TypeChecker(renamed, table2)
    _, tdiags = checker.run()
    if tdiags:
        raise CompileError("types", tdiags)
    flat = flatten_program(renamed, checker)
    graph = build_call_graph(flat)
    return Compiled(flat=flat, graph=graph)


@dataclass
class Analysis:
    """Everything the analysis commands report about one program."""

    compiled: Compiled
    typable: bool
    declassified: DeclassifiedResult | None
    inference: InferResult
    safety: SafetyReport | None
    bounds: BoundReport | None
    per_loop: list = field(default_factory=list)

    @property
    def assignment(self) -> TierAssignment | None:
        return self.inference.assignment

    @property
    def safe(self) -> bool:
        return bool(self.typable and self.safety and self.safety.safe)


def analyze(source: str, filename: str = "<input>", per_loop: bool = False) -> Analysis:
    """Full analysis: typability (with safety-pinned preference), safety, bounds."""
    compiled = compile_source(source, filename)
    flat, graph = compiled.flat, compiled.graph

    declassified = None
    if len(flat.comp_segments) > 1:
        declassified = check_declassified(flat, graph)
        inference = declassified.segments[-1].result
        typable = declassified.accepted
    else:
        inference = infer_with_safety_pinning(flat, graph)
        typable = inference.satisfiable

    safety = None
    bounds_rep = None
    loops = []
    if typable and inference.assignment is not None:
        safety = check_safety(flat, graph, inference.assignment)
        bounds_rep = bound_report(flat, graph, inference.assignment)
        if per_loop:
            loops = per_loop_exponents(flat, graph, inference.assignment)
    return Analysis(
        compiled=compiled,
        typable=typable,
        declassified=declassified,
        inference=inference,
        safety=safety,
        bounds=bounds_rep,
        per_loop=loops,
    )


def run_program(
    source: str,
    filename: str = "<input>",
    budget: int | None = None,
    detect_divergence: bool = True,
) -> tuple:
    """Executes a program; returns (RunResult, Analysis-or-None, Compiled).

    Divergence detection needs a safe tier assignment; when the program does
    not type or is unsafe, the run falls back to plain budgeted execution.
    """
    budget = budget or DEFAULT_BUDGET
    analysis = None
    tiers = None
    recursive = None
    if detect_divergence:
        analysis = analyze(source, filename)
        compiled = analysis.compiled
        if analysis.safe and analysis.assignment is not None:
            tiers = analysis.assignment.tier1_view()
            recursive = {
                k for k in compiled.graph.method_decl if compiled.graph.is_recursive(k)
            }
    else:
        compiled = compile_source(source, filename)
    runner = Runner(compiled.flat, budget=budget)
    result = runner.run(
        tiers=tiers,
        detect_divergence=tiers is not None,
        recursive_sigs=recursive,
    )
    return result, analysis, compiled


def validate_bounds(
    source: str,
    filename: str = "<input>",
    sizes: list | None = None,
    budget: int | None = None,
) -> ValidationVerdict | None:
    """Empirically validates the bound report over scaled input sizes."""
    analysis = analyze(source, filename)
    if analysis.bounds is None or not analysis.typable:
        return None
    sizes = sizes or [8, 16, 32, 64]
    tiers = None
    recursive = None
    if analysis.safe and analysis.assignment is not None:
        tiers = analysis.assignment.tier1_view()
        graph = analysis.compiled.graph
        recursive = {k for k in graph.method_decl if graph.is_recursive(k)}
    return validate(
        lambda src: compile_source(src, filename).flat,
        source,
        analysis.bounds,
        sizes,
        budget=budget or DEFAULT_BUDGET,
        tiers=tiers,
        recursive_sigs=recursive,
    )
