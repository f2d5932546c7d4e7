"""HTTP analysis service.

Each endpoint accepts source text and returns a structured result; nothing
is stored server-side, so the service scales to concurrent clients.  The
CLI is a thin client of this API (in-process by default).
"""

from fastapi import FastAPI
from pydantic import BaseModel, Field

from . import __version__
from .corpus import entries, verify_all
from .errors import AooError
from .interp import Machine, sizes
from .pipeline import (
    DEFAULT_BUDGET,
    CompileError,
    analyze,
    compile_source,
    run_program,
    validate_bounds,
)
from .safety import branchwise_relaxation
from .syntax import program_to_source
from .tiers import TierAssignment
from .tiercheck import check_program
from .values import render_value

SCHEMA = "tierlang/1"


class SourceRequest(BaseModel):
    """A program to analyze."""

    source: str
    filename: str = "<input>"


class DiagnosticModel(BaseModel):
    file: str
    line: int
    col: int
    code: str
    message: str


class ParseResponse(BaseModel):
    ok: bool
    pretty: str | None = None
    classes: list[str] = Field(default_factory=list)
    executable: str | None = None
    segments: int = 0
    diagnostics: list[DiagnosticModel] = Field(default_factory=list)


class InferResponse(BaseModel):
    schema_: str = Field(default=SCHEMA, alias="schema")
    satisfiable: bool
    assignment: dict | None = None
    gamma: dict | None = None
    segments: list[dict] | None = None  # per-segment results when declassified
    diagnostics: list[str] = Field(default_factory=list)

    model_config = {"populate_by_name": True}


class CheckRequest(BaseModel):
    source: str
    filename: str = "<input>"
    tiers: dict


class CheckResponse(BaseModel):
    accepted: bool
    violations: list[dict] = Field(default_factory=list)
    diagnostics: list[str] = Field(default_factory=list)


class SafetyResponse(BaseModel):
    schema_: str = Field(default=SCHEMA, alias="schema")
    typable: bool
    safe: bool
    recursive_methods: list[dict] = Field(default_factory=list)
    level: int = 0
    intricacy: int | None = None
    branchwise: dict | None = None
    diagnostics: list[str] = Field(default_factory=list)

    model_config = {"populate_by_name": True}


class BoundRequest(BaseModel):
    source: str
    filename: str = "<input>"
    validate_sizes: list[int] | None = None
    per_loop: bool = False
    budget: int | None = None


class BoundResponse(BaseModel):
    schema_: str = Field(default=SCHEMA, alias="schema")
    typable: bool
    safe: bool
    n1: int | None = None
    nu: int | None = None
    lam: int | None = Field(default=None, alias="lambda")
    time: str | None = None
    heap: str | None = None
    stack: str | None = None
    safety: dict | None = None
    assignment: dict | None = None
    per_loop: list[dict] | None = None
    validation: dict | None = None
    diagnostics: list[str] = Field(default_factory=list)

    model_config = {"populate_by_name": True}


class RunRequest(BaseModel):
    source: str
    filename: str = "<input>"
    budget: int | None = None
    trace: bool = False
    detect_divergence: bool = True


class RunResponse(BaseModel):
    ok: bool
    outcome: str | None = None
    steps: int | None = None
    max_heap_nodes: int | None = None
    max_stack_size: int | None = None
    input_size: int | None = None
    final_vars: dict | None = None
    trace: list[str] | None = None
    diagnostics: list[str] = Field(default_factory=list)


class CorpusEntryModel(BaseModel):
    name: str
    file: str
    expected: dict


class CorpusResponse(BaseModel):
    entries: list[CorpusEntryModel]


class CorpusVerifyResponse(BaseModel):
    ok: bool
    failures: dict


app = FastAPI(
    title="tierlang analysis service",
    version=__version__,
    description="Tier-based complexity analysis for an abstract OO language",
)


def _compile_error(exc: CompileError) -> list[DiagnosticModel]:
    return [DiagnosticModel(**d.to_json()) for d in exc.diagnostics]


@app.get("/v1/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/v1/parse", response_model=ParseResponse)
def parse_endpoint(req: SourceRequest) -> ParseResponse:
    try:
        compiled = compile_source(req.source, req.filename)
    except CompileError as e:
        return ParseResponse(ok=False, diagnostics=_compile_error(e))
    program = compiled.flat.source
    return ParseResponse(
        ok=True,
        pretty=program_to_source(program),
        classes=sorted(program.classes),
        executable=program.exe_class,
        segments=len(program.comp_segments),
    )


@app.post("/v1/flatten", response_model=ParseResponse)
def flatten_endpoint(req: SourceRequest) -> ParseResponse:
    try:
        compiled = compile_source(req.source, req.filename)
    except CompileError as e:
        return ParseResponse(ok=False, diagnostics=_compile_error(e))
    flat = compiled.flat.program
    return ParseResponse(
        ok=True,
        pretty=program_to_source(flat),
        classes=sorted(flat.classes),
        executable=flat.exe_class,
        segments=len(flat.comp_segments),
    )


@app.post("/v1/infer", response_model=InferResponse)
def infer_endpoint(req: SourceRequest) -> InferResponse:
    try:
        a = analyze(req.source, req.filename)
    except CompileError as e:
        return InferResponse(
            satisfiable=False, diagnostics=[str(d) for d in e.diagnostics]
        )
    if not a.typable:
        segs = None
        if a.declassified is not None:
            segs = [
                {"index": s.index, "satisfiable": s.result.satisfiable}
                for s in a.declassified.segments
            ]
        return InferResponse(
            satisfiable=False,
            segments=segs,
            diagnostics=a.inference.core_messages(),
        )
    payload = a.assignment.to_json(a.compiled.flat.types)
    segs = None
    if a.declassified is not None:
        segs = [
            {
                "index": s.index,
                "satisfiable": s.result.satisfiable,
                **(
                    s.result.assignment.to_json(a.compiled.flat.types)
                    if s.result.assignment
                    else {}
                ),
            }
            for s in a.declassified.segments
        ]
    return InferResponse(
        satisfiable=True,
        assignment=payload["assignment"],
        gamma=payload["gamma"],
        segments=segs,
    )


@app.post("/v1/check", response_model=CheckResponse)
def check_endpoint(req: CheckRequest) -> CheckResponse:
    try:
        compiled = compile_source(req.source, req.filename)
    except CompileError as e:
        return CheckResponse(
            accepted=False, diagnostics=[str(d) for d in e.diagnostics]
        )
    assignment = TierAssignment.from_json(req.tiers)
    result = check_program(compiled.flat, compiled.graph, assignment)
    return CheckResponse(
        accepted=result.accepted,
        violations=[v.to_json() for v in result.violations],
    )


@app.post("/v1/safety", response_model=SafetyResponse)
def safety_endpoint(req: SourceRequest) -> SafetyResponse:
    try:
        a = analyze(req.source, req.filename)
    except CompileError as e:
        return SafetyResponse(
            typable=False, safe=False, diagnostics=[str(d) for d in e.diagnostics]
        )
    if not a.typable or a.safety is None:
        return SafetyResponse(
            typable=False, safe=False, diagnostics=a.inference.core_messages()
        )
    rep = a.safety
    branch = branchwise_relaxation(a.compiled.flat, a.compiled.graph)
    return SafetyResponse(
        typable=True,
        safe=rep.safe,
        recursive_methods=[m.to_json() for m in rep.methods],
        level=rep.program_level,
        intricacy=rep.program_intricacy,
        branchwise=branch,
    )


@app.post("/v1/bound", response_model=BoundResponse)
def bound_endpoint(req: BoundRequest) -> BoundResponse:
    try:
        a = analyze(req.source, req.filename, per_loop=req.per_loop)
    except CompileError as e:
        return BoundResponse(
            typable=False, safe=False, diagnostics=[str(d) for d in e.diagnostics]
        )
    if not a.typable or a.bounds is None:
        return BoundResponse(
            typable=False, safe=False, diagnostics=a.inference.core_messages()
        )
    validation = None
    if req.validate_sizes:
        verdict = validate_bounds(
            req.source, req.filename, sizes=req.validate_sizes, budget=req.budget
        )
        validation = verdict.to_json() if verdict is not None else None
    b = a.bounds
    return BoundResponse(
        typable=True,
        safe=a.safe,
        n1=b.n1,
        nu=b.nu,
        **{"lambda": b.lam},
        time=b.time_str,
        heap=b.heap_str,
        stack=b.stack_str,
        safety=a.safety.to_json() if a.safety else None,
        assignment=a.assignment.to_json(a.compiled.flat.types)["assignment"],
        per_loop=a.per_loop or None,
        validation=validation,
    )


@app.post("/v1/run", response_model=RunResponse)
def run_endpoint(req: RunRequest) -> RunResponse:
    try:
        result, analysis, compiled = run_program(
            req.source,
            req.filename,
            budget=req.budget or DEFAULT_BUDGET,
            detect_divergence=req.detect_divergence,
        )
    except CompileError as e:
        return RunResponse(ok=False, diagnostics=[str(d) for d in e.diagnostics])
    except AooError as e:
        return RunResponse(ok=False, diagnostics=[str(e)])
    machine = Machine(compiled.flat)
    final_vars = None
    trace = None
    if result.final_config is not None:
        final_vars = {}
        main_ctx = compiled.flat.main_ctx
        for (ctx, name), _t in sorted(compiled.flat.types.var_types.items()):
            if ctx == main_ctx and not name.startswith("$"):
                final_vars[name] = render_value(machine.read(result.final_config, name))
    if req.trace and analysis is not None and analysis.safe:
        from .interp import trace_tier1

        snaps, _ = trace_tier1(
            machine,
            result.input_config.copy(),
            compiled.flat.comp,
            analysis.assignment.tier1_view(),
            budget=min(req.budget or 100_000, 100_000),
        )
        trace = [f"configuration {i}: size {sizes(c)[2]}" for i, c in enumerate(snaps)]
    return RunResponse(
        ok=True,
        outcome=result.metrics.outcome,
        steps=result.metrics.steps,
        max_heap_nodes=result.metrics.max_heap_nodes,
        max_stack_size=result.metrics.max_stack_size,
        input_size=sizes(result.input_config)[2],
        final_vars=final_vars,
        trace=trace,
    )


@app.get("/v1/corpus", response_model=CorpusResponse)
def corpus_endpoint() -> CorpusResponse:
    return CorpusResponse(
        entries=[
            CorpusEntryModel(name=e.name, file=e.file, expected=e.expected_json())
            for e in entries()
        ]
    )


@app.post("/v1/corpus/verify", response_model=CorpusVerifyResponse)
def corpus_verify_endpoint() -> CorpusVerifyResponse:
    failures = verify_all()
    return CorpusVerifyResponse(ok=not failures, failures=failures)
