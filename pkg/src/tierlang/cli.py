"""`aoo`: command-line client for the analysis service.

Every command marshals the request through the HTTP API.  By default an
in-process ASGI client is used, so no server needs to run; point AOO_SERVER
(or --server) at a deployed instance to analyze remotely.  `aoo serve`
starts the service.

Exit codes: 0 success/accepted, 1 analysis rejection (untypable or unsafe),
2 usage or compilation error, 3 step budget exhausted.
"""

import argparse
import json
import os
import sys

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class Client:
    """Thin HTTP client; in-process unless a server URL is configured."""

    def __init__(self, server: str | None):
        self.server = server or os.environ.get("AOO_SERVER")
        if self.server:
            import httpx

            self._client = httpx.Client(base_url=self.server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def get(self, path: str) -> dict:
        resp = self._client.get(path)
        resp.raise_for_status()
        return resp.json()

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        resp.raise_for_status()
        return resp.json()


def _read_source(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        print(f"error: cannot read {path}: {e}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _print_diagnostics(diags):
    for d in diags:
        if isinstance(d, dict):
            print(
                f"{d.get('file')}:{d.get('line')}:{d.get('col')}: "
                f"[{d.get('code')}] {d.get('message')}",
                file=sys.stderr,
            )
        else:
            print(str(d), file=sys.stderr)


def _write_json(path: str | None, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_parse(client: Client, args) -> int:
    data = client.post(
        "/v1/flatten" if args.flatten else "/v1/parse",
        {"source": _read_source(args.file), "filename": args.file},
    )
    if not data["ok"]:
        _print_diagnostics(data["diagnostics"])
        return EXIT_USAGE
    print(data["pretty"])
    return EXIT_OK


def cmd_infer(client: Client, args) -> int:
    data = client.post(
        "/v1/infer", {"source": _read_source(args.file), "filename": args.file}
    )
    if args.json:
        _write_json(args.out, data)
        return EXIT_OK if data["satisfiable"] else EXIT_REJECTED
    if data["satisfiable"]:
        print("TYPABLE")
        for ctx, vars in sorted((data.get("assignment") or {}).items()):
            tier1 = [v for v, info in sorted(vars.items()) if info["tier"] == 1]
            if tier1:
                print(f"  {ctx}: tier 1 = {', '.join(tier1)}")
    else:
        print("UNTYPABLE")
        _print_diagnostics(data.get("diagnostics", []))
    segments = data.get("segments")
    if segments and len(segments) > 1:
        print("declassification segments:")
        for seg in segments:
            verdict = "typable" if seg["satisfiable"] else "untypable"
            print(f"  segment {seg['index'] + 1}: {verdict}")
    return EXIT_OK if data["satisfiable"] else EXIT_REJECTED


def cmd_check(client: Client, args) -> int:
    with open(args.tiers, "r", encoding="utf-8") as fh:
        tiers = json.load(fh)
    data = client.post(
        "/v1/check",
        {"source": _read_source(args.file), "filename": args.file, "tiers": tiers},
    )
    if data.get("diagnostics"):
        _print_diagnostics(data["diagnostics"])
        return EXIT_USAGE
    if data["accepted"]:
        print("ACCEPTED")
        return EXIT_OK
    print("REJECTED")
    for v in data["violations"]:
        print(f"  ({v['rule']}) {v['context']}:{v['line']}: {v['message']}")
    return EXIT_REJECTED


def cmd_safety(client: Client, args) -> int:
    data = client.post(
        "/v1/safety", {"source": _read_source(args.file), "filename": args.file}
    )
    if not data["typable"]:
        print("UNTYPABLE")
        _print_diagnostics(data.get("diagnostics", []))
        return EXIT_REJECTED
    print("SAFE" if data["safe"] else "UNSAFE")
    for m in data["recursive_methods"]:
        flags = []
        if not m["item1"]["ok"]:
            flags.append(f"item1: {m['item1']['calls_into_class']} recursive call sites")
        if not m["item2"]["ok"]:
            flags.append(f"item2: intricacy {m['item2']['intricacy']}")
        if not m["item3"]["ok"]:
            flags.append(f"item3: {m['item3']['detail']}")
        status = "ok" if m["safe"] else "; ".join(flags)
        print(f"  {m['signature']} (level {m['level']}): {status}")
    print(f"  level={data['level']} intricacy={data['intricacy']}")
    if args.branchwise and data.get("branchwise") is not None:
        for sig, ok in sorted(data["branchwise"].items()):
            print(f"  branchwise {sig}: {'<=1 call per branch' if ok else 'multiple calls on a branch'}")
    return EXIT_OK if data["safe"] else EXIT_REJECTED


def cmd_bound(client: Client, args) -> int:
    sizes = [int(s) for s in args.validate.split(",")] if args.validate else None
    data = client.post(
        "/v1/bound",
        {
            "source": _read_source(args.file),
            "filename": args.file,
            "validate_sizes": sizes,
            "per_loop": args.per_loop,
            "budget": args.budget,
        },
    )
    if args.json:
        _write_json(args.out, data)
    if not data["typable"]:
        if not args.json:
            print("UNTYPABLE")
            _print_diagnostics(data.get("diagnostics", []))
        return EXIT_REJECTED
    if not args.json:
        verdict = "SAFE" if data["safe"] else "UNSAFE"
        print(
            f"{verdict}; n1={data['n1']} nu={data['nu']} lambda={data['lambda']}; "
            f"time {data['time']}; heap {data['heap']}; stack {data['stack']}"
        )
        if data.get("per_loop"):
            for loop in data["per_loop"]:
                print(
                    f"  per-loop (experimental) line {loop['line']}: exponent "
                    f"{loop['exponent']} over {loop['tier1_assigned']}"
                )
        if data.get("validation"):
            v = data["validation"]
            print(
                f"  validation: time_ok={v['time_ok']} heap_ok={v['heap_ok']} "
                f"stack_ok={v['stack_ok']}"
            )
            for row in v["rows"]:
                print(
                    f"    n={row['n']} |I|={row['input_size']} steps={row['steps']} "
                    f"heap={row['max_heap_nodes']} stack={row['max_stack_size']} "
                    f"({row['outcome']})"
                )
    if not data["safe"]:
        return EXIT_REJECTED
    if data.get("validation") and not data["validation"]["ok"]:
        return EXIT_REJECTED
    return EXIT_OK


def cmd_run(client: Client, args) -> int:
    data = client.post(
        "/v1/run",
        {
            "source": _read_source(args.file),
            "filename": args.file,
            "budget": args.budget,
            "trace": args.trace,
            "detect_divergence": not args.no_divergence,
        },
    )
    if not data["ok"]:
        _print_diagnostics(data.get("diagnostics", []))
        return EXIT_USAGE
    print(
        f"outcome={data['outcome']} steps={data['steps']} "
        f"max_heap_nodes={data['max_heap_nodes']} max_stack_size={data['max_stack_size']}"
    )
    if data.get("final_vars"):
        for name, value in sorted(data["final_vars"].items()):
            print(f"  {name} = {value}")
    if data.get("trace"):
        for line in data["trace"]:
            print(f"  {line}")
    if args.metrics:
        _write_json(
            args.metrics,
            {
                "steps": data["steps"],
                "max_heap_nodes": data["max_heap_nodes"],
                "max_stack_size": data["max_stack_size"],
                "outcome": data["outcome"],
            },
        )
    if data["outcome"] == "budget-exhausted":
        return EXIT_BUDGET
    return EXIT_OK


def cmd_corpus(client: Client, args) -> int:
    listing = client.get("/v1/corpus")
    if args.list:
        for e in listing["entries"]:
            print(f"{e['name']}: {e['expected']}")
        return EXIT_OK
    result = client.post("/v1/corpus/verify", {})
    if result["ok"]:
        print(f"corpus OK ({len(listing['entries'])} programs)")
        return EXIT_OK
    print("corpus FAILURES:")
    for name, problems in sorted(result["failures"].items()):
        for p in problems:
            print(f"  {name}: {p}")
    return EXIT_REJECTED


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aoo", description="Tier-based complexity analysis for .aoo programs"
    )
    p.add_argument("--server", help="analysis service URL (default: in-process)")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="parse and pretty-print a program")
    sp.add_argument("file")
    sp.set_defaults(fn=cmd_parse, flatten=False)

    sp = sub.add_parser("flatten", help="print the flattened program")
    sp.add_argument("file")
    sp.set_defaults(fn=cmd_parse, flatten=True)

    sp = sub.add_parser("infer", help="infer tier types (2-SAT)")
    sp.add_argument("file")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out", help="write JSON to a file")
    sp.set_defaults(fn=cmd_infer)

    sp = sub.add_parser("check", help="replay a tier assignment")
    sp.add_argument("file")
    sp.add_argument("--tiers", required=True, help="assignment JSON file")
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("safety", help="check the recursion safety criterion")
    sp.add_argument("file")
    sp.add_argument("--branchwise", action="store_true",
                    help="also report the per-branch relaxation (diagnostic)")
    sp.set_defaults(fn=cmd_safety)

    sp = sub.add_parser("bound", help="report polynomial bounds")
    sp.add_argument("file")
    sp.add_argument("--validate", help="comma-separated input sizes to run")
    sp.add_argument("--per-loop", action="store_true", dest="per_loop")
    sp.add_argument("--budget", type=int)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_bound)

    sp = sub.add_parser("run", help="execute under the pointer-graph semantics")
    sp.add_argument("file")
    sp.add_argument("--budget", type=int)
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--metrics", help="write run metrics JSON to a file")
    sp.add_argument("--no-divergence", action="store_true")
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("corpus", help="verify the bundled example corpus")
    sp.add_argument("--list", action="store_true")
    sp.set_defaults(fn=cmd_corpus)

    sp = sub.add_parser("serve", help="start the analysis service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(fn=None)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    client = Client(args.server)
    try:
        return args.fn(client, args)
    except Exception as e:  # surface transport/usage errors as exit 2
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
