"""Command-line front end: query snapshot files, replay interaction scripts,
and benchmark query classes.

Exit codes are uniform across subcommands: 0 found/success, 1 empty result or
assertion/not-found failure, 2 usage, parse or validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .datex import extract_date_element
from .engine import ResultSet, WeightConfig, evaluate, find_first
from .errors import (
    CellRangeError,
    ElementNotFoundError,
    EmptyCellError,
    HeaderNotFoundError,
    InteractionTimeoutError,
    TableNotFoundError,
    VisqueryError,
)
from .interact import FixtureBackend, Verb, shortcut, wait_for
from .querylang import parse_query
from .snapshot import PageSnapshot, Raster, load_snapshot_file, tile_vertically
from .tables import get_cell, get_table

ENDPOINT_ENV = "VISQUERY_WEBDRIVER_URL"
EXTRACTOR_ENV = "VISQUERY_EXTRACTOR"

EXIT_OK = 0
EXIT_EMPTY = 1
EXIT_ERROR = 2

# Errors meaning "nothing there", as opposed to broken input.
_DATA_CONDITION_ERRORS = (
    ElementNotFoundError,
    InteractionTimeoutError,
    TableNotFoundError,
    HeaderNotFoundError,
    CellRangeError,
    EmptyCellError,
)


class ScriptError(VisqueryError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class AssertionFailure(VisqueryError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: assertion failed: {message}")


def _load_weights(path: str | None) -> WeightConfig | None:
    if path is None:
        return None
    return WeightConfig(**json.loads(Path(path).read_text(encoding="utf-8")))


def _load_page(path: str, raster_path: str | None, raster_scale: float) -> PageSnapshot:
    page = load_snapshot_file(path)
    if raster_path is not None:
        raster = Raster.from_png_bytes(Path(raster_path).read_bytes(), scale=raster_scale)
        page = PageSnapshot(page.url, page.viewport, page.elements, raster)
    return page


def _emit(payload: Any, output: str) -> None:
    if output == "json":
        print(json.dumps(payload, indent=2))
        return
    # plain-text rendering for humans
    if isinstance(payload, list):
        for i, row in enumerate(payload):
            print(f"{i + 1}. {row}")
    else:
        print(payload)


def cmd_query(args: argparse.Namespace) -> int:
    page = _load_page(args.snapshot, args.raster, args.raster_scale)
    predicate = parse_query(args.query)
    result = evaluate(page, predicate, _load_weights(args.config))
    rows = result.to_jsonable()
    if args.output == "json":
        print(json.dumps(rows, indent=2))
    else:
        for i, entry in enumerate(result):
            el = entry.element
            text = el.visible_text[:60]
            print(f"{i + 1}. {el.id}  <{el.tag}>  weight={entry.weight:.4f}  {text!r}")
    return EXIT_OK if rows else EXIT_EMPTY


# --- scripted runs ---------------------------------------------------------------

_STATEMENTS = {
    "open": (1, 1),
    "query": (1, 1),
    "first": (1, 1),
    "click": (1, 1),
    "type": (2, 2),
    "waitfor": (2, 2),
    "table": (4, 4),
    "extractdate": (1, 1),
    "assert": (1, 3),
}


@dataclass
class Statement:
    line: int
    op: str
    args: list[str]


def parse_script(text: str) -> list[Statement]:
    statements: list[Statement] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            tokens = shlex.split(stripped)
        except ValueError as exc:
            raise ScriptError(lineno, f"bad quoting: {exc}") from exc
        op, args = tokens[0].lower(), tokens[1:]
        if op not in _STATEMENTS:
            raise ScriptError(lineno, f"unknown statement {op!r}")
        lo, hi = _STATEMENTS[op]
        if not lo <= len(args) <= hi:
            raise ScriptError(lineno, f"{op} takes {lo}..{hi} arguments, got {len(args)}")
        if op == "table" and args[1].lower() != "cell":
            raise ScriptError(lineno, "table statement form is: table \"<kw>\" cell <row> <col|header>")
        statements.append(Statement(lineno, op, args))
    if statements and statements[0].op != "open":
        raise ScriptError(statements[0].line, "scripts must start with an open statement")
    if not statements:
        raise ScriptError(1, "empty script")
    return statements


class _Runner:
    def __init__(self, backend_spec: str, weights: WeightConfig | None, extractor: str | None):
        self.spec = backend_spec
        self.weights = weights
        self.extractor = extractor
        self.backend = None
        self.last_result: ResultSet | None = None
        self.last_text: str | None = None
        self.last_date: str | None = None
        self.outputs: list[dict[str, Any]] = []

    def _evaluate(self, snapshot, predicate):
        return evaluate(snapshot, predicate, self.weights)

    def _ensure_backend(self, line: int, target: str):
        kind, _, arg = self.spec.partition(":")
        if kind == "fixture":
            if self.backend is None:
                manifest = Path(arg) / "manifest.json"
                self.backend = FixtureBackend(manifest, start=target)
            else:
                self.backend.navigate(target)
        elif kind == "webdriver":
            endpoint = arg or os.environ.get(ENDPOINT_ENV, "")
            if not endpoint:
                raise ScriptError(line, f"no WebDriver endpoint (flag or ${ENDPOINT_ENV})")
            if self.backend is None:
                from .webdriver import WebDriverBackend, connect

                script_path = self.extractor or os.environ.get(EXTRACTOR_ENV)
                if not script_path:
                    raise ScriptError(line, "webdriver backend needs --extractor <script.js>")
                session = connect(endpoint)
                self.backend = WebDriverBackend(session, Path(script_path).read_text(encoding="utf-8"))
            self.backend.navigate(target)
        else:
            raise ScriptError(line, f"unknown backend spec {self.spec!r}")

    def execute(self, st: Statement) -> None:
        out: dict[str, Any] = {"line": st.line, "statement": st.op}
        if st.op == "open":
            self._ensure_backend(st.line, st.args[0])
            out["page"] = st.args[0]
        elif st.op in ("query", "first", "extractdate", "waitfor"):
            predicate = parse_query(st.args[0])
            if st.op == "waitfor":
                element = wait_for(
                    self.backend, predicate, float(st.args[1]),
                    evaluate_fn=self._evaluate,
                )
                out["id"] = element.id
                self.last_text = element.visible_text
            else:
                result = self._evaluate(self.backend.current_snapshot(), predicate)
                self.last_result = result
                if st.op == "query":
                    out["count"] = len(result)
                    out["results"] = result.to_jsonable()
                else:
                    element = find_first(result)
                    if element is None:
                        raise ElementNotFoundError(st.args[0])
                    self.last_text = element.visible_text
                    if st.op == "extractdate":
                        extracted = extract_date_element(element)
                        if extracted is None:
                            raise ElementNotFoundError(f"date in {st.args[0]!r}")
                        self.last_date = extracted.iso()
                        out["date"] = self.last_date
                    else:
                        out["id"] = element.id
                        out["text"] = element.visible_text
                        out["weight"] = round(result.entries[0].weight, 6)
        elif st.op in ("click", "type"):
            verb = Verb.CLICK if st.op == "click" else Verb.TYPE
            payload = st.args[1] if st.op == "type" else None
            element = shortcut(self.backend, verb, st.args[0], payload, evaluate_fn=self._evaluate)
            self.last_text = element.visible_text
            out["id"] = element.id
        elif st.op == "table":
            keyword, _, row, col = st.args
            snapshot = self.backend.current_snapshot()
            model = get_table(snapshot, keyword)
            cell = get_cell(model, int(row), int(col) if col.isdigit() else col)
            self.last_text = cell.visible_text
            out["id"] = cell.id
            out["text"] = cell.visible_text
        elif st.op == "assert":
            self._check(st)
            out["ok"] = True
        self.outputs.append(out)

    def _check(self, st: Statement) -> None:
        kind = st.args[0].lower()
        if kind == "nonempty":
            if not (self.last_result and len(self.last_result)):
                raise AssertionFailure(st.line, "last result is empty")
        elif kind == "empty":
            if self.last_result and len(self.last_result):
                raise AssertionFailure(st.line, f"last result has {len(self.last_result)} entries")
        elif kind == "count":
            op, expected = st.args[1], int(st.args[2])
            actual = len(self.last_result) if self.last_result else 0
            ops = {
                "==": actual == expected, "!=": actual != expected,
                ">=": actual >= expected, "<=": actual <= expected,
                ">": actual > expected, "<": actual < expected,
            }
            if op not in ops:
                raise ScriptError(st.line, f"bad comparison {op!r}")
            if not ops[op]:
                raise AssertionFailure(st.line, f"count {actual} {op} {expected} is false")
        elif kind == "text":
            expected = st.args[2]
            if (self.last_text or "") != expected:
                raise AssertionFailure(st.line, f"text {self.last_text!r} != {expected!r}")
        elif kind == "date":
            expected = st.args[2]
            if (self.last_date or "") != expected:
                raise AssertionFailure(st.line, f"date {self.last_date!r} != {expected!r}")
        else:
            raise ScriptError(st.line, f"unknown assertion {kind!r}")


def cmd_run(args: argparse.Namespace) -> int:
    statements = parse_script(Path(args.script).read_text(encoding="utf-8"))
    runner = _Runner(args.backend, _load_weights(args.config), args.extractor)
    exit_code = EXIT_OK
    failure: str | None = None
    try:
        for st in statements:
            runner.execute(st)
    except AssertionFailure as exc:
        exit_code, failure = EXIT_EMPTY, str(exc)
    except _DATA_CONDITION_ERRORS as exc:
        exit_code, failure = EXIT_EMPTY, str(exc)
    journal = [
        json.loads(e.to_json_line()) for e in getattr(runner.backend, "journal", [])
    ]
    if args.journal:
        Path(args.journal).write_text(
            "".join(json.dumps(j, separators=(",", ":")) + "\n" for j in journal),
            encoding="utf-8",
        )
    report = {"ok": exit_code == EXIT_OK, "results": runner.outputs, "journal": journal}
    if failure:
        report["error"] = failure
    if args.output == "json":
        print(json.dumps(report, indent=2))
    else:
        for row in runner.outputs:
            print(row)
        if failure:
            print(f"FAILED: {failure}")
    return exit_code


# --- benchmark -------------------------------------------------------------------

BENCH_QUERIES = {
    "kind": "clickable()",
    "contains": 'contains("a")',
    "color": "color(white)",
    "direction": "below(text())",
    "composite": 'headline() & clickable() & below(typable())',
}


def _time_query(page: PageSnapshot, query: str, repeats: int = 3) -> float:
    predicate = parse_query(query)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        evaluate(page, predicate)
        best = min(best, time.perf_counter() - start)
    return best


def cmd_bench(args: argparse.Namespace) -> int:
    base = _load_page(args.snapshot, args.raster, args.raster_scale)
    rows: list[dict[str, Any]] = []
    for factor in (1, 2, 4):
        page = base if factor == 1 else tile_vertically(base, factor)
        for name, query in BENCH_QUERIES.items():
            if name == "color" and page.raster is None:
                rows.append({
                    "query_class": name, "factor": factor, "elements": len(page.elements),
                    "skipped": "snapshot has no raster",
                })
                continue
            seconds = _time_query(page, query)
            rows.append({
                "query_class": name, "factor": factor,
                "elements": len(page.elements), "seconds": round(seconds, 6),
            })
    if args.output == "json":
        print(json.dumps({"snapshot": args.snapshot, "rows": rows}, indent=2))
    else:
        for row in rows:
            print(row)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="visquery",
        description="Query rendered-page snapshots and replay human-like interactions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--output", choices=("json", "text"), default="json")
        p.add_argument("--config", help="JSON file overriding weight constants")
        p.add_argument("--raster", help="PNG overriding/attaching the snapshot screenshot")
        p.add_argument("--raster-scale", type=float, default=1.0)

    q = sub.add_parser("query", help="evaluate a query against a snapshot file")
    q.add_argument("snapshot")
    q.add_argument("query")
    common(q)
    q.set_defaults(fn=cmd_query)

    r = sub.add_parser("run", help="execute an interaction script")
    r.add_argument("script")
    r.add_argument("--backend", required=True, help="fixture:<dir> or webdriver:<url>")
    r.add_argument("--journal", help="write the interaction journal to this JSONL file")
    r.add_argument("--extractor", help="path to the in-page extractor script (webdriver backend)")
    common(r)
    r.set_defaults(fn=cmd_run)

    b = sub.add_parser("bench", help="time query classes on a snapshot and scaled copies")
    b.add_argument("snapshot")
    common(b)
    b.set_defaults(fn=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _DATA_CONDITION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except AssertionFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except VisqueryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
