"""Command-line front end.

Problem files are JSON: named sets, functions, anchors, splits, schedules,
and verification suites.  Rationals are written as strings "p/q" so values
round-trip exactly; every exact value in a report is printed as a rational,
never a float.  Reports are deterministic for a given file and version
(timings are deliberately omitted).

Exit codes: 0 success, 1 not-integrable/diverged/failed verification,
2 usage or parse error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional

from . import __version__
from .boxes import Box, BoxUnion, LatticeVector, SparseVector
from .cells import Cell, compatibility_check, patch_measure
from .errors import LinfMeasureError
from .exprs import (
    Abs,
    Anchor,
    Clamp,
    Const,
    Coord,
    Expr,
    Indicator,
    Piecewise,
    Prod,
    Scale,
    Sum,
    Translate,
    ZERO_ANCHOR,
)
from .fubini import CoordinateSplit, fubini_check
from .intervals import INF, Interval, IntervalUnion
from .library import BUILTIN_FUNCTIONS
from .limits import (
    DEFAULT_SCHEDULE,
    IntegralResult,
    LimitSchedule,
    integrate_cell,
    integrate_global,
    invariance_check,
    slice_scan,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


class ProblemError(LinfMeasureError):
    """A problem file could not be parsed; the message names the location."""


def _rat(value: Any, where: str) -> Fraction:
    if isinstance(value, bool):
        raise ProblemError(f"{where}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ProblemError(f"{where}: malformed rational {value!r} ({exc})")
    raise ProblemError(
        f"{where}: expected a rational string 'p/q' or integer, got {value!r}"
    )


def _union(value: Any, where: str) -> IntervalUnion:
    """An interval union is a [lo, hi] pair or a list of such pairs."""
    if (
        isinstance(value, list)
        and len(value) == 2
        and not isinstance(value[0], list)
    ):
        value = [value]
    if not isinstance(value, list):
        raise ProblemError(f"{where}: expected an interval or list of intervals")
    comps = []
    for k, pair in enumerate(value):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ProblemError(f"{where}[{k}]: expected a [lo, hi] pair")
        lo = _rat(pair[0], f"{where}[{k}].lo")
        hi = _rat(pair[1], f"{where}[{k}].hi")
        if lo > hi:
            raise ProblemError(f"{where}[{k}]: lo {lo} exceeds hi {hi}")
        comps.append(Interval.closed(lo, hi))
    return IntervalUnion.of(*comps)


def _box(value: Any, where: str) -> Box:
    if not isinstance(value, dict):
        raise ProblemError(f"{where}: expected a box object")
    explicit = {}
    for key, u in (value.get("explicit") or {}).items():
        try:
            idx = int(key)
        except ValueError:
            raise ProblemError(f"{where}.explicit: coordinate {key!r} is not an integer")
        if idx < 0:
            raise ProblemError(f"{where}.explicit: coordinate {idx} is negative")
        explicit[idx] = _union(u, f"{where}.explicit[{key}]")
    tail = _union(value.get("tail", [["0", "1"]]), f"{where}.tail")
    return Box.make(explicit, tail=tail)


def _sparse(value: Any, where: str) -> SparseVector:
    if not isinstance(value, dict):
        raise ProblemError(f"{where}: expected an object of coordinate -> rational")
    entries = {}
    for key, v in value.items():
        try:
            idx = int(key)
        except ValueError:
            raise ProblemError(f"{where}: coordinate {key!r} is not an integer")
        entries[idx] = _rat(v, f"{where}[{key}]")
    return SparseVector.of(entries)


class Problem:
    """A parsed problem file: named sets, functions, and configuration."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ProblemError("top level: expected a JSON object")
        self.raw = raw
        self.sets: Dict[str, BoxUnion] = {}
        for name, value in (raw.get("sets") or {}).items():
            boxes = value if isinstance(value, list) else [value]
            self.sets[name] = BoxUnion.of(
                *[_box(b, f"sets.{name}[{k}]") for k, b in enumerate(boxes)]
            )
        self.functions: Dict[str, Expr] = {}
        for name, value in (raw.get("functions") or {}).items():
            self.functions[name] = self._expr(value, f"functions.{name}")
        self.anchors: Dict[str, Anchor] = {}
        for name, value in (raw.get("anchors") or {}).items():
            self.anchors[name] = Anchor(
                entries=_sparse(value.get("entries", {}), f"anchors.{name}.entries")
            )
        self.splits: Dict[str, CoordinateSplit] = {}
        for name, value in (raw.get("splits") or {}).items():
            where = f"splits.{name}"
            if not isinstance(value, dict):
                raise ProblemError(f"{where}: expected an object")
            try:
                self.splits[name] = CoordinateSplit(
                    kind=value.get("kind", "finite"),
                    indices=tuple(value.get("indices", ())),
                )
            except ValueError as exc:
                raise ProblemError(f"{where}: {exc}")
        self.schedules: Dict[str, LimitSchedule] = {}
        for name, value in (raw.get("schedules") or {}).items():
            self.schedules[name] = _schedule_from_dict(value, f"schedules.{name}")

    def set_union(self, name: str) -> BoxUnion:
        if name not in self.sets:
            raise ProblemError(f"unknown set {name!r}")
        return self.sets[name]

    def function(self, name: str) -> Expr:
        if name not in self.functions:
            raise ProblemError(f"unknown function {name!r}")
        return self.functions[name]

    def _region(self, value: Any, where: str) -> BoxUnion:
        if isinstance(value, str):
            if value not in self.sets:
                raise ProblemError(f"{where}: unknown set {value!r}")
            return self.sets[value]
        boxes = value if isinstance(value, list) else [value]
        return BoxUnion.of(*[_box(b, f"{where}[{k}]") for k, b in enumerate(boxes)])

    def _expr(self, value: Any, where: str) -> Expr:
        if not isinstance(value, dict) or "op" not in value:
            raise ProblemError(f"{where}: expected an expression object with 'op'")
        op = value["op"]
        if op == "const":
            return Const(_rat(value.get("value", 0), f"{where}.value"))
        if op == "coord":
            idx = value.get("index")
            if not isinstance(idx, int) or idx < 0:
                raise ProblemError(f"{where}.index: expected a nonnegative integer")
            return Coord(idx)
        if op == "sum":
            return Sum(
                tuple(
                    self._expr(t, f"{where}.terms[{k}]")
                    for k, t in enumerate(value.get("terms", []))
                )
            )
        if op == "prod":
            return Prod(
                tuple(
                    self._expr(t, f"{where}.factors[{k}]")
                    for k, t in enumerate(value.get("factors", []))
                )
            )
        if op == "scale":
            return Scale(
                _rat(value.get("coef", 1), f"{where}.coef"),
                self._expr(value.get("arg"), f"{where}.arg"),
            )
        if op == "piecewise":
            idx = value.get("index")
            if not isinstance(idx, int) or idx < 0:
                raise ProblemError(f"{where}.index: expected a nonnegative integer")
            pieces = []
            for k, p in enumerate(value.get("pieces", [])):
                iu = _union(p.get("set"), f"{where}.pieces[{k}].set")
                coeffs = tuple(
                    _rat(c, f"{where}.pieces[{k}].coeffs[{j}]")
                    for j, c in enumerate(p.get("coeffs", ["1"]))
                )
                pieces.append((iu, coeffs))
            return Piecewise(idx, tuple(pieces))
        if op == "indicator":
            return Indicator(self._region(value.get("region"), f"{where}.region"))
        if op == "translate":
            return Translate(
                self._expr(value.get("arg"), f"{where}.arg"),
                _sparse(value.get("shift", {}), f"{where}.shift"),
            )
        if op == "clamp":
            return Clamp(
                self._expr(value.get("arg"), f"{where}.arg"),
                _rat(value.get("bound"), f"{where}.bound"),
            )
        if op == "abs":
            return Abs(self._expr(value.get("arg"), f"{where}.arg"))
        if op == "builtin":
            name = value.get("name")
            if name not in BUILTIN_FUNCTIONS:
                raise ProblemError(
                    f"{where}.name: unknown builtin {name!r}; "
                    f"available: {', '.join(sorted(BUILTIN_FUNCTIONS))}"
                )
            return BUILTIN_FUNCTIONS[name]()
        raise ProblemError(f"{where}: unknown op {op!r}")


def _schedule_from_dict(value: Any, where: str) -> LimitSchedule:
    if not isinstance(value, dict):
        raise ProblemError(f"{where}: expected an object")
    kwargs: dict = {}
    if "n_max" in value:
        kwargs["n_values"] = tuple(range(0, int(value["n_max"]) + 1))
    if "n_values" in value:
        kwargs["n_values"] = tuple(int(n) for n in value["n_values"])
    if "M_max_power" in value:
        kwargs["M_values"] = tuple(
            Fraction(2) ** k for k in range(0, int(value["M_max_power"]) + 1)
        )
    if "M_values" in value:
        kwargs["M_values"] = tuple(
            _rat(m, f"{where}.M_values") for m in value["M_values"]
        )
    if "epsilon" in value:
        kwargs["epsilon"] = float(value["epsilon"])
    if "window" in value:
        kwargs["window"] = int(value["window"])
    try:
        return LimitSchedule(**kwargs)
    except ValueError as exc:
        raise ProblemError(f"{where}: {exc}")


def _schedule_from_flags(base: LimitSchedule, text: Optional[str]) -> LimitSchedule:
    """--schedule n_max=24,M_max_power=20,epsilon=1e-9,window=3"""
    if not text:
        return base
    spec: dict = {}
    for item in text.split(","):
        if "=" not in item:
            raise ProblemError(f"--schedule: expected key=value, got {item!r}")
        key, _, val = item.partition("=")
        spec[key.strip()] = val.strip()
    kwargs = dict(
        n_values=base.n_values,
        M_values=base.M_values,
        window=base.window,
        epsilon=base.epsilon,
    )
    for key, val in spec.items():
        if key == "n_max":
            kwargs["n_values"] = tuple(range(0, int(val) + 1))
        elif key == "M_max_power":
            kwargs["M_values"] = tuple(
                Fraction(2) ** k for k in range(0, int(val) + 1)
            )
        elif key == "epsilon":
            kwargs["epsilon"] = float(val)
        elif key == "window":
            kwargs["window"] = int(val)
        else:
            raise ProblemError(f"--schedule: unknown key {key!r}")
    try:
        return LimitSchedule(**kwargs)
    except ValueError as exc:
        raise ProblemError(f"--schedule: {exc}")


def _parse_cells(text: str) -> List[Cell]:
    """--cells '0:1;1:-1' is one cell; commas separate cells; 'origin' is
    the base cell."""
    cells = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if chunk in ("", "origin"):
            cells.append(Cell())
            continue
        entries = []
        for pair in chunk.split(";"):
            coord, _, step = pair.partition(":")
            try:
                entries.append((int(coord), int(step)))
            except ValueError:
                raise ProblemError(f"--cells: malformed entry {pair!r}")
        cells.append(Cell(base=LatticeVector(tuple(entries))))
    return cells


def _fmt(value: Any) -> Any:
    """Exact values render as rational strings; floats stay floats."""
    if value is None:
        return None
    if value == INF:
        return "inf"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return float(value)


def _trace_rows(result: IntegralResult) -> List[dict]:
    return [
        {
            "n": r.n,
            "M": _fmt(r.truncation),
            "value": _fmt(r.value),
            "error": r.error_estimate,
            "mode": r.mode,
        }
        for r in result.trace
    ]


def _result_record(result: IntegralResult, with_trace: bool = True) -> dict:
    rec = {
        "value": _fmt(result.value),
        "status": result.status,
        "absolute_integral": _fmt(result.absolute_integral),
        "cells": [
            {str(i): m for i, m in cell.base.entries} for cell in result.cells_used
        ],
        "warnings": list(result.warnings),
    }
    if with_trace:
        rec["trace"] = _trace_rows(result)
    return rec


def _load_problem(path: str) -> Problem:
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
    return Problem(raw)


def _emit(report: dict, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _exit_code_for(status: str) -> int:
    if status == "converged":
        return EXIT_OK
    if status == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_FAILED


def cmd_measure(args) -> int:
    problem = _load_problem(args.file)
    u = problem.set_union(args.set)
    value = patch_measure(u)
    report = {
        "version": __version__,
        "command": "measure",
        "set": args.set,
        "measure": _fmt(value),
    }
    print(_fmt(value))
    if args.out:
        _emit(report, args.out)
    return EXIT_OK


def cmd_integrate(args) -> int:
    problem = _load_problem(args.file)
    f = problem.function(args.function)
    sched = problem.schedules.get(args.use_schedule, DEFAULT_SCHEDULE) if args.use_schedule else DEFAULT_SCHEDULE
    sched = _schedule_from_flags(sched, args.schedule)
    if args.no_truncation:
        sched = sched.untruncated()
    if args.cells:
        cells = _parse_cells(args.cells)
        if len(cells) == 1:
            result = integrate_cell(f, cells[0], ZERO_ANCHOR, sched)
        else:
            result = integrate_global(f, sched, cells=cells)
    else:
        result = integrate_global(f, sched)
    report = {
        "version": __version__,
        "command": "integrate",
        "function": args.function,
        "no_truncation": bool(args.no_truncation),
        "schedule": {
            "n_values": list(sched.n_values),
            "M_values": [_fmt(m) for m in sched.M_values],
            "window": sched.window,
            "epsilon": sched.epsilon,
        },
        "result": _result_record(result, with_trace=not args.no_trace),
    }
    _emit(report, args.out)
    return _exit_code_for(result.status)


def cmd_slice_scan(args) -> int:
    problem = _load_problem(args.file)
    f = problem.function(args.function)
    anchor = problem.anchors.get(args.anchor, ZERO_ANCHOR) if args.anchor else ZERO_ANCHOR
    try:
        lo, _, hi = args.n.partition("..")
        n_values = tuple(range(int(lo), int(hi) + 1))
    except ValueError:
        raise ProblemError(f"--n: expected LO..HI, got {args.n!r}")
    M_values = []
    for item in (args.M or "inf").split(","):
        item = item.strip()
        M_values.append(INF if item in ("inf", "INF") else _rat(item, "--M"))
    rows = slice_scan(f, anchor, n_values, tuple(M_values))
    table = [
        {
            "n": r.n,
            "M": _fmt(r.truncation),
            "value": _fmt(r.value),
            "error": r.error_estimate,
            "mode": r.mode,
        }
        for r in rows
    ]
    report = {
        "version": __version__,
        "command": "slice-scan",
        "function": args.function,
        "table": table,
    }
    if args.csv:
        with open(args.csv, "w", newline="") as handle:
            writer = csv.DictWriter(
                handle, fieldnames=["n", "M", "value", "error", "mode"]
            )
            writer.writeheader()
            writer.writerows(table)
    _emit(report, args.out)
    return EXIT_OK


def _run_verify_task(problem: Problem, task: dict, where: str) -> dict:
    kind = task.get("type")
    if kind == "invariance":
        f = problem.function(task["function"])
        shift = _sparse(task.get("shift", {}), f"{where}.shift")
        rep = invariance_check(f, shift)
        return {
            "type": "invariance",
            "function": task["function"],
            "direct": _fmt(rep.direct.value),
            "translated": _fmt(rep.translated.value),
            "difference": _fmt(rep.difference),
            "passed": rep.passed
            and rep.difference is not None
            and float(rep.difference) <= 2 * DEFAULT_SCHEDULE.epsilon,
        }
    if kind == "fubini":
        f = problem.function(task["function"])
        splits = []
        for name in task.get("splits", []):
            if name not in problem.splits:
                raise ProblemError(f"{where}: unknown split {name!r}")
            splits.append(problem.splits[name])
        rep = fubini_check(f, splits)
        return {
            "type": "fubini",
            "function": task["function"],
            "rows": [
                {
                    "split": {"kind": r.split.kind, "indices": list(r.split.indices)},
                    "iterated": _fmt(r.iterated.value),
                    "direct": _fmt(r.direct.value),
                    "difference": _fmt(r.difference),
                    "consistent": r.consistent,
                }
                for r in rep.rows
            ],
            "passed": rep.passed,
        }
    if kind == "compatibility":
        first = _sparse(task.get("first", {}), f"{where}.first")
        second = _sparse(task.get("second", {}), f"{where}.second")
        samples = []
        for k, s in enumerate(task.get("samples", [])):
            u = problem._region(s, f"{where}.samples[{k}]")
            samples.extend(u.boxes)
        rep = compatibility_check(first, second, samples)
        return {
            "type": "compatibility",
            "rows": [
                {
                    "first": _fmt(r.measure_first),
                    "second": _fmt(r.measure_second),
                    "ok": r.ok,
                }
                for r in rep.rows
            ],
            "passed": rep.passed,
        }
    if kind == "expect-measure":
        u = problem.set_union(task["set"])
        expected = _rat(task["value"], f"{where}.value") if task["value"] not in ("inf", "INF") else INF
        actual = patch_measure(u)
        return {
            "type": "expect-measure",
            "set": task["set"],
            "expected": _fmt(expected),
            "actual": _fmt(actual),
            "passed": actual == expected,
        }
    raise ProblemError(f"{where}: unknown verify type {kind!r}")


def cmd_verify(args) -> int:
    problem = _load_problem(args.file)
    tasks = problem.raw.get("verify", [])
    if not isinstance(tasks, list):
        raise ProblemError("verify: expected a list of checks")
    results = [
        _run_verify_task(problem, task, f"verify[{k}]")
        for k, task in enumerate(tasks)
    ]
    passed = all(r.get("passed") for r in results)
    report = {
        "version": __version__,
        "command": "verify",
        "checks": results,
        "passed": passed,
    }
    _emit(report, args.out)
    return EXIT_OK if passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linfmeasure",
        description="Exact measures and limit-scheme integrals on the "
        "infinite-dimensional cube lattice.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="measure of a named set")
    p.add_argument("set")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("integrate", help="integral of a named function")
    p.add_argument("function")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("--no-truncation", action="store_true")
    p.add_argument("--schedule", help="k=v overrides: n_max, M_max_power, epsilon, window")
    p.add_argument("--use-schedule", help="named schedule from the problem file")
    p.add_argument("--cells", help="cells as 'coord:step;...' joined by commas, or 'origin'")
    p.add_argument("--no-trace", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("slice-scan", help="(n, M) slice-integral table")
    p.add_argument("function")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("--n", required=True, help="range LO..HI")
    p.add_argument("--M", help="comma list of bounds, 'inf' allowed (default inf)")
    p.add_argument("--anchor", help="named anchor from the problem file")
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_slice_scan)

    p = sub.add_parser("verify", help="run the file's verification suite")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, matching our convention
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LinfMeasureError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
