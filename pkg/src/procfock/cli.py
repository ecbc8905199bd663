"""
Command-line front end.

Exit codes: 0 success, 1 usage error, 2 parse or validation error,
3 numerical failure (a report that violates its own invariants, a failed
axiom check or a failed self-test suite).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Sequence

import numpy as np

from . import circuit as circ
from .choi import check_process_axioms
from .errors import CircuitError, NonUnitary, ProcessError
from .protocols import dsd, switch
from .protocols.counting import count_operations
from .selftest import DEFAULT_SEED, FAULTS, run_selftest

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt_prob(p: float) -> float:
    """Round to 12 significant digits."""
    return float(f"{p:.12g}")


def _bit(text: str) -> int:
    if text not in ("0", "1"):
        raise argparse.ArgumentTypeError(f"expected 0 or 1, got {text!r}")
    return int(text)


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return value


def _report(protocol: str, inputs: dict, outcomes, counts, start: float, **extra) -> dict:
    report = {
        "protocol": protocol,
        "inputs": inputs,
        "outcomes": outcomes,
        "counts": counts,
        "elapsed_ms": round((time.perf_counter() - start) * 1e3, 3),
    }
    report.update(extra)
    return report


def _table(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _complex_pair(z: complex) -> list[float]:
    return [fmt_prob(z.real), fmt_prob(z.imag)]


def _check_normalised(probs, tol: float) -> bool:
    probs = list(probs)
    return all(-tol <= p <= 1 + tol for p in probs) and abs(sum(probs) - 1.0) <= tol


def run_dsd(a: int, b: int, tol: float = DEFAULT_TOL) -> tuple[dict, bool]:
    start = time.perf_counter()
    inputs = dsd.DsdInputs(a, b)
    table = dsd.dsd_distribution(inputs)
    guess = dsd.dsd_guesses(inputs)
    trace = dsd.dsd_trace(inputs)
    counts = {m: count_operations(trace, m) for m in ("vacuum_inclusive", "flag")}
    outcomes = [{"a_prime": o.a_prime, "b_prime": o.b_prime, "probability": fmt_prob(o.probability)} for o in table]
    report = _report(
        "dsd",
        {"a": a, "b": b},
        outcomes,
        counts,
        start,
        guesses={"x": guess.x, "y": guess.y, "success": guess.success},
    )
    return report, _check_normalised((o.probability for o in table), tol)


def run_switch(u: np.ndarray, v: np.ndarray, pol: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[dict, bool]:
    start = time.perf_counter()
    spec = switch.SwitchSpec(u, v, pol)
    result = switch.switch_distribution(spec)
    trace = switch.switch_trace(spec)
    counts = {m: count_operations(trace, m) for m in ("vacuum_inclusive", "flag")}
    outcomes = [{"d1": d1, "d2": d2, "probability": fmt_prob(p)} for (d1, d2), p in result.table.items()]
    polarizations = {}
    for det in ("D1", "D2"):
        state = result.polarization(det)
        polarizations[det] = None if state is None else [_complex_pair(z) for z in state]
    report = _report(
        "switch",
        {"u": [[_complex_pair(z) for z in row] for row in spec.u_matrix],
         "v": [[_complex_pair(z) for z in row] for row in spec.v_matrix],
         "pol": [_complex_pair(z) for z in spec.input_polarization]},
        outcomes,
        counts,
        start,
        detectors={d: fmt_prob(p) for d, p in result.detector_probability.items()},
        polarizations=polarizations,
    )
    return report, _check_normalised(result.table.values(), tol)


def run_circuit(path: str, tol: float = DEFAULT_TOL) -> tuple[dict, bool]:
    start = time.perf_counter()
    spec = circ.load_circuit(path)
    table = circ.circuit_distribution(spec)
    names = [g.name for g in spec.open_measurements]
    outcomes = [{"outcome": dict(zip(names, combo)), "probability": fmt_prob(p)} for combo, p in table.items()]
    fixed = any(g.kind == "measure" and g.index is not None for g in spec.gates)
    ok = all(-tol <= p <= 1 + tol for p in table.values())
    if not fixed:
        ok = ok and _check_normalised(table.values(), tol)
    report = _report("circuit", {"file": path}, outcomes, {"vacuum_inclusive": None, "flag": None}, start)
    return report, ok


def run_axioms(path: str, tol: float = DEFAULT_TOL) -> tuple[dict, bool]:
    start = time.perf_counter()
    spec = circ.load_circuit(path)
    W = circ.circuit_process_vector(spec).process_matrix()
    result = check_process_axioms(W, spec.output_dims, tol=tol)
    report = _report("axioms", {"file": path}, result.as_dict(), {"vacuum_inclusive": None, "flag": None}, start)
    return report, result.positive and result.trace_ok


def _print_dsd(report: dict) -> str:
    rows = [["a'", "b'", "probability"]]
    rows += [[str(o["a_prime"]), str(o["b_prime"]), f"{o['probability']:.12g}"] for o in report["outcomes"]]
    g = report["guesses"]
    c = report["counts"]
    return "\n".join([
        f"dsd  a={report['inputs']['a']}  b={report['inputs']['b']}",
        _table(rows),
        f"guesses: x={g['x']}  y={g['y']}  success={g['success']}",
        f"operations: vacuum_inclusive={c['vacuum_inclusive']}  flag={c['flag']}",
    ])


def _print_switch(report: dict) -> str:
    rows = [["D1", "D2", "probability"]]
    rows += [[str(o["d1"]), str(o["d2"]), f"{o['probability']:.12g}"] for o in report["outcomes"]]
    lines = ["switch  (arm basis: 0 vacuum, 1 h, 2 v)", _table(rows)]
    for det, p in report["detectors"].items():
        pol = report["polarizations"][det]
        shown = "-" if pol is None else ", ".join(circ.format_complex(complex(*z)) for z in pol)
        lines.append(f"{det}: p={p:.12g}  polarization=[{shown}]")
    c = report["counts"]
    lines.append(f"operations: vacuum_inclusive={c['vacuum_inclusive']}  flag={c['flag']}")
    return "\n".join(lines)


def _print_circuit(report: dict) -> str:
    rows = [["outcome", "probability"]]
    for o in report["outcomes"]:
        label = " ".join(f"{k}={v}" for k, v in o["outcome"].items()) or "(fixed)"
        rows.append([label, f"{o['probability']:.12g}"])
    return _table(rows)


def _print_axioms(report: dict) -> str:
    r = report["outcomes"]
    return _table([
        ["check", "result", "value"],
        ["positivity", "pass" if r["positive"] else "FAIL", f"min eigenvalue {r['min_eigenvalue']:.12g}"],
        ["trace", "pass" if r["trace_ok"] else "FAIL", f"{r['trace_value']:.12g} (expected {r['expected_trace']})"],
    ])


def _common_options() -> argparse.ArgumentParser:
    # default=SUPPRESS lets a subcommand flag override the global one only when given
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("table", "json"), default=argparse.SUPPRESS)
    p.add_argument("--tol", type=_positive_float, default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(prog="procfock", description="Process-matrix simulations of single-particle protocols.")
    parser.add_argument("--format", choices=("table", "json"), default="table", help="output format")
    parser.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL, help="numerical tolerance")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run-dsd", parents=[common], help="run the single-photon two-way protocol")
    p.add_argument("--a", type=_bit, required=True)
    p.add_argument("--b", type=_bit, required=True)

    p = sub.add_parser("run-switch", parents=[common], help="run the optical quantum switch")
    p.add_argument("--u", default="[[1,0],[0,1]]", help="2x2 unitary, e.g. [[1,0],[0,-1]]")
    p.add_argument("--v", default="[[1,0],[0,1]]", help="2x2 unitary")
    p.add_argument("--pol", default="[1,0]", help="input polarization, e.g. [1,0]")

    p = sub.add_parser("run-circuit", parents=[common], help="evaluate a circuit file")
    p.add_argument("file")

    p = sub.add_parser("axioms", parents=[common], help="check the process axioms of a circuit file")
    p.add_argument("file")

    p = sub.add_parser("selftest", parents=[common], help="run the built-in invariant suites")
    p.add_argument("--json", action="store_true", help="same as --format json")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--inject-fault", choices=FAULTS, default=None, help=argparse.SUPPRESS)
    return parser


def _literal(text: str, what: str, shape: tuple[int, ...]) -> np.ndarray:
    try:
        m = circ.parse_matrix(text)
    except ValueError as exc:
        raise UsageError(f"--{what}: {exc}") from None
    if m.size != int(np.prod(shape)):
        raise UsageError(f"--{what} must have {int(np.prod(shape))} entries")
    return m.reshape(shape)


def _selftest(args) -> tuple[int, str]:
    start = time.perf_counter()
    results = run_selftest(args.seed, args.inject_fault)
    failed = [r.name for r in results if not r.passed]
    if args.format == "json" or args.json:
        report = _report(
            "selftest",
            {"seed": args.seed, "inject_fault": args.inject_fault},
            [r.as_dict() for r in results],
            {"suites": len(results), "passed": len(results) - len(failed)},
            start,
            failed=failed,
        )
        text = json.dumps(report, indent=2)
    else:
        rows = [["suite", "result", "detail"]]
        rows += [[r.name, "pass" if r.passed else "FAIL", r.detail] for r in results]
        summary = f"{len(results) - len(failed)}/{len(results)} suites passed"
        if failed:
            summary += "; failed: " + ", ".join(failed)
        text = _table(rows) + "\n" + summary
    return (EXIT_NUMERIC if failed else EXIT_OK), text


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            code, text = _selftest(args)
            print(text)
            return code
        if args.command == "run-dsd":
            report, ok = run_dsd(args.a, args.b, args.tol)
            render = _print_dsd
        elif args.command == "run-switch":
            u = _literal(args.u, "u", (2, 2))
            v = _literal(args.v, "v", (2, 2))
            pol = _literal(args.pol, "pol", (2,))
            report, ok = run_switch(u, v, pol, args.tol)
            render = _print_switch
        elif args.command == "run-circuit":
            report, ok = run_circuit(args.file, args.tol)
            render = _print_circuit
        else:
            report, ok = run_axioms(args.file, args.tol)
            render = _print_axioms
    except UsageError as exc:
        print(f"procfock: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"procfock: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (CircuitError, NonUnitary, ValueError) as exc:
        print(f"procfock: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ProcessError as exc:
        print(f"procfock: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(report, indent=2) if args.format == "json" else render(report))
    if not ok:
        print("procfock: report failed its numerical checks", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
