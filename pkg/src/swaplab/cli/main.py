"""``swaplab`` command line: verification suites, experiments and circuit runs.

Exit codes: 0 pass, 1 verification failure, 2 usage or schema error,
3 resource limit (dimension cap, truncation), 4 unsupported gate/scheme.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from importlib import resources
from pathlib import Path

from .. import experiments
from ..circuits import NoiseSpec
from ..compiler import compile_circuit, parse_circuit_file
from ..encodings import DEFAULT_TRUNCATION, EncodingSpec
from ..errors import CircuitSchemaError, DimensionCapError, TruncationError, UnsupportedGateError
from ..reports import Report, write_report
from ..runtime import execute
from ..verify import SCOPES, run_scope

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE, EXIT_UNSUPPORTED = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _encoding_from_args(kind: str | None, alpha, delta, d: int | None) -> EncodingSpec | None:
    if kind is None:
        return None
    d = d or DEFAULT_TRUNCATION[kind]
    if kind == "fock":
        return EncodingSpec.fock(d)
    if kind in ("coherent", "cat"):
        if alpha is None:
            raise UsageError(f"--alpha is required for {kind} encodings")
        return EncodingSpec(kind, alpha=complex(alpha), truncation=d)
    if delta is None:
        raise UsageError("--delta is required for gkp encodings")
    return EncodingSpec.gkp(delta, d)


def _parse_encoding(text: str, d: int) -> EncodingSpec:
    try:
        return EncodingSpec.parse(text, d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _finish(reports: list[Report], out: Path | None, elapsed: float) -> int:
    for r in reports:
        if not r.columns:
            r.columns = ["check", "value", "op", "threshold", "passed"]
            r.rows = [[c.name, c.value, c.op, c.threshold, c.passed] for c in r.checks]
        print("\n".join(r.summary_lines()))
        if out is not None:
            paths = write_report(r, out, elapsed)
            print(f"report: {paths['json']}")
    ok = all(r.passed for r in reports)
    print("verdict:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    spec = _encoding_from_args(args.encoding, args.alpha, args.delta, args.d)
    t0 = time.perf_counter()
    reports = run_scope(args.scope, d=args.d or 4, spec=spec, tol=args.tol)
    return _finish(reports, args.out, time.perf_counter() - t0)


def _noises(args) -> list[NoiseSpec]:
    names = ["number_phase", "random_hermitian"] if args.noise == "both" else [args.noise]
    return [NoiseSpec(generator=n, theta=args.theta, seed=args.noise_seed) for n in names]


def cmd_experiment(args) -> int:
    t0 = time.perf_counter()
    name = args.name
    if name == "phase-scaling":
        bad = [e for e in args.eps if not 0 < e <= 0.5]
        if bad:
            raise UsageError(f"epsilon values must lie in (0, 0.5]: {bad}")
        spec = _parse_encoding(args.encoding, args.d_fock if args.encoding == "fock" else args.d)
        report = experiments.phase_scaling(args.eps, args.phi, spec)
    elif name == "dfs":
        if args.encodings:
            specs = [_parse_encoding(e, args.d_fock if e == "fock" else args.d) for e in args.encodings.split(",")]
        else:
            specs = list(experiments.DFS_ENCODINGS)
        report = experiments.dfs(_noises(args), specs, args.epsilon, args.noise_point)
    elif name == "mixed-encoding":
        report = experiments.mixed_encoding(_parse_encoding(args.enc1, args.d), _parse_encoding(args.enc2, args.d),
                                            args.thetas)
    elif name == "init-yield":
        report = experiments.init_yield(args.qubits, args.min_tests, args.seed,
                                        _parse_encoding(args.encoding, args.d_fock if args.encoding == "fock" else args.d))
    else:
        report = experiments.circuit_equivalence(args.count, args.seed, args.epsilon)
    if args.no_plot:
        report.plot = None
    return _finish([report], args.out, time.perf_counter() - t0)


def _resolve_circuit(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("swaplab") / "data" / p.name
    if bundled.is_file():
        return Path(str(bundled))
    raise UsageError(f"circuit file not found: {path}")


def cmd_run(args) -> int:
    path = _resolve_circuit(args.circuit)
    text = path.read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return EXIT_USAGE
    cf = parse_circuit_file(obj)
    circuit = cf.circuit.with_terminal_measurements()
    program = compile_circuit(circuit, cf.layout, cf.epsilon, strict=cf.strict or args.strict, noise=cf.noise)
    result = execute(program, args.shots, args.seed)
    width = max(len(k) for k in result.probabilities) or 1
    print(f"{'outcome':<{max(width, 7)}}  frequency  probability")
    for k in sorted(result.probabilities):
        print(f"{k:<{max(width, 7)}}  {result.frequencies.get(k, 0.0):9.4f}  {result.probabilities[k]:11.6f}")
    print(f"shots={result.shots} seed={result.seed} phase_gate_reps={result.phase_gate_reps}")
    out = args.out or Path(f"{path.stem}.results.json")
    out.write_text(result.dumps() + "\n")
    print(f"results: {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swaplab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("--scope", choices=SCOPES, default="all")
    v.add_argument("--d", type=int, default=None,
                   help="truncation for fock-core/physical suites and for --encoding (default per kind)")
    v.add_argument("--encoding", choices=["fock", "coherent", "cat", "gkp"], default=None)
    v.add_argument("--alpha", type=float, default=None)
    v.add_argument("--delta", type=float, default=None)
    v.add_argument("--tol", type=float, default=None, help="override the suite's base tolerance")
    v.add_argument("--out", type=Path, default=Path("reports"))
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="run a parameter sweep")
    e.add_argument("name", choices=experiments.EXPERIMENTS)
    e.add_argument("--eps", type=_float_list, default=list(experiments.PHASE_SCALING_EPS))
    e.add_argument("--phi", type=float, default=math.pi / 4)
    e.add_argument("--encoding", default="fock", help="e.g. fock, coherent:2.0, gkp:0.35")
    e.add_argument("--encodings", default=None, help="comma list for dfs (default: all four kinds)")
    e.add_argument("--noise", choices=["number_phase", "random_hermitian", "both"], default="both")
    e.add_argument("--theta", type=float, default=0.9)
    e.add_argument("--noise-seed", type=int, default=7)
    e.add_argument("--noise-point", choices=["before", "after"], default="before")
    e.add_argument("--enc1", default="fock")
    e.add_argument("--enc2", default="coherent:2.0")
    e.add_argument("--thetas", type=_float_list, default=[0.3, math.pi / 4, 1.2])
    e.add_argument("--d", type=int, default=14, help="truncation for coherent/cat/gkp (and mixed-encoding)")
    e.add_argument("--d-fock", type=int, default=4)
    e.add_argument("--qubits", type=int, default=1)
    e.add_argument("--min-tests", type=int, default=2000)
    e.add_argument("--count", type=int, default=25)
    e.add_argument("--epsilon", type=float, default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--no-plot", action="store_true")
    e.add_argument("--out", type=Path, default=Path("reports"))
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("run", help="compile and execute a circuit JSON file")
    r.add_argument("circuit", help="path, or the name of a bundled example such as bell_dual.json")
    r.add_argument("--shots", type=int, default=4000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--strict", action="store_true", help="reject non-native two-qubit gates")
    r.add_argument("--out", type=Path, default=None)
    r.set_defaults(func=cmd_run)
    return parser


def _experiment_defaults(args) -> None:
    if getattr(args, "command", None) != "experiment":
        return
    if args.epsilon is None:
        args.epsilon = 0.05 if args.name == "dfs" else 0.01
    if args.seed is None:
        args.seed = 2024 if args.name == "circuit-equivalence" else 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    _experiment_defaults(args)
    try:
        return args.func(args)
    except (UsageError, CircuitSchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DimensionCapError, TruncationError) as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except UnsupportedGateError as exc:
        print(f"error: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
