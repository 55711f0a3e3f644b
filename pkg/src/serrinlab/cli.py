"""Command-line entry point: ``serrinlab <command> [options]``.

Exit status: 0 success, 1 usage error, 2 computation failure, 3 I/O failure.
Every command accepts ``--config FILE`` (a JSON object keyed by option name);
flags given on the command line override values from the file.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import sys
from collections.abc import Callable, Iterator, Sequence
from pathlib import Path
from typing import Any, TextIO

import numpy as np

from ._fmt import fmt
from .bifurcation import BracketError, bifurcation_table, write_bifurcation_csv
from .cheeger import cheeger_report, domain_cheeger_report
from .collocation import (
    FourierPerturbation,
    build_grid,
    evaluate_F,
    single_mode,
    solve_dirichlet,
)
from .continuation import (
    ContinuationError,
    continue_branch,
    newton_solve_branch_point,
    verify_overdetermined,
    write_curves_csv,
    write_jsonl,
)
from .modes import eigen_branch_table, write_eigen_csv
from .radial import LAMBDA_MAX, LAMBDA_MIN, ProblemParams, boundary_data, u_radial

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("serrinlab")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- converters


def _int(name: str, lo: int | None = None) -> Callable[[Any], int]:
    def conv(value: Any) -> int:
        try:
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise ValueError
            out = int(float(value))
        except (TypeError, ValueError):
            raise UsageError(f"{name} must be an integer, got {value!r}") from None
        if lo is not None and out < lo:
            raise UsageError(f"{name} must be >= {lo}, got {out}")
        return out

    return conv


def _float(name: str, positive: bool = False) -> Callable[[Any], float]:
    def conv(value: Any) -> float:
        try:
            if isinstance(value, bool):
                raise ValueError
            out = float(value)
        except (TypeError, ValueError):
            raise UsageError(f"{name} must be a number, got {value!r}") from None
        if not math.isfinite(out) or (positive and out <= 0):
            raise UsageError(f"{name} must be {'positive and ' if positive else ''}finite, got {value!r}")
        return out

    return conv


def parse_degrees(value: Any) -> list[float]:
    """``"0..3"`` (inclusive range), ``"0,2,5"`` or a JSON list of degrees."""
    if isinstance(value, (list, tuple)):
        items = list(value)
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        items = [value]
    else:
        text = str(value).strip()
        if ".." in text:
            lo, _, hi = text.partition("..")
            lo_i, hi_i = _int("--k start")(lo), _int("--k stop")(hi)
            if hi_i < lo_i:
                raise UsageError(f"empty degree range {text!r}")
            items = list(range(lo_i, hi_i + 1))
        else:
            items = [x for x in text.split(",") if x.strip()]
    if not items:
        raise UsageError("empty degree list")
    degrees = [_float("--k")(x) for x in items]
    for k in degrees:
        if k < 0:
            raise UsageError(f"degrees must be >= 0, got {k!r}")
    return [int(k) if k == int(k) else k for k in degrees]


def parse_lambda_grid(value: Any) -> list[float]:
    """``start:stop:count`` (inclusive, evenly spaced), a comma list, or a JSON list."""
    if isinstance(value, (list, tuple)):
        grid = [_float("--lambda")(x) for x in value]
    else:
        text = str(value).strip()
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"--lambda expects start:stop:count, got {text!r}")
            start, stop = _float("--lambda start")(parts[0]), _float("--lambda stop")(parts[1])
            count = _int("--lambda count", lo=0)(parts[2])
            grid = [float(x) for x in np.linspace(start, stop, count)] if count else []
        else:
            grid = [_float("--lambda")(x) for x in text.split(",") if x.strip()]
    if not grid:
        raise UsageError("empty lambda grid")
    for lam in grid:
        if not LAMBDA_MIN <= lam <= LAMBDA_MAX:
            raise UsageError(f"lambda {lam!r} outside [{LAMBDA_MIN:g}, 1 - {LAMBDA_MIN:g}]")
    return grid


def parse_amplitudes(value: Any) -> list[float]:
    if isinstance(value, (list, tuple)):
        items = list(value)
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        items = [value]
    else:
        items = [x for x in str(value).split(",") if x.strip()]
    if not items:
        raise UsageError("empty amplitude list")
    amps = [_float("--s")(x) for x in items]
    if len(set(amps)) != len(amps):
        raise UsageError("duplicate amplitudes in --s")
    return amps


def _even_mode(value: Any) -> int:
    m = _int("--mode", lo=2)(value)
    if m % 2:
        raise UsageError(f"--mode must be an even harmonic degree, got {m}")
    return m


def _single_lambda(value: Any) -> float:
    lam = _float("--lambda")(value)
    if not LAMBDA_MIN <= lam <= LAMBDA_MAX:
        raise UsageError(f"lambda {lam!r} outside [{LAMBDA_MIN:g}, 1 - {LAMBDA_MIN:g}]")
    return lam


def _nt(value: Any) -> int:
    nt = _int("--Nt", lo=8)(value)
    if nt % 2:
        raise UsageError(f"--Nt must be even, got {nt}")
    return nt


def _perturbation_spec(value: Any) -> tuple[int, float, float] | None:
    if value is None:
        return None
    parts = list(value) if isinstance(value, (list, tuple)) else str(value).split(",")
    if len(parts) != 3:
        raise UsageError(f"--perturb expects MODE,AMP_INNER,AMP_OUTER, got {value!r}")
    return _int("--perturb mode", lo=0)(parts[0]), _float("amp")(parts[1]), _float("amp")(parts[2])


def _bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    raise UsageError(f"expected true/false, got {value!r}")


def _path_or_none(value: Any) -> str | None:
    return None if value is None else str(value)


# name -> (converter, default) per command; flags and config keys share these names
SCHEMAS: dict[str, dict[str, tuple[Callable[[Any], Any], Any]]] = {
    "eigens": {
        "n": (_int("--n", lo=2), 2),
        "k": (parse_degrees, "0..3"),
        "lambda": (parse_lambda_grid, "0.01:0.99:99"),
        "out": (_path_or_none, None),
    },
    "bifurcations": {
        "n": (_int("--n", lo=2), 2),
        "kmax": (_int("--kmax", lo=1), 10),
        "tol": (_float("--tol", positive=True), 1e-12),
        "out": (_path_or_none, None),
    },
    "branch": {
        "n": (_int("--n", lo=2), 2),
        "mode": (_even_mode, 2),
        "s": (parse_amplitudes, "0.005,0.01,0.02"),
        "Nr": (_int("--Nr", lo=8), 32),
        "Nt": (_nt, 64),
        "J": (_int("--J", lo=1), 8),
        "tol": (_float("--tol", positive=True), 1e-8),
        "out_dir": (str, "branch_out"),
    },
    "validate": {
        "quick": (_bool, False),
        "out": (_path_or_none, None),
    },
    "cheeger": {
        "lambda": (_single_lambda, 0.5),
        "mode": (_even_mode, None),
        "s": (_float("--s"), None),
        "Nr": (_int("--Nr", lo=8), 32),
        "Nt": (_nt, 64),
        "J": (_int("--J", lo=1), 8),
        "tol": (_float("--tol", positive=True), 1e-8),
        "out": (_path_or_none, None),
    },
    "solve": {
        "lambda": (_single_lambda, 0.5),
        "Nr": (_int("--Nr", lo=8), 32),
        "Nt": (_nt, 64),
        "perturb": (_perturbation_spec, None),
        "out": (_path_or_none, None),
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="serrinlab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sup = argparse.SUPPRESS

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="JSON file with option values")
        return p

    p = command("eigens", "eigenvalue branches mu_{k,j}(lambda) as CSV")
    p.add_argument("--n", default=sup, help="dimension (default 2)")
    p.add_argument("--k", default=sup, help="degrees: 'a..b' or comma list (default 0..3)")
    p.add_argument("--lambda", dest="lambda", default=sup, help="start:stop:count (default 0.01:0.99:99)")
    p.add_argument("--out", default=sup, help="output CSV (default stdout)")

    p = command("bifurcations", "bifurcation radii for the invariant modes as CSV")
    p.add_argument("--n", default=sup)
    p.add_argument("--kmax", default=sup, help="number of invariant modes (default 10)")
    p.add_argument("--tol", default=sup, help="bisection tolerance (default 1e-12)")
    p.add_argument("--out", default=sup)

    p = command("branch", "continue the bifurcating branch (n = 2)")
    p.add_argument("--n", default=sup, help="dimension; only 2 is supported")
    p.add_argument("--mode", default=sup, help="even harmonic degree of the branch (default 2)")
    p.add_argument("--s", default=sup, help="comma-separated amplitudes (default 0.005,0.01,0.02)")
    p.add_argument("--Nr", default=sup)
    p.add_argument("--Nt", default=sup)
    p.add_argument("--J", default=sup, help="retained cosine modes of the correction (default 8)")
    p.add_argument("--tol", default=sup, help="Newton tolerance on sup|F| (default 1e-8)")
    p.add_argument("--out-dir", dest="out_dir", default=sup)

    p = command("validate", "run the invariant suite and print a JSON summary")
    p.add_argument("--quick", action="store_const", const=True, default=sup)
    p.add_argument("--out", default=sup)

    p = command("cheeger", "perimeter/area report for an annulus or a branch point")
    p.add_argument("--lambda", dest="lambda", default=sup, help="annulus inner radius (default 0.5)")
    p.add_argument("--mode", default=sup, help="with --s: audit the branch point instead")
    p.add_argument("--s", default=sup)
    p.add_argument("--Nr", default=sup)
    p.add_argument("--Nt", default=sup)
    p.add_argument("--J", default=sup)
    p.add_argument("--tol", default=sup)
    p.add_argument("--out", default=sup)

    p = command("solve", "solve the Dirichlet problem on a (perturbed) annulus")
    p.add_argument("--lambda", dest="lambda", default=sup)
    p.add_argument("--Nr", default=sup)
    p.add_argument("--Nt", default=sup)
    p.add_argument("--perturb", default=sup, help="MODE,AMP_INNER,AMP_OUTER")
    p.add_argument("--out", default=sup)
    return parser


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return data


def resolve_config(command: str, file_values: dict, flag_values: dict) -> dict:
    """Defaults, then the config file, then flags; every value is converted and checked."""
    schema = SCHEMAS[command]
    unknown = sorted(set(file_values) - set(schema))
    if unknown:
        raise UsageError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    merged = {name: default for name, (_, default) in schema.items()}
    merged.update(file_values)
    merged.update(flag_values)
    out = {}
    for name, (conv, default) in schema.items():
        value = merged[name]
        out[name] = None if value is None and default is None else conv(value)
    return out


@contextlib.contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    try:
        stream = open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    with stream:
        yield stream


def _dump_json(obj: Any, stream: TextIO) -> None:
    stream.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- commands


def cmd_eigens(cfg: dict) -> int:
    rows = eigen_branch_table(cfg["n"], cfg["k"], cfg["lambda"])
    with _output(cfg["out"]) as stream:
        write_eigen_csv(rows, stream)
    return EXIT_OK


def cmd_bifurcations(cfg: dict) -> int:
    rows = bifurcation_table(cfg["n"], cfg["kmax"], cfg["tol"])
    with _output(cfg["out"]) as stream:
        write_bifurcation_csv(cfg["n"], rows, stream)
    return EXIT_OK


def _branch_record(point) -> dict:
    rec = point.to_record()
    rec["overdetermined"] = verify_overdetermined(point).as_dict()
    rec["cheeger"] = cheeger_report(point).as_dict()
    return rec


def cmd_branch(cfg: dict) -> int:
    if cfg["n"] != 2:
        raise UsageError("branch continuation is implemented for --n 2 only")
    out_dir = Path(cfg["out_dir"])
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out_dir}: {exc.strerror or exc}") from exc
    result = continue_branch(cfg["mode"], cfg["s"], cfg["Nr"], cfg["Nt"], cfg["J"], cfg["tol"])
    records = [_branch_record(p) for p in result.points]
    with _output(str(out_dir / "branch.jsonl")) as stream:
        write_jsonl(records, stream)
    for idx, point in enumerate(result.points):
        with _output(str(out_dir / f"curves_{idx:02d}.csv")) as stream:
            write_curves_csv(point, stream)
    for idx, point in enumerate(result.points):
        log.info("point %d: s=%s lambda=%s sup|F|=%.3e", idx, fmt(point.s), fmt(point.lambda_s), point.residual_sup)
    if not result.complete:
        print(f"serrinlab branch: {result.error}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def cmd_validate(cfg: dict) -> int:
    from .validation import observations, run_checks

    points: list = []
    results = run_checks(quick=cfg["quick"], branch_sink=points)
    failed = [r.name for r in results if not r.passed]
    summary = {
        "passed": not failed,
        "failed": failed,
        "checks": [r.as_dict() for r in results],
        "observations": observations(points),
    }
    with _output(cfg["out"]) as stream:
        _dump_json(summary, stream)
    return EXIT_OK if not failed else EXIT_COMPUTE


def cmd_cheeger(cfg: dict) -> int:
    if (cfg["mode"] is None) != (cfg["s"] is None):
        raise UsageError("--mode and --s must be given together")
    if cfg["mode"] is None:
        lam = cfg["lambda"]
        a, _ = boundary_data(ProblemParams(2, lam))
        report = domain_cheeger_report(lam, None, a, cfg["Nr"], cfg["Nt"])
        payload = {"lambda": fmt(lam), **report.as_dict()}
    else:
        point = newton_solve_branch_point(
            cfg["mode"], cfg["s"], Nr=cfg["Nr"], Nt=cfg["Nt"], J=cfg["J"], tol=cfg["tol"]
        )
        payload = {"s": fmt(point.s), "lambda": fmt(point.lambda_s), **cheeger_report(point).as_dict()}
    with _output(cfg["out"]) as stream:
        _dump_json(payload, stream)
    return EXIT_OK


def cmd_solve(cfg: dict) -> int:
    lam = cfg["lambda"]
    params = ProblemParams(2, lam)
    a, c = boundary_data(params)
    spec = cfg["perturb"]
    pert = single_mode(*spec) if spec is not None else FourierPerturbation.zero()
    try:
        pert.check_admissible(lam)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sol = solve_dirichlet(build_grid(lam, pert, cfg["Nr"], cfg["Nt"]), a)
    f1, f2 = evaluate_F(lam, pert, cfg["Nr"], cfg["Nt"])
    payload = {
        "lambda": fmt(lam),
        "a": fmt(a),
        "c_lambda": fmt(c),
        "collocation_residual": fmt(sol.residual),
        "inner_trace_mean": fmt(np.mean(sol.inner.values)),
        "outer_trace_mean": fmt(np.mean(sol.outer.values)),
        "F_sup": fmt(max(np.max(np.abs(f1.values)), np.max(np.abs(f2.values)))),
        "u_min_interior": fmt(np.min(sol.u[1:-1])),
    }
    if spec is None:
        exact = np.vectorize(lambda r: u_radial(params, min(max(r, lam), 1.0)))(sol.grid.r)
        payload["radial_error"] = fmt(np.max(np.abs(sol.u - exact)))
    with _output(cfg["out"]) as stream:
        _dump_json(payload, stream)
    return EXIT_OK


COMMANDS = {
    "eigens": cmd_eigens,
    "bifurcations": cmd_bifurcations,
    "branch": cmd_branch,
    "validate": cmd_validate,
    "cheeger": cmd_cheeger,
    "solve": cmd_solve,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = vars(parser.parse_args(argv))
        command = args.pop("command")
        if command is None:
            raise UsageError("serrinlab: a command is required (try --help)")
        logging.basicConfig(
            level=logging.INFO if args.pop("verbose") else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        cfg = resolve_config(command, _read_config(args.pop("config")), args)
        return COMMANDS[command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ContinuationError, BracketError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
