"""Command-line front end.

Exit codes: 0 success, 2 invalid state file or arguments, 3 functional domain
error, 4 I/O failure (unreadable input, unwritable output), 5 invalid
bisection bracket or non-monotone detection.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional

from . import analysis
from .analysis import Region, Verdict
from .errors import BracketInvalid, MonotonicityViolation, QCertError
from .functionals import FunctionalSpec, Kind
from .gausspoly import (
    Distribution,
    build_fock_superposition,
    build_fock_wigner,
    build_gaussian,
    mix,
    squeezed_widths,
)

EXIT_OK, EXIT_STATE, EXIT_DOMAIN, EXIT_IO, EXIT_BRACKET = 0, 2, 3, 4, 5
WEIGHT_TOL = 1e-9


class StateSpecError(Exception):
    pass


class _IOFailure(Exception):
    pass


# ------------------------------------------------------------ state files

def _num(entry: dict, key: str, where: str, default=None) -> float:
    if key not in entry:
        if default is not None:
            return default
        raise StateSpecError(f"{where}.{key}: missing required field")
    v = entry[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise StateSpecError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def _build_part(entry, where: str) -> tuple[Distribution, bool]:
    if not isinstance(entry, dict):
        raise StateSpecError(f"{where}: expected an object")
    kind = entry.get("kind")
    known = {"fock", "gaussian", "superposition", "border"}
    if kind not in known:
        raise StateSpecError(f"{where}.kind: expected one of {sorted(known)}, got {kind!r}")
    try:
        if kind == "fock":
            n = entry.get("n")
            if isinstance(n, bool) or not isinstance(n, int) or n < 0:
                raise StateSpecError(f"{where}.n: expected a nonnegative integer, got {n!r}")
            return build_fock_wigner(n, _num(entry, "x0", where, 0.0),
                                     _num(entry, "p0", where, 0.0)), False
        if kind == "gaussian":
            if "zeta" in entry:
                sx, sp = squeezed_widths(_num(entry, "zeta", where),
                                         _num(entry, "nu", where, 1.0))
            else:
                sx, sp = _num(entry, "sx", where), _num(entry, "sp", where)
            return build_gaussian(sx, sp, _num(entry, "x0", where, 0.0),
                                  _num(entry, "p0", where, 0.0)), False
        if kind == "superposition":
            raw = entry.get("coeffs")
            if not isinstance(raw, list) or not raw:
                raise StateSpecError(f"{where}.coeffs: expected a non-empty list")
            coeffs = []
            for i, c in enumerate(raw):
                if isinstance(c, list) and len(c) == 2 and all(
                        isinstance(v, (int, float)) and not isinstance(v, bool) for v in c):
                    coeffs.append(complex(c[0], c[1]))
                elif isinstance(c, (int, float)) and not isinstance(c, bool):
                    coeffs.append(complex(c))
                else:
                    raise StateSpecError(f"{where}.coeffs[{i}]: expected [re, im], got {c!r}")
            norm = math.sqrt(sum(abs(c) ** 2 for c in coeffs))
            if abs(norm**2 - 1.0) > WEIGHT_TOL:
                raise StateSpecError(f"{where}.coeffs: sum |c|^2 = {norm**2!r}, expected 1")
            coeffs = [c / norm for c in coeffs]
            return build_fock_superposition(coeffs, _num(entry, "x0", where, 0.0),
                                            _num(entry, "p0", where, 0.0)), False
        return analysis.build_border_family(_num(entry, "w1", where),
                                            _num(entry, "s", where, analysis.BORDER_S)), True
    except QCertError as exc:
        raise StateSpecError(f"{where}: {exc}") from exc


def parse_state_spec(text: str) -> tuple[Distribution, bool]:
    """Build the mixture described by a state-spec document.

    Returns the distribution and whether it contains a border-family entry.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateSpecError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("parts"), list) or not doc["parts"]:
        raise StateSpecError("parts: expected a non-empty list at top level")
    built, weights, border = [], [], False
    for i, entry in enumerate(doc["parts"]):
        where = f"parts[{i}]"
        d, is_border = _build_part(entry, where)
        w = _num(entry, "weight", where, 1.0 if len(doc["parts"]) == 1 else None)
        if not 0.0 <= w <= 1.0:
            raise StateSpecError(f"{where}.weight: {w!r} outside [0, 1]")
        built.append(d)
        weights.append(w)
        border = border or is_border
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise StateSpecError(f"parts[*].weight: weights sum to {total!r}, expected 1")
    return mix([(d, w / total) for d, w in zip(built, weights)]), border


def load_state(path: str) -> tuple[Distribution, bool]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _IOFailure(f"{path}: cannot read state file ({exc.strerror})") from exc
    return parse_state_spec(text)


# ------------------------------------------------------------ arguments

def parse_region(text: Optional[str], border: bool) -> Region:
    if text is None:
        return Region.default(border)
    try:
        xs, ps = text.split(",")
        x0, x1, nx = xs.split(":")
        p0, p1, np_ = ps.split(":")
        return Region(float(x0), float(x1), float(p0), float(p1), int(nx), int(np_))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"--region expects xMin:xMax:n,pMin:pMax:n, got {text!r}") from exc


def parse_scan(text: str) -> list[float]:
    try:
        lo, hi, n = text.split(":")
        return analysis.default_dTs(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--dT-scan expects lo:hi:n, got {text!r}") from exc


def _functional_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--functional", choices=[k.value for k in Kind], default="xi")
    p.add_argument("--T", type=float, default=1.0, help="smearing level (1 = Wigner)")
    p.add_argument("--dT", type=float, default=None, help="extra smearing for bigs")
    p.add_argument("--k", type=float, default=None, help="split parameter for xik")


def _spec_from_args(args, state: Distribution, dT: Optional[float] = None) -> FunctionalSpec:
    kind = Kind(args.functional)
    dT = args.dT if dT is None else dT
    if kind is Kind.BIGS and dT is None:
        raise QCertError("--functional bigs needs --dT (or --dT-scan where supported)")
    if kind is Kind.XIK and args.k is None:
        raise QCertError("--functional xik needs --k")
    return FunctionalSpec(kind, state, args.T, dT, args.k)


def fmt(v: float) -> str:
    return format(float(v), ".16e")


# ------------------------------------------------------------ commands

def write_grid(path: str, fmt_name: str, xs, ps, values, meta: dict) -> None:
    try:
        with open(path, "w", newline="") as fh:
            if fmt_name == "csv":
                fh.write("x,p,value\n")
                for i, x in enumerate(xs):
                    sx = fmt(x)
                    for j, p in enumerate(ps):
                        fh.write(f"{sx},{fmt(p)},{fmt(values[i, j])}\n")
            else:
                doc = {"meta": meta, "x": [float(v) for v in xs], "p": [float(v) for v in ps],
                       "values": [[float(v) for v in row] for row in values]}
                json.dump(doc, fh, indent=1)
                fh.write("\n")
    except OSError as exc:
        raise _IOFailure(f"{path}: {exc.strerror}") from exc


def cmd_grid(args) -> int:
    state, border = load_state(args.state)
    region = parse_region(args.region, border)
    spec = _spec_from_args(args, state)
    xs, ps, values = analysis.sample_grid(spec, region)
    meta = {**spec.describe(), "region": region.to_dict()}
    write_grid(args.out, args.format, xs, ps, values, meta)
    return EXIT_OK


def cmd_min(args) -> int:
    state, border = load_state(args.state)
    region = parse_region(args.region, border)
    out: dict = {}
    if args.dT_scan is not None:
        if Kind(args.functional) is not Kind.BIGS:
            raise QCertError("--dT-scan applies to --functional bigs only")
        entries = analysis.scan_delta_t(state, args.T, args.dT_scan, region)
        best = analysis.best_scan_entry(entries)
        if best is None:
            raise QCertError("no dT in the scan satisfies the power-domain rule")
        spec = _spec_from_args(args, state, best.dT)
        res = best.result
        out["scan"] = [{"dT": e.dT, "value": e.result.value if e.valid else None,
                        "error": e.error} for e in entries]
    else:
        spec = _spec_from_args(args, state)
        res = analysis.minimize_functional(spec, region)
    negative = res.value < -args.tol
    out = {**spec.describe(), **res.to_dict(),
           "verdict": (Verdict.NEGATIVE_FOUND if negative
                       else Verdict.NOT_FOUND_AT_RESOLUTION).value,
           "witness": res.to_dict()["argmin"] if negative else None,
           "witness_value": float(spec(*res.argmin)) if negative else None,
           "tol": args.tol, "region": region.to_dict(), **out}
    print(json.dumps(out))
    return EXIT_OK


def cmd_threshold(args) -> int:
    region = parse_region(args.region, True)
    kind = Kind(args.functional)
    if kind is Kind.BIGS and args.dT is None and args.dT_scan is None:
        raise QCertError("--functional bigs needs --dT or --dT-scan")
    if kind is Kind.XIK and args.k is None:
        raise QCertError("--functional xik needs --k")
    detect = analysis.border_detector(kind, args.T, dT=args.dT, dTs=args.dT_scan, k=args.k,
                                      s=args.s, region=region, tol=args.tol)
    res = analysis.weight_threshold(detect, args.w_lo, args.w_hi, args.tol_w)
    print(json.dumps({"w_star": res.w_star, **{k: v for k, v in res.to_dict().items()
                                                 if k != "w_star"},
                      "functional": kind.value, "T": args.T, "s": args.s}))
    return EXIT_OK


_PLOT_TEMPLATE = """\
# gnuplot script generated by qcert plot-script
# grid: {path}
set datafile separator ","
set xlabel "x"
set ylabel "p"
set zlabel "value"
set xyplane at 0
set isosamples 2, 2
set key top left
{data}
splot for [i=0:{last}] {source} every ::(i*{np_})::(i*{np_}+{np_}-1) {skip}using 1:2:3 \\
      with lines lc rgb "red" notitle, \\
      0 with lines lc rgb "green" title "zero level"
"""


def cmd_plot_script(args) -> int:
    grid = Path(args.grid)
    try:
        text = grid.read_text()
    except OSError as exc:
        raise _IOFailure(f"{grid}: {exc.strerror}") from exc
    quoted = json.dumps(str(grid))
    if grid.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            xs, ps, vals = doc["x"], doc["p"], doc["values"]
        except (ValueError, KeyError) as exc:
            raise _IOFailure(f"{grid}: not a grid file") from exc
        rows = "\n".join(f"{fmt(x)},{fmt(p)},{fmt(vals[i][j])}"
                         for i, x in enumerate(xs) for j, p in enumerate(ps))
        data, source, skip = f"$grid << EOD\n{rows}\nEOD", "$grid", ""
        nx, np_ = len(xs), len(ps)
    else:
        lines = text.splitlines()
        if not lines or lines[0].strip() != "x,p,value":
            raise _IOFailure(f"{grid}: missing 'x,p,value' header")
        xs_seen = []
        for line in lines[1:]:
            x = line.split(",", 1)[0]
            if not xs_seen or xs_seen[-1] != x:
                xs_seen.append(x)
        nx = len(xs_seen)
        np_ = (len(lines) - 1) // max(nx, 1)
        data, source, skip = "", quoted, "skip 1 "
    script = _PLOT_TEMPLATE.format(path=grid, data=data, source=source, skip=skip, last=nx - 1, np_=np_)
    try:
        Path(args.out).write_text(script)
    except OSError as exc:
        raise _IOFailure(f"{args.out}: {exc.strerror}") from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("grid", help="evaluate a functional on a phase-space grid")
    g.add_argument("state")
    _functional_args(g)
    g.add_argument("--region")
    g.add_argument("--out", required=True)
    g.add_argument("--format", choices=["csv", "json"], default="csv")
    g.set_defaults(func=cmd_grid)

    m = sub.add_parser("min", help="global minimum and negativity verdict")
    m.add_argument("state")
    _functional_args(m)
    m.add_argument("--dT-scan", dest="dT_scan", type=parse_scan, default=None)
    m.add_argument("--region")
    m.add_argument("--tol", type=float, default=analysis.DETECTION_TOL)
    m.set_defaults(func=cmd_min)

    t = sub.add_parser("threshold", help="bisect the detection threshold in w1")
    t.add_argument("--family", choices=["border"], default="border")
    t.add_argument("--s", type=float, default=analysis.BORDER_S)
    _functional_args(t)
    t.add_argument("--dT-scan", dest="dT_scan", type=parse_scan, default=None)
    t.add_argument("--w-lo", dest="w_lo", type=float, required=True)
    t.add_argument("--w-hi", dest="w_hi", type=float, required=True)
    t.add_argument("--tol-w", dest="tol_w", type=float, default=1e-4)
    t.add_argument("--region")
    t.add_argument("--tol", type=float, default=analysis.DETECTION_TOL)
    t.set_defaults(func=cmd_threshold)

    s = sub.add_parser("plot-script", help="write a gnuplot script for a grid file")
    s.add_argument("grid")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_plot_script)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except StateSpecError as exc:
        print(f"qcert: invalid state file: {exc}", file=sys.stderr)
        return EXIT_STATE
    except argparse.ArgumentTypeError as exc:
        print(f"qcert: {exc}", file=sys.stderr)
        return EXIT_STATE
    except _IOFailure as exc:
        print(f"qcert: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (BracketInvalid, MonotonicityViolation) as exc:
        print(f"qcert: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except QCertError as exc:
        print(f"qcert: domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
