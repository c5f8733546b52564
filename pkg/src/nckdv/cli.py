"""``nckdv`` command line: verify claims, print hierarchies, sample solitons.

Exit codes: 0 when every selected check passes, 1 when any fails, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import solitonlab as sl
from .chart import DEFAULT_CHART, Chart, run_claim
from .errors import NCKdVError, OutsideOmega, ParseError
from .grammar import parse
from .ncpoly import commutative_normal_form, formal_integrate, substitute, x_derive_n
from .opcalc import hierarchy_rhs

NUMERIC_BASE = ("soliton_meta", "soliton_mirror_meta", "soliton_mkdv", "soliton_amkdv",
                "soliton_pkdv", "soliton_lemmas")


@dataclass
class RunConfig:
    command: str
    claims: list[str] = field(default_factory=lambda: ["all"])
    dim: int = 2
    seed: int = 1
    N: int = 2
    points: int = 10
    tol: float = 1e-8
    format: str = "text"
    csv: str | None = None
    mutate: str | None = None


class UsageError(Exception):
    pass


def numeric_claims(N: int) -> list[str]:
    return list(NUMERIC_BASE) + [f"hier_soliton_E{2 * n - 1}" for n in range(2, N + 1)]


def _chart(cfg: RunConfig) -> Chart:
    if cfg.mutate is None:
        return DEFAULT_CHART
    if cfg.mutate not in DEFAULT_CHART.equations:
        raise UsageError(f"--mutate: unknown equation {cfg.mutate!r}")
    return DEFAULT_CHART.mutated(cfg.mutate)


def _resolve_claims(cfg: RunConfig, chart: Chart) -> list[str]:
    symbolic = chart.claim_ids()
    numeric = numeric_claims(cfg.N)
    known = symbolic + numeric
    if cfg.claims == ["all"]:
        return known
    out = []
    for c in cfg.claims:
        if c == "symbolic":
            out += symbolic
        elif c == "numeric":
            out += numeric
        elif c in known:
            out.append(c)
        else:
            raise UsageError(f"unknown claim {c!r}; choose from: all, symbolic, numeric, "
                             + ", ".join(known))
    return list(dict.fromkeys(out))


def _numeric_reports(cfg: RunConfig, chart: Chart) -> dict[str, sl.NumericReport]:
    if cfg.N < 2:
        raise UsageError("numeric checks need --n >= 2 (the t_3 flow)")
    params = sl.SolitonParams.random(cfg.dim, cfg.seed, cfg.N)
    pts = sl.sample_points(params, cfg.points, cfg.seed)
    _, reports = sl.soliton_suite(params, pts, cfg.tol, chart)
    return {r.claim: r for r in reports}


def cmd_verify(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    chart = _chart(cfg)
    claims = _resolve_claims(cfg, chart)
    numeric = None
    records = []
    for claim in claims:
        if claim in NUMERIC_BASE or claim.startswith("hier_soliton_"):
            if numeric is None:
                numeric = _numeric_reports(cfg, chart)
            records.append(numeric[claim].to_json())
        else:
            records.append(run_claim(claim, chart).to_json())
    records.sort(key=lambda r: claims.index(r["claim"]))
    if cfg.format == "json":
        json.dump(records, out, indent=2)
        out.write("\n")
    else:
        for r in records:
            res = "-" if r["residual"] is None else f"{r['residual']:.3g}"
            extra = f"  witness: {r['witness']}" if r["witness"] else ""
            out.write(f"{r['status'].upper():5s} {r['claim']:22s} residual={res}{extra}\n")
        failed = sum(r["status"] == "fail" for r in records)
        out.write(f"{len(records) - failed}/{len(records)} claims passed\n")
    return 1 if any(r["status"] == "fail" for r in records) else 0


def cmd_hierarchy(eq: str, n: int, fmt: str = "text", out=None) -> int:
    out = out or sys.stdout
    if n < 1:
        raise UsageError("--n must be >= 1")
    poly = hierarchy_rhs(eq, n)
    if fmt == "json":
        json.dump({"equation": eq, "n": n, "rhs": str(poly)}, out)
        out.write("\n")
    else:
        out.write(f"{poly}\n")
    return 0


def _matrix(text: str) -> np.ndarray:
    rows = [[float(v) for v in row.split(",")] for row in text.split(";")]
    return np.array(rows, dtype=float)


def cmd_soliton(cfg: RunConfig, A: str | None = None, B: str | None = None,
                at: list[str] | None = None, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if cfg.points < 1 and not at:
        raise UsageError("--points must be >= 1")
    if cfg.N < 2:
        raise UsageError("--n must be >= 2 (the t_3 flow)")
    chart = _chart(cfg)
    if A is not None or B is not None:
        if A is None or B is None:
            raise UsageError("--A and --B must be given together")
        try:
            params = sl.SolitonParams(_matrix(A), _matrix(B), cfg.N)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        params = sl.SolitonParams.random(cfg.dim, cfg.seed, cfg.N)
    if at:
        pts = []
        for spec in at:
            coords = tuple(float(v) for v in spec.split(","))
            coords += (0.0,) * (params.N - len(coords))
            if len(coords) != params.N:
                raise UsageError(f"--point {spec!r} has more than {params.N} coordinates")
            pts.append(coords)
    else:
        pts = sl.sample_points(params, cfg.points, cfg.seed)
    try:
        rows, reports = sl.soliton_suite(params, pts, cfg.tol, chart)
    except OutsideOmega as exc:
        raise UsageError(str(exc)) from None

    report_stream = out
    if cfg.csv in (None, "-"):
        sl.write_csv(rows, out)
        report_stream = err
    else:
        with open(cfg.csv, "w", newline="", encoding="utf-8") as fh:
            sl.write_csv(rows, fh)
    if cfg.format == "json":
        json.dump([r.to_json() for r in reports], report_stream, indent=2)
        report_stream.write("\n")
    else:
        for r in reports:
            report_stream.write(f"{r.status.upper():5s} {r.claim:22s} max residual={r.max_residual:.3g} "
                                f"(tol {r.tolerance:g}, {r.points} points)\n")
    return 0 if all(r.passed for r in reports) else 1


def cmd_eval(expr: str, dx: int = 0, subst: list[str] | None = None, inverse: list[str] | None = None,
             integrate: bool = False, commutative: bool = False, tex: bool = False, out=None) -> int:
    out = out or sys.stdout
    p = parse(expr)

    def pairs(items):
        binding = {}
        for item in items or []:
            var, sep, rhs = item.partition("=")
            if not sep:
                raise UsageError(f"expected VAR=EXPR, got {item!r}")
            binding[var.strip()] = parse(rhs)
        return binding

    binding, inverses = pairs(subst), pairs(inverse)
    if binding:
        p = substitute(p, binding, inverses)
    p = x_derive_n(p, dx)
    if integrate:
        p = formal_integrate(p)
    if commutative:
        p = commutative_normal_form(p)
    out.write((p.to_tex() if tex else str(p)) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nckdv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def numeric_flags(p, points_default=10):
        p.add_argument("--dim", type=int, default=2, help="matrix size d")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--n", type=int, default=2, dest="N", help="number of hierarchy times N")
        p.add_argument("--points", type=int, default=points_default)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--mutate", metavar="EQ",
                       help="flip the sign of the nonlinear terms of EQ (self-test)")

    v = sub.add_parser("verify", help="run symbolic and numeric claims")
    v.add_argument("--claims", default="all",
                   help="comma-separated claim ids, or all / symbolic / numeric")
    numeric_flags(v)

    h = sub.add_parser("hierarchy", help="print a hierarchy right-hand side")
    h.add_argument("--eq", choices=("meta", "mkdv", "mirror_meta"), default="meta")
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--format", choices=("text", "json"), default="text")

    s = sub.add_parser("soliton", help="sample closed-form solitons and write residuals as CSV")
    numeric_flags(s)
    s.add_argument("--csv", default="-", metavar="PATH", help="CSV destination ('-' = stdout)")
    s.add_argument("--A", help="explicit A, rows separated by ';', entries by ','")
    s.add_argument("--B", help="explicit B, same syntax as --A")
    s.add_argument("--point", action="append", metavar="T1,T3,...",
                   help="explicit sample point (repeatable); missing times default to 0")

    e = sub.add_parser("eval", help="normalize, differentiate, substitute or integrate an expression")
    e.add_argument("expr")
    e.add_argument("--dx", type=int, default=0, help="number of x-derivatives")
    e.add_argument("--subst", action="append", metavar="VAR=EXPR")
    e.add_argument("--inverse", action="append", metavar="VAR=EXPR",
                   help="image of inv(VAR) under --subst")
    e.add_argument("--integrate", action="store_true")
    e.add_argument("--commutative", action="store_true")
    e.add_argument("--tex", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            cfg = RunConfig("verify", [c.strip() for c in args.claims.split(",") if c.strip()],
                            args.dim, args.seed, args.N, args.points, args.tol, args.format,
                            mutate=args.mutate)
            return cmd_verify(cfg)
        if args.command == "hierarchy":
            return cmd_hierarchy(args.eq, args.n, args.format)
        if args.command == "soliton":
            cfg = RunConfig("soliton", [], args.dim, args.seed, args.N, args.points, args.tol,
                            args.format, args.csv, args.mutate)
            return cmd_soliton(cfg, args.A, args.B, args.point)
        return cmd_eval(args.expr, args.dx, args.subst, args.inverse, args.integrate,
                        args.commutative, args.tex)
    except (UsageError, ParseError) as exc:
        parser.error(str(exc))
    except NCKdVError as exc:
        print(f"nckdv: error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
