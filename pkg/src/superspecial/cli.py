"""Command-line interface: ``superspecial <command> ...``.

Exit codes: 0 success, 1 check violation / verification failure / no
result, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from sympy import isprime

from . import cm_uniformization as cm
from . import quadratic_arith as qa
from . import reduction_checks as rc
from . import superspecial_search as ss
from .polys import PolyParseError, format_poly

log = logging.getLogger("superspecial")

ANCHORS = {-3: "t = oo, j = oo", -4: "t = 1, j = 0", -24: "t = 0, j = -16/27"}


class UsageError(Exception):
    pass


@dataclass
class Config:
    precision: int = 50
    l_max: int = ss.L_MAX
    height_cap: int = cm.HEIGHT_CAP
    table_path: str | None = None
    emit_json: bool = False

    def validate(self):
        if self.precision < 30:
            raise UsageError("--prec must be at least 30")
        if self.l_max < 24:
            raise UsageError("--l-max must be at least 24")
        if self.height_cap < 1:
            raise UsageError("--height-cap must be positive")


def _emit(cfg: Config, payload: dict, text: str):
    if cfg.emit_json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _discriminant(s: str) -> int:
    try:
        D = int(s)
    except ValueError:
        raise UsageError(f"malformed discriminant {s!r}")
    if D >= 0 or D % 4 not in (0, 1):
        raise UsageError(f"{D} is not a negative discriminant (D < 0, D = 0 or 1 mod 4)")
    return D


# --------------------------------------------------------------------------
# Commands.
# --------------------------------------------------------------------------

def cmd_classdata(args, cfg: Config) -> int:
    D = _discriminant(args.D)
    data = qa.quad_order_data(D)
    fam = qa.family_of(D)
    payload = {"D": D, "h": data.h, "s": data.s, "W2_size": data.w2_size, "h_prime": str(data.h_prime),
               "conductor": data.conductor, "fundamental_disc": data.fundamental_disc,
               "eichler_2": data.eichler_2, "eichler_3": data.eichler_3}
    lines = [f"D = {D}: h = {data.h}, s = {data.s}, #W'' = {data.w2_size}, h' = {data.h_prime}"]
    code = 0
    if D in ANCHORS:
        payload["notice"] = f"elliptic point ({ANCHORS[D]}); excluded from the P_D families"
        lines.append("notice: " + payload["notice"])
    elif data.s == 0:
        payload["notice"] = "no CM points on E_6 (s = 0)"
        lines.append("notice: " + payload["notice"])
    if data.h_prime_integral and data.s:
        payload["parity"] = "odd" if int(data.h_prime) % 2 else "even"
        lines.append(f"parity of h': {payload['parity']}")
    if fam is not None:
        verdict = qa.parity_check(*fam)
        payload["family"] = verdict
        lines.append(f"table row {verdict['row']}: {verdict['status']}")
        for p in verdict["problems"]:
            lines.append(f"  {p}")
        code = 0 if verdict["status"] == "consistent" else 1
    _emit(cfg, payload, "\n".join(lines))
    return code


def _get_poly(D, cfg: Config, use_table=True):
    if use_table:
        return cm.get_heegner_poly(D, cfg.precision, use_table=True)
    return cm.heegner_poly(D, cfg.precision, cfg.height_cap)


def cmd_cmpoly(args, cfg: Config) -> int:
    D = _discriminant(args.D)
    try:
        P = _get_poly(D, cfg, use_table=not args.no_table)
    except (ValueError, cm.UniformizationError) as exc:
        _emit(cfg, {"D": D, "error": str(exc)}, f"error: {exc}")
        return 1
    payload = {"D": D, "b": str(P.b), "coeffs": [str(c) for c in P.coeffs], "degree": P.degree,
               "precision": P.precision}
    _emit(cfg, payload, f"P_{D}(x) = {format_poly(P.coeffs)}\n(degree {P.degree}, b = {P.b})")
    return 0


def cmd_checks(args, cfg: Config) -> int:
    D = _discriminant(args.D)
    try:
        P = _get_poly(D, cfg)
        rep = rc.run_checks(P)
    except (ValueError, cm.UniformizationError) as exc:
        _emit(cfg, {"D": D, "error": str(exc)}, f"error: {exc}")
        return 1
    rows = [r.as_dict() for r in rep.rows]
    width = max(len(r.name) for r in rep.rows)
    lines = [f"D = {D}, table row {qa.FAMILY_ROWS[rep.family]}, l = {rep.l}"]
    for r in rep.rows:
        lines.append(f"{r.name:<{width}}  expected {r.expected:<12} observed {r.observed:<22} {'ok' if r.ok else 'VIOLATION'}")
    _emit(cfg, {"D": D, "family": rep.family, "l": rep.l, "ok": rep.ok, "rows": rows}, "\n".join(lines))
    return 0 if rep.ok else 1


def _moduli(args) -> ss.ModuliInput:
    try:
        return ss.parse_moduli(args.minpoly, args.degree_mult)
    except PolyParseError as exc:
        raise UsageError(f"cannot parse --minpoly: {exc}")


def cmd_find(args, cfg: Config) -> int:
    try:
        inp = _moduli(args)
    except ss.HypothesisError as exc:
        _emit(cfg, {"error": str(exc)}, f"error: {exc}")
        return 1
    sc = ss.SearchConfig(l_max=cfg.l_max, precision=max(cfg.precision, 60), force_case=args.case,
                         exclude=tuple(args.exclude or ()))
    try:
        cert = ss.find_superspecial(inp, sc, log=log.info)
    except ss.SearchExhausted as exc:
        _emit(cfg, {"error": str(exc), "stats": exc.stats}, f"search exhausted: {exc}\n{exc.stats}")
        return 1
    except (ss.HypothesisError, ss.DegenerateError) as exc:
        _emit(cfg, {"error": str(exc)}, f"error: {exc}")
        return 1
    Path(args.out).write_text(cert.to_json() + "\n")
    payload = {"certificate": args.out, "case": cert.case, "D": cert.D, "l": cert.l, "p": cert.p}
    _emit(cfg, payload, f"case {cert.case}: D = {cert.D}, l = {cert.l}, p = {cert.p}\nwrote {args.out}")
    return 0


def cmd_verify(args, cfg: Config) -> int:
    try:
        body = json.loads(Path(args.path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read certificate: {exc}")
    inp = _moduli(args) if args.minpoly else None
    res = ss.verify_certificate(body, inp, precision=max(cfg.precision, 60))
    text = "pass" if res.ok else "fail\n" + "\n".join(f"  {r}" for r in res.reasons)
    _emit(cfg, res.as_dict(), text)
    return 0 if res.ok else 1


def cmd_equidist(args, cfg: Config) -> int:
    pairs, disc = qa.equidist_diagnostic(args.bound, args.grid)
    units = {m: qa.fundamental_unit(m) for m in (2, 3, 6)}
    payload = {"bound": args.bound, "primes": len(pairs), "star_discrepancy": disc,
               "units": {str(m): list(u) for m, u in units.items()}}
    lines = ["fundamental units: " + ", ".join(f"{a}+{b}*sqrt({m})" for m, (a, b) in units.items()),
             f"{len(pairs)} split primes below {args.bound}, star discrepancy {disc:.5f}"]
    _emit(cfg, payload, "\n".join(lines))
    return 0


def family_discriminants(l_bound: int) -> list[int]:
    out = []
    for name, (res, fn, _, _) in qa.FAMILIES.items():
        out.extend(fn(l) for l in range(5, l_bound) if l % 24 == res and isprime(l))
    return sorted(out, reverse=True)


def cmd_regen_table(args, cfg: Config) -> int:
    Ds = [_discriminant(d) for d in args.D] if args.D else family_discriminants(args.l_bound)
    out = args.out or str(cm.table_path())
    recs = cm.regenerate_table(Ds, cfg.precision, out, cfg.height_cap)
    bad = [r for r in recs if r.get("status") != "ok"]
    _emit(cfg, {"path": out, "written": len(recs), "failed": [r["D"] for r in bad]},
          f"wrote {len(recs)} records to {out} ({len(bad)} failed)")
    return 0 if not bad else 1


# --------------------------------------------------------------------------
# Parser.
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--prec", type=int, default=50, help="working precision in decimal digits")
    common.add_argument("--height-cap", type=int, default=cm.HEIGHT_CAP)
    common.add_argument("--table", default=None, help="Heegner table path (overrides $%s)" % cm.TABLE_ENV)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="superspecial", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("classdata", parents=[common], help="class number data for O_D")
    a.add_argument("D")
    a.set_defaults(func=cmd_classdata)

    a = sub.add_parser("cmpoly", parents=[common], help="Heegner polynomial P_D")
    a.add_argument("D")
    a.add_argument("--no-table", action="store_true", help="always recompute")
    a.set_defaults(func=cmd_cmpoly)

    a = sub.add_parser("checks", parents=[common], help="structural checks on P_D")
    a.add_argument("D")
    a.set_defaults(func=cmd_checks)

    for name, fn in (("find", cmd_find), ("verify", cmd_verify)):
        a = sub.add_parser(name, parents=[common])
        if name == "verify":
            a.add_argument("path")
            a.add_argument("--minpoly", default=None, help="check the certificate is for this j0")
        else:
            a.add_argument("--minpoly", required=True, help='minimal polynomial of j0, e.g. "x^2 - 2"')
            a.add_argument("--case", type=int, choices=(1, 2, 3), default=None)
            a.add_argument("--l-max", type=int, default=ss.L_MAX)
            a.add_argument("--exclude", type=int, nargs="*", help="primes p to skip")
            a.add_argument("--out", default="certificate.json")
        a.add_argument("--degree-mult", type=int, default=1, help="e = [L : Q(j0)]")
        a.set_defaults(func=fn)

    a = sub.add_parser("equidist", parents=[common], help="unit-log equidistribution diagnostic")
    a.add_argument("--bound", type=int, default=10**4)
    a.add_argument("--grid", type=int, default=64)
    a.set_defaults(func=cmd_equidist)

    a = sub.add_parser("regen-table", parents=[common], help="recompute the Heegner table")
    a.add_argument("D", nargs="*")
    a.add_argument("--l-bound", type=int, default=200, help="family discriminants with l below this")
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_regen_table)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.table:
        os.environ[cm.TABLE_ENV] = args.table
    cfg = Config(precision=args.prec, l_max=getattr(args, "l_max", ss.L_MAX),
                 height_cap=args.height_cap, table_path=args.table, emit_json=args.json)
    try:
        cfg.validate()
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
