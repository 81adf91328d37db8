"""Command-line front end: factor, newton, jordan, eigen, similar.

Emits versioned JSON documents (schema "hlt/1") by default; --pretty
prints a human summary instead.  Error classes map to stable exit codes
(see errors.py); 0 is success.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .diffop import DiffOperator, descent_check, eigen, jordan
from .errors import ERROR_CLASSES, HltError, ParseError
from .factor import factor_linear
from .orepoly import OrePoly, newton_polygon, to_text
from .parser import Session, parse_expression
from .scalars import Scalar
from .series import PuiseuxSeries, is_similar

SCHEMA = "hlt/1"


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def scalar_doc(c: Scalar):
    if c.exact:
        return str(c)
    if c.im == 0.0:
        return c.re
    return {"re": c.re, "im": c.im}


def series_doc(s: PuiseuxSeries) -> dict:
    terms = {}
    for k, c in s.terms():
        terms[str(Fraction(k, s.b))] = scalar_doc(c)
    return {
        "b": s.b,
        "terms": terms,
        "precision": None if s.prec is None else str(Fraction(s.prec, s.b)),
        "text": s.to_text(),
    }


def matrix_doc(rows) -> list:
    return [[series_doc(e) for e in row] for row in rows]


def document(command: str, echo: list[str], session: Session, b: int, payload: dict, warnings=None) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "input": echo,
        "backend": session.backend,
        "precision": session.precision,
        "ramification": b,
        "payload": payload,
        "diagnostics": {"warnings": warnings or []},
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_factor(text: str, session: Session) -> dict:
    f = parse_expression(text, session)
    if isinstance(f, PuiseuxSeries):
        raise ParseError("factor expects a polynomial in x")
    if isinstance(f, DiffOperator):
        raise ParseError("factor expects a polynomial, not a matrix")
    lf = factor_linear(f, session.precision // 2)
    fb = f.monic().lift_to_ramification(lf.b)
    residual = lf.product() - fb
    payload = {
        "roots": [series_doc(r) for r in lf.roots],
        "verified_to": None if lf.precision_t is None else str(lf.precision_t),
        "product_matches": residual.is_zero(),
    }
    return document("factor", [text], session, lf.b, payload)


def cmd_newton(text: str, session: Session) -> dict:
    f = parse_expression(text, session)
    if not isinstance(f, OrePoly):
        raise ParseError("newton expects a polynomial in x")
    np_ = newton_polygon(f)
    payload = {
        "vertices": [[x, str(y)] for x, y in np_.vertices],
        "slopes": [{"slope": str(s), "multiplicity": m} for s, m in np_.slopes],
    }
    return document("newton", [text], session, f.der.b, payload)


def cmd_jordan(text: str, session: Session) -> dict:
    d = parse_expression(text, session)
    if not isinstance(d, DiffOperator):
        raise ParseError("jordan expects a matrix [ ... ; ... ]")
    jd = jordan(d, session.precision // 2)
    warnings = []
    descended = None
    if d.b == 1 and jd.b > 1:
        descended = descent_check(jd, d)
        if not descended:
            warnings.append("descent check failed: S or N carries fractional exponents")
    payload = {
        "eigenvalues": [series_doc(e) for e in jd.eigenvalues],
        "nilpotent": [[scalar_doc(c) for c in row] for row in jd.nilpotent],
        "jordan_type": jd.jordan_type(),
        "nilpotent_is_zero": jd.nilpotent_is_zero(),
        "gauge": matrix_doc(jd.gauge.matrix),
        "descent": descended,
    }
    return document("jordan", [text], session, jd.b, payload, warnings)


def cmd_eigen(text: str, session: Session) -> dict:
    d = parse_expression(text, session)
    if not isinstance(d, DiffOperator):
        raise ParseError("eigen expects a matrix [ ... ; ... ]")
    ep = eigen(d, session.precision // 2)
    payload = {
        "eigenvalue": series_doc(ep.eigenvalue),
        "eigenvector": [series_doc(x) for x in ep.vector],
    }
    return document("eigen", [text], session, ep.b, payload)


def cmd_similar(text_a: str, text_b: str, session: Session) -> dict:
    a = parse_expression(text_a, session)
    b = parse_expression(text_b, session)
    for v, t in ((a, text_a), (b, text_b)):
        if not isinstance(v, PuiseuxSeries):
            raise ParseError(f"similar expects series arguments; {t!r} is not one")
    result = is_similar(a, b)
    import math

    ram = math.lcm(a.b, b.b)
    return document("similar", [text_a, text_b], session, ram, {"similar": result})


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _pretty_series(doc: dict) -> str:
    prec = doc["precision"]
    tail = "" if prec is None else f"  + O(t^{prec})"
    return f"{doc['text']}{tail}"


def pretty(doc: dict) -> str:
    cmd = doc["command"]
    p = doc["payload"]
    lines = [f"{cmd} (backend={doc['backend']}, ramification b={doc['ramification']})"]
    if cmd == "factor":
        for i, r in enumerate(p["roots"], 1):
            lines.append(f"  root {i}: {_pretty_series(r)}")
        lines.append(f"  product matches input: {p['product_matches']}")
    elif cmd == "newton":
        lines.append(f"  vertices: {[(v[0], v[1]) for v in p['vertices']]}")
        for s in p["slopes"]:
            lines.append(f"  slope {s['slope']} x{s['multiplicity']}")
    elif cmd == "jordan":
        for i, e in enumerate(p["eigenvalues"], 1):
            lines.append(f"  eigenvalue {i}: {_pretty_series(e)}")
        lines.append(f"  nilpotent part: {p['nilpotent']}")
        lines.append(f"  jordan type: {p['jordan_type']}")
        if p["descent"] is not None:
            lines.append(f"  descends to K: {p['descent']}")
    elif cmd == "eigen":
        lines.append(f"  eigenvalue: {_pretty_series(p['eigenvalue'])}")
        for i, e in enumerate(p["eigenvector"], 1):
            lines.append(f"  v[{i}] = {_pretty_series(e)}")
    elif cmd == "similar":
        lines.append(f"  similar: {p['similar']}")
    for w in doc["diagnostics"]["warnings"]:
        lines.append(f"  warning: {w}")
    return "\n".join(lines)


def _read_arg(text: str) -> str:
    if text == "-":
        return sys.stdin.read()
    return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--prec", type=int, default=48, help="working precision slots (default 48)"
    )
    common.add_argument("--backend", choices=["exact", "float"], default="exact")
    common.add_argument(
        "--derivation-m", type=int, default=1, help="derivation exponent m in t^m d/dt (default 1)"
    )
    out = common.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true", help="JSON output (default)")
    out.add_argument("--pretty", action="store_true", help="human-readable output")
    ap = argparse.ArgumentParser(
        prog="hlt",
        description="Factor differential polynomials and compute Jordan decompositions "
        "of formal differential operators over C((t^(1/b))).",
        epilog="Exit codes: 0 success; "
        + "; ".join(f"{e.exit_code} {e.code}" for e in ERROR_CLASSES)
        + "; 1 internal error.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    p_factor = sub.add_parser(
        "factor", parents=[common], help="linear factorisation of a differential polynomial"
    )
    p_factor.add_argument("poly", help="polynomial in x (or - for stdin)")
    p_newton = sub.add_parser(
        "newton", parents=[common], help="Newton polygon: vertices and slopes"
    )
    p_newton.add_argument("poly", help="polynomial in x (or - for stdin)")
    p_jordan = sub.add_parser("jordan", parents=[common], help="Jordan decomposition of d + A")
    p_jordan.add_argument("matrix", help="matrix [a, b; c, d] (or - for stdin)")
    p_eigen = sub.add_parser(
        "eigen", parents=[common], help="one eigenvalue/eigenvector pair of d + A"
    )
    p_eigen.add_argument("matrix", help="matrix [a, b; c, d] (or - for stdin)")
    p_similar = sub.add_parser(
        "similar", parents=[common], help="similarity of two series (log-derivative shift)"
    )
    p_similar.add_argument("a")
    p_similar.add_argument("b")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    session = Session(
        precision=args.prec, backend=args.backend, derivation_m=args.derivation_m
    )
    try:
        if args.command == "factor":
            doc = cmd_factor(_read_arg(args.poly), session)
        elif args.command == "newton":
            doc = cmd_newton(_read_arg(args.poly), session)
        elif args.command == "jordan":
            doc = cmd_jordan(_read_arg(args.matrix), session)
        elif args.command == "eigen":
            doc = cmd_eigen(_read_arg(args.matrix), session)
        else:
            doc = cmd_similar(_read_arg(args.a), _read_arg(args.b), session)
    except HltError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.pretty:
        print(pretty(doc))
    else:
        print(json.dumps(doc, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
