"""Command-line front end.

    ordop eval EXPR
    ordop check {M|X} OP
    ordop factorize OP [--truncate ORD] [--out FILE]
    ordop verify FILE
    ordop validate OP [--samples N] [--seed S]

Exit status: 0 success or membership, 1 negative verdict or failed check,
2 usage or parse error.  The default truncation bound is read from
ORDOP_TRUNCATE (default w^3).
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from typing import Optional, Sequence

from .ordinal import (OMEGA, OMEGA1, Ordinal, OrdinalError, OrdinalSyntaxError, add, format_ordinal, mul,
                      nat, parse_ordinal, power)
from .operators.analysis import operator_norm, rudin_validate
from .operators.text import operator_to_text, parse_operator

TRUNCATE_ENV = "ORDOP_TRUNCATE"
OK, NEGATIVE, USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# ordinal arithmetic for eval


class _ArithParser:
    """expr := term ('+' term)*,  term := factor ('*' factor)*,  factor := atom ('^' factor)?"""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise OrdinalSyntaxError(msg, self.text, self.pos)

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> Ordinal:
        v = self.expr()
        if self.peek():
            self.error("unexpected trailing input")
        return v

    def expr(self) -> Ordinal:
        v = self.term()
        while self.peek() == "+":
            self.pos += 1
            v = add(v, self.term())
        return v

    def term(self) -> Ordinal:
        v = self.factor()
        while self.peek() == "*":
            self.pos += 1
            v = mul(v, self.factor())
        return v

    def factor(self) -> Ordinal:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            return power(base, self.factor())
        return base

    def atom(self) -> Ordinal:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            v = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return v
        if ch == "w":
            self.pos += 1
            return OMEGA
        if ch == "W":
            self.pos += 1
            return OMEGA1
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return nat(int(self.text[start:self.pos]))
        self.error("expected an ordinal")


def eval_expression(text: str) -> str:
    t = text.strip()
    m = re.fullmatch(r"norm\((.*)\)", t, re.S)
    if m:
        return str(operator_norm(parse_operator(m.group(1))).value)
    try:
        return format_ordinal(_ArithParser(t).parse())
    except OrdinalSyntaxError as first:
        try:
            return operator_to_text(parse_operator(t))
        except OrdinalSyntaxError as second:
            # report whichever reading got further
            raise (second if second.position > first.position else first) from None


# ---------------------------------------------------------------------------
# commands


def _default_truncation() -> Ordinal:
    raw = os.environ.get(TRUNCATE_ENV)
    if not raw:
        from .factorization import DEFAULT_TRUNCATION
        return DEFAULT_TRUNCATION
    try:
        return parse_ordinal(raw)
    except OrdinalSyntaxError as exc:
        raise _UsageError(f"{TRUNCATE_ENV}: {exc}") from None


def cmd_eval(args, out) -> int:
    print(eval_expression(args.expr), file=out)
    return OK


def cmd_check(args, out) -> int:
    from .ideals import in_loy_willis, separable_range
    T = parse_operator(args.op)
    cert = in_loy_willis(T) if args.ideal == "M" else separable_range(T)
    cert.operator = args.op
    print(cert.to_text(), file=out)
    return OK if cert.verdict else NEGATIVE


def _run_factorize(op: str, truncate: Ordinal):
    from .factorization import factorize
    return factorize(parse_operator(op), truncate=truncate, text=op)


def cmd_factorize(args, out) -> int:
    from .factorization import FactorizationError
    truncate = parse_ordinal(args.truncate) if args.truncate else _default_truncation()
    try:
        cert = _run_factorize(args.op, truncate)
    except FactorizationError as exc:
        print(f"factorization failed: {exc}", file=out)
        return NEGATIVE
    text = cert.to_text()
    if cert.mode != "symbolic":
        print(f"warning: verification ran in {cert.mode} mode", file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="", file=out)
    return OK


def _header(text: str, key: str) -> Optional[str]:
    m = re.search(rf"^{key}: (.*)$", text, re.M)
    return m.group(1) if m else None


def cmd_verify(args, out) -> int:
    from .factorization import FactorizationError
    try:
        with open(args.file, encoding="utf-8") as fh:
            recorded = fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    op, trunc = _header(recorded, "operator"), _header(recorded, "truncate")
    if op is None or trunc is None:
        raise _UsageError(f"{args.file} is not a factorization certificate")
    try:
        replayed = _run_factorize(op, parse_ordinal(trunc)).to_text()
    except FactorizationError as exc:
        print(f"replay failed: {exc}", file=out)
        return NEGATIVE
    if replayed != recorded:
        a, b = recorded.splitlines(), replayed.splitlines()
        line = next((i for i, (x, y) in enumerate(zip(a, b)) if x != y), min(len(a), len(b)))
        print(f"transcript differs at line {line + 1}", file=out)
        return NEGATIVE
    print(f"verified: {args.file} replays identically", file=out)
    return OK


def cmd_validate(args, out) -> int:
    rep = rudin_validate(parse_operator(args.op), samples=args.samples, seed=args.seed)
    for line in rep.lines():
        print(line, file=out)
    return OK if rep.ok else NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ordop", description="Operators on C([0, W]) in symbolic form.")
    sub = p.add_subparsers(dest="command", required=True)
    e = sub.add_parser("eval", help="evaluate ordinal arithmetic, norm(OP) or an operator")
    e.add_argument("expr")
    e.set_defaults(fn=cmd_eval)
    c = sub.add_parser("check", help="ideal membership: M (final column continuous) or X (separable range)")
    c.add_argument("ideal", choices=["M", "X"])
    c.add_argument("op")
    c.set_defaults(fn=cmd_check)
    f = sub.add_parser("factorize", help="factor the identity through an operator outside M")
    f.add_argument("op")
    f.add_argument("--truncate", help=f"bound for truncated verification (default ${TRUNCATE_ENV} or w^3)")
    f.add_argument("--out", help="write the certificate to this file")
    f.set_defaults(fn=cmd_factorize)
    v = sub.add_parser("verify", help="replay a certificate file")
    v.add_argument("file")
    v.set_defaults(fn=cmd_verify)
    r = sub.add_parser("validate", help="check the matrix clauses on samples")
    r.add_argument("op")
    r.add_argument("--samples", type=int, default=200)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(fn=cmd_validate)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.fn(args, out)
    except OrdinalSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return USAGE
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (OrdinalError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
