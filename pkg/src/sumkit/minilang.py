"""Tiny text notation for sequences, weights, matrices, and schedules.

Everything the command line accepts is parsed here, with exact rational
semantics: decimal literals become fractions, and every spec has a
canonical reprint that parses back to the same object.

Arithmetic expressions use the variables ``n`` (row / position) and ``k``
(column) with ``+ - * / ^`` and parentheses; ``^`` takes an integer
exponent.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import LazySequence, TruncationSchedule, alternating, harmonic, ones, zeros
from .errors import SpecParseError
from .operators import (TriangleKind, TriangleOperator, cesaro_matrix,
                        difference_matrix, euler_matrix, identity_matrix,
                        riesz_matrix, taylor_matrix)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[()+\-*/^]))")


class _ExprParser:
    """Recursive-descent parser producing a closure over an env dict."""

    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.variables = tuple(variables)
        self.tokens = self._scan(text)
        self.pos = 0

    def _scan(self, text: str):
        tokens = []
        i = 0
        while i < len(text):
            m = _TOKEN_RE.match(text, i)
            if m is None or m.end() == i:
                if text[i:].strip() == "":
                    break
                raise SpecParseError(f"bad character {text[i]!r} in expression {text!r}")
            if m.group("num"):
                tokens.append(("num", Fraction(m.group("num"))))
            elif m.group("name"):
                tokens.append(("name", m.group("name")))
            else:
                tokens.append(("op", m.group("op")))
            i = m.end()
        tokens.append(("end", ""))
        return tokens

    def _peek(self):
        return self.tokens[self.pos]

    def _next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def _expect_op(self, op: str):
        kind, val = self._next()
        if kind != "op" or val != op:
            raise SpecParseError(f"expected {op!r} in expression {self.text!r}")

    def parse(self) -> Callable[[dict], Fraction]:
        fn = self._expr()
        kind, _ = self._peek()
        if kind != "end":
            raise SpecParseError(f"trailing input in expression {self.text!r}")
        return fn

    def _expr(self):
        fn = self._term()
        while True:
            kind, val = self._peek()
            if kind == "op" and val in "+-":
                self._next()
                rhs = self._term()
                if val == "+":
                    fn = (lambda a, b: lambda env: a(env) + b(env))(fn, rhs)
                else:
                    fn = (lambda a, b: lambda env: a(env) - b(env))(fn, rhs)
            else:
                return fn

    def _term(self):
        fn = self._factor()
        while True:
            kind, val = self._peek()
            if kind == "op" and val in "*/":
                self._next()
                rhs = self._factor()
                if val == "*":
                    fn = (lambda a, b: lambda env: a(env) * b(env))(fn, rhs)
                else:
                    fn = (lambda a, b: lambda env: a(env) / b(env))(fn, rhs)
            else:
                return fn

    def _factor(self):
        kind, val = self._peek()
        if kind == "op" and val == "-":
            self._next()
            inner = self._factor()
            return lambda env: -inner(env)
        return self._power()

    def _power(self):
        base = self._atom()
        kind, val = self._peek()
        if kind == "op" and val == "^":
            self._next()
            exponent = self._int_exponent()
            return lambda env: base(env) ** exponent
        return base

    def _int_exponent(self) -> int:
        sign = 1
        kind, val = self._peek()
        if kind == "op" and val == "-":
            self._next()
            sign = -1
        kind, val = self._next()
        if kind != "num" or val.denominator != 1:
            raise SpecParseError(f"exponent must be an integer in {self.text!r}")
        return sign * int(val)

    def _atom(self):
        kind, val = self._next()
        if kind == "num":
            const = val
            return lambda env: const
        if kind == "name":
            if val not in self.variables:
                raise SpecParseError(
                    f"unknown name {val!r} in expression {self.text!r} "
                    f"(allowed: {', '.join(self.variables)})")
            name = val
            return lambda env: env[name]
        if kind == "op" and val == "(":
            fn = self._expr()
            self._expect_op(")")
            return fn
        raise SpecParseError(f"unexpected token in expression {self.text!r}")


def compile_arithmetic(text: str, variables: Sequence[str] = ("n",)) -> Callable[..., Fraction]:
    """Compile an arithmetic expression to a function of keyword args."""
    parser = _ExprParser(text, variables)
    fn = parser.parse()

    def call(**env) -> Fraction:
        return fn(env)

    return call


def _parse_rational(text: str, context: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(f"bad number {text!r} in {context}") from exc


def _fmt(q: Fraction) -> str:
    return str(q)  # Fraction prints p/q, or bare p for integers


# ---------------------------------------------------------------------------
# Sequence and weight specs
# ---------------------------------------------------------------------------

_UNIT_RE = re.compile(r"^e(\d+)$")


def _preset_sequence(text: str) -> Optional[tuple[LazySequence, str]]:
    body = text.strip()
    m = _UNIT_RE.match(body)
    if m:
        idx = int(m.group(1))
        if idx < 1:
            raise SpecParseError("unit sequences are indexed from 1")
        return LazySequence.unit(idx), f"e{idx}"
    if body == "ones":
        return ones(), "ones"
    if body == "zeros":
        return zeros(), "zeros"
    if body == "harmonic":
        return harmonic(), "harmonic"
    if body == "alternating":
        return alternating(), "alternating"
    if body.startswith("power:"):
        p = body.split(":", 1)[1]
        try:
            exponent = int(p)
        except ValueError as exc:
            raise SpecParseError(f"power spec needs an integer exponent, got {p!r}") from exc
        rule = lambda n: Fraction(n) ** exponent
        return LazySequence(rule, label=f"power:{exponent}"), f"power:{exponent}"
    if body.startswith("geometric:"):
        r = _parse_rational(body.split(":", 1)[1], "geometric spec")
        return (LazySequence(lambda n: r ** n, label=f"geometric:{r}"),
                f"geometric:{_fmt(r)}")
    if body.startswith("expr:"):
        src = body.split(":", 1)[1]
        fn = compile_arithmetic(src, variables=("n",))
        canon = "expr:" + re.sub(r"\s+", "", src)
        return LazySequence(lambda n: fn(n=Fraction(n)), label=canon), canon
    return None


def _explicit_terms(text: str, context: str) -> tuple[list[Fraction], Optional[str]]:
    body = text.strip()
    tail_src = None
    if ";" in body:
        body, directive = body.split(";", 1)
        directive = directive.strip()
        if not directive.startswith("tail="):
            raise SpecParseError(f"unknown directive {directive!r} in {context}")
        tail_src = directive[len("tail="):]
    terms = [_parse_rational(piece, context) for piece in body.split(",") if piece.strip() != ""]
    if not terms:
        raise SpecParseError(f"empty term list in {context}")
    return terms, tail_src


def parse_sequence_spec(text: str) -> tuple[LazySequence, str]:
    """A sequence spec: a preset name, ``expr:<e>``, or an explicit comma
    list with an optional ``;tail=<expr>`` (default tail: zeros)."""
    preset = _preset_sequence(text)
    if preset is not None:
        return preset
    terms, tail_src = _explicit_terms(text, "sequence spec")
    head = len(terms)
    canon = ",".join(_fmt(t) for t in terms)
    if tail_src is None:
        seq = LazySequence.from_terms(terms)
        return seq, canon
    tail_fn = compile_arithmetic(tail_src, variables=("n",))
    canon += ";tail=" + re.sub(r"\s+", "", tail_src)

    def rule(n: int) -> Fraction:
        if n <= head:
            return terms[n - 1]
        return tail_fn(n=Fraction(n))

    return LazySequence(rule, label=canon), canon


def parse_weight_spec(text: str) -> tuple[LazySequence, str]:
    """A weight spec: like a sequence spec, but the default tail of an
    explicit list repeats the last term (weights must stay nonzero)."""
    preset = _preset_sequence(text)
    if preset is not None:
        return preset
    terms, tail_src = _explicit_terms(text, "weight spec")
    head = len(terms)
    if tail_src is None:
        last = terms[-1]
        canon = ",".join(_fmt(t) for t in terms)

        def rule(n: int) -> Fraction:
            return terms[n - 1] if n <= head else last

        return LazySequence(rule, label=canon), canon
    tail_fn = compile_arithmetic(tail_src, variables=("n",))
    canon = ",".join(_fmt(t) for t in terms) + ";tail=" + re.sub(r"\s+", "", tail_src)

    def rule(n: int) -> Fraction:
        if n <= head:
            return terms[n - 1]
        return tail_fn(n=Fraction(n))

    return LazySequence(rule, label=canon), canon


# ---------------------------------------------------------------------------
# Matrix specs
# ---------------------------------------------------------------------------


@dataclass
class MatrixSpec:
    operator: TriangleOperator
    canonical: str
    notes: list[str] = field(default_factory=list)


def parse_matrix_spec(text: str, *, full: bool = False) -> MatrixSpec:
    """A matrix spec: ``identity``, ``cesaro``, ``difference``,
    ``euler:<r>``, ``taylor:<r>``, ``riesz:<weight spec>``,
    ``expr:<e>`` in n,k (masked to the lower triangle unless ``full``),
    or ``csv:<path>`` with one matrix row per line."""
    body = text.strip()
    if body == "identity":
        return MatrixSpec(identity_matrix(), "identity")
    if body == "cesaro":
        return MatrixSpec(cesaro_matrix(), "cesaro")
    if body == "difference":
        return MatrixSpec(difference_matrix(), "difference")
    if body.startswith("euler:"):
        r = _parse_rational(body.split(":", 1)[1], "euler spec")
        return MatrixSpec(euler_matrix(r), f"euler:{_fmt(r)}")
    if body.startswith("taylor:"):
        r = _parse_rational(body.split(":", 1)[1], "taylor spec")
        spec = MatrixSpec(taylor_matrix(r), f"taylor:{_fmt(r)}")
        spec.notes.append("taylor rows are infinite; row-bounded operations "
                          "need an explicit bound")
        return spec
    if body.startswith("riesz:"):
        wtext = body.split(":", 1)[1]
        weights, canon = parse_weight_spec(wtext)
        return MatrixSpec(riesz_matrix(weights), f"riesz:{canon}")
    if body.startswith("expr:"):
        src = body.split(":", 1)[1]
        fn = compile_arithmetic(src, variables=("n", "k"))
        canon = "expr:" + re.sub(r"\s+", "", src)
        if full:
            op = TriangleOperator(
                lambda n, k: fn(n=Fraction(n), k=Fraction(k)),
                kind=TriangleKind.ROW_EVALUABLE, exact=True, label=canon)
            return MatrixSpec(op, canon, ["expression matrix used with full rows"])
        op = TriangleOperator(
            lambda n, k: fn(n=Fraction(n), k=Fraction(k)),
            kind=TriangleKind.STRICT_TRIANGLE, exact=True, label=canon)
        return MatrixSpec(op, canon)
    if body.startswith("csv:"):
        return _csv_matrix(body.split(":", 1)[1])
    raise SpecParseError(f"unknown matrix spec {text!r}")


def _csv_matrix(path: str) -> MatrixSpec:
    rows: list[list[Fraction]] = []
    try:
        with open(path, newline="") as fh:
            for record in csv.reader(fh):
                if not record or all(cell.strip() == "" for cell in record):
                    continue
                rows.append([_parse_rational(cell, f"csv matrix {path}")
                             for cell in record if cell.strip() != ""])
    except OSError as exc:
        raise SpecParseError(f"cannot read csv matrix {path!r}: {exc}") from exc
    if not rows:
        raise SpecParseError(f"csv matrix {path!r} has no rows")
    count = len(rows)

    def rule(n: int, k: int) -> Fraction:
        if n <= count and k <= len(rows[n - 1]):
            return rows[n - 1][k - 1]
        return Fraction(0)

    op = TriangleOperator(rule, kind=TriangleKind.STRICT_TRIANGLE, exact=True,
                          label=f"csv:{path}")
    note = (f"csv matrix has {count} explicit rows; entries outside them are 0")
    return MatrixSpec(op, f"csv:{path}", [note])


def parse_schedule_spec(text: str) -> TruncationSchedule:
    return TruncationSchedule.parse(text)
