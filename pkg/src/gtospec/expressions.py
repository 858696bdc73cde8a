"""Recursive-descent parser for trigonometric-polynomial field expressions.

Grammar (whitespace insignificant)::

    expr  := ['+'|'-'] term (('+'|'-') term)*
    term  := number ['*' func] | func
    func  := ('sin'|'cos') '(' phase ')'
    phase := ['+'|'-'] pterm (('+'|'-') pterm)*
    pterm := [int '*'] var
    var   := 'x1' | 'x2' | 'x3'

A leading sign on the first term and a bare variable (``sin(x1)``) are
accepted as shorthands for ``-1*...`` and ``1*x1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .exterior import ModeLattice, TrigField

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*()]))"
)


class ExpressionError(ConfigError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}: {text!r}")


@dataclass(frozen=True)
class Term:
    coefficient: float
    kind: str  # "sin" | "cos" | "const"
    wavevector: tuple[int, ...]


@dataclass(frozen=True)
class FlowExpression:
    text: str
    dim: int
    terms: tuple[Term, ...]

    def bind(self, lattice: ModeLattice) -> TrigField:
        """Coefficients on ``lattice`` via Euler's formula."""
        if lattice.dim != self.dim:
            raise ConfigError(f"expression parsed for D={self.dim} bound to a D={lattice.dim} lattice")
        c = np.zeros(lattice.shape, complex)
        zero = (0,) * self.dim
        for t in self.terms:
            n = t.wavevector
            if not lattice.contains(n):
                raise ConfigError(f"mode {n} in {self.text!r} exceeds the lattice cutoff M={lattice.cutoff}")
            neg = tuple(-v for v in n)
            if t.kind == "const":
                c[lattice.slot(zero)] += t.coefficient
            elif t.kind == "cos":
                if n == zero:
                    c[lattice.slot(zero)] += t.coefficient
                else:
                    c[lattice.slot(n)] += t.coefficient / 2
                    c[lattice.slot(neg)] += t.coefficient / 2
            elif n != zero:
                c[lattice.slot(n)] += -0.5j * t.coefficient
                c[lattice.slot(neg)] += 0.5j * t.coefficient
        return TrigField(lattice, c)

    def to_text(self) -> str:
        return format_terms(self.terms)


def _format_phase(n: tuple[int, ...]) -> str:
    parts = []
    for j, v in enumerate(n):
        if v == 0:
            continue
        sign = "-" if v < 0 else "+"
        parts.append((sign, f"{abs(v)}*x{j + 1}"))
    if not parts:
        return "0*x1"
    head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return head + "".join(f" {s} {p}" for s, p in parts[1:])


def format_terms(terms) -> str:
    """Canonical text that parses back to the same term list."""
    if not terms:
        return "0"
    out = []
    for i, t in enumerate(terms):
        sign = "-" if t.coefficient < 0 else "+"
        mag = repr(abs(float(t.coefficient)))
        body = mag if t.kind == "const" else f"{mag}*{t.kind}({_format_phase(t.wavevector)})"
        if i == 0:
            out.append(("-" if sign == "-" else "") + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.tokens = self._tokenize(text)
        self.i = 0

    def _tokenize(self, text):
        tokens, pos = [], 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ExpressionError(f"unexpected character {text[pos]!r}", text, pos)
            kind = m.lastgroup
            start = m.start(kind)
            tokens.append((kind, m.group(kind), start))
            pos = m.end()
        tokens.append(("end", "", len(text)))
        return tokens

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ExpressionError(f"expected {value!r}, found {found}", self.text, pos)

    def error(self, message):
        raise ExpressionError(message, self.text, self.peek()[2])

    def parse(self) -> list[Term]:
        sign = 1.0
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1.0 if self.take()[1] == "-" else 1.0
        terms = [self.term(sign)]
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1.0 if self.take()[1] == "-" else 1.0
            terms.append(self.term(sign))
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return terms

    def term(self, sign) -> Term:
        kind, val, pos = self.peek()
        if kind == "number":
            self.take()
            coef = sign * float(val)
            if self.peek()[1] == "*":
                self.take()
                return self.func(coef)
            return Term(coef, "const", (0,) * self.dim)
        if kind == "name" and val in ("sin", "cos"):
            return self.func(sign)
        self.error("expected a number, 'sin' or 'cos'")

    def func(self, coef) -> Term:
        kind, val, pos = self.take()
        if kind != "name" or val not in ("sin", "cos"):
            raise ExpressionError("expected 'sin' or 'cos'", self.text, pos)
        self.expect("(")
        n = self.phase()
        self.expect(")")
        return Term(coef, val, tuple(n))

    def phase(self) -> list[int]:
        n = [0] * self.dim
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        self.pterm(n, sign)
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1 if self.take()[1] == "-" else 1
            self.pterm(n, sign)
        return n

    def pterm(self, n, sign):
        kind, val, pos = self.peek()
        mult = 1
        if kind == "number":
            self.take()
            if not re.fullmatch(r"\d+", val):
                raise ExpressionError(f"non-integer wavenumber {val!r}", self.text, pos)
            mult = int(val)
            self.expect("*")
            kind, val, pos = self.peek()
        m = re.fullmatch(r"x(\d+)", val) if kind == "name" else None
        if not m:
            raise ExpressionError("expected a variable x1..x3", self.text, pos)
        j = int(m.group(1))
        if not 1 <= j <= self.dim:
            raise ExpressionError(f"variable {val} out of range for D={self.dim}", self.text, pos)
        self.take()
        n[j - 1] += sign * mult


def parse_flow_expression(text: str, dim: int) -> FlowExpression:
    """Parse ``text`` into a term list over variables x1..x{dim}."""
    if dim not in (1, 2, 3):
        raise ConfigError(f"dimension must be 1, 2 or 3, got {dim}")
    if not isinstance(text, str):
        raise ConfigError(f"expression must be a string, got {type(text).__name__}")
    terms = _Parser(text, dim).parse()
    return FlowExpression(text, dim, tuple(terms))


def trig_field(text: str, lattice: ModeLattice) -> TrigField:
    return parse_flow_expression(text, lattice.dim).bind(lattice)


def field_terms(field: TrigField, tol: float = 0.0) -> list[Term]:
    """Inverse of ``bind`` for a real field: one cos and one sin term per mode pair.

    Modes are visited in lattice order keeping the representative whose first
    nonzero entry is positive.  Coefficients are recovered exactly, so
    ``format_terms(field_terms(f))`` re-parses to ``f`` bit for bit.
    """
    lat = field.lattice
    terms = []
    zero = (0,) * lat.dim
    for n, c in zip(*field.nonzero_modes(tol)):
        n = tuple(int(v) for v in n)
        if n == zero:
            if c.real != 0:
                terms.append(Term(float(c.real), "const", zero))
            continue
        if next(v for v in n if v != 0) < 0:
            continue
        if c.real != 0:
            terms.append(Term(2 * float(c.real), "cos", n))
        if c.imag != 0:
            terms.append(Term(-2 * float(c.imag), "sin", n))
    return terms
