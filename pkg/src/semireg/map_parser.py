"""Text format for polynomial maps.

A map file lists the ``k`` components separated by commas or newlines::

    vars: z1 z2            # optional header
    z1^6 - z2^4
    z1^3 - 2*z2^2 + z2

Coefficients may be integers, rationals ``a/b``, decimals (converted
exactly) and Gaussian numbers built with the reserved unit ``i``.  ``*`` is
optional in front of a variable or ``i`` (``2z1``, ``(1+2i) z1 z2^3``) and
required everywhere else.  Without a header ``k`` is the number of
components.  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import BadExponent, ParseError, UnbalancedParens, UnknownVariable
from .poly_core import GaussianRational, Polynomial, PolynomialMap

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<num>\d+\.\d*|\.\d+|\d+)
  | (?P<var>z\d+)
  | (?P<unit>i(?![A-Za-z0-9_]))
  | (?P<op>[-+*/^(),])
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<bad>.)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class MapDocument:
    k: int
    variables: tuple
    components: tuple          # Polynomial per component
    sources: tuple             # source text per component
    spans: tuple               # ((line, col), (line, col)) per component

    def to_map(self) -> PolynomialMap:
        return PolynomialMap(self.components)


def _tokenize(text):
    line, line_start = 1, 0
    tokens = []
    for mt in _TOKEN.finditer(text):
        kind = mt.lastgroup
        col = mt.start() - line_start + 1
        if kind == "newline":
            tokens.append(Token("sep", "\n", line, col))
            line += 1
            line_start = mt.end()
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "op" and mt.group() == ",":
            tokens.append(Token("sep", ",", line, col))
            continue
        if kind == "word":
            raise UnknownVariable(f"unknown variable {mt.group()!r}", line, col)
        if kind == "bad":
            raise ParseError(f"unexpected character {mt.group()!r}", line, col)
        tokens.append(Token(kind, mt.group(), line, col))
    return tokens


def _strip_header(text):
    """Blank out a leading ``vars:`` line; return (declared names or None, text)."""
    lines = text.split("\n")
    for n, line in enumerate(lines):
        body = line.split("#")[0].strip()
        if not body:
            continue
        if not body.startswith("vars:"):
            return None, text
        names = body[len("vars:"):].split()
        if not names:
            raise ParseError("empty vars: header", n + 1, line.index("vars:") + 1)
        for j, name in enumerate(names):
            if name != f"z{j + 1}":
                raise UnknownVariable(
                    f"header variables must be z1..zk in order, got {name!r}",
                    n + 1, line.index(name) + 1)
        lines[n] = ""
        return names, "\n".join(lines)
    return None, text


def _split_components(tokens):
    """Group tokens into components at top-level separators."""
    comps, current, depth = [], [], 0
    open_stack = []
    for t in tokens:
        if t.kind == "op" and t.text == "(":
            depth += 1
            open_stack.append(t)
        elif t.kind == "op" and t.text == ")":
            depth -= 1
            if depth < 0:
                raise UnbalancedParens("unmatched ')'", t.line, t.col)
            open_stack.pop()
        if t.kind == "sep":
            if depth > 0 and t.text == "\n":
                continue
            if depth > 0:
                o = open_stack[-1]
                raise UnbalancedParens("unclosed '('", o.line, o.col)
            if current:
                comps.append(current)
            elif t.text == ",":
                raise ParseError("empty component", t.line, t.col)
            current = []
            continue
        current.append(t)
    if depth > 0:
        t = open_stack[-1]
        raise UnbalancedParens("unclosed '('", t.line, t.col)
    if current:
        comps.append(current)
    return comps


class _Parser:
    def __init__(self, tokens, k):
        self.toks = tokens
        self.pos = 0
        self.k = k

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self):
        t = self.peek()
        self.pos += 1
        return t

    def _end_error(self, msg):
        last = self.toks[-1]
        return ParseError(msg, last.line, last.col + len(last.text))

    def parse(self):
        value = self.expr()
        t = self.peek()
        if t is not None:
            if t.kind == "op" and t.text == ")":
                raise UnbalancedParens("unmatched ')'", t.line, t.col)
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col)
        return value

    def expr(self):
        value = self.factor()
        value = self.term_rest(value)
        while True:
            t = self.peek()
            if t is not None and t.kind == "op" and t.text in "+-":
                self.next()
                rhs = self.term_rest(self.factor())
                value = value + rhs if t.text == "+" else value - rhs
            else:
                return value

    def term_rest(self, value):
        while True:
            t = self.peek()
            if t is None:
                return value
            if t.kind == "op" and t.text == "*":
                self.next()
                value = value * self.factor()
            elif t.kind == "op" and t.text == "/":
                self.next()
                divisor = self.factor()
                if not divisor.is_constant or divisor.is_zero:
                    raise ParseError("division only by a nonzero constant", t.line, t.col)
                value = value.scale(GaussianRational(1) / divisor.coefficient((0,) * self.k))
            elif t.kind in ("var", "unit"):
                value = value * self.power()
            else:
                return value

    def factor(self):
        t = self.peek()
        if t is not None and t.kind == "op" and t.text in "+-":
            self.next()
            inner = self.factor()
            return -inner if t.text == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        t = self.peek()
        if t is not None and t.kind == "op" and t.text == "^":
            self.next()
            e = self.next()
            if e is None:
                raise self._end_error("missing exponent")
            if e.kind != "num" or not e.text.isdigit():
                raise BadExponent("exponent must be a nonnegative integer literal", e.line, e.col)
            nxt = self.peek()
            if nxt is not None and nxt.kind == "op" and nxt.text == "^":
                raise ParseError("chained '^' is ambiguous; use parentheses", nxt.line, nxt.col)
            return base ** int(e.text)
        return base

    def atom(self):
        t = self.next()
        if t is None:
            raise self._end_error("unexpected end of expression")
        if t.kind == "num":
            return Polynomial.constant(self.k, Fraction(t.text))
        if t.kind == "unit":
            return Polynomial.constant(self.k, GaussianRational(0, 1))
        if t.kind == "var":
            j = int(t.text[1:])
            if j < 1 or j > self.k:
                raise UnknownVariable(f"variable {t.text} outside z1..z{self.k}", t.line, t.col)
            return Polynomial.variable(self.k, j - 1)
        if t.kind == "op" and t.text == "(":
            value = self.expr()
            close = self.next()
            if close is None or close.text != ")":
                raise UnbalancedParens("unclosed '('", t.line, t.col)
            return value
        raise ParseError(f"unexpected {t.text!r}", t.line, t.col)


def parse_document(text: str) -> MapDocument:
    names, body = _strip_header(text)
    tokens = _tokenize(body)
    groups = _split_components(tokens)
    if not groups:
        raise ParseError("no components", 1, 1)
    k = len(names) if names is not None else len(groups)
    if len(groups) != k:
        t = groups[-1][0] if len(groups) > k else groups[-1][-1]
        raise ParseError(f"expected {k} components, found {len(groups)}", t.line, t.col)
    lines = text.split("\n")
    comps, sources, spans = [], [], []
    for g in groups:
        comps.append(_Parser(g, k).parse())
        start, end = g[0], g[-1]
        spans.append(((start.line, start.col), (end.line, end.col + len(end.text))))
        if start.line == end.line:
            sources.append(lines[start.line - 1][start.col - 1:end.col - 1 + len(end.text)])
        else:
            sources.append(" ".join(t.text for t in g))
    variables = tuple(f"z{j + 1}" for j in range(k))
    return MapDocument(k, variables, tuple(comps), tuple(sources), tuple(spans))


def parse_map(text: str) -> PolynomialMap:
    return parse_document(text).to_map()


def load_map(path) -> PolynomialMap:
    with open(path, encoding="utf-8") as fh:
        return parse_map(fh.read())


# ---------------------------------------------------------------------------
# Canonical printing
# ---------------------------------------------------------------------------

def _rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _imag(q: Fraction) -> str:
    return "i" if q == 1 else f"{_rational(q)}*i"


def _monomial(exps) -> str:
    parts = []
    for j, e in enumerate(exps):
        if e == 1:
            parts.append(f"z{j + 1}")
        elif e > 1:
            parts.append(f"z{j + 1}^{e}")
    return "*".join(parts)


def _signed_coeff(c: GaussianRational):
    """Split a coefficient into (negative?, magnitude text, is_one)."""
    if c.im == 0:
        return c.re < 0, _rational(abs(c.re)), abs(c.re) == 1
    if c.re == 0:
        return c.im < 0, _imag(abs(c.im)), False
    neg = c.re < 0
    if neg:
        c = -c
    sign = "+" if c.im > 0 else "-"
    return neg, f"({_rational(c.re)} {sign} {_imag(abs(c.im))})", False


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero:
        return "0"
    out = []
    for n, (c, exps) in enumerate(p):
        neg, mag, is_one = _signed_coeff(c)
        mono = _monomial(exps)
        if mono:
            body = mono if is_one else f"{mag}*{mono}"
        else:
            body = mag
        if n == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def format_map(pmap: PolynomialMap) -> str:
    return ", ".join(format_polynomial(c) for c in pmap)
