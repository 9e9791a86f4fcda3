"""Text grammar for differential polynomials, plus the canonical pretty-printer.

Grammar (whitespace ignored)::

    expr     := ['-'] term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := atom ('^' int)?
    atom     := rational | jet | '(' expr ')'
    jet      := NAME tick* | NAME '(' nat ')'
    rational := int ('/' nat)?

``u' == u(1)``, ``u'' == u(2)`` and so on; exponents may be negative.  By
default only ``u`` is a legal jet name; identity tests register extra formal
names such as ``F`` and ``G`` explicitly.

The printer emits canonical forms the parser accepts, so parse(print(p)) == p.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Tuple

from .errors import ParseError
from .jets import DiffPoly, RatFun

MAX_EXPONENT = 10_000


class _Scanner:
    def __init__(self, text: str, names: Sequence[str]):
        self.text = text
        self.pos = 0
        self.names = tuple(names)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, char: str) -> bool:
        if self.peek() == char:
            self.pos += 1
            return True
        return False

    def expect(self, char: str) -> None:
        if not self.take(char):
            raise ParseError(f"expected {char!r}", self.pos)

    def integer(self, allow_sign: bool = True) -> int:
        self.skip_ws()
        start = self.pos
        if allow_sign and self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            raise ParseError("expected an integer", start)
        value = int(self.text[start:self.pos])
        if abs(value) > MAX_EXPONENT:
            raise OverflowError(f"integer {value} exceeds supported bounds")
        return value


def _parse_jet(s: _Scanner) -> DiffPoly:
    name = s.peek()
    s.pos += 1
    order = 0
    if s.peek() == "(":
        s.pos += 1
        order = s.integer(allow_sign=False)
        s.expect(")")
    else:
        while s.pos < len(s.text) and s.text[s.pos] == "'":
            order += 1
            s.pos += 1
    return DiffPoly.jet(name, order)


def _parse_atom(s: _Scanner) -> DiffPoly:
    c = s.peek()
    if c == "(":
        s.pos += 1
        inner = _parse_expr(s)
        s.expect(")")
        return inner
    if c in s.names:
        return _parse_jet(s)
    if c.isdigit() or c in "+-":
        n = s.integer()
        if s.peek() == "/":
            s.pos += 1
            d = s.integer(allow_sign=False)
            if d == 0:
                raise ParseError("zero denominator", s.pos)
            return DiffPoly.const(Fraction(n, d))
        return DiffPoly.const(n)
    raise ParseError("expected a number, a jet variable or '('", s.pos)


def _parse_factor(s: _Scanner) -> DiffPoly:
    atom = _parse_atom(s)
    if s.peek() == "^":
        s.pos += 1
        e = s.integer()
        if e < 0:
            if atom.is_constant():
                value = atom.constant_value()
                if value == 0:
                    raise ParseError("zero to a negative power", s.pos)
                return DiffPoly.const(value ** e)
            mono_items = list(atom.terms.items())
            if len(mono_items) != 1 or mono_items[0][1] != 1:
                raise ParseError("negative powers only apply to jet monomials", s.pos)
            mono, _ = mono_items[0]
            return DiffPoly({tuple((v, x * e) for v, x in mono): Fraction(1)})
        return atom ** e
    return atom


def _parse_term(s: _Scanner) -> DiffPoly:
    p = _parse_factor(s)
    while s.peek() == "*":
        s.pos += 1
        p = p * _parse_factor(s)
    return p


def _parse_expr(s: _Scanner) -> DiffPoly:
    negate = False
    if s.peek() == "-":
        s.pos += 1
        negate = True
    p = _parse_term(s)
    if negate:
        p = -p
    while True:
        c = s.peek()
        if c == "+":
            s.pos += 1
            p = p + _parse_term(s)
        elif c == "-":
            s.pos += 1
            p = p - _parse_term(s)
        else:
            return p


def parse_function(text: str, names: Sequence[str] = ("u",)) -> DiffPoly:
    """Parse an expression in the text grammar into a DiffPoly."""
    s = _Scanner(text, names)
    p = _parse_expr(s)
    s.skip_ws()
    if s.pos != len(s.text):
        raise ParseError("trailing input", s.pos)
    return p


# -- printing -----------------------------------------------------------------


def _format_jet(order: int, name: str) -> str:
    if order == 0:
        return name
    if order <= 3:
        return name + "'" * order
    return f"{name}({order})"


def _format_monomial(mono: Tuple, coeff: Fraction) -> str:
    factors = []
    for (order, name), e in sorted(mono):
        v = _format_jet(order, name)
        factors.append(v if e == 1 else f"{v}^{e}")
    if not factors:
        return str(coeff)
    body = "*".join(factors)
    if coeff == 1:
        return body
    if coeff == -1:
        return f"-{body}"
    return f"{coeff}*{body}"


def format_poly(p: DiffPoly) -> str:
    """Canonical rendering; terms in descending monomial order."""
    if p.is_zero():
        return "0"
    parts = []
    for mono, coeff in p.sorted_terms():
        text = _format_monomial(mono, coeff)
        if not parts:
            parts.append(text)
        elif text.startswith("-"):
            parts.append("- " + text[1:])
        else:
            parts.append("+ " + text)
    return " ".join(parts)


def format_ratfun(r: RatFun) -> str:
    if r.den.is_one():
        return format_poly(r.num)
    num, den = format_poly(r.num), format_poly(r.den)
    if len(r.num.terms) > 1:
        num = f"({num})"
    if len(r.den.terms) > 1:
        den = f"({den})"
    return f"{num}/{den}"
