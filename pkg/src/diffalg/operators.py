"""Noncommutative skew-polynomial arithmetic for differential operators.

Operators are finite sums a_k D^k with rational-function coefficients, where
D is the total derivative and multiplication obeys D*a = a*D + a'.  The ring
is left and right Euclidean; both divisions, both gcds and both lcms are
implemented, along with minimal fractions and the prescribed-kernel
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Tuple

from .errors import DependentInput
from .jets import DiffPoly, RatFun, constant_linear_basis


class DiffOp:
    """A differential operator sum a_k D^k; the zero operator has no terms."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Optional[Dict[int, RatFun]] = None):
        self.coeffs: Dict[int, RatFun] = {}
        if coeffs:
            for k, c in coeffs.items():
                c = RatFun.coerce(c)
                if not c.is_zero():
                    if k < 0:
                        raise ValueError("differential operators have powers >= 0")
                    self.coeffs[k] = c

    # -- constructors -----------------------------------------------------------

    @staticmethod
    def zero() -> "DiffOp":
        return DiffOp()

    @staticmethod
    def identity() -> "DiffOp":
        return DiffOp({0: RatFun(1)})

    @staticmethod
    def d(power: int = 1) -> "DiffOp":
        return DiffOp({power: RatFun(1)})

    @staticmethod
    def of_function(f) -> "DiffOp":
        return DiffOp({0: RatFun.coerce(f)})

    @staticmethod
    def coerce(value) -> "DiffOp":
        if isinstance(value, DiffOp):
            return value
        return DiffOp.of_function(value)

    # -- queries ------------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> Optional[int]:
        return max(self.coeffs) if self.coeffs else None

    def leading_coefficient(self) -> RatFun:
        if not self.coeffs:
            raise ValueError("zero operator has no leading coefficient")
        return self.coeffs[max(self.coeffs)]

    def coefficient(self, k: int) -> RatFun:
        return self.coeffs.get(k, RatFun(0))

    def is_identity(self) -> bool:
        return self.coeffs == {0: RatFun(1)}

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, DiffPoly, RatFun)):
            other = DiffOp.of_function(other)
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(frozenset(self.coeffs.items()))

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        from .grammar import format_ratfun
        if not self.coeffs:
            return "DiffOp(0)"
        parts = []
        for k in sorted(self.coeffs, reverse=True):
            c = format_ratfun(self.coeffs[k])
            if k == 0:
                parts.append(c)
            else:
                head = "" if c == "1" else f"({c})*"
                parts.append(f"{head}d^{k}" if k > 1 else f"{head}d")
        return "DiffOp(" + " + ".join(parts) + ")"

    # -- additive structure ----------------------------------------------------------

    def __add__(self, other) -> "DiffOp":
        other = DiffOp.coerce(other)
        coeffs = dict(self.coeffs)
        for k, c in other.coeffs.items():
            s = coeffs.get(k, RatFun(0)) + c
            if s.is_zero():
                coeffs.pop(k, None)
            else:
                coeffs[k] = s
        return DiffOp(coeffs)

    __radd__ = __add__

    def __neg__(self) -> "DiffOp":
        return DiffOp({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other) -> "DiffOp":
        return self + (-DiffOp.coerce(other))

    def __rsub__(self, other) -> "DiffOp":
        return DiffOp.coerce(other) + (-self)

    # -- multiplicative structure ----------------------------------------------------

    def __mul__(self, other) -> "DiffOp":
        """Operator composition; D^k * a expands by the Leibniz rule."""
        if isinstance(other, (int, Fraction, DiffPoly, RatFun)):
            other = DiffOp.of_function(other)
        coeffs: Dict[int, RatFun] = {}
        for k, a in self.coeffs.items():
            for l, b in other.coeffs.items():
                derivative = b
                for n in range(k + 1):
                    c = a * derivative * comb(k, n)
                    key = k - n + l
                    s = coeffs.get(key, RatFun(0)) + c
                    if s.is_zero():
                        coeffs.pop(key, None)
                    else:
                        coeffs[key] = s
                    derivative = derivative.total_derivative()
        return DiffOp(coeffs)

    def __rmul__(self, other) -> "DiffOp":
        # function * operator just scales the coefficients
        f = RatFun.coerce(other)
        return DiffOp({k: f * c for k, c in self.coeffs.items()})

    def scale(self, factor) -> "DiffOp":
        return self.__rmul__(factor)

    def __pow__(self, n: int) -> "DiffOp":
        if n < 0:
            raise ValueError("negative operator powers are not differential operators")
        out = DiffOp.identity()
        for _ in range(n):
            out = out * self
        return out

    # -- action and adjoint -------------------------------------------------------------

    def apply(self, f):
        """A(f) = sum a_k d^k(f); returns DiffPoly when the result is polynomial."""
        poly_in = not isinstance(f, RatFun)
        g = RatFun.coerce(f)
        out = RatFun(0)
        top = max(self.coeffs, default=0)
        derivative = g
        for k in range(top + 1):
            a = self.coeffs.get(k)
            if a is not None:
                out = out + a * derivative
            derivative = derivative.total_derivative()
        if poly_in and out.is_polynomial():
            return out.as_diffpoly()
        return out

    def __call__(self, f):
        return self.apply(f)

    def adjoint(self) -> "DiffOp":
        """A* with D* = -D and f* = f; an anti-involution."""
        coeffs: Dict[int, RatFun] = {}
        for k, a in self.coeffs.items():
            sign = -1 if k % 2 else 1
            derivative = a
            for n in range(k + 1):
                c = derivative * (comb(k, n) * sign)
                key = k - n
                s = coeffs.get(key, RatFun(0)) + c
                if s.is_zero():
                    coeffs.pop(key, None)
                else:
                    coeffs[key] = s
                derivative = derivative.total_derivative()
        return DiffOp(coeffs)

    def monic(self) -> "DiffOp":
        if self.is_zero():
            return self
        return self.scale(self.leading_coefficient().inverse())


# -- Euclidean structure ------------------------------------------------------------


def right_divide(a: DiffOp, b: DiffOp) -> Tuple[DiffOp, DiffOp]:
    """A = Q*B + R with deg R < deg B; unique."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero operator")
    q = DiffOp.zero()
    r = a
    db = b.degree()
    while not r.is_zero() and r.degree() >= db:
        shift = r.degree() - db
        piece = DiffOp({shift: r.leading_coefficient() / b.leading_coefficient()})
        q = q + piece
        r = r - piece * b
    return q, r


def left_divide(a: DiffOp, b: DiffOp) -> Tuple[DiffOp, DiffOp]:
    """A = B*Q + R with deg R < deg B; mirror of right_divide."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero operator")
    q = DiffOp.zero()
    r = a
    db = b.degree()
    while not r.is_zero() and r.degree() >= db:
        shift = r.degree() - db
        piece = DiffOp({shift: r.leading_coefficient() / b.leading_coefficient()})
        q = q + piece
        r = r - b * piece
    return q, r


def _left_clear_factor(op: DiffOp) -> RatFun:
    """A function c such that c*op has primitive polynomial coefficients.

    Scaling on the left by a function preserves left ideals, so Euclidean
    chains may normalize remainders this way; it is the Ore analog of
    taking primitive parts in a polynomial remainder sequence.
    """
    from .jets import poly_lcm, poly_gcd, DiffPoly
    den = DiffPoly.const(1)
    for c in op.coeffs.values():
        den = poly_lcm(den, c.den)
    content = None
    for c in op.coeffs.values():
        num = (c * den).as_diffpoly()
        content = num if content is None else poly_gcd(content, num)
        if content.is_constant():
            break
    factor = RatFun(den, content)
    # deterministic sign/scale: make the leading coefficient's lead term 1
    lead = (op.leading_coefficient() * factor).num.leading()[1]
    return factor * (1 / lead)


def _primitive_left(op: DiffOp) -> DiffOp:
    if op.is_zero():
        return op
    return op.scale(_left_clear_factor(op))


def right_gcd(a: DiffOp, b: DiffOp) -> DiffOp:
    """Monic greatest common right divisor."""
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd of two zero operators")
    a, b = _primitive_left(a), _primitive_left(b)
    while not b.is_zero():
        _, r = right_divide(a, b)
        a, b = b, _primitive_left(r)
    return a.monic()


def left_gcd(a: DiffOp, b: DiffOp) -> DiffOp:
    """Monic greatest common left divisor, via adjoints of the right gcd."""
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    return right_gcd(a.adjoint(), b.adjoint()).adjoint().monic()


def left_lcm(a: DiffOp, b: DiffOp) -> Tuple[DiffOp, DiffOp, DiffOp]:
    """(L, C, D) with L = C*A = D*B of minimal degree.

    Extended Euclid on right-division remainders with cofactors multiplying
    on the left; each remainder is rescaled to primitive polynomial
    coefficients, the same factor applied to its cofactors.
    """
    if a.is_zero() or b.is_zero():
        raise ValueError("lcm needs nonzero operators")
    r0, r1 = a, b
    s0, s1 = DiffOp.identity(), DiffOp.zero()
    t0, t1 = DiffOp.zero(), DiffOp.identity()
    while not r1.is_zero():
        q, r = right_divide(r0, r1)
        s_next, t_next = s0 - q * s1, t0 - q * t1
        if not r.is_zero():
            factor = _left_clear_factor(r)
            r = r.scale(factor)
            s_next, t_next = s_next.scale(factor), t_next.scale(factor)
        r0, r1 = r1, r
        s0, s1 = s1, s_next
        t0, t1 = t1, t_next
    lcm = s1 * a
    lc = lcm.leading_coefficient().inverse()
    return lcm.scale(lc), s1.scale(lc), (-t1).scale(lc)


def right_lcm(a: DiffOp, b: DiffOp) -> Tuple[DiffOp, DiffOp, DiffOp]:
    """(L, C, D) with L = A*C = B*D of minimal degree.

    Mirrored extended Euclid on left-division remainders, cofactors
    multiplying on the right; remainders are normalized monic by a right
    composition with 1/lc, which preserves the right-ideal invariant.
    """
    if a.is_zero() or b.is_zero():
        raise ValueError("lcm needs nonzero operators")
    r0, r1 = a, b
    s0, s1 = DiffOp.identity(), DiffOp.zero()
    t0, t1 = DiffOp.zero(), DiffOp.identity()
    while not r1.is_zero():
        q, r = left_divide(r0, r1)
        s_next, t_next = s0 - s1 * q, t0 - t1 * q
        if not r.is_zero():
            unit = r.leading_coefficient().inverse()
            r, s_next, t_next = r * unit, s_next * unit, t_next * unit
        r0, r1 = r1, r
        s0, s1 = s1, s_next
        t0, t1 = t1, t_next
    lcm = a * s1
    lc = lcm.leading_coefficient().inverse()
    return lcm * lc, s1 * lc, (-t1) * lc


@dataclass(frozen=True)
class FractionPair:
    """A rational operator presented as a fraction of differential operators."""

    num: DiffOp
    den: DiffOp
    side: str = "right"  # L = num * den^-1 for "right", den^-1 * num for "left"

    def __post_init__(self):
        if self.side not in ("right", "left"):
            raise ValueError("side must be 'right' or 'left'")
        if self.den.is_zero():
            raise ValueError("fraction denominator is zero")


def minimal_right_fraction(a: DiffOp, b: DiffOp) -> FractionPair:
    """Divide out the right gcd so the pair is right-coprime."""
    g = right_gcd(a, b)
    if g.degree() == 0:
        return FractionPair(a, b, "right")
    qa, ra = right_divide(a, g)
    qb, rb = right_divide(b, g)
    if not (ra.is_zero() and rb.is_zero()):
        raise AssertionError("right gcd failed to divide its inputs")
    return FractionPair(qa, qb, "right")


def minimal_left_fraction(a: DiffOp, b: DiffOp) -> FractionPair:
    """Left presentation B^-1 A of the right fraction a b^-1, made minimal.

    The left lcm C a = D b gives a b^-1 = C^-1 D; the left gcd of (C, D) is
    then divided out.  For a right-coprime input pair the left denominator
    has the same degree as b.
    """
    _, c, d = left_lcm(a, b)
    g = left_gcd(c, d)
    if g.degree() == 0:
        return FractionPair(d, c, "left")
    qc, rc = left_divide(c, g)
    qd, rd = left_divide(d, g)
    if not (rc.is_zero() and rd.is_zero()):
        raise AssertionError("left gcd failed to divide its inputs")
    return FractionPair(qd, qc, "left")


def op_with_kernel(fs: List[DiffPoly]) -> DiffOp:
    """The degree-n operator annihilating n given independent functions.

    Built by the iterated first-order construction P = f*D - f'; each stage
    applies the current operator to the next function and wraps once more.
    """
    fs = [DiffPoly.coerce(f) for f in fs]
    if not fs:
        return DiffOp.identity()
    basis, _ = constant_linear_basis(fs)
    if len(basis) != len(fs):
        raise DependentInput("kernel functions must be linearly independent over Q")
    op = DiffOp.identity()
    for f in fs:
        g = op.apply(f)
        g = RatFun.coerce(g)
        if g.is_zero():
            raise AssertionError("independent function annihilated too early")
        op = (DiffOp({1: g}) - DiffOp.of_function(g.total_derivative())) * op
    return op


# -- Frechet derivatives -----------------------------------------------------------------


def frechet(f, name: str = "u") -> DiffOp:
    """The linearization sum (df/du^(m)) D^m of a function."""
    if isinstance(f, RatFun):
        top = f.top_order(name)
        partial = lambda n: f.partial(name, n)
    else:
        f = DiffPoly.coerce(f)
        top = f.top_order(name)
        partial = lambda n: RatFun(f.partial(name, n))
    if top is None:
        return DiffOp.zero()
    return DiffOp({m: partial(m) for m in range(top + 1)})


def evo_apply_op(f, op: DiffOp, name: str = "u") -> DiffOp:
    """Apply an evolutionary vector field coefficientwise to an operator."""
    from .calculus import evo_apply
    return DiffOp({k: evo_apply(f, c, name) for k, c in op.coeffs.items()})
