"""Exact arithmetic for differential polynomials and rational functions in jet variables.

A jet variable is a pair (order, name) standing for the order-th derivative of a
differential indeterminate; ``u`` is the main one, while capital letters such as
``F`` and ``G`` serve as formal placeholders in "for all F" identities.  DiffPoly
is a Laurent polynomial over Q in finitely many jet variables, stored sparsely in
a canonical form, so equality is an exact dictionary comparison.  RatFun is a
gcd-reduced quotient of two DiffPoly with a monic denominator.

Everything here is immutable after construction and all operations are pure.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import DependentInput

# A jet variable is (order, name); monomials are tuples of ((order, name), exp)
# sorted descending, which makes plain tuple comparison the canonical
# lexicographic monomial order with higher jets more significant.
JetKey = Tuple[int, str]
Monomial = Tuple[Tuple[JetKey, int], ...]

_ONE_MONO: Monomial = ()


def _mono(pairs: Iterable[Tuple[JetKey, int]]) -> Monomial:
    return tuple(sorted(((v, e) for v, e in pairs if e != 0), reverse=True))


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    exps: Dict[JetKey, int] = dict(m1)
    for v, e in m2:
        exps[v] = exps.get(v, 0) + e
    return _mono(exps.items())


class DiffPoly:
    """A differential (Laurent) polynomial over Q.

    Negative exponents are permitted (they arise when parsing coefficient
    fields such as 1/u'''); the integration routines reject them where the
    algorithm cannot handle them.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[Dict[Monomial, Fraction]] = None):
        self.terms: Dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    self.terms[m] = Fraction(c)
        self._hash: Optional[int] = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "DiffPoly":
        return DiffPoly()

    @staticmethod
    def const(value) -> "DiffPoly":
        c = Fraction(value)
        return DiffPoly({_ONE_MONO: c}) if c else DiffPoly()

    @staticmethod
    def jet(name: str, order: int, exponent: int = 1) -> "DiffPoly":
        if order < 0:
            raise ValueError("jet order must be >= 0")
        return DiffPoly({(((order, name), exponent),): Fraction(1)})

    @staticmethod
    def coerce(value) -> "DiffPoly":
        if isinstance(value, DiffPoly):
            return value
        if isinstance(value, (int, Fraction)):
            return DiffPoly.const(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to DiffPoly")

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == _ONE_MONO for m in self.terms)

    def is_one(self) -> bool:
        return self.terms == {_ONE_MONO: Fraction(1)}

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return self.terms.get(_ONE_MONO, Fraction(0))

    def indets(self) -> List[str]:
        return sorted({v[1] for m in self.terms for v, _ in m})

    def variables(self) -> List[JetKey]:
        return sorted({v for m in self.terms for v, _ in m})

    def top_order(self, name: Optional[str] = None) -> Optional[int]:
        """Highest jet order present, optionally restricted to one indeterminate."""
        orders = [v[0] for m in self.terms for v, _ in m
                  if name is None or v[1] == name]
        return max(orders) if orders else None

    def has_negative_exponent(self) -> bool:
        return any(e < 0 for m in self.terms for _, e in m)

    def min_exponent(self, var: JetKey) -> int:
        exps = [dict(m).get(var, 0) for m in self.terms]
        return min(exps) if exps else 0

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0], reverse=True)

    def leading(self) -> Tuple[Monomial, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        m = max(self.terms)
        return m, self.terms[m]

    # -- ring operations ---------------------------------------------------

    def __add__(self, other) -> "DiffPoly":
        if not isinstance(other, (DiffPoly, int, Fraction)):
            return NotImplemented
        other = DiffPoly.coerce(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            s = terms.get(m, Fraction(0)) + c
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
        return DiffPoly(terms)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "DiffPoly":
        if not isinstance(other, (DiffPoly, int, Fraction)):
            return NotImplemented
        return self + (-DiffPoly.coerce(other))

    def __rsub__(self, other) -> "DiffPoly":
        return DiffPoly.coerce(other) + (-self)

    def __mul__(self, other) -> "DiffPoly":
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if not c:
                return DiffPoly()
            return DiffPoly({m: c * v for m, v in self.terms.items()})
        if not isinstance(other, DiffPoly):
            return NotImplemented
        other = DiffPoly.coerce(other)
        terms: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                s = terms.get(m, Fraction(0)) + c1 * c2
                if s:
                    terms[m] = s
                else:
                    terms.pop(m, None)
        return DiffPoly(terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "DiffPoly":
        if n < 0:
            raise ValueError("negative powers produce RatFun, not DiffPoly")
        result = DiffPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        from .grammar import format_poly
        return f"DiffPoly({format_poly(self)})"

    # -- differential structure --------------------------------------------

    def total_derivative(self) -> "DiffPoly":
        """The total derivative: every jet (order, name) shifts to (order+1, name)."""
        terms: Dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            exps = dict(m)
            for v, e in m:
                shifted = dict(exps)
                if e == 1:
                    del shifted[v]
                else:
                    shifted[v] = e - 1
                up = (v[0] + 1, v[1])
                shifted[up] = shifted.get(up, 0) + 1
                mono = _mono(shifted.items())
                s = terms.get(mono, Fraction(0)) + c * e
                if s:
                    terms[mono] = s
                else:
                    terms.pop(mono, None)
        return DiffPoly(terms)

    def d(self, n: int = 1) -> "DiffPoly":
        p = self
        for _ in range(n):
            p = p.total_derivative()
        return p

    def partial(self, name: str, order: int) -> "DiffPoly":
        """Partial derivative with respect to one jet variable."""
        var = (order, name)
        terms: Dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            exps = dict(m)
            e = exps.get(var)
            if not e:
                continue
            if e == 1:
                del exps[var]
            else:
                exps[var] = e - 1
            terms[_mono(exps.items())] = c * e
        return DiffPoly(terms)

    def as_univariate(self, var: JetKey) -> Dict[int, "DiffPoly"]:
        """View as a polynomial in one jet variable with DiffPoly coefficients."""
        out: Dict[int, Dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            exps = dict(m)
            e = exps.pop(var, 0)
            out.setdefault(e, {})[_mono(exps.items())] = c
        return {e: DiffPoly(t) for e, t in out.items()}

    def coefficient_of(self, var: JetKey, exp: int) -> "DiffPoly":
        return self.as_univariate(var).get(exp, DiffPoly())


def jet(name: str, order: int = 0) -> DiffPoly:
    """Convenience constructor: jet("u", 2) is u''."""
    return DiffPoly.jet(name, order)


def diff_order(f, name: str = "u") -> Optional[int]:
    """Greatest n with a nonzero partial in u^(n); None for quasiconstants.

    With no explicit x variable the quasiconstants are exactly the rationals,
    so None doubles as the constant sentinel.
    """
    if isinstance(f, RatFun):
        n = f.num.top_order(name)
        d = f.den.top_order(name)
        candidates = [o for o in (n, d) if o is not None]
        if not candidates:
            return None
        for order in range(max(candidates), -1, -1):
            if not f.partial(name, order).is_zero():
                return order
        return None
    f = DiffPoly.coerce(f)
    return f.top_order(name)


# -- multivariate gcd over Q ------------------------------------------------


def _poly_divexact(f: DiffPoly, g: DiffPoly) -> DiffPoly:
    """Exact division f/g; raises if g does not divide f."""
    if g.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if g.is_constant():
        inv = 1 / g.constant_value()
        return f * inv
    quotient: Dict[Monomial, Fraction] = {}
    rest = f
    gm, gc = g.leading()
    g_exps = dict(gm)
    while not rest.is_zero():
        rm, rc = rest.leading()
        exps = dict(rm)
        for v, e in g_exps.items():
            exps[v] = exps.get(v, 0) - e
        q_mono = _mono(exps.items())
        q_coeff = rc / gc
        quotient[q_mono] = quotient.get(q_mono, Fraction(0)) + q_coeff
        rest = rest - DiffPoly({q_mono: q_coeff}) * g
    return DiffPoly(quotient)


def _deg_in(f: DiffPoly, var: JetKey) -> int:
    return max((dict(m).get(var, 0) for m in f.terms), default=-1)


def _pseudo_rem(f: DiffPoly, g: DiffPoly, var: JetKey) -> DiffPoly:
    """Standard pseudo-remainder: lc(g)^(deg f - deg g + 1) * f mod g."""
    df, dg = _deg_in(f, var), _deg_in(g, var)
    lc_g = g.coefficient_of(var, dg)
    r = f
    n = df - dg + 1
    while not r.is_zero():
        dr = _deg_in(r, var)
        if dr < dg:
            break
        lc_r = r.coefficient_of(var, dr)
        x_shift = DiffPoly({((var, dr - dg),): Fraction(1)}) if dr > dg else DiffPoly.const(1)
        r = r * lc_g - g * lc_r * x_shift
        n -= 1
    if n > 0 and not r.is_zero():
        r = r * lc_g ** n
    return r


def _content_and_pp(f: DiffPoly, var: JetKey) -> Tuple[DiffPoly, DiffPoly]:
    content = _content_of(f, var)
    return content, _poly_divexact(f, content)


def _normalize_leading(f: DiffPoly) -> DiffPoly:
    if f.is_zero():
        return f
    _, c = f.leading()
    return f * (1 / c)


def _mono_content(f: DiffPoly) -> Monomial:
    """The largest monomial dividing every term (per-variable minimum exponents)."""
    exps: Optional[Dict[JetKey, int]] = None
    for m in f.terms:
        d = dict(m)
        if exps is None:
            exps = d
        else:
            exps = {v: min(e, d.get(v, 0)) for v, e in exps.items() if d.get(v, 0)}
        if not exps:
            return _ONE_MONO
    return _mono(exps.items()) if exps else _ONE_MONO


def _divide_by_mono(f: DiffPoly, mono: Monomial) -> DiffPoly:
    if mono == _ONE_MONO:
        return f
    inverse = _mono((v, -e) for v, e in mono)
    return DiffPoly({_mono_mul(m, inverse): c for m, c in f.terms.items()})


def _eval_univariate(f: DiffPoly, var: JetKey,
                     point: Dict[JetKey, int]) -> Dict[int, Fraction]:
    """Image of f under substituting integers for every variable except var."""
    out: Dict[int, Fraction] = {}
    for m, c in f.terms.items():
        e_var = 0
        value = c
        for v, e in m:
            if v == var:
                e_var = e
            else:
                value = value * Fraction(point[v]) ** e
        out[e_var] = out.get(e_var, Fraction(0)) + value
    return {e: v for e, v in out.items() if v}


def _univariate_gcd_degree(fu: Dict[int, Fraction], gu: Dict[int, Fraction]) -> int:
    def normalize(p):
        return {e: c for e, c in p.items() if c}

    a, b = normalize(fu), normalize(gu)
    while b:
        da, db = max(a), max(b)
        if da < db:
            a, b = b, a
            continue
        lead = a[da] / b[db]
        shift = da - db
        new_a = dict(a)
        for e, c in b.items():
            k = e + shift
            s = new_a.get(k, Fraction(0)) - lead * c
            if s:
                new_a[k] = s
            else:
                new_a.pop(k, None)
        a = new_a
        if not a:
            a, b = b, {}
            break
        if max(a) >= da:
            raise AssertionError("univariate division failed to reduce degree")
        a, b = b, a
    return max(a) if a else -1


_SCREEN_POINTS = (2, 3, 5, 7, -2, 11, -3, 13)
_GCD_CACHE: Dict[Tuple["DiffPoly", "DiffPoly"], "DiffPoly"] = {}


def poly_gcd(f: DiffPoly, g: DiffPoly) -> DiffPoly:
    """GCD over Q[jets], normalized with leading coefficient 1 (hence unique).

    Monomial content splits off first; a univariate specialization screen
    (sound: the specialized gcd bounds the true gcd degree whenever the
    leading coefficient survives the evaluation point) detects the common
    coprime case cheaply; only genuinely sharing pairs reach the primitive
    pseudo-remainder sequence.
    """
    if f.is_zero():
        return _normalize_leading(g)
    if g.is_zero():
        return _normalize_leading(f)
    if f.is_constant() or g.is_constant():
        return DiffPoly.const(1)
    key = (f, g)
    cached = _GCD_CACHE.get(key)
    if cached is not None:
        return cached
    result = _poly_gcd_uncached(f, g)
    if len(_GCD_CACHE) > 20_000:
        _GCD_CACHE.clear()
    _GCD_CACHE[key] = result
    return result


def _poly_gcd_uncached(f: DiffPoly, g: DiffPoly) -> DiffPoly:
    mono_f, mono_g = _mono_content(f), _mono_content(g)
    common: Dict[JetKey, int] = {}
    df, dg = dict(mono_f), dict(mono_g)
    for v, e in df.items():
        if v in dg:
            common[v] = min(e, dg[v])
    common_mono = _mono(common.items())
    f = _divide_by_mono(f, mono_f)
    g = _divide_by_mono(g, mono_g)
    shared = DiffPoly({common_mono: Fraction(1)})
    if f.is_constant() or g.is_constant():
        return _normalize_leading(shared)
    fvars = {v for m in f.terms for v, _ in m}
    gvars = {v for m in g.terms for v, _ in m}
    var = max(fvars | gvars)
    if var not in fvars:
        return _normalize_leading(shared * poly_gcd(_content_of(g, var), f))
    if var not in gvars:
        return _normalize_leading(shared * poly_gcd(_content_of(f, var), g))
    # specialization screen
    other_vars = (fvars | gvars) - {var}
    for seed in range(4):
        point = {v: _SCREEN_POINTS[(seed + i) % len(_SCREEN_POINTS)]
                 for i, v in enumerate(sorted(other_vars))}
        fu = _eval_univariate(f, var, point)
        gu = _eval_univariate(g, var, point)
        if not fu or not gu:
            continue
        if max(fu) != _deg_in(f, var) or max(gu) != _deg_in(g, var):
            continue  # a leading coefficient vanished; point is unusable
        if _univariate_gcd_degree(fu, gu) == 0:
            return _normalize_leading(
                shared * poly_gcd(_content_of(f, var), _content_of(g, var)))
        break
    cont_f, pp_f = _content_and_pp(f, var)
    cont_g, pp_g = _content_and_pp(g, var)
    c = poly_gcd(cont_f, cont_g)
    last = _subresultant_last(pp_f, pp_g, var)
    if _deg_in(last, var) == 0:
        # primitive parts are coprime in the main variable
        return _normalize_leading(shared * c)
    return _normalize_leading(shared * c * _content_and_pp(last, var)[1])


def _subresultant_last(f: DiffPoly, g: DiffPoly, var: JetKey) -> DiffPoly:
    """Last nonzero element of the subresultant PRS of (f, g) in var.

    Brown's algorithm: every division below is exact in the coefficient
    ring, which keeps growth polynomial where a naive remainder sequence
    explodes.
    """
    n, m = _deg_in(f, var), _deg_in(g, var)
    if n < m:
        f, g, n, m = g, f, m, n
    d = n - m
    h = _pseudo_rem(f, g, var)
    if d % 2 == 0:
        h = -h
    lc = g.coefficient_of(var, m)
    c = -(lc ** d)
    while not h.is_zero():
        k = _deg_in(h, var)
        f, g, m, d = g, h, k, m - k
        b = (-lc) * (c ** d)
        h = _pseudo_rem(f, g, var)
        h = _poly_divexact(h, b)
        lc = g.coefficient_of(var, m)
        if d > 1:
            c = _poly_divexact((-lc) ** d, c ** (d - 1))
        else:
            c = -lc
    return g


def _content_of(f: DiffPoly, var: JetKey) -> DiffPoly:
    coeffs = list(f.as_univariate(var).values())
    content = coeffs[0]
    for c in coeffs[1:]:
        content = poly_gcd(content, c)
        if content.is_constant():
            break
    return _normalize_leading(content)


def poly_lcm(f: DiffPoly, g: DiffPoly) -> DiffPoly:
    if f.is_zero() or g.is_zero():
        return DiffPoly()
    return _normalize_leading(_poly_divexact(f * g, poly_gcd(f, g)))


# -- rational differential functions ----------------------------------------


class RatFun:
    """Quotient of differential polynomials, gcd-reduced with monic denominator."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=1):
        num = DiffPoly.coerce(num)
        den = DiffPoly.coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("RatFun denominator is zero")
        # clear Laurent exponents so gcd reduction runs on true polynomials
        clear: Dict[JetKey, int] = {}
        for poly in (num, den):
            for m in poly.terms:
                for v, e in m:
                    if e < 0:
                        clear[v] = max(clear.get(v, 0), -min(num.min_exponent(v),
                                                             den.min_exponent(v)))
        if clear:
            shift = DiffPoly({_mono(clear.items()): Fraction(1)})
            num = num * shift
            den = den * shift
        if num.is_zero():
            self.num, self.den = DiffPoly(), DiffPoly.const(1)
        elif den.is_constant():
            self.num, self.den = num * (1 / den.constant_value()), DiffPoly.const(1)
        else:
            if not num.is_constant():
                g = poly_gcd(num, den)
                if not g.is_one():
                    num = _poly_divexact(num, g)
                    den = _poly_divexact(den, g)
            if den.is_constant():
                self.num, self.den = num * (1 / den.constant_value()), DiffPoly.const(1)
            else:
                lc = den.leading()[1]
                self.num, self.den = num * (1 / lc), den * (1 / lc)
        self._hash = None

    @staticmethod
    def coerce(value) -> "RatFun":
        if isinstance(value, RatFun):
            return value
        return RatFun(DiffPoly.coerce(value))

    @staticmethod
    def _reduced(num: DiffPoly, den: DiffPoly) -> "RatFun":
        """Fast path for num, den already coprime polynomials."""
        out = RatFun.__new__(RatFun)
        if num.is_zero():
            out.num, out.den = DiffPoly(), DiffPoly.const(1)
        elif den.is_constant():
            out.num, out.den = num * (1 / den.constant_value()), DiffPoly.const(1)
        else:
            lc = den.leading()[1]
            out.num, out.den = num * (1 / lc), den * (1 / lc)
        out._hash = None
        return out

    # -- queries -------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_one()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not constant")
        return self.num.constant_value()

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def as_diffpoly(self) -> DiffPoly:
        if not self.den.is_one():
            raise ValueError("denominator is not 1")
        return self.num

    # -- field operations ------------------------------------------------------

    def __add__(self, other) -> "RatFun":
        """Fraction addition with component-level gcds (the GMP mpq scheme).

        For coprime inputs the only gcds taken are gcd(d1, d2) and one gcd
        against that cofactor, so products of denominators never feed the
        multivariate gcd directly.
        """
        if not isinstance(other, (RatFun, DiffPoly, int, Fraction)):
            return NotImplemented
        other = RatFun.coerce(other)
        if self.den.is_one() and other.den.is_one():
            return RatFun._reduced(self.num + other.num, DiffPoly.const(1))
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        g0 = poly_gcd(self.den, other.den)
        if g0.is_one():
            t = self.num * other.den + other.num * self.den
            return RatFun._reduced(t, self.den * other.den)
        e1 = _poly_divexact(self.den, g0)
        e2 = _poly_divexact(other.den, g0)
        t = self.num * e2 + other.num * e1
        g1 = poly_gcd(t, g0)
        if g1.is_one():
            return RatFun._reduced(t, self.den * e2)
        return RatFun._reduced(_poly_divexact(t, g1),
                               _poly_divexact(self.den, g1) * e2)

    __radd__ = __add__

    def __neg__(self) -> "RatFun":
        out = RatFun.__new__(RatFun)
        out.num, out.den, out._hash = -self.num, self.den, None
        return out

    def __sub__(self, other) -> "RatFun":
        if not isinstance(other, (RatFun, DiffPoly, int, Fraction)):
            return NotImplemented
        return self + (-RatFun.coerce(other))

    def __rsub__(self, other) -> "RatFun":
        return RatFun.coerce(other) + (-self)

    def __mul__(self, other) -> "RatFun":
        if not isinstance(other, (RatFun, DiffPoly, int, Fraction)):
            return NotImplemented
        other = RatFun.coerce(other)
        if self.den.is_one() and other.den.is_one():
            return RatFun._reduced(self.num * other.num, DiffPoly.const(1))
        if self.num.is_zero() or other.num.is_zero():
            return RatFun(0)
        # cross-cancel: with both inputs reduced the result is reduced too
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1 = self.num if g1.is_one() else _poly_divexact(self.num, g1)
        d2 = other.den if g1.is_one() else _poly_divexact(other.den, g1)
        n2 = other.num if g2.is_one() else _poly_divexact(other.num, g2)
        d1 = self.den if g2.is_one() else _poly_divexact(self.den, g2)
        return RatFun._reduced(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFun":
        return self * RatFun.coerce(other).inverse()

    def __rtruediv__(self, other) -> "RatFun":
        return RatFun.coerce(other) * self.inverse()

    def inverse(self) -> "RatFun":
        if self.is_zero():
            raise ZeroDivisionError("inverting zero RatFun")
        return RatFun._reduced(self.den, self.num)

    def __pow__(self, n: int) -> "RatFun":
        if n < 0:
            return self.inverse() ** (-n)
        out = RatFun(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, DiffPoly)):
            other = RatFun.coerce(other)
        if not isinstance(other, RatFun):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __repr__(self) -> str:
        from .grammar import format_ratfun
        return f"RatFun({format_ratfun(self)})"

    # -- differential structure -------------------------------------------------

    def _quotient_rule(self, dnum: DiffPoly, dden: DiffPoly) -> "RatFun":
        """(n/d)' = (n'd - nd')/d^2 with component-level cancellation."""
        g = poly_gcd(self.den, dden)
        e = self.den if g.is_one() else _poly_divexact(self.den, g)
        w = dden if g.is_one() else _poly_divexact(dden, g)
        t = dnum * e - self.num * w
        if t.is_zero():
            return RatFun(0)
        r1 = poly_gcd(t, e)
        den2 = e if r1.is_one() else _poly_divexact(e, r1)
        t = t if r1.is_one() else _poly_divexact(t, r1)
        r2 = poly_gcd(t, self.den)
        den1 = self.den if r2.is_one() else _poly_divexact(self.den, r2)
        t = t if r2.is_one() else _poly_divexact(t, r2)
        return RatFun._reduced(t, den1 * den2)

    def total_derivative(self) -> "RatFun":
        if self.den.is_one():
            return RatFun._reduced(self.num.total_derivative(), DiffPoly.const(1))
        return self._quotient_rule(self.num.total_derivative(),
                                   self.den.total_derivative())

    def d(self, n: int = 1) -> "RatFun":
        r = self
        for _ in range(n):
            r = r.total_derivative()
        return r

    def partial(self, name: str, order: int) -> "RatFun":
        if self.den.is_one():
            return RatFun._reduced(self.num.partial(name, order), DiffPoly.const(1))
        return self._quotient_rule(self.num.partial(name, order),
                                   self.den.partial(name, order))

    def top_order(self, name: Optional[str] = None) -> Optional[int]:
        orders = [o for o in (self.num.top_order(name), self.den.top_order(name))
                  if o is not None]
        return max(orders) if orders else None


# -- parity grading -----------------------------------------------------------


class Grading:
    """Z/2 grading: each indeterminate's base gets a parity, the derivative is odd."""

    def __init__(self, parities: Dict[str, str]):
        self.parities = {}
        for name, p in parities.items():
            if p not in ("even", "odd"):
                raise ValueError(f"parity must be 'even' or 'odd', got {p!r}")
            self.parities[name] = 0 if p == "even" else 1

    def base_parity(self, name: str) -> int:
        if name not in self.parities:
            raise ValueError(f"grading does not assign a parity to {name!r}")
        return self.parities[name]

    def of_monomial(self, m: Monomial) -> int:
        return sum(e * (self.base_parity(v[1]) + v[0]) for v, e in m) % 2

    def of_poly(self, f: DiffPoly) -> Optional[int]:
        """0 (even), 1 (odd), or None for mixed; zero counts as both, reported 0."""
        seen = {self.of_monomial(m) for m in f.terms}
        if len(seen) > 1:
            return None
        return seen.pop() if seen else 0

    def of_ratfun(self, r: RatFun) -> Optional[int]:
        pn, pd = self.of_poly(r.num), self.of_poly(r.den)
        if pn is None or pd is None:
            return None
        return (pn - pd) % 2


def parity_of(f, grading: Grading) -> str:
    """Classify a function as 'even', 'odd' or 'mixed' under the given grading."""
    p = grading.of_ratfun(f) if isinstance(f, RatFun) else grading.of_poly(
        DiffPoly.coerce(f))
    return "mixed" if p is None else ("even" if p == 0 else "odd")


# -- Q-linear reduction -------------------------------------------------------


def _poly_vectors(fs: Sequence[DiffPoly]):
    monomials = sorted({m for f in fs for m in f.terms}, reverse=True)
    index = {m: i for i, m in enumerate(monomials)}
    vectors = []
    for f in fs:
        v = [Fraction(0)] * len(monomials)
        for m, c in f.terms.items():
            v[index[m]] = c
        vectors.append(v)
    return monomials, vectors


def _rref(rows: List[List[Fraction]]):
    """Reduced row echelon form; returns (rref_rows, pivot_columns)."""
    rows = [list(r) for r in rows]
    pivots: List[int] = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot_row = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                factor = rows[i][col]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _solve_in_span(basis_vectors: List[List[Fraction]], target: List[Fraction]):
    """Coordinates of target in the span of basis_vectors, or None."""
    if not basis_vectors:
        return [] if not any(target) else None
    ncols = len(target)
    # Gaussian elimination on the transposed system
    rows = [list(bv) + [Fraction(0)] * 0 for bv in basis_vectors]
    coords = [Fraction(0)] * len(basis_vectors)
    residual = list(target)
    work = [list(r) for r in rows]
    used = [False] * len(work)
    for col in range(ncols):
        if not residual[col]:
            continue
        pivot = None
        for i, row in enumerate(work):
            if used[i]:
                continue
            lead = next((j for j, x in enumerate(row) if x), None)
            if lead == col:
                pivot = i
                break
        if pivot is None:
            return None
        factor = residual[col] / work[pivot][col]
        coords[pivot] += factor
        residual = [x - factor * y for x, y in zip(residual, work[pivot])]
        used[pivot] = True
    if any(residual):
        return None
    return coords


def constant_linear_basis(fs: Sequence):
    """Q-linear reduction of functions viewed as vectors in the monomial basis.

    Accepts DiffPoly or RatFun inputs.  Returns (basis, coords) with each
    input equal to sum(coords[i][j] * basis[j]); the basis is the canonical
    reduced echelon basis of the span, so it only depends on the span itself.
    """
    fs = list(fs)
    if not fs:
        return [], []
    rational = any(isinstance(f, RatFun) and not f.is_polynomial() for f in fs)
    if rational:
        rats = [RatFun.coerce(f) for f in fs]
        den = DiffPoly.const(1)
        for r in rats:
            den = poly_lcm(den, r.den)
        polys = [(r * den).as_diffpoly() for r in rats]
    else:
        polys = [f.as_diffpoly() if isinstance(f, RatFun) else DiffPoly.coerce(f)
                 for f in fs]
        den = DiffPoly.const(1)
    monomials, vectors = _poly_vectors(polys)
    rref_rows, _ = _rref([v for v in vectors if any(v)])
    basis_polys = [DiffPoly({m: c for m, c in zip(monomials, row) if c})
                   for row in rref_rows]
    coords = []
    for v in vectors:
        c = _solve_in_span(rref_rows, v)
        if c is None:
            raise AssertionError("input escaped its own span")
        coords.append(c)
    if rational:
        basis = [RatFun(b, den) for b in basis_polys]
    else:
        basis = basis_polys
    return basis, coords


def require_independent(fs: Sequence[DiffPoly]) -> None:
    basis, _ = constant_linear_basis(fs)
    if len(basis) != len(list(fs)):
        raise DependentInput("functions are linearly dependent over Q")
