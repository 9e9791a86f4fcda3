"""Variational calculus on the jet ring.

Evolutionary vector fields, the Lie bracket on functions, the variational
derivative, constructive integration (the inverse of the total derivative on
its image), the homotopy potential, and Q-linear reduction modulo total
derivatives.  These are the primitives every decision procedure downstream
bottoms out in, so each one is exact and total-derivative identities are
enforced by construction, never by approximation.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import NotExact, NotSupported, NotVariational, VerificationFailed
from .jets import DiffPoly, RatFun, _rref


def evo_apply(f, g, name: str = "u"):
    """Apply the evolutionary vector field of f to g: sum d^n(f) * dg/du^(n).

    Only jets of the named indeterminate are differentiated; formal symbols
    such as F and G pass through untouched, which is what makes them usable
    as "for all F" placeholders.
    """
    if isinstance(g, RatFun) and g.is_polynomial():
        g = g.num
    rational = isinstance(g, RatFun)
    top = g.top_order(name)
    if top is None:
        return RatFun(0) if rational else DiffPoly.zero()
    if not isinstance(f, RatFun):
        f = DiffPoly.coerce(f)
    out = RatFun(0) if rational else DiffPoly.zero()
    dnf = f
    for n in range(top + 1):
        part = g.partial(name, n)
        if (not part.is_zero()) if rational else bool(part):
            out = out + part * dnf
        dnf = dnf.total_derivative()
    return out


def lie_bracket(f: DiffPoly, g: DiffPoly, name: str = "u") -> DiffPoly:
    """{f, g} = X_f(g) - X_g(f)."""
    return evo_apply(f, g, name) - evo_apply(g, f, name)


def variational_derivative(f: DiffPoly, name: str = "u") -> DiffPoly:
    """Euler operator: sum (-d)^n (df/du^(n))."""
    f = DiffPoly.coerce(f)
    top = f.top_order(name)
    if top is None:
        return DiffPoly.zero()
    out = DiffPoly.zero()
    for n in range(top + 1):
        term = f.partial(name, n)
        for _ in range(n):
            term = -term.total_derivative()
        out = out + term
    return out


# -- constructive integration ---------------------------------------------------


def _integrate_reduce(f: DiffPoly) -> Tuple[DiffPoly, DiffPoly]:
    """Peel total-derivative layers off f; returns (h, residual) with f = d(h) + residual.

    The residual is nonzero only when f is not a total derivative; by
    construction it is either a polynomial in order-0 jets alone or the first
    layer that fails the affine-linearity test.
    """
    h = DiffPoly.zero()
    rest = f
    guard = 0
    while not rest.is_zero():
        guard += 1
        if guard > 10_000:
            raise AssertionError("integration reduction failed to terminate")
        top = rest.top_order()
        if top == 0 or top is None:
            return h, rest
        var = max(v for m in rest.terms for v, _ in m if v[0] == top)
        layers = rest.as_univariate(var)
        if any(e not in (0, 1) for e in layers):
            return h, rest
        c1 = layers[1]
        c1_top = c1.top_order()
        if c1_top is not None and c1_top >= top:
            return h, rest
        below = (var[0] - 1, var[1])
        partial_h = DiffPoly.zero()
        for e, coeff in c1.as_univariate(below).items():
            if e == -1:
                raise NotSupported(
                    "antiderivative of a -1 Laurent exponent is not polynomial")
            mono = DiffPoly({((below, e + 1),): Fraction(1)})
            partial_h = partial_h + coeff * mono * Fraction(1, e + 1)
        h = h + partial_h
        rest = rest - partial_h.total_derivative()
    return h, DiffPoly.zero()


def integrate(f: DiffPoly) -> DiffPoly:
    """Return h with d(h) = f and zero constant term; raise NotExact otherwise."""
    f = DiffPoly.coerce(f)
    h, residual = _integrate_reduce(f)
    if not residual.is_zero():
        from .grammar import format_poly
        raise NotExact(
            f"not a total derivative; residual {format_poly(residual)}",
            residual=residual)
    return h


def is_total_derivative(f: DiffPoly) -> bool:
    f = DiffPoly.coerce(f)
    _, residual = _integrate_reduce(f)
    return residual.is_zero()


def potential(q: DiffPoly, name: str = "u") -> DiffPoly:
    """Homotopy inverse of the variational derivative.

    For a polynomial variational derivative q the density
    rho = sum over monomials m of q of u*m / (deg m + 1) satisfies
    delta(rho)/delta(u) = q; the result is re-checked before returning.
    """
    q = DiffPoly.coerce(q)
    if q.has_negative_exponent():
        raise NotSupported("potential requires a non-Laurent polynomial")
    from .operators import frechet
    d_q = frechet(q, name)
    if d_q != d_q.adjoint():
        raise NotVariational("Frechet derivative is not self-adjoint")
    rho = DiffPoly.zero()
    u = DiffPoly.jet(name, 0)
    for mono, coeff in q.terms.items():
        degree = sum(e for _, e in mono)
        rho = rho + u * DiffPoly({mono: coeff}) * Fraction(1, degree + 1)
    rho = rho - DiffPoly.const(rho.terms.get((), 0))
    if variational_derivative(rho, name) != q:
        raise VerificationFailed("homotopy potential failed its defining identity")
    return rho


# -- reduction modulo total derivatives -------------------------------------------


def basis_mod_total_derivatives(fs: Sequence[DiffPoly]):
    """Representatives of span{fs} independent modulo total derivatives.

    Returns (basis, coords, exact_parts): basis is a sublist of the inputs,
    and for every input i

        fs[i] = sum_j coords[i][j] * basis[j] + d(exact_parts[i]).

    Inputs must be true polynomials.  A combination lies in dV exactly when
    all its variational derivatives vanish and its constant residue is zero;
    both conditions are solved as Q-linear systems.
    """
    fs = [DiffPoly.coerce(f) for f in fs]
    for f in fs:
        if f.has_negative_exponent():
            raise NotSupported("basis_mod_total_derivatives needs polynomial inputs")
    indets = sorted({name for f in fs for name in f.indets()})
    deltas = [[variational_derivative(f, name) for name in indets] for f in fs]

    basis: List[DiffPoly] = []
    basis_deltas: List[List[DiffPoly]] = []
    coords: List[List[Fraction]] = []
    exact_parts: List[DiffPoly] = []

    for f, delta in zip(fs, deltas):
        solved = _reduce_against(f, delta, basis, basis_deltas, indets)
        if solved is None:
            basis.append(f)
            basis_deltas.append(delta)
            coords.append([Fraction(0)] * (len(basis) - 1) + [Fraction(1)])
            exact_parts.append(DiffPoly.zero())
        else:
            c, h = solved
            coords.append(c)
            exact_parts.append(h)
    width = len(basis)
    coords = [c + [Fraction(0)] * (width - len(c)) for c in coords]
    return basis, coords, exact_parts


def _reduce_against(f, delta, basis, basis_deltas, indets):
    """Solve f = sum c_j basis_j + d(h); returns (c, h) or None."""
    # Stage 1: match variational derivatives (a linear system over Q).
    all_delta_polys = [p for row in basis_deltas for p in row] + list(delta)
    monomials = sorted({m for p in all_delta_polys for m in p.terms}, reverse=True)
    lookup = {m: i for i, m in enumerate(monomials)}

    def vec(row: List[DiffPoly]) -> List[Fraction]:
        v = [Fraction(0)] * (len(monomials) * len(indets))
        for k, p in enumerate(row):
            base = k * len(monomials)
            for m, c in p.terms.items():
                v[base + lookup[m]] = c
        return v

    target = vec(delta)
    rows = [vec(row) for row in basis_deltas]
    if not rows:
        if any(target):
            return None
        particular: Optional[List[Fraction]] = []
        null_vectors: List[List[Fraction]] = []
    else:
        particular, null_vectors = _affine_solutions(rows, target)
        if particular is None:
            return None
    # Stage 2: within the affine solution space, kill the constant residue.
    def residue(coeffs: List[Fraction]) -> Tuple[DiffPoly, Fraction]:
        g = f
        for c, b in zip(coeffs, basis):
            if c:
                g = g - c * b
        h, r = _integrate_reduce(g)
        if not r.is_constant():
            raise AssertionError("delta-matched combination must reduce to a constant")
        return h, r.constant_value()

    h0, r0 = residue(particular)
    if r0 == 0:
        return particular, h0
    for k, nv in enumerate(null_vectors):
        shifted = [p + n for p, n in zip(particular, nv)] if particular else nv
        hk, rk = residue(shifted)
        slope = rk - r0
        if slope != 0:
            t = -r0 / slope
            solution = [p + t * n for p, n in zip(particular, nv)]
            h, r = residue(solution)
            if r != 0:
                raise AssertionError("residue elimination is linear and must succeed")
            return solution, h
    return None


def _affine_solutions(rows: List[List[Fraction]], target: List[Fraction]):
    """Solve sum c_j rows[j] = target; returns (particular, nullspace basis) or (None, [])."""
    n = len(rows)
    width = len(target)
    # Transpose into a standard linear system A c = target with A columns = rows.
    aug = []
    for col in range(width):
        aug.append([rows[j][col] for j in range(n)] + [target[col]])
    reduced, pivots = _rref(aug)
    # Check consistency: a pivot in the last column means no solution.
    if n in pivots:
        return None, []
    particular = [Fraction(0)] * n
    for row, p in zip(reduced, pivots):
        particular[p] = row[n]
    free = [j for j in range(n) if j not in pivots]
    null_vectors = []
    for fcol in free:
        v = [Fraction(0)] * n
        v[fcol] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[fcol]
        null_vectors.append(v)
    return particular, null_vectors
