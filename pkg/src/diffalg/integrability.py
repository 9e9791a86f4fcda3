"""Decision procedures for recursion, hereditariness and integrability.

Every verdict is a certificate: a positive answer carries the bidifferential
witnesses that re-substitute to exactly zero, a negative one carries the
nonzero remainder or residual operator that refutes the identity.  All
"for all F" quantifiers are realized with fresh formal indeterminates, never
with sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Dict, Optional, Tuple, Union

from .bidiff import (BiDiffOp, compose_left, compose_right, frechet_of_op,
                     is_skewsymmetric, left_divide_bidiff, slot_first)
from .errors import Unsupported, VerificationFailed
from .jets import DiffPoly, RatFun
from .operators import (DiffOp, FractionPair, frechet,
                        minimal_right_fraction)
from .nonlocal_ops import (NonlocalOp, from_fraction_pair, nl_mul, to_fraction,
                           twisted_lie)

FORMAL = "F"


@dataclass(frozen=True)
class Witness:
    """Skewsymmetric bidifferential witnesses for an integrable operator or pair."""

    m: BiDiffOp
    n: Optional[BiDiffOp] = None
    skew_checked: bool = False


@dataclass(frozen=True)
class Refutation:
    """What failed and the exact nonzero object that certifies the failure."""

    reason: str
    residual: object = None


@dataclass(frozen=True)
class Verdict:
    result: bool
    certificate: Union[Witness, Refutation, None] = None

    def __bool__(self) -> bool:
        return self.result


def _x_defect_part(a: DiffOp, b: DiffOp, name: str = "u") -> BiDiffOp:
    """The bidifferential operator with F-slot T_F = X_{A(F)}(B).

    Expanding X_{A(F)}(b_l) = sum_j d^j(A(F)) * db_l/du^(j) and
    d^j(a_k F^(k)) = sum_i binom(j, i) a_k^(j-i) F^(k+i) gives the entries.
    """
    entries: Dict[Tuple[int, int], RatFun] = {}
    partials = {}
    for l, bl in b.coeffs.items():
        top = bl.top_order(name)
        if top is None:
            continue
        for j in range(top + 1):
            p = bl.partial(name, j)
            if not p.is_zero():
                partials[(l, j)] = p
    for (l, j), p in partials.items():
        for k, ak in a.coeffs.items():
            dk = ak
            # d^j(a_k F^(k)) contributes a_k^(i) F^(k+j-i) with binom(j, i)
            for i in range(0, j + 1):
                coeff = p * dk * comb(j, i)
                key = (k + (j - i), l)
                s = entries.get(key, RatFun(0)) + coeff
                if s.is_zero():
                    entries.pop(key, None)
                else:
                    entries[key] = s
                dk = dk.total_derivative()
    return BiDiffOp(entries)


def lie_defect(a: DiffOp) -> BiDiffOp:
    """T with T_F = X_{A(F)}(A) - (D_A)_F A, the obstruction A must divide."""
    return _x_defect_part(a, a) - compose_right(frechet_of_op(a), a)


def _mixed_defect(a: DiffOp, b: DiffOp) -> BiDiffOp:
    """X_{A(F)}(B) + X_{B(F)}(A) - (D_A)_F B - (D_B)_F A."""
    return (_x_defect_part(a, b) + _x_defect_part(b, a)
            - compose_right(frechet_of_op(a), b)
            - compose_right(frechet_of_op(b), a))


def is_integrable_diffop(a: DiffOp) -> Verdict:
    """Left-divide the Lie defect by A; integrable iff the remainder vanishes."""
    if a.is_zero():
        raise ValueError("the zero operator has no integrability verdict")
    defect = lie_defect(a)
    quotient, remainder = left_divide_bidiff(defect, a)
    if not remainder.is_zero():
        return Verdict(False, Refutation(
            "Lie defect is not left-divisible by the operator",
            residual=remainder))
    if not is_skewsymmetric(quotient):
        raise VerificationFailed(
            "integrability witness failed skewsymmetry; the defect identity "
            "forces it, so this is an internal error")
    if compose_left(a, quotient) != defect:
        raise VerificationFailed("witness re-substitution did not reproduce "
                                 "the Lie defect")
    return Verdict(True, Witness(m=quotient, skew_checked=True))


def is_integrable_pair(a: DiffOp, b: DiffOp) -> Verdict:
    """The three-equation system: M for A, N for B, plus the mixed identity."""
    if a.is_zero() or b.is_zero():
        raise ValueError("integrable pairs need nonzero operators")
    va = is_integrable_diffop(a)
    if not va:
        return Verdict(False, Refutation(
            "first operator is not integrable",
            residual=va.certificate.residual))
    vb = is_integrable_diffop(b)
    if not vb:
        return Verdict(False, Refutation(
            "second operator is not integrable",
            residual=vb.certificate.residual))
    m, n = va.certificate.m, vb.certificate.m
    mixed = _mixed_defect(a, b)
    recombined = compose_left(a, n) + compose_left(b, m)
    residual = mixed - recombined
    if not residual.is_zero():
        return Verdict(False, Refutation(
            "mixed compatibility identity fails for the unique witnesses",
            residual=residual))
    return Verdict(True, Witness(m=m, n=n, skew_checked=True))


def _hereditary_sides(l: NonlocalOp, a: DiffOp, b: DiffOp) -> NonlocalOp:
    """LHS - RHS of the hereditary identity with a fresh formal indeterminate."""
    f = DiffPoly.jet(FORMAL, 0)
    da_f = slot_first(frechet_of_op(a), f)
    db_f = slot_first(frechet_of_op(b), f)
    af = a.apply(f)
    bf = b.apply(f)
    lhs = twisted_lie(l, da_f, af)
    inner = twisted_lie(l, db_f, bf)
    rhs = nl_mul(l, inner)
    return lhs - rhs


def is_hereditary(op: Union[NonlocalOp, FractionPair]) -> Verdict:
    """Exact test of the Nijenhuis identity in the depth-2 algebra."""
    if isinstance(op, FractionPair):
        if op.side != "right":
            raise Unsupported("hereditariness works on right fractions")
        pair = minimal_right_fraction(op.num, op.den)
        l = from_fraction_pair(pair.num, pair.den)
        a, b = pair.num, pair.den
    else:
        l = op
        if l.depth2:
            raise Unsupported("hereditariness is defined for weakly non-local "
                              "operators only")
        a, b = to_fraction(l)
    for coeff in list(l.local.coeffs.values()) + [x for pq in l.depth1 for x in pq]:
        if FORMAL in coeff.num.indets() + coeff.den.indets():
            raise Unsupported("operator coefficients collide with the formal slot")
    difference = _hereditary_sides(l, a, b)
    if difference.is_zero():
        return Verdict(True, None)
    return Verdict(False, Refutation(
        "hereditary identity residual is nonzero", residual=difference))


def is_integrable_wnl(l: NonlocalOp) -> Verdict:
    """Weakly non-local integrability: every q a variational derivative + hereditary."""
    if l.depth2:
        raise Unsupported("integrability of depth-2 operators is undefined")
    for i, (_, q) in enumerate(l.depth1):
        dq = frechet(q)
        if dq != dq.adjoint():
            from .grammar import format_ratfun
            return Verdict(False, Refutation(
                f"q = {format_ratfun(q)} not a variational derivative",
                residual=dq - dq.adjoint()))
    verdict = is_hereditary(l)
    if not verdict:
        return verdict
    if l.is_local() and not l.local.is_zero():
        # a hereditary local operator is automatically operator-integrable;
        # cross-check and surface its witness
        inner = is_integrable_diffop(l.local)
        if not inner:
            raise VerificationFailed(
                "hereditary local operator must be integrable")
        return Verdict(True, inner.certificate)
    return Verdict(True, None)


def hereditary_coefficient_bound(a: DiffOp) -> bool:
    """Necessary condition: every coefficient has differential order <= deg A + 1."""
    if a.is_zero():
        return True
    from .jets import diff_order
    bound = a.degree() + 1
    for coeff in a.coeffs.values():
        order = diff_order(coeff)
        if order is not None and order > bound:
            return False
    return True
