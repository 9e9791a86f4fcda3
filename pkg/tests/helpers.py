"""Shared random generators for the property suites.

Sizes follow the acceptance contract: jets up to order 4, degrees up to 3,
small term counts, exact rational coefficients.
"""

from fractions import Fraction
import random

from diffalg import DiffOp, DiffPoly, NonlocalOp, RatFun, BiDiffOp, jet


def rand_poly(rng: random.Random, max_order: int = 4, max_degree: int = 3,
              terms: int = 3, names=("u",), nonzero: bool = False) -> DiffPoly:
    out = DiffPoly.zero()
    for _ in range(rng.randint(1, terms)):
        coeff = Fraction(rng.randint(-3, 3))
        if coeff == 0:
            continue
        mono = DiffPoly.const(coeff)
        for _ in range(rng.randint(0, max_degree)):
            name = rng.choice(names)
            mono = mono * jet(name, rng.randint(0, max_order))
        out = out + mono
    if nonzero and out.is_zero():
        return jet(names[0], rng.randint(0, max_order))
    return out


def rand_ratfun(rng: random.Random, max_order: int = 2) -> RatFun:
    num = rand_poly(rng, max_order=max_order, max_degree=2, terms=2, nonzero=True)
    if rng.random() < 0.3:
        den = rand_poly(rng, max_order=max_order, max_degree=1, terms=1,
                        nonzero=True)
        return RatFun(num, den)
    return RatFun(num)


def rand_op(rng: random.Random, max_deg: int = 2, max_order: int = 2,
            rational: bool = False, nonzero: bool = True) -> DiffOp:
    coeffs = {}
    for k in range(rng.randint(0, max_deg) + 1):
        if rng.random() < 0.4:
            continue
        if rational and rng.random() < 0.25:
            coeffs[k] = rand_ratfun(rng, max_order=max_order)
        else:
            c = rand_poly(rng, max_order=max_order, max_degree=2, terms=2)
            if not c.is_zero():
                coeffs[k] = RatFun(c)
    op = DiffOp(coeffs)
    if nonzero and op.is_zero():
        return DiffOp({rng.randint(0, max_deg): RatFun(jet("u", 0))})
    return op


def rand_bidiff(rng: random.Random, max_k: int = 2, max_l: int = 2) -> BiDiffOp:
    entries = {}
    for _ in range(rng.randint(1, 4)):
        k, l = rng.randint(0, max_k), rng.randint(0, max_l)
        c = rand_poly(rng, max_order=2, max_degree=2, terms=2)
        if not c.is_zero():
            entries[(k, l)] = RatFun(c)
    return BiDiffOp(entries)


def rand_wnl(rng: random.Random, max_deg: int = 2, pairs: int = 1) -> NonlocalOp:
    local = rand_op(rng, max_deg=max_deg, max_order=2, nonzero=False)
    tail = []
    for _ in range(rng.randint(0, pairs)):
        p = rand_poly(rng, max_order=2, max_degree=2, terms=2, nonzero=True)
        q = rand_poly(rng, max_order=2, max_degree=2, terms=2, nonzero=True)
        tail.append((RatFun(p), RatFun(q)))
    return NonlocalOp(local, tuple(tail))
