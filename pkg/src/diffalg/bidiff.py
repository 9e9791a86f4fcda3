"""Bidifferential operators M(F, G) = sum M_kl F^(k) G^(l).

Entries are indexed by (k, l): k differentiates the first slot, l the second.
Freezing the first slot at a function F yields the differential operator
M_F = sum M_kl F^(k) D^l, and left division by a differential operator runs
on the second-slot degree exactly as in the uniqueness statement M = B*P + N
with d1(N) < deg B.
"""

from __future__ import annotations

from math import comb
from typing import Dict, Optional, Tuple

from .jets import DiffPoly, RatFun
from .operators import DiffOp


class BiDiffOp:
    """Sparse grid of RatFun entries; the zero operator has no entries."""

    __slots__ = ("entries",)

    def __init__(self, entries: Optional[Dict[Tuple[int, int], RatFun]] = None):
        self.entries: Dict[Tuple[int, int], RatFun] = {}
        if entries:
            for kl, c in entries.items():
                c = RatFun.coerce(c)
                if not c.is_zero():
                    self.entries[kl] = c

    @staticmethod
    def zero() -> "BiDiffOp":
        return BiDiffOp()

    def is_zero(self) -> bool:
        return not self.entries

    def d1(self) -> Optional[int]:
        """Largest second-slot power: the operator degree of M_F for generic F."""
        return max((l for _, l in self.entries), default=None)

    def d2(self) -> Optional[int]:
        return max((k for k, _ in self.entries), default=None)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiDiffOp):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(frozenset(self.entries.items()))

    def __add__(self, other: "BiDiffOp") -> "BiDiffOp":
        entries = dict(self.entries)
        for kl, c in other.entries.items():
            s = entries.get(kl, RatFun(0)) + c
            if s.is_zero():
                entries.pop(kl, None)
            else:
                entries[kl] = s
        return BiDiffOp(entries)

    def __neg__(self) -> "BiDiffOp":
        return BiDiffOp({kl: -c for kl, c in self.entries.items()})

    def __sub__(self, other: "BiDiffOp") -> "BiDiffOp":
        return self + (-other)

    def __repr__(self) -> str:
        from .grammar import format_ratfun
        if not self.entries:
            return "BiDiffOp(0)"
        body = ", ".join(f"{kl}: {format_ratfun(c)}"
                         for kl, c in sorted(self.entries.items()))
        return f"BiDiffOp({{{body}}})"


def bi_apply(m: BiDiffOp, f, g):
    """M(F, G) = sum M_kl F^(k) G^(l)."""
    f = RatFun.coerce(f)
    g = RatFun.coerce(g)
    df: Dict[int, RatFun] = {}
    dg: Dict[int, RatFun] = {}
    out = RatFun(0)
    for (k, l), c in m.entries.items():
        if k not in df:
            df[k] = f.d(k)
        if l not in dg:
            dg[l] = g.d(l)
        out = out + c * df[k] * dg[l]
    return out


def slot_first(m: BiDiffOp, f) -> DiffOp:
    """M_F = sum M_kl F^(k) D^l as a differential operator."""
    f = RatFun.coerce(f)
    coeffs: Dict[int, RatFun] = {}
    df: Dict[int, RatFun] = {}
    for (k, l), c in m.entries.items():
        if k not in df:
            df[k] = f.d(k)
        s = coeffs.get(l, RatFun(0)) + c * df[k]
        if s.is_zero():
            coeffs.pop(l, None)
        else:
            coeffs[l] = s
    return DiffOp(coeffs)


def slot_second(m: BiDiffOp, g) -> DiffOp:
    """M^G = sum M_kl G^(l) D^k."""
    g = RatFun.coerce(g)
    coeffs: Dict[int, RatFun] = {}
    dg: Dict[int, RatFun] = {}
    for (k, l), c in m.entries.items():
        if l not in dg:
            dg[l] = g.d(l)
        s = coeffs.get(k, RatFun(0)) + c * dg[l]
        if s.is_zero():
            coeffs.pop(k, None)
        else:
            coeffs[k] = s
    return DiffOp(coeffs)


def compose_left(b: DiffOp, m: BiDiffOp) -> BiDiffOp:
    """(BM)(F, G) = B(M(F, G)); the Leibniz expansion hits both slots."""
    entries: Dict[Tuple[int, int], RatFun] = {}
    for j, bj in b.coeffs.items():
        for (k, l), c in m.entries.items():
            # expand D^j (c F^(k)) D^l term by term
            for n in range(j + 1):
                for i in range(n + 1):
                    coeff = bj * c.d(n - i) * (comb(j, n) * comb(n, i))
                    key = (k + i, j - n + l)
                    s = entries.get(key, RatFun(0)) + coeff
                    if s.is_zero():
                        entries.pop(key, None)
                    else:
                        entries[key] = s
    return BiDiffOp(entries)


def compose_right(m: BiDiffOp, b: DiffOp) -> BiDiffOp:
    """(MB)(F, G) = M(F, B(G)): acts through the second slot."""
    entries: Dict[Tuple[int, int], RatFun] = {}
    for (k, l), c in m.entries.items():
        for j, bj in b.coeffs.items():
            for n in range(l + 1):
                coeff = c * bj.d(n) * comb(l, n)
                key = (k, l - n + j)
                s = entries.get(key, RatFun(0)) + coeff
                if s.is_zero():
                    entries.pop(key, None)
                else:
                    entries[key] = s
    return BiDiffOp(entries)


def left_divide_bidiff(m: BiDiffOp, b: DiffOp) -> Tuple[BiDiffOp, BiDiffOp]:
    """Unique (P, N) with M = B*P + N and d1(N) < deg B."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero operator")
    deg_b = b.degree()
    lc = b.leading_coefficient()
    quotient = BiDiffOp.zero()
    rest = m
    while not rest.is_zero() and rest.d1() >= deg_b:
        col = rest.d1()
        piece = BiDiffOp({(k, col - deg_b): c / lc
                          for (k, l), c in rest.entries.items() if l == col})
        quotient = quotient + piece
        rest = rest - compose_left(b, piece)
    return quotient, rest


def is_skewsymmetric(m: BiDiffOp) -> bool:
    """True iff M(F, G) + M(G, F) vanishes identically in fresh indeterminates."""
    f_name, g_name = _fresh_names(m)
    f = DiffPoly.jet(f_name, 0)
    g = DiffPoly.jet(g_name, 0)
    return (bi_apply(m, f, g) + bi_apply(m, g, f)).is_zero()


def _fresh_names(m: BiDiffOp) -> Tuple[str, str]:
    used = set()
    for c in m.entries.values():
        used.update(c.num.indets())
        used.update(c.den.indets())
    candidates = [n for n in "FGHKLMNPQRSTW" if n not in used]
    return candidates[0], candidates[1]


def frechet_of_op(a: DiffOp, name: str = "u") -> BiDiffOp:
    """The Frechet derivative of an operator: entries (k, l) -> da_k/du^(l)."""
    entries: Dict[Tuple[int, int], RatFun] = {}
    for k, c in a.coeffs.items():
        top = c.top_order(name)
        if top is None:
            continue
        for l in range(top + 1):
            p = c.partial(name, l)
            if not p.is_zero():
                entries[(k, l)] = p
    return BiDiffOp(entries)
