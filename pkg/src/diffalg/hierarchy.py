"""The Lenard-Magri engine.

A hierarchy iterates symmetries S_{n+1} = L(S_n) from a seed taken out of the
non-local tail of L (or runs a pair (A, d) on potentials directly, as for
Burgers).  Each extension step is exact; the commutativity of the chain and
the arithmetic progression of differential orders are certified by explicit
recomputation, never assumed from the structure results that predict them.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .calculus import evo_apply, integrate, is_total_derivative, lie_bracket, potential
from .errors import DiffAlgError, NotInImage, NotVariational
from .jets import DiffPoly, Grading, RatFun, diff_order
from .operators import DiffOp
from .nonlocal_ops import (NonlocalOp, nl_apply, nl_power, parity_class,
                           to_fraction)

START_OFFSET_NOTE = ("chain starts at the seed S0 = A(F0) for F0 in Ker B, one "
                     "application past the kernel itself")


def seeds(l: NonlocalOp) -> List[DiffPoly]:
    """The p_i of the canonical non-local tail; empty for local operators."""
    if l.depth2:
        raise DiffAlgError("seeds are defined for weakly non-local operators")
    out = []
    for p, _ in l.depth1:
        if not p.is_polynomial():
            raise DiffAlgError("seed is not polynomial; cannot start a chain")
        out.append(p.as_diffpoly())
    return out


@dataclass
class Hierarchy:
    """A chain S_0..S_N with S_{k+1} = L(S_k), plus certification state."""

    operator: NonlocalOp
    seeds: List[DiffPoly]
    chain: List[DiffPoly]
    potentials: List[Optional[DiffPoly]]
    orders: List[Optional[int]]
    grading: Optional[Grading] = None
    pair: Optional[Tuple[DiffOp, DiffOp]] = None
    commuting_verified: bool = False
    violations: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @staticmethod
    def from_operator(l: NonlocalOp, seed: Optional[DiffPoly] = None,
                      grading: Optional[Grading] = None) -> "Hierarchy":
        found = seeds(l)
        if seed is None:
            if len(found) != 1:
                raise DiffAlgError(
                    "operator does not determine a unique seed; pass one")
            seed = found[0]
        h = Hierarchy(operator=l, seeds=found, chain=[seed],
                      potentials=[None], orders=[diff_order(seed)],
                      grading=grading, notes=[START_OFFSET_NOTE])
        if grading is not None:
            pc = parity_class(l, grading)
            if not (pc.member or pc.member_switched):
                h.notes.append("operator is outside the parity classes; the "
                               "existence guarantee for the chain does not apply")
        return h

    @staticmethod
    def from_pair(a: DiffOp, b: DiffOp, start: DiffPoly,
                  grading: Optional[Grading] = None) -> "Hierarchy":
        """Pair form: iterate potentials H with B(H_next) = A(H); needs B = d."""
        if b != DiffOp.d():
            raise DiffAlgError("the pair engine only solves B = d exactly")
        from .nonlocal_ops import from_fraction_pair
        l = from_fraction_pair(a, b)
        s0 = b.apply(start)
        h = Hierarchy(operator=l, seeds=seeds(l), chain=[DiffPoly.coerce(s0)],
                      potentials=[DiffPoly.coerce(start)],
                      orders=[diff_order(s0)], grading=grading, pair=(a, b))
        return h

    # -- growth -------------------------------------------------------------

    def extend(self, steps: int) -> "Hierarchy":
        """Append the next symmetries; NotInImage surfaces as a hypothesis report."""
        for _ in range(steps):
            if self.pair is not None:
                a, _ = self.pair
                image = a.apply(self.potentials[-1])
                image = image.as_diffpoly() if isinstance(image, RatFun) else image
                try:
                    h_next = integrate(image)
                except DiffAlgError as exc:
                    raise NotInImage(
                        f"pair step left the image of d: {exc}") from exc
                self.potentials.append(h_next)
                s_next = image
            else:
                tip = self.chain[-1]
                try:
                    s_next = nl_apply(self.operator, tip)
                except NotInImage as exc:
                    from .grammar import format_poly
                    raise NotInImage(
                        "Lenard-Magri hypothesis violated at step "
                        f"{len(self.chain)}: {exc}", index=exc.index,
                        product=exc.product) from exc
                if isinstance(s_next, RatFun):
                    s_next = s_next.as_diffpoly()
                self.potentials.append(self._potential_for(s_next))
            self.chain.append(s_next)
            self.orders.append(diff_order(s_next))
            self.commuting_verified = False
        return self

    def _potential_for(self, s: DiffPoly) -> Optional[DiffPoly]:
        """F with B(F) = S, for the single-q case where B = (1/q) d."""
        if len(self.operator.depth1) != 1:
            return None
        _, q = self.operator.depth1[0]
        product = q * s
        if not product.is_polynomial():
            return None
        try:
            return integrate(product.as_diffpoly())
        except DiffAlgError:
            return None

    # -- certification ------------------------------------------------------

    def verify_commuting(self, jobs: int = 1) -> "CommutationReport":
        pairs = [(i, j) for i in range(len(self.chain))
                 for j in range(i + 1, len(self.chain))]

        def check(ij):
            i, j = ij
            residual = lie_bracket(self.chain[i], self.chain[j])
            return (i, j, residual)

        if jobs > 1 and len(pairs) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(check, pairs))
        else:
            results = [check(ij) for ij in pairs]
        bad = [(i, j, r) for i, j, r in results if not r.is_zero()]
        self.commuting_verified = not bad
        report = CommutationReport(
            pairs_checked=len(pairs),
            all_zero=not bad,
            violations=[(i, j, r) for i, j, r in bad])
        return report

    def order_growth(self) -> "OrderGrowthReport":
        """Certify orders[k+1] = orders[k] + deg L beyond the coefficient bound."""
        m = 0
        for coeff in self.operator.local.coeffs.values():
            o = diff_order(coeff)
            if o is not None:
                m = max(m, o)
        for p, q in self.operator.depth1:
            for part in (p, q):
                o = diff_order(part)
                if o is not None:
                    m = max(m, o)
        deg = self.operator.degree()
        certified = []
        failures = []
        for k in range(len(self.orders) - 1):
            if self.orders[k] is None or self.orders[k] <= m:
                continue
            expected = self.orders[k] + (deg or 0)
            if self.orders[k + 1] == expected:
                certified.append(k)
            else:
                failures.append((k, self.orders[k + 1], expected))
        threshold_crossed = any(o is not None and o > m for o in self.orders)
        return OrderGrowthReport(coefficient_order_bound=m,
                                 degree=deg,
                                 certified_steps=certified,
                                 failures=failures,
                                 threshold_crossed=threshold_crossed)

    def scheme_consistency(self) -> bool:
        """B(F_{n+1}) = A(F_n) for the recovered potentials, checked exactly."""
        if self.pair is not None:
            a, b = self.pair
        else:
            a, b = to_fraction(self.operator)
        for n in range(len(self.chain) - 1):
            f_next = self.potentials[n + 1]
            if f_next is None:
                return False
            lhs = b.apply(f_next)
            lhs = lhs.as_diffpoly() if isinstance(lhs, RatFun) else lhs
            if lhs != self.chain[n + 1]:
                return False
            if self.potentials[n] is not None:
                rhs = a.apply(self.potentials[n])
                rhs = rhs.as_diffpoly() if isinstance(rhs, RatFun) else rhs
                if rhs != self.chain[n + 1]:
                    return False
        return True

    # -- serialization ---------------------------------------------------------

    def report(self, verified: Optional["CommutationReport"] = None) -> dict:
        from .grammar import format_poly
        data = {
            "chain": [format_poly(s) for s in self.chain],
            "orders": self.orders,
            "pairwise_zero": verified.all_zero if verified else None,
            "violations": ([f"{{S_{i}, S_{j}}} = {format_poly(r)}"
                            for i, j, r in verified.violations] if verified else []),
        }
        if self.notes:
            data["notes"] = list(self.notes)
        return data

    def report_json(self, verified: Optional["CommutationReport"] = None) -> str:
        return json.dumps(self.report(verified), indent=2)


@dataclass(frozen=True)
class CommutationReport:
    pairs_checked: int
    all_zero: bool
    violations: List[Tuple[int, int, DiffPoly]]


@dataclass(frozen=True)
class OrderGrowthReport:
    coefficient_order_bound: int
    degree: Optional[int]
    certified_steps: List[int]
    failures: List[Tuple[int, Optional[int], int]]
    threshold_crossed: bool


# -- powers and conserved densities ------------------------------------------------


@dataclass(frozen=True)
class DensityRecord:
    """A conserved density extracted from one tail pair of L^k."""

    power: int
    index: int
    q: DiffPoly
    rho: DiffPoly
    verified_against: Tuple[int, ...]
    trivial: bool


def conserved_densities(l: NonlocalOp, k: int,
                        chain: Sequence[DiffPoly] = ()) -> List[DensityRecord]:
    """Densities rho with delta(rho) = q for every tail pair of L^k.

    Each density is verified conserved along the supplied chain members:
    X_S(rho) must be a total derivative.  A q that is not a variational
    derivative refutes the expected structure and raises.
    """
    lk = nl_power(l, k)
    records = []
    for i, (_, q) in enumerate(lk.depth1):
        if not q.is_polynomial():
            raise NotVariational(f"q_{i} of the power is not polynomial")
        q_poly = q.as_diffpoly()
        rho = potential(q_poly)
        verified = []
        for n, s in enumerate(chain):
            if not is_total_derivative(evo_apply(s, rho)):
                raise DiffAlgError(
                    f"density rho_{i} is not conserved along chain member {n}")
            verified.append(n)
        records.append(DensityRecord(power=k, index=i, q=q_poly, rho=rho,
                                     verified_against=tuple(verified),
                                     trivial=is_total_derivative(rho)))
    return records


def density_report(records: Sequence[DensityRecord]) -> dict:
    from .grammar import format_poly
    return {
        "densities": [{
            "power": r.power,
            "index": r.index,
            "q": format_poly(r.q),
            "rho": format_poly(r.rho),
            "verified_against": list(r.verified_against),
            "trivial": r.trivial,
        } for r in records]
    }
