"""Exponent arithmetic and numerical checks of the multiplicative laws of energies.

Every energy E_{p,q} is predicted to behave like ln^{q-p} T, so products and
powers of energies are governed by integer exponent arithmetic.  The
numerical checks below compare measured energies with what that arithmetic
predicts and report the residual; none of them asserts convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .energy import EnergyRecord, mean_value_points
from .ladder import LadderTable

LAWS = ("generator", "product", "unit", "inverse", "equivalence", "factorization")


@dataclass(frozen=True)
class ExponentIndex:
    p: int
    q: int

    @property
    def exponent(self) -> int:
        return self.q - self.p

    def validate(self, k: int) -> "ExponentIndex":
        if not (1 <= self.p <= k and 1 <= self.q <= k):
            raise ValueError(f"indices ({self.p},{self.q}) outside 1..{k}")
        return self


def generator_exponent(p: int, q: int, P: int, Q: int) -> Fraction:
    if P == Q:
        raise ValueError("generator needs P != Q")
    return Fraction(q - p, Q - P)


def product_exponent(p1: int, q1: int, p2: int, q2: int, P: int, Q: int) -> Fraction:
    if P == Q:
        raise ValueError("generator needs P != Q")
    return Fraction(q1 + q2 - (p1 + p2), Q - P)


def closure_ok(p1: int, q1: int, p2: int, q2: int, k: int) -> bool:
    """Whether the product (p1,q1) x (p2,q2) stays inside the index range for k."""
    e = q1 + q2 - (p1 + p2)
    return -k + 1 <= e <= k - 1


def symbolic_inverse(p: int, q: int) -> dict:
    """Exponent bookkeeping for E_{p,q} * E_{q,p}, usable at any index size."""
    a, b = ExponentIndex(p, q), ExponentIndex(q, p)
    k = max(p, q)
    return {"p": p, "q": q, "exponent": a.exponent, "inverse_exponent": b.exponent,
            "sum": a.exponent + b.exponent, "closure_ok": closure_ok(p, q, q, p, k)}


@dataclass
class AlgebraReport:
    law: str
    inputs: list
    lhs: float
    rhs: float
    closure_ok: bool = True
    exponent: Fraction | None = None
    closure_ok_k0: bool | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    @property
    def residual(self) -> float:
        return abs(self.lhs / self.rhs - 1.0)

    def in_band(self, lo: float = 0.5, hi: float = 2.0) -> bool:
        return lo <= self.ratio <= hi

    def to_dict(self) -> dict:
        return {"law": self.law, "inputs": self.inputs, "lhs": self.lhs, "rhs": self.rhs,
                "ratio": self.ratio, "residual": self.residual, "closure_ok": self.closure_ok,
                "closure_ok_k0": self.closure_ok_k0,
                "exponent": None if self.exponent is None else str(self.exponent),
                **self.extra}


def _ref(rec: EnergyRecord) -> dict:
    return {"p": rec.p, "q": rec.q, "T": rec.T}


def generator_check(rec: EnergyRecord, gen: EnergyRecord) -> AlgebraReport:
    """E_{p,q} against E_{P,Q}^((q-p)/(Q-P))."""
    e = generator_exponent(rec.p, rec.q, gen.p, gen.q)
    return AlgebraReport("generator", [_ref(rec), _ref(gen)], rec.value,
                         gen.value ** float(e), exponent=e)


def product_check(rec1: EnergyRecord, rec2: EnergyRecord, gen: EnergyRecord,
                  k: int, k0: int) -> AlgebraReport:
    e = product_exponent(rec1.p, rec1.q, rec2.p, rec2.q, gen.p, gen.q)
    return AlgebraReport(
        "product", [_ref(rec1), _ref(rec2), _ref(gen)], rec1.value * rec2.value,
        gen.value ** float(e), exponent=e,
        closure_ok=closure_ok(rec1.p, rec1.q, rec2.p, rec2.q, k),
        closure_ok_k0=closure_ok(rec1.p, rec1.q, rec2.p, rec2.q, k0))


def unit_check(records: list[EnergyRecord]) -> list[AlgebraReport]:
    """Each unit energy against 1, then every pair against each other."""
    for r in records:
        if r.p != r.q:
            raise ValueError(f"record ({r.p},{r.q}) is not a unit energy")
    out = [AlgebraReport("unit", [_ref(r)], r.value, 1.0, exponent=Fraction(0)) for r in records]
    for a, b in combinations(records, 2):
        out.append(AlgebraReport("equivalence", [_ref(a), _ref(b)], a.value, b.value,
                                 exponent=Fraction(0)))
    return out


def inverse_check(rec: EnergyRecord, inv: EnergyRecord) -> AlgebraReport:
    if (inv.p, inv.q) != (rec.q, rec.p):
        raise ValueError(f"({inv.p},{inv.q}) is not the inverse index of ({rec.p},{rec.q})")
    return AlgebraReport("inverse", [_ref(rec), _ref(inv)], rec.value * inv.value, 1.0,
                         exponent=Fraction(0))


def factorization_check(table: LadderTable, rec: EnergyRecord, gen: EnergyRecord, *,
                        exact_tol: float = 1e-6) -> AlgebraReport:
    """Generator law with both energies replaced by their mean-value forms.

    ``extra["exact_ok"]`` records whether each mean-value form reproduces its
    energy to ``exact_tol``.
    """
    e = generator_exponent(rec.p, rec.q, gen.p, gen.q)
    mv1 = mean_value_points(table, rec)
    mv2 = mean_value_points(table, gen)
    lhs = mv1.reconstructed
    rhs = mv2.reconstructed ** float(e)
    exact = max(mv1.residual, mv2.residual)
    return AlgebraReport("factorization", [_ref(rec), _ref(gen)], lhs, rhs, exponent=e,
                         extra={"c1": mv1.c1, "c2": mv2.c1, "mean_value_residual": exact,
                                "exact_ok": bool(exact <= exact_tol)})


def law_reports(records: dict, k: int, k0: int, gen_index: tuple[int, int] | None = None) -> list[AlgebraReport]:
    """All algebra reports for one T, given records keyed by (p, q) for p, q <= k."""
    out: list[AlgebraReport] = []
    if gen_index is None:
        gen_index = (1, 2) if k >= 2 else None
    if gen_index is not None:
        gen = records[gen_index]
        for (p, q), rec in sorted(records.items()):
            out.append(generator_check(rec, gen))
        keys = sorted(records)
        for i, a in enumerate(keys):
            for b in keys[i:]:
                out.append(product_check(records[a], records[b], gen, k, k0))
    out.extend(unit_check([records[(p, p)] for p in range(1, k + 1)]))
    for p in range(1, k + 1):
        for q in range(p + 1, k + 1):
            out.append(inverse_check(records[(p, q)], records[(q, p)]))
    return out


def log_exponent(value: float, T: float) -> float:
    """The measured exponent x with value = ln^x T."""
    return math.log(value) / math.log(math.log(T))
