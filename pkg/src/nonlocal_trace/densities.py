"""Pointwise densities: canonical-trace finite part TR_x, residue density
res_x and the log-residue density res_{x,0}(A log P), plus parity tests."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .symbol_core import (
    ClassicalSymbol,
    LogPolyhomSymbol,
    Scalar,
    SymbolError,
    sphere_moment,
    symbol_product,
)
from .symbol_core.angular import vanishes_on_sphere
from .symbol_core.scalar import ssum


def dslash(n: int) -> Scalar:
    """(2 pi)^{-n}; the only place the normalization is introduced."""
    return Scalar.exact(Fraction(1, 2**n), -n)


def _branch(degree: Fraction, n: int) -> str:
    if degree > -n:
        return "above"
    if degree == -n:
        return "critical"
    return "below"


def _term_finite_part(degree: Fraction, K: int, n: int, moment: Scalar) -> Scalar:
    s = degree + n
    if s == 0:
        return moment * Scalar.exact(Fraction(1, K))
    # above: int_{|xi|<=1} (a - a^h);  below: int_{R^n} a.  Same closed form.
    return moment * Scalar.exact(Fraction(1) / (s + K) - Fraction(1) / s)


@dataclass
class TermContribution:
    degree: Fraction
    branch: str
    K: int
    value: Scalar

    def to_json(self) -> dict:
        return {"degree": str(self.degree), "branch": self.branch, "K": self.K, "value": self.value.to_json()}


@dataclass
class DensityReport:
    n: int
    M: int
    tr_x: Scalar
    res_x: Scalar
    res_x0_log: Scalar | None = None
    terms: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "M": self.M,
            "tr_x": self.tr_x.to_json(),
            "res_x": self.res_x.to_json(),
            "terms": [t.to_json() for t in self.terms],
        }
        if self.res_x0_log is not None:
            out["res_x0_log"] = self.res_x0_log.to_json()
        return out


def finite_part_terms(a: ClassicalSymbol) -> list[TermContribution]:
    n = a.n
    rows = []
    for t in a.terms:
        value = dslash(n) * _term_finite_part(t.degree, t.K, n, sphere_moment(t.angular))
        rows.append(TermContribution(t.degree, _branch(t.degree, n), t.K, value))
    return rows


def finite_part(a: ClassicalSymbol) -> Scalar:
    """Hadamard finite-part integral TR_x(A) of the realized symbol."""
    return ssum(row.value for row in finite_part_terms(a))


@dataclass
class RadiusExpansion:
    """int_{|xi|<=R} a dxi-bar = sum coeff * R^power * (log R)^log_power."""

    terms: dict

    def constant(self) -> Scalar:
        return self.terms.get((Fraction(0), 0), Scalar.zero())

    def __call__(self, R: float) -> float:
        import math

        return sum(float(c) * R ** float(p) * math.log(R) ** l for (p, l), c in self.terms.items())


def radius_expansion(a: ClassicalSymbol, orders: int | None = None) -> RadiusExpansion:
    """Closed-form large-R expansion of the ball integral.

    ``orders`` caps the number of non-constant R-terms kept (the constant
    and log terms are always kept).
    """
    n = a.n
    terms: dict = {}

    def add(key, v):
        terms[key] = terms.get(key, Scalar.zero()) + v

    for t in a.terms:
        mu = dslash(n) * sphere_moment(t.angular)
        s = t.degree + n
        # int_0^1 r^{s+K-1} dr
        add((Fraction(0), 0), mu * Scalar.exact(Fraction(1) / (s + t.K)))
        if s == 0:
            add((Fraction(0), 1), mu)
        else:
            # int_1^R r^{s-1} dr = (R^s - 1)/s
            add((s, 0), mu * Scalar.exact(Fraction(1) / s))
            add((Fraction(0), 0), -mu * Scalar.exact(Fraction(1) / s))
    terms = {k: v for k, v in terms.items() if not v.is_zero() or k == (Fraction(0), 0)}
    if orders is not None:
        powers = sorted((k for k in terms if k[0] != 0), key=lambda k: -k[0])
        for k in powers[orders:]:
            del terms[k]
    return RadiusExpansion(terms)


def finite_part_by_radius(a: ClassicalSymbol, orders: int | None = None) -> Scalar:
    """Constant term of the R -> infinity expansion of the ball integral."""
    return radius_expansion(a, orders).constant()


def residue_density(a: ClassicalSymbol) -> Scalar:
    """Residue density: sphere integral of tr a_{-n} (zero if absent)."""
    t = a.term(-a.n)
    if t is None:
        return Scalar.zero()
    return dslash(a.n) * sphere_moment(t.angular)


def residue0_log(a: ClassicalSymbol, logp: LogPolyhomSymbol) -> Scalar:
    """Sphere integral of the log-free degree -n component of a * logp."""
    if a.n != logp.n:
        raise SymbolError(f"dimension mismatch: {a.n} vs {logp.n}")
    if 1 not in (a.M, logp.M) and a.M != logp.M:
        raise SymbolError(f"matrix size mismatch: {a.M} vs {logp.M}")
    r = symbol_product(a, logp)
    pairs = r.extract(-a.n, 0)
    return dslash(a.n) * ssum(c * sphere_moment(ang) for c, ang in pairs)


def density_report(a: ClassicalSymbol, logp: LogPolyhomSymbol | None = None) -> DensityReport:
    rows = finite_part_terms(a)
    return DensityReport(
        n=a.n,
        M=a.M,
        tr_x=ssum(r.value for r in rows),
        res_x=residue_density(a),
        res_x0_log=None if logp is None else residue0_log(a, logp),
        terms=rows,
    )


# --- parity -----------------------------------------------------------------

def _angular_parity(poly) -> set:
    """Subset of {+1, -1}: signs s with p(-w) = s p(w) on the sphere."""
    out = set()
    if vanishes_on_sphere(poly.odd_part()):
        out.add(1)
    if vanishes_on_sphere(poly.even_part()):
        out.add(-1)
    return out


def parity_class(a: ClassicalSymbol) -> str:
    """'even-even', 'even-odd' or 'neither'."""
    if a.order is None:
        return "even-even"
    if a.order.denominator != 1:
        return "neither"
    even_even = even_odd = True
    for t in a.terms:
        d = int(t.degree)
        want_ee = 1 if d % 2 == 0 else -1
        for p in t.angular.diag:
            signs = _angular_parity(p)
            even_even &= want_ee in signs
            even_odd &= -want_ee in signs
    if even_even:
        return "even-even"
    if even_odd:
        return "even-odd"
    return "neither"
