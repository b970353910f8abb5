"""Classical and log-polyhomogeneous symbols with radial-times-angular
homogeneous terms (constant coefficients, diagonal matrix values)."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .angular import AngularPoly, Poly, constant_on_sphere, format_poly
from .scalar import Scalar


class SymbolError(ValueError):
    """Invalid symbol construction or unsupported symbol operation."""


def default_extension(degree: Fraction, n: int) -> int:
    """Smallest even K >= 0 with degree + K + n >= 1."""
    K = 0
    while degree + K + n < 1:
        K += 2
    return K


@dataclass(frozen=True)
class HomogeneousTerm:
    """``|xi|^degree * angular(xi/|xi|)`` for |xi| >= 1, tamed by ``|xi|^K``
    on the unit ball."""

    degree: Fraction
    angular: AngularPoly
    K: int | None = None
    log_power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "degree", Fraction(self.degree))
        n = self.angular.n
        if self.K is None:
            object.__setattr__(self, "K", default_extension(self.degree, n))
        if self.K < 0 or self.K % 2:
            raise SymbolError(f"extension exponent must be an even natural, got {self.K}")
        if self.degree + self.K + n < 1:
            raise SymbolError(
                f"extension K={self.K} leaves degree {self.degree} non-integrable at 0 (n={n})"
            )

    @property
    def n(self) -> int:
        return self.angular.n

    @property
    def M(self) -> int:
        return self.angular.M

    def radial(self, r):
        """Radial profile of the realized term."""
        r = np.asarray(r, dtype=float)
        d = float(self.degree)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = np.where(r > 0, r ** (d + self.K), 0.0 if d + self.K > 0 else 1.0)
            return np.where(r >= 1.0, r**d, inner)

    def evaluate(self, xi, homogeneous: bool = False):
        """Fiber-traced value at points ``xi`` of shape (..., n)."""
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(xi, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            omega = xi / r[..., None]
        ang = self.angular.trace().evaluate_many(omega)
        if homogeneous:
            return r ** float(self.degree) * ang
        return self.radial(r) * ang


class ClassicalSymbol:
    """Finite sum of homogeneous terms of degrees sigma, sigma-1, ...

    Terms of equal degree are merged; gaps are allowed; the remainder is
    identically zero.
    """

    def __init__(self, n: int, terms: Iterable[HomogeneousTerm] = (), order=None, M: int | None = None):
        if n < 1:
            raise SymbolError("dimension n must be >= 1")
        merged: dict[Fraction, HomogeneousTerm] = {}
        sizes = set()
        for t in terms:
            if t.log_power:
                raise SymbolError("classical symbols carry no log powers")
            if t.n != n:
                raise SymbolError(f"term dimension {t.n} does not match n={n}")
            sizes.add(t.M)
            if t.degree in merged:
                old = merged[t.degree]
                if old.M != t.M and 1 not in (old.M, t.M):
                    raise SymbolError(f"degree {t.degree}: inconsistent matrix sizes {old.M} and {t.M}")
                merged[t.degree] = HomogeneousTerm(t.degree, old.angular + t.angular, max(old.K, t.K))
            else:
                merged[t.degree] = t
        sizes = {s for s in sizes if s != 1}
        if len(sizes) > 1:
            raise SymbolError(f"inconsistent matrix sizes {sorted(sizes)}")
        self.M = M if M is not None else (sizes.pop() if sizes else 1)
        self.n = n
        kept = [
            replace(t, angular=t.angular.broadcast(self.M))
            for t in merged.values()
            if not t.angular.is_zero()
        ]
        self.terms = tuple(sorted(kept, key=lambda t: t.degree, reverse=True))
        if order is None:
            order = self.terms[0].degree if self.terms else None
        self.order = None if order is None else Fraction(order)
        for t in self.terms:
            gap = self.order - t.degree
            if gap < 0 or gap.denominator != 1:
                raise SymbolError(
                    f"degree {t.degree} is not of the form order - j (order {self.order})"
                )

    # access -----------------------------------------------------------
    @property
    def degrees(self) -> list[Fraction]:
        return [t.degree for t in self.terms]

    def term(self, degree) -> HomogeneousTerm | None:
        degree = Fraction(degree)
        for t in self.terms:
            if t.degree == degree:
                return t
        return None

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, ClassicalSymbol):
            return NotImplemented
        return (self.n, self.M, self.order, self.terms) == (other.n, other.M, other.order, other.terms)

    def __hash__(self):
        return hash((self.n, self.M, self.order, self.terms))

    def __repr__(self):
        from .parser import format_symbol

        return f"ClassicalSymbol(n={self.n}, M={self.M}, {format_symbol(self)!r})"

    # construction helpers --------------------------------------------
    def with_extension(self, degree, K: int) -> "ClassicalSymbol":
        degree = Fraction(degree)
        if self.term(degree) is None:
            raise SymbolError(f"no term of degree {degree}")
        terms = [replace(t, K=K) if t.degree == degree else t for t in self.terms]
        return ClassicalSymbol(self.n, terms, self.order, self.M)

    def with_extensions(self, shift: int = 0, overrides: Mapping | None = None) -> "ClassicalSymbol":
        overrides = {Fraction(k): v for k, v in (overrides or {}).items()}
        terms = [replace(t, K=overrides.get(t.degree, t.K + shift)) for t in self.terms]
        return ClassicalSymbol(self.n, terms, self.order, self.M)

    def scale(self, c) -> "ClassicalSymbol":
        c = Fraction(c)
        return ClassicalSymbol(self.n, [replace(t, angular=t.angular * c) for t in self.terms], self.order, self.M)

    def __add__(self, other: "ClassicalSymbol") -> "ClassicalSymbol":
        if self.n != other.n:
            raise SymbolError("dimension mismatch")
        orders = [o for o in (self.order, other.order) if o is not None]
        return ClassicalSymbol(self.n, self.terms + other.terms, max(orders) if orders else None)

    def select(self, predicate) -> "ClassicalSymbol":
        """Sub-symbol of the terms whose degree satisfies ``predicate``."""
        return ClassicalSymbol(self.n, [t for t in self.terms if predicate(t.degree)], self.order, self.M)

    def radial_leading(self) -> tuple[Fraction, Fraction]:
        """(c, m) when the leading term is c|xi|^m * I with rational c > 0."""
        if not self.terms:
            raise SymbolError("empty symbol")
        lead = self.terms[0]
        values = {constant_on_sphere(p) for p in lead.angular.diag}
        if len(values) != 1 or None in values:
            raise SymbolError("leading term is not radial (c*|xi|^m times identity)")
        c = values.pop()
        if c <= 0:
            raise SymbolError(f"leading coefficient must be positive, got {c}")
        return c, lead.degree

    def evaluate(self, xi, homogeneous: bool = False):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape[:-1])
        for t in self.terms:
            out = out + t.evaluate(xi, homogeneous)
        return out


# --- log-polyhomogeneous symbols --------------------------------------------

Component = tuple  # tuple[(Scalar, AngularPoly), ...]


def _merge_pairs(pairs) -> Component:
    """Combine (coefficient, angular) pairs sharing the same coefficient."""
    out: dict[Scalar, AngularPoly] = {}
    for c, a in pairs:
        if c.is_zero() or a.is_zero():
            continue
        if c.is_exact and c.pi_power == 0 and c.rational != 1:
            a, c = a * c.rational, Scalar.exact(1)
        out[c] = out[c] + a if c in out else a
    return tuple((c, a) for c, a in out.items() if not a.is_zero())


class LogPolyhomSymbol:
    """Sum over (degree, l) of components times (log[xi])^l.

    Each component is a finite sum of (Scalar coefficient) x AngularPoly.
    Components of degree below ``floor`` were discarded by truncation;
    ``floor=None`` means the representation is complete.
    """

    def __init__(self, n: int, components: Mapping | None = None, floor=None, M: int = 1, order=None):
        self.n = n
        self.M = M
        comps = {}
        for (d, l), pairs in (components or {}).items():
            d = Fraction(d)
            if floor is not None and d < floor:
                continue
            merged = _merge_pairs((c, a.broadcast(M)) for c, a in pairs)
            if merged:
                comps[(d, int(l))] = merged
        self.components = dict(sorted(comps.items(), key=lambda kv: (-kv[0][0], -kv[0][1])))
        self.floor = None if floor is None else Fraction(floor)
        if order is None:
            order = max((d for d, _ in self.components), default=Fraction(0))
        self.order = Fraction(order)

    @property
    def J(self):
        return None if self.floor is None else self.order - self.floor

    def component(self, degree, log_power: int = 0) -> Component:
        return self.components.get((Fraction(degree), log_power), ())

    def extract(self, degree, log_power: int = 0) -> Component:
        """The component r_{degree,log_power}; raises if truncation dropped it."""
        degree = Fraction(degree)
        if self.floor is not None and degree < self.floor:
            raise SymbolError(
                f"truncation floor {self.floor} does not reach degree {degree}; increase J"
            )
        return self.component(degree, log_power)

    def __add__(self, other: "LogPolyhomSymbol") -> "LogPolyhomSymbol":
        if self.n != other.n:
            raise SymbolError("dimension mismatch")
        comps: dict = {}
        for src in (self.components, other.components):
            for key, pairs in src.items():
                comps[key] = comps.get(key, ()) + pairs
        return LogPolyhomSymbol(self.n, comps, _coarser(self.floor, other.floor), max(self.M, other.M))

    def scale(self, c) -> "LogPolyhomSymbol":
        c = Scalar.coerce(c)
        comps = {k: tuple((c * s, a) for s, a in pairs) for k, pairs in self.components.items()}
        return LogPolyhomSymbol(self.n, comps, self.floor, self.M, self.order)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def evaluate(self, xi, min_degree=None):
        """Fiber-traced numeric value at points with |xi| >= 1 (float64)."""
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(xi, axis=-1)
        omega = xi / r[..., None]
        out = np.zeros(xi.shape[:-1])
        for (d, l), pairs in self.components.items():
            if min_degree is not None and d < min_degree:
                continue
            for c, a in pairs:
                out = out + float(c) * r ** float(d) * np.log(r) ** l * a.trace().evaluate_many(omega)
        return out

    def __repr__(self):
        return f"LogPolyhomSymbol(n={self.n}, M={self.M}, {format_log_symbol(self)!r})"


def _coarser(f1, f2):
    if f1 is None:
        return f2
    if f2 is None:
        return f1
    return max(f1, f2)


def format_log_symbol(r: LogPolyhomSymbol) -> str:
    parts = []
    for (d, l), pairs in r.components.items():
        for c, a in pairs:
            ang = "; ".join(format_poly(p) for p in a.diag) if a.M > 1 else format_poly(a.diag[0])
            coef = "" if c == Scalar.exact(1) else f"{c}*"
            radial = "" if d == 0 else f"*[xi]^({d})"
            logs = "" if l == 0 else ("*log[xi]" if l == 1 else f"*log[xi]^{l}")
            parts.append(f"{coef}({ang}){radial}{logs}")
    text = " + ".join(parts) if parts else "0"
    if r.floor is not None:
        text += f"  [truncated below degree {r.floor}]"
    return text


def as_log_symbol(a: ClassicalSymbol) -> LogPolyhomSymbol:
    comps = {(t.degree, 0): ((Scalar.exact(1), t.angular),) for t in a.terms}
    return LogPolyhomSymbol(a.n, comps, None, a.M, a.order)


def series_log(p: ClassicalSymbol, J: int) -> LogPolyhomSymbol:
    """Log-polyhomogeneous expansion of log p for radial-leading p.

    log p = m log[xi] + log c + sum_k (-1)^{k+1} u^k / k with
    u = (p - c[xi]^m) / (c[xi]^m); components of degree < -J are dropped.
    """
    if not p.terms:
        raise SymbolError("empty symbol")
    c, m = p.radial_leading()
    n, M = p.n, p.M
    floor = Fraction(-J)
    one = AngularPoly.constant(n, 1, M)
    comps: dict = {
        (Fraction(0), 1): ((Scalar.exact(m), one),),
        (Fraction(0), 0): ((Scalar.log(c), one),),
    }
    u = {t.degree - m: t.angular * (1 / c) for t in p.terms[1:]}
    if not u:
        return LogPolyhomSymbol(n, comps, None, M, Fraction(0))
    top = max(u)
    power = dict(u)
    k = 1
    while k * top >= floor:
        coef = Fraction((-1) ** (k + 1), k)
        for d, a in power.items():
            if d >= floor:
                key = (d, 0)
                comps[key] = comps.get(key, ()) + ((Scalar.exact(1), a * coef),)
        nxt: dict = {}
        for d1, a1 in power.items():
            for d2, a2 in u.items():
                if d1 + d2 >= floor:
                    nxt[d1 + d2] = nxt[d1 + d2] + a1 * a2 if d1 + d2 in nxt else a1 * a2
        power = nxt
        k += 1
    return LogPolyhomSymbol(n, comps, floor, M, Fraction(0))


def symbol_product(a: ClassicalSymbol, r: LogPolyhomSymbol) -> LogPolyhomSymbol:
    """Degreewise product a * r (constant coefficients: one product term)."""
    if a.n != r.n:
        raise SymbolError(f"dimension mismatch: {a.n} vs {r.n}")
    M = max(a.M, r.M)
    if 1 not in (a.M, r.M) and a.M != r.M:
        raise SymbolError(f"matrix size mismatch: {a.M} vs {r.M}")
    floor = None
    if r.floor is not None:
        floor = (a.order if a.order is not None else Fraction(0)) + r.floor
    comps: dict = {}
    for t in a.terms:
        for (d, l), pairs in r.components.items():
            key = (t.degree + d, l)
            if floor is not None and key[0] < floor:
                continue
            comps[key] = comps.get(key, ()) + tuple((c, t.angular * ang) for c, ang in pairs)
    order = (a.order or Fraction(0)) + r.order
    return LogPolyhomSymbol(a.n, comps, floor, M, order)
