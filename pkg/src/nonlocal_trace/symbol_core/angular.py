"""Polynomials in xi_1..xi_n read as functions on the unit sphere, and
their exact sphere moments."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Mapping

from .scalar import Scalar, ssum

Exponent = tuple  # tuple[int, ...] of length n


class Poly:
    """Multivariate polynomial with rational coefficients (immutable)."""

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Exponent, Fraction] | None = None):
        if n < 1:
            raise ValueError("dimension n must be >= 1")
        self.n = n
        clean = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or any(a < 0 for a in alpha):
                raise ValueError(f"bad exponent {alpha} for n={n}")
            c = Fraction(c)
            if c:
                clean[alpha] = clean.get(alpha, Fraction(0)) + c
                if not clean[alpha]:
                    del clean[alpha]
        self._terms = dict(sorted(clean.items(), reverse=True))
        self._hash = None

    @classmethod
    def constant(cls, n: int, c=1) -> "Poly":
        return cls(n, {(0,) * n: Fraction(c)})

    @classmethod
    def variable(cls, n: int, i: int, power: int = 1) -> "Poly":
        alpha = [0] * n
        alpha[i] = power
        return cls(n, {tuple(alpha): Fraction(1)})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def degrees(self) -> set:
        return {sum(a) for a in self._terms}

    def homogeneous_degree(self) -> int | None:
        ds = self.degrees()
        return ds.pop() if len(ds) == 1 else None

    def __eq__(self, other):
        return isinstance(other, Poly) and self.n == other.n and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, tuple(self._terms.items())))
        return self._hash

    def __add__(self, other: "Poly") -> "Poly":
        _check_n(self, other)
        out = dict(self._terms)
        for a, c in other._terms.items():
            out[a] = out.get(a, Fraction(0)) + c
        return Poly(self.n, out)

    def __neg__(self):
        return Poly(self.n, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly(self.n, {a: c * other for a, c in self._terms.items()})
        _check_n(self, other)
        out: dict = {}
        for a, c in self._terms.items():
            for b, d in other._terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, Fraction(0)) + c * d
        return Poly(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.constant(self.n)
        for _ in range(k):
            out = out * self
        return out

    def reflect(self) -> "Poly":
        """p(-xi)."""
        return Poly(self.n, {a: (c if sum(a) % 2 == 0 else -c) for a, c in self._terms.items()})

    def even_part(self) -> "Poly":
        return Poly(self.n, {a: c for a, c in self._terms.items() if sum(a) % 2 == 0})

    def odd_part(self) -> "Poly":
        return Poly(self.n, {a: c for a, c in self._terms.items() if sum(a) % 2 == 1})

    def __call__(self, point) -> float:
        total = 0.0
        for a, c in self._terms.items():
            v = float(c)
            for x, e in zip(point, a):
                if e:
                    v *= x**e
            total += v
        return total

    def evaluate_many(self, points):
        """Vectorized evaluation on an (..., n) numpy array."""
        import numpy as np

        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape[:-1])
        for a, c in self._terms.items():
            v = np.full(pts.shape[:-1], float(c))
            for i, e in enumerate(a):
                if e:
                    v = v * pts[..., i] ** e
            out = out + v
        return out

    def __repr__(self):
        return f"Poly({self.n}, {format_poly(self)!r})"


def _check_n(p: Poly, q: Poly) -> None:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")


def format_poly(p: Poly) -> str:
    """Render in the symbol DSL (``3/2*xi1^2 - xi2``)."""
    if p.is_zero():
        return "0"
    parts = []
    for alpha, c in p.items():
        factors = []
        for i, e in enumerate(alpha):
            if e == 1:
                factors.append(f"xi{i + 1}")
            elif e > 1:
                factors.append(f"xi{i + 1}^{e}")
        mag = abs(c)
        if factors:
            body = "*".join(factors) if mag == 1 else f"{mag}*" + "*".join(factors)
        else:
            body = str(mag)
        parts.append(("-" if c < 0 else "+", body))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


class AngularPoly:
    """Diagonal M x M matrix of polynomials read on S^{n-1}."""

    __slots__ = ("n", "diag")

    def __init__(self, n: int, diag: Iterable[Poly]):
        diag = tuple(diag)
        if not diag:
            raise ValueError("matrix size M must be >= 1")
        for p in diag:
            if p.n != n:
                raise ValueError("diagonal entries must share the dimension n")
        self.n = n
        self.diag = diag

    @classmethod
    def scalar(cls, p: Poly, M: int = 1) -> "AngularPoly":
        return cls(p.n, (p,) * M)

    @classmethod
    def constant(cls, n: int, c=1, M: int = 1) -> "AngularPoly":
        return cls.scalar(Poly.constant(n, c), M)

    @property
    def M(self) -> int:
        return len(self.diag)

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.diag)

    def trace(self) -> Poly:
        out = Poly(self.n)
        for p in self.diag:
            out = out + p
        return out

    def broadcast(self, M: int) -> "AngularPoly":
        if self.M == M:
            return self
        if self.M == 1:
            return AngularPoly(self.n, self.diag * M)
        raise ValueError(f"matrix size mismatch: {self.M} vs {M}")

    def _pair(self, other: "AngularPoly"):
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        M = max(self.M, other.M)
        return self.broadcast(M), other.broadcast(M)

    def __add__(self, other):
        a, b = self._pair(other)
        return AngularPoly(self.n, (p + q for p, q in zip(a.diag, b.diag)))

    def __neg__(self):
        return AngularPoly(self.n, (-p for p in self.diag))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return AngularPoly(self.n, (p * other for p in self.diag))
        a, b = self._pair(other)
        return AngularPoly(self.n, (p * q for p, q in zip(a.diag, b.diag)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = AngularPoly.constant(self.n, 1, self.M)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, AngularPoly) and self.n == other.n and self.diag == other.diag

    def __hash__(self):
        return hash((self.n, self.diag))

    def __repr__(self):
        if self.M == 1:
            return f"AngularPoly({self.n}, {format_poly(self.diag[0])!r})"
        return f"AngularPoly({self.n}, diag={[format_poly(p) for p in self.diag]})"


# --- sphere moments -------------------------------------------------------

def _gamma_half(twice: int) -> tuple[Fraction, int]:
    """Gamma(twice/2) as (rational, power of sqrt(pi))."""
    if twice % 2 == 0:
        return Fraction(factorial(twice // 2 - 1)), 0
    k = (twice - 1) // 2  # Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi)
    return Fraction(factorial(2 * k), 4**k * factorial(k)), 1


@lru_cache(maxsize=None)
def monomial_moment(alpha: tuple) -> Scalar:
    """Integral of xi^alpha over S^{n-1} with the usual surface measure."""
    n = len(alpha)
    if any(a % 2 for a in alpha):
        return Scalar.zero()
    if n == 1:
        return Scalar.exact(2)
    num = Fraction(2)
    half_pi = 0
    for a in alpha:
        g, h = _gamma_half(a + 1)
        num *= g
        half_pi += h
    g, h = _gamma_half(sum(alpha) + n)
    half_pi -= h
    # half_pi counts powers of sqrt(pi); it is always even here
    assert half_pi % 2 == 0
    return Scalar.exact(num / g, half_pi // 2)


def sphere_moment(p) -> Scalar:
    """Integral over S^{n-1} of ``p`` (fiber trace applied for matrices).

    For n = 1 the sphere is {-1, +1}, so this is p(1) + p(-1).
    The (2*pi)^{-n} normalization is not applied.
    """
    if isinstance(p, AngularPoly):
        p = p.trace()
    return ssum(monomial_moment(alpha) * Scalar.exact(c) for alpha, c in p.items())


def sphere_area(n: int) -> Scalar:
    return monomial_moment((0,) * n)


def vanishes_on_sphere(p: Poly) -> bool:
    """Exact test: p restricted to S^{n-1} is identically zero."""
    return sphere_moment(p * p).is_zero()


def constant_on_sphere(p: Poly) -> Fraction | None:
    """The constant value of p on the sphere, or None if p is not constant there."""
    n = p.n
    mean = sphere_moment(p) / sphere_area(n)
    if not mean.is_exact or mean.pi_power != 0:
        return None
    c = mean.rational
    return c if vanishes_on_sphere(p - Poly.constant(n, c)) else None
