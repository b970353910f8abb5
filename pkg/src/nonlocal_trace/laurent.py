"""Truncated Laurent series and the transitions from resolvent-trace
expansion coefficients to the pole data of Gamma(s) zeta(s) and zeta(s).

All transitions are literal series products of the prefactors

    zeta(s)          = g_M(s) * (1/pi) sin(pi (s - M)) * psi(s - M)
    Gamma(s) zeta(s) = M! / Gamma(M + 1 - s) * psi(s - M)

with the principal parts of psi read off the resolvent expansion.
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import mpmath
from mpmath import mp

from .resolvent import AsymptoticExpansion
from .symbol_core import Scalar
from .symbol_core.scalar import pi_rational_cos, pi_rational_sin, ssum

DEFAULT_T = 6


class LaurentError(ValueError):
    pass


class LaurentSeries:
    """sum_k c_k (s - point)^k for low <= k < order (O((s-point)^order) remainder)."""

    __slots__ = ("point", "coeffs", "order")

    def __init__(self, point, coeffs: dict, order: int):
        self.point = Fraction(point)
        self.order = int(order)
        self.coeffs = {int(k): Scalar.coerce(v) for k, v in coeffs.items() if k < order}

    @property
    def low(self) -> int:
        nz = [k for k, v in self.coeffs.items() if not v.is_zero()]
        return min(nz) if nz else self.order

    def __getitem__(self, k: int) -> Scalar:
        if k >= self.order:
            raise LaurentError(f"coefficient {k} is beyond the truncation order {self.order}")
        return self.coeffs.get(k, Scalar.zero())

    coefficient = __getitem__

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return self.scale(other)
        return series_mul(self, other)

    def __add__(self, other):
        return series_add(self, other)

    def scale(self, c) -> "LaurentSeries":
        return series_scale(self, c)

    def close_to(self, other: "LaurentSeries", rel=1e-20, abs_tol=1e-20) -> bool:
        top = min(self.order, other.order)
        for k in range(min(self.low, other.low), top):
            if not self[k].close_to(other[k], rel=rel, abs_tol=abs_tol):
                return False
        return True

    def __repr__(self):
        body = " + ".join(f"({self.coeffs[k]})*e^{k}" for k in sorted(self.coeffs) if not self.coeffs[k].is_zero())
        return f"LaurentSeries(at {self.point}: {body or '0'} + O(e^{self.order}))"

    def to_json(self) -> dict:
        return {
            "point": str(self.point),
            "order": self.order,
            "coefficients": {str(k): self.coeffs[k].to_json() for k in sorted(self.coeffs)},
        }


def _same_point(f: LaurentSeries, g: LaurentSeries) -> None:
    if f.point != g.point:
        raise LaurentError(f"expansion point mismatch: {f.point} vs {g.point}")


def series_mul(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    _same_point(f, g)
    fl, gl = f.low, g.low
    order = min(f.order + gl, g.order + fl)
    out = {}
    for k in range(fl + gl, order):
        out[k] = ssum(f[i] * g[k - i] for i in range(fl, k - gl + 1) if i < f.order and k - i < g.order)
    return LaurentSeries(f.point, out, order)


def series_add(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    _same_point(f, g)
    order = min(f.order, g.order)
    keys = sorted(set(f.coeffs) | set(g.coeffs))
    return LaurentSeries(f.point, {k: f.coeffs.get(k, Scalar.zero()) + g.coeffs.get(k, Scalar.zero()) for k in keys if k < order}, order)


def series_scale(f: LaurentSeries, c) -> LaurentSeries:
    c = Scalar.coerce(c)
    return LaurentSeries(f.point, {k: c * v for k, v in f.coeffs.items()}, f.order)


def series_inverse(f: LaurentSeries) -> LaurentSeries:
    """1/f for f with nonzero leading coefficient."""
    v = f.low
    if v >= f.order:
        raise LaurentError("cannot invert a series with no known nonzero coefficient")
    width = f.order - v
    lead = f[v]
    inv = {0: Scalar.exact(1) / lead}
    for k in range(1, width):
        acc = ssum(f[v + i] * inv[k - i] for i in range(1, k + 1))
        inv[k] = -acc / lead
    return LaurentSeries(f.point, {k - v: c for k, c in inv.items()}, width - v)


# --- known series -------------------------------------------------------------

_corruption = {"alpha": False}


@contextlib.contextmanager
def corrupted_alpha():
    """Negative-control hook: perturb the linear Taylor coefficient of g_M (M >= 1)."""
    _corruption["alpha"] = True
    try:
        yield
    finally:
        _corruption["alpha"] = False


def harmonic_alpha(N: int) -> Fraction:
    """alpha_N = 1 + 1/2 + ... + 1/(N-1)."""
    return sum((Fraction(1, i) for i in range(1, N)), Fraction(0))


def _taylor_numeric(fn, at: Fraction, T: int) -> dict:
    x0 = mpmath.mpf(at.numerator) / at.denominator
    coeffs = mpmath.taylor(fn, x0, T - 1)
    # reciprocal-gamma zeros at integers come back as roundoff; make them exact
    tiny = mpmath.mpf(10) ** (-(mp.dps - 10))
    return {k: Scalar.zero() if abs(c) < tiny else Scalar.numeric(c) for k, c in enumerate(coeffs)}


def _g_M(M: int, at: Fraction, T: int) -> LaurentSeries:
    out = LaurentSeries(at, {0: 1}, T)
    for k in range(1, M + 1):
        d = at - k
        if d == 0:
            raise LaurentError(f"g_M has a pole at s = {at}")
        # k / (d + e) = (k/d) sum_j (-e/d)^j
        factor = LaurentSeries(at, {j: Scalar.exact(Fraction(k) / d * (-1 / d) ** j) for j in range(T)}, T)
        out = out * factor
    if _corruption["alpha"] and M >= 1 and at == 0:
        coeffs = dict(out.coeffs)
        coeffs[1] = coeffs.get(1, Scalar.zero()) + Scalar.exact(Fraction((-1) ** M, 4))
        out = LaurentSeries(at, coeffs, out.order)
    return out


def _sin_factor(M: int, at: Fraction, T: int) -> LaurentSeries:
    S = pi_rational_sin(at - M)
    C = pi_rational_cos(at - M)
    coeffs = {}
    for j in range(T):
        if j % 2 == 0:
            h = j // 2
            coeffs[j] = S * Scalar.exact(Fraction((-1) ** h, factorial(j)), j - 1)
        else:
            h = (j - 1) // 2
            coeffs[j] = C * Scalar.exact(Fraction((-1) ** h, factorial(j)), j - 1)
    return LaurentSeries(at, coeffs, T)


def known_series(name: str, T: int = DEFAULT_T, M: int = 0, at=0) -> LaurentSeries:
    """Laurent/Taylor data at ``at`` with T coefficients from the lowest index.

    gamma            Gamma(s)
    inv_gamma        1/Gamma(s)
    inv_gamma_shift  M!/Gamma(M + 1 - s)
    g_M              M!/((s-M)...(s-1))
    sin_factor       (1/pi) sin(pi (s - M))
    """
    if T < 1:
        raise LaurentError("T must be >= 1")
    at = Fraction(at)
    if name == "g_M":
        return _g_M(M, at, T)
    if name == "sin_factor":
        return _sin_factor(M, at, T)
    if name == "inv_gamma":
        return LaurentSeries(at, _taylor_numeric(mp.rgamma, at, T), T)
    if name == "inv_gamma_shift":
        fm = factorial(M)
        data = _taylor_numeric(lambda x: fm * mp.rgamma(M + 1 - x), at, T)
        return LaurentSeries(at, data, T)
    if name == "gamma":
        inv = LaurentSeries(at, _taylor_numeric(mp.rgamma, at, T + 1), T + 1)
        return series_inverse(inv)
    raise LaurentError(f"unknown series {name!r}")


# --- transitions --------------------------------------------------------------

def resolvent_to_zeta_at_zero(log_coeff, const_coeff, N: int, T: int = DEFAULT_T, check: bool = True):
    """(C_{-1}, C_0) of zeta at s = 0 from the (-lambda)^{-N} pair (a, b)."""
    if N < 1:
        raise LaurentError("N must be >= 1")
    a, b = Scalar.coerce(log_coeff), Scalar.coerce(const_coeff)
    M = N - 1
    psi = LaurentSeries(0, {-2: a, -1: b}, 0)
    zeta = known_series("g_M", T, M) * known_series("sin_factor", T, M) * psi
    cm1, c0 = zeta[-1], zeta[0]
    if check:
        closed = b + Scalar.exact(harmonic_alpha(N)) * a
        if not (c0 == closed or c0.close_to(closed, rel=1e-30)):
            raise LaurentError(f"series product {c0} disagrees with b + alpha_N a = {closed}")
    return cm1, c0


@dataclass
class PoleData:
    location: Fraction
    psi: LaurentSeries
    gamma_zeta: LaurentSeries
    zeta: LaurentSeries

    @property
    def is_integer(self) -> bool:
        return self.location.denominator == 1

    def double(self) -> Scalar:
        """c'_k (double-pole coefficient of Gamma*zeta)."""
        return self.gamma_zeta[-2]

    def simple(self) -> Scalar:
        """c_j or c''_k (simple-pole coefficient of Gamma*zeta)."""
        return self.gamma_zeta[-1]

    def zeta_residue(self) -> Scalar:
        """c'''_j."""
        return self.zeta[-1]

    def to_json(self) -> dict:
        return {
            "location": str(self.location),
            "gamma_zeta": {"double": self.double().to_json(), "simple": self.simple().to_json()},
            "zeta": self.zeta.to_json(),
        }


@dataclass
class ZetaPoleData:
    N: int
    poles: dict = field(default_factory=dict)

    def at(self, location) -> PoleData | None:
        return self.poles.get(Fraction(location))

    def c_prime(self, k: int) -> Scalar:
        p = self.at(-k)
        return Scalar.zero() if p is None else p.double()

    def c_double_prime(self, k: int) -> Scalar:
        p = self.at(-k)
        return Scalar.zero() if p is None else p.simple()

    def to_json(self) -> dict:
        return {"N": self.N, "poles": {str(loc): self.poles[loc].to_json() for loc in sorted(self.poles, reverse=True)}}


def _grid_check(alpha: Fraction, l: int, N: int, sigma, m, n) -> Fraction:
    loc = alpha + N
    if loc.denominator == 1 and loc <= 0:
        return loc
    if l:
        raise LaurentError(f"log term at non-integer exponent {alpha}")
    j = Fraction(sigma) + n - Fraction(m) * loc
    if j.denominator != 1 or j < 0:
        raise LaurentError(f"exponent {alpha} is not on the grid (sigma={sigma}, m={m}, n={n})")
    return loc


def resolvent_to_zeta_full(e: AsymptoticExpansion, sigma, m, n, T: int = DEFAULT_T) -> ZetaPoleData:
    """Pole data of Gamma(s) zeta(s) and zeta(s) from a resolvent expansion."""
    N = e.N
    M = N - 1
    grouped: dict = {}
    for (alpha, l), c in e.terms.items():
        loc = _grid_check(alpha, l, N, sigma, m, n)
        if l > 1:
            raise LaurentError("log powers above 1 are not supported")
        grouped.setdefault(loc, {})
        # c t^alpha log^l t  ->  c l! / (s - loc)^{l+1}
        key = -(l + 1)
        grouped[loc][key] = grouped[loc].get(key, Scalar.zero()) + c * Scalar.exact(factorial(l))
    out = ZetaPoleData(N)
    for loc in sorted(grouped, reverse=True):
        psi = LaurentSeries(loc, grouped[loc], 0)
        gz = known_series("inv_gamma_shift", T, M, loc) * psi
        z = known_series("g_M", T, M, loc) * known_series("sin_factor", T, M, loc) * psi
        check = gz * known_series("inv_gamma", T, 0, loc)
        tol = mpmath.mpf(10) ** (-(mp.dps // 2))
        if not check.close_to(z, rel=tol, abs_tol=tol):
            raise LaurentError(f"Gamma-division cross-check failed at s = {loc}")
        out.poles[loc] = PoleData(loc, psi, gz, z)
    return out


def zeta_regular_value(z: ZetaPoleData) -> Scalar:
    """Constant Laurent coefficient of zeta(A,P,s) at s = 0 (= C_0(A,P))."""
    p = z.at(0)
    if p is None:
        return Scalar.zero()
    return p.zeta[0]


def transition_matrix(k: int, N: int, T: int = DEFAULT_T):
    """2x2 map (c~'_k, c~''_k) -> (c'_k, c''_k) at the pole s = -k.

    Columns are the images of (1, 0) and (0, 1).
    """
    M = N - 1
    F = known_series("inv_gamma_shift", T, M, -k)
    return ((F[0], Scalar.zero()), (F[1], F[0]))
