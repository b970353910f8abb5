"""Coefficient values: exact ``q * pi**k`` with rational ``q``, or
high-precision numerics carrying an absolute error bound.

Exact values stay exact under ``+``/``-`` when the pi-powers agree and
under ``*``/``/`` always. Anything else demotes to a numeric value whose
error bound is propagated sub-additively.
"""
from __future__ import annotations

import os
from fractions import Fraction
from numbers import Rational

import mpmath
from mpmath import mp, mpf

DEFAULT_DPS = 50
PRECISION_ENV = "NONLOCAL_TRACE_DPS"


def set_precision(dps: int) -> None:
    """Set the working precision (significant decimal digits)."""
    if dps < 15:
        raise ValueError("precision below 15 digits is not supported")
    mp.dps = int(dps)


def get_precision() -> int:
    return mp.dps


set_precision(int(os.environ.get(PRECISION_ENV, DEFAULT_DPS)))


def _ulp(x) -> mpf:
    return abs(mpf(x)) * mpf(10) ** (-(mp.dps - 2)) + mpf(10) ** (-(2 * mp.dps))


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class Scalar:
    """A coefficient value. Build with :meth:`exact` or :meth:`numeric`."""

    __slots__ = ("_q", "_k", "_x", "_err")

    def __init__(self, q=None, k=0, x=None, err=None):
        if q is not None:
            q = _to_fraction(q)
            self._q = q
            self._k = 0 if q == 0 else int(k)
            self._x = None
            self._err = mpf(0)
        else:
            if x is None:
                raise ValueError("numeric scalar needs a value")
            x = mpmath.mpmathify(x)
            if isinstance(x, mpmath.mpc):
                if x.imag != 0:
                    raise TypeError("Scalar carries real values only")
                x = x.real
            self._q = None
            self._k = 0
            self._x = x
            self._err = _ulp(x) if err is None else abs(mpf(err))

    # construction -----------------------------------------------------
    @classmethod
    def exact(cls, q, pi_power: int = 0) -> "Scalar":
        return cls(q=q, k=pi_power)

    @classmethod
    def numeric(cls, x, err=None) -> "Scalar":
        return cls(x=x, err=err)

    @classmethod
    def zero(cls) -> "Scalar":
        return cls(q=0)

    @classmethod
    def coerce(cls, other) -> "Scalar":
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Fraction)):
            return cls.exact(other)
        if isinstance(other, (float, mpf)):
            return cls.numeric(other)
        raise TypeError(f"cannot coerce {other!r} to Scalar")

    @classmethod
    def log(cls, q) -> "Scalar":
        """Natural log of a positive rational (exact zero for 1)."""
        q = _to_fraction(q)
        if q <= 0:
            raise ValueError("log of a non-positive rational")
        if q == 1:
            return cls.zero()
        return cls.numeric(mpmath.log(mpf(q.numerator) / q.denominator))

    # inspection -------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return self._q is not None

    @property
    def rational(self) -> Fraction:
        if self._q is None:
            raise ValueError("numeric scalar has no exact rational part")
        return self._q

    @property
    def pi_power(self) -> int:
        return self._k

    @property
    def value(self) -> mpf:
        if self._q is not None:
            v = mpf(self._q.numerator) / self._q.denominator
            return v * mp.pi ** self._k if self._k else v
        return self._x

    @property
    def error(self) -> mpf:
        if self._q is not None:
            return mpf(0) if self._k == 0 else _ulp(self.value)
        return self._err

    def is_zero(self) -> bool:
        return self._q is not None and self._q == 0

    def __float__(self) -> float:
        return float(self.value)

    def __bool__(self) -> bool:
        return not self.is_zero()

    # arithmetic -------------------------------------------------------
    def __neg__(self):
        if self.is_exact:
            return Scalar.exact(-self._q, self._k)
        return Scalar.numeric(-self._x, self._err)

    def __add__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.is_exact and other.is_exact and self._k == other._k:
            return Scalar.exact(self._q + other._q, self._k)
        v = self.value + other.value
        return Scalar.numeric(v, self.error + other.error + _ulp(v))

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Scalar.zero()
        if self.is_exact and other.is_exact:
            return Scalar.exact(self._q * other._q, self._k + other._k)
        a, b = self.value, other.value
        ea, eb = self.error, other.error
        v = a * b
        return Scalar.numeric(v, abs(a) * eb + abs(b) * ea + ea * eb + _ulp(v))

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by exact zero")
        if self.is_exact and other.is_exact:
            return Scalar.exact(self._q / other._q, self._k - other._k)
        a, b = self.value, other.value
        ea, eb = self.error, other.error
        if abs(b) <= eb:
            raise ZeroDivisionError("divisor not separated from zero")
        v = a / b
        return Scalar.numeric(v, (ea + abs(v) * eb) / (abs(b) - eb) + _ulp(v))

    def __rtruediv__(self, other):
        return Scalar.coerce(other) / self

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if self.is_exact:
            if e < 0 and self._q == 0:
                raise ZeroDivisionError("zero to a negative power")
            return Scalar.exact(self._q**e, self._k * e)
        out = Scalar.exact(1)
        base = self if e >= 0 else Scalar.exact(1) / self
        for _ in range(abs(e)):
            out = out * base
        return out

    # comparison -------------------------------------------------------
    def __eq__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_exact and other.is_exact:
            return self._q == other._q and self._k == other._k
        if self.is_exact != other.is_exact:
            return False
        return self._x == other._x and self._err == other._err

    def __hash__(self):
        if self.is_exact:
            return hash(("exact", self._q, self._k))
        return hash(("numeric", self._x))

    def close_to(self, other, rel: float = 1e-10, abs_tol: float = 0.0) -> bool:
        other = Scalar.coerce(other)
        diff = abs(self.value - other.value)
        scale = max(abs(self.value), abs(other.value))
        return diff <= max(rel * scale, abs_tol) + self.error + other.error

    # presentation -----------------------------------------------------
    def __repr__(self):
        if self.is_exact:
            return f"Scalar.exact({self._q}, pi_power={self._k})"
        return f"Scalar.numeric({mpmath.nstr(self._x, 20)}, err={mpmath.nstr(self._err, 3)})"

    def __str__(self):
        if self.is_exact:
            if self._k == 0:
                return str(self._q)
            return f"{self._q}*pi^{self._k}"
        return mpmath.nstr(self._x, 17)

    def to_json(self) -> dict:
        if self.is_exact:
            return {
                "kind": "exact",
                "rational": str(self._q),
                "pi_power": self._k,
                "value": mpmath.nstr(self.value, 17),
            }
        return {
            "kind": "numeric",
            "value": mpmath.nstr(self._x, mp.dps),
            "error": mpmath.nstr(self._err, 5),
        }


def ssum(values) -> Scalar:
    """Sum scalars in the given order (deterministic accumulation)."""
    total = Scalar.zero()
    for v in values:
        total = total + v
    return total


def pi_rational_sin(q: Fraction) -> Scalar:
    """``sin(pi*q)`` for rational ``q``; exact when the value is rational."""
    q = Fraction(q)
    r = q % 2
    table = {
        Fraction(0): 0, Fraction(1): 0,
        Fraction(1, 2): 1, Fraction(3, 2): -1,
        Fraction(1, 6): Fraction(1, 2), Fraction(5, 6): Fraction(1, 2),
        Fraction(7, 6): Fraction(-1, 2), Fraction(11, 6): Fraction(-1, 2),
    }
    if r in table:
        return Scalar.exact(table[r])
    return Scalar.numeric(mpmath.sinpi(mpf(r.numerator) / r.denominator))


def pi_rational_cos(q: Fraction) -> Scalar:
    """``cos(pi*q)`` for rational ``q``."""
    return pi_rational_sin(Fraction(q) + Fraction(1, 2))
