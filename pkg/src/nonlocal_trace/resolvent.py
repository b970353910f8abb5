"""Parameter-dependent (resolvent) symbols and the large-lambda trace
expansions of A (P - lambda)^{-N} in powers and log-powers of -lambda."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .densities import dslash, finite_part, residue0_log
from .symbol_core import AngularPoly, ClassicalSymbol, Scalar, SymbolError, series_log, sphere_moment
from .symbol_core.scalar import pi_rational_sin, ssum


class ExpansionError(ValueError):
    """Precondition failure for an expansion (orders, poles, integrability)."""


class MasterIntegralPole(ExpansionError):
    pass


def master_integral(s: Fraction, m) -> Scalar:
    """int_0^inf r^{s-1} (1 + r^m)^{-1} dr = (pi/m) / sin(pi s/m), 0 < s < m
    (and its continuation); raises at s/m in Z."""
    q = Fraction(s) / Fraction(m)
    if q.denominator == 1:
        raise MasterIntegralPole(f"master integral has a pole at s/m = {q}")
    return Scalar.exact(Fraction(1) / Fraction(m), 1) / pi_rational_sin(q)


def gen_binomial(alpha: Fraction, j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out *= (alpha - i) / (i + 1)
    return out


# --- parameter-dependent symbols ---------------------------------------------

@dataclass(frozen=True)
class ParamSymbol:
    """Sum of angular(w) |xi|^{d1} (c|xi|^m - lambda)^{-e}, keyed by (d1, e).

    Components with joint degree d1 - m*e above ``exact_above`` are complete.
    """

    n: int
    m: Fraction
    c: Fraction
    N: int
    terms: dict
    exact_above: Fraction | None = None

    def joint_degrees(self) -> list:
        return sorted({d1 - self.m * e for d1, e in self.terms}, reverse=True)

    def component(self, joint_degree) -> dict:
        jd = Fraction(joint_degree)
        if self.exact_above is not None and jd <= self.exact_above:
            raise ExpansionError(f"joint degree {jd} is below the truncation of this symbol")
        return {k: v for k, v in self.terms.items() if k[0] - self.m * k[1] == jd}

    def times(self, a: ClassicalSymbol) -> "ParamSymbol":
        """Product a(xi) s(xi, lambda) (constant coefficients)."""
        out: dict = {}
        for t in a.terms:
            for (d1, e), ang in self.terms.items():
                key = (d1 + t.degree, e)
                prod = t.angular * ang
                out[key] = out[key] + prod if key in out else prod
        shift = a.order if a.order is not None else Fraction(0)
        ea = None if self.exact_above is None else self.exact_above + shift
        return ParamSymbol(self.n, self.m, self.c, self.N, out, ea)

    def evaluate(self, xi, lam, homogeneous_only_degree=None):
        """Fiber-traced value at real points ``xi`` (|xi| > 0) and complex lam."""
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(xi, axis=-1)
        omega = xi / r[..., None]
        out = np.zeros(xi.shape[:-1], dtype=complex)
        for (d1, e), ang in self.terms.items():
            if homogeneous_only_degree is not None and d1 - self.m * e != homogeneous_only_degree:
                continue
            base = float(self.c) * r ** float(self.m) - lam
            out = out + ang.trace().evaluate_many(omega) * r ** float(d1) * base ** (-e)
        return out


def _lower_terms(p: ClassicalSymbol):
    return [(t.degree, t.angular) for t in p.terms[1:]]


def resolvent_symbol(p: ClassicalSymbol, N: int, J: int) -> ParamSymbol:
    """Joint-homogeneous expansion of (p(xi) - lambda)^{-N}, J geometric terms."""
    if J < 1:
        raise ExpansionError("J must be >= 1")
    if N < 1:
        raise ExpansionError("N must be >= 1")
    c, m = p.radial_leading()
    lower = _lower_terms(p)
    one = AngularPoly.constant(p.n, 1, p.M)
    terms: dict = {}
    power = {Fraction(0): one}  # b^k, keyed by radial degree
    for k in range(J):
        sign = (-1) ** k
        for d, ang in power.items():
            e = k + 1
            # (1/(N-1)!) d^{N-1}/d lambda^{N-1} (X - lambda)^{-e}
            coef = sign * comb(e + N - 2, N - 1)
            key = (d, e + N - 1)
            val = ang * coef
            terms[key] = terms[key] + val if key in terms else val
        nxt: dict = {}
        for d1, a1 in power.items():
            for d2, a2 in lower:
                nxt[d1 + d2] = nxt[d1 + d2] + a1 * a2 if d1 + d2 in nxt else a1 * a2
        power = nxt
    terms = {k: v for k, v in terms.items() if not v.is_zero()}
    exact_above = None
    if lower:
        dmax = max(d for d, _ in lower)
        exact_above = J * dmax - m * (J + 1) - m * (N - 1)
    return ParamSymbol(p.n, m, c, N, terms, exact_above)


# --- asymptotic expansions ---------------------------------------------------

@dataclass
class AsymptoticExpansion:
    """Coefficients of (-lambda)^exponent (log(-lambda))^log_power."""

    N: int
    floor: Fraction
    terms: dict = field(default_factory=dict)
    tags: dict = field(default_factory=dict)

    def add(self, exponent, log_power: int, value: Scalar, tag: str = "") -> None:
        key = (Fraction(exponent), int(log_power))
        if key[0] < self.floor:
            return
        self.terms[key] = self.terms.get(key, Scalar.zero()) + value
        if tag:
            self.tags.setdefault(key, set()).add(tag)

    def coefficient(self, exponent, log_power: int = 0) -> Scalar:
        return self.terms.get((Fraction(exponent), int(log_power)), Scalar.zero())

    def keys(self) -> list:
        return sorted(self.terms, key=lambda k: (-k[0], -k[1]))

    def nonzero(self) -> dict:
        return {k: v for k, v in self.terms.items() if not v.is_zero()}

    def raise_power(self) -> "AsymptoticExpansion":
        """Expansion for N+1 via (P-lambda)^{-N-1} = (1/N) d/dlambda (P-lambda)^{-N}.

        With t = -lambda: d/dlambda = -d/dt.
        """
        N = self.N
        out = AsymptoticExpansion(N + 1, self.floor - 1)
        factor = Scalar.exact(Fraction(-1, N))
        for (alpha, l), c in self.terms.items():
            tags = self.tags.get((alpha, l), set())
            tag = ",".join(sorted(tags))
            if alpha != 0:
                out.add(alpha - 1, l, factor * c * Scalar.exact(alpha), tag)
            if l:
                out.add(alpha - 1, l - 1, factor * c * Scalar.exact(l), tag)
        return out

    def __call__(self, lam: complex) -> complex:
        t = complex(-lam)
        lt = np.log(t)
        return sum(float(c) * t ** float(a) * lt**l for (a, l), c in self.terms.items())

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "floor": str(self.floor),
            "rows": [
                {
                    "exponent": str(a),
                    "log_power": l,
                    "value": self.terms[(a, l)].to_json(),
                    "branch": ",".join(sorted(self.tags.get((a, l), ()))),
                }
                for a, l in self.keys()
            ],
        }


def _mu_to_t(target: AsymptoticExpansion, alpha: Fraction, l: int, coef: Scalar, tag: str) -> None:
    """Add coef * mu^alpha (log mu)^l with mu = 1 + t, re-expanded in t."""
    floor = target.floor
    j = 0
    while alpha - j >= floor:
        b = Scalar.exact(gen_binomial(alpha, j))
        if l == 0:
            target.add(alpha - j, 0, coef * b, tag if j == 0 else "reexpansion")
        else:
            target.add(alpha - j, 1, coef * b, tag if j == 0 else "reexpansion")
            i = 1
            while alpha - j - i >= floor:
                # log(1 + 1/t) = sum (-1)^{i+1} t^{-i} / i
                target.add(alpha - j - i, 0, coef * b * Scalar.exact(Fraction((-1) ** (i + 1), i)), "reexpansion")
                i += 1
        j += 1


def _model_term(target: AsymptoticExpansion, degree, K, n, m, moment: Scalar) -> None:
    """int a_d(xi) (|xi|^m + mu)^{-1} dxi-bar as mu -> inf, pushed to t = mu - 1."""
    mu0 = dslash(n) * moment
    if mu0.is_zero():
        return
    s = Fraction(degree) + n
    floor = target.floor
    q = s / m
    if q.denominator != 1:
        _mu_to_t(target, q - 1, 0, mu0 * master_integral(s, m), "power")
    k = 0
    while -k - 1 >= floor:
        sign = Scalar.exact((-1) ** k)
        val = Fraction(1) / (s + K + m * k)
        if s + m * k == 0:
            _mu_to_t(target, Fraction(-k - 1), 1, sign * mu0 * Scalar.exact(Fraction(1) / m), "log")
        else:
            val -= Fraction(1) / (s + m * k)
        _mu_to_t(target, Fraction(-k - 1), 0, sign * mu0 * Scalar.exact(val), "finite-part" if k == 0 else "ball")
        k += 1


def check_model_order(a: ClassicalSymbol, m) -> Fraction:
    m = Fraction(m)
    if m <= 0 or m.denominator != 1 or m % 2:
        raise ExpansionError(f"model operator order m must be an even natural, got {m}")
    if a.order is not None and m <= a.order + a.n:
        raise ExpansionError(
            f"model operator requires m > sigma + n (m={m}, sigma+n={a.order + a.n})"
        )
    return m


def model_trace_expansion(a: ClassicalSymbol, m, N: int = 1, floor=None) -> AsymptoticExpansion:
    """Expansion of int tr a(xi) (|xi|^m + 1 - lambda)^{-N} dxi-bar in (-lambda).

    Exponents >= floor (default -N-2) are reported; all reported
    coefficients are complete.
    """
    m = check_model_order(a, m)
    if N < 1:
        raise ExpansionError("N must be >= 1")
    floor = Fraction(-N - 2) if floor is None else Fraction(floor)
    exp1 = AsymptoticExpansion(1, floor + (N - 1))
    for t in a.terms:
        _model_term(exp1, t.degree, t.K, a.n, m, sphere_moment(t.angular))
    out = exp1
    for _ in range(N - 1):
        out = out.raise_power()
    out.floor = floor
    return out


def coefficient_of_inverse_lambda(e: AsymptoticExpansion) -> tuple[Scalar, Scalar]:
    """(log coefficient, constant coefficient) at (-lambda)^{-N}."""
    return e.coefficient(-e.N, 1), e.coefficient(-e.N, 0)


# --- differences of resolvents ------------------------------------------------

def _harmonic(k: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, k + 1)), Fraction(0))


def _beta_int(a: int, b: int) -> Fraction:
    return Fraction(factorial(a - 1) * factorial(b - 1), factorial(a + b - 1))


def _geometric_terms_needed(a: ClassicalSymbol, p: ClassicalSymbol) -> int:
    c, m = p.radial_leading()
    lower = _lower_terms(p)
    if not lower or a.order is None:
        return 1
    gap = m - max(d for d, _ in lower)
    need = a.order + a.n
    J = 1
    while J * gap <= need:
        J += 1
    return J


def _integrate_at_minus_one(pieces, m: Fraction, N: int) -> Scalar:
    """int_{R^n} of joint-degree (-Nm-n) pieces at lambda = -1.

    ``pieces`` are (moment, c, e) for  moment-weighted |xi|^{m(e-N)-n} (c|xi|^m+1)^{-e}.
    The e = N pieces are log-divergent one by one; their moments must cancel.
    """
    total = Scalar.zero()
    critical = []
    for moment, c, e in pieces:
        if e > N:
            k = e - N
            total = total + moment * Scalar.exact(Fraction(1) / m * Fraction(1) / c**k * _beta_int(k, N))
        elif e == N:
            critical.append((moment, c))
        else:
            raise ExpansionError("resolvent factor power below N (bookkeeping error)")
    if critical:
        if not ssum(mo for mo, _ in critical).is_zero():
            raise ExpansionError("non-integrable component at joint degree -Nm-n")
        for moment, c in critical:
            # finite part of (1/m) int u^{-1} (c u + 1)^{-N} du = (1/m)(-log c - H_{N-1}) + divergent
            total = total + moment * (Scalar.exact(-_harmonic(N - 1)) - Scalar.log(c)) * Scalar.exact(1 / m)
    return total


def _difference_at(a, p, p2, N):
    n = a.n
    m = p.radial_leading()[1]
    target = -N * m - n
    pieces = []
    for sign, q in ((1, p), (-1, p2)):
        J = _geometric_terms_needed(a, q)
        s = resolvent_symbol(q, N, J).times(a)
        for (d1, e), ang in s.component(target).items():
            pieces.append((Scalar.exact(sign) * sphere_moment(ang), s.c, e))
    return dslash(n) * _integrate_at_minus_one(pieces, m, N)


def difference_coefficient(a: ClassicalSymbol, p: ClassicalSymbol, p2: ClassicalSymbol, N: int = 1) -> Scalar:
    """Coefficient of (-lambda)^{-N} in Tr A((P-lambda)^{-N} - (P'-lambda)^{-N}).

    Computed from the N = 1 difference symbol and independently from the
    N-th derivative symbol; the two must agree.
    """
    _, m = p.radial_leading()
    _, m2 = p2.radial_leading()
    if m != m2:
        raise ExpansionError(f"order mismatch: {m} vs {m2} (use trace_defect)")
    if a.n != p.n or a.n != p2.n:
        raise SymbolError("dimension mismatch")
    if not a.terms:
        return Scalar.zero()
    shift = a.order + a.n
    if shift.denominator != 1 or shift < 0:
        return Scalar.zero()
    v1 = _difference_at(a, p, p2, 1)
    if N > 1:
        vN = _difference_at(a, p, p2, N)
        if not (v1 == vN or v1.close_to(vN, rel=1e-30)):
            raise ExpansionError(f"N-consistency failed: {v1} vs {vN}")
    return v1


def _log_truncation(a: ClassicalSymbol) -> int:
    if a.order is None:
        return 0
    return max(0, int(np.ceil(float(a.order + a.n)))) + 1


def trace_defect(a: ClassicalSymbol, p: ClassicalSymbol, p2: ClassicalSymbol) -> Scalar:
    """-res(A((1/m) log P - (1/m') log P'))."""
    if not a.terms:
        return Scalar.zero()
    _, m = p.radial_leading()
    _, m2 = p2.radial_leading()
    J = _log_truncation(a)
    diff = series_log(p, J).scale(Scalar.exact(1 / m)) - series_log(p2, J).scale(Scalar.exact(1 / m2))
    return -residue0_log(a, diff)


def c0(a: ClassicalSymbol, p: ClassicalSymbol) -> Scalar:
    """Basic coefficient C_0(A,P) = TR_x(A) - (1/m) res_{x,0}(A log P)."""
    _, m = p.radial_leading()
    if not a.terms:
        return Scalar.zero()
    logp = series_log(p, _log_truncation(a))
    return finite_part(a) - Scalar.exact(1 / m) * residue0_log(a, logp)
