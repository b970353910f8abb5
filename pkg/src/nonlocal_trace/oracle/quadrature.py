"""Direct quadrature of resolvent-trace integrals and ball integrals.

Radial integrals are done with mpmath tanh-sinh quadrature, split at the
extension seam |xi| = 1 and at the resolvent scale |lambda|^{1/m}.
Angular integrals are exact (sphere moments) whenever p is constant on
the sphere termwise; otherwise they are done numerically (n <= 3).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp

from ..densities import dslash
from ..symbol_core import ClassicalSymbol, Scalar, sphere_moment
from ..symbol_core.angular import constant_on_sphere

ORACLE_DPS = 30


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class OracleValue:
    """Complex quadrature result with an absolute error estimate."""

    value: mpmath.mpc
    error: mpmath.mpf

    def __complex__(self):
        return complex(self.value)

    @property
    def real(self) -> Scalar:
        return Scalar.numeric(mpmath.re(self.value), self.error)

    def to_json(self) -> dict:
        return {
            "re": mpmath.nstr(mpmath.re(self.value), 20),
            "im": mpmath.nstr(mpmath.im(self.value), 20),
            "error": mpmath.nstr(self.error, 3),
        }


def _radial(term, r):
    d = _mpf(term.degree)
    if r >= 1:
        return r**d
    e = d + term.K
    if r == 0:
        return mpmath.mpf(0) if e > 0 else mpmath.mpf(1)
    return r**e


def _eval_poly(poly, omega):
    total = mpmath.mpf(0)
    for alpha, c in poly.items():
        v = mpmath.mpf(c.numerator) / c.denominator
        for w, k in zip(omega, alpha):
            if k:
                v *= w**k
        total += v
    return total


def _diag_entries(sym: ClassicalSymbol, M: int):
    """Per diagonal entry: list of (term, Poly)."""
    out = []
    for i in range(M):
        row = []
        for t in sym.terms:
            diag = t.angular.diag
            row.append((t, diag[i] if len(diag) > 1 else diag[0]))
        out.append(row)
    return out


def _radial_profile(p: ClassicalSymbol, M: int):
    """Per diagonal entry [(term, constant)] when p is constant on the sphere termwise, else None."""
    rows = []
    for entry in _diag_entries(p, M):
        row = []
        for t, poly in entry:
            c = constant_on_sphere(poly)
            if c is None:
                return None
            row.append((t, mpmath.mpf(c.numerator) / c.denominator))
        rows.append(row)
    return rows


def _check_decay(a: ClassicalSymbol, p: ClassicalSymbol, N: int) -> None:
    if a.n != p.n:
        raise OracleError(f"dimension mismatch: {a.n} vs {p.n}")
    if a.n > 3:
        raise OracleError("quadrature oracle supports n <= 3")
    _, m = p.radial_leading()
    sigma = a.order if a.order is not None else Fraction(-10**9)
    if not sigma - N * m < -a.n:
        raise OracleError(f"integrand not integrable: sigma - N m = {sigma - N * m} >= -n = {-a.n}")


def _mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def _breakpoints(lam, m):
    m = _mpf(Fraction(m))
    pts = [mpmath.mpf(0), mpmath.mpf(1)]
    scale = abs(mpmath.mpc(lam)) ** (1 / m)
    if scale > 2:
        pts.append(scale)
    pts.append(mpmath.inf)
    return pts


def _quad(f, pts):
    total, err = mpmath.mpc(0), mpmath.mpf(0)
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = mpmath.quad(f, [lo, hi], error=True, maxdegree=10)
        total += v
        err += abs(e)
    return total, err


def _sphere_quad(f, n):
    """Integral over S^{n-1} of f(omega)."""
    if n == 1:
        return f((mpmath.mpf(1),)) + f((mpmath.mpf(-1),))
    if n == 2:
        return mpmath.quad(lambda th: f((mpmath.cos(th), mpmath.sin(th))), [0, mpmath.pi / 2, mpmath.pi, 3 * mpmath.pi / 2, 2 * mpmath.pi])
    return mpmath.quad(
        lambda th, ph: mpmath.sin(th) * f((mpmath.sin(th) * mpmath.cos(ph), mpmath.sin(th) * mpmath.sin(ph), mpmath.cos(th))),
        [0, mpmath.pi / 2, mpmath.pi],
        [0, mpmath.pi, 2 * mpmath.pi],
    )


def numeric_trace(a: ClassicalSymbol, p: ClassicalSymbol, N: int, lam, tol: float = 1e-20) -> OracleValue:
    """int tr a(xi) (p(xi) - lambda)^{-N} dxi-bar by direct quadrature."""
    _check_decay(a, p, N)
    n = a.n
    M = max(a.M, p.M)
    _, m = p.radial_leading()
    with mp.workdps(ORACLE_DPS):
        lam = mpmath.mpc(lam)
        pts = _breakpoints(lam, m)
        norm = dslash(n).value
        prof = _radial_profile(p, M)
        a_rows = _diag_entries(a, M)
        if prof is not None:
            total, err = mpmath.mpc(0), mpmath.mpf(0)
            for i in range(M):
                moments = [(t, sphere_moment(poly).value) for t, poly in a_rows[i]]
                moments = [(t, mu) for t, mu in moments if mu != 0]
                if not moments:
                    continue
                row = prof[i]

                def f(r, moments=moments, row=row):
                    pr = sum(c * _radial(t, r) for t, c in row)
                    ar = sum(mu * _radial(t, r) for t, mu in moments)
                    return ar * (pr - lam) ** (-N) * r ** (n - 1)

                v, e = _quad(f, pts)
                total += v
                err += e
        else:
            p_rows = _diag_entries(p, M)

            def radial_integral(omega):
                def f(r):
                    s = mpmath.mpc(0)
                    for i in range(M):
                        pr = sum(_eval_poly(poly, omega) * _radial(t, r) for t, poly in p_rows[i])
                        ar = sum(_eval_poly(poly, omega) * _radial(t, r) for t, poly in a_rows[i])
                        s += ar * (pr - lam) ** (-N)
                    return s * r ** (n - 1)

                return _quad(f, pts)[0]

            total = _sphere_quad(radial_integral, n)
            # nested quadrature: estimate by a coarser rerun
            with mp.workdps(ORACLE_DPS - 10):
                coarse = _sphere_quad(radial_integral, n)
            err = abs(total - coarse)
        value = total * norm
        err = err * norm
        if err > max(tol, tol * abs(value)) * 1e6:
            raise OracleError(f"quadrature did not converge (error estimate {mpmath.nstr(err, 3)})")
        return OracleValue(+value, +err)


# --- ball integrals --------------------------------------------------------

def ball_integral(a: ClassicalSymbol, R) -> mpmath.mpf:
    """int_{|xi| <= R} tr a dxi-bar, radial part by quadrature."""
    n = a.n
    with mp.workdps(ORACLE_DPS):
        R = mpmath.mpf(R)
        total = mpmath.mpf(0)
        for t in a.terms:
            mu = sphere_moment(t.angular).value
            if mu == 0:
                continue
            pts = [0, 1, R] if R > 1 else [0, R]
            total += mu * mpmath.quad(lambda r, t=t: _radial(t, r) * r ** (n - 1), pts)
        return +(total * dslash(n).value)


def fit_radius_constant(a: ClassicalSymbol, radii=None, condition_threshold: float = 1e14) -> Scalar:
    """Constant term of the large-R behaviour of the ball integral, by least squares.

    Basis: R^{d+n} for each degree with d + n != 0, log R when a degree -n
    term is present, and 1.
    """
    n = a.n
    powers = sorted({t.degree + n for t in a.terms if t.degree + n != 0}, reverse=True)
    has_log = any(t.degree + n == 0 for t in a.terms)
    nbasis = len(powers) + int(has_log) + 1
    if radii is None:
        radii = [mpmath.mpf(2) ** i for i in range(1, nbasis + 5)]
    with mp.workdps(ORACLE_DPS):
        rows, rhs = [], []
        for R in radii:
            R = mpmath.mpf(R)
            row = [R ** _mpf(s) for s in powers]
            if has_log:
                row.append(mpmath.log(R))
            row.append(mpmath.mpf(1))
            scale = max(abs(x) for x in row)
            rows.append([x / scale for x in row])
            rhs.append(ball_integral(a, R) / scale)
        A = mpmath.matrix(rows)
        sv = mpmath.svd_r(A, compute_uv=False)
        cond = max(sv) / min(sv) if min(sv) > 0 else mpmath.inf
        if cond > condition_threshold:
            raise OracleError(f"radius fit is ill-conditioned (condition {mpmath.nstr(cond, 3)})")
        x, res = mpmath.qr_solve(A, mpmath.matrix(rhs))
        return Scalar.numeric(x[len(row) - 1], res * cond + mpmath.mpf(10) ** (-ORACLE_DPS + 5))
