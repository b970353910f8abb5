"""Torus lattice sums: (2 pi)^{-n} sum_{k in Z^n} tr a(k) (p(k) - lambda)^{-N}.

The sum is split with a smooth radial cutoff chi(|k|/R): the lattice sum of
f*chi is computed directly and the remaining integral of f*(1 - chi) by
radial quadrature.  For large |lambda| this agrees with the integral over
R^n up to Poisson-summation corrections that decay exponentially.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from mpmath import mp

from ..densities import dslash
from ..symbol_core import ClassicalSymbol, sphere_moment
from .quadrature import OracleError, OracleValue, _check_decay, _radial, _radial_profile


def _smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / u), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / (1.0 - u)), 0.0)
        return np.where(a + b > 0, a / (a + b), 0.0)


def _cutoff(r, R):
    """1 on |k| <= R/2, 0 on |k| >= R."""
    return _smooth_step(2.0 * (1.0 - r / R))


def _cutoff_mp(r, R):
    u = 2 * (1 - r / R)
    if u <= 0:
        return mpmath.mpf(0)
    if u >= 1:
        return mpmath.mpf(1)
    a, b = mpmath.exp(-1 / u), mpmath.exp(-1 / (1 - u))
    return a / (a + b)


def _entry(sym: ClassicalSymbol, i: int, pts: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(pts, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        omega = np.where(r[..., None] > 0, pts / np.where(r > 0, r, 1.0)[..., None], 0.0)
    out = np.zeros(len(pts))
    for t in sym.terms:
        diag = t.angular.diag
        poly = diag[i] if len(diag) > 1 else diag[0]
        out = out + t.radial(r) * poly.evaluate_many(omega)
    return out


def _lattice_points(n: int, R: float) -> np.ndarray:
    k = np.arange(-int(R), int(R) + 1, dtype=float)
    grid = np.stack(np.meshgrid(*([k] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return grid[np.linalg.norm(grid, axis=-1) < R]


def _lattice_part(a, p, N, lam, R, M) -> complex:
    pts = _lattice_points(a.n, R)
    chi = _cutoff(np.linalg.norm(pts, axis=-1), R)
    total = 0j
    for i in range(M):
        vals = _entry(a, i, pts) * (_entry(p, i, pts).astype(complex) - lam) ** (-N) * chi
        total += math.fsum(vals.real) + 1j * math.fsum(vals.imag)
    return total


def _tail_part(a, p, N, lam, R, M, prof) -> complex:
    n = a.n
    total = mpmath.mpc(0)
    with mp.workdps(20):
        lam = mpmath.mpc(lam)
        R = mpmath.mpf(R)
        for i in range(M):
            moments = []
            for t in a.terms:
                diag = t.angular.diag
                mu = sphere_moment(diag[i] if len(diag) > 1 else diag[0]).value
                if mu != 0:
                    moments.append((t, mu))
            if not moments:
                continue
            row = prof[i]

            def f(r, moments=moments, row=row):
                pr = sum(c * _radial(t, r) for t, c in row)
                ar = sum(mu * _radial(t, r) for t, mu in moments)
                return ar * (pr - lam) ** (-N) * r ** (n - 1) * (1 - _cutoff_mp(r, R))

            total += mpmath.quad(f, [R / 2, R, mpmath.inf])
        return complex(total)


def lattice_trace(a: ClassicalSymbol, p: ClassicalSymbol, N: int, lam, tol: float = 1e-9, R: float | None = None) -> OracleValue:
    """Normalized lattice sum with an error estimate from doubling the cutoff radius.

    The estimate is empirical, not a rigorous bound. Raises OracleError
    when it exceeds ``tol`` relative to the value.
    """
    _check_decay(a, p, N)
    M = max(a.M, p.M)
    prof = _radial_profile(p, M)
    if prof is None:
        raise OracleError("lattice oracle needs p constant on the sphere termwise")
    _, m = p.radial_leading()
    lam = complex(lam)
    if R is None:
        R = max(64.0, 8.0 * abs(lam) ** (1.0 / float(m)))
    norm = float(dslash(a.n).value)

    def at(radius):
        return norm * (_lattice_part(a, p, N, lam, radius, M) + _tail_part(a, p, N, lam, radius, M, prof))

    v1 = at(R)
    v2 = at(2 * R)
    err = abs(v2 - v1)
    if err > tol * max(abs(v2), 1e-300):
        raise OracleError(f"lattice tail estimate {err:.2e} exceeds tolerance")
    return OracleValue(mpmath.mpc(v2), mpmath.mpf(err))

