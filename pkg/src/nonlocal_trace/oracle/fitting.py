"""Least-squares fitting of sampled resolvent traces against a known
exponent ladder (-lambda)^alpha (log(-lambda))^l.

The fitter follows the scikit-learn estimator protocol: X holds the
complex sample points lambda, y the sampled values.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..resolvent import AsymptoticExpansion
from .quadrature import ORACLE_DPS, OracleError

FIT_DPS = ORACLE_DPS


@dataclass(frozen=True)
class RaySampler:
    """Sample points lambda = -t e^{i theta}, t = t0 rho^i, i < S."""

    theta: float = 0.0
    t0: float = 16.0
    rho: float = 4.0
    S: int = 12
    tol: float = 1e-20

    def __post_init__(self):
        if not abs(self.theta) < math.pi:
            raise OracleError(f"ray angle must satisfy |theta| < pi, got {self.theta}")
        if self.t0 < 2:
            raise OracleError("t0 must be >= 2")
        if self.rho <= 1:
            raise OracleError("rho must be > 1")

    def lambdas(self) -> list:
        with mp.workdps(FIT_DPS):
            phase = mpmath.expj(mpmath.mpf(self.theta))
            return [-mpmath.mpf(self.t0) * mpmath.mpf(self.rho) ** i * phase for i in range(self.S)]

    def sample(self, fn) -> tuple[list, list]:
        lams = self.lambdas()
        return lams, [fn(lam) for lam in lams]


def _basis(lam, ladder):
    z = -mpmath.mpc(lam)
    lz = mpmath.log(z)
    return [z ** (mpmath.mpf(a.numerator) / a.denominator) * lz**l for a, l in ladder]


class LadderFit(BaseEstimator):
    """Weighted least squares on a fixed exponent ladder.

    Coefficients are real; each complex sample contributes its real and
    imaginary parts as two rows, weighted by 1/|value|.
    """

    def __init__(self, ladder=(), condition_threshold: float = 1e16, weighting: str = "relative"):
        self.ladder = ladder
        self.condition_threshold = condition_threshold
        self.weighting = weighting

    def _ladder(self):
        lad = [(Fraction(a), int(l)) for a, l in self.ladder]
        if len(set(lad)) != len(lad):
            raise OracleError("ladder slots must be distinct")
        return lad

    def fit(self, X, y):
        lad = self._ladder()
        if len(X) != len(y):
            raise OracleError("X and y have different lengths")
        if len(X) < len(lad) + 2:
            raise OracleError(f"need at least {len(lad) + 2} samples for {len(lad)} ladder slots")
        with mp.workdps(FIT_DPS):
            if all(mpmath.mpc(v) == 0 for v in y):
                # identically zero samples: nothing to condition
                self.coef_ = [mpmath.mpf(0)] * len(lad)
                self.residual_, self.condition_, self.inconclusive_ = mpmath.mpf(0), mpmath.mpf(1), False
                return self
            rows, rhs = [], []
            for lam, v in zip(X, y):
                v = mpmath.mpc(v)
                w = 1 / abs(v) if self.weighting == "relative" and v != 0 else mpmath.mpf(1)
                b = _basis(lam, lad)
                rows.append([w * mpmath.re(x) for x in b])
                rhs.append(w * mpmath.re(v))
                if any(mpmath.im(x) != 0 for x in b) or mpmath.im(v) != 0:
                    rows.append([w * mpmath.im(x) for x in b])
                    rhs.append(w * mpmath.im(v))
            A = mpmath.matrix(rows)
            # column equilibration before the condition estimate
            scales = [max(abs(A[i, j]) for i in range(A.rows)) or mpmath.mpf(1) for j in range(A.cols)]
            for j in range(A.cols):
                for i in range(A.rows):
                    A[i, j] /= scales[j]
            sv = mpmath.svd_r(A, compute_uv=False)
            smin = min(sv)
            cond = max(sv) / smin if smin > 0 else mpmath.inf
            self.condition_ = cond
            self.inconclusive_ = bool(cond > self.condition_threshold)
            try:
                x, res = mpmath.qr_solve(A, mpmath.matrix(rhs))
            except ValueError:  # numerically singular
                self.inconclusive_ = True
                x, res = [mpmath.nan] * A.cols, mpmath.nan
            self.coef_ = [x[j] / scales[j] for j in range(A.cols)]
            self.residual_ = res
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("LadderFit is not fitted")
        lad = self._ladder()
        with mp.workdps(FIT_DPS):
            return [complex(mpmath.fsum(c * b for c, b in zip(self.coef_, _basis(lam, lad)))) for lam in X]


@dataclass
class FitSlot:
    exponent: Fraction
    log_power: int
    fitted: float
    symbolic: float | None = None
    rel_error: float | None = None
    verdict: str = "fitted"


@dataclass
class FitReport:
    slots: list = field(default_factory=list)
    residual: float = 0.0
    condition: float = 0.0
    inconclusive: bool = False

    def slot(self, exponent, log_power: int = 0) -> FitSlot:
        key = (Fraction(exponent), int(log_power))
        for s in self.slots:
            if (s.exponent, s.log_power) == key:
                return s
        raise KeyError(key)

    @property
    def passed(self) -> bool:
        return not self.inconclusive and all(s.verdict != "fail" for s in self.slots)

    def to_json(self) -> dict:
        return {
            "residual": self.residual,
            "condition": self.condition,
            "inconclusive": self.inconclusive,
            "slots": [
                {
                    "exponent": str(s.exponent),
                    "log_power": s.log_power,
                    "fitted": s.fitted,
                    "symbolic": s.symbolic,
                    "rel_error": s.rel_error,
                    "verdict": s.verdict,
                }
                for s in self.slots
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["exponent", "log_power", "fitted", "symbolic", "rel_error", "verdict"])
        for s in self.slots:
            w.writerow([str(s.exponent), s.log_power, repr(s.fitted), "" if s.symbolic is None else repr(s.symbolic),
                        "" if s.rel_error is None else f"{s.rel_error:.3e}", s.verdict])
        return buf.getvalue()


def default_ladder(sigma, m, n: int, N: int, floor) -> list:
    """Grid of (exponent, log-power) slots down to ``floor``.

    Power slots (sigma+n-j)/m - N and, at each integer -k-N, a log slot and
    a log-free slot.
    """
    sigma, m, floor = Fraction(sigma), Fraction(m), Fraction(floor)
    slots = set()
    j = 0
    while (sigma + n - j) / m - N >= floor:
        e = (sigma + n - j) / m - N
        if not (e.denominator == 1 and e <= -N):
            slots.add((e, 0))
        j += 1
    k = 0
    while -k - N >= floor:
        slots.add((Fraction(-k - N), 1))
        slots.add((Fraction(-k - N), 0))
        k += 1
    return sorted(slots, key=lambda s: (-s[0], -s[1]))


def fit_expansion(
    lambdas,
    values,
    ladder,
    symbolic: AsymptoticExpansion | None = None,
    compare_above=None,
    rel_tol: float = 1e-6,
    condition_threshold: float = 1e16,
) -> FitReport:
    """Fit samples on ``ladder`` and compare with symbolic coefficients.

    Slots with exponent >= ``compare_above`` are compared. A slot whose
    symbolic value is zero is judged against rel_tol times the largest
    compared symbolic magnitude.
    """
    est = LadderFit(ladder=tuple(ladder), condition_threshold=condition_threshold).fit(lambdas, values)
    report = FitReport(residual=float(est.residual_), condition=float(est.condition_), inconclusive=est.inconclusive_)
    lad = est._ladder()
    compared = []
    for (a, l), c in zip(lad, est.coef_):
        slot = FitSlot(a, l, float(c))
        if symbolic is not None and (compare_above is None or a >= Fraction(compare_above)):
            slot.symbolic = float(symbolic.coefficient(a, l))
            compared.append(slot)
        report.slots.append(slot)
    scale = max((abs(s.symbolic) for s in compared), default=0.0)
    for s in compared:
        if s.symbolic != 0:
            s.rel_error = abs(s.fitted - s.symbolic) / abs(s.symbolic)
            ok = s.rel_error <= rel_tol
        else:
            s.rel_error = abs(s.fitted) / scale if scale else abs(s.fitted)
            ok = s.rel_error <= rel_tol
        s.verdict = "inconclusive" if report.inconclusive else ("pass" if ok else "fail")
    return report


def sample_values(sampler: RaySampler, fn) -> tuple[list, list]:
    lams, vals = sampler.sample(fn)
    return lams, [v.value if hasattr(v, "value") else v for v in vals]
