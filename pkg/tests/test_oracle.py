"""Brute-force numeric oracles: quadrature, lattice sums and ladder fits."""
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from nonlocal_trace.corpus import model_operator
from nonlocal_trace.densities import finite_part
from nonlocal_trace.oracle import (
    FitReport,
    LadderFit,
    OracleError,
    RaySampler,
    default_ladder,
    fit_expansion,
    fit_radius_constant,
    lattice_trace,
    numeric_trace,
    sample_values,
)
from nonlocal_trace.resolvent import model_trace_expansion, trace_defect
from nonlocal_trace.symbol_core import parse_symbol

LAPLACE_1 = parse_symbol("|xi|^2; 1", 1)


# --- numeric_trace ------------------------------------------------------------------

def test_arctan_closed_form():
    v = numeric_trace(parse_symbol("1", 1), LAPLACE_1, 1, -3)
    assert abs(v.value - mpmath.mpf(1) / 4) < 1e-25
    assert v.error >= 0


def test_smoothing_symbol_limit():
    a = parse_symbol("1/|xi|^2", 1)
    t = mpmath.mpf(10) ** 8
    v = numeric_trace(a, LAPLACE_1, 1, -(t - 1)).value.real
    # t * value = 2/pi - (1/2) t^{-1/2} + O(1/t)
    assert float(t * v + t**-0.5 / 2) == pytest.approx(float(finite_part(a)), rel=1e-7)


@pytest.mark.parametrize("n", [1, 2])
def test_second_power_is_lambda_derivative(n):
    a = parse_symbol("1/|xi|", n)
    p = parse_symbol("|xi|^2; xi1; 2", n) if n == 1 else model_operator(n, 2)
    lam, h = mpmath.mpc(-7, 2), mpmath.mpf(10) ** -6
    with mpmath.workdps(30):
        d1 = (numeric_trace(a, p, 1, lam + h).value - numeric_trace(a, p, 1, lam - h).value) / (2 * h)
        v2 = numeric_trace(a, p, 2, lam).value
        assert abs(d1 - v2) <= 1e-9 * abs(v2)


def test_non_radial_lower_order_uses_angular_quadrature():
    a = parse_symbol("1", 1)
    p = parse_symbol("|xi|^2; xi1", 1)
    t = 50
    v = numeric_trace(a, p, 2, -t, tol=1e-12)
    # completing the square: int (xi^2 + xi + t)^{-2} dxi-bar = (1/4) (t - 1/4)^{-3/2}
    assert float(v.value.real) == pytest.approx(0.25 * (t - 0.25) ** -1.5, rel=1e-12)


def test_decay_precondition():
    with pytest.raises(OracleError):
        numeric_trace(parse_symbol("|xi|", 1), LAPLACE_1, 1, -3)


# --- lattice_trace --------------------------------------------------------------------

def test_lattice_matches_integral_at_large_lambda():
    a = parse_symbol("1", 1)
    L = lattice_trace(a, LAPLACE_1, 2, -1e3)
    Q = numeric_trace(a, LAPLACE_1, 2, -1e3)
    assert abs(L.value - Q.value) <= 1e-6 * abs(Q.value)


def test_lattice_two_dimensions():
    # the realized |xi|^{-2} has a seam at |xi| = 1, so only the truncation is checked
    a = parse_symbol("1/|xi|^2", 2)
    p = model_operator(2, 2)
    t = 2e3
    L = lattice_trace(a, p, 1, -t)
    assert L.error < 1e-9 * abs(L.value)
    R0 = 1200
    k = np.arange(-R0, R0 + 1, dtype=float)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    r2 = (k1**2 + k2**2).ravel()
    r2 = r2[r2 <= R0**2]
    amp = np.where(r2 >= 1, 1 / np.where(r2 > 0, r2, 1), 1.0)
    c = 1 + t
    head = math.fsum(amp / (r2 + c))
    tail = 2 * math.pi * math.log1p(c / R0**2) / (2 * c)
    brute = (head + tail) / (2 * math.pi) ** 2
    assert float(L.value.real) == pytest.approx(brute, rel=1e-6)


def test_lattice_at_small_lambda_makes_no_agreement_claim():
    a = parse_symbol("1", 1)
    L = lattice_trace(a, LAPLACE_1, 2, 0)
    Q = numeric_trace(a, LAPLACE_1, 2, 0)
    # sum_k (k^2+1)^{-2} / (2 pi) = (pi coth(pi) + pi^2 csch(pi)^2) / (4 pi)
    exact = (mpmath.pi * mpmath.coth(mpmath.pi) + mpmath.pi**2 * mpmath.csch(mpmath.pi) ** 2) / 2 / (2 * mpmath.pi)
    assert abs(L.value - exact) < 1e-9
    assert abs(L.value - Q.value) > 1e-6


def test_lattice_requires_radial_operator():
    with pytest.raises(OracleError):
        lattice_trace(parse_symbol("1", 2), parse_symbol("|xi|^2; xi1", 2), 2, -1e3)


# --- ladder fitting ------------------------------------------------------------------------

def _synthetic(fn, ladder, **kw):
    sampler = RaySampler(S=len(ladder) + 4, **kw)
    lams, vals = sample_values(sampler, fn)
    return fit_expansion(lams, vals, ladder)


def test_fit_power_pair():
    ladder = [(Fraction(-1, 2), 0), (Fraction(-1), 0)]
    rep = _synthetic(lambda lam: 3 * (-lam) ** -0.5 + 5 * (-lam) ** -1, ladder)
    assert rep.slot(Fraction(-1, 2)).fitted == pytest.approx(3, abs=1e-9)
    assert rep.slot(-1).fitted == pytest.approx(5, abs=1e-9)


def test_fit_log_pair():
    ladder = [(Fraction(-1), 1), (Fraction(-1), 0)]
    rep = _synthetic(lambda lam: (-lam) ** -1 * mpmath.log(-lam) + 2 * (-lam) ** -1, ladder, theta=0.5)
    assert rep.slot(-1, 1).fitted == pytest.approx(1, abs=1e-8)
    assert rep.slot(-1, 0).fitted == pytest.approx(2, abs=1e-8)


def test_fit_against_numeric_trace():
    a, p = parse_symbol("1/|xi|", 1), model_operator(1, 4)
    ladder = default_ladder(a.order, 4, 1, 1, -3)
    assert (Fraction(-3, 4), 0) not in ladder
    assert (Fraction(-1), 1) in ladder and (Fraction(-5, 4), 0) in ladder
    e = model_trace_expansion(a, 4, 1, floor=-3)
    lams, vals = sample_values(RaySampler(t0=64, S=len(ladder) + 4), lambda lam: numeric_trace(a, p, 1, lam))
    rep = fit_expansion(lams, vals, ladder, e, compare_above=-1)
    assert rep.passed
    assert rep.slot(-1, 1).fitted == pytest.approx(1 / (4 * math.pi), rel=1e-6)
    assert rep.slot(-1, 0).fitted == pytest.approx(1 / (2 * math.pi), rel=1e-6)


@pytest.mark.parametrize("theta", [math.pi / 4, -math.pi / 4])
def test_ray_independence(theta):
    a, p = parse_symbol("1/|xi|", 1), model_operator(1, 2)
    ladder = default_ladder(a.order, 2, 1, 1, -3)
    fits = []
    for th in (0.0, theta):
        lams, vals = sample_values(RaySampler(theta=th, t0=64, S=len(ladder) + 4), lambda lam: numeric_trace(a, p, 1, lam))
        fits.append(fit_expansion(lams, vals, ladder))
    for key in ((-1, 1), (-1, 0)):
        assert fits[1].slot(*key).fitted == pytest.approx(fits[0].slot(*key).fitted, rel=1e-6)


def test_fit_is_deterministic():
    a, p = parse_symbol("1", 1), LAPLACE_1
    ladder = default_ladder(0, 2, 1, 1, -2)
    runs = []
    for _ in range(2):
        lams, vals = sample_values(RaySampler(S=len(ladder) + 3), lambda lam: numeric_trace(a, p, 1, lam))
        runs.append(fit_expansion(lams, vals, ladder).to_csv())
    assert runs[0] == runs[1]


def test_different_order_model_defect_matches_fits():
    # both model operators give the same fitted constant, so the defect is 0
    a = parse_symbol("1/|xi|", 1)
    consts = []
    for m in (2, 4):
        p = model_operator(1, m)
        ladder = default_ladder(a.order, m, 1, 1, -3)
        lams, vals = sample_values(RaySampler(t0=64, S=len(ladder) + 4), lambda lam: numeric_trace(a, p, 1, lam))
        consts.append(fit_expansion(lams, vals, ladder).slot(-1, 0).fitted)
    assert consts[0] == pytest.approx(consts[1], rel=1e-6)
    assert trace_defect(a, model_operator(1, 2), model_operator(1, 4)).is_zero()


def test_zero_symbolic_slots_use_scaled_tolerance():
    ladder = [(Fraction(-1, 2), 0), (Fraction(-1), 0)]
    e = model_trace_expansion(parse_symbol("1", 1), 2, 1)
    lams, vals = sample_values(RaySampler(S=6), lambda lam: 0.5 * (-lam) ** -0.5 + 1e-12 * (-lam) ** -1)
    rep = fit_expansion(lams, vals, ladder, e)
    zero = rep.slot(-1)
    assert zero.symbolic == 0 and zero.verdict == "pass"


# --- estimator protocol ------------------------------------------------------------------------

def test_estimator_params_and_clone():
    est = LadderFit(ladder=((Fraction(-1), 0),), condition_threshold=1e10)
    params = est.get_params()
    assert params == {"ladder": ((Fraction(-1), 0),), "condition_threshold": 1e10, "weighting": "relative"}
    twin = clone(est)
    assert twin.get_params() == params and not hasattr(twin, "coef_")
    est.set_params(weighting="uniform")
    assert est.weighting == "uniform"


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        LadderFit(ladder=((Fraction(-1), 0),)).predict([-10])


def test_fit_then_predict():
    ladder = ((Fraction(-1, 2), 0), (Fraction(-1), 0))
    X = RaySampler(S=6).lambdas()
    y = [2 * (-lam) ** -0.5 - (-lam) ** -1 for lam in X]
    est = LadderFit(ladder=ladder).fit(X, y)
    assert [complex(v) for v in y] == pytest.approx(est.predict(X), rel=1e-12)


def test_ladder_validation():
    with pytest.raises(OracleError):
        LadderFit(ladder=((Fraction(-1), 0), (Fraction(-1), 0))).fit([-1] * 5, [1] * 5)
    with pytest.raises(OracleError):
        LadderFit(ladder=((Fraction(-1), 0), (Fraction(-2), 0))).fit([-16, -64, -256], [1, 2, 3])


def test_ill_conditioned_fit_is_inconclusive():
    ladder = [(Fraction(k, 8) - 1, 0) for k in range(6)]
    lams, vals = sample_values(RaySampler(S=8, rho=1.05), lambda lam: (-lam) ** -1)
    rep = fit_expansion(lams, vals, ladder, condition_threshold=1e6)
    assert rep.inconclusive and not rep.passed


def test_sampler_validation():
    with pytest.raises(OracleError):
        RaySampler(theta=math.pi)
    with pytest.raises(OracleError):
        RaySampler(t0=1)
    with pytest.raises(OracleError):
        RaySampler(rho=1)
    lams = RaySampler(t0=16, rho=4, S=3).lambdas()
    assert [float(-l.real) for l in lams] == [16, 64, 256]


def test_report_serialization():
    rep = FitReport()
    lams, vals = sample_values(RaySampler(S=5), lambda lam: (-lam) ** -1)
    rep = fit_expansion(lams, vals, [(Fraction(-1), 0)])
    header = rep.to_csv().splitlines()[0]
    assert header == "exponent,log_power,fitted,symbolic,rel_error,verdict"
    assert rep.to_json()["slots"][0]["exponent"] == "-1"


# --- radius fit --------------------------------------------------------------------------------

@pytest.mark.parametrize(
    "text,expected,tol",
    [("1/|xi|", 1 / (2 * math.pi), 1e-8), ("1", 0.0, 1e-9), ("1/|xi|^2", 2 / math.pi, 1e-8)],
)
def test_radius_constant(text, expected, tol):
    v = fit_radius_constant(parse_symbol(text, 1))
    assert abs(float(v) - expected) <= tol * max(1.0, abs(expected))


def test_radius_constant_two_dimensions():
    a = parse_symbol("xi1^2/|xi|; 1/|xi|^2; xi1^2/|xi|^4", 2)
    assert float(fit_radius_constant(a)) == pytest.approx(float(finite_part(a)), rel=1e-8)
