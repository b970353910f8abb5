"""Finite parts, residue densities, log-residue densities and parity."""
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_trace.corpus import random_symbol
from nonlocal_trace.densities import (
    density_report,
    dslash,
    finite_part,
    finite_part_by_radius,
    parity_class,
    radius_expansion,
    residue0_log,
    residue_density,
)
from nonlocal_trace.symbol_core import Scalar, SymbolError, parse_symbol, series_log

PI = Scalar.exact(1, 1)


def one_dim(text, **K):
    a = parse_symbol(text, 1)
    return a.with_extensions(overrides=K) if K else a


# --- finite_part ----------------------------------------------------------------

def test_finite_part_degree_minus_one():
    assert finite_part(parse_symbol("1/|xi|", 1)) == Scalar.exact(Fraction(1, 2), -1)


def test_finite_part_degree_minus_two():
    assert finite_part(parse_symbol("1/|xi|^2", 1)) == Scalar.exact(2, -1)


def test_finite_part_constant_vanishes():
    assert finite_part(parse_symbol("1", 1)).is_zero()


def _quad_finite_part_1d(degree, K):
    """Independent 1-d evaluation straight from the three-piece definition."""
    d = mpmath.mpf(degree.numerator) / degree.denominator
    realized = lambda r: r ** (d + K) if r < 1 else r**d  # noqa: E731
    if degree > -1:
        val = mpmath.quad(lambda r: r ** (d + K) - r**d, [0, 1])
    elif degree == -1:
        val = mpmath.quad(realized, [0, 1])
    else:
        val = mpmath.quad(realized, [0, 1, mpmath.inf])
    return 2 * val / (2 * mpmath.pi)


@pytest.mark.parametrize("degree,K", [(Fraction(-1, 2), 2), (Fraction(-3, 2), 2), (Fraction(1, 2), 0), (Fraction(-5, 2), 4), (Fraction(1), 2)])
def test_finite_part_matches_direct_quadrature(degree, K):
    from nonlocal_trace.symbol_core import AngularPoly, ClassicalSymbol, HomogeneousTerm

    a = ClassicalSymbol(1, [HomogeneousTerm(degree, AngularPoly.constant(1), K=K)])
    assert float(finite_part(a)) == pytest.approx(float(_quad_finite_part_1d(degree, K)), rel=1e-12, abs=1e-14)


def test_report_sums_its_rows():
    a = parse_symbol("xi1^2/|xi|; 1/|xi|^2; xi1^2/|xi|^5", 2)
    rep = density_report(a)
    assert [r.branch for r in rep.terms] == ["above", "critical", "below"]
    total = Scalar.zero()
    for r in rep.terms:
        total = total + r.value
    assert total == rep.tr_x == finite_part(a)
    assert rep.to_json()["terms"][1]["K"] == 2


def test_finite_part_depends_on_extension():
    a = parse_symbol("1/|xi|", 1)
    assert finite_part(a) != finite_part(a.with_extensions(shift=2))


# --- radius expansion -------------------------------------------------------------

def test_radius_expansion_log_case():
    e = radius_expansion(parse_symbol("1/|xi|", 1))
    half_over_pi = Scalar.exact(Fraction(1, 2), -1)
    assert e.terms == {(0, 0): half_over_pi, (0, 1): Scalar.exact(1, -1)}


def test_radius_expansion_linear_case():
    e = radius_expansion(parse_symbol("1", 1))
    assert e.constant().is_zero()
    assert e.terms[(Fraction(1), 0)] == Scalar.exact(1, -1)


def test_radius_expansion_matches_ball_integral():
    a = parse_symbol("xi1^2/|xi|^3; 1/|xi|^2", 2)
    e = radius_expansion(a)
    R = 7.5
    # direct: polar coordinates with the exact angular moment
    from nonlocal_trace.oracle import ball_integral

    assert e(R) == pytest.approx(float(ball_integral(a, R)), rel=1e-12)


@given(seed=st.integers(0, 10**6), n=st.integers(1, 3))
def test_definition_equivalence(seed, n):
    rng = random.Random(seed)
    a = random_symbol(rng, n, Fraction(rng.randint(-2 * n - 4, 4), 2))
    assert finite_part_by_radius(a) == finite_part(a)


def test_radius_orders_only_drop_growing_terms():
    a = parse_symbol("|xi|^2; xi1; 1; 1/|xi|", 1)
    assert finite_part_by_radius(a, orders=0) == finite_part(a)
    assert len(radius_expansion(a, orders=1).terms) < len(radius_expansion(a).terms)


# --- residues -----------------------------------------------------------------------

def test_residue_two_point_sphere():
    assert residue_density(parse_symbol("1/|xi|", 1)) == Scalar.exact(1, -1)


def test_residue_circle():
    assert residue_density(parse_symbol("1/|xi|^2", 2)) == Scalar.exact(Fraction(1, 2), -1)


def test_residue_vanishes_off_integer_grid():
    a = parse_symbol("1/|xi|^(1/2)", 1)
    assert a.order == Fraction(-1, 2)
    assert residue_density(a).is_zero()


@given(seed=st.integers(0, 10**6), n=st.integers(1, 3))
def test_residue_independent_of_extension(seed, n):
    rng = random.Random(seed)
    a = random_symbol(rng, n, Fraction(rng.randint(-n - 2, 2)))
    assert residue_density(a.with_extensions(shift=2)) == residue_density(a)


@given(seed=st.integers(0, 10**6), c=st.fractions(-3, 3, max_denominator=5))
def test_linearity(seed, c):
    rng = random.Random(seed)
    n = rng.choice([1, 2])
    a = random_symbol(rng, n, Fraction(-1))
    b = random_symbol(rng, n, Fraction(-1))
    assert finite_part(a.scale(c)) == Scalar.exact(c) * finite_part(a)
    assert residue_density(a.scale(c)) == Scalar.exact(c) * residue_density(a)
    ab = a + b
    if all(ab.term(d) is None or (a.term(d) is None or b.term(d) is None or a.term(d).K == b.term(d).K) for d in ab.degrees):
        assert finite_part(ab) == finite_part(a) + finite_part(b)
    assert residue_density(ab) == residue_density(a) + residue_density(b)


# --- log residue ------------------------------------------------------------------------

def test_log_residue_vanishes_for_model_operator():
    a = parse_symbol("xi1/|xi|^2; 1/|xi|^2; xi1/|xi|^3", 1)
    assert residue0_log(a, series_log(parse_symbol("|xi|^4; 1", 1), 6)).is_zero()


def test_log_residue_scalar_log():
    v = residue0_log(parse_symbol("1/|xi|", 1), series_log(parse_symbol("4*|xi|^2", 1), 2))
    assert float(v) == pytest.approx(float(mpmath.log(4) / mpmath.pi), rel=1e-15)


def test_log_residue_vanishes_even_even_odd_n():
    a = parse_symbol("xi1^2/|xi|^4; xi1/|xi|^4", 3)
    assert parity_class(a) == "even-even"
    assert residue0_log(a, series_log(parse_symbol("|xi|^2; 1", 3), 6)).is_zero()


def test_log_residue_truncation_is_reported():
    # J=1 keeps log-symbol degrees >= -1; a of degree 0 needs degree -2
    logp = series_log(parse_symbol("|xi|^2; 1", 2), 1)
    with pytest.raises(SymbolError):
        residue0_log(parse_symbol("1", 2), logp)
    # a of degree -1 only needs degree -1, which is kept
    assert residue0_log(parse_symbol("1/|xi|", 2), logp).is_zero()


def test_log_residue_dimension_mismatch():
    with pytest.raises(SymbolError):
        residue0_log(parse_symbol("1/|xi|", 1), series_log(parse_symbol("|xi|^2", 2), 2))


# --- parity ------------------------------------------------------------------------------

def test_parity_bookkeeping():
    assert parity_class(parse_symbol("1/|xi|", 1)) == "even-odd"
    assert parity_class(parse_symbol("|xi|^2", 2)) == "even-even"
    assert parity_class(parse_symbol("1/|xi|; 1/|xi|^2", 2)) == "neither"


def test_parity_fractional_order():
    assert parity_class(parse_symbol("1/|xi|^(1/2)", 1)) == "neither"


def test_normalization_constant():
    assert dslash(3) == Scalar.exact(Fraction(1, 8), -3)
