"""Deterministic test symbols: random exactly-representable classical
symbols and the fixed operator pairs used by the acceptance suite."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .symbol_core import AngularPoly, ClassicalSymbol, HomogeneousTerm, Poly, parse_symbol


def _monomials(n: int, k: int):
    return [a for a in itertools.product(range(k + 1), repeat=n) if sum(a) == k]


def random_poly(rng: random.Random, n: int, k: int, coeff_range: int = 3) -> Poly:
    terms = {}
    for alpha in _monomials(n, k):
        if rng.random() < 0.6:
            c = rng.randint(-coeff_range, coeff_range)
            if c:
                terms[alpha] = Fraction(c)
    if not terms:
        alpha = rng.choice(_monomials(n, k))
        terms[alpha] = Fraction(rng.choice([-2, -1, 1, 2]))
    return Poly(n, terms)


def random_symbol(rng: random.Random, n: int, sigma, nterms: int = 3, max_poly_degree: int = 2) -> ClassicalSymbol:
    """Sum of homogeneous terms of degrees sigma, sigma - 1, ... with polynomial angular parts."""
    sigma = Fraction(sigma)
    terms = []
    js = sorted(rng.sample(range(0, nterms + 2), nterms))
    if 0 not in js:
        js[0] = 0
    for j in js:
        k = rng.randint(0, max_poly_degree)
        terms.append(HomogeneousTerm(sigma - j, AngularPoly.scalar(random_poly(rng, n, k))))
    return ClassicalSymbol(n, terms, order=sigma)


def random_model_case(rng: random.Random):
    """(a, n, m) with m > sigma + n; sigma on a half-integer grid."""
    n = rng.choice([1, 2])
    m = rng.choice([2, 4])
    choices = [Fraction(h, 2) for h in range(2 * (-n - 2), 2 * (m - n))]
    sigma = rng.choice(choices)
    return random_symbol(rng, n, sigma), n, m


def model_operator(n: int, m: int, M: int = 1) -> ClassicalSymbol:
    """|xi|^m + 1 (realized with no extension change: both terms are polynomial)."""
    return parse_symbol(f"|xi|^{m}; 1", n, M)


# parity corpus: (label, text, n, expected class)
PARITY_CASES = [
    ("even-even n=1", "xi1/|xi|^2; 1/|xi|^2", 1, "even-even"),
    ("even-even n=3", "xi1^2/|xi|^4; xi1/|xi|^4", 3, "even-even"),
    ("even-odd n=2", "xi1^2/|xi|^3; xi1/|xi|^3", 2, "even-odd"),
]

# parity-breaking terms, one per case, landing at degree -n
PARITY_BREAKERS = {1: "1/|xi|", 2: "1/|xi|^2", 3: "1/|xi|^3"}
