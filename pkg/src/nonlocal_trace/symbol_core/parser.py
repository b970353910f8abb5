"""Symbol DSL: parser and canonical pretty-printer.

Grammar::

    symbol   := mterm (";" mterm)*
    mterm    := "diag(" group (";" group)* ")" | group
    group    := ["+"|"-"] product (("+"|"-") product)*
    product  := factor (("*" factor) | ("/" divisor))*
    factor   := NUMBER | "xi" INT ["^" INT] | "|xi|" ["^" exponent] | "(" group ")"
    divisor  := NUMBER | "|xi|" ["^" exponent]
    exponent := ["-"] INT | "(" ["-"] INT ["/" INT] ")"

Each group must be homogeneous: every monomial ``c*xi^alpha*|xi|^e``
has the same degree ``|alpha| + e``.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .angular import AngularPoly, Poly, format_poly
from .symbols import ClassicalSymbol, HomogeneousTerm, SymbolError

GRAMMAR_EXCERPT = (
    "symbol := term (';' term)*, one homogeneous term per degree; "
    "term := poly ['/' '|xi|^' exp] | 'diag(' term (';' term)* ')'; "
    "poly uses numbers, xi1..xin, |xi|^exp, + - * and parentheses; exp := int | '(' [-]p/q ')'. "
    "Example: 'xi1^2/|xi|^3; 1'"
)


class ParseError(SymbolError):
    def __init__(self, message: str, position: int | None = None, text: str = ""):
        self.position = position
        where = ""
        if position is not None:
            where = f" at position {position}"
            if text:
                where += f": {text[:position]}<!>{text[position:]}"
        super().__init__(message + where)


_TOKEN = re.compile(
    r"\s*(?:(?P<absxi>\|xi\|)|(?P<var>xi(?P<idx>\d+))|(?P<diag>diag)|(?P<num>\d+)|(?P<op>[-+*/^();]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError("unexpected character", pos + (len(text[pos:]) - len(text[pos:].lstrip())), text)
        start = m.start(m.lastgroup if m.lastgroup != "idx" else "var")
        if m.group("absxi"):
            out.append(("ABS", None, start))
        elif m.group("var"):
            out.append(("VAR", int(m.group("idx")), start))
        elif m.group("diag"):
            out.append(("DIAG", None, start))
        elif m.group("num"):
            out.append(("NUM", int(m.group("num")), start))
        else:
            out.append(("OP", m.group("op"), start))
        pos = m.end()
    out.append(("END", None, len(text)))
    return out


class _HomPoly:
    """Sum of c * xi^alpha * |xi|^e, keyed by (alpha, e)."""

    def __init__(self, n, terms=None):
        self.n = n
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, n, c):
        return cls(n, {((0,) * n, Fraction(0)): Fraction(c)})

    def __add__(self, other):
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, Fraction(0)) + v
        return _HomPoly(self.n, t)

    def __neg__(self):
        return _HomPoly(self.n, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        t: dict = {}
        for (a, e), c in self.terms.items():
            for (b, f), d in other.terms.items():
                key = (tuple(x + y for x, y in zip(a, b)), e + f)
                t[key] = t.get(key, Fraction(0)) + c * d
        return _HomPoly(self.n, t)


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.take()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}", tok[2], self.text)
        return tok

    def at_op(self, *ops):
        tok = self.peek()
        return tok[0] == "OP" and tok[1] in ops

    def symbol(self):
        mterms = [self.mterm()]
        while self.at_op(";"):
            self.take()
            mterms.append(self.mterm())
        tok = self.peek()
        if tok[0] != "END":
            raise ParseError("unexpected token", tok[2], self.text)
        return mterms

    def mterm(self):
        tok = self.peek()
        if tok[0] == "DIAG":
            self.take()
            self.expect("OP", "(")
            entries = [(self.peek()[2], self.group())]
            while self.at_op(";"):
                self.take()
                entries.append((self.peek()[2], self.group()))
            self.expect("OP", ")")
            return ("diag", tok[2], entries)
        return ("scalar", tok[2], [(tok[2], self.group())])

    def group(self):
        sign = 1
        if self.at_op("+", "-"):
            sign = -1 if self.take()[1] == "-" else 1
        acc = self.product()
        if sign < 0:
            acc = -acc
        while self.at_op("+", "-"):
            op = self.take()[1]
            rhs = self.product()
            acc = acc + (rhs if op == "+" else -rhs)
        return acc

    def product(self):
        acc = self.factor()
        while self.at_op("*", "/"):
            op = self.take()[1]
            if op == "*":
                acc = acc * self.factor()
            else:
                acc = acc * self.divisor()
        return acc

    def exponent(self):
        tok = self.peek()
        if self.at_op("("):
            self.take()
            neg = False
            if self.at_op("-"):
                self.take()
                neg = True
            num = Fraction(self.expect("NUM")[1])
            if self.at_op("/"):
                self.take()
                den = self.expect("NUM")[1]
                if den == 0:
                    raise ParseError("zero denominator in exponent", tok[2], self.text)
                num /= den
            self.expect("OP", ")")
            return -num if neg else num
        neg = False
        if self.at_op("-"):
            self.take()
            neg = True
        val = Fraction(self.expect("NUM")[1])
        return -val if neg else val

    def factor(self):
        tok = self.take()
        kind, val, pos = tok
        n = self.n
        if kind == "NUM":
            return _HomPoly.const(n, val)
        if kind == "VAR":
            if not 1 <= val <= n:
                raise ParseError(f"variable xi{val} out of range for n={n}", pos, self.text)
            power = 1
            if self.at_op("^"):
                self.take()
                power = self.expect("NUM")[1]
            alpha = [0] * n
            alpha[val - 1] = power
            return _HomPoly(n, {(tuple(alpha), Fraction(0)): Fraction(1)})
        if kind == "ABS":
            e = Fraction(1)
            if self.at_op("^"):
                self.take()
                e = self.exponent()
            return _HomPoly(n, {((0,) * n, e): Fraction(1)})
        if kind == "OP" and val == "(":
            inner = self.group()
            self.expect("OP", ")")
            return inner
        raise ParseError("expected a number, xi<i>, |xi| or '('", pos, self.text)

    def divisor(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "NUM":
            if val == 0:
                raise ParseError("division by zero", pos, self.text)
            return _HomPoly.const(self.n, Fraction(1, val))
        if kind == "ABS":
            e = Fraction(1)
            if self.at_op("^"):
                self.take()
                e = self.exponent()
            return _HomPoly(self.n, {((0,) * self.n, -e): Fraction(1)})
        if kind == "OP" and val == "(":
            # allow (|xi|^k) or (number)
            inner = self.divisor()
            self.expect("OP", ")")
            return inner
        raise ParseError("denominator must be a number or a power of |xi|", pos, self.text)


def _to_term(hp: _HomPoly, pos: int, text: str, n: int):
    if not hp.terms:
        return None
    degrees = {sum(a) + e for (a, e) in hp.terms}
    if len(degrees) > 1:
        shown = ", ".join(str(d) for d in sorted(degrees))
        raise ParseError(
            f"non-homogeneous additive group (degrees {shown}); "
            "enter terms of different degree separately, separated by ';'",
            pos,
            text,
        )
    degree = degrees.pop()
    poly: dict = {}
    for (a, _e), c in hp.terms.items():
        poly[a] = poly.get(a, Fraction(0)) + c
    return degree, Poly(n, poly)


def parse_symbol(text: str, n: int, M: int = 1, order=None) -> ClassicalSymbol:
    """Parse DSL text into a ClassicalSymbol on R^n with M x M diagonal values."""
    if n < 1:
        raise ParseError("dimension n must be >= 1")
    if M < 1:
        raise ParseError("matrix size M must be >= 1")
    p = _Parser(text, n)
    terms = []
    for kind, pos, entries in p.symbol():
        parsed = [(epos, _to_term(hp, epos, text, n)) for epos, hp in entries]
        if kind == "scalar":
            res = parsed[0][1]
            if res is None:
                continue
            degree, poly = res
            terms.append(HomogeneousTerm(degree, AngularPoly.scalar(poly, M)))
            continue
        if len(parsed) != M:
            raise ParseError(
                f"diag(...) has {len(parsed)} entries but M={M} (inconsistent matrix size)", pos, text
            )
        degs = {res[0] for _, res in parsed if res is not None}
        if len(degs) > 1:
            raise ParseError("diagonal entries of one term must share a degree", pos, text)
        if not degs:
            continue
        degree = degs.pop()
        diag = [res[1] if res is not None else Poly(n) for _, res in parsed]
        terms.append(HomogeneousTerm(degree, AngularPoly(n, diag)))
    return ClassicalSymbol(n, terms, order=order, M=M)


# --- pretty printer ---------------------------------------------------------

def _fmt_exp(e: Fraction) -> str:
    return str(e) if e.denominator == 1 and e >= 0 else f"({e})"


def _abs_power(e: Fraction) -> str:
    return "|xi|" if e == 1 else f"|xi|^{_fmt_exp(e)}"


def _format_homogeneous(poly: Poly, degree: Fraction) -> str:
    k = poly.homogeneous_degree()
    e = degree - k
    body = format_poly(poly)
    if e == 0:
        return body
    compound = len(poly.terms) > 1
    if e < 0:
        return f"({body})/{_abs_power(-e)}" if compound else f"{body}/{_abs_power(-e)}"
    if body == "1":
        return _abs_power(e)
    if body == "-1":
        return f"-{_abs_power(e)}"
    return f"({body})*{_abs_power(e)}" if compound else f"{body}*{_abs_power(e)}"


def format_group(poly: Poly, degree: Fraction) -> str:
    if poly.is_zero():
        return "0"
    by_deg: dict = {}
    for a, c in poly.items():
        by_deg.setdefault(sum(a), {})[a] = c
    pieces = [_format_homogeneous(Poly(poly.n, t), degree) for _, t in sorted(by_deg.items(), reverse=True)]
    text = pieces[0]
    for piece in pieces[1:]:
        text += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
    return text


def format_symbol(a: ClassicalSymbol) -> str:
    """Canonical DSL text; parse_symbol(format_symbol(a), n, M) == a."""
    if not a.terms:
        return "0"
    parts = []
    for t in a.terms:
        diag = t.angular.diag
        if len(set(diag)) == 1:
            parts.append(format_group(diag[0], t.degree))
        else:
            parts.append("diag(" + "; ".join(format_group(p, t.degree) for p in diag) + ")")
    return "; ".join(parts)
