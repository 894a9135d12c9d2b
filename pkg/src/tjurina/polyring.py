"""Exact coefficient fields and sparse homogeneous polynomials in x, y, z.

Coefficients are either arbitrary-precision rationals (the default,
certified lane) or residues modulo a prime (fast, probabilistic lane).
Monomials are exponent triples (a, b, c); the canonical term order used
everywhere for matrix indexing is graded-lexicographic with x > y > z.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .errors import (
    DegreeMismatch,
    FieldMismatch,
    NotHomogeneous,
    ParseError,
    ZeroPolynomial,
)

Monomial = tuple[int, int, int]

VARS = ("x", "y", "z")


def monomial_degree(m: Monomial) -> int:
    return m[0] + m[1] + m[2]


def monomial_mul(m1: Monomial, m2: Monomial) -> Monomial:
    return (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])


def grlex_key(m: Monomial):
    """Sort key for the canonical order: degree first, then lex with x > y > z."""
    return (monomial_degree(m), -m[0], -m[1])


def monomial_basis(k: int) -> list[Monomial]:
    """All degree-k monomials in canonical order; length C(k+2, 2)."""
    if k < 0:
        raise ValueError(f"degree must be non-negative, got {k}")
    basis = []
    for a in range(k, -1, -1):
        for b in range(k - a, -1, -1):
            basis.append((a, b, k - a - b))
    assert len(basis) == comb(k + 2, 2)
    return basis


class RationalField:
    """Exact rationals; canonical form is handled by Fraction itself."""

    kind = "rational"
    p = None

    def normalize(self, value) -> Fraction:
        return Fraction(value)

    def from_int(self, n: int) -> Fraction:
        return Fraction(n)

    def is_zero(self, value) -> bool:
        return value == 0

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        return 1 / Fraction(a)

    def div(self, a, b):
        return Fraction(a) / b

    def descriptor(self) -> dict:
        return {"kind": "rational"}

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("rational")

    def __repr__(self):
        return "QQ"


class PrimeField:
    """Residues modulo a prime p, stored as ints in [0, p)."""

    kind = "fp"

    def __init__(self, p: int):
        if p < 2 or not _is_prime(p):
            raise ValueError(f"modulus must be prime, got {p}")
        self.p = p

    def normalize(self, value) -> int:
        if isinstance(value, Fraction):
            den = value.denominator % self.p
            if den == 0:
                raise ZeroDivisionError(f"denominator divisible by {self.p}")
            return value.numerator * pow(den, -1, self.p) % self.p
        return int(value) % self.p

    def from_int(self, n: int) -> int:
        return n % self.p

    def is_zero(self, value) -> bool:
        return value % self.p == 0

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        return pow(a, -1, self.p)

    def div(self, a, b):
        return a * pow(b, -1, self.p) % self.p

    def descriptor(self) -> dict:
        return {"kind": "fp", "p": self.p}

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("fp", self.p))

    def __repr__(self):
        return f"GF({self.p})"


def _is_prime(n: int) -> bool:
    # Deterministic Miller-Rabin, valid for n < 3.3e24.
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        v = pow(a, d, n)
        if v in (1, n - 1):
            continue
        for _ in range(s - 1):
            v = v * v % n
            if v == n - 1:
                break
        else:
            return False
    return True


QQ = RationalField()

DEFAULT_PRIME = 1_000_003


def field_from_descriptor(desc) -> RationalField | PrimeField:
    """Build a field from 'rational' / 'fp:<prime>' or a descriptor dict."""
    if isinstance(desc, (RationalField, PrimeField)):
        return desc
    if isinstance(desc, dict):
        if desc.get("kind") == "rational":
            return QQ
        if desc.get("kind") == "fp":
            return PrimeField(int(desc["p"]))
        raise ValueError(f"unknown field descriptor {desc!r}")
    text = str(desc).strip()
    if text == "rational":
        return QQ
    if text == "fp":
        return PrimeField(DEFAULT_PRIME)
    if text.startswith("fp:"):
        return PrimeField(int(text.split(":", 1)[1]))
    raise ValueError(f"unknown field descriptor {text!r}")


class HomogPoly:
    """Sparse homogeneous polynomial of a fixed degree.

    The zero polynomial keeps its nominal degree so graded maps stay
    well-typed.  Instances are immutable after construction.
    """

    __slots__ = ("field", "degree", "coeffs", "_hash")

    def __init__(self, field, degree: int, coeffs: dict):
        if degree < 0:
            raise ValueError(f"degree must be non-negative, got {degree}")
        table = {}
        for mono, value in coeffs.items():
            if monomial_degree(mono) != degree:
                raise DegreeMismatch(
                    f"monomial {mono} has degree {monomial_degree(mono)}, expected {degree}"
                )
            value = field.normalize(value)
            if not field.is_zero(value):
                table[mono] = value
        self.field = field
        self.degree = degree
        self.coeffs = table
        self._hash = None

    @classmethod
    def zero(cls, field, degree: int) -> "HomogPoly":
        return cls(field, degree, {})

    @classmethod
    def variable(cls, field, name: str) -> "HomogPoly":
        idx = VARS.index(name)
        mono = tuple(1 if i == idx else 0 for i in range(3))
        return cls(field, 1, {mono: field.from_int(1)})

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def terms(self) -> list[tuple[Monomial, object]]:
        """Terms in canonical order (leading term first)."""
        return sorted(self.coeffs.items(), key=lambda t: (-t[0][0], -t[0][1]))

    def __eq__(self, other):
        return (
            isinstance(other, HomogPoly)
            and self.field == other.field
            and self.degree == other.degree
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        if self._hash is None:
            items = tuple(sorted(self.coeffs.items()))
            self._hash = hash((self.field, self.degree, items))
        return self._hash

    def __add__(self, other):
        return poly_add(self, other)

    def __sub__(self, other):
        return poly_add(self, poly_neg(other))

    def __neg__(self):
        return poly_neg(self)

    def __mul__(self, other):
        if isinstance(other, HomogPoly):
            return poly_mul(self, other)
        return poly_scale(self, other)

    __rmul__ = __mul__

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"HomogPoly({self.field!r}, {self.degree}, {format_poly(self)!r})"


def poly_add(f: HomogPoly, g: HomogPoly) -> HomogPoly:
    """Coefficient-wise sum; a zero operand is compatible with any degree."""
    if f.field != g.field:
        raise FieldMismatch(f"{f.field!r} vs {g.field!r}")
    if f.is_zero and g.is_zero:
        return HomogPoly.zero(f.field, f.degree)
    if f.is_zero:
        return g
    if g.is_zero:
        return f
    if f.degree != g.degree:
        raise DegreeMismatch(f"cannot add degrees {f.degree} and {g.degree}")
    field = f.field
    table = dict(f.coeffs)
    for mono, value in g.coeffs.items():
        acc = field.add(table.get(mono, field.from_int(0)), value)
        if field.is_zero(acc):
            table.pop(mono, None)
        else:
            table[mono] = acc
    return HomogPoly(field, f.degree, table)


def poly_neg(f: HomogPoly) -> HomogPoly:
    return HomogPoly(f.field, f.degree, {m: f.field.neg(v) for m, v in f.coeffs.items()})


def poly_scale(f: HomogPoly, scalar) -> HomogPoly:
    scalar = f.field.normalize(scalar)
    if f.field.is_zero(scalar):
        return HomogPoly.zero(f.field, f.degree)
    return HomogPoly(f.field, f.degree, {m: f.field.mul(v, scalar) for m, v in f.coeffs.items()})


def poly_mul(f: HomogPoly, g: HomogPoly) -> HomogPoly:
    """Distributive product; result degree is deg f + deg g."""
    if f.field != g.field:
        raise FieldMismatch(f"{f.field!r} vs {g.field!r}")
    field = f.field
    table = {}
    for m1, v1 in f.coeffs.items():
        for m2, v2 in g.coeffs.items():
            mono = monomial_mul(m1, m2)
            acc = field.add(table.get(mono, field.from_int(0)), field.mul(v1, v2))
            if field.is_zero(acc):
                table.pop(mono, None)
            else:
                table[mono] = acc
    return HomogPoly(field, f.degree + g.degree, table)


def monomial_times_poly(mono: Monomial, f: HomogPoly) -> HomogPoly:
    table = {monomial_mul(mono, m): v for m, v in f.coeffs.items()}
    return HomogPoly(f.field, f.degree + monomial_degree(mono), table)


def diff(f: HomogPoly, var: int) -> HomogPoly:
    """Partial derivative with respect to variable index 0, 1 or 2."""
    if f.degree < 1:
        raise ValueError("cannot differentiate a degree-0 polynomial")
    field = f.field
    table = {}
    for mono, value in f.coeffs.items():
        e = mono[var]
        if e == 0:
            continue
        lowered = list(mono)
        lowered[var] = e - 1
        coeff = field.mul(value, field.from_int(e))
        if not field.is_zero(coeff):
            table[tuple(lowered)] = coeff
    return HomogPoly(field, f.degree - 1, table)


def partial_derivatives(f: HomogPoly) -> tuple[HomogPoly, HomogPoly, HomogPoly]:
    """The gradient (f_x, f_y, f_z); each component is homogeneous of degree deg f - 1."""
    return (diff(f, 0), diff(f, 1), diff(f, 2))


def euler_combination(f: HomogPoly) -> HomogPoly:
    """x*f_x + y*f_y + z*f_z, which must equal (deg f) * f when the characteristic allows."""
    fx, fy, fz = partial_derivatives(f)
    acc = HomogPoly.zero(f.field, f.degree)
    for var, part in zip(("x", "y", "z"), (fx, fy, fz)):
        acc = poly_add(acc, poly_mul(HomogPoly.variable(f.field, var), part))
    return acc


def format_poly(f: HomogPoly) -> str:
    """Canonical text form; reparses to the same polynomial when coefficients are integers."""
    if f.is_zero:
        return "0"
    parts = []
    for i, (mono, value) in enumerate(f.terms()):
        if isinstance(value, Fraction) and value.denominator == 1:
            value = value.numerator
        negative = isinstance(value, (int, Fraction)) and value < 0
        mag = -value if negative else value
        factors = []
        for name, e in zip(VARS, mono):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        body = "".join(factors)
        if not body:
            body = str(mag)
        elif mag != 1:
            body = f"{mag}{body}"
        if i == 0:
            parts.append(f"-{body}" if negative else body)
        else:
            parts.append(f" - {body}" if negative else f" + {body}")
    return "".join(parts)


# --- expression parser -------------------------------------------------
#
# expr   := ['-'] term (('+'|'-') term)*
# term   := factor ('*'? factor)*
# factor := base ('^' integer)?        (braces around the integer allowed)
# base   := 'x' | 'y' | 'z' | integer | '(' expr ')'

_ONE = (0, 0, 0)


def _starts_factor(ch: str) -> bool:
    return bool(ch) and (ch in "xyz(" or ch.isdigit())


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise ParseError(f"{message} at position {self.pos} in {self.text!r}")

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def parse(self) -> dict:
        result = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return result

    def expr(self) -> dict:
        negate = False
        if self.peek() == "-":
            self.take()
            negate = True
        acc = self.term()
        if negate:
            acc = {m: -v for m, v in acc.items()}
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            sign = 1 if op == "+" else -1
            for mono, value in rhs.items():
                acc[mono] = acc.get(mono, 0) + sign * value
        return acc

    def term(self) -> dict:
        acc = self.factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.take()
                if not _starts_factor(self.peek()):
                    self.error("expected factor after '*'")
            elif not _starts_factor(ch):
                return acc
            rhs = self.factor()
            product = {}
            for m1, v1 in acc.items():
                for m2, v2 in rhs.items():
                    mono = monomial_mul(m1, m2)
                    product[mono] = product.get(mono, 0) + v1 * v2
            acc = product

    def factor(self) -> dict:
        base = self.base()
        if self.peek() == "^":
            self.take()
            exponent = self.exponent()
            result = {_ONE: 1}
            for _ in range(exponent):
                step = {}
                for m1, v1 in result.items():
                    for m2, v2 in base.items():
                        mono = monomial_mul(m1, m2)
                        step[mono] = step.get(mono, 0) + v1 * v2
                result = step
            return result
        return base

    def exponent(self) -> int:
        braced = self.peek() == "{"
        if braced:
            self.take()
        value = self.integer()
        if braced:
            if self.peek() != "}":
                self.error("expected '}'")
            self.take()
        return value

    def integer(self) -> int:
        ch = self.peek()
        if not ch.isdigit():
            self.error("expected integer")
        digits = []
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            digits.append(self.text[self.pos])
            self.pos += 1
        return int("".join(digits))

    def base(self) -> dict:
        ch = self.peek()
        if ch in ("x", "y", "z"):
            self.take()
            idx = VARS.index(ch)
            mono = tuple(1 if i == idx else 0 for i in range(3))
            return {mono: 1}
        if ch.isdigit():
            return {_ONE: self.integer()}
        if ch == "(":
            self.take()
            inner = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.take()
            return inner
        self.error(f"unexpected {ch!r}" if ch else "unexpected end of input")


def parse_poly(text: str, field=QQ) -> HomogPoly:
    """Parse, expand and collect a curve equation; must be homogeneous and nonzero."""
    field = field_from_descriptor(field)
    raw = _Parser(text).parse()
    collected = {m: v for m, v in raw.items() if v != 0}
    if field.kind == "fp":
        collected = {m: v % field.p for m, v in collected.items()}
        collected = {m: v for m, v in collected.items() if v != 0}
    if not collected:
        raise ZeroPolynomial(f"{text!r} expands to zero")
    degrees = {monomial_degree(m) for m in collected}
    if len(degrees) > 1:
        raise NotHomogeneous(f"{text!r} mixes total degrees {sorted(degrees)}")
    (degree,) = degrees
    return HomogPoly(field, degree, collected)
