"""Exact arithmetic in real quadratic rings and their fraction fields.

Elements are written over a basis (1, omega), where omega is a quadratic
integer with omega**2 = w0 + w1*omega.  The default ring is Z[sqrt2]
(w0=2, w1=0); the golden ring Z[phi] (w0=1, w1=1) covers inflation factors
in Q(sqrt5).  The Galois conjugate ("star map") sends omega to w1 - omega;
for Z[sqrt2] this is a + b*sqrt2 -> a - b*sqrt2.

Real embeddings are correctly rounded using integer square roots, so
comparisons and signs never rely on floating point.
"""

from __future__ import annotations

import math
import re
from functools import total_ordering
from math import isqrt
from typing import Union

__all__ = ["QuadRing", "QuadInt", "FieldVal", "SQRT2", "GOLDEN"]


class QuadRing:
    """The ring Z[omega] with omega**2 = w0 + w1*omega (disc = w1**2 + 4*w0 > 0)."""

    __slots__ = ("w0", "w1", "symbol", "_disc")

    def __init__(self, w0: int, w1: int, symbol: str):
        if w1 * w1 + 4 * w0 <= 0:
            raise ValueError("ring is not real quadratic")
        self.w0 = w0
        self.w1 = w1
        self.symbol = symbol
        self._disc = w1 * w1 + 4 * w0

    def __repr__(self) -> str:
        return f"QuadRing({self.w0}, {self.w1}, {self.symbol!r})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, QuadRing)
            and (self.w0, self.w1) == (other.w0, other.w1)
        )

    def __hash__(self) -> int:
        return hash((self.w0, self.w1))

    def int2(self, a: int, b: int = 0) -> "QuadInt":
        return QuadInt(a, b, self)

    def field(self, p: int, q: int = 0, d: int = 1) -> "FieldVal":
        return FieldVal(p, q, d, self)

    @property
    def zero(self) -> "QuadInt":
        return QuadInt(0, 0, self)

    @property
    def one(self) -> "QuadInt":
        return QuadInt(1, 0, self)

    @property
    def omega(self) -> "QuadInt":
        return QuadInt(0, 1, self)

    @property
    def covolume(self) -> "QuadInt":
        """omega - omega* = 2*omega - w1, the Minkowski lattice covolume (> 0)."""
        return QuadInt(-self.w1, 2, self)

    # sign of a + b*omega, exactly.  omega is the positive root of
    # x**2 - w1*x - w0, i.e. omega = (w1 + sqrt(disc))/2.
    def sign(self, a: int, b: int) -> int:
        # 2*(a + b*omega) = (2a + b*w1) + b*sqrt(disc)
        u = 2 * a + b * self.w1
        v = b
        if v == 0:
            return (u > 0) - (u < 0)
        if u == 0:
            return (v > 0) - (v < 0)
        if u > 0 and v > 0:
            return 1
        if u < 0 and v < 0:
            return -1
        # opposite signs: compare u**2 against disc*v**2
        lhs = u * u
        rhs = self._disc * v * v
        if lhs == rhs:
            return 0
        bigger_u = lhs > rhs
        return (1 if bigger_u else -1) if u > 0 else (-1 if bigger_u else 1)

    def embed(self, a: int, b: int) -> float:
        """a + b*omega as a float, correct to one ulp."""
        if b == 0:
            return float(a)
        # scale by 2**k, take the integer sqrt, round at the end; the sqrt's
        # unit error is amplified by b and the value may be as small as
        # ~1/|conjugate|, so k needs twice the coordinate bit length
        k = 64 + 2 * max(abs(a).bit_length(), abs(b).bit_length())
        # omega*2**k = (w1*2**k + sqrt(disc*4**k)) / 2
        root = isqrt(self._disc << (2 * k))
        num = (a << (k + 1)) + b * ((self.w1 << k) + root)
        return _ldexp_round(num, -(k + 1))

    def embed_star(self, a: int, b: int) -> float:
        return self.embed(a + b * self.w1, -b)


def _ldexp_round(n: int, e: int) -> float:
    # round n to 53 significant bits (nearest-even), then scale exactly;
    # rounding in one step avoids the double-rounding of float(n)
    if n < 0:
        return -_ldexp_round(-n, e)
    if n.bit_length() <= 53:
        return math.ldexp(n, e)
    shift = n.bit_length() - 53
    head, tail = n >> shift, n & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    if tail > half or (tail == half and head & 1):
        head += 1
    return math.ldexp(head, e + shift)


SQRT2 = QuadRing(2, 0, "sqrt2")
GOLDEN = QuadRing(1, 1, "phi")


@total_ordering
class QuadInt:
    """An element a + b*omega of a QuadRing, with exact arithmetic."""

    __slots__ = ("a", "b", "ring")

    def __init__(self, a: int, b: int = 0, ring: QuadRing = SQRT2):
        self.a = a
        self.b = b
        self.ring = ring

    def __repr__(self) -> str:
        return f"QuadInt({self.a}, {self.b})" if self.ring is SQRT2 else (
            f"QuadInt({self.a}, {self.b}, {self.ring!r})"
        )

    def __str__(self) -> str:
        return render_pair(self.a, self.b, self.ring.symbol)

    def __eq__(self, other: object) -> bool:
        other = _coerce_int(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.ring.w0, self.ring.w1))

    def __lt__(self, other: "QuadInt | int") -> bool:
        other = _coerce_int(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        return self.ring.sign(self.a - other.a, self.b - other.b) < 0

    def __add__(self, other: "QuadInt | int") -> "QuadInt":
        other = _coerce_int(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        return QuadInt(self.a + other.a, self.b + other.b, self.ring)

    __radd__ = __add__

    def __sub__(self, other: "QuadInt | int") -> "QuadInt":
        other = _coerce_int(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        return QuadInt(self.a - other.a, self.b - other.b, self.ring)

    def __rsub__(self, other: "QuadInt | int") -> "QuadInt":
        return (-self) + other

    def __neg__(self) -> "QuadInt":
        return QuadInt(-self.a, -self.b, self.ring)

    def __abs__(self) -> "QuadInt":
        return -self if self.sign() < 0 else self

    def __mul__(self, other: "QuadInt | int") -> "QuadInt":
        other = _coerce_int(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        w0, w1 = self.ring.w0, self.ring.w1
        bb = self.b * other.b
        return QuadInt(
            self.a * other.a + w0 * bb,
            self.a * other.b + self.b * other.a + w1 * bb,
            self.ring,
        )

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "QuadInt":
        if n < 0:
            raise ValueError("negative power of a ring element")
        out = self.ring.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def star(self) -> "QuadInt":
        """Galois conjugate: omega -> w1 - omega."""
        return QuadInt(self.a + self.b * self.ring.w1, -self.b, self.ring)

    def norm(self) -> int:
        """N(x) = x * star(x) = a**2 + w1*a*b - w0*b**2."""
        return self.a * self.a + self.ring.w1 * self.a * self.b - self.ring.w0 * self.b * self.b

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    def unit_inverse(self) -> "QuadInt":
        n = self.norm()
        if n == 1:
            return self.star()
        if n == -1:
            return -self.star()
        raise ValueError("not a unit")

    def sign(self) -> int:
        return self.ring.sign(self.a, self.b)

    def embed(self) -> float:
        return self.ring.embed(self.a, self.b)

    def embed_star(self) -> float:
        return self.ring.embed_star(self.a, self.b)

    def to_field(self) -> "FieldVal":
        return FieldVal(self.a, self.b, 1, self.ring)

    def star_field(self) -> "FieldVal":
        s = self.star()
        return FieldVal(s.a, s.b, 1, self.ring)


def _coerce_int(x: object, ring: QuadRing):
    if isinstance(x, QuadInt):
        if x.ring != ring:
            raise ValueError("mixed quadratic rings")
        return x
    if isinstance(x, int):
        return QuadInt(x, 0, ring)
    return NotImplemented


def star(x: QuadInt) -> QuadInt:
    return x.star()


def mul(x: QuadInt, y: QuadInt) -> QuadInt:
    return x * y


def div_by_unit(x: QuadInt, u: QuadInt) -> QuadInt:
    """Exact quotient x / u for a unit u; div_by_unit(x, u) * u == x."""
    return x * u.unit_inverse()


def cmp(x: QuadInt, y: QuadInt) -> int:
    """Exact sign of x - y as a real number: -1, 0 or 1."""
    return x.ring.sign(x.a - y.a, x.b - y.b)


@total_ordering
class FieldVal:
    """An element (p + q*omega)/d of the fraction field, kept reduced
    (gcd(p, q, d) = 1 and d >= 1)."""

    __slots__ = ("p", "q", "d", "ring")

    def __init__(self, p: int, q: int = 0, d: int = 1, ring: QuadRing = SQRT2):
        if d == 0:
            raise ZeroDivisionError("zero denominator")
        if d < 0:
            p, q, d = -p, -q, -d
        g = math.gcd(math.gcd(abs(p), abs(q)), d)
        if g > 1:
            p //= g
            q //= g
            d //= g
        self.p = p
        self.q = q
        self.d = d
        self.ring = ring

    def __repr__(self) -> str:
        return f"FieldVal({self.p}, {self.q}, {self.d})"

    def __str__(self) -> str:
        return f"({render_pair(self.p, self.q, self.ring.symbol)})/{self.d}"

    def __eq__(self, other: object) -> bool:
        other = _coerce_field(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        return (self.p, self.q, self.d) == (other.p, other.q, other.d)

    def __hash__(self) -> int:
        return hash((self.p, self.q, self.d, self.ring.w0, self.ring.w1))

    def __lt__(self, other) -> bool:
        other = _coerce_field(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).sign() < 0

    def __add__(self, other) -> "FieldVal":
        other = _coerce_field(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        return FieldVal(
            self.p * other.d + other.p * self.d,
            self.q * other.d + other.q * self.d,
            self.d * other.d,
            self.ring,
        )

    __radd__ = __add__

    def __sub__(self, other) -> "FieldVal":
        other = _coerce_field(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        return FieldVal(
            self.p * other.d - other.p * self.d,
            self.q * other.d - other.q * self.d,
            self.d * other.d,
            self.ring,
        )

    def __rsub__(self, other) -> "FieldVal":
        return (-self) + other

    def __neg__(self) -> "FieldVal":
        return FieldVal(-self.p, -self.q, self.d, self.ring)

    def __abs__(self) -> "FieldVal":
        return -self if self.sign() < 0 else self

    def __mul__(self, other) -> "FieldVal":
        other = _coerce_field(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        w0, w1 = self.ring.w0, self.ring.w1
        qq = self.q * other.q
        return FieldVal(
            self.p * other.p + w0 * qq,
            self.p * other.q + self.q * other.p + w1 * qq,
            self.d * other.d,
            self.ring,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "FieldVal":
        other = _coerce_field(other, self.ring)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "FieldVal":
        return self.inverse() * other

    def inverse(self) -> "FieldVal":
        w1 = self.ring.w1
        n = self.p * self.p + w1 * self.p * self.q - self.ring.w0 * self.q * self.q
        if n == 0:
            raise ZeroDivisionError("division by zero field element")
        # 1/((p+q*omega)/d) = d*(p + q*omega*) / N(p+q*omega)
        return FieldVal(self.d * (self.p + w1 * self.q), -self.d * self.q, n, self.ring)

    def sign(self) -> int:
        return self.ring.sign(self.p, self.q)

    def is_zero(self) -> bool:
        return self.p == 0 and self.q == 0

    def star(self) -> "FieldVal":
        return FieldVal(self.p + self.q * self.ring.w1, -self.q, self.d, self.ring)

    def embed(self) -> float:
        if self.d == 1:
            return self.ring.embed(self.p, self.q)
        return self.ring.embed(self.p, self.q) / self.d

    def embed_star(self) -> float:
        return self.star().embed()

    def as_quadint(self) -> QuadInt:
        if self.d != 1:
            raise ValueError(f"{self} is not integral")
        return QuadInt(self.p, self.q, self.ring)


def _coerce_field(x: object, ring: QuadRing):
    if isinstance(x, FieldVal):
        if x.ring != ring:
            raise ValueError("mixed quadratic rings")
        return x
    if isinstance(x, QuadInt):
        if x.ring != ring:
            raise ValueError("mixed quadratic rings")
        return FieldVal(x.a, x.b, 1, ring)
    if isinstance(x, int):
        return FieldVal(x, 0, 1, ring)
    return NotImplemented


# ---------------------------------------------------------------------------
# textual form: "a+b*sym" and "(p+q*sym)/d"

def render_pair(a: int, b: int, symbol: str) -> str:
    return f"{a}{b:+d}*{symbol}"


_PAIR_RE = re.compile(
    r"^\s*(?P<a>[+-]?\d+)\s*(?P<sgn>[+-])\s*(?P<b>\d+)\s*\*\s*(?P<sym>\w+)\s*$"
)
_FIELD_RE = re.compile(r"^\s*\((?P<body>[^)]*)\)\s*/\s*(?P<d>\d+)\s*$")


def _ring_for_symbol(sym: str) -> QuadRing:
    if sym == "sqrt2":
        return SQRT2
    if sym == "phi":
        return GOLDEN
    raise ValueError(f"unknown ring symbol {sym!r}")


def parse_quadint(text: str, ring: QuadRing | None = None) -> QuadInt:
    m = _PAIR_RE.match(text)
    if not m:
        try:
            return QuadInt(int(text.strip()), 0, ring or SQRT2)
        except ValueError:
            raise ValueError(f"cannot parse ring element {text!r}") from None
    found = _ring_for_symbol(m.group("sym"))
    if ring is not None and found != ring:
        raise ValueError(f"{text!r} is not in the expected ring")
    b = int(m.group("b"))
    if m.group("sgn") == "-":
        b = -b
    return QuadInt(int(m.group("a")), b, found)


def parse_fieldval(text: str, ring: QuadRing | None = None) -> FieldVal:
    m = _FIELD_RE.match(text)
    if m:
        num = parse_quadint(m.group("body"), ring)
        return FieldVal(num.a, num.b, int(m.group("d")), num.ring)
    num = parse_quadint(text, ring)
    return num.to_field()


Scalar = Union[int, QuadInt, FieldVal]
