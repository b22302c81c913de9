"""Exact linear algebra helpers: fraction-free elimination over a quadratic
ring, dense solves over its fraction field, and integer characteristic
polynomials with certified real-root bisection."""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

from .qfield import FieldVal, QuadInt, QuadRing

__all__ = [
    "kernel_basis",
    "solve_dense",
    "charpoly_int",
    "largest_real_root",
    "strip_monomial_factor",
    "poly_divides",
]


def _exact_div(x: QuadInt, y: QuadInt) -> QuadInt:
    """x / y in the ring; raises if the quotient is not integral."""
    n = y.norm()
    num = x * y.star()
    if num.a % n or num.b % n:
        raise ArithmeticError("non-exact ring division")
    return QuadInt(num.a // n, num.b // n, x.ring)


def _row_to_ring(row: list[FieldVal], ring: QuadRing) -> list[QuadInt]:
    lcm = 1
    for v in row:
        lcm = lcm * v.d // gcd(lcm, v.d)
    return [QuadInt(v.p * (lcm // v.d), v.q * (lcm // v.d), ring) for v in row]


def kernel_basis(rows: list[list[FieldVal]], ring: QuadRing) -> list[list[FieldVal]]:
    """Kernel of a homogeneous system, by Bareiss fraction-free elimination
    with partial pivoting on the float magnitude of the entries."""
    if not rows:
        return []
    ncols = len(rows[0])
    mat = [_row_to_ring(r, ring) for r in rows]
    nrows = len(mat)
    piv_cols: list[int] = []
    prev = ring.one
    r = 0
    for c in range(ncols):
        best, best_mag = -1, 0.0
        for rr in range(r, nrows):
            e = mat[rr][c]
            if e.a or e.b:
                mag = abs(e.embed())
                if mag > best_mag:
                    best, best_mag = rr, mag
        if best < 0:
            continue
        mat[r], mat[best] = mat[best], mat[r]
        piv = mat[r][c]
        for rr in range(r + 1, nrows):
            f = mat[rr][c]
            row = mat[rr]
            prow = mat[r]
            for cc in range(ncols):
                row[cc] = _exact_div(row[cc] * piv - prow[cc] * f, prev)
        prev = piv
        piv_cols.append(c)
        r += 1
        if r == nrows:
            break

    free_cols = [c for c in range(ncols) if c not in piv_cols]
    basis = []
    for fc in free_cols:
        vec = [ring.field(0)] * ncols
        vec[fc] = ring.field(1)
        # rows are in echelon form with pivots on piv_cols
        for ri in reversed(range(len(piv_cols))):
            pc = piv_cols[ri]
            acc = ring.field(0)
            for cc in range(pc + 1, ncols):
                v = vec[cc]
                if not v.is_zero():
                    acc = acc + mat[ri][cc].to_field() * v
            vec[pc] = -acc / mat[ri][pc].to_field()
        basis.append(vec)
    return basis


def solve_dense(a: list[list[FieldVal]], b: list[FieldVal], ring: QuadRing) -> list[FieldVal]:
    """Solve a small square system exactly over the fraction field."""
    n = len(a)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for c in range(n):
        p = next((r for r in range(c, n) if not m[r][c].is_zero()), None)
        if p is None:
            raise ArithmeticError("singular system")
        m[c], m[p] = m[p], m[c]
        inv = m[c][c].inverse()
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and not m[r][c].is_zero():
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[r][n] for r in range(n)]


# ---------------------------------------------------------------------------
# integer characteristic polynomials

def _det_int(mat: list[list[int]]) -> int:
    """Bareiss determinant of an integer matrix."""
    n = len(mat)
    if n == 0:
        return 1
    m = [row[:] for row in mat]
    sign = 1
    prev = 1
    for c in range(n - 1):
        p = next((r for r in range(c, n) if m[r][c]), None)
        if p is None:
            return 0
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        for r in range(c + 1, n):
            for cc in range(c + 1, n):
                m[r][cc] = (m[r][cc] * m[c][c] - m[r][c] * m[c][cc]) // prev
            m[r][c] = 0
        prev = m[c][c]
    return sign * m[n - 1][n - 1]


def charpoly_int(mat: list[list[int]]) -> list[int]:
    """Coefficients of det(x*I - M), ascending order, exact integers."""
    n = len(mat)
    xs = list(range(n + 1))
    ys = []
    for x in xs:
        shifted = [[(x if i == j else 0) - mat[i][j] for j in range(n)] for i in range(n)]
        ys.append(_det_int(shifted))
    # Lagrange interpolation over the rationals; the result is integral
    coeffs = [Fraction(0)] * (n + 1)
    for i, xi in enumerate(xs):
        basis = [Fraction(1)]
        denom = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            # multiply basis polynomial by (x - xj)
            nxt = [Fraction(0)] * (len(basis) + 1)
            for k, c in enumerate(basis):
                nxt[k] -= c * xj
                nxt[k + 1] += c
            basis = nxt
            denom *= xi - xj
        scale = Fraction(ys[i], denom)
        for k, c in enumerate(basis):
            coeffs[k] += c * scale
    out = []
    for c in coeffs:
        assert c.denominator == 1
        out.append(int(c))
    return out


def poly_eval_fraction(coeffs: list[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def strip_monomial_factor(coeffs: list[int]) -> tuple[int, list[int]]:
    """Split p(x) = x**k * q(x) with q(0) != 0; returns (k, q ascending)."""
    k = 0
    while k < len(coeffs) and coeffs[k] == 0:
        k += 1
    rest = coeffs[k:]
    if not rest:
        return k, [0]
    return k, rest


def poly_divides(divisor: list[int], coeffs: list[int]) -> bool:
    """Exact divisibility test for integer polynomials (ascending coeffs,
    divisor monic up to sign)."""
    num = [Fraction(c) for c in coeffs]
    den = [Fraction(c) for c in divisor]
    while len(num) >= len(den) and any(num):
        lead = num[-1] / den[-1]
        shift = len(num) - len(den)
        for i, c in enumerate(den):
            num[shift + i] -= lead * c
        assert num[-1] == 0
        num.pop()
    return not any(num)


def largest_real_root(coeffs: list[int], tol: float = 1e-12) -> float:
    """Largest real root of an integer polynomial via float location plus
    exact rational bisection on the integer coefficients."""
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    roots = np.roots(list(reversed(coeffs)))
    real = [r.real for r in roots if abs(r.imag) < 1e-7]
    if not real:
        raise ArithmeticError("polynomial has no real roots")
    approx = max(real)
    width = max(1e-4, abs(approx) * 1e-9)
    lo = Fraction(approx - width).limit_denominator(10**12)
    hi = Fraction(approx + width).limit_denominator(10**12)
    flo = poly_eval_fraction(coeffs, lo)
    fhi = poly_eval_fraction(coeffs, hi)
    grow = 0
    while fhi < 0:
        hi += width
        fhi = poly_eval_fraction(coeffs, hi)
        grow += 1
        if grow > 60:
            raise ArithmeticError("failed to bracket the largest real root")
    while flo >= 0:
        if flo == 0:
            return float(lo)
        lo -= width
        flo = poly_eval_fraction(coeffs, lo)
        grow += 1
        if grow > 120:
            # even multiplicity at the maximum; fall back to the float root
            return float(approx)
    while float(hi - lo) > tol:
        mid = (lo + hi) / 2
        fm = poly_eval_fraction(coeffs, mid)
        if fm == 0:
            return float(mid)
        if fm < 0:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)
