"""Exact renormalisation of the pair correlation functions.

The displacement matrix induces, for every letter pair (i, j), the relation

    mu * nu_ij(z)  =  sum over k, l, r in T_ik, s in T_jl  of
                      nu_kl((z + r - s) / mu),

an exact identity on the fixed-point tiling.  Restricted to the finite set
of realizable distances inside a cutoff radius the relations close on
themselves; the resulting homogeneous system has a one-dimensional solution
space which, normalised by nu_aa(0) + nu_bb(0) = 1, pins every pair
correlation.  Values at larger distances follow by memoized recursion, with
the internal-space support bound cutting impossible branches.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .linalg import kernel_basis
from .qfield import FieldVal, QuadInt, QuadRing
from .substitution import Patch, SubstitutionSystem
from .window import Interval, window_bounds, window_ifs

__all__ = [
    "RelationTerm",
    "RelationSet",
    "build_relations",
    "core_distance_set",
    "solve_self_consistent",
    "CorrelationTable",
    "SamplePoint",
    "covariogram_samples",
    "parity_class",
    "coordinate_parity",
]

PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class RelationTerm:
    k: int
    l: int
    shift: QuadInt
    mult: int


@dataclass(frozen=True)
class RelationSet:
    system: SubstitutionSystem
    # terms[i][j]: collected terms of the relation for nu_ij
    terms: tuple[tuple[tuple[RelationTerm, ...], ...], ...]

    def term_count(self, i: int, j: int) -> int:
        return sum(t.mult for t in self.terms[i][j])

    def max_shift(self) -> QuadInt:
        best = self.system.ring.zero
        for row in self.terms:
            for cell in row:
                for t in cell:
                    if abs(t.shift) > best:
                        best = abs(t.shift)
        return best


def build_relations(system: SubstitutionSystem) -> RelationSet:
    terms = []
    for i in range(2):
        row = []
        for j in range(2):
            collected: dict[tuple[int, int, int, int], int] = {}
            for k in range(2):
                for l in range(2):
                    for r in system.displacement[i][k]:
                        for s in system.displacement[j][l]:
                            shift = r - s
                            key = (k, l, shift.a, shift.b)
                            collected[key] = collected.get(key, 0) + 1
            cell = tuple(
                RelationTerm(k, l, system.ring.int2(sa, sb), m)
                for (k, l, sa, sb), m in sorted(collected.items())
            )
            row.append(cell)
        terms.append(tuple(row))
    rel = RelationSet(system=system, terms=tuple(terms))
    m = system.matrix
    for i in range(2):
        for j in range(2):
            expect = sum(m[i][k] * m[j][l] for k in range(2) for l in range(2))
            assert rel.term_count(i, j) == expect
    return rel


# ---------------------------------------------------------------------------
# vectorized ring helpers on packed int64 coordinate arrays

_SHIFT = 31
_OFF = 1 << 30


def _pack(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # both coordinates must fit 31 bits signed for the packed int64 key
    if len(a) and (
        abs(int(a.max(initial=0))) >= _OFF
        or abs(int(a.min(initial=0))) >= _OFF
        or abs(int(b.max(initial=0))) >= _OFF
        or abs(int(b.min(initial=0))) >= _OFF
    ):
        raise OverflowError("distance coordinates exceed the packed range")
    return ((a + _OFF) << _SHIFT) | (b + _OFF)


def _unpack(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (z >> _SHIFT) - _OFF, (z & ((1 << _SHIFT) - 1)) - _OFF


def _mul_elt(a, b, ca: int, cb: int, ring: QuadRing):
    """(a + b*omega) * (ca + cb*omega) on coordinate arrays."""
    return (
        a * ca + ring.w0 * b * cb,
        a * cb + b * ca + ring.w1 * b * cb,
    )


def _embed_arr(a, b, ring: QuadRing) -> np.ndarray:
    return a + b * ring.embed(0, 1)


class DistanceSets:
    """Per-pair realizable distance sets D_ij = Lambda_j - Lambda_i within a
    radius, as packed coordinate arrays, built by the exact set-equation
    closure D_ij = union of mu*D_kl + (s - r)."""

    def __init__(self, system: SubstitutionSystem, relations: RelationSet):
        self.system = system
        self.relations = relations
        self.ring = system.ring
        self._maxshift = relations.max_shift()
        s = self._maxshift.embed()
        mu = system.mu.embed()
        self.bottom_radius = s / (mu - 1.0) + 1.0
        self._bottom = self._seed_bottom()

    def _seed_bottom(self) -> dict[tuple[int, int], np.ndarray]:
        system = self.system
        span_needed = 26.0 * self.bottom_radius + 10.0
        min_len = min(x.embed() for x in system.tile_lengths)
        level = 1
        seed = system.legal_seeds()[0]
        seed = f"{seed[0]}|{seed[1]}"
        while True:
            patch = system.generate_patch(level, seed)
            first, last = patch.span()
            if (last - first).embed() >= span_needed or level > 40:
                break
            level += 1
        pos = patch.positions()
        out: dict[tuple[int, int], np.ndarray] = {}
        for i in range(2):
            for j in range(2):
                xi = patch.coords[patch.letters == i]
                xj = patch.coords[patch.letters == j]
                pi = pos[patch.letters == i]
                pj = pos[patch.letters == j]
                keys = []
                # windowed differences: for each left point, partner points
                # within the bottom radius
                order = np.argsort(pj, kind="stable")
                pj_sorted = pj[order]
                xj_sorted = xj[order]
                lo_idx = np.searchsorted(pj_sorted, pi - self.bottom_radius - 1e-9)
                hi_idx = np.searchsorted(pj_sorted, pi + self.bottom_radius + 1e-9)
                for t in range(len(pi)):
                    sl = slice(lo_idx[t], hi_idx[t])
                    da = xj_sorted[sl, 0].astype(np.int64) - int(xi[t, 0])
                    db = xj_sorted[sl, 1].astype(np.int64) - int(xi[t, 1])
                    keys.append(_pack(da, db))
                merged = np.unique(np.concatenate(keys)) if keys else np.empty(0, np.int64)
                out[(i, j)] = merged
        return self._stabilize(out, self.bottom_radius)

    def _grow_once(
        self, cur: dict[tuple[int, int], np.ndarray], radius: float
    ) -> dict[tuple[int, int], np.ndarray]:
        ring = self.ring
        mu = self.system.mu
        nxt: dict[tuple[int, int], list[np.ndarray]] = {p: [] for p in PAIRS}
        for i in range(2):
            for j in range(2):
                for term in self.relations.terms[i][j]:
                    src = cur[(term.k, term.l)]
                    if len(src) == 0:
                        continue
                    a, b = _unpack(src)
                    a, b = _mul_elt(a, b, mu.a, mu.b, ring)
                    a = a - term.shift.a
                    b = b - term.shift.b
                    x = _embed_arr(a, b, ring)
                    keep = np.abs(x) <= radius + 1e-9
                    nxt[(i, j)].append(_pack(a[keep], b[keep]))
        out = {}
        for p in PAIRS:
            arrays = [cur[p]] + nxt[p]
            out[p] = np.unique(np.concatenate(arrays))
        return out

    def _stabilize(
        self, cur: dict[tuple[int, int], np.ndarray], radius: float
    ) -> dict[tuple[int, int], np.ndarray]:
        for _ in range(64):
            nxt = self._grow_once(cur, radius)
            if all(len(nxt[p]) == len(cur[p]) for p in PAIRS):
                return nxt
            cur = nxt
        raise ArithmeticError(
            "distance-set closure failed to stabilize within 64 iterations"
        )

    def up_to(self, span: float) -> dict[tuple[int, int], np.ndarray]:
        """Exact per-pair distance sets with |z| <= span (float cap)."""
        s = self._maxshift.embed()
        mu = self.system.mu.embed()
        radii = [float(span)]
        while radii[-1] > self.bottom_radius:
            radii.append((radii[-1] + s) / mu)
        cur = {
            p: arr[
                np.abs(_embed_arr(*_unpack(arr), self.ring)) <= radii[-1] + 1e-9
            ]
            for p, arr in self._bottom.items()
        }
        ring = self.ring
        mu_q = self.system.mu
        empty = np.empty(0, np.int64)
        for radius in reversed(radii[:-1]):
            nxt: dict[tuple[int, int], list[np.ndarray]] = {p: [empty] for p in PAIRS}
            for i in range(2):
                for j in range(2):
                    for term in self.relations.terms[i][j]:
                        src = cur[(term.k, term.l)]
                        if len(src) == 0:
                            continue
                        a, b = _unpack(src)
                        a, b = _mul_elt(a, b, mu_q.a, mu_q.b, ring)
                        a = a - term.shift.a
                        b = b - term.shift.b
                        x = _embed_arr(a, b, ring)
                        keep = np.abs(x) <= radius + 1e-9
                        nxt[(i, j)].append(_pack(a[keep], b[keep]))
            cur = {p: np.unique(np.concatenate(v)) for p, v in nxt.items()}
        return cur


def default_core_radius(system: SubstitutionSystem, relations: RelationSet) -> FieldVal:
    """maxshift * mu / (mu - 1); any radius >= maxshift/(mu-1) closes."""
    s = relations.max_shift().to_field()
    mu = system.mu.to_field()
    return s * mu / (mu - system.ring.field(1))


@dataclass
class CoreSet:
    radius: FieldVal
    # global nonnegative distances, ascending
    distances: tuple[QuadInt, ...]
    # per-pair realizable membership (canonical keys, z >= 0 and z < 0 both)
    pair_sets: dict[tuple[int, int], set[tuple[int, int]]]

    def global_nonneg(self) -> tuple[QuadInt, ...]:
        return self.distances


def core_distance_set(
    system: SubstitutionSystem,
    relations: RelationSet,
    radius: FieldVal | None = None,
) -> CoreSet:
    if radius is None:
        radius = default_core_radius(system, relations)
    sets = DistanceSets(system, relations)
    raw = sets.up_to(radius.embed() + 1e-6)
    ring = system.ring
    pair_sets: dict[tuple[int, int], set[tuple[int, int]]] = {}
    global_nonneg: dict[tuple[int, int], QuadInt] = {}
    for p, arr in raw.items():
        a, b = _unpack(arr)
        members = set()
        for aa, bb in zip(a.tolist(), b.tolist()):
            z = QuadInt(aa, bb, ring)
            az = abs(z)
            # exact cap |z| <= radius
            if radius < az.to_field():
                continue
            members.add((aa, bb))
            if z.sign() >= 0:
                global_nonneg[(az.a, az.b)] = az
        pair_sets[p] = members
    # symmetry sanity: z in D_ij <=> -z in D_ji
    for i in range(2):
        for j in range(2):
            assert {(-a, -b) for (a, b) in pair_sets[(i, j)]} == pair_sets[(j, i)]
    distances = tuple(sorted(global_nonneg.values()))
    assert (ring.zero.a, ring.zero.b) in {(d.a, d.b) for d in distances} or any(
        d == ring.zero for d in distances
    )
    # closure check: every relation argument from the ball stays in the ball
    mu_inv = system.mu.unit_inverse()
    for z in distances:
        for i in range(2):
            for j in range(2):
                for t in relations.terms[i][j]:
                    arg = (z + t.shift) * mu_inv
                    assert not (radius < abs(arg).to_field()), (
                        "relation argument escapes the self-consistent ball"
                    )
    return CoreSet(radius=radius, distances=distances, pair_sets=pair_sets)


# ---------------------------------------------------------------------------
# the self-consistent solve

def solve_self_consistent(
    system: SubstitutionSystem,
    relations: RelationSet | None = None,
    radius: FieldVal | None = None,
) -> "CorrelationTable":
    if relations is None:
        relations = build_relations(system)
    core = core_distance_set(system, relations, radius)
    ring = system.ring
    mu_f = system.mu.to_field()
    mu_inv = system.mu.unit_inverse()

    # variables: (i, j, z) for z > 0 in the global set; (0,0,0) and (1,1,0)
    index: dict[tuple[int, int, int, int], int] = {}
    order: list[tuple[int, int, QuadInt]] = []

    def add_var(i: int, j: int, z: QuadInt) -> None:
        key = (i, j, z.a, z.b)
        if key not in index:
            index[key] = len(order)
            order.append((i, j, z))

    for z in core.distances:
        if z.sign() == 0:
            add_var(0, 0, z)
            add_var(1, 1, z)
        else:
            for i, j in PAIRS:
                add_var(i, j, z)
    nvars = len(order)
    in_ball_keys = {(d.a, d.b) for d in core.distances}

    def var_of(i: int, j: int, z: QuadInt) -> int | None:
        """Variable id, or None when the value is identically zero."""
        if z.sign() < 0:
            i, j, z = j, i, -z
        if (z.a, z.b) not in in_ball_keys:
            return None
        if z.sign() == 0 and i != j:
            return None  # nu_ab(0) = nu_ba(0) = 0
        return index[(i, j, z.a, z.b)]

    zero = ring.field(0)
    rows: list[list[FieldVal]] = []
    for z in core.distances:
        for i, j in PAIRS:
            if z.sign() == 0 and (i, j) == (1, 0):
                continue  # mirror of (0, 1) at z = 0
            row = [zero] * nvars
            v = var_of(i, j, z)
            if v is not None:
                row[v] = row[v] + mu_f
            for t in relations.terms[i][j]:
                arg = (z + t.shift) * mu_inv
                w = var_of(t.k, t.l, arg)
                if w is not None:
                    row[w] = row[w] - ring.field(t.mult)
            if any(not c.is_zero() for c in row):
                rows.append(row)

    basis = kernel_basis(rows, ring)
    if len(basis) != 1:
        ranks = nvars - len(basis)
        raise ArithmeticError(
            f"self-consistent system degenerate: kernel dimension {len(basis)} "
            f"(rank {ranks} of {nvars} unknowns)"
        )
    vec = basis[0]
    scale = vec[index[(0, 0, 0, 0)]] + vec[index[(1, 1, 0, 0)]]
    if scale.is_zero():
        raise ArithmeticError("self-consistent solution has nu_aa(0)+nu_bb(0) = 0")
    inv = scale.inverse()
    values = [v * inv for v in vec]

    core_values: dict[tuple[int, int, int, int], FieldVal] = {}
    for (i, j, z), v in zip(order, values):
        core_values[(i, j, z.a, z.b)] = v
        if z.sign() == 0 and i == j:
            pass
    # zeros for the off-diagonal origin entries
    core_values[(0, 1, 0, 0)] = zero
    core_values[(1, 0, 0, 0)] = zero

    table = CorrelationTable(
        system=system,
        relations=relations,
        core=core,
        core_values=core_values,
    )
    table.validate()
    return table


@dataclass
class SamplePoint:
    z: QuadInt
    zstar: float
    values: tuple[FieldVal, FieldVal, FieldVal, FieldVal]  # aa, ab, ba, bb
    total: FieldVal
    parity: int  # unit-coordinate parity of |z| in the tile-length basis

    def value(self, i: int, j: int) -> FieldVal:
        return self.values[2 * i + j]


class CorrelationTable:
    """Solved self-consistent core plus memoized recursive evaluation."""

    def __init__(
        self,
        system: SubstitutionSystem,
        relations: RelationSet,
        core: CoreSet,
        core_values: dict[tuple[int, int, int, int], FieldVal],
    ):
        self.system = system
        self.relations = relations
        self.core = core
        self.core_values = core_values
        self.ring = system.ring

        self._den = 1
        for v in core_values.values():
            self._den = self._den * v.d // _gcd(self._den, v.d)
        # fast numerators at the common denominator
        self._core_fast: dict[tuple[int, int, int, int], tuple[int, int]] = {}
        for (i, j, a, b), v in core_values.items():
            m = self._den // v.d
            self._core_fast[(i, j, a, b)] = (v.p * m, v.q * m)
        self._memo: dict[tuple[int, int, int, int], tuple[int, int]] = {}
        # bulk sampling memoizes only below this |z|; top-level distances of
        # a sweep are each evaluated once and need not be cached
        self._memo_cutoff = float("inf")

        self._radius = core.radius
        self._radius_f = core.radius.embed()
        mu_inv = system.mu.unit_inverse()
        self._mu_inv = (mu_inv.a, mu_inv.b)
        self._terms_fast = tuple(
            tuple(
                tuple((t.k, t.l, t.shift.a, t.shift.b, t.mult) for t in self.relations.terms[i][j])
                for j in range(2)
            )
            for i in range(2)
        )

        bounds = window_bounds(window_ifs(system))
        self.window_hulls = bounds
        self.star_bounds: dict[tuple[int, int], Interval] = {}
        self._star_bounds_f: dict[tuple[int, int], tuple[float, float]] = {}
        for i in range(2):
            for j in range(2):
                iv = Interval(bounds[j].lo - bounds[i].hi, bounds[j].hi - bounds[i].lo)
                self.star_bounds[(i, j)] = iv
                self._star_bounds_f[(i, j)] = (iv.lo.embed(), iv.hi.embed())
        self._w0 = self.ring.w0
        self._w1 = self.ring.w1
        self._wemb = self.ring.embed(0, 1)
        self._wemb_star = self.ring.embed_star(0, 1)
        la = system.tile_lengths[0]
        self._la = (la.a, la.b)

    # -- helpers ------------------------------------------------------------

    def radius(self) -> FieldVal:
        return self._radius

    def denominator(self) -> int:
        return self._den

    def _sign(self, a: int, b: int) -> int:
        return self.ring.sign(a, b)

    def _inside_radius(self, a: int, b: int) -> bool:
        """|a + b*omega| <= radius, exactly (float fast path)."""
        x = a + b * self._wemb
        ax = abs(x)
        if ax < self._radius_f - 1e-6:
            return True
        if ax > self._radius_f + 1e-6:
            return False
        r = self._radius
        # compare d*|z| against (p + q*omega)
        if self._sign(a, b) < 0:
            a, b = -a, -b
        return self._sign(r.p - r.d * a, r.q - r.d * b) >= 0

    def _star_outside(self, i: int, j: int, a: int, b: int) -> bool:
        xs = (a + b * self._w1) - b * self._wemb
        lo, hi = self._star_bounds_f[(i, j)]
        if lo + 1e-6 < xs < hi - 1e-6:
            return False
        if xs < lo - 1e-6 or xs > hi + 1e-6:
            return True
        iv = self.star_bounds[(i, j)]
        sa, sb = a + b * self._w1, -b
        below = self._sign(sa * iv.lo.d - iv.lo.p, sb * iv.lo.d - iv.lo.q) < 0
        above = self._sign(iv.hi.p - sa * iv.hi.d, iv.hi.q - sb * iv.hi.d) < 0
        return below or above

    def _counts_invalid(self, a: int, b: int) -> bool:
        """True when |z| does not decompose into nonnegative tile counts
        (then z is not a difference of control points)."""
        if self._sign(a, b) < 0:
            a, b = -a, -b
        la, lb = self._la
        if lb == 0:
            return True
        if b % lb:
            return True
        na = b // lb
        nb = a - na * la
        return na < 0 or nb < 0

    # -- evaluation ---------------------------------------------------------

    def _eval(self, i: int, j: int, a: int, b: int) -> tuple[int, int]:
        if self._sign(a, b) < 0:
            i, j, a, b = j, i, -a, -b
        key = (i, j, a, b)
        if self._inside_radius(a, b):
            return self._core_fast.get(key, (0, 0))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if self._star_outside(i, j, a, b) or self._counts_invalid(a, b):
            if abs(a + b * self._wemb) <= self._memo_cutoff:
                self._memo[key] = (0, 0)
            return (0, 0)
        ia, ib = self._mu_inv
        w0, w1 = self._w0, self._w1
        acc_p = 0
        acc_q = 0
        for (k, l, sa, sb, mult) in self._terms_fast[i][j]:
            za, zb = a + sa, b + sb
            # (za + zb*omega) * mu^{-1}
            wa = za * ia + w0 * zb * ib
            wb = za * ib + zb * ia + w1 * zb * ib
            p, q = self._eval(k, l, wa, wb)
            if p or q:
                acc_p += mult * p
                acc_q += mult * q
        # multiply the sum by mu^{-1}
        p = acc_p * ia + w0 * acc_q * ib
        q = acc_p * ib + acc_q * ia + w1 * acc_q * ib
        out = (p, q)
        if abs(a + b * self._wemb) <= self._memo_cutoff:
            self._memo[key] = out
        return out

    def evaluate(self, i: int, j: int, z: QuadInt) -> FieldVal:
        p, q = self._eval(i, j, z.a, z.b)
        return FieldVal(p, q, self._den, self.ring)

    def evaluate_total(self, z: QuadInt) -> FieldVal:
        p = q = 0
        for i, j in PAIRS:
            dp, dq = self._eval(i, j, z.a, z.b)
            p += dp
            q += dq
        return FieldVal(p, q, self._den, self.ring)

    def residual(self, i: int, j: int, z: QuadInt) -> FieldVal:
        """mu*nu_ij(z) minus the relation's right-hand side; exactly zero."""
        lhs = self.evaluate(i, j, z) * self.system.mu
        rhs = self.ring.field(0)
        mu_inv = self.system.mu.unit_inverse()
        for t in self.relations.terms[i][j]:
            arg = (z + t.shift) * mu_inv
            rhs = rhs + self.evaluate(t.k, t.l, arg) * t.mult
        return lhs - rhs

    def valid_distance(self, z: QuadInt) -> bool:
        """Necessary conditions for z in Lambda - Lambda: nonnegative tile
        counts for |z| and the star image within the (margin-inflated) union
        support bound.  False guarantees every pair correlation vanishes."""
        if z.sign() == 0:
            return True
        if self._counts_invalid(z.a, z.b):
            return False
        margin = max(self.system.tile_lengths, key=lambda t: t.embed()).to_field()
        lo = min(iv.lo for iv in self.star_bounds.values()) - margin
        hi = max(iv.hi for iv in self.star_bounds.values()) + margin
        xs = z.star_field()
        return not (xs < lo) and not (hi < xs)

    def validate(self) -> None:
        """Exact post-solve checks: frequencies, zeros, range, residuals."""
        sys_ = self.system
        one = self.ring.field(1)
        assert self.evaluate(0, 0, self.ring.zero) == sys_.freq[0]
        assert self.evaluate(1, 1, self.ring.zero) == sys_.freq[1]
        assert sys_.freq[0] + sys_.freq[1] == one
        zero = self.ring.field(0)
        for z in self.core.distances:
            for i, j in PAIRS:
                v = self.evaluate(i, j, z)
                assert not (v < zero), f"negative nu_{i}{j}({z})"
                cap = min(sys_.freq[i], sys_.freq[j])
                assert not (cap < v), f"nu_{i}{j}({z}) exceeds min frequency"
                realizable = (z.a, z.b) in {
                    (za, zb) for (za, zb) in self.core.pair_sets[(i, j)]
                }
                if not realizable:
                    assert v == zero, (
                        f"nu_{i}{j}({z}) = {v} but the distance is not realizable"
                    )
                r = self.residual(i, j, z)
                assert r.is_zero(), f"core residual nu_{i}{j}({z}) = {r}"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------------------
# sampling

def distance_sets_to_span(
    table: CorrelationTable, span: float
) -> dict[tuple[int, int], np.ndarray]:
    sets = DistanceSets(table.system, table.relations)
    return sets.up_to(span)


def _eval_chunk(args):
    table, chunk = args
    out = []
    for (a, b) in chunk:
        vals = tuple(table._eval(i, j, a, b) for i, j in PAIRS)
        out.append((a, b, vals))
    return out


def covariogram_samples(
    table: CorrelationTable,
    span: float | None = None,
    patch: Patch | None = None,
    sample_cap: int = 2_000_000,
    workers: int | None = None,
) -> tuple[list[SamplePoint], int]:
    """Evaluate all four pair correlations and their sum at every distance
    realizable within the span (or the span of a given patch), sorted by the
    internal-space coordinate.  Returns (samples, truncated_count)."""
    if span is None:
        if patch is None:
            raise ValueError("need a span or a patch")
        first, last = patch.span()
        span = (last - first).embed()
    raw = distance_sets_to_span(table, span)
    merged = np.unique(np.concatenate(list(raw.values())))
    a, b = _unpack(merged)

    truncated = 0
    if len(a) > sample_cap:
        # keep the smallest |z*| ... plot-relevant ordering is by star;
        # truncate by direct-space magnitude to stay deterministic
        x = np.abs(_embed_arr(a, b, table.ring))
        order = np.argsort(x, kind="stable")[:sample_cap]
        truncated = len(a) - sample_cap
        a, b = a[order], b[order]

    pairs_list = list(zip(a.tolist(), b.tolist()))
    # children of the sweep live below span/mu; the sweep itself is one-shot
    table._memo_cutoff = span / table.system.mu.embed() * 1.05 + 1.0
    nworkers = resolve_workers(workers)
    results: list[tuple[int, int, tuple]] = []
    if nworkers > 1 and len(pairs_list) > 20_000:
        import multiprocessing as mp

        chunks = [pairs_list[i::nworkers] for i in range(nworkers)]
        with mp.get_context("fork").Pool(nworkers) as pool:
            for part in pool.map(_eval_chunk, [(table, c) for c in chunks]):
                results.extend(part)
    else:
        results = _eval_chunk((table, pairs_list))
    table._memo_cutoff = float("inf")

    den = table.denominator()
    ring = table.ring
    samples = []
    for (za, zb, vals) in results:
        z = QuadInt(za, zb, ring)
        fvals = tuple(FieldVal(p, q, den, ring) for (p, q) in vals)
        total = FieldVal(
            sum(v[0] for v in vals), sum(v[1] for v in vals), den, ring
        )
        samples.append(
            SamplePoint(
                z=z,
                zstar=z.embed_star(),
                values=fvals,
                total=total,
                parity=coordinate_parity(table.system, z),
            )
        )
    samples.sort(key=lambda s: (s.zstar, s.z.a, s.z.b))
    return samples, truncated


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("RAUZY_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# parity classification

def coordinate_parity(system: SubstitutionSystem, z: QuadInt) -> int:
    """Parity (0 even, 1 odd) of the number of unit tiles in the segment
    realizing |z|; equals the unit coordinate of |z| in the tile-length
    basis, hence independent of the realization."""
    counts = system.tile_counts(abs(z))
    if counts is None:
        return 0
    return counts[1] & 1


def parity_class(
    system: SubstitutionSystem,
    patch: Patch,
    z: QuadInt,
    max_realizations: int | None = None,
) -> str:
    """Scan realizations of z in the patch and classify by the parity of the
    number of b tiles contained in the segment between the two control
    points; returns 'even', 'odd', or 'undefined' on disagreement."""
    if z.sign() < 0:
        z = -z
    keyset = {}
    for idx, (a, b) in enumerate(map(tuple, patch.coords)):
        keyset[(int(a), int(b))] = idx
    prefix_b = np.concatenate([[0], np.cumsum(patch.letters == 1)])
    seen: set[int] = set()
    found = 0
    for idx, (a, b) in enumerate(map(tuple, patch.coords)):
        partner = keyset.get((int(a) + z.a, int(b) + z.b))
        if partner is None:
            continue
        found += 1
        # b tiles with control point in [x, x+z)
        count = int(prefix_b[partner] - prefix_b[idx])
        seen.add(count & 1)
        if len(seen) > 1:
            return "undefined"
        if max_realizations is not None and found >= max_realizations:
            break
    if not found:
        raise ValueError(f"distance {z} not found in patch")
    return "odd" if seen == {1} else "even"
