"""Internal-space iterated function system for the model-set windows.

The window of letter i satisfies  W_i = union over j, t in T_ij of
(mu* W_j + t*),  a contraction in internal space.  Approximant points are
kept as exact lattice elements x whose internal coordinate is star(x);
deduplication is therefore exact, and the interval hulls of the attractor
are solved exactly from the stabilized min/max configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import solve_dense
from .qfield import FieldVal, QuadInt
from .substitution import SubstitutionSystem

__all__ = [
    "WindowIFS",
    "WindowApprox",
    "Interval",
    "window_ifs",
    "iterate_windows",
    "window_bounds",
    "window_measures",
    "covering_measure_estimate",
]


@dataclass(frozen=True)
class Interval:
    lo: FieldVal
    hi: FieldVal

    def __post_init__(self):
        assert not (self.hi < self.lo)

    def length(self) -> FieldVal:
        return self.hi - self.lo

    def contains_star(self, x: QuadInt) -> bool:
        xs = x.star_field()
        return not (xs < self.lo) and not (self.hi < xs)

    def contains_field(self, v: FieldVal) -> bool:
        return not (v < self.lo) and not (self.hi < v)

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class WindowIFS:
    system: SubstitutionSystem
    # maps[i] = tuple of (source letter j, translation t) with t in T_ij;
    # the internal-space map is w -> star(mu)*w + star(t)
    maps: tuple[tuple[tuple[int, QuadInt], ...], ...]

    @property
    def contraction(self) -> QuadInt:
        return self.system.mu.star()

    def map_count(self) -> int:
        return sum(len(m) for m in self.maps)


@dataclass
class WindowApprox:
    ifs: WindowIFS
    depth: int
    # per letter, sorted tuples of exact lattice points (internal = star)
    points: tuple[tuple[QuadInt, ...], ...]

    def counts(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.points)

    def star_floats(self, letter: int) -> np.ndarray:
        return np.array([p.embed_star() for p in self.points[letter]])


def window_ifs(system: SubstitutionSystem) -> WindowIFS:
    maps = tuple(
        tuple((j, t) for j in range(2) for t in system.displacement[i][j])
        for i in range(2)
    )
    ifs = WindowIFS(system=system, maps=maps)
    assert abs(ifs.contraction.embed()) < 1
    for i in range(2):
        for j in range(2):
            received = sum(1 for src, _ in ifs.maps[i] if src == j)
            assert received == system.matrix[i][j]
    return ifs


def projected_count(system: SubstitutionSystem, depth: int, seeds_per_letter=1) -> int:
    m = np.array(system.matrix, dtype=object)
    mk = np.linalg.matrix_power(m, depth) if depth else np.identity(2, dtype=object)
    return int(sum(mk[i][j] * seeds_per_letter for i in range(2) for j in range(2)))


def iterate_windows(
    ifs: WindowIFS,
    depth: int,
    seed_points: tuple[tuple[QuadInt, ...], ...] | None = None,
    point_cap: int = 2_000_000,
) -> WindowApprox:
    """depth-fold application of the set-valued IFS, exact dedup."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if projected_count(ifs.system, depth) > point_cap:
        raise MemoryError(
            f"depth {depth} would produce more than {point_cap} points"
        )
    ring = ifs.system.ring
    if seed_points is None:
        current = [{(0, 0)} for _ in range(2)]
    else:
        current = [{(p.a, p.b) for p in pts} for pts in seed_points]
    mu = ifs.system.mu
    for _ in range(depth):
        nxt = [set(), set()]
        for i in range(2):
            for j, t in ifs.maps[i]:
                for (a, b) in current[j]:
                    y = QuadInt(a, b, ring) * mu + t
                    nxt[i].add((y.a, y.b))
        current = nxt
    pts = tuple(
        tuple(
            sorted(
                (QuadInt(a, b, ring) for a, b in current[i]),
                key=lambda q: q.embed_star(),
            )
        )
        for i in range(2)
    )
    return WindowApprox(ifs=ifs, depth=depth, points=pts)


def window_bounds(ifs: WindowIFS) -> tuple[Interval, Interval]:
    """Smallest interval vector fixed by the interval extension of the IFS:
    the exact hulls of the attractor windows.

    Float iteration finds which map attains each endpoint; the resulting
    linear system is solved exactly and the solution verified to be fixed.
    """
    ring = ifs.system.ring
    ms = ifs.contraction
    msf = ms.embed()
    offs = [[(j, t.star(), t.embed_star()) for j, t in ifs.maps[i]] for i in range(2)]

    big = 10.0 * (1.0 + max(abs(o[2]) for row in offs for o in row)) / (1.0 - abs(msf))
    lo = [-big, -big]
    hi = [big, big]
    for _ in range(400):
        nlo, nhi = [], []
        for i in range(2):
            cands_lo, cands_hi = [], []
            for j, _, tf in offs[i]:
                a = msf * lo[j] + tf
                b = msf * hi[j] + tf
                cands_lo.append(min(a, b))
                cands_hi.append(max(a, b))
            nlo.append(min(cands_lo))
            nhi.append(max(cands_hi))
        lo, hi = nlo, nhi

    # which (map, endpoint) attains each bound, from the float fixed point
    def pick(i: int, want_low: bool) -> tuple[int, QuadInt, bool]:
        best_v = None
        best = None
        for j, ts, tf in offs[i]:
            for use_hi in (False, True):
                v = msf * (hi[j] if use_hi else lo[j]) + tf
                if best_v is None or (v < best_v if want_low else v > best_v):
                    best_v = v
                    best = (j, ts, use_hi)
        return best

    # unknowns: x = (lo_0, hi_0, lo_1, hi_1)
    zero, one = ring.field(0), ring.field(1)
    msq = ms.to_field()
    rows, rhs = [], []
    for i in range(2):
        for want_low in (True, False):
            j, ts, use_hi = pick(i, want_low)
            row = [zero, zero, zero, zero]
            row[2 * i + (0 if want_low else 1)] = row[2 * i + (0 if want_low else 1)] + one
            k = 2 * j + (1 if use_hi else 0)
            row[k] = row[k] - msq
            rows.append(row)
            rhs.append(ts.to_field())
    sol = solve_dense(rows, rhs, ring)
    bounds = (Interval(sol[0], sol[1]), Interval(sol[2], sol[3]))

    # exact verification: the solved box is fixed under the interval map
    for i in range(2):
        clo, chi = [], []
        for j, ts, _ in offs[i]:
            a = msq * bounds[j].lo + ts
            b = msq * bounds[j].hi + ts
            clo.append(min(a, b))
            chi.append(max(a, b))
        if min(clo) != bounds[i].lo or max(chi) != bounds[i].hi:
            raise ArithmeticError("window hull solve failed to verify")
    return bounds


def window_measures(system: SubstitutionSystem) -> tuple[tuple[FieldVal, FieldVal], FieldVal]:
    """Exact Lebesgue measures (vol(W_a), vol(W_b)) and vol(W).

    The measure vector is proportional to the tile frequencies; the absolute
    scale is density(Lambda) times the covolume of the Minkowski lattice.
    """
    covol = system.ring.covolume.to_field()
    total = system.density() * covol
    return (system.freq[0] * total, system.freq[1] * total), total


def window_seed_points(system: SubstitutionSystem) -> tuple[QuadInt, QuadInt]:
    """One control point per letter; their star images lie in the windows."""
    patch = system.generate_patch(4, system.legal_seeds()[0][0] + "|" + system.legal_seeds()[0][1])
    out = []
    for letter in range(2):
        a, b = patch.coords_for_letter(letter)[0]
        out.append(system.ring.int2(int(a), int(b)))
    return out[0], out[1]


def covering_measure_estimate(ifs: WindowIFS, depth: int) -> tuple[float, float]:
    """Union length of the depth-k piece hulls: each depth-k image of window
    j spans |mu*|**depth * diam(hull_j) around its sample point.  Converges
    to the window measures (slowly when the boundary dimension is large,
    since sub-resolution gaps are filled in)."""
    system = ifs.system
    bounds = window_bounds(ifs)
    seeds = window_seed_points(system)
    mu = system.mu
    # track (point, source letter) so each piece gets its own hull
    current = [{(p.a, p.b, j)} for j, p in enumerate(seeds)]
    for _ in range(depth):
        nxt = [set(), set()]
        for i in range(2):
            for j, t in ifs.maps[i]:
                for (a, b, src) in current[j]:
                    y = QuadInt(a, b, system.ring) * mu + t
                    nxt[i].add((y.a, y.b, src))
        current = nxt
    ms = ifs.contraction.embed()
    msk = ms**depth
    out = []
    for i in range(2):
        ivs = []
        for a, b, src in current[i]:
            p = system.ring.embed_star(a, b)
            rel = sorted(
                (
                    msk * (bounds[src].lo.embed() - seeds[src].embed_star()),
                    msk * (bounds[src].hi.embed() - seeds[src].embed_star()),
                )
            )
            ivs.append((p + rel[0], p + rel[1]))
        ivs.sort()
        total = 0.0
        cur_s, cur_e = ivs[0]
        for s, e in ivs[1:]:
            if s <= cur_e:
                cur_e = max(cur_e, e)
            else:
                total += cur_e - cur_s
                cur_s, cur_e = s, e
        total += cur_e - cur_s
        out.append(total)
    return out[0], out[1]
