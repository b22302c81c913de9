"""Binary substitution rules and their derived inflation data.

A rule text like ``a -> bba; b -> ab`` is parsed, checked to define a
unimodular quadratic Pisot inflation, and expanded into: the substitution
matrix, the Perron-Frobenius multiplier and eigenvectors (exact, in the
quadratic field the multiplier generates), natural tile lengths, the
set-valued displacement matrix, and finite patches of the fixed-point
tiling with exact control-point coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qfield import FieldVal, QuadInt, QuadRing

__all__ = [
    "SubstitutionError",
    "NotPrimitiveError",
    "NotUnimodularError",
    "ReducibleError",
    "NotPisotError",
    "SubstitutionSystem",
    "Patch",
    "parse",
]


class SubstitutionError(ValueError):
    """A rule text that does not define a supported inflation."""

    code = "invalid"


class NotPrimitiveError(SubstitutionError):
    code = "not_primitive"


class NotUnimodularError(SubstitutionError):
    code = "not_unimodular"


class ReducibleError(SubstitutionError):
    code = "reducible_charpoly"


class NotPisotError(SubstitutionError):
    code = "not_pisot"


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s**2 * d with d squarefree; returns (d, s)."""
    s = 1
    d = n
    f = 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            s *= f
        f += 1
    return d, s


@dataclass(frozen=True)
class SubstitutionSystem:
    alphabet: tuple[str, str]
    rules: tuple[str, str]
    matrix: tuple[tuple[int, int], tuple[int, int]]
    ring: QuadRing
    mu: QuadInt
    tile_lengths: tuple[QuadInt, QuadInt]
    freq: tuple[FieldVal, FieldVal]
    displacement: tuple[tuple[tuple[QuadInt, ...], ...], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return 2

    def letter_index(self, letter: str) -> int:
        return self.alphabet.index(letter)

    def density(self) -> FieldVal:
        """Points of the fixed point per unit length: 1 / mean tile length."""
        mean = self.ring.field(0)
        for f, ln in zip(self.freq, self.tile_lengths):
            mean = mean + f * ln
        return mean.inverse()

    def length_coords(self, letter: int) -> tuple[int, int]:
        ln = self.tile_lengths[letter]
        return ln.a, ln.b

    def tile_counts(self, z: QuadInt) -> tuple[int, int] | None:
        """Write z = na*len_first + nb*len_last if possible with integers."""
        la, lb = self.tile_lengths
        # z = na*(la.a + la.b w) + nb   (lb == 1)
        if la.b == 0:
            return None
        if z.b % la.b:
            return None
        na = z.b // la.b
        nb = z.a - na * la.a
        return na, nb

    def legal_seeds(self, depth: int = 8) -> list[str]:
        """Two-letter factors of the language, found by scanning iterates."""
        words = set()
        for letter in self.alphabet:
            w = letter
            for _ in range(depth):
                w = "".join(self.rules[self.letter_index(c)] for c in w)
            words.add(w)
        pairs = sorted({w[i : i + 2] for w in words for i in range(len(w) - 1)})
        return pairs

    def generate_patch(self, level: int, seed: str = "a|a") -> "Patch":
        return generate_patch(self, level, seed)

    def to_json_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "rules": {a: r for a, r in zip(self.alphabet, self.rules)},
            "matrix": [list(row) for row in self.matrix],
            "ring": self.ring.symbol,
            "pf_multiplier": str(self.mu),
            "tile_lengths": [str(x) for x in self.tile_lengths],
            "frequencies": [str(x) for x in self.freq],
            "density": str(self.density()),
            "displacement": [
                [[str(t) for t in cell] for cell in row] for row in self.displacement
            ],
        }


def parse(text: str) -> SubstitutionSystem:
    """Parse ``letter -> word; letter -> word`` and derive all inflation data."""
    entries = [part.strip() for part in text.replace("\n", ";").split(";") if part.strip()]
    alphabet: list[str] = []
    rules: dict[str, str] = {}
    for entry in entries:
        if "->" not in entry:
            raise SubstitutionError(f"cannot parse rule {entry!r}")
        lhs, rhs = (s.strip() for s in entry.split("->", 1))
        if len(lhs) != 1:
            raise SubstitutionError(f"left-hand side {lhs!r} must be a single letter")
        if lhs in rules:
            raise SubstitutionError(f"duplicate rule for letter {lhs!r}")
        if not rhs:
            raise SubstitutionError(f"empty word for letter {lhs!r}")
        alphabet.append(lhs)
        rules[lhs] = rhs
    if len(alphabet) != 2:
        raise SubstitutionError(
            f"unsupported alphabet size {len(alphabet)} (binary rules only)"
        )
    for lhs, rhs in rules.items():
        for c in rhs:
            if c not in rules:
                raise SubstitutionError(f"unknown letter {c!r} in rule for {lhs!r}")

    rule_words = tuple(rules[a] for a in alphabet)
    m = tuple(
        tuple(rule_words[j].count(alphabet[i]) for j in range(2)) for i in range(2)
    )
    ring, mu = _validate_matrix(m)
    lengths = _tile_lengths(m, ring, mu)
    freqs = _frequencies(m, ring, mu)
    disp = _displacement(rule_words, alphabet, lengths, ring)
    system = SubstitutionSystem(
        alphabet=(alphabet[0], alphabet[1]),
        rules=rule_words,
        matrix=m,
        ring=ring,
        mu=mu,
        tile_lengths=lengths,
        freq=freqs,
        displacement=disp,
    )
    _check_eigen_relations(system)
    return system


def _validate_matrix(m) -> tuple[QuadRing, QuadInt]:
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    tr = m[0][0] + m[1][1]
    if abs(det) != 1:
        raise NotUnimodularError(f"substitution matrix has determinant {det}")
    m2 = [
        [sum(m[i][k] * m[k][j] for k in range(2)) for j in range(2)] for i in range(2)
    ]
    if not all(v > 0 for row in m2 for v in row):
        raise NotPrimitiveError("no power of the substitution matrix is positive")
    disc = tr * tr - 4 * det
    if disc <= 0 or math.isqrt(disc) ** 2 == disc:
        raise ReducibleError(
            "characteristic polynomial is reducible over the rationals"
        )
    d0, s = _squarefree_split(disc)
    if d0 % 4 == 1:
        ring = QuadRing((d0 - 1) // 4, 1, "phi" if d0 == 5 else f"w{d0}")
        # mu = (tr + s*sqrt(d0))/2 = (tr - s)/2 + s*omega with omega=(1+sqrt(d0))/2
        if (tr - s) % 2:
            raise SubstitutionError("PF eigenvalue is not an algebraic integer")
        mu = ring.int2((tr - s) // 2, s)
    else:
        ring = QuadRing(d0, 0, "sqrt2" if d0 == 2 else f"sqrt{d0}")
        if tr % 2 or s % 2:
            raise SubstitutionError("PF eigenvalue is not an algebraic integer")
        mu = ring.int2(tr // 2, s // 2)
    # Pisot-Vijayaraghavan: mu > 1 and |conjugate| < 1
    if not (mu > ring.one):
        raise NotPisotError("PF eigenvalue is not > 1")
    conj = mu.star()
    if not (-ring.one < conj < ring.one):
        raise NotPisotError("conjugate root has modulus >= 1 (not a PV number)")
    return ring, mu


def _tile_lengths(m, ring: QuadRing, mu: QuadInt):
    # left eigenvector (alpha, 1): alpha*M01 + M11 = mu
    alpha = (mu.to_field() - m[1][1]) / m[0][1]
    if alpha.d != 1:
        raise SubstitutionError(
            f"tile length {alpha} is not integral in {ring.symbol}; unsupported"
        )
    return (alpha.as_quadint(), ring.one)


def _frequencies(m, ring: QuadRing, mu: QuadInt):
    v0 = ring.field(m[0][1])
    v1 = mu.to_field() - m[0][0]
    total = v0 + v1
    return (v0 / total, v1 / total)


def _displacement(rule_words, alphabet, lengths, ring: QuadRing):
    t = [[[] for _ in range(2)] for _ in range(2)]
    for j, word in enumerate(rule_words):
        pos = ring.zero
        for c in word:
            i = alphabet.index(c)
            t[i][j].append(pos)
            pos = pos + lengths[i]
    return tuple(tuple(tuple(cell) for cell in row) for row in t)


def _check_eigen_relations(s: SubstitutionSystem) -> None:
    m = s.matrix
    mu_f = s.mu.to_field()
    for j in range(2):
        lhs = s.tile_lengths[0].to_field() * m[0][j] + s.tile_lengths[1].to_field() * m[1][j]
        assert lhs == mu_f * s.tile_lengths[j].to_field()
    for i in range(2):
        lhs = s.freq[0] * m[i][0] + s.freq[1] * m[i][1]
        assert lhs == mu_f * s.freq[i]
    assert s.freq[0] + s.freq[1] == s.ring.field(1)
    for i in range(2):
        for j in range(2):
            assert len(s.displacement[i][j]) == m[i][j]


# ---------------------------------------------------------------------------
# patches

@dataclass
class Patch:
    """A finite window of the tiling: ``level``-fold inflation of a legal
    two-letter seed, with the marked position at coordinate 0."""

    system: SubstitutionSystem
    seed: str
    level: int
    word: str
    letters: np.ndarray  # uint8 letter indices, left to right
    coords: np.ndarray  # shape (n, 2) int64 ring coordinates of control points
    origin_index: int

    def __len__(self) -> int:
        return len(self.word)

    def positions(self) -> np.ndarray:
        """Float positions of all control points (for windowing/plots)."""
        ring = self.system.ring
        w = ring.embed(0, 1)
        return self.coords[:, 0] + self.coords[:, 1] * w

    def letter_counts(self) -> tuple[int, int]:
        c1 = int(np.count_nonzero(self.letters))
        return len(self.letters) - c1, c1

    def point(self, index: int) -> QuadInt:
        a, b = self.coords[index]
        return self.system.ring.int2(int(a), int(b))

    def coords_for_letter(self, letter: int) -> np.ndarray:
        return self.coords[self.letters == letter]

    def span(self) -> tuple[QuadInt, QuadInt]:
        """First control point and the right endpoint of the last tile."""
        first = self.point(0)
        last = self.point(len(self.word) - 1)
        return first, last + self.system.tile_lengths[self.letters[-1]]


def _iterate_word(system: SubstitutionSystem, word: str, level: int) -> str:
    rules = dict(zip(system.alphabet, system.rules))
    for _ in range(level):
        word = "".join(rules[c] for c in word)
    return word


def generate_patch(system: SubstitutionSystem, level: int, seed: str = "a|a") -> Patch:
    if level < 0:
        raise ValueError("level must be >= 0")
    if "|" not in seed:
        raise ValueError("seed must mark the origin with '|', e.g. 'a|a'")
    left, right = seed.split("|", 1)
    if len(left) != 1 or len(right) != 1:
        raise ValueError("seed must be a two-letter word with the origin in between")
    legal = system.legal_seeds()
    if left + right not in legal:
        raise ValueError(
            f"seed {seed!r} is not legal; legal two-letter seeds: "
            + ", ".join(f"{w[0]}|{w[1]}" for w in legal)
        )

    lword = _iterate_word(system, left, level)
    rword = _iterate_word(system, right, level)
    word = lword + rword
    idx = {c: i for i, c in enumerate(system.alphabet)}
    letters = np.frombuffer(
        bytes(idx[c] for c in word), dtype=np.uint8
    ).copy()

    la = np.array([system.length_coords(0)[0], system.length_coords(1)[0]], dtype=np.int64)
    lb = np.array([system.length_coords(0)[1], system.length_coords(1)[1]], dtype=np.int64)
    step_a = la[letters]
    step_b = lb[letters]
    coords = np.empty((len(word), 2), dtype=np.int64)
    coords[0] = 0
    np.cumsum(step_a[:-1], out=coords[1:, 0])
    np.cumsum(step_b[:-1], out=coords[1:, 1])
    origin = len(lword)
    coords -= coords[origin]
    return Patch(
        system=system,
        seed=seed,
        level=level,
        word=word,
        letters=letters,
        coords=coords,
        origin_index=origin,
    )


def patch_by_inflation(
    system: SubstitutionSystem, level: int, seed: str = "a|a"
) -> list[list[QuadInt]]:
    """Control points per letter via the set-valued inflation recursion
    (independent of the word route; used as a cross-check)."""
    left, right = seed.split("|", 1)
    per_letter: list[list[QuadInt]] = [[], []]

    def expand(letter: int, pos: QuadInt, k: int) -> None:
        if k == 0:
            per_letter[letter].append(pos)
            return
        base = system.mu * pos
        for i in range(2):
            for t in system.displacement[i][letter]:
                expand(i, base + t, k - 1)

    lam = system.mu
    origin = system.ring.zero
    left_start = origin - system.tile_lengths[system.letter_index(left)] * (lam**level)
    expand(system.letter_index(left), _unscale(system, left_start, level), level)
    expand(system.letter_index(right), origin, level)
    return per_letter


def _unscale(system: SubstitutionSystem, pos: QuadInt, level: int) -> QuadInt:
    # expand() multiplies the base position by mu at each level; feed it the
    # level-0 preimage so the level-k tile starts at `pos`
    inv = system.mu.unit_inverse()
    for _ in range(level):
        pos = pos * inv
    return pos


def supertile_counts(system: SubstitutionSystem, level: int) -> list[tuple[int, int]]:
    """Letter-count vectors of the level-k supertiles (columns of M**k)."""
    m = np.array(system.matrix, dtype=object)
    mk = np.linalg.matrix_power(m, level) if level else np.identity(2, dtype=object)
    return [(int(mk[0][j]), int(mk[1][j])) for j in range(2)]


def patch_point(
    system: SubstitutionSystem, level: int, seed: str, index: int
) -> tuple[int, QuadInt]:
    """The ``index``-th control point (letter, exact position) of the level-k
    patch, without materializing the patch.

    Walks the supertile hierarchy; coordinates are exact for any level.
    """
    left, right = seed.split("|", 1)
    counts = [system.matrix]  # counts[k] = M**k as tuples
    mk = ((1, 0), (0, 1))
    table = [mk]
    for _ in range(level):
        prev = table[-1]
        m = system.matrix
        nxt = tuple(
            tuple(sum(m[i][k] * prev[k][j] for k in range(2)) for j in range(2))
            for i in range(2)
        )
        table.append(nxt)
    del counts

    def supertile_size(letter: int, k: int) -> int:
        return table[k][0][letter] + table[k][1][letter]

    li, ri = system.letter_index(left), system.letter_index(right)
    left_size = supertile_size(li, level)
    if index < left_size:
        letter, base, k, offset = li, None, level, index
        start = -(system.tile_lengths[li] * (system.mu**level))
    else:
        letter, k, offset = ri, level, index - left_size
        start = system.ring.zero
        if offset >= supertile_size(ri, level):
            raise IndexError("patch point index out of range")

    pos = start
    mu_pow = [system.ring.one]
    for _ in range(level):
        mu_pow.append(mu_pow[-1] * system.mu)
    while k > 0:
        word = system.rules[letter]
        child_pos = system.ring.zero
        for c in word:
            ci = system.letter_index(c)
            size = supertile_size(ci, k - 1)
            if offset < size:
                pos = pos + child_pos * mu_pow[k - 1]
                letter = ci
                k -= 1
                break
            offset -= size
            child_pos = child_pos + system.tile_lengths[ci]
        else:
            raise AssertionError("index walk escaped the supertile")
    return letter, pos


def patch_size(system: SubstitutionSystem, level: int, seed: str) -> int:
    left, right = seed.split("|", 1)
    m = np.array(system.matrix, dtype=object)
    mk = np.linalg.matrix_power(m, level) if level else np.identity(2, dtype=object)
    total = 0
    for letter in (left, right):
        j = system.letter_index(letter)
        total += int(mk[0][j] + mk[1][j])
    return total
