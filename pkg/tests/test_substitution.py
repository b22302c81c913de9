import numpy as np
import pytest

from rauzycov.qfield import FieldVal, QuadInt
from rauzycov.substitution import (
    NotPrimitiveError,
    NotUnimodularError,
    SubstitutionError,
    generate_patch,
    parse,
    patch_by_inflation,
    patch_point,
    patch_size,
)

SSM = "a -> bba; b -> ab"
SIGMA = "a -> aaaaabb; b -> baa"
FIB = "a -> ab; b -> a"


@pytest.fixture(scope="module")
def ssm():
    return parse(SSM)


@pytest.fixture(scope="module")
def sigma():
    return parse(SIGMA)


@pytest.fixture(scope="module")
def fib():
    return parse(FIB)


class TestParse:
    def test_ssm_matrix(self, ssm):
        assert ssm.matrix == ((1, 1), (2, 1))

    def test_sigma_matrix(self, sigma):
        assert sigma.matrix == ((5, 2), (2, 1))

    def test_identity_rejected(self):
        with pytest.raises(NotPrimitiveError):
            parse("a -> a; b -> b")

    def test_singular_rejected(self):
        with pytest.raises(NotUnimodularError):
            parse("a -> ab; b -> ab")

    def test_unknown_letter(self):
        with pytest.raises(SubstitutionError, match="unknown letter"):
            parse("a -> ac; b -> a")

    def test_empty_word(self):
        with pytest.raises(SubstitutionError, match="empty"):
            parse("a -> ; b -> a")

    def test_wrong_alphabet_size(self):
        with pytest.raises(SubstitutionError, match="alphabet size"):
            parse("a -> ab; b -> ca; c -> ab")


class TestValidate:
    def test_ssm_multiplier(self, ssm):
        assert ssm.mu == QuadInt(1, 1)

    def test_sigma_multiplier(self, sigma):
        assert sigma.mu == QuadInt(3, 2)

    def test_reducible_rejected(self):
        # a -> abb; b -> ba has matrix [[1,0],[2,2]]: det 2, and triangular
        with pytest.raises(SubstitutionError):
            parse("a -> abb; b -> bb")


class TestPFData:
    def test_ssm_lengths_and_freq(self, ssm):
        assert ssm.tile_lengths == (QuadInt(0, 1), QuadInt(1, 0))
        assert ssm.freq == (FieldVal(-1, 1, 1), FieldVal(2, -1, 1))

    def test_sigma_lengths_and_freq(self, sigma):
        assert sigma.tile_lengths == (QuadInt(1, 1), QuadInt(1, 0))
        assert sigma.freq == (FieldVal(0, 1, 2), FieldVal(2, -1, 2))

    def test_fib_lengths(self, fib):
        assert fib.ring.symbol == "phi"
        assert fib.tile_lengths == (fib.ring.int2(0, 1), fib.ring.one)

    @pytest.mark.parametrize("text", [SSM, SIGMA, FIB])
    def test_freq_sums_to_one(self, text):
        s = parse(text)
        assert s.freq[0] + s.freq[1] == s.ring.field(1)


class TestDisplacement:
    def test_ssm_offsets(self, ssm):
        r = ssm.ring
        assert ssm.displacement[0][0] == (r.int2(2),)
        assert ssm.displacement[0][1] == (r.zero,)
        assert ssm.displacement[1][0] == (r.zero, r.one)
        assert ssm.displacement[1][1] == (r.int2(0, 1),)  # lambda - 1 = sqrt2

    def test_sigma_offsets(self, sigma):
        r = sigma.ring
        lam = r.int2(1, 1)
        assert sigma.displacement[0][0] == tuple(lam * k for k in range(5))
        assert sigma.displacement[0][1] == (r.one, lam + 1)
        assert sigma.displacement[1][0] == (lam * 5, lam * 5 + 1)
        assert sigma.displacement[1][1] == (r.zero,)

    @pytest.mark.parametrize("text", [SSM, SIGMA, FIB])
    def test_cardinalities_match_matrix(self, text):
        s = parse(text)
        for i in range(2):
            for j in range(2):
                assert len(s.displacement[i][j]) == s.matrix[i][j]


class TestDensity:
    def test_ssm(self, ssm):
        assert ssm.density() == FieldVal(2, 1, 4)

    def test_sigma_exact(self, sigma):
        # mean tile length is exactly 2
        assert sigma.density() == FieldVal(1, 0, 2)

    @pytest.mark.parametrize("text", [SSM, SIGMA, FIB])
    def test_density_times_mean_length_is_one(self, text):
        s = parse(text)
        mean = s.freq[0] * s.tile_lengths[0] + s.freq[1] * s.tile_lengths[1]
        assert s.density() * mean == s.ring.field(1)


class TestPatch:
    def test_level1_word(self, ssm):
        assert generate_patch(ssm, 1, "a|a").word == "bbabba"

    def test_level2_word(self, ssm):
        assert generate_patch(ssm, 2, "a|a").word == "ababbbaababbba"

    def test_counts_follow_matrix_power(self, ssm):
        m = np.array(ssm.matrix)
        seed_counts = np.array([2, 0])
        for k in (1, 3, 5):
            p = generate_patch(ssm, k, "a|a")
            expect = np.linalg.matrix_power(m, k) @ seed_counts
            assert p.letter_counts() == tuple(expect)

    def test_illegal_seed_lists_legal_ones(self, fib):
        with pytest.raises(ValueError, match="legal two-letter seeds"):
            generate_patch(fib, 2, "b|b")  # bb never occurs for fibonacci

    def test_origin_at_zero(self, ssm):
        p = generate_patch(ssm, 3, "a|a")
        assert tuple(p.coords[p.origin_index]) == (0, 0)

    def test_patch_size_helper(self, sigma):
        for k in (0, 1, 4):
            assert patch_size(sigma, k, "a|a") == len(generate_patch(sigma, k, "a|a"))

    @pytest.mark.parametrize("text,seed", [(SSM, "a|a"), (SIGMA, "a|a"), (FIB, "a|b")])
    def test_adjacent_differences_are_tile_lengths(self, text, seed):
        s = parse(text)
        p = generate_patch(s, 5, seed)
        lengths = {(q.a, q.b) for q in s.tile_lengths}
        diffs = p.coords[1:] - p.coords[:-1]
        assert {(int(a), int(b)) for a, b in diffs} <= lengths


class TestInflationRoute:
    @pytest.mark.parametrize("text,seed", [(SSM, "a|a"), (SIGMA, "a|a"), (FIB, "a|a")])
    @pytest.mark.parametrize("level", [0, 1, 2, 4, 6])
    def test_matches_word_iteration(self, text, seed, level):
        s = parse(text)
        p = generate_patch(s, level, seed)
        via_sets = patch_by_inflation(s, level, seed)
        for letter in range(2):
            got = sorted((x.a, x.b) for x in via_sets[letter])
            want = sorted(map(tuple, p.coords_for_letter(letter)))
            assert got == want

    @pytest.mark.parametrize("text", [SSM, SIGMA])
    def test_point_indexing_matches_patch(self, text):
        s = parse(text)
        p = generate_patch(s, 4, "a|a")
        for idx in [0, 1, len(p) // 2, len(p) - 1]:
            letter, pos = patch_point(s, 4, "a|a", idx)
            assert letter == p.letters[idx]
            assert (pos.a, pos.b) == tuple(p.coords[idx])


class TestFrequencyConvergence:
    @pytest.mark.parametrize("text", [SSM, SIGMA])
    def test_deviation_decays_like_mu_power(self, text):
        s = parse(text)
        mu = s.mu.embed()
        freq0 = s.freq[0].embed()

        def deviation(k):
            p = generate_patch(s, k, "a|a")
            c0, c1 = p.letter_counts()
            return abs(c0 / (c0 + c1) - freq0)

        c_at_4 = deviation(4) * mu**4
        for k in (5, 6):
            assert deviation(k) <= max(c_at_4, 1e-12) * mu ** (-k) * 1.0 + 1e-15
