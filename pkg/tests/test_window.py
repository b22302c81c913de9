import pytest

from rauzycov.qfield import FieldVal, QuadInt
from rauzycov.substitution import generate_patch, parse
from rauzycov.window import (
    covering_measure_estimate,
    iterate_windows,
    window_bounds,
    window_ifs,
    window_measures,
    window_seed_points,
)


@pytest.fixture(scope="module")
def ssm():
    return parse("a -> bba; b -> ab")


@pytest.fixture(scope="module")
def sigma():
    return parse("a -> aaaaabb; b -> baa")


@pytest.fixture(scope="module")
def fib():
    return parse("a -> ab; b -> a")


class TestWindowIFS:
    def test_ssm_wb_receives_three_maps(self, ssm):
        ifs = window_ifs(ssm)
        offsets = sorted((j, (t.a, t.b)) for j, t in ifs.maps[1])
        assert offsets == [(0, (0, 0)), (0, (1, 0)), (1, (0, 1))]

    def test_sigma_map_counts(self, sigma):
        ifs = window_ifs(sigma)
        assert len(ifs.maps[0]) == 7
        assert len(ifs.maps[1]) == 3

    @pytest.mark.parametrize("text", ["a -> bba; b -> ab", "a -> aaaaabb; b -> baa"])
    def test_total_maps_equals_matrix_sum(self, text):
        s = parse(text)
        ifs = window_ifs(s)
        assert ifs.map_count() == sum(sum(row) for row in s.matrix)

    def test_contraction_inside_unit_interval(self, ssm, sigma, fib):
        for s in (ssm, sigma, fib):
            assert abs(window_ifs(s).contraction.embed()) < 1


class TestIterate:
    def test_depth0(self, ssm):
        ap = iterate_windows(window_ifs(ssm), 0)
        assert ap.counts() == (1, 1)

    def test_ssm_depth1_wa(self, ssm):
        ap = iterate_windows(window_ifs(ssm), 1)
        assert sorted((p.a, p.b) for p in ap.points[0]) == [(0, 0), (2, 0)]

    @pytest.mark.parametrize("depth", [1, 2, 4, 6])
    def test_counts_follow_matrix_power(self, ssm, depth):
        # distinct control points as seeds: the disjoint unions of the set
        # equation then guarantee no collisions
        import numpy as np

        seeds = window_seed_points(ssm)
        ap = iterate_windows(
            window_ifs(ssm), depth, seed_points=((seeds[0],), (seeds[1],))
        )
        mk = np.linalg.matrix_power(np.array(ssm.matrix), depth)
        assert ap.counts() == tuple(int(mk[i].sum()) for i in range(2))

    def test_memory_guard(self, sigma):
        with pytest.raises(MemoryError):
            iterate_windows(window_ifs(sigma), 30)

    def test_one_step_consistency(self, ssm):
        # applying the IFS once to depth k gives exactly depth k+1
        ifs = window_ifs(ssm)
        seeds = tuple((p,) for p in window_seed_points(ssm))
        ap4 = iterate_windows(ifs, 4, seed_points=seeds)
        ap5 = iterate_windows(ifs, 5, seed_points=seeds)
        again = iterate_windows(ifs, 1, seed_points=ap4.points)
        assert again.points == ap5.points

    @pytest.mark.parametrize("text", ["a -> bba; b -> ab", "a -> aaaaabb; b -> baa"])
    def test_letter_clouds_disjoint(self, text):
        s = parse(text)
        depth = 8 if s.mu.embed() < 3 else 5
        seeds = window_seed_points(s)
        ap = iterate_windows(
            window_ifs(s), depth, seed_points=((seeds[0],), (seeds[1],))
        )
        pa = {(p.a, p.b) for p in ap.points[0]}
        pb = {(p.a, p.b) for p in ap.points[1]}
        assert not (pa & pb)


class TestBounds:
    def test_fibonacci_exact_intervals(self, fib):
        # interval windows: the hull solves two affine fixed-point equations
        # and its length equals the exact measure
        b = window_bounds(window_ifs(fib))
        (va, vb), _ = window_measures(fib)
        assert b[0].length() == va
        assert b[1].length() == vb
        phi = fib.ring.field(0, 1)
        assert b[0].lo == phi - 2 and b[0].hi == phi - 1
        assert b[1].lo == fib.ring.field(-1) and b[1].hi == phi - 2

    @pytest.mark.parametrize(
        "text,depth", [("a -> bba; b -> ab", 8), ("a -> aaaaabb; b -> baa", 5)]
    )
    def test_contains_deep_approximant(self, text, depth):
        s = parse(text)
        ifs = window_ifs(s)
        b = window_bounds(ifs)
        seeds = window_seed_points(s)
        ap = iterate_windows(ifs, depth, seed_points=((seeds[0],), (seeds[1],)))
        for i in range(2):
            assert all(b[i].contains_star(p) for p in ap.points[i])

    def test_shrinking_hulls(self, ssm):
        # hull of the depth-k cloud is non-decreasing in k and within bounds
        ifs = window_ifs(ssm)
        b = window_bounds(ifs)
        seeds = window_seed_points(ssm)
        prev = None
        for depth in (2, 4, 6):
            ap = iterate_windows(ifs, depth, seed_points=((seeds[0],), (seeds[1],)))
            spans = []
            for i in range(2):
                xs = ap.star_floats(i)
                assert xs.min() >= b[i].lo.embed() - 1e-9
                assert xs.max() <= b[i].hi.embed() + 1e-9
                spans.append(xs.max() - xs.min())
            if prev is not None:
                assert spans[0] >= prev[0] - 1e-12 and spans[1] >= prev[1] - 1e-12
            prev = spans

    def test_patch_star_images_inside_bounds(self, ssm):
        b = window_bounds(window_ifs(ssm))
        p = generate_patch(ssm, 6, "a|a")
        for letter in range(2):
            for a, bb in p.coords_for_letter(letter):
                assert b[letter].contains_star(QuadInt(int(a), int(bb)))


class TestMeasures:
    def test_ssm_total_is_lambda(self, ssm):
        (va, vb), tot = window_measures(ssm)
        assert tot == FieldVal(1, 1, 1)
        assert va == FieldVal(1, 0, 1)
        assert vb == FieldVal(0, 1, 1)

    def test_ratio_is_frequency_ratio(self, ssm):
        (va, vb), _ = window_measures(ssm)
        assert va * ssm.freq[1] == vb * ssm.freq[0]

    def test_sigma_total(self, sigma):
        _, tot = window_measures(sigma)
        assert tot == FieldVal(0, 1, 1)

    def test_fibonacci_covering_within_two_percent(self, fib):
        (va, vb), _ = window_measures(fib)
        est = covering_measure_estimate(window_ifs(fib), 10)
        assert abs(est[0] - va.embed()) / va.embed() <= 0.02
        assert abs(est[1] - vb.embed()) / vb.embed() <= 0.02

    def test_cantorval_covering_decays(self, ssm):
        # the over-count shrinks like |mu*|**((1-dim)he*depth); just require
        # sound covers that strictly improve with depth
        (va, vb), _ = window_measures(ssm)
        ifs = window_ifs(ssm)
        errs = []
        for depth in (6, 8, 10):
            est = covering_measure_estimate(ifs, depth)
            assert est[0] >= va.embed() - 1e-9 and est[1] >= vb.embed() - 1e-9
            errs.append(est[0] - va.embed())
        assert errs[0] > errs[1] > errs[2]
