import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzgate.stats import (
    compare_samples,
    coverage,
    mann_whitney,
    pearson,
    vargha_delaney_a12,
)

# ---------------------------------------------------------------------------
# Independent oracles: label-mask enumeration + pairwise counting.  They
# share no code with the library's rank-based implementations.
# ---------------------------------------------------------------------------

def pairwise_u(xs, ys) -> float:
    u = 0.0
    for x in xs:
        for y in ys:
            if x > y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


def brute_force_p(xs, ys) -> float:
    """Enumerate all distinct assignments of pooled values to group one."""
    pooled = list(xs) + list(ys)
    n1 = len(xs)
    mu = n1 * len(ys) / 2.0
    observed = abs(pairwise_u(xs, ys) - mu)
    count = total = 0
    indices = range(len(pooled))
    for chosen in itertools.combinations(indices, n1):
        chosen_set = set(chosen)
        group_x = [pooled[i] for i in chosen]
        group_y = [pooled[i] for i in indices if i not in chosen_set]
        if abs(pairwise_u(group_x, group_y) - mu) >= observed - 1e-12:
            count += 1
        total += 1
    return count / total


def pairwise_a12(xs, ys) -> float:
    return pairwise_u(xs, ys) / (len(xs) * len(ys))


class TestMannWhitney:
    def test_complete_separation_small_sample(self):
        result = mann_whitney([1, 2, 3], [4, 5, 6])
        assert result.U == 0
        assert result.pValue == pytest.approx(0.1)
        assert result.exact

    def test_identical_multisets_p_is_one(self):
        result = mann_whitney([3, 1, 2], [1, 2, 3])
        assert result.pValue == 1.0

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            mann_whitney([], [1])
        with pytest.raises(ValueError):
            mann_whitney([1], [])

    def test_exact_path_matches_brute_force_oracle(self):
        rng = random.Random(17)
        for _ in range(100):
            n, m = rng.randint(1, 8), rng.randint(1, 8)
            xs = [rng.randint(0, 6) for _ in range(n)]
            ys = [rng.randint(0, 6) for _ in range(m)]
            result = mann_whitney(xs, ys, method="exact")
            assert result.U == pytest.approx(pairwise_u(xs, ys))
            assert result.pValue == pytest.approx(brute_force_p(xs, ys))

    def test_approx_path_tracks_exact_path_on_small_samples(self):
        """Cross-check of the two p-value paths over all n,m <= 8.

        The normal approximation is intrinsically loose at micro samples,
        so the quantitative bound applies from n,m >= 5; for every size
        the two paths must agree on significance (no strict-0.01 result
        on one path may look insignificant at 0.05 on the other).
        """
        rng = random.Random(23)
        worst_5plus = 0.0
        for _ in range(400):
            n, m = rng.randint(1, 8), rng.randint(1, 8)
            xs = [rng.randint(0, 10) for _ in range(n)]
            ys = [rng.randint(0, 10) for _ in range(m)]
            exact = mann_whitney(xs, ys, method="exact").pValue
            approx = mann_whitney(xs, ys, method="approx").pValue
            assert not (exact <= 0.01 and approx > 0.05)
            assert not (approx <= 0.01 and exact > 0.05)
            if n >= 5 and m >= 5:
                worst_5plus = max(worst_5plus, abs(exact - approx))
        assert worst_5plus <= 0.11

    def test_large_sample_uses_normal_approximation(self):
        xs = list(range(20))
        ys = list(range(5, 25))
        result = mann_whitney(xs, ys)
        assert not result.exact
        assert 0.0 < result.pValue <= 1.0

    def test_all_tied_large_sample(self):
        result = mann_whitney([1.0] * 20, [1.0] * 20)
        assert result.pValue == 1.0

    def test_clearly_different_large_samples_significant(self):
        xs = [float(i) for i in range(30)]
        ys = [float(i) + 50 for i in range(30)]
        assert mann_whitney(xs, ys).pValue < 1e-6

    @settings(max_examples=200)
    @given(
        st.lists(st.integers(0, 20), min_size=1, max_size=12),
        st.lists(st.integers(0, 20), min_size=1, max_size=12),
    )
    def test_u_complement_identity(self, xs, ys):
        forward = mann_whitney(xs, ys)
        backward = mann_whitney(ys, xs)
        assert forward.U + backward.U == pytest.approx(len(xs) * len(ys))
        assert forward.pValue == pytest.approx(backward.pValue)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            mann_whitney([1], [2], method="bayes")


class TestVarghaDelaney:
    def test_complete_dominance(self):
        assert vargha_delaney_a12([5, 6, 7], [1, 2, 3]) == 1.0

    def test_symmetric_overlap(self):
        # 4 pairs: one win, one loss, two ties -> 0.5
        assert vargha_delaney_a12([1, 2], [1, 2]) == 0.5

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            vargha_delaney_a12([], [1])

    def test_matches_pairwise_oracle_on_random_samples(self):
        rng = random.Random(29)
        for _ in range(100):
            xs = [rng.randint(0, 9) for _ in range(rng.randint(1, 15))]
            ys = [rng.randint(0, 9) for _ in range(rng.randint(1, 15))]
            assert vargha_delaney_a12(xs, ys) == pytest.approx(pairwise_a12(xs, ys))

    @settings(max_examples=200)
    @given(
        st.lists(st.integers(0, 9), min_size=1, max_size=15),
        st.lists(st.integers(0, 9), min_size=1, max_size=15),
    )
    def test_complement_identity(self, xs, ys):
        assert vargha_delaney_a12(xs, ys) + vargha_delaney_a12(ys, xs) == pytest.approx(1.0)


class TestPearson:
    def test_perfect_positive(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_perfect_negative(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_degenerate_variance_rejected(self):
        with pytest.raises(ValueError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pearson([1, 2], [1, 2, 3])

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            pearson([1], [2])

    def test_bounded(self):
        rng = random.Random(31)
        for _ in range(50):
            xs = [rng.random() for _ in range(10)]
            ys = [rng.random() for _ in range(10)]
            assert -1.0 <= pearson(xs, ys) <= 1.0


class TestCoverage:
    def test_filtered_approach_reference_pair(self):
        report = coverage(77259, 456739)
        assert report.coverageApplied == pytest.approx(14.47, abs=0.01)
        assert report.coverageNotApplied == pytest.approx(85.53, abs=0.01)
        assert report.totalHits == 533998

    def test_baseline_reference_pair(self):
        report = coverage(158134, 895507)
        assert report.coverageApplied == pytest.approx(15.01, abs=0.01)
        assert report.coverageNotApplied == pytest.approx(84.99, abs=0.01)

    def test_all_not_applied(self):
        report = coverage(0, 1234)
        assert report.coverageApplied == 0.0
        assert report.coverageNotApplied == 100.0

    def test_pair_always_sums_to_100(self):
        rng = random.Random(37)
        for _ in range(100):
            report = coverage(rng.randint(0, 1000), rng.randint(1, 1000))
            assert report.coverageApplied + report.coverageNotApplied == pytest.approx(100.0)

    def test_zero_hits_rejected(self):
        with pytest.raises(ValueError):
            coverage(0, 0)


def test_compare_samples_bundles_all_three():
    result = compare_samples([1, 2, 3, 4], [2, 3, 4, 5])
    assert 0.0 <= result.a12 <= 1.0
    assert 0.0 < result.pValue <= 1.0
    assert result.mannWhitneyU >= 0
