import math

import numpy as np
import pytest

from fraudkit.resample import (
    NearMiss,
    RandomUnderSampler,
    SamplerConfig,
    Smote,
    round_half_away,
)

from conftest import random_imbalanced


def nearmiss_v1_oracle(X, y, k, target):
    """Exhaustive mean-of-k-nearest-minority ranking; ties by lower index."""
    pos = [i for i in range(len(y)) if y[i] == 1]
    neg = [i for i in range(len(y)) if y[i] == 0]
    scored = []
    for i in neg:
        dists = sorted(math.dist(X[i], X[j]) for j in pos)
        scored.append((sum(dists[:k]) / k, i))
    scored.sort()
    return sorted(i for _, i in scored[:target])


class TestRoundHalfAway:
    def test_half_up(self):
        assert round_half_away(2.5) == 3
        assert round_half_away(3.5) == 4
        assert round_half_away(-2.5) == -3
        assert round_half_away(2.4) == 2


class TestRus:
    def test_count_arithmetic(self):
        rng = np.random.default_rng(0)
        X, y = random_imbalanced(rng, n_pos=50, n_neg=1000, n_features=3)
        Xr, yr = RandomUnderSampler(ratio=4.0, seed=1).fit_resample(X, y)
        assert int((yr == 0).sum()) == 200
        assert int((yr == 1).sum()) == 50

    def test_balanced_identity_counts(self):
        rng = np.random.default_rng(1)
        X, y = random_imbalanced(rng, n_pos=30, n_neg=30, n_features=2)
        Xr, yr = RandomUnderSampler(ratio=1.0, seed=0).fit_resample(X, y)
        assert int((yr == 0).sum()) == int((yr == 1).sum()) == 30

    def test_minority_preserved_bit_exactly(self):
        rng = np.random.default_rng(2)
        X, y = random_imbalanced(rng, n_pos=20, n_neg=100, n_features=4)
        Xr, yr = RandomUnderSampler(ratio=2.0, seed=3).fit_resample(X, y)
        original = {X[i].tobytes() for i in range(len(y)) if y[i] == 1}
        kept = {Xr[i].tobytes() for i in range(len(yr)) if yr[i] == 1}
        assert kept == original

    def test_ratio_exceeds_available(self):
        rng = np.random.default_rng(3)
        X, y = random_imbalanced(rng, n_pos=50, n_neg=100, n_features=2)
        with pytest.raises(ValueError):
            RandomUnderSampler(ratio=3.0).fit_resample(X, y)

    def test_deterministic_and_count_sweep(self):
        rng = np.random.default_rng(4)
        X, y = random_imbalanced(rng, n_pos=40, n_neg=400, n_features=3)
        for case in range(25):
            ratio = 1.0 + (case % 9)
            sampler = RandomUnderSampler(ratio=ratio, seed=case)
            Xr, yr = sampler.fit_resample(X, y)
            Xr2, yr2 = sampler.fit_resample(X, y)
            assert np.array_equal(Xr, Xr2) and np.array_equal(yr, yr2)
            assert int((yr == 0).sum()) == round_half_away(ratio * 40)


class TestNearMiss:
    def test_v1_keeps_closest(self):
        # minority at the origin; majority at distances 1, 2, 3
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([1, 0, 0, 0])
        Xr, yr = NearMiss(version=1, k=1, ratio=1.0).fit_resample(X, y)
        assert sorted(Xr[:, 0].tolist()) == [0.0, 1.0]

    def test_v1_matches_oracle_six_rows(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(6, 2))
        y = np.array([1, 1, 1, 0, 0, 0])
        Xr, yr = NearMiss(version=1, k=3, ratio=2 / 3).fit_resample(X, y)
        expected = nearmiss_v1_oracle(X, y, k=3, target=2)
        kept = {Xr[i].tobytes() for i in range(len(yr)) if yr[i] == 0}
        assert kept == {X[i].tobytes() for i in expected}

    def test_v1_oracle_sweep_with_ties(self):
        for case in range(100):
            rng = np.random.default_rng(1000 + case)
            n_pos = int(rng.integers(3, 7))
            n_neg = int(rng.integers(3, 13))
            if case % 3 == 0:
                # integer grid coordinates force exact distance ties
                X = rng.integers(0, 3, size=(n_pos + n_neg, 2)).astype(float)
            else:
                X = rng.normal(size=(n_pos + n_neg, 2))
            y = np.array([1] * n_pos + [0] * n_neg)
            target = int(rng.integers(1, n_neg + 1))
            ratio = target / n_pos
            if round_half_away(ratio * n_pos) != target:
                continue
            Xr, yr = NearMiss(version=1, k=3, ratio=ratio).fit_resample(X, y)
            kept = sorted(Xr[i].tobytes() for i in range(len(yr)) if yr[i] == 0)
            expected = nearmiss_v1_oracle(X, y, k=3, target=target)
            assert kept == sorted(X[i].tobytes() for i in expected), f"case {case}"

    def test_full_target_is_noop(self):
        rng = np.random.default_rng(6)
        X, y = random_imbalanced(rng, n_pos=5, n_neg=10, n_features=2)
        Xr, yr = NearMiss(version=1, k=3, ratio=2.0).fit_resample(X, y)
        assert sorted(map(bytes, (r.tobytes() for r in Xr))) == sorted(
            map(bytes, (r.tobytes() for r in X))
        )

    @pytest.mark.parametrize("version", [1, 2, 3])
    def test_all_versions_complete(self, version):
        rng = np.random.default_rng(7)
        X, y = random_imbalanced(rng, n_pos=20, n_neg=200, n_features=4)
        Xr, yr = NearMiss(version=version, k=3, ratio=1.0).fit_resample(X, y)
        assert int((yr == 0).sum()) == 20
        assert int((yr == 1).sum()) == 20

    def test_insufficient_minority(self):
        rng = np.random.default_rng(8)
        X, y = random_imbalanced(rng, n_pos=2, n_neg=10, n_features=2)
        with pytest.raises(ValueError):
            NearMiss(version=1, k=3, ratio=1.0).fit_resample(X, y)

    def test_v2_uses_farthest(self):
        # one far minority outlier flips the v2 ranking away from v1's
        X = np.array([[0.0], [100.0], [1.0], [60.0]])
        y = np.array([1, 1, 0, 0])
        Xr1, yr1 = NearMiss(version=1, k=2, ratio=0.5).fit_resample(X, y)
        Xr2, yr2 = NearMiss(version=2, k=2, ratio=0.5).fit_resample(X, y)
        kept1 = [Xr1[i, 0] for i in range(len(yr1)) if yr1[i] == 0]
        kept2 = [Xr2[i, 0] for i in range(len(yr2)) if yr2[i] == 0]
        assert kept1 == kept2  # k=2 covers both minority rows: same mean
        Xr1, yr1 = NearMiss(version=1, k=1, ratio=0.5).fit_resample(X, y)
        Xr2, yr2 = NearMiss(version=2, k=1, ratio=0.5).fit_resample(X, y)
        kept1 = [Xr1[i, 0] for i in range(len(yr1)) if yr1[i] == 0]
        kept2 = [Xr2[i, 0] for i in range(len(yr2)) if yr2[i] == 0]
        assert kept1 == [1.0]  # nearest to origin
        assert kept2 == [60.0]  # smallest distance to the farthest minority


class TestSmote:
    def test_segment_between_two_points(self):
        # with two minority rows and k=1 every synthetic point lies on
        # the segment from (0,0) to (2,2), i.e. equals (2t, 2t)
        X = np.array([[0.0, 0.0], [2.0, 2.0], [9.0, 9.0]])
        y = np.array([1, 1, 0])
        sampler = Smote(ratio=3.0, k=1, seed=0)
        Xr, yr = sampler.fit_resample(X, y)
        syn = Xr[3]
        assert syn[0] == pytest.approx(syn[1], abs=1e-12)
        assert 0.0 <= syn[0] <= 2.0
        prov = sampler.provenance_[0]
        expected = X[prov.parent] + prov.lam * (X[prov.neighbor] - X[prov.parent])
        assert np.allclose(syn, expected, atol=1e-12)

    def test_count_arithmetic(self):
        rng = np.random.default_rng(9)
        X, y = random_imbalanced(rng, n_pos=50, n_neg=1000, n_features=3)
        Xr, yr = Smote(ratio=0.5, k=5, seed=1).fit_resample(X, y)
        assert int((yr == 1).sum()) == 500
        assert int((yr == 0).sum()) == 1000
        assert len(yr) == 1500

    def test_originals_preserved_and_segments(self):
        rng = np.random.default_rng(10)
        X, y = random_imbalanced(rng, n_pos=20, n_neg=60, n_features=4)
        sampler = Smote(ratio=1.0, k=3, seed=2)
        Xr, yr = sampler.fit_resample(X, y)
        assert np.array_equal(Xr[: len(y)], X)
        for s, prov in enumerate(sampler.provenance_):
            point = Xr[len(y) + s]
            parent, nn = X[prov.parent], X[prov.neighbor]
            assert 0.0 <= prov.lam <= 1.0
            assert np.allclose(point, parent + prov.lam * (nn - parent), atol=1e-12)
            # convex-hull bound per coordinate
            assert np.all(point >= np.minimum(parent, nn) - 1e-12)
            assert np.all(point <= np.maximum(parent, nn) + 1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(11)
        X, y = random_imbalanced(rng, n_pos=10, n_neg=40, n_features=2)
        a = Smote(ratio=1.0, k=3, seed=5).fit_resample(X, y)
        b = Smote(ratio=1.0, k=3, seed=5).fit_resample(X, y)
        assert np.array_equal(a[0], b[0])

    def test_k_too_large(self):
        rng = np.random.default_rng(12)
        X, y = random_imbalanced(rng, n_pos=4, n_neg=10, n_features=2)
        with pytest.raises(ValueError):
            Smote(ratio=1.0, k=4).fit_resample(X, y)

    def test_ratio_below_current(self):
        rng = np.random.default_rng(13)
        X, y = random_imbalanced(rng, n_pos=50, n_neg=60, n_features=2)
        with pytest.raises(ValueError):
            Smote(ratio=0.1, k=3).fit_resample(X, y)

    def test_provenance_csv(self, tmp_path):
        rng = np.random.default_rng(14)
        X, y = random_imbalanced(rng, n_pos=5, n_neg=20, n_features=2)
        sampler = Smote(ratio=1.0, k=2, seed=0)
        sampler.fit_resample(X, y)
        path = tmp_path / "prov.csv"
        sampler.write_provenance(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "parent,neighbor,lambda"
        assert len(lines) == 1 + len(sampler.provenance_)


class TestSamplerConfig:
    def test_builds_each_method(self):
        assert SamplerConfig("none").build() is None
        assert isinstance(SamplerConfig("rus").build(), RandomUnderSampler)
        nm = SamplerConfig("nearmiss", nearmiss_version=2).build()
        assert isinstance(nm, NearMiss) and nm.version == 2 and nm.k == 3
        sm = SamplerConfig("smote").build()
        assert isinstance(sm, Smote) and sm.k == 5

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            SamplerConfig("oversample").build()
