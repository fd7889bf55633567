import numpy as np
import pytest

from mofilter.errors import FeasiblePointRejected
from mofilter.filter import FilterSet


class TestAcceptable:
    def test_empty(self):
        assert FilterSet().acceptable(123.0, -7.0)

    def test_rejected_by_entry(self):
        f = FilterSet(entries=[(1.0, 5.0)])
        assert not f.acceptable(2.0, 10.0)

    def test_first_disjunct(self):
        f = FilterSet(entries=[(1.0, 5.0)])
        assert f.acceptable(0.5, 10.0)

    def test_second_disjunct(self):
        f = FilterSet(entries=[(1.0, 5.0)])
        assert f.acceptable(3.0, 4.99989)
        assert not f.acceptable(3.0, 4.99995)

    def test_negative_theta(self):
        with pytest.raises(ValueError):
            FilterSet().acceptable(-1.0, 0.0)


class TestAugmented:
    def test_self_comparison_fails(self):
        assert not FilterSet().augmented_acceptable(1.0, 5.0, 1.0, 5.0)

    def test_less_infeasible(self):
        assert FilterSet().augmented_acceptable(1.0, 5.0, 0.5, 5.0)

    def test_feasible_and_better(self):
        f = FilterSet(entries=[(0.3, 2.0), (2.0, -1.0)])
        assert f.augmented_acceptable(1.0, 5.0, 0.0, -2.0)

    def test_does_not_mutate(self):
        f = FilterSet(entries=[(0.3, 2.0)])
        f.augmented_acceptable(1.0, 5.0, 0.5, 5.0)
        assert f.entries == [(0.3, 2.0)]


class TestAdd:
    def test_removes_dominated(self):
        f = FilterSet(entries=[(1.0, 5.0)]).add(0.5, 4.0)
        assert f.entries == [(0.5, 4.0)]

    def test_keeps_both(self):
        f = FilterSet(entries=[(1.0, 5.0)]).add(2.0, 1.0)
        assert f.entries == [(1.0, 5.0), (2.0, 1.0)]

    def test_added_pair_unacceptable(self):
        f = FilterSet().add(0.7, 3.0)
        assert not f.acceptable(0.7, 3.0)

    def test_idempotent(self):
        f = FilterSet().add(0.7, 3.0).add(0.7, 3.0)
        assert len(f) == 1

    def test_covered_pair_not_inserted(self):
        f = FilterSet(entries=[(1.0, 5.0)]).add(2.0, 10.0)
        assert f.entries == [(1.0, 5.0)]
        assert not f.acceptable(2.0, 10.0)

    def test_feasible_rejected(self):
        with pytest.raises(FeasiblePointRejected):
            FilterSet().add(0.0, 1.0)

    def test_gamma_range(self):
        with pytest.raises(ValueError):
            FilterSet(gamma_theta=1.5)

    def test_random_sequences(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            f = FilterSet()
            pts = [(float(rng.random() * 2), float(rng.standard_normal())) for _ in range(8)]
            for theta, phi in rng.random((12, 2)) * [2.0, 4.0] - [0.0, 2.0]:
                theta = float(theta) + 1e-9
                before = [f.acceptable(t, p) for t, p in pts]
                f.add(theta, float(phi))
                assert f.violations() == []
                assert not f.acceptable(theta, float(phi))
                after = [f.acceptable(t, p) for t, p in pts]
                assert not any(a and not b for a, b in zip(after, before))
                assert all(t > 0 for t, _ in f)
