import numpy as np
import pytest
from scipy import stats

from seqfair.continuous import (
    ContinuousProblem,
    continuous_reduction,
    grid_search_2d,
    paired_threshold,
    uniform_case1,
    uniform_case2,
)
from seqfair.errors import ValidationError

CASE1 = dict(c0=0.3, b0=0.6, c1=0.4, b1=0.7, prior=[[0.3, 0.2], [0.2, 0.3]])
CASE2 = dict(c0=0.5, b0=0.2, c1=0.6, b1=0.3, prior=[[0.25, 0.2], [0.25, 0.3]])


class TestCase1:
    def test_closed_form(self):
        prob, (t0, t1, acc) = uniform_case1(**CASE1)
        r = continuous_reduction(prob)
        assert r.tau0 == pytest.approx(t0, abs=1e-6)
        assert r.tau1 == pytest.approx(t1, abs=1e-6)
        assert r.accuracy == pytest.approx(acc, abs=1e-6)
        assert r.es_residual <= 1e-6
        assert t1 == pytest.approx(0.7714285714285714)

    def test_uncorrected_pair_breaks_equality(self):
        # t1 = 1 - (p01/p11)(1-c1)/(1-c0) omits the (1-b0) factor
        prob, _ = uniform_case1(**CASE1)
        t1 = 1 - (0.2 / 0.3) * 0.6 / 0.7
        assert prob.es_residual(0.6, t1) > 0.1
        assert prob.accuracy(0.6, t1) < 0.9

    def test_grid_oracle(self):
        prob, (_, _, acc) = uniform_case1(**CASE1)
        assert grid_search_2d(prob, steps=1000)[2] == pytest.approx(acc, abs=1e-3)

    def test_wrong_branch(self):
        with pytest.raises(ValidationError):
            uniform_case1(0.3, 0.6, 0.4, 0.7, [[0.2, 0.3], [0.3, 0.2]])


class TestCase2:
    def test_closed_form(self):
        prob, (_, _, acc) = uniform_case2(**CASE2)
        r = continuous_reduction(prob)
        assert r.accuracy == pytest.approx(acc, abs=1e-6)
        assert r.es_residual <= 1e-6

    def test_optimal_line(self):
        prob, (_, _, acc) = uniform_case2(**CASE2)
        ratio = (0.2 / 0.3) * 0.4 / 0.5
        for t0 in (0.5, 0.6, 0.8):
            t1 = 1 - ratio * (1 - t0)
            assert prob.accuracy(t0, t1) == pytest.approx(acc, abs=1e-12)

    def test_grid_oracle(self):
        prob, (_, _, acc) = uniform_case2(**CASE2)
        assert grid_search_2d(prob, steps=1000)[2] == pytest.approx(acc, abs=1e-3)


class TestGeneral:
    def test_swap_when_group0_has_more_qualified(self):
        prob, _ = uniform_case1(**CASE1)
        direct = continuous_reduction(prob)
        flipped = continuous_reduction(prob.swapped())
        assert (flipped.tau0, flipped.tau1) == pytest.approx((direct.tau1, direct.tau0), abs=1e-4)
        assert flipped.accuracy == pytest.approx(direct.accuracy, abs=1e-9)

    def test_symmetric_groups(self):
        d = (stats.beta(2, 3), stats.beta(3, 2))
        prob = ContinuousProblem((d, d), [[0.25, 0.25], [0.25, 0.25]])
        r = continuous_reduction(prob)
        assert abs(r.tau0 - r.tau1) <= 1e-4
        assert r.es_residual <= 1e-9

    def test_beta_scores_match_grid(self):
        prob = ContinuousProblem(
            ((stats.beta(2, 5), stats.beta(4, 2)), (stats.beta(2, 4), stats.beta(3, 2))),
            [[0.3, 0.15], [0.3, 0.25]],
        )
        r = continuous_reduction(prob)
        assert r.es_residual <= 1e-6
        assert r.accuracy >= grid_search_2d(prob, steps=500, gamma=1e-3)[2] - 5e-3

    def test_not_invertible(self):
        atoms = stats.bernoulli(0.5)  # CDF jumps, so most levels have no preimage
        prob = ContinuousProblem(
            ((stats.uniform(), stats.uniform()), (stats.uniform(), atoms)), [[0.2, 0.3], [0.2, 0.3]]
        )
        with pytest.raises(ValidationError):
            paired_threshold(prob, np.array([0.0, 0.5, 0.9]))

    def test_prior_validation(self):
        u = stats.uniform()
        with pytest.raises(ValidationError):
            ContinuousProblem(((u, u), (u, u)), [[0.5, 0.0], [0.5, 0.0]])
        with pytest.raises(ValidationError):
            ContinuousProblem(((u, u), (u, u)), [[0.5, 0.5], [0.5, 0.5]])
