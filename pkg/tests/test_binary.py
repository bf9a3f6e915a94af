import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from models import pmfs, random_pmf
from oracles import alpha_grid_best
from seqfair.binary import (
    PostProcessPolicy,
    build_lp,
    check_corollary1,
    check_es_condition,
    check_theorem3_condition,
    evaluate_policy,
    fractional_objective,
    solve_es_policy,
)
from seqfair.distributions import BinaryJointPMF
from seqfair.errors import NoSelectionError, PreconditionError, ValidationError
from seqfair.lp import enumerate_vertices

UNIFORM = BinaryJointPMF(np.full((2, 2, 2), 1 / 8))


def pmf_from(cells, fill_cell=(0, 0, 0)):
    p = np.zeros((2, 2, 2))
    for k, v in cells.items():
        p[k] = v
    p[fill_cell] += 1 - p.sum()
    return BinaryJointPMF(p)


class TestESCondition:
    def test_uniform_is_fair(self):
        chk = check_es_condition(UNIFORM)
        assert chk.residual == 0 and chk.fair and not chk.degenerate

    def test_unequal_qualified_acceptance(self):
        pmf = pmf_from({(0, 1, 1): 0.2, (1, 1, 1): 0.1, (0, 0, 1): 0.3})
        chk = check_es_condition(pmf)
        assert chk.residual == pytest.approx(0.1, abs=1e-15)
        assert not chk.fair

    def test_nobody_predicted_qualified(self):
        pmf = pmf_from({(0, 0, 1): 0.5, (1, 0, 0): 0.2})
        chk = check_es_condition(pmf)
        assert chk.residual == 0 and chk.fair and chk.degenerate

    @given(pmfs())
    def test_agrees_with_evaluator(self, pmf):
        # selecting with R directly: disparity = residual / Pr{R=1}
        out = evaluate_policy(pmf, PostProcessPolicy.identity())
        chk = check_es_condition(pmf)
        assert out.disparity * out.p_accept_per_step == pytest.approx(chk.residual, abs=1e-15)

    @given(pmfs())
    def test_exact_es_gives_zero_disparity(self, pmf):
        p = pmf.p.copy()
        p[1, 1, 1] = p[0, 1, 1]
        pmf = BinaryJointPMF(p / p.sum())
        assert check_es_condition(pmf, 1e-12).fair
        assert evaluate_policy(pmf, PostProcessPolicy.identity()).disparity <= 1e-12


class TestEqualOpportunityCheck:
    def test_uniform(self):
        d = check_corollary1(UNIFORM)
        assert d.eo_residual == 0 and d.base_rate_residual == 0 and d.es_holds

    def test_eo_without_equal_base_rates(self):
        # Pr{R=1 | Y=1, A=a} = 0.5 in both groups, base rates 0.3 vs 0.1
        pmf = pmf_from({(0, 1, 1): 0.15, (0, 0, 1): 0.15, (1, 1, 1): 0.05, (1, 0, 1): 0.05, (1, 0, 0): 0.3})
        d = check_corollary1(pmf)
        assert d.eo_holds
        assert d.base_rate_residual == pytest.approx(0.2)
        assert d.es_holds is False

    def test_group_without_qualified_mass(self):
        pmf = pmf_from({(0, 1, 1): 0.4, (1, 1, 0): 0.3})
        d = check_corollary1(pmf)
        assert d.undefined_groups == (1,)
        assert d.eo_residual is None and d.es_holds is None


class TestEvaluatePolicy:
    def test_accept_everyone(self, rng):
        pmf = random_pmf(rng)
        out = evaluate_policy(pmf, PostProcessPolicy(np.ones((2, 2))))
        assert out.accuracy == pytest.approx(pmf.p[:, :, 1].sum(), abs=1e-12)
        assert out.p_e0 == pytest.approx(pmf.p_ay[0, 1], abs=1e-12)
        assert out.expected_steps == pytest.approx(1.0)

    def test_identity_on_uniform(self):
        out = evaluate_policy(UNIFORM, PostProcessPolicy.identity())
        assert out.accuracy == pytest.approx(0.5)
        assert out.p_e0 == pytest.approx(0.25) and out.p_e1 == pytest.approx(0.25)
        assert out.expected_steps == pytest.approx(2.0)

    def test_reject_everyone(self):
        with pytest.raises(NoSelectionError):
            evaluate_policy(UNIFORM, PostProcessPolicy(np.zeros((2, 2))))

    def test_alpha_validated(self):
        with pytest.raises(ValidationError):
            PostProcessPolicy([[0, 1.5], [0, 1]])

    @given(pmfs(), st.lists(st.floats(0, 1), min_size=4, max_size=4), st.floats(0.01, 1))
    def test_degree_zero_homogeneity(self, pmf, alpha, t):
        alpha = np.array(alpha).reshape(2, 2)
        assume(alpha.max() > 0.01)
        a = evaluate_policy(pmf, PostProcessPolicy(alpha)).accuracy
        b = evaluate_policy(pmf, PostProcessPolicy(t * alpha)).accuracy
        assert abs(a - b) <= 1e-12

    @given(pmfs(), st.lists(st.floats(0, 1), min_size=4, max_size=4))
    def test_partition(self, pmf, alpha):
        assume(max(alpha) > 0)
        out = evaluate_policy(pmf, PostProcessPolicy(alpha))
        assert abs(out.p_e0 + out.p_e1 - out.accuracy) <= 1e-12
        assert out.accuracy == pytest.approx(fractional_objective(pmf, alpha), abs=1e-12)

    def test_policy_json(self):
        pol = PostProcessPolicy([[0.1, 0.2], [0.3, 0.4]])
        d = pol.to_dict()
        assert d == {"alpha": {"a0_r0": 0.1, "a0_r1": 0.2, "a1_r0": 0.3, "a1_r1": 0.4}}
        assert np.array_equal(PostProcessPolicy.from_dict(d).alpha, pol.alpha)


class TestSolve:
    def test_uniform(self):
        sol = solve_es_policy(UNIFORM)
        assert sol.outcome.accuracy == pytest.approx(0.5)
        assert sol.outcome.disparity <= 1e-9

    def test_zero_cell_precondition(self):
        pmf = pmf_from({(1, 0, 0): 0.0, (1, 0, 1): 0.0, (0, 1, 1): 0.5, (1, 1, 1): 0.3})
        with pytest.raises(PreconditionError, match="P_\\{A,R\\}"):
            solve_es_policy(pmf)

    def test_unknown_target(self):
        with pytest.raises(ValidationError):
            solve_es_policy(UNIFORM, "eo")

    def test_demographic_target(self, rng):
        for _ in range(50):
            sol = solve_es_policy(random_pmf(rng, 0.01), "es_demographic")
            assert abs(sol.outcome.p_select0 - sol.outcome.p_select1) <= 1e-9

    def test_unconstrained_dominates(self, rng):
        for _ in range(50):
            pmf = random_pmf(rng, 0.01)
            assert solve_es_policy(pmf, "none").outcome.accuracy >= solve_es_policy(pmf).outcome.accuracy - 1e-12

    def test_matches_vertex_oracle_and_grid(self, rng):
        for _ in range(40):
            pmf = random_pmf(rng, 0.01)
            sol = solve_es_policy(pmf)
            lp = build_lp(pmf)
            best = max(o for _, o in enumerate_vertices(lp)) / pmf.p_ar.min()
            assert sol.outcome.accuracy == pytest.approx(best, abs=1e-9)
            assert sol.outcome.accuracy >= alpha_grid_best(pmf) - 0.02

    @given(pmfs())
    def test_always_fair(self, pmf):
        assert solve_es_policy(pmf).outcome.disparity <= 1e-9

    @given(pmfs(), st.floats(0.05, 1))
    def test_scaled_policy_same_objective(self, pmf, t):
        alpha = solve_es_policy(pmf).policy.alpha
        assert fractional_objective(pmf, t * alpha) == pytest.approx(fractional_objective(pmf, alpha), abs=1e-12)


class TestIndependenceCheck:
    def test_uniform(self):
        d = check_theorem3_condition(UNIFORM)
        assert d.independence_residual == 0 and d.model_accuracy == 0.5 and d.holds

    def test_product_form(self):
        # given R=1, A and Y independent: Pr{A=0|R=1}=0.3, Pr{Y=1|R=1}=0.6, Pr{R=1}=0.5
        cells = {(a, 1, y): 0.5 * (0.3 if a == 0 else 0.7) * (0.6 if y else 0.4) for a in (0, 1) for y in (0, 1)}
        cells[(0, 0, 0)] = 0.2
        cells[(1, 0, 1)] = 0.3
        d = check_theorem3_condition(pmf_from(cells, (1, 0, 0)))
        assert d.independence_residual == pytest.approx(0, abs=1e-15)
        assert d.model_accuracy == pytest.approx(0.6)

    def test_group0_only_qualified(self):
        pmf = pmf_from({(0, 1, 1): 0.3, (1, 1, 0): 0.2, (0, 0, 0): 0.5})
        d = check_theorem3_condition(pmf)
        assert d.independence_residual == pytest.approx(0.2 / 0.5)
        assert not d.holds

    def test_undefined(self):
        d = check_theorem3_condition(pmf_from({(0, 0, 1): 0.5}))
        assert d.independence_residual is None and d.holds is None
