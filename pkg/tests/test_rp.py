"""Unit tests for the revealed-preference engine."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pareto_forge.core import ConstraintFunction, EmpiricalStrategy, Family, RPDataset
from pareto_forge.rp import (
    PreferenceProfile,
    afriat_feasible,
    ccei_scalar,
    empirical_pareto_gap,
    garp_f,
    garp_f_threshold,
    hoeffding_confidence,
    mm_garp,
    pareto_gap,
    rank_optimality_check,
    reconstruct_utility,
)
from pareto_forge.synthetic import consistent_dataset, violating_dataset


def _affine(alpha, b):
    alpha = tuple(float(a) for a in np.atleast_1d(alpha))
    return ConstraintFunction(Family.AFFINE, len(alpha), alpha=alpha, b=float(b))


def _reversal_dataset():
    """Two-period, one-agent budget reversal with hand-computable quantities.

    gbar = [[0, -0.5], [-0.5, 0]]; the relaxed system needs r = 0.5 exactly.
    """
    cons = (
        (_affine([2.0, 1.0], 1.0),),
        (_affine([1.0, 2.0], 1.0),),
    )
    strats = (
        (EmpiricalStrategy(np.array([[0.5, 0.0]])),),
        (EmpiricalStrategy(np.array([[0.0, 0.5]])),),
    )
    return RPDataset(cons, strats)


class TestMmGarp:
    def test_consistent_play_passes(self):
        d = consistent_dataset(T=4, M=2, k=2, seed=0)
        assert mm_garp(d)
        assert mm_garp(d, printed_form=True)

    def test_reversal_detected(self):
        d = _reversal_dataset()
        assert not mm_garp(d)
        assert not mm_garp(d, printed_form=True)

    def test_single_period_trivially_consistent(self):
        cons = ((_affine([1.0], 1.0),),)
        strats = ((EmpiricalStrategy(np.array([[1.0]])),),)
        assert mm_garp(RPDataset(cons, strats))

    def test_three_cycle_detected_through_closure(self):
        # pairwise order is acyclic only through the transitive closure
        cons = (
            (_affine([4.0, 1.0, 1.0], 2.0),),
            (_affine([1.0, 4.0, 1.0], 2.0),),
            (_affine([1.0, 1.0, 4.0], 2.0),),
        )
        x = 2.0 / 4.8  # each strategy spends most of its budget on its own good
        strats = tuple(
            (EmpiricalStrategy(np.eye(3)[t][None, :] * x),) for t in range(3)
        )
        d = RPDataset(cons, strats)
        assert not mm_garp(d)


class TestParetoGap:
    def test_consistent_dataset_zero_gap(self):
        d = consistent_dataset(T=4, M=2, k=2, seed=1)
        res = pareto_gap(d)
        assert res.gap <= 1e-5
        assert res.certificate.validates(d, tol=1e-5)

    def test_reversal_gap_hand_value(self):
        res = pareto_gap(_reversal_dataset())
        assert res.gap == pytest.approx(0.5, abs=2e-5)
        assert res.per_agent_gaps == (res.gap,)

    def test_certificate_validates_at_gap(self):
        d = violating_dataset(T=3, M=2, k=2, seed=5)
        res = pareto_gap(d)
        assert res.gap > 1e-4
        assert res.certificate.max_violation(d) <= res.gap * 1e-3 + 1e-6
        assert np.all(res.certificate.lam >= res.certificate.alpha - 1e-12)

    def test_alpha_halving_leaves_gap_unchanged(self):
        d = violating_dataset(T=3, M=1, k=2, seed=7)
        g1 = pareto_gap(d, alpha=1e-3).gap
        g2 = pareto_gap(d, alpha=5e-4).gap
        assert g1 == pytest.approx(g2, abs=2e-5)

    def test_budget_scaling_scales_gap(self):
        d = _reversal_dataset()
        c = 3.0
        cons = tuple(
            tuple(_affine(np.array(f.alpha) * c, f.b * c) for f in row)
            for row in d.constraints
        )
        scaled = RPDataset(cons, d.strategies)
        assert pareto_gap(scaled).gap == pytest.approx(c * pareto_gap(d).gap, abs=5e-5)

    def test_afriat_feasible_monotone_in_r(self):
        d = _reversal_dataset()
        ok_low, _ = afriat_feasible(d, 0.25)
        ok_high, cert = afriat_feasible(d, 0.75)
        assert not ok_low
        assert ok_high
        assert cert.validates(d, tol=1e-6)

    def test_invalid_arguments_raise(self):
        d = _reversal_dataset()
        with pytest.raises(ValueError):
            afriat_feasible(d, -0.1)
        with pytest.raises(ValueError):
            pareto_gap(d, alpha=0.0)
        with pytest.raises(ValueError):
            pareto_gap(d, tol_r=0.0)

    def test_empirical_gap_matches_gap_on_point_masses(self):
        d = violating_dataset(T=3, M=2, k=2, seed=3)
        assert empirical_pareto_gap(d).gap == pytest.approx(pareto_gap(d).gap)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_verdicts_agree_with_combinatorial_test(self, seed):
        rng = np.random.default_rng(seed)
        T = int(rng.integers(2, 5))
        M = int(rng.integers(1, 3))
        maker = consistent_dataset if seed % 2 == 0 else violating_dataset
        d = maker(T=T, M=M, k=2, seed=seed)
        assert mm_garp(d) == (pareto_gap(d).gap <= 1e-5)


class TestGarpF:
    def test_threshold_equals_gap_on_reversal(self):
        d = _reversal_dataset()
        assert garp_f_threshold(d) == pytest.approx(0.5, abs=2e-4)

    def test_zero_threshold_on_consistent_data(self):
        d = consistent_dataset(T=4, M=2, k=2, seed=2)
        assert garp_f_threshold(d) == 0.0

    def test_monotone_in_f(self):
        d = _reversal_dataset()
        thr = garp_f_threshold(d)
        assert not garp_f(d, max(thr - 0.05, 0.0))
        assert garp_f(d, thr + 0.05)
        assert garp_f(d, 10.0)

    def test_negative_f_rejected(self):
        with pytest.raises(ValueError):
            garp_f(_reversal_dataset(), -0.1)


class TestCcei:
    def test_consistent_agent_has_full_efficiency(self):
        d = consistent_dataset(T=4, M=2, k=2, seed=4)
        for i in range(d.M):
            assert ccei_scalar(d, i) == 1.0

    def test_reversal_efficiency_hand_value(self):
        # satiated budgets: diag 1.0, cross 0.5, so the cycle needs e > 0.5
        assert ccei_scalar(_reversal_dataset(), 0) == pytest.approx(0.5, abs=2e-4)

    def test_only_violating_agent_penalized(self):
        d = violating_dataset(T=3, M=2, k=2, seed=6)
        assert ccei_scalar(d, 0) < 1.0
        assert ccei_scalar(d, 1) == 1.0

    def test_invalid_tolerance_rejected(self):
        with pytest.raises(ValueError):
            ccei_scalar(_reversal_dataset(), 0, tol_e=0.0)


class TestHoeffdingConfidence:
    def test_bounds_and_zero_at_eps_zero(self):
        assert hoeffding_confidence(0.0, 10, 3, 2, 1.0) == 0.0
        v = hoeffding_confidence(0.3, 50, 3, 2, 1.0)
        assert 0.0 <= v <= 1.0

    def test_nondecreasing_in_n(self):
        vals = [hoeffding_confidence(0.2, n, 4, 2, 1.0) for n in (10, 100, 1000, 10_000)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_nondecreasing_in_eps(self):
        vals = [hoeffding_confidence(e, 200, 4, 2, 1.0) for e in (0.05, 0.1, 0.2, 0.5)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_uniform_in_offset(self):
        assert hoeffding_confidence(0.2, 100, 3, 2, 1.0, c=0.0) == hoeffding_confidence(
            0.2, 100, 3, 2, 1.0, c=5.0
        )

    def test_invalid_arguments_raise(self):
        with pytest.raises(ValueError):
            hoeffding_confidence(-0.1, 10, 2, 1, 1.0)
        with pytest.raises(ValueError):
            hoeffding_confidence(0.1, 0, 2, 1, 1.0)
        with pytest.raises(ValueError):
            hoeffding_confidence(0.1, 10, 2, 1, 0.0)


class TestReconstructUtility:
    def test_observed_strategy_maximizes_on_own_budget(self):
        d = consistent_dataset(T=3, M=1, k=2, seed=8)
        res = pareto_gap(d)
        util = reconstruct_utility(res.certificate, d, agent=0, tol=1e-5)
        rng = np.random.default_rng(0)
        for t in range(d.T):
            f = d.constraints[t][0]
            x_obs = d.strategies[t][0].mean
            u_obs = util(x_obs)
            for _ in range(50):
                cand = rng.uniform(0.0, 2.0, size=2)
                if f(cand) <= 0:
                    assert util(cand) <= u_obs + 1e-6

    def test_utility_beats_origin_at_observed_points(self):
        d = consistent_dataset(T=3, M=2, k=2, seed=9)
        res = pareto_gap(d)
        for i in range(d.M):
            util = reconstruct_utility(res.certificate, d, i, tol=1e-5)
            for t in range(d.T):
                assert util(d.strategies[t][i].mean) >= util(np.zeros(2)) - 1e-9

    def test_invalid_certificate_rejected(self):
        d = consistent_dataset(T=3, M=1, k=2, seed=10)
        from pareto_forge.core import ParetoCertificate

        bad = ParetoCertificate(
            np.arange(3.0).reshape(3, 1) * 100.0, np.ones((3, 1)), 0.0, 1e-3
        )
        with pytest.raises(ValueError):
            reconstruct_utility(bad, d, 0)

    def test_agent_index_checked(self):
        d = consistent_dataset(T=2, M=1, k=2, seed=11)
        res = pareto_gap(d)
        with pytest.raises(IndexError):
            reconstruct_utility(res.certificate, d, 1)


class TestRankOptimality:
    def test_unanimous_top_choice_passes(self):
        p = PreferenceProfile(rankings=((0, 1), (0, 1)), levels=(1.0, 0.0))
        assert rank_optimality_check(p, [1.0, 0.0])

    def test_unanimous_bottom_choice_fails(self):
        p = PreferenceProfile(rankings=((0, 1), (0, 1)), levels=(1.0, 0.0))
        assert not rank_optimality_check(p, [0.0, 1.0])

    def test_rnk_hand_values(self):
        p = PreferenceProfile(rankings=((0, 1, 2), (1, 0, 2)), levels=(2.0, 1.0, 0.0))
        rnk = p.rnk()
        # top-1 counts: outcome 0 is first for one agent, outcome 1 for the other
        assert list(rnk[0]) == [1, 1, 0]
        # top-2 counts: both agents hold outcomes 0 and 1 in their top two
        assert list(rnk[1]) == [2, 2, 0]
        assert list(rnk[2]) == [2, 2, 2]

    def test_social_utilities_hand_value(self):
        p = PreferenceProfile(rankings=((0, 1), (1, 0)), levels=(3.0, 1.0))
        assert np.allclose(p.social_utilities(), [4.0, 4.0])

    def test_invalid_profile_rejected(self):
        with pytest.raises(ValueError):
            PreferenceProfile(rankings=((0, 0),), levels=(1.0, 0.0))
        with pytest.raises(ValueError):
            PreferenceProfile(rankings=((0, 1),), levels=(0.0, 1.0))

    def test_invalid_strategy_rejected(self):
        p = PreferenceProfile(rankings=((0, 1),), levels=(1.0, 0.0))
        with pytest.raises(ValueError):
            rank_optimality_check(p, [0.7, 0.7])
        with pytest.raises(ValueError):
            rank_optimality_check(p, [1.5, -0.5])
