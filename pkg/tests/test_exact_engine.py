"""
Tests for the exact dynamic-programming engine and the enumeration oracles
"""

import logging
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from scipy import stats

from core_engine.error_handling import CapTooSmall, InvalidGrid, TooLarge
from core_engine.exact_engine import (
    AUTO,
    brute_force_distribution,
    brute_force_return,
    brute_force_vertical,
    expected_horizontal_steps,
    green_function,
    green_value,
    joint_evolve,
    resolve_level_cap,
    return_prob_exact,
    return_prob_sequence,
    return_prob_split,
    ssrw_return,
    ssrw_return_table,
    vertical_evolve,
)
from core_engine.profiles import StepProfile


def planar_return(two_n: int) -> float:
    """Return probability of the simple walk on Z^2"""
    n = two_n // 2
    return (math.comb(two_n, n) / 4 ** n) ** 2


@pytest.mark.unit
class TestLevelCap:
    """Test level-cap resolution"""

    def test_auto_small_n(self):
        """Test AUTO never exceeds n and is at least 1"""
        assert resolve_level_cap(0) == 1
        assert resolve_level_cap(1) == 1
        assert resolve_level_cap(2) == 2
        assert resolve_level_cap(40, AUTO) == 40

    def test_auto_formula(self):
        """Test AUTO gives ceil(c sqrt(n ln n)) once that is below n"""
        n = 1000
        assert resolve_level_cap(n, "auto") == math.ceil(4.0 * math.sqrt(n * math.log(n)))

    def test_auto_uses_cap_constant(self, configure):
        """Test WALK_CAP_CONSTANT scales the automatic cap"""
        configure(WALK_CAP_CONSTANT="2.0")
        assert resolve_level_cap(1000) == math.ceil(2.0 * math.sqrt(1000 * math.log(1000)))

    def test_explicit(self):
        """Test an explicit cap passes through"""
        assert resolve_level_cap(100, 7) == 7
        assert resolve_level_cap(100, "12") == 12

    def test_rejects_zero(self):
        """Test caps below 1 are rejected"""
        with pytest.raises(InvalidGrid):
            resolve_level_cap(10, 0)


@pytest.mark.unit
class TestVerticalEvolve:
    """Test the vertical chain sweep"""

    def test_two_steps_uniform(self, uniform_quarter):
        """Test the law of C2(2) for p = 1/4"""
        sweep = vertical_evolve(uniform_quarter, 2)
        assert sweep.pmf.as_dict() == pytest.approx({-2: 1 / 16, -1: 0.25, 0: 0.375, 1: 0.25, 2: 1 / 16})
        assert sweep.pmf.at(0) == pytest.approx(3 / 8)
        assert sweep.pmf.at(5) == 0.0
        assert sweep.origin.tolist() == pytest.approx([1.0, 0.5, 0.375])
        assert sweep.pmf.trunc_loss == 0.0

    def test_zero_steps(self, periodic_two):
        """Test n = 0 is a point mass at level 0"""
        sweep = vertical_evolve(periodic_two, 0)
        assert sweep.pmf.as_dict() == {0: 1.0}
        assert sweep.horizontal_rate.size == 0

    def test_mass_conservation(self, configure, periodic_three):
        """Test retained mass plus loss equals 1 without renormalisation"""
        configure(WALK_MAX_TRUNC_LOSS="0.99")
        sweep = vertical_evolve(periodic_three, 300, level_cap=20)
        assert sweep.pmf.trunc_loss > 0.0
        assert sweep.pmf.total() + sweep.pmf.trunc_loss == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(sweep.loss) >= 0)

    def test_mass_drift_within_budget(self, periodic_three):
        """Test the recorded drift stays inside n times the per-step tolerance"""
        sweep = vertical_evolve(periodic_three, 400)
        assert 0.0 <= sweep.mass_drift <= 400 * 1e-12

    def test_mass_drift_warning(self, monkeypatch, caplog, periodic_three):
        """Test drift past the allowance is logged as a warning"""
        from config import get_settings
        from core_engine import exact_engine

        monkeypatch.setattr(get_settings().exact, "mass_tolerance", -1.0)
        monkeypatch.setattr(exact_engine.logger, "propagate", True)
        with caplog.at_level(logging.WARNING, logger=exact_engine.logger.name):
            vertical_evolve(periodic_three, 20)
        assert any("mass drift" in r.getMessage() for r in caplog.records)

    def test_matches_enumeration(self, periodic_three, half_comb, comb):
        """Test agreement with the vertical enumeration oracle"""
        for profile in (periodic_three, half_comb, comb):
            for n in range(0, 11):
                exact = brute_force_vertical(profile, n)
                pmf = vertical_evolve(profile, n).pmf
                for level, prob in exact.items():
                    assert pmf.at(level) == pytest.approx(prob, abs=1e-12)

    def test_snapshots(self, uniform_quarter):
        """Test snapshots equal separate sweeps"""
        sweep = vertical_evolve(uniform_quarter, 30, snapshots=[10, 20])
        assert set(sweep.snapshots) == {10, 20}
        direct = vertical_evolve(uniform_quarter, 10, level_cap=sweep.pmf.level_cap)
        assert np.allclose(sweep.snapshots[10].mass, direct.pmf.mass, atol=1e-15)

    def test_cap_too_small(self, uniform_quarter):
        """Test a cap that loses too much mass raises with the cap in the hint"""
        with pytest.raises(CapTooSmall) as exc_info:
            vertical_evolve(uniform_quarter, 50, level_cap=1)
        error = exc_info.value
        assert error.level_cap == 1
        assert error.trunc_loss > 1e-9
        assert "--level-cap 2" in str(error)

    def test_negative_steps(self, uniform_quarter):
        """Test negative step counts are rejected"""
        with pytest.raises(InvalidGrid):
            vertical_evolve(uniform_quarter, -1)

    def test_expected_horizontal_steps(self, uniform_quarter, comb):
        """Test E[H_n] = n/2 for p = 1/4 and E[H_1] = 1/2 on the comb"""
        assert expected_horizontal_steps(uniform_quarter, 2) == pytest.approx(1.0)
        assert expected_horizontal_steps(uniform_quarter, 100) == pytest.approx(50.0, abs=1e-9)
        assert expected_horizontal_steps(comb, 1) == pytest.approx(0.5)
        assert expected_horizontal_steps(comb, 0) == 0.0


@pytest.mark.unit
class TestSimpleWalkReturn:
    """Test the one-dimensional return probability"""

    def test_small_values(self):
        """Test C(h, h/2) 2^-h for small h"""
        assert ssrw_return(0) == 1.0
        assert ssrw_return(1) == 0.0
        assert ssrw_return(2) == pytest.approx(0.5, rel=1e-12)
        assert ssrw_return(4) == pytest.approx(0.375, rel=1e-12)

    def test_large_h_accuracy(self):
        """Test relative accuracy against exact integer arithmetic"""
        for h in (100, 1000, 5000):
            exact = math.comb(h, h // 2) / 2 ** h
            assert ssrw_return(h) == pytest.approx(exact, rel=1e-10)

    def test_table_matches_scalar(self):
        """Test the vectorised table against the scalar form"""
        table = ssrw_return_table(41)
        assert table.size == 42
        for h in range(42):
            assert table[h] == pytest.approx(ssrw_return(h), rel=1e-12, abs=0.0)

    def test_negative(self):
        """Test negative step counts are rejected"""
        with pytest.raises(InvalidGrid):
            ssrw_return(-2)


@pytest.mark.unit
class TestJointEvolve:
    """Test the (level, horizontal count) sweep"""

    def test_shape_and_total(self, periodic_two):
        """Test array layout and mass"""
        joint = joint_evolve(periodic_two, 12)
        assert joint.mass.shape == (2 * joint.level_cap + 1, 13)
        assert joint.mass.sum() + joint.trunc_loss == pytest.approx(1.0, abs=1e-12)

    def test_uniform_horizontal_count_is_binomial(self, uniform_quarter):
        """Test H_n ~ Binomial(n, 1/2) when every line moves horizontally half the time"""
        joint = joint_evolve(uniform_quarter, 20)
        expected = stats.binom.pmf(np.arange(21), 20, 0.5)
        assert np.allclose(joint.horizontal_marginal(), expected, atol=1e-12)
        mean, var = joint.horizontal_moments()
        assert mean == pytest.approx(10.0)
        assert var == pytest.approx(5.0)

    def test_parity(self, periodic_three):
        """Test only levels of the parity of n - h carry mass"""
        joint = joint_evolve(periodic_three, 9)
        for j in range(-joint.level_cap, joint.level_cap + 1):
            for h in range(10):
                if (j - (9 - h)) % 2 or abs(j) > 9 - h:
                    assert joint.at(j, h) == 0.0

    @given(st.lists(st.floats(min_value=0.05, max_value=0.5), min_size=1, max_size=4), st.integers(0, 14))
    @hyp_settings(max_examples=25, deadline=None)
    def test_vertical_marginal(self, values, n):
        """Test summing out h recovers the vertical sweep"""
        profile = StepProfile.periodic(values)
        joint = joint_evolve(profile, n, level_cap=n or 1)
        vertical = vertical_evolve(profile, n, level_cap=n or 1)
        assert np.allclose(joint.vertical_marginal(), vertical.pmf.mass, atol=1e-12)


@pytest.mark.unit
class TestReturnProbability:
    """Test origin-return probabilities"""

    def test_known_values(self, uniform_quarter):
        """Test P(C(2)) = 1/4 and P(C(4)) = 9/64 for the simple planar walk"""
        assert return_prob_exact(uniform_quarter, 0) == 1.0
        assert return_prob_exact(uniform_quarter, 2) == pytest.approx(0.25, abs=1e-15)
        assert return_prob_exact(uniform_quarter, 4) == pytest.approx(0.140625, abs=1e-15)

    def test_odd_is_zero(self, periodic_three):
        """Test odd step counts give 0"""
        assert return_prob_exact(periodic_three, 7) == 0.0

    def test_planar_closed_form(self, uniform_quarter):
        """Test the joint sweep reproduces the planar closed form"""
        seq = return_prob_sequence(uniform_quarter, 60)
        for two_n in range(0, 61, 2):
            assert seq.prob[two_n] == pytest.approx(planar_return(two_n), abs=1e-13)

    def test_matches_enumeration(self, periodic_two, periodic_three, half_comb, comb):
        """Test agreement with path enumeration up to 10 steps"""
        for profile in (periodic_two, periodic_three, half_comb, comb):
            seq = return_prob_sequence(profile, 10)
            for n in range(0, 11):
                oracle = brute_force_return(profile, n)
                assert return_prob_exact(profile, n) == pytest.approx(oracle, abs=1e-12)
                assert seq.prob[n] == pytest.approx(oracle, abs=1e-12)

    def test_sequence_matches_single(self, periodic_two):
        """Test the one-sweep sequence against separate evaluations"""
        seq = return_prob_sequence(periodic_two, 40)
        for two_n in (10, 24, 40):
            assert seq.prob[two_n] == pytest.approx(return_prob_exact(periodic_two, two_n), abs=1e-14)
        assert np.all(seq.prob[1::2] == 0.0)
        assert np.all(seq.error_bound >= seq.loss)

    def test_split_adds_up(self, periodic_two):
        """Test the in-band and out-of-band parts sum to the return probability"""
        inside, outside = return_prob_split(periodic_two, 60)
        assert inside >= 0.0 and outside >= 0.0
        assert inside + outside == pytest.approx(return_prob_exact(periodic_two, 60), abs=1e-14)

    def test_split_needs_even(self, periodic_two):
        """Test odd or zero step counts are rejected by the split"""
        with pytest.raises(InvalidGrid):
            return_prob_split(periodic_two, 7)
        with pytest.raises(InvalidGrid):
            return_prob_split(periodic_two, 0)


@pytest.mark.unit
class TestEnumerationOracles:
    """Test the enumeration oracles themselves"""

    def test_distribution_sums_to_one(self, periodic_three):
        """Test the enumerated law of C(n) is a probability law"""
        law = brute_force_distribution(periodic_three, 6)
        assert sum(law.values()) == pytest.approx(1.0, abs=1e-14)

    def test_distribution_marginal(self, half_comb):
        """Test the y-marginal equals the vertical oracle"""
        law = brute_force_distribution(half_comb, 7)
        marginal = {}
        for (_, y), prob in law.items():
            marginal[y] = marginal.get(y, 0.0) + prob
        vertical = brute_force_vertical(half_comb, 7)
        for level, prob in vertical.items():
            assert marginal.get(level, 0.0) == pytest.approx(prob, abs=1e-14)

    def test_origin_from_distribution(self, periodic_two):
        """Test the origin entry equals brute_force_return"""
        law = brute_force_distribution(periodic_two, 8)
        assert law[(0, 0)] == pytest.approx(brute_force_return(periodic_two, 8), abs=1e-14)

    def test_limits(self, uniform_quarter):
        """Test enumeration refuses step counts past its limits"""
        with pytest.raises(TooLarge):
            brute_force_return(uniform_quarter, 13)
        with pytest.raises(TooLarge):
            brute_force_distribution(uniform_quarter, 11)
        with pytest.raises(TooLarge):
            brute_force_vertical(uniform_quarter, 13)
        with pytest.raises(InvalidGrid):
            brute_force_vertical(uniform_quarter, -1)


@pytest.mark.unit
class TestGreenFunction:
    """Test the cumulative return probabilities"""

    def test_cumulative(self, uniform_quarter):
        """Test g(N) is the running sum of return probabilities"""
        green = green_function(uniform_quarter, 20)
        seq = return_prob_sequence(uniform_quarter, 20)
        assert green.g[0] == 1.0
        assert np.allclose(green.g, np.cumsum(seq.prob))
        assert green.steps.tolist() == list(range(21))

    def test_normalized(self, uniform_quarter):
        """Test the normalised column and its undefined entries"""
        green = green_function(uniform_quarter, 20)
        assert np.isnan(green.g_normalized[0]) and np.isnan(green.g_normalized[1])
        assert green.g_normalized[20] == pytest.approx(green.g[20] * math.pi / math.log(20))

    def test_normalized_undefined_for_comb(self, comb):
        """Test gamma <= 1 leaves the normalised column empty"""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            green = green_function(comb, 10)
        assert np.all(np.isnan(green.g_normalized))

    def test_odd_rejected(self, uniform_quarter):
        """Test odd n_max is rejected"""
        with pytest.raises(InvalidGrid):
            green_function(uniform_quarter, 9)

    def test_value_exact(self, uniform_quarter):
        """Test green_value below the exact limit"""
        value, extrapolated = green_value(uniform_quarter, 21)
        assert not extrapolated
        assert value == pytest.approx(green_function(uniform_quarter, 20).g[-1])

    def test_value_extrapolated(self, configure, uniform_quarter):
        """Test green_value continues with log growth past the exact limit"""
        configure(WALK_GREEN_EXACT_MAX_STEPS="20")
        value, extrapolated = green_value(uniform_quarter, 200)
        base = green_function(uniform_quarter, 20).g[-1]
        assert extrapolated
        assert value == pytest.approx(base + math.log(10) / math.pi)


@pytest.mark.slow
class TestAsymptotics:
    """Desk-scale checks of the return-probability asymptotics"""

    def test_uniform_matches_closed_form(self, uniform_quarter):
        """Test P(C(2N) = 0) equals the squared central binomial for every N <= 500"""
        seq = return_prob_sequence(uniform_quarter, 1000)
        for n in range(1, 501):
            assert seq.prob[2 * n] == pytest.approx(planar_return(2 * n), rel=1e-9)

    def test_uniform_ratio_within_stirling_order(self, uniform_quarter):
        """Test |N pi P(C(2N) = 0) - 1| <= 1/(2N) from N = 50 on"""
        seq = return_prob_sequence(uniform_quarter, 1000)
        for n in range(50, 501):
            ratio = seq.prob[2 * n] * 4 * n * 0.25 * math.pi
            assert abs(ratio - 1.0) <= 1.0 / (2 * n)

    def test_periodic_ratio_approaches_one(self, periodic_two):
        """Test 4 N p0 pi sqrt(gamma - 1) P(C(2N)) is within 0.05 of 1 by N = 2000 and closer than at N = 250"""
        seq = return_prob_sequence(periodic_two, 4000)
        factor = 4 * 0.25 * math.pi * math.sqrt(0.5)
        early = seq.prob[500] * 250 * factor
        late = seq.prob[4000] * 2000 * factor
        assert abs(late - 1.0) <= 0.05
        assert abs(late - 1.0) <= abs(early - 1.0)
