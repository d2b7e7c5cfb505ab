"""
Tests for step profiles and their averaged quantities
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from core_engine.error_handling import (
    AsymmetricTails,
    GammaNotAboveOneWarning,
    InvalidGrid,
    InvalidProfile,
    SidesDisagree,
)
from core_engine.profiles import (
    KERNEL_PERIODIC,
    KERNEL_TABLE,
    ProfileKind,
    StepProfile,
    check_heyde,
    diagnose,
    gamma_of,
    invariant_measure_residual,
    kappa_beta,
    lemma24_table,
    p_at,
    p_levels,
)

probabilities = st.floats(min_value=0.01, max_value=0.5, allow_nan=False)


@pytest.mark.unit
class TestConstruction:
    """Test profile validation"""

    def test_uniform(self, uniform_quarter):
        """Test a uniform profile stores one value and defaults omega to it"""
        assert uniform_quarter.kind == ProfileKind.UNIFORM
        assert uniform_quarter.period == 1
        assert uniform_quarter.omega == 0.25
        assert uniform_quarter.infimum == 0.25

    def test_periodic_omega_defaults_to_minimum(self, periodic_three):
        """Test omega defaults to inf p_j"""
        assert periodic_three.omega == 0.2
        assert periodic_three.period == 3

    def test_explicit_omega(self):
        """Test a smaller omega is accepted"""
        profile = StepProfile.periodic([0.25, 0.5], omega=0.1)
        assert profile.omega == 0.1

    @pytest.mark.parametrize("p", [0.0, -0.1, 0.51, 1.0, float("nan")])
    def test_rejects_out_of_range(self, p):
        """Test p_j outside (0, 1/2] is rejected"""
        with pytest.raises(InvalidProfile):
            StepProfile.uniform(p)

    def test_rejects_empty_period(self):
        """Test an empty periodic profile is rejected"""
        with pytest.raises(InvalidProfile):
            StepProfile.periodic([])

    def test_rejects_omega_above_infimum(self):
        """Test omega must not exceed inf p_j"""
        with pytest.raises(InvalidProfile):
            StepProfile.periodic([0.25, 0.5], omega=0.3)

    def test_table_needs_tails(self):
        """Test a table without tail values is rejected"""
        with pytest.raises(InvalidProfile):
            StepProfile(ProfileKind.TABLE, (0.25,))

    def test_table_rejects_bad_tail(self):
        """Test tails are range-checked like window values"""
        with pytest.raises(InvalidProfile):
            StepProfile.table(0, [0.25], 0.7, 0.5)

    def test_all_half_is_allowed(self):
        """Test the one-dimensional profile constructs and reports itself degenerate"""
        profile = StepProfile.uniform(0.5)
        assert profile.is_degenerate
        assert not StepProfile.uniform(0.25).is_degenerate

    def test_profiles_are_immutable(self, uniform_quarter):
        """Test profiles cannot be mutated"""
        with pytest.raises(Exception):
            uniform_quarter.values = (0.3,)


@pytest.mark.unit
class TestLookup:
    """Test p_j lookup"""

    def test_periodic_wraps_negative_levels(self, periodic_two):
        """Test p_j = p[j mod L] for negative j"""
        assert p_at(periodic_two, 0) == 0.25
        assert p_at(periodic_two, 1) == 0.5
        assert p_at(periodic_two, -1) == 0.5
        assert p_at(periodic_two, -2) == 0.25

    def test_table_window_and_tails(self):
        """Test window values and both tails"""
        profile = StepProfile.table(-1, [0.1, 0.2, 0.3], tail_pos=0.4, tail_neg=0.45)
        assert p_at(profile, -2) == 0.45
        assert p_at(profile, -1) == 0.1
        assert p_at(profile, 0) == 0.2
        assert p_at(profile, 1) == 0.3
        assert p_at(profile, 2) == 0.4
        assert p_at(profile, 100) == 0.4

    def test_comb(self, comb):
        """Test the comb only has horizontal moves on y = 0"""
        assert comb.horizontal(0) == 0.25
        assert comb.horizontal(3) == 0.0
        assert comb.horizontal(-3) == 0.0
        assert comb.alpha(0) == 0.5

    def test_half_comb(self, half_comb):
        """Test the half-plane-half-comb tails"""
        assert p_at(half_comb, 5) == 0.25
        assert p_at(half_comb, -5) == 0.5

    def test_vectorised_lookup_matches(self, periodic_three, half_comb):
        """Test p_levels agrees with p_at"""
        levels = np.arange(-7, 8)
        for profile in (periodic_three, half_comb):
            expected = [p_at(profile, int(j)) for j in levels]
            assert p_levels(profile, levels).tolist() == expected

    def test_kernel_args(self, periodic_two, comb):
        """Test the flat kernel representation"""
        mode, values, wmin, tp, tn = periodic_two.kernel_args()
        assert mode == KERNEL_PERIODIC
        assert values.tolist() == [0.25, 0.5]
        mode, values, wmin, tp, tn = comb.kernel_args()
        assert mode == KERNEL_TABLE
        assert (wmin, tp, tn) == (0, 0.5, 0.5)

    def test_config_round_trip(self, half_comb):
        """Test to_config carries every field"""
        from models.schemas import parse_profile_spec

        rebuilt = parse_profile_spec(half_comb.to_config()).to_profile()
        assert rebuilt == half_comb


@pytest.mark.unit
class TestGamma:
    """Test the averaged constant gamma"""

    def test_uniform_quarter(self, uniform_quarter):
        """Test gamma = 2 for the simple walk"""
        assert gamma_of(uniform_quarter) == 2.0

    def test_periodic_two(self, periodic_two):
        """Test gamma = 3/2 for [1/4, 1/2]"""
        assert gamma_of(periodic_two) == 1.5

    def test_periodic_three(self, periodic_three):
        """Test gamma is half the mean of 1/p over one period"""
        expected = (1 / 0.2 + 1 / 0.35 + 1 / 0.5) / 6
        assert gamma_of(periodic_three) == pytest.approx(expected, rel=1e-15)

    def test_comb_warns(self, comb):
        """Test gamma = 1 for the comb emits a warning"""
        with pytest.warns(GammaNotAboveOneWarning):
            assert gamma_of(comb) == 1.0

    def test_asymmetric_tails(self, half_comb):
        """Test unequal tails have no two-sided limit"""
        with pytest.raises(AsymmetricTails):
            gamma_of(half_comb)

    @given(st.lists(probabilities, min_size=1, max_size=6))
    @hyp_settings(max_examples=50, deadline=None)
    def test_period_average_is_exact(self, values):
        """Test kappa at multiples of the period equals 2 gamma bit-exactly"""
        profile = StepProfile.periodic(values)
        gamma = float(sum(1 / Fraction(p) for p in values) / (2 * len(values)))
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert gamma_of(profile) == gamma
        period = len(values)
        kappa, beta = kappa_beta(profile, 3 * period)
        for k in (1, 2, 3):
            assert kappa[k * period - 1] == 2 * gamma
            assert beta[k * period - 1] == 2 * gamma


@pytest.mark.unit
class TestAverages:
    """Test prefix averages and the two-sided averaging check"""

    def test_kappa_beta_values(self, periodic_two):
        """Test prefix averages of 1/p_j for [1/4, 1/2]"""
        kappa, beta = kappa_beta(periodic_two, 4)
        assert kappa.tolist() == pytest.approx([2.0, 3.0, 8 / 3, 3.0])
        assert beta.tolist() == pytest.approx([2.0, 3.0, 8 / 3, 3.0])

    def test_kappa_beta_rejects_empty(self, periodic_two):
        """Test j_max < 1 is rejected"""
        with pytest.raises(InvalidGrid):
            kappa_beta(periodic_two, 0)

    def test_lemma24_table(self, periodic_two):
        """Test deviations j|kappa_j - 2 gamma| stay bounded for a periodic profile"""
        table = lemma24_table(periodic_two, 10)
        assert list(table.columns) == ["j", "kappa_deviation", "beta_deviation"]
        assert table["kappa_deviation"].tolist() == [1.0, 0.0] * 5
        assert table["beta_deviation"].max() <= 1.0

    def test_heyde_uniform(self, uniform_quarter):
        """Test a constant profile has vanishing residuals"""
        result = check_heyde(uniform_quarter, 200)
        assert result.gamma_hat == 2.0
        assert math.isinf(result.eta_hat)
        assert list(result.residual_table.columns) == ["n", "kappa", "beta", "residual_plus", "residual_minus"]
        assert len(result.residual_table) == 200

    def test_heyde_periodic_rate(self, periodic_two):
        """Test periodic residuals decay like 1/n"""
        result = check_heyde(periodic_two, 400)
        assert result.gamma_hat == pytest.approx(1.5)
        assert result.eta_hat == pytest.approx(1.0, abs=1e-6)

    def test_heyde_needs_long_range(self, uniform_quarter):
        """Test n_max below 100 is rejected"""
        with pytest.raises(InvalidGrid):
            check_heyde(uniform_quarter, 50)

    def test_heyde_sides_disagree(self, half_comb):
        """Test different one-sided limits raise with both values attached"""
        with pytest.raises(SidesDisagree) as exc_info:
            check_heyde(half_comb, 200)
        assert exc_info.value.plus == pytest.approx(4.0, rel=0.01)
        assert exc_info.value.minus == pytest.approx(2.0)

    def test_invariant_measure(self, periodic_three, half_comb):
        """Test mu(k, j) = 1/p_j balances the transition kernel"""
        assert invariant_measure_residual(periodic_three, range(-10, 11)) < 1e-12
        assert invariant_measure_residual(half_comb, range(-10, 11)) < 1e-12


@pytest.mark.unit
class TestDiagnose:
    """Test profile diagnostics"""

    def test_derived_constants(self, periodic_two):
        """Test gamma*, sigma and mu"""
        diag = diagnose(periodic_two, n_max=200)
        assert diag.gamma == 1.5
        assert diag.gamma_star == pytest.approx(1 / 3)
        assert diag.sigma == pytest.approx(1 / math.sqrt(1.5))
        assert diag.mu_stenlund == 3.0
        assert diag.omega == 0.25
        assert diag.kappa_seq.size == 200
        assert diag.warnings == []

    def test_comb_warning_collected(self, comb):
        """Test the gamma <= 1 warning lands in the diagnostics"""
        diag = diagnose(comb, n_max=200)
        assert diag.gamma == 1.0
        assert diag.gamma_star == 0.0
        assert any("not above 1" in w for w in diag.warnings)
