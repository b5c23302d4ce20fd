import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsprism.decompose import (
    DEFAULT_PERIODS,
    GROWTH,
    OTHER,
    Decomposition,
    DecompositionSpec,
    build_design_matrix,
    fit,
    reconstruct,
)
from tsprism.errors import SingularSystem, WindowTooShort
from tsprism.synthetic import dense_ls_oracle

TREND_ONLY = DecompositionSpec(periods=(), n_changepoints=0)


def _r2(fitted, plant):
    return 1.0 - np.sum((fitted - plant) ** 2) / np.sum((plant - plant.mean()) ** 2)


def _penalty_diagonal(n_columns, blocks, spec):
    """Rebuild the penalty from the stated rule: 0 on intercept and slope,
    ridge_trend on hinge columns, ridge_seasonal on Fourier columns."""
    penalty = np.zeros(n_columns)
    growth = blocks[GROWTH]
    penalty[growth.start + 2 : growth.stop] = spec.ridge_trend
    for name, sl in blocks.items():
        if name != GROWTH:
            penalty[sl.start : sl.stop] = spec.ridge_seasonal
    return penalty


def _oracle_components(y, spec):
    """Independent route: augmented lstsq for the coefficients, then the same
    block-contribution rule applied by hand."""
    matrix, blocks = build_design_matrix(len(y), spec)
    penalty = _penalty_diagonal(matrix.shape[1], blocks, spec)
    beta = dense_ls_oracle(matrix, y, penalty)
    components = {name: matrix[:, sl] @ beta[sl] for name, sl in blocks.items()}
    components[OTHER] = y - matrix @ beta
    return components


class TestDesignMatrix:
    def test_trend_only_n4(self):
        matrix, blocks = build_design_matrix(4, TREND_ONLY)
        expected = np.array([[1, 0], [1, 1 / 3], [1, 2 / 3], [1, 1.0]])
        np.testing.assert_allclose(matrix, expected, atol=1e-15)
        assert blocks == {GROWTH: slice(0, 2)}

    def test_single_period_single_harmonic(self):
        spec = DecompositionSpec(periods=(("Daily", 24.0, 1),), n_changepoints=0)
        matrix, blocks = build_design_matrix(24, spec)
        assert matrix.shape == (24, 4)
        idx = np.arange(24)
        np.testing.assert_allclose(matrix[:, 2], np.cos(2 * np.pi * idx / 24), atol=1e-15)
        np.testing.assert_allclose(matrix[:, 3], np.sin(2 * np.pi * idx / 24), atol=1e-15)
        assert blocks["Daily"] == slice(2, 4)

    def test_default_spec_column_count(self):
        matrix, blocks = build_design_matrix(168, DecompositionSpec())
        assert matrix.shape[1] == 2 + 25 + 6 + 6 == 39
        assert blocks[GROWTH] == slice(0, 27)
        assert blocks["Daily"] == slice(27, 33)
        assert blocks["Weekly"] == slice(33, 39)

    def test_changepoints_uniform_over_open_span(self):
        spec = DecompositionSpec(periods=(), n_changepoints=3, changepoint_span=0.8)
        matrix, _ = build_design_matrix(101, spec)
        t = np.arange(101) / 100.0
        for j, s in enumerate([0.2, 0.4, 0.6], start=2):
            np.testing.assert_allclose(matrix[:, j], np.maximum(0.0, t - s), atol=1e-15)

    def test_fourier_uses_absolute_sample_index(self):
        spec = DecompositionSpec(periods=(("Weekly", 168.0, 2),), n_changepoints=0)
        matrix, blocks = build_design_matrix(168, spec)
        idx = np.arange(168)
        sl = blocks["Weekly"]
        np.testing.assert_allclose(matrix[:, sl.start + 2], np.cos(2 * np.pi * 2 * idx / 168), atol=1e-14)


class TestSpecValidation:
    def test_defaults_match_paper_setup(self):
        spec = DecompositionSpec()
        assert spec.periods == DEFAULT_PERIODS
        assert spec.n_changepoints == 25
        assert spec.changepoint_span == 0.8
        assert spec.concept_names == ("Growth", "Daily", "Weekly", "Other")

    def test_period_too_small(self):
        with pytest.raises(ValueError):
            DecompositionSpec(periods=(("X", 1.0, 1),))

    def test_harmonics_positive(self):
        with pytest.raises(ValueError):
            DecompositionSpec(periods=(("X", 24.0, 0),))

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            DecompositionSpec(periods=(("Daily", 24.0, 3), ("Daily", 12.0, 2)))

    def test_nyquist_warning(self):
        with pytest.warns(UserWarning):
            DecompositionSpec(periods=(("X", 6.0, 3),))

    def test_span_bounds(self):
        with pytest.raises(ValueError):
            DecompositionSpec(changepoint_span=0.0)
        with pytest.raises(ValueError):
            DecompositionSpec(changepoint_span=1.2)

    def test_config_round_trip(self):
        spec = DecompositionSpec(
            periods=(("Daily", 24.0, 2),),
            n_changepoints=7,
            changepoint_span=0.5,
            ridge_trend=0.25,
            ridge_seasonal=0.125,
        )
        assert DecompositionSpec.from_config(spec.to_config()) == spec


class TestFit:
    def test_constant_window_matches_oracle(self):
        y = np.full(168, 5.0)
        d = fit(y)
        assert np.max(np.abs(d.components[GROWTH] - 5.0)) <= 1e-6
        assert np.max(np.abs(d.components["Daily"])) <= 1e-6
        assert np.max(np.abs(d.components["Weekly"])) <= 1e-6
        assert np.max(np.abs(d.components[OTHER])) <= 1e-6
        oracle = _oracle_components(y, DecompositionSpec())
        for name in d.names:
            np.testing.assert_allclose(d.components[name], oracle[name], atol=1e-8)

    def test_pure_daily_sinusoid_lands_in_daily_block(self):
        idx = np.arange(168)
        y = np.sin(2 * np.pi * idx / 24)
        d = fit(y)
        assert _r2(d.components["Daily"], y) >= 0.99
        oracle = _oracle_components(y, DecompositionSpec())
        np.testing.assert_allclose(d.components["Daily"], oracle["Daily"], atol=1e-8)

    def test_kinked_ramp_lands_in_growth_block(self):
        t = np.arange(168) / 167.0
        plant = t + 0.25 * np.maximum(0.0, t - 84.0 / 167.0)
        d = fit(plant)
        assert _r2(d.components[GROWTH], plant) >= 0.99
        assert d.components["Daily"].var() <= 0.01 * plant.var()
        assert d.components["Weekly"].var() <= 0.01 * plant.var()

    def test_window_too_short(self):
        with pytest.raises(WindowTooShort):
            fit(np.arange(7.0))

    def test_deterministic_bitwise(self):
        rng = np.random.default_rng(5)
        y = rng.standard_normal(168)
        a, b = fit(y), fit(y)
        for name in a.names:
            assert np.array_equal(a.components[name], b.components[name])
        assert np.array_equal(a.coefficients, b.coefficients)

    def test_linearity_in_input(self):
        rng = np.random.default_rng(11)
        y = rng.standard_normal(168)
        a = fit(y)
        b = fit(3.5 * y)
        for name in a.names:
            np.testing.assert_allclose(b.components[name], 3.5 * a.components[name], rtol=1e-9, atol=1e-12)

    def test_block_recovery_trend_plus_daily(self):
        idx = np.arange(168, dtype=float)
        trend = 1.0 + 0.01 * idx
        daily = 2.0 * np.sin(2 * np.pi * idx / 24 + 0.3)
        d = fit(trend + daily)
        assert _r2(d.components[GROWTH], trend) >= 0.95
        assert _r2(d.components["Daily"], daily) >= 0.95

    def test_components_read_only(self):
        d = fit(np.sin(np.arange(168.0)))
        with pytest.raises(ValueError):
            d.components[GROWTH][0] = 1.0

    def test_agrees_with_dense_oracle_on_random_windows(self):
        spec = DecompositionSpec()
        rng = np.random.default_rng(77)
        for _ in range(10):
            y = rng.standard_normal(168) + rng.uniform(-3, 3)
            produced = fit(y, spec).coefficients
            oracle = _oracle_components(y, spec)
            matrix, blocks = build_design_matrix(168, spec)
            beta = dense_ls_oracle(matrix, y, _penalty_diagonal(39, blocks, spec))
            scale = max(1.0, float(np.max(np.abs(beta))))
            assert np.max(np.abs(produced - beta)) / scale <= 1e-8

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_reconstruction_identity_property(self, seed):
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(168) * rng.uniform(0.1, 10) + rng.uniform(-5, 5)
        d = fit(y)
        assert np.max(np.abs(reconstruct(d) - y)) <= 1e-10


class TestReconstruct:
    def test_fitted_reconstructs_original(self):
        y = np.cos(np.arange(200.0) / 7.0)
        d = fit(y)
        np.testing.assert_allclose(reconstruct(d), y, atol=1e-10)

    def test_two_component_sum(self):
        d = Decomposition(
            components={"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])},
            original=np.array([4.0, 6.0]),
            coefficients=np.zeros(0),
            block_slices={},
        )
        np.testing.assert_array_equal(reconstruct(d), [4.0, 6.0])

    def test_trend_only_spec(self):
        y = np.linspace(0.0, 3.0, 60) + 0.01 * np.arange(60.0) ** 1.5
        d = fit(y, TREND_ONLY)
        assert d.names == (GROWTH, OTHER)
        np.testing.assert_allclose(d.components[GROWTH] + d.components[OTHER], y, atol=1e-10)


class TestDenseOracle:
    def test_identity_matrix_zero_penalty(self):
        targets = np.array([3.0, -1.0, 2.0])
        beta = dense_ls_oracle(np.eye(3), targets, np.zeros(3))
        np.testing.assert_allclose(beta, targets, atol=1e-12)

    def test_huge_penalty_shrinks_to_zero(self):
        rng = np.random.default_rng(2)
        matrix = rng.standard_normal((30, 4))
        targets = rng.standard_normal(30)
        beta = dense_ls_oracle(matrix, targets, np.full(4, 1e12))
        assert np.max(np.abs(beta)) <= 1e-3

    def test_singular_unpenalized_system(self):
        matrix = np.ones((4, 2))  # duplicated column
        with pytest.raises(SingularSystem):
            dense_ls_oracle(matrix, np.ones(4), np.zeros(2))
