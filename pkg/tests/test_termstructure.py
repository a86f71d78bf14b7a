import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poweropt import (
    DomainError,
    MarketModel,
    PiecewiseFn,
    TimeGrid,
    lambda_integral,
    m_factor,
    variance_bundle,
)

from oracles import riemann_bundle, riemann_m

# multi-segment model whose knots sit on the 1e6-point oracle lattice
PIECEWISE = MarketModel.from_segments(
    [0.0, 0.5, 1.25, 2.0],
    alpha=[0.1, 0.4, 0.25],
    beta=[0.004, 0.006, 0.002],
    sigma_r=[0.012, 0.008, 0.015],
    mu=[0.08, 0.07, 0.06],
    q=[0.01, 0.02, 0.015],
    sigma_s=[0.2, 0.3, 0.25],
    rho=[0.3, -0.4, 0.6],
    c=0.01,
)

TWO_SEGMENT = MarketModel.from_segments([0.0, 1.0, 2.0], alpha=[0.1, 0.3])


class TestTimeGrid:
    def test_rejects_short_grid(self):
        with pytest.raises(DomainError):
            TimeGrid(np.array([0.0]))

    def test_rejects_nonzero_start(self):
        with pytest.raises(DomainError):
            TimeGrid(np.array([0.5, 1.0]))

    def test_rejects_non_increasing(self):
        with pytest.raises(DomainError):
            TimeGrid(np.array([0.0, 1.0, 1.0]))

    def test_segment_lookup_right_open(self):
        grid = TimeGrid(np.array([0.0, 1.0, 2.0]))
        assert grid.segment_index(0.0) == 0
        assert grid.segment_index(1.0) == 1
        assert grid.segment_index(2.0) == 1  # horizon takes the last segment


class TestPiecewiseFn:
    def test_value_count_must_match(self):
        grid = TimeGrid(np.array([0.0, 1.0, 2.0]))
        with pytest.raises(DomainError):
            PiecewiseFn(grid, np.array([1.0]))

    def test_evaluation_total_on_domain(self):
        fn = PIECEWISE.alpha
        assert fn(0.0) == 0.1
        assert fn(0.5) == 0.4
        assert fn(2.0) == 0.25
        with pytest.raises(DomainError):
            fn(2.5)

    def test_sample_matches_scalar_calls(self):
        ts = np.array([0.0, 0.3, 0.5, 1.3, 2.0])
        fn = PIECEWISE.sigma_s
        assert np.array_equal(fn.sample(ts), [fn(t) for t in ts])


class TestMarketModel:
    def test_rejects_bad_correlation(self):
        with pytest.raises(DomainError):
            MarketModel.constant(1.0, rho=1.5)

    def test_rejects_negative_vol(self):
        with pytest.raises(DomainError):
            MarketModel.constant(1.0, sigma_s=-0.1)

    def test_rejects_mismatched_grids(self):
        a = MarketModel.constant(1.0)
        b = MarketModel.constant(2.0)
        with pytest.raises(DomainError):
            MarketModel(
                alpha=a.alpha, beta=b.beta, sigma_r=a.sigma_r, mu=a.mu,
                q=a.q, sigma_s=a.sigma_s, rho=a.rho,
            )


class TestLambdaIntegral:
    def test_zero_integrand(self):
        assert lambda_integral(MarketModel.constant(10.0), 5.0) == 0.0

    def test_constant_integrand(self):
        model = MarketModel.constant(10.0, alpha=0.1)
        assert lambda_integral(model, 4.0) == pytest.approx(0.4, abs=1e-15)

    def test_piecewise(self):
        assert lambda_integral(TWO_SEGMENT, 1.5) == pytest.approx(0.25, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            lambda_integral(TWO_SEGMENT, -0.1)
        with pytest.raises(DomainError):
            lambda_integral(TWO_SEGMENT, 2.1)

    @given(
        t1=st.floats(0.0, 2.0),
        t2=st.floats(0.0, 2.0),
    )
    @settings(deadline=None, max_examples=200)
    def test_additivity(self, t1, t2):
        lo, hi = min(t1, t2), max(t1, t2)
        direct = PIECEWISE.alpha.integral(lo, hi)
        prefix = lambda_integral(PIECEWISE, hi) - lambda_integral(PIECEWISE, lo)
        assert abs(direct - prefix) <= 1e-14


class TestMFactor:
    def test_zero_alpha_is_elapsed_time(self):
        model = MarketModel.constant(5.0)
        assert m_factor(model, 0.0, 2.0) == pytest.approx(2.0, abs=1e-15)

    def test_constant_alpha_closed_form(self):
        model = MarketModel.constant(5.0, alpha=0.5)
        assert m_factor(model, 0.0, 2.0) == pytest.approx(
            1.2642411176571153, abs=1e-15
        )

    def test_piecewise_vs_riemann_oracle(self):
        # frozen from the 1e6-step midpoint oracle (engine value agrees
        # with the closed per-segment form to float precision)
        assert m_factor(TWO_SEGMENT, 0.0, 2.0) == pytest.approx(
            1.7333503929748058, abs=1e-12
        )
        oracle = riemann_m(TWO_SEGMENT, 0.0, 2.0)
        assert m_factor(TWO_SEGMENT, 0.0, 2.0) == pytest.approx(oracle, abs=1e-10)

    def test_mid_segment_window_vs_riemann_oracle(self):
        # step count chosen so the knots at 0.5 and 1.25 sit on the lattice
        oracle = riemann_m(PIECEWISE, 0.3, 1.7, n=700_000)
        assert m_factor(PIECEWISE, 0.3, 1.7) == pytest.approx(oracle, rel=1e-10)

    def test_vanishes_on_empty_interval(self):
        for u in (0.0, 0.7, 1.3, 2.0):
            assert m_factor(PIECEWISE, u, u) == 0.0

    @given(st.floats(0.0, 2.0), st.floats(0.0, 2.0))
    @settings(deadline=None, max_examples=200)
    def test_nondecreasing_in_v(self, v1, v2):
        lo, hi = min(v1, v2), max(v1, v2)
        assert m_factor(PIECEWISE, 0.0, lo) <= m_factor(PIECEWISE, 0.0, hi) + 1e-15

    def test_rejects_reversed_bounds(self):
        with pytest.raises(DomainError):
            m_factor(PIECEWISE, 1.0, 0.5)


class TestVarianceBundle:
    def test_zero_rate_vol(self):
        model = MarketModel.constant(2.0, sigma_s=0.2)
        b = variance_bundle(model, 0.0, 1.0, 0.05)
        assert b.var_x == 0.0
        assert b.var_y == pytest.approx(0.04, abs=1e-15)
        assert b.rho_eff == 0.0

    def test_flat_rate_closed_forms(self):
        # alpha = beta = 0: m(u, T) = T - u, so var_x = s^2 tau^3 / 3 and
        # mean_int_r = r * tau
        s_r, tau, r = 0.01, 2.0, 0.03
        model = MarketModel.constant(5.0, sigma_r=s_r, sigma_s=0.2, rho=0.5)
        b = variance_bundle(model, 0.0, tau, r)
        assert b.var_x == pytest.approx(s_r**2 * tau**3 / 3.0, rel=1e-12)
        assert b.mean_int_r == pytest.approx(r * tau, rel=1e-14)

    def test_flat_effective_correlation(self):
        model = MarketModel.constant(5.0, sigma_r=0.01, sigma_s=0.2, rho=0.5)
        b = variance_bundle(model, 0.0, 2.0, 0.03)
        assert b.rho_eff == pytest.approx(0.5 * math.sqrt(3.0) / 2.0, abs=1e-12)

    def test_piecewise_vs_riemann_oracle(self):
        b = variance_bundle(PIECEWISE, 0.0, 2.0, 0.03)
        oracle = riemann_bundle(PIECEWISE, 0.0, 2.0, 0.03)
        for name in ("mean_int_r", "int_q", "var_x", "var_y", "rho_eff"):
            assert getattr(b, name) == pytest.approx(
                oracle[name], rel=1e-8
            ), name

    def test_mid_segment_window_vs_riemann_oracle(self):
        b = variance_bundle(PIECEWISE, 0.3, 1.7, 0.05)
        oracle = riemann_bundle(PIECEWISE, 0.3, 1.7, 0.05, n=700_000)
        for name in ("mean_int_r", "int_q", "var_x", "var_y", "rho_eff"):
            assert getattr(b, name) == pytest.approx(
                oracle[name], rel=1e-8
            ), name

    def test_total_var_construction(self):
        b = variance_bundle(PIECEWISE, 0.2, 1.7, 0.03)
        expected = b.var_x + b.var_y + 2 * b.rho_eff * b.sigma_x * b.sigma_y
        assert b.total_var == expected

    def test_rho_negation_flips_rho_eff_only(self):
        flipped = MarketModel.from_segments(
            PIECEWISE.grid.knots,
            alpha=PIECEWISE.alpha.values,
            beta=PIECEWISE.beta.values,
            sigma_r=PIECEWISE.sigma_r.values,
            mu=PIECEWISE.mu.values,
            q=PIECEWISE.q.values,
            sigma_s=PIECEWISE.sigma_s.values,
            rho=-PIECEWISE.rho.values,
            c=PIECEWISE.c,
        )
        b = variance_bundle(PIECEWISE, 0.0, 2.0, 0.03)
        bf = variance_bundle(flipped, 0.0, 2.0, 0.03)
        assert bf.rho_eff == -b.rho_eff
        assert bf.var_x == b.var_x
        assert bf.var_y == b.var_y

    def test_effective_correlation_bounded(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            knots = np.concatenate([[0.0], np.cumsum(rng.uniform(0.2, 1.0, 3))])
            model = MarketModel.from_segments(
                knots,
                alpha=rng.uniform(0.0, 0.5, 3),
                beta=rng.uniform(0.0, 0.01, 3),
                sigma_r=rng.uniform(0.001, 0.5, 3),
                mu=0.0,
                q=0.0,
                sigma_s=rng.uniform(0.001, 0.5, 3),
                rho=rng.uniform(-1.0, 1.0, 3),
            )
            b = variance_bundle(model, 0.0, float(knots[-1]), 0.02)
            assert -1.0 <= b.rho_eff <= 1.0

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            variance_bundle(PIECEWISE, 1.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            variance_bundle(PIECEWISE, 1.5, 0.5, 0.0)
        with pytest.raises(DomainError):
            variance_bundle(PIECEWISE, 0.0, 3.0, 0.0)
