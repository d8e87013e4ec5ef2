import io

import numpy as np
import pytest

from attractor_forge import (
    AlignmentError,
    ConfigError,
    Field,
    NoiseSpec,
    RangeError,
    SpatialGrid,
    TripleSpec,
    check_growth,
    check_stationary_increments,
    constant_field,
    dual_pairing,
    gen_path,
    holder_seminorm,
    load_noise_path,
    moment_scaling_fit,
    norm_V,
    save_noise_path,
    sine_mode,
    wiener_shift,
    zero_path,
)
from attractor_forge.noise import regularity_integral


@pytest.fixture
def small_grid():
    return SpatialGrid(16, 1.0)


def scalar_component(path, k=1):
    e = sine_mode(path.grid, k)
    return np.array([dual_pairing(Field(row.copy(), path.grid), e) for row in path.values])


class TestGenPath:
    def test_zero(self, small_grid):
        p = gen_path(NoiseSpec.zero(), small_grid, -2.0, 3.0, 0.5, seed=9)
        assert p.n_times == 11
        assert np.all(p.values == 0.0)

    def test_reproducible(self, small_grid):
        spec = NoiseSpec.fbm(0.3)
        a = gen_path(spec, small_grid, -1.0, 1.0, 0.125, seed=42)
        b = gen_path(spec, small_grid, -1.0, 1.0, 0.125, seed=42)
        assert np.array_equal(a.values, b.values)

    def test_anchor_at_zero(self, small_grid):
        p = gen_path(NoiseSpec.q_wiener(), small_grid, -1.0, 1.0, 0.25, seed=0)
        assert np.all(p.value_at(0.0).values == 0.0)

    def test_brownian_increment_variance(self, small_grid):
        # H = 1/2 single mode: scalar component variance tau per lag tau
        spec = NoiseSpec.fbm(0.5, mode_weights=(1.0,))
        incr = []
        for s in range(2000):
            p = gen_path(spec, small_grid, 0.0, 0.5, 0.25, seed=s)
            b = scalar_component(p)
            incr.extend(np.diff(b))
        var = np.var(incr)
        se = 0.25 * np.sqrt(2.0 / len(incr))
        assert abs(var - 0.25) < 4 * se

    def test_fbm_variance_t1(self, small_grid):
        spec = NoiseSpec.fbm(0.3, mode_weights=(1.0,))
        vals = [
            scalar_component(gen_path(spec, small_grid, 0.0, 1.0, 0.125, seed=s))[-1]
            for s in range(2000)
        ]
        var = np.var(vals)
        assert abs(var - 1.0) < 4 * np.sqrt(2.0 / 2000)

    def test_fbm_covariance_formula(self, small_grid):
        # E b(t) b(s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2 at (t, s) = (1, 0.5)
        for hurst in (0.3, 0.5, 0.8):
            expected = 0.5 * (1.0 + 0.5 ** (2 * hurst) - 0.5 ** (2 * hurst))
            spec = NoiseSpec.fbm(hurst, mode_weights=(1.0,))
            prods = []
            for s in range(2500):
                b = scalar_component(gen_path(spec, small_grid, 0.0, 1.0, 0.25, seed=s))
                prods.append(b[-1] * b[2])
            err = abs(np.mean(prods) - expected)
            se = np.std(prods) / np.sqrt(len(prods))
            assert err < 4.5 * se, hurst

    def test_dt_must_divide(self, small_grid):
        with pytest.raises(ConfigError):
            gen_path(NoiseSpec.zero(), small_grid, 0.0, 1.0, 0.3, seed=0)

    def test_weight_surrogate_enforced(self):
        with pytest.raises(ConfigError):
            NoiseSpec.q_wiener((1.0, 1.0))

    def test_negative_weight_rejected(self):
        with pytest.raises(ConfigError):
            NoiseSpec.q_wiener((1.0, -0.1))

    def test_levy_drift_only_increments(self, small_grid):
        m = Field(0.5 * sine_mode(small_grid, 1).values, small_grid)
        spec = NoiseSpec.levy(m)
        p = gen_path(spec, small_grid, -2.0, 2.0, 0.5, seed=0)
        incr = np.diff(p.values, axis=0)
        assert np.allclose(incr, 0.5 * m.values[None, :], atol=1e-12)


class TestWienerShift:
    def test_identity(self, small_grid):
        p = gen_path(NoiseSpec.q_wiener(), small_grid, -1.0, 1.0, 0.25, seed=1)
        q = wiener_shift(p, 0.0)
        assert np.array_equal(q.values, p.values - p.value_at(0.0).values)

    def test_flow_property(self, small_grid):
        p = gen_path(NoiseSpec.fbm(0.7), small_grid, -2.0, 2.0, 0.25, seed=2)
        twice = wiener_shift(wiener_shift(p, 0.5), 0.75)
        once = wiener_shift(p, 1.25)
        assert np.max(np.abs(twice.values - once.values)) < 1e-12
        assert twice.t_start == once.t_start

    def test_zero_at_origin(self, small_grid):
        p = gen_path(NoiseSpec.q_wiener(), small_grid, -1.0, 1.0, 0.25, seed=3)
        q = wiener_shift(p, 0.75)
        assert np.all(q.value_at(0.0).values == 0.0)

    def test_off_grid_rejected(self, small_grid):
        p = gen_path(NoiseSpec.q_wiener(), small_grid, -1.0, 1.0, 0.25, seed=3)
        with pytest.raises(AlignmentError):
            wiener_shift(p, 0.1)

    def test_outside_window_rejected(self, small_grid):
        p = gen_path(NoiseSpec.q_wiener(), small_grid, -1.0, 1.0, 0.25, seed=3)
        with pytest.raises(RangeError):
            wiener_shift(p, 1.5)

    def test_shift_preserves_increment_law(self, small_grid):
        # theta_t is measure preserving: increment stats of shifted ensembles
        # match the unshifted ones
        spec = NoiseSpec.q_wiener()
        raw, shifted = [], []
        e1 = sine_mode(small_grid, 1)
        for s in range(1500):
            p = gen_path(spec, small_grid, 0.0, 2.0, 0.5, seed=s)
            q = wiener_shift(p, 1.0)
            raw.append(dual_pairing(Field(p.values[1] - p.values[0], small_grid), e1))
            shifted.append(dual_pairing(Field(q.values[1] - q.values[0], small_grid), e1))
        gap = abs(np.var(raw) - np.var(shifted))
        se = np.sqrt(2.0 / 1500) * max(np.var(raw), np.var(shifted))
        assert gap < 4 * se


class TestStationarity:
    def test_qwiener(self, small_grid):
        rep = check_stationary_increments(
            NoiseSpec.q_wiener(), small_grid, lag=0.25, window_count=4, samples=2500, seed=0
        )
        assert rep.max_discrepancy < 4.0

    def test_zero(self, small_grid):
        rep = check_stationary_increments(
            NoiseSpec.zero(), small_grid, lag=0.5, window_count=3, samples=50, seed=0
        )
        assert rep.max_discrepancy == 0.0

    def test_levy_drift_only(self, small_grid):
        m = Field(sine_mode(small_grid, 1).values, small_grid)
        rep = check_stationary_increments(
            NoiseSpec.levy(m), small_grid, lag=0.5, window_count=3, samples=50, seed=0
        )
        assert rep.max_discrepancy == 0.0


class TestGrowth:
    def test_levy_lln(self, small_grid):
        m = Field(0.2 * sine_mode(small_grid, 1).values, small_grid)
        spec = NoiseSpec.levy(m, jump_rate=1.0, jump_mode=1, jump_law=("const", 0.1))
        p = gen_path(spec, small_grid, 0.0, 1000.0, 0.5, seed=6)
        rep = check_growth(p)
        assert rep.levy_rate_error is not None and rep.levy_rate_error < 0.05

    def test_zero(self, small_grid):
        p = zero_path(small_grid, 0.0, 120.0, 0.5)
        rep = check_growth(p)
        assert rep.max_quadratic_ratio == 0.0
        assert rep.terminal_linear_ratio == 0.0

    def test_fbm_subquadratic(self, small_grid):
        # ||N_t||_V / t^2 at t = 1000 is tiny for H = 0.7 paths
        spec = NoiseSpec.fbm(0.7)
        hits = 0
        for s in range(40):
            p = gen_path(spec, small_grid, 0.0, 1000.0, 1.0, seed=s)
            vnorm = norm_V(p.value_at(1000.0), TripleSpec.rde())
            if vnorm / 1000.0**2 < 1e-2:
                hits += 1
        assert hits >= 38

    def test_needs_long_window(self, small_grid):
        p = zero_path(small_grid, 0.0, 10.0, 0.5)
        with pytest.raises(RangeError):
            check_growth(p)


class TestMomentScaling:
    def test_qwiener_linear(self, small_grid):
        fit = moment_scaling_fit(
            NoiseSpec.q_wiener(), small_grid, 2.0, [0.01, 0.02, 0.05, 0.1], samples=800, seed=0
        )
        assert fit.slope == pytest.approx(1.0, rel=0.05)

    def test_fbm_h08(self, small_grid):
        fit = moment_scaling_fit(
            NoiseSpec.fbm(0.8), small_grid, 2.0, [0.01, 0.02, 0.05, 0.1], samples=800, seed=1
        )
        assert fit.slope == pytest.approx(1.6, rel=0.10)

    def test_lag_validation(self, small_grid):
        with pytest.raises(ConfigError):
            moment_scaling_fit(NoiseSpec.q_wiener(), small_grid, 2.0, [0.01, 0.02, 0.05], samples=10)
        with pytest.raises(ConfigError):
            moment_scaling_fit(
                NoiseSpec.q_wiener(), small_grid, 2.0, [0.01, 0.02, 0.04, 0.08], samples=10
            )


class TestHolder:
    def test_zero(self, small_grid):
        p = zero_path(small_grid, 0.0, 1.0, 0.01)
        assert holder_seminorm(p, 0.5, 0.0, 1.0) == 0.0

    def test_linear_drift_path(self, small_grid):
        ones = constant_field(1.0, small_grid)
        m = Field(ones.values / norm_V(ones, TripleSpec.rde()), small_grid)
        p = gen_path(NoiseSpec.levy(m), small_grid, 0.0, 1.0, 0.01, seed=0)
        # max of t^{1-b} over [0,1] is 1, attained at the full gap
        assert holder_seminorm(p, 0.5, 0.0, 1.0) == pytest.approx(1.0, rel=1e-9)

    def test_shift_consistency(self, small_grid):
        p = gen_path(NoiseSpec.fbm(0.4), small_grid, 0.0, 2.0, 0.05, seed=4)
        q = wiener_shift(p, 0.5)
        lhs = holder_seminorm(q, 0.4, 0.0, 1.0)
        rhs = holder_seminorm(p, 0.4, 0.5, 1.5)
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestRegularity:
    def test_s2_integral_finite(self, small_grid):
        for spec in (NoiseSpec.q_wiener(), NoiseSpec.fbm(0.3)):
            p = gen_path(spec, small_grid, -1.0, 0.0, 0.05, seed=8)
            val = regularity_integral(p, alpha=2.0)
            assert np.isfinite(val)


class TestPersistence:
    def test_roundtrip_fbm(self, small_grid):
        p = gen_path(NoiseSpec.fbm(0.35), small_grid, -1.0, 0.5, 0.25, seed=10)
        buf = io.StringIO()
        save_noise_path(p, buf)
        buf.seek(0)
        q = load_noise_path(buf)
        assert np.array_equal(q.values, p.values)
        assert q.spec.kind == "FBM" and q.spec.hurst == 0.35
        assert (q.t_start, q.t_end, q.dt, q.seed) == (p.t_start, p.t_end, p.dt, p.seed)
        assert q.grid == p.grid

    def test_roundtrip_levy(self, small_grid):
        m = Field(0.25 * sine_mode(small_grid, 2).values, small_grid)
        spec = NoiseSpec.levy(
            m, wiener_weights=(0.5, 0.5 / 64.0), jump_rate=2.0, jump_mode=2,
            jump_law=("normal", 0.1, 0.3),
        )
        p = gen_path(spec, small_grid, 0.0, 2.0, 0.25, seed=11)
        buf = io.StringIO()
        save_noise_path(p, buf)
        buf.seek(0)
        q = load_noise_path(buf)
        assert np.array_equal(q.values, p.values)
        assert q.spec.jump_rate == 2.0 and q.spec.jump_law == ("normal", 0.1, 0.3)
        assert np.array_equal(q.spec.levy_drift.values, m.values)
