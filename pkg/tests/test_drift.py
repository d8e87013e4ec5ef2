import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attractor_forge import (
    ConfigError,
    DriftSpec,
    Field,
    SpatialGrid,
    TripleSpec,
    apply_drift,
    certify,
    constant_field,
    discrete_eigenvalue,
    dual_norm_estimate,
    field_from_function,
    norm_S,
    norm_n,
    pair_drift,
    powerlaw_gap,
    predicted_lambda,
    sine_mode,
    sine_series_sampler,
    yosida_apply,
    zero_field,
)
from attractor_forge.drift import apply_drift_values, pair_drift_values
from attractor_forge.fields import lp_norm_values, norm_H_values


def dense_laplacian(grid):
    n, h = grid.n_interior, grid.spacing
    return (
        np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    ) / h**2


class TestApplyDrift:
    def test_rde_p2_is_linear_heat_member(self, fine_grid):
        # p = 2 selects A(v) = lap v + eta v; the degenerate -v reaction is
        # folded into eta so the canonical family member is pure diffusion
        v = sine_mode(fine_grid, 1)
        mu = discrete_eigenvalue(fine_grid, 1)
        a = apply_drift(DriftSpec.rde(p=2.0, eta=0.0), v)
        assert np.max(np.abs(a.values + mu * v.values)) < 1e-9

    def test_rde_eta_term(self, grid):
        v = sine_mode(grid, 2)
        mu = discrete_eigenvalue(grid, 2)
        a = apply_drift(DriftSpec.rde(p=2.0, eta=-0.5), v)
        assert np.allclose(a.values, -(mu + 0.5) * v.values, atol=1e-9)

    def test_pme_zero(self, grid):
        for r in (1.5, 2.0, 3.0):
            assert np.all(apply_drift(DriftSpec.pme(r), zero_field(grid)).values == 0.0)

    def test_pointwise_constant(self, grid):
        a = apply_drift(DriftSpec.pointwise(4.0), constant_field(2.0, grid))
        assert np.allclose(a.values, -8.0)

    def test_rde_p2_linearity(self, grid, rng):
        spec = DriftSpec.rde(p=2.0, eta=0.0)
        sampler = sine_series_sampler(grid)
        v1, v2 = sampler(rng), sampler(rng)
        both = apply_drift(spec, Field(v1.values + v2.values, grid))
        split = apply_drift(spec, v1).values + apply_drift(spec, v2).values
        assert np.max(np.abs(both.values - split)) < 1e-12 * max(1.0, np.max(np.abs(split)))

    def test_overflow_names_node(self):
        grid = SpatialGrid(4, 1.0)
        v = Field(np.array([1.0, 1e200, 1.0, 1.0]), grid)
        with pytest.raises(Exception) as exc:
            apply_drift(DriftSpec.pointwise(4.0), v)
        assert "node" in str(exc.value)

    def test_pme_dualization_matches_continuum_form(self, grid, rng):
        # <lap Phi(v) , w>_{V*,V} must equal -<Phi(v), w>_{L2} exactly
        spec = DriftSpec.pme(3.0)
        triple = TripleSpec.pme(3.0)
        sampler = sine_series_sampler(grid)
        v, w = sampler(rng), sampler(rng)
        a = apply_drift(spec, v)
        lhs = pair_drift(triple, a, w)
        phi = np.abs(v.values) ** 2 * v.values
        rhs = -grid.spacing * np.sum(phi * w.values)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


class TestPowerlawGap:
    def test_scalar_examples(self):
        assert powerlaw_gap(1.0, 0.0, 2.0) == (1.0, 0.25)
        lhs, rhs = powerlaw_gap(2.0, -1.0, 1.0)
        assert (lhs, rhs) == (15.0, 13.5)
        assert powerlaw_gap(3.0, 3.0, 2.5) == (0.0, 0.0)

    @given(
        k=st.integers(1, 8),
        r=st.floats(0.0, 4.0),
        seed=st.integers(0, 10_000),
    )
    @settings(max_examples=200, deadline=None)
    def test_inequality_random(self, k, r, seed):
        rng = np.random.default_rng(seed)
        a = rng.uniform(-10, 10, size=k)
        b = rng.uniform(-10, 10, size=k)
        lhs, rhs = powerlaw_gap(a, b, r)
        assert lhs >= rhs - 1e-12 * max(abs(lhs), rhs, 1.0)

    def test_negative_r_rejected(self):
        with pytest.raises(ValueError):
            powerlaw_gap(1.0, 0.0, -0.5)


class TestYosida:
    def test_eigenfunction(self, grid):
        v = sine_mode(grid, 1)
        mu = discrete_eigenvalue(grid, 1)
        for n in (1, 8, 64):
            t = yosida_apply(n, v)
            pred = mu / (1.0 + mu / n)
            assert np.max(np.abs(t.values - pred * v.values)) < 1e-10

    def test_zero(self, grid):
        assert np.all(yosida_apply(5, zero_field(grid)).values == 0.0)

    def test_quadratic_form_monotone_in_n(self, grid, rng):
        # spectral oracle: mu/(1+mu/n) increases in n mode by mode
        sampler = sine_series_sampler(grid)
        tri = TripleSpec.rde()
        for _ in range(20):
            v = sampler(rng)
            forms = [norm_n(n, v, tri) for n in (1, 2, 4, 8, 16, 32, 64, 128, 256)]
            assert np.all(np.diff(forms) >= -1e-12)

    def test_norm_n_converges_to_s_norm(self, grid):
        v = sine_mode(grid, 1)
        tri = TripleSpec.rde()
        target = norm_S(v, tri)
        vals = [norm_n(n, v, tri) for n in (16, 256, 4096)]
        errs = np.abs(np.array(vals) - target)
        assert np.all(np.diff(errs) < 0)
        assert vals[-1] == pytest.approx(target, rel=2e-3)

    def test_norm_n_zero(self, grid):
        assert norm_n(17, zero_field(grid), TripleSpec.pme(2.0)) == 0.0


class TestCertify:
    def test_pme_h2prime_lemma_constant(self, grid):
        # lambda = 2^{1-r} from the power-law gap applied in H^{-1}
        spec = DriftSpec.pme(3.0, lambda_=0.25)
        rep = certify(spec, TripleSpec.pme(3.0), "H2'", sine_series_sampler(grid), trials=1000, seed=4)
        assert rep.satisfied and rep.worst_margin >= 0.0
        assert rep.estimated_constants["lambda_hat"] >= 0.25

    def test_rde_h2_pure_dissipativity(self, grid):
        spec = DriftSpec.rde(p=2.0, eta=0.0, C=0.0)
        rep = certify(spec, TripleSpec.rde(), "H2", sine_series_sampler(grid), trials=400, seed=1)
        assert rep.satisfied
        # oracle: the discrete Laplacian quadratic form is negative semidefinite
        eigs = np.linalg.eigvalsh(dense_laplacian(grid))
        assert eigs.max() <= 1e-9

    def test_h2_identical_arguments(self, grid, rng):
        spec = DriftSpec.pme(2.0)
        tri = TripleSpec.pme(2.0)
        v = sine_series_sampler(grid)(rng)
        da = apply_drift_values(spec, v.values, grid) - apply_drift_values(spec, v.values, grid)
        assert pair_drift_values(tri, da, np.zeros(grid.n_interior), grid) == 0.0

    def test_h3_delta_positive_all_families(self, grid):
        cases = [
            (DriftSpec.pointwise(4.0), TripleSpec.pointwise(4.0)),
            (DriftSpec.rde(p=2.0), TripleSpec.rde()),
            (DriftSpec.pme(3.0), TripleSpec.pme(3.0)),
            (DriftSpec.ple(4.0, eta2=0.0), TripleSpec.ple(4.0)),
        ]
        for spec, tri in cases:
            rep = certify(spec, tri, "H3", sine_series_sampler(grid), trials=300, seed=2)
            assert rep.satisfied, (spec.family, rep.worst_margin)
            assert rep.estimated_constants["delta_hat"] > 0.0

    def test_h1_smooth_sampler(self, grid):
        spec = DriftSpec.rde(p=3.0, eta=-0.2)
        rep = certify(spec, TripleSpec.rde(3.0), "H1", sine_series_sampler(grid), trials=12, seed=3)
        assert rep.satisfied  # max continuity-probe jump below 1e-6

    def test_h5_cond1_rde_and_pme(self, grid):
        for spec, tri in (
            (DriftSpec.rde(p=2.0), TripleSpec.rde()),
            (DriftSpec.pme(3.0), TripleSpec.pme(3.0)),
        ):
            rep = certify(spec, tri, "H5-cond1", sine_series_sampler(grid), trials=60, seed=5)
            assert rep.worst_margin >= -rep.tolerance, spec.family

    def test_h2prime_requires_eta_sign(self, grid):
        spec = DriftSpec.pme(3.0, eta=0.5)
        with pytest.raises(ConfigError):
            certify(spec, TripleSpec.pme(3.0), "H2'", sine_series_sampler(grid), trials=10)

    def test_unknown_condition(self, grid):
        with pytest.raises(ConfigError):
            certify(DriftSpec.rde(), TripleSpec.rde(), "H9", sine_series_sampler(grid))

    def test_rde_lambda_hat_is_spectral_gap(self, grid):
        rep = certify(
            DriftSpec.rde(p=2.0), TripleSpec.rde(), "H2'", sine_series_sampler(grid),
            trials=500, seed=6,
        )
        lam_pred = predicted_lambda(DriftSpec.rde(p=2.0), grid)  # 2 mu_1
        lam_hat = rep.estimated_constants["lambda_hat"]
        assert rep.satisfied
        assert lam_hat >= lam_pred - 1e-9
        assert lam_hat <= lam_pred * 1.05

    def test_pointwise_scalar_lambda(self, scalar_grid):
        # the 2h = 1 grid reproduces the scalar constant lambda = 1/2 for p=4
        assert predicted_lambda(DriftSpec.pointwise(4.0), scalar_grid) == pytest.approx(0.5)


class TestDualNormEstimate:
    def test_zero_drift_value(self, grid):
        est = dual_norm_estimate(DriftSpec.rde(p=2.0), TripleSpec.rde(), zero_field(grid))
        assert est == 0.0

    def test_pointwise_exact_dual_norm(self, grid, rng):
        # oracle: for V = L^p the dual norm of the representation is the
        # L^{p/(p-1)} quadrature norm, attained at the conjugate direction
        p = 4.0
        spec = DriftSpec.pointwise(p)
        tri = TripleSpec.pointwise(p)
        v = sine_series_sampler(grid)(rng)
        a = apply_drift_values(spec, v.values, grid)
        oracle = float(lp_norm_values(a, grid, p / (p - 1.0)))
        est = dual_norm_estimate(spec, tri, v, directions=1000, seed=11)
        assert est <= oracle * (1.0 + 1e-9)
        assert est >= 0.95 * oracle

    def test_ratio_scale_free(self, grid, rng):
        spec = DriftSpec.pointwise(3.0)
        tri = TripleSpec.pointwise(3.0)
        v = sine_series_sampler(grid)(rng)
        a = apply_drift_values(spec, v.values, grid)
        phi = sine_series_sampler(grid)(rng).values
        from attractor_forge.fields import norm_V_values

        r1 = pair_drift_values(tri, a, phi, grid) / float(norm_V_values(phi, grid, tri))
        r2 = pair_drift_values(tri, a, 7.5 * phi, grid) / float(
            norm_V_values(7.5 * phi, grid, tri)
        )
        assert r1 == pytest.approx(r2, rel=1e-12)


class TestH2PrimeInvariant:
    def test_pme_margin_bulk(self, grid):
        # 2 <A(v1)-A(v2), v1-v2>_{H^-1} <= -2^{1-r} ||d||_{H^-1}^{r+1}
        r = 3.0
        spec = DriftSpec.pme(r)
        tri = TripleSpec.pme(r)
        sampler = sine_series_sampler(grid)
        rng = np.random.default_rng(17)
        lam, beta = 2.0 ** (1.0 - r), r + 1.0
        for _ in range(300):
            v1, v2 = sampler(rng), sampler(rng)
            d = v1.values - v2.values
            da = apply_drift_values(spec, v1.values, grid) - apply_drift_values(spec, v2.values, grid)
            lhs = 2.0 * pair_drift_values(tri, da, d, grid)
            dh = float(norm_H_values(d, grid, tri))
            scale = max(abs(lhs), lam * dh**beta, 1e-30)
            assert lhs <= -lam * dh**beta + 1e-10 * scale
