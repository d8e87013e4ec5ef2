"""Monotone drift operators and numerical certification of their structure.

Four families, matching the example triples in :mod:`attractor_forge.fields`:

  POINTWISE(p, eta)            A(v) = -|v|^{p-2} v + eta v
  RDE(p, eta)                  A(v) = lap v - |v|^{p-2} v + eta v
  PME(r, eta)                  A(v) = lap(|v|^{r-1} v) + eta v
  PLE(p, p_tilde, eta1, eta2)  A(v) = (|v'|^{p-2} v')' - eta1 |v|^{pt-2} v + eta2 v

``apply_drift`` returns the raw difference-stencil field.  For RDE, PLE and
POINTWISE the h-weighted L^2 pairing of that field against a test field w is
exactly the discrete V*/V dualization; for PME the dualization is the
H^{-1} inner product, i.e. the test field is passed through (-lap)^{-1}
first (``pair_drift`` does this).

One deliberate special case: RDE with p == 2 is the *linear heat member*
A(v) = lap v + eta v.  At p = 2 the power reaction degenerates to -v, which
is just an eta shift; folding it away keeps "RDE p=2, eta=0" the canonical
linear diffusion with contraction rate equal to the discrete principal
eigenvalue, which is what every downstream rate check calibrates against.

Certification evaluates each structural inequality on random field pairs and
reports the worst signed margin (>= 0 means the inequality held) together
with fitted constants.  Trials use seeds derived from (seed, trial index), so
any parallel evaluation order reproduces the serial result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigError, InternalError, InvalidFieldError
from .fields import (
    Field,
    SpatialGrid,
    TripleSpec,
    apply_laplacian,
    discrete_eigenvalue,
    forward_differences,
    norm_H_values,
    norm_S_values,
    norm_V_values,
    quad_integral,
    solve_neg_laplacian,
    solve_resolvent,
)

_FAMILIES = ("POINTWISE", "RDE", "PME", "PLE")
_CONDITIONS = ("H1", "H2", "H2'", "H3", "H4", "H5-cond1", "H5-norms")


@dataclass(frozen=True)
class DriftSpec:
    """A drift family with its exponents and declared structural constants.

    ``eta`` is the linear low-order coefficient (eta2 for PLE); ``eta1`` is
    the PLE power-reaction coefficient.  Declared constants that are left as
    None are replaced by family defaults (delta, K, C) or by fitted values
    (lambda_) during certification.
    """

    family: str
    p: float = 2.0
    r: float = 2.0
    p_tilde: float = 2.0
    eta: float = 0.0
    eta1: float = 0.0
    delta: float | None = None
    K: float | None = None
    C: float | None = None
    lambda_: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown drift family {self.family!r}")
        if self.family == "POINTWISE" and not self.p >= 2.0:
            raise ValueError("POINTWISE requires p >= 2")
        if self.family == "RDE" and not self.p >= 1.0:
            raise ValueError("RDE requires p >= 1")
        if self.family == "PME" and not self.r > 1.0:
            raise ValueError("PME requires r > 1")
        if self.family == "PLE":
            if not self.p > 2.0:
                raise ValueError("PLE requires p > 2")
            if not 1.0 <= self.p_tilde <= self.p:
                raise ValueError("PLE requires 1 <= p_tilde <= p")
            if self.eta1 < 0.0:
                raise ValueError("PLE requires eta1 >= 0")

    @classmethod
    def pointwise(cls, p: float, eta: float = 0.0, **kw) -> "DriftSpec":
        return cls("POINTWISE", p=p, eta=eta, **kw)

    @classmethod
    def rde(cls, p: float = 2.0, eta: float = 0.0, **kw) -> "DriftSpec":
        return cls("RDE", p=p, eta=eta, **kw)

    @classmethod
    def pme(cls, r: float, eta: float = 0.0, **kw) -> "DriftSpec":
        return cls("PME", r=r, eta=eta, **kw)

    @classmethod
    def ple(cls, p: float, p_tilde: float = 2.0, eta1: float = 0.0, eta2: float = 0.0, **kw):
        return cls("PLE", p=p, p_tilde=p_tilde, eta1=eta1, eta=eta2, **kw)

    @property
    def alpha(self) -> float:
        if self.family == "RDE":
            return 2.0
        if self.family == "PME":
            return self.r + 1.0
        return self.p

    @property
    def beta(self) -> float:
        """Strong-monotonicity exponent convention per family."""
        if self.family == "POINTWISE":
            return self.p
        if self.family == "RDE":
            return 2.0
        if self.family == "PME":
            return self.r + 1.0
        return self.p

    @property
    def strongly_monotone(self) -> bool:
        """Whether the eta sign convention for (H2') is met."""
        return self.eta <= 0.0

    def triple(self) -> TripleSpec:
        if self.family == "PME":
            return TripleSpec.pme(self.r)
        return TripleSpec(self.family, self.p)


def apply_drift_values(spec: DriftSpec, values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    if spec.family == "POINTWISE":
        if spec.p == 2.0:
            return (spec.eta - 1.0) * values
        return -np.abs(values) ** (spec.p - 2.0) * values + spec.eta * values
    if spec.family == "RDE":
        out = apply_laplacian(values, grid) + spec.eta * values
        if spec.p != 2.0:
            out -= np.abs(values) ** (spec.p - 2.0) * values
        return out
    if spec.family == "PME":
        return apply_laplacian(np.abs(values) ** (spec.r - 1.0) * values, grid) + spec.eta * values
    # PLE
    g = forward_differences(values, grid)
    flux = np.abs(g) ** (spec.p - 2.0) * g
    out = np.diff(flux, axis=-1) / grid.spacing
    if spec.eta1 != 0.0:
        out -= spec.eta1 * np.abs(values) ** (spec.p_tilde - 2.0) * values
    return out + spec.eta * values


def apply_drift(spec: DriftSpec, v: Field) -> Field:
    """Evaluate A(v) as the raw stencil field representing the dual element."""
    with np.errstate(over="ignore", invalid="ignore"):
        out = apply_drift_values(spec, v.values, v.grid)
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise InvalidFieldError(f"drift evaluation overflowed at node {bad}")
    return Field(out, v.grid)


def pair_drift_values(
    triple: TripleSpec, a_values: np.ndarray, w_values: np.ndarray, grid: SpatialGrid
) -> float:
    """The V*/V dualization of a raw drift field against a test field."""
    if triple.kind == "PME":
        w_values = solve_neg_laplacian(w_values, grid)
    return float(quad_integral(a_values * w_values, grid))


def pair_drift(triple: TripleSpec, a: Field, w: Field) -> float:
    return pair_drift_values(triple, a.values, w.values, a.grid)


def drift_jacobian_banded(spec: DriftSpec, values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Tridiagonal Jacobian of the raw stencil in solve_banded (1,1) layout.

    Power nonlinearities use the regularization (v^2 + eps^2)^{(q-2)/2} so the
    Jacobian stays finite at v = 0; residuals elsewhere keep the exact powers.
    """
    eps2 = 1e-20
    n = grid.n_interior
    h = grid.spacing
    ab = np.zeros((3, n))
    if spec.family == "POINTWISE":
        if spec.p == 2.0:
            ab[1, :] = spec.eta - 1.0
        else:
            ab[1, :] = -(spec.p - 1.0) * (values**2 + eps2) ** ((spec.p - 2.0) / 2.0) + spec.eta
        return ab
    if spec.family == "RDE":
        ab[0, 1:] = 1.0 / h**2
        ab[2, :-1] = 1.0 / h**2
        ab[1, :] = -2.0 / h**2 + spec.eta
        if spec.p != 2.0:
            ab[1, :] -= (spec.p - 1.0) * (values**2 + eps2) ** ((spec.p - 2.0) / 2.0)
        return ab
    if spec.family == "PME":
        dphi = spec.r * (values**2 + eps2) ** ((spec.r - 1.0) / 2.0)
        ab[0, 1:] = dphi[1:] / h**2
        ab[2, :-1] = dphi[:-1] / h**2
        ab[1, :] = -2.0 * dphi / h**2 + spec.eta
        return ab
    # PLE
    g = forward_differences(values, grid)
    dpsi = (spec.p - 1.0) * (g**2 + eps2) ** ((spec.p - 2.0) / 2.0)
    ab[0, 1:] = dpsi[1:-1] / h**2
    ab[2, :-1] = dpsi[1:-1] / h**2
    ab[1, :] = -(dpsi[1:] + dpsi[:-1]) / h**2 + spec.eta
    if spec.eta1 != 0.0:
        ab[1, :] -= spec.eta1 * (spec.p_tilde - 1.0) * (values**2 + eps2) ** (
            (spec.p_tilde - 2.0) / 2.0
        )
    return ab


def jacobian_is_diagonal(spec: DriftSpec) -> bool:
    return spec.family == "POINTWISE"


# ---------------------------------------------------------------------------
# power-law monotonicity gap and Yosida machinery
# ---------------------------------------------------------------------------


def powerlaw_gap(a, b, r: float) -> tuple[float, float]:
    """Both sides of <|a|^r a - |b|^r b, a - b> >= 2^{-r} |a - b|^{r+2}
    in Euclidean space (scalars or same-length vectors)."""
    if r < 0.0:
        raise ValueError("r must be nonnegative")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    d = a - b
    lhs = float(np.dot(na**r * a - nb**r * b, d))
    rhs = float(2.0 ** (-r) * np.linalg.norm(d) ** (r + 2.0))
    return lhs, rhs


def yosida_apply(n: int, v: Field) -> Field:
    """T_n v = n (v - w) with (I - lap/n) w = v, the bounded Laplacian proxy."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    w = solve_resolvent(v.values, v.grid, n)
    return Field(n * (v.values - w), v.grid)


def norm_n(n: int, v: Field, triple: TripleSpec) -> float:
    """sqrt(<v, T_n v>) in the triple's H-geometry (L^2, or H^{-1} for PME).

    For PME the geometry collapses nicely: <v, T_n v>_{H^{-1}} equals
    <v, (I - lap/n)^{-1} v>_{L^2}.
    """
    if triple.kind == "PME":
        quad = float(quad_integral(v.values * solve_resolvent(v.values, v.grid, n), v.grid))
    else:
        t = yosida_apply(n, v)
        quad = float(quad_integral(v.values * t.values, v.grid))
    scale = float(quad_integral(np.square(v.values), v.grid)) + 1e-300
    if quad < -1e-12 * scale:
        raise InternalError(f"Yosida quadratic form is indefinite: {quad}")
    return math.sqrt(max(quad, 0.0))


# ---------------------------------------------------------------------------
# samplers and certification
# ---------------------------------------------------------------------------


def sine_series_sampler(grid: SpatialGrid, modes: int | None = None, decay: float = 2.0):
    """Random smooth fields sum_k a_k sin(k pi x / L), a_k ~ U[-1,1] k^{-decay}.

    The default sampler used for certification trials; fields land in every
    discrete V space with O(1) norms.
    """
    K = min(grid.n_interior, 32) if modes is None else modes
    x = grid.nodes
    basis = np.sin(np.arange(1, K + 1)[:, None] * np.pi * x[None, :] / grid.length)
    weights = np.arange(1, K + 1, dtype=float) ** (-decay)

    def sample(rng: np.random.Generator) -> Field:
        a = rng.uniform(-1.0, 1.0, size=K) * weights
        return Field(a @ basis, grid)

    return sample


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


@dataclass
class ConditionReport:
    """Outcome of a structural-condition certification run."""

    condition: str
    trials: int
    worst_margin: float
    tolerance: float
    estimated_constants: dict = dc_field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.worst_margin >= -self.tolerance


def default_constants(spec: DriftSpec, grid: SpatialGrid) -> dict:
    """Family defaults for the declared (delta, K, C) when not pinned.

    Derived from the exact algebra of each family on a length-L interval;
    see the per-family branches.  All are valid for the discrete operators.
    """
    L = grid.length
    if spec.family == "POINTWISE":
        # 2<A v, v> = -2 ||v||_p^p + 2 eta ||v||_2^2
        return {"delta": 2.0, "K": 2.0 * max(spec.eta, 0.0), "C": 0.0}
    if spec.family == "RDE":
        # 2<A v, v> <= -2 E(v) + 2 eta ||v||^2; with ||v||_V^2 = E + ||v||_H^2
        # that is 2<A v, v> + 2 ||v||_V^2 <= (2 + 2 eta) ||v||_H^2.
        return {"delta": 2.0, "K": 2.0 + 2.0 * spec.eta, "C": 0.0}
    if spec.family == "PME":
        return {"delta": 2.0, "K": 2.0 * max(spec.eta, 0.0), "C": 0.0}
    # PLE: discrete Poincare gives int |v|^p <= L^p int |v'|^p.
    delta = 2.0 / (1.0 + L**spec.p)
    return {"delta": delta, "K": 2.0 * max(spec.eta, 0.0), "C": 0.0}


def predicted_lambda(spec: DriftSpec, grid: SpatialGrid) -> float:
    """A provably valid strong-monotonicity rate for the discrete operator.

    POINTWISE/PME come from the power-law gap inequality (with the volume
    factor from the norm comparison); RDE/PLE come from the spectral gap of
    the discrete Laplacian.
    """
    vol = grid.n_interior * grid.spacing
    mu1 = discrete_eigenvalue(grid, 1)
    if spec.family == "POINTWISE":
        return 2.0 ** (3.0 - spec.p) * vol ** (1.0 - spec.p / 2.0)
    if spec.family == "PME":
        return 2.0 ** (1.0 - spec.r)
    if spec.family == "RDE":
        return 2.0 * mu1
    # PLE: power-mean comparison of the gradient L^p and L^2 forms.
    return 2.0 ** (3.0 - spec.p) * vol ** (1.0 - spec.p / 2.0) * mu1 ** (spec.p / 2.0)


def certify(
    spec: DriftSpec,
    triple: TripleSpec,
    cond: str,
    sampler,
    trials: int = 1000,
    seed: int = 0,
    rel_tol: float = 1e-10,
) -> ConditionReport:
    """Evaluate one structural condition on random trials.

    Margins are signed so that >= 0 means the defining inequality held on
    that trial; the report keeps the worst one and an absolute tolerance
    rel_tol * (largest magnitude encountered).
    """
    if cond not in _CONDITIONS:
        raise ConfigError(f"unknown condition {cond!r}")
    if spec.triple().kind != triple.kind:
        raise ConfigError(f"drift family {spec.family} does not match triple {triple.kind}")
    if cond == "H2'" and not spec.strongly_monotone:
        raise ConfigError("H2' requires the nonpositive-eta convention")

    probe = sampler(_trial_rng(seed, 0))
    grid = probe.grid
    defaults = default_constants(spec, grid)

    if cond == "H1":
        return _certify_h1(spec, triple, sampler, trials, seed)
    if cond == "H2":
        return _certify_h2(spec, triple, sampler, trials, seed, rel_tol)
    if cond == "H2'":
        return _certify_h2prime(spec, triple, sampler, trials, seed, rel_tol, grid)
    if cond == "H3":
        return _certify_h3(spec, triple, sampler, trials, seed, rel_tol, defaults)
    if cond == "H4":
        return _certify_h4(spec, triple, sampler, trials, seed, rel_tol)
    if cond == "H5-cond1":
        return _certify_h5_cond1(spec, triple, sampler, trials, seed, rel_tol)
    return _certify_h5_norms(spec, triple, sampler, trials, seed, rel_tol)


def _certify_h1(spec, triple, sampler, trials, seed) -> ConditionReport:
    # Hemicontinuity probe: s -> <A(v1 + s v2), v> sampled on a 101-point
    # grid over [-1, 1]; at each anchor the move of the pairing under a
    # machine-scale nudge of s measures the (relative) continuity modulus.
    s_grid = np.linspace(-1.0, 1.0, 101)
    delta_s = 1e-9
    worst = 0.0
    for i in range(trials):
        rng = _trial_rng(seed, i)
        v1, v2, v = sampler(rng), sampler(rng), sampler(rng)
        grid = v1.grid

        def g(s):
            a = apply_drift_values(spec, v1.values + s * v2.values, grid)
            return pair_drift_values(triple, a, v.values, grid)

        vals = np.array([g(s) for s in s_grid])
        scale = 1.0 + np.max(np.abs(vals))
        jumps = np.array([abs(g(s + delta_s) - gv) for s, gv in zip(s_grid, vals)])
        worst = max(worst, float(np.max(jumps) / scale))
    return ConditionReport("H1", trials, -worst, 1e-6, {"max_jump": worst})


def _certify_h2(spec, triple, sampler, trials, seed, rel_tol) -> ConditionReport:
    # 2 <A(v1) - A(v2), v1 - v2>  <=  C ||v1 - v2||_H^2
    C = spec.C if spec.C is not None else 2.0 * max(spec.eta, 0.0)
    worst = np.inf
    scale = 0.0
    c_hat = -np.inf
    for i in range(trials):
        rng = _trial_rng(seed, i)
        v1, v2 = sampler(rng), sampler(rng)
        grid = v1.grid
        d = v1.values - v2.values
        da = apply_drift_values(spec, v1.values, grid) - apply_drift_values(spec, v2.values, grid)
        lhs = 2.0 * pair_drift_values(triple, da, d, grid)
        dh2 = float(norm_H_values(d, grid, triple)) ** 2
        worst = min(worst, C * dh2 - lhs)
        scale = max(scale, abs(lhs), dh2)
        if dh2 > 0:
            c_hat = max(c_hat, lhs / dh2)
    return ConditionReport(
        "H2", trials, float(worst), rel_tol * scale, {"C": C, "C_hat": float(c_hat)}
    )


def _certify_h2prime(spec, triple, sampler, trials, seed, rel_tol, grid) -> ConditionReport:
    # 2 <A(v1) - A(v2), v1 - v2>  <=  -lambda ||v1 - v2||_H^beta
    beta = spec.beta
    lam = spec.lambda_ if spec.lambda_ is not None else predicted_lambda(spec, grid)
    worst = np.inf
    scale = 0.0
    lam_hat = np.inf
    for i in range(trials):
        rng = _trial_rng(seed, i)
        v1, v2 = sampler(rng), sampler(rng)
        d = v1.values - v2.values
        da = apply_drift_values(spec, v1.values, v1.grid) - apply_drift_values(
            spec, v2.values, v1.grid
        )
        lhs = 2.0 * pair_drift_values(triple, da, d, v1.grid)
        dhb = float(norm_H_values(d, v1.grid, triple)) ** beta
        worst = min(worst, -lam * dhb - lhs)
        scale = max(scale, abs(lhs), lam * dhb)
        if dhb > 0:
            lam_hat = min(lam_hat, -lhs / dhb)
    constants = {"lambda": lam, "lambda_hat": float(lam_hat), "beta": beta}
    return ConditionReport("H2'", trials, float(worst), rel_tol * scale, constants)


def _certify_h3(spec, triple, sampler, trials, seed, rel_tol, defaults) -> ConditionReport:
    # 2 <A(v), v> + delta ||v||_V^alpha  <=  C + K ||v||_H^2
    delta = spec.delta if spec.delta is not None else defaults["delta"]
    K = spec.K if spec.K is not None else defaults["K"]
    C = spec.C if spec.C is not None else defaults["C"]
    alpha = spec.alpha
    worst = np.inf
    scale = 0.0
    delta_hat = np.inf
    for i in range(trials):
        rng = _trial_rng(seed, i)
        v = sampler(rng)
        grid = v.grid
        a = apply_drift_values(spec, v.values, grid)
        two_av = 2.0 * pair_drift_values(triple, a, v.values, grid)
        va = float(norm_V_values(v.values, grid, triple)) ** alpha
        h2 = float(norm_H_values(v.values, grid, triple)) ** 2
        worst = min(worst, C + K * h2 - two_av - delta * va)
        scale = max(scale, abs(two_av), delta * va, abs(K) * h2 + abs(C))
        if va > 0:
            delta_hat = min(delta_hat, (C + K * h2 - two_av) / va)
    constants = {"delta": delta, "K": K, "C": C, "delta_hat": float(delta_hat)}
    return ConditionReport("H3", trials, float(worst), rel_tol * scale, constants)


def _certify_h4(spec, triple, sampler, trials, seed, rel_tol) -> ConditionReport:
    # ||A(v)||_{V*} <= C (1 + ||v||_V^{alpha-1}), with the dual norm replaced
    # by its direction-maximization lower bound; margins are exact only
    # against that lower bound, so the fitted C_hat is itself a lower bound.
    alpha = spec.alpha
    declared = spec.C
    worst = np.inf
    scale = 0.0
    c_hat = 0.0
    rows = []
    for i in range(trials):
        rng = _trial_rng(seed, i)
        v = sampler(rng)
        est = dual_norm_estimate(spec, triple, v, directions=64, seed=seed + 7919 * (i + 1))
        growth = 1.0 + float(norm_V_values(v.values, v.grid, triple)) ** (alpha - 1.0)
        rows.append((est, growth))
        c_hat = max(c_hat, est / growth)
    C = declared if declared is not None else c_hat
    for est, growth in rows:
        worst = min(worst, C * growth - est)
        scale = max(scale, est, C * growth)
    constants = {"C": C, "C_hat": float(c_hat)}
    return ConditionReport("H4", trials, float(worst), rel_tol * scale, constants)


_H5_LADDER = (1, 2, 4, 8, 16, 32, 64, 128, 256)


def _pair_with_tn(spec, triple, v_values, grid, n) -> tuple[float, float]:
    """(2 <A(v), T_n v>, ||v||_n^2) in the triple's geometry."""
    a = apply_drift_values(spec, v_values, grid)
    resolvent_v = solve_resolvent(v_values, grid, n)
    tn_v = n * (v_values - resolvent_v)
    if triple.kind == "PME":
        # <., .>_{H^{-1}}: (-lap)^{-1} T_n = (I - lap/n)^{-1}
        lhs = 2.0 * float(quad_integral(a * resolvent_v, grid))
        vn2 = float(quad_integral(v_values * resolvent_v, grid))
    else:
        lhs = 2.0 * float(quad_integral(a * tn_v, grid))
        vn2 = float(quad_integral(v_values * tn_v, grid))
    return lhs, vn2


def _certify_h5_cond1(spec, triple, sampler, trials, seed, rel_tol) -> ConditionReport:
    # 2 <A(v), T_n v> <= C (||v||_n^2 + 1), uniformly over the n ladder.
    rows = []
    for i in range(trials):
        rng = _trial_rng(seed, i)
        v = sampler(rng)
        for n in _H5_LADDER:
            rows.append(_pair_with_tn(spec, triple, v.values, v.grid, n))
    c_hat = max(0.0, max(lhs / (vn2 + 1.0) for lhs, vn2 in rows))
    C = spec.C if spec.C is not None else c_hat
    worst = min(C * (vn2 + 1.0) - lhs for lhs, vn2 in rows)
    scale = max(max(abs(lhs), vn2 + 1.0) for lhs, vn2 in rows)
    constants = {"C": C, "C_hat": c_hat}
    return ConditionReport("H5-cond1", trials, float(worst), rel_tol * scale, constants)


def _certify_h5_norms(spec, triple, sampler, trials, seed, rel_tol) -> ConditionReport:
    # ||v||_n nondecreasing in n and bounded by ||v||_S; the terminal ratio
    # ||v||_256 / ||v||_S is recorded (its distance to 1 is the Yosida
    # truncation error, spectrally 1/(1 + mu/n) per mode).
    worst = np.inf
    scale = 0.0
    ratio_min = np.inf
    for i in range(trials):
        rng = _trial_rng(seed, i)
        v = sampler(rng)
        norms = [norm_n(n, v, triple) for n in _H5_LADDER]
        ns = float(norm_S_values(v.values, v.grid, triple))
        for a, b in zip(norms[:-1], norms[1:]):
            worst = min(worst, b - a)
        worst = min(worst, ns - norms[-1])
        scale = max(scale, ns)
        if ns > 0:
            ratio_min = min(ratio_min, norms[-1] / ns)
    constants = {"norm_ratio_min": float(ratio_min)}
    return ConditionReport("H5-norms", trials, float(worst), rel_tol * scale, constants)


def dual_norm_estimate(
    spec: DriftSpec,
    triple: TripleSpec,
    v: Field,
    directions: int = 256,
    seed: int = 0,
) -> float:
    """Lower bound on ||A(v)||_{V*} = sup <A(v), phi> / ||phi||_V.

    Candidates: the coordinate basis, random sine-series fields, and the
    analytic conjugate direction sign(a) |a|^{1/(p-1)} (exact maximizer for
    the POINTWISE L^p triple, a good candidate elsewhere).
    """
    grid = v.grid
    a = apply_drift_values(spec, v.values, grid)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0xD0A1])))
    sampler = sine_series_sampler(grid)
    candidates = [np.eye(grid.n_interior)[i] for i in range(grid.n_interior)]
    candidates.extend(sampler(rng).values for _ in range(directions))
    q = triple.alpha  # V-norm exponent (2 for RDE)
    if q > 1.0:
        conj = np.abs(a) ** (1.0 / (q - 1.0)) * np.sign(a)
        if np.any(conj):
            candidates.append(conj)
    best = 0.0
    for phi in candidates:
        nv = float(norm_V_values(phi, grid, triple))
        if nv <= 0.0:
            continue
        best = max(best, abs(pair_drift_values(triple, a, phi, grid)) / nv)
    return best


# ---------------------------------------------------------------------------
# certified constants bundle consumed by the flow/attractor modules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriftConstants:
    """Constants extracted from certification, the single source of truth
    for energy diagnostics and rate/absorption estimates."""

    alpha: float
    delta: float
    K: float
    C_coer: float
    C_grow: float
    lambda_: float | None = None
    beta: float | None = None

    @property
    def delta0(self) -> float:
        return 2.0 ** (-self.alpha) * self.delta

    @property
    def f_constant(self) -> float:
        """Merged constant C* in f_t = 2 K+ ||N||_H^2 + C* (||N||_V^alpha + 1).

        Young's inequality applied to the growth term
        2 C4 ||u||_V^{alpha-1} ||N||_V <= (delta/2) ||u||_V^alpha + C_Y ||N||_V^alpha
        with the explicit weighted-Young constant.
        """
        alpha, delta, c4 = self.alpha, self.delta, self.C_grow
        if c4 <= 0.0:
            return self.C_coer
        eps = alpha * delta / (4.0 * c4 * max(alpha - 1.0, 1e-12))
        c_young = 2.0 * c4 / (alpha * eps ** (alpha - 1.0))
        return max(self.C_coer + 2.0 * c4, c4 + c_young + delta / 2.0)

    @property
    def K_plus(self) -> float:
        return max(self.K, 0.0)


def constants_from_reports(
    spec: DriftSpec,
    h3: ConditionReport,
    h4: ConditionReport,
    h2prime: ConditionReport | None = None,
) -> DriftConstants:
    lam = beta = None
    if h2prime is not None:
        # the margin-validated rate, not the sample minimum: this is the
        # constant the certification actually checked the inequality with
        lam = h2prime.estimated_constants.get("lambda")
        beta = h2prime.estimated_constants.get("beta")
        if lam is not None and not h2prime.satisfied:
            lam = None
    return DriftConstants(
        alpha=spec.alpha,
        delta=h3.estimated_constants["delta_hat"],
        K=h3.estimated_constants["K"],
        C_coer=h3.estimated_constants["C"],
        C_grow=h4.estimated_constants["C_hat"],
        lambda_=lam,
        beta=beta,
    )
