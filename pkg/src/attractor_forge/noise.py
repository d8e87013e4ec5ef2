"""Two-sided stationary-increment noise paths on the spatial grid.

A path is a table of field snapshots N(t_j) on a uniform time grid.  All
kinds expand in the sine modes e_k(x) = sqrt(2) sin(k pi x / L):

  ZERO      identically zero
  QWIENER   sum_k sqrt(lambda_k) beta_k(t) e_k, independent Brownian beta_k
  FBM       same with fractional Brownian scalar components (Hurst H)
  LEVY      drift field * t + Q-Wiener part + compound Poisson jumps along
            one mode (finite activity only)

Scalar fractional components are synthesized by exact circulant embedding of
fractional Gaussian noise (Davies-Harte); if the embedding is not PSD the
generator falls back to a dense covariance Cholesky (<= 2048 steps) and
records the fallback on the path.  Two-sided paths glue two independent
one-sided paths at t = 0 with N_0 = 0; this is exact for Brownian components
and an approximation for fractional ones (stationarity tests for FBM are run
within one side).

Generation is deterministic given (spec, grid, window, seed): every scalar
component draws from its own generator seeded by (seed, component tags).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import AlignmentError, ConfigError, InvalidFieldError, RangeError
from .fields import Field, SpatialGrid, TripleSpec, norm_V_values

_KINDS = ("ZERO", "QWIENER", "FBM", "LEVY")
_DEFAULT_WEIGHTS = tuple(float(k) ** -8.0 for k in range(1, 9))


def _check_weights(weights: tuple[float, ...]) -> None:
    if any(w < 0.0 for w in weights):
        raise ConfigError("mode weights must be nonnegative")
    if not weights:
        return
    ref = weights[0] if weights[0] > 0.0 else max(weights)
    for k, w in enumerate(weights, start=1):
        if w > ref * float(k) ** -6.0 * (1.0 + 1e-12):
            raise ConfigError(
                f"mode weight {k} violates the k^-6 decay surrogate (regularity)"
            )


@dataclass(frozen=True)
class NoiseSpec:
    """Law of the driving noise; see module docstring for the kinds."""

    kind: str
    mode_weights: tuple[float, ...] = _DEFAULT_WEIGHTS
    hurst: float = 0.5
    levy_drift: Field | None = None
    jump_rate: float = 0.0
    jump_mode: int = 1
    jump_law: tuple = ("const", 0.0)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.kind == "FBM" and not 0.0 < self.hurst < 1.0:
            raise ConfigError("Hurst parameter must lie in (0, 1)")
        if self.kind == "LEVY":
            if not np.isfinite(self.jump_rate) or self.jump_rate < 0.0:
                raise ConfigError("jump rate must be finite and nonnegative")
            if self.jump_law[0] not in ("const", "normal", "exp"):
                raise ConfigError(f"unknown jump law {self.jump_law[0]!r}")
        _check_weights(tuple(self.mode_weights))

    @classmethod
    def zero(cls) -> "NoiseSpec":
        return cls("ZERO", mode_weights=())

    @classmethod
    def q_wiener(cls, mode_weights=None, modes: int = 8) -> "NoiseSpec":
        w = _default_weights(mode_weights, modes)
        return cls("QWIENER", mode_weights=w)

    @classmethod
    def fbm(cls, hurst: float, mode_weights=None, modes: int = 8) -> "NoiseSpec":
        w = _default_weights(mode_weights, modes)
        return cls("FBM", mode_weights=w, hurst=hurst)

    @classmethod
    def levy(
        cls,
        drift: Field,
        wiener_weights=(),
        jump_rate: float = 0.0,
        jump_mode: int = 1,
        jump_law: tuple = ("const", 0.0),
    ) -> "NoiseSpec":
        return cls(
            "LEVY",
            mode_weights=tuple(wiener_weights),
            levy_drift=drift,
            jump_rate=jump_rate,
            jump_mode=jump_mode,
            jump_law=jump_law,
        )

    @property
    def mean_jump(self) -> float:
        law = self.jump_law
        if law[0] == "const":
            return float(law[1])
        if law[0] == "normal":
            return float(law[1])
        return float(law[1])  # exp(mean)


def _default_weights(mode_weights, modes: int) -> tuple[float, ...]:
    if mode_weights is not None:
        return tuple(float(w) for w in mode_weights)
    return tuple(float(k) ** -8.0 for k in range(1, modes + 1))


@dataclass(eq=False)
class NoisePath:
    """Realized noise on a uniform time grid (snapshot rows, node columns)."""

    grid: SpatialGrid
    t_start: float
    t_end: float
    dt: float
    values: np.ndarray  # shape (n_times, n_interior)
    spec: NoiseSpec
    seed: int
    cholesky_fallback: bool = False

    @property
    def n_times(self) -> int:
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_times)

    def index_of(self, t: float) -> int:
        """Exact grid index of time t (AlignmentError when off-grid)."""
        k = (t - self.t_start) / self.dt
        ki = int(round(k))
        if abs(k - ki) > 1e-6:
            raise AlignmentError(f"time {t} is not on the noise grid (dt={self.dt})")
        if ki < 0 or ki >= self.n_times:
            raise RangeError(f"time {t} outside the noise window [{self.t_start}, {self.t_end}]")
        return ki

    def value_at(self, t: float) -> Field:
        return Field(self.values[self.index_of(t)].copy(), self.grid)

    def values_interp(self, t: float) -> np.ndarray:
        """Nodal values at t, linearly interpolated when t is off-grid.

        Only the step-halving fallback of the flow solver uses interpolation;
        regular steps always hit grid times exactly.
        """
        k = (t - self.t_start) / self.dt
        if k < -1e-9 or k > self.n_times - 1 + 1e-9:
            raise RangeError(f"time {t} outside the noise window")
        k0 = min(int(math.floor(k)), self.n_times - 2) if self.n_times > 1 else 0
        k0 = max(k0, 0)
        w = k - k0
        if abs(w) < 1e-9:
            return self.values[k0]
        if abs(w - 1.0) < 1e-9:
            return self.values[k0 + 1]
        return (1.0 - w) * self.values[k0] + w * self.values[k0 + 1]

    def restrict(self, t0: float, t1: float) -> "NoisePath":
        """Sub-window view sharing the same snapshot values bit for bit."""
        i0, i1 = self.index_of(t0), self.index_of(t1)
        if i1 < i0:
            raise RangeError("empty restriction window")
        return NoisePath(
            self.grid, t0, t1, self.dt, self.values[i0 : i1 + 1], self.spec, self.seed,
            self.cholesky_fallback,
        )


def _component_rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *tags])))


def _fgn_circulant(n: int, hurst: float, rng: np.random.Generator):
    """n steps of unit-variance fractional Gaussian noise.

    Davies-Harte: embed the fGn autocovariance in a circulant of size 2n and
    synthesize by FFT.  Returns (samples, used_cholesky_fallback).
    """
    if hurst == 0.5:
        return rng.standard_normal(n), False
    k = np.arange(n + 1, dtype=float)
    autocov = 0.5 * (
        np.abs(k + 1.0) ** (2 * hurst)
        + np.abs(k - 1.0) ** (2 * hurst)
        - 2.0 * k ** (2 * hurst)
    )
    circ = np.concatenate([autocov[:n], [autocov[n]], autocov[n - 1 : 0 : -1]])
    eigs = np.fft.fft(circ).real
    if eigs.min() < -1e-8 * eigs.max():
        return _fgn_cholesky(n, autocov, rng), True
    eigs = np.clip(eigs, 0.0, None)
    z = np.zeros(2 * n, dtype=complex)
    z[0] = rng.standard_normal()
    z[n] = rng.standard_normal()
    re = rng.standard_normal(n - 1)
    im = rng.standard_normal(n - 1)
    z[1:n] = (re + 1j * im) / np.sqrt(2.0)
    z[n + 1 :] = np.conj(z[1:n][::-1])
    samples = np.sqrt(2 * n) * np.fft.ifft(np.sqrt(eigs) * z).real[:n]
    return samples, False


def _fgn_cholesky(n: int, autocov: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if n > 2048:
        raise ConfigError("circulant embedding failed and n > 2048: no Cholesky fallback")
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    L = np.linalg.cholesky(autocov[idx])
    return L @ rng.standard_normal(n)


def _scalar_path(spec: NoiseSpec, n_steps: int, dt: float, rng) -> tuple[np.ndarray, bool]:
    """Cumulative scalar component values at grid times 0..n_steps (b(0)=0)."""
    if n_steps == 0:
        return np.zeros(1), False
    if spec.kind == "FBM" and spec.hurst != 0.5:
        fgn, fallback = _fgn_circulant(n_steps, spec.hurst, rng)
        incr = dt**spec.hurst * fgn
    else:
        incr = math.sqrt(dt) * rng.standard_normal(n_steps)
        fallback = False
    return np.concatenate([[0.0], np.cumsum(incr)]), fallback


def _mode_matrix(grid: SpatialGrid, n_modes: int) -> np.ndarray:
    x = grid.nodes
    k = np.arange(1, n_modes + 1)[:, None]
    return np.sqrt(2.0) * np.sin(k * np.pi * x[None, :] / grid.length)


def _compound_poisson(spec: NoiseSpec, horizon: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Jump times (cumulated Exp(1/rate)) and amplitudes up to the horizon."""
    rate = spec.jump_rate
    if rate <= 0.0 or horizon <= 0.0:
        return np.empty(0), np.empty(0)
    expected = rate * horizon
    times = []
    t = 0.0
    while True:
        block = rng.exponential(1.0 / rate, size=max(16, int(1.2 * expected) + 16))
        for gap in block:
            t += gap
            if t > horizon:
                break
            times.append(t)
        if t > horizon:
            break
    times = np.asarray(times)
    law = spec.jump_law
    n = times.size
    if law[0] == "const":
        amps = np.full(n, float(law[1]))
    elif law[0] == "normal":
        amps = rng.normal(float(law[1]), float(law[2]), size=n)
    else:
        amps = rng.exponential(float(law[1]), size=n)
    return times, amps


def gen_path(
    spec: NoiseSpec,
    grid: SpatialGrid,
    t_start: float,
    t_end: float,
    dt: float,
    seed: int = 0,
) -> NoisePath:
    """Generate a two-sided path on the uniform grid t_start..t_end step dt."""
    if not t_start < t_end:
        raise ConfigError("t_start must be < t_end")
    span = t_end - t_start
    n_total = round(span / dt)
    if n_total < 1 or abs(n_total * dt - span) > 1e-9 * max(1.0, abs(span)):
        raise ConfigError(f"dt={dt} does not divide the window [{t_start}, {t_end}]")
    for endpoint in (t_start, t_end):
        k = endpoint / dt
        if abs(k - round(k)) > 1e-9 * max(1.0, abs(k)):
            raise ConfigError("window endpoints must be multiples of dt (t=0 anchors the glue)")

    if spec.kind == "LEVY" and spec.levy_drift is not None and spec.levy_drift.grid != grid:
        raise ConfigError("LEVY drift field lives on a different grid")

    n_back = max(0, round(-t_start / dt))
    n_fwd = max(0, round(t_end / dt))
    n = grid.n_interior
    fallback = False

    # one-sided cumulative paths glued at 0 (values at 0..n_side steps)
    fwd = np.zeros((n_fwd + 1, n))
    bwd = np.zeros((n_back + 1, n))
    if spec.kind in ("QWIENER", "FBM", "LEVY"):
        weights = np.asarray(spec.mode_weights, dtype=float)
        if weights.size:
            modes = _mode_matrix(grid, weights.size)
            for side, (steps, table) in enumerate(((n_fwd, fwd), (n_back, bwd))):
                if steps == 0:
                    continue
                comps = np.zeros((steps + 1, weights.size))
                for j, lam in enumerate(weights):
                    if lam == 0.0:
                        continue
                    rng = _component_rng(seed, 1, side, j)
                    b, fb = _scalar_path(spec, steps, dt, rng)
                    fallback = fallback or fb
                    comps[:, j] = math.sqrt(lam) * b
                table += comps @ modes
    if spec.kind == "LEVY":
        if spec.levy_drift is not None:
            m = spec.levy_drift.values
            fwd += dt * np.arange(n_fwd + 1)[:, None] * m[None, :]
            bwd -= dt * np.arange(n_back + 1)[:, None] * m[None, :]  # N(t)=m t for t<0
        mode = _mode_matrix(grid, spec.jump_mode)[-1]
        for side, (steps, table, sign) in enumerate(
            ((n_fwd, fwd, 1.0), (n_back, bwd, -1.0))
        ):
            if steps == 0:
                continue
            rng = _component_rng(seed, 2, side)
            times, amps = _compound_poisson(spec, steps * dt, rng)
            if times.size:
                bins = np.minimum(np.ceil(times / dt - 1e-12).astype(int), steps)
                cum = np.zeros(steps + 1)
                np.add.at(cum, bins, amps)
                cum = np.cumsum(cum)
                table += sign * cum[:, None] * mode[None, :]

    # assemble the requested window: index j <-> time t_start + j*dt
    values = np.empty((n_total + 1, n))
    for j in range(n_total + 1):
        t_idx = round(t_start / dt) + j
        values[j] = fwd[t_idx] if t_idx >= 0 else bwd[-t_idx]
    if not np.all(np.isfinite(values)):
        raise InvalidFieldError("generated noise contains non-finite values")
    return NoisePath(grid, t_start, t_end, dt, values, spec, seed, fallback)


def wiener_shift(path: NoisePath, tau: float) -> NoisePath:
    """Re-centered path theta_tau: s -> N(s + tau) - N(tau).

    tau must sit on the time grid and inside the window; the result keeps the
    full window, re-timed to [t_start - tau, t_end - tau].
    """
    k = tau / path.dt
    ki = int(round(k))
    if abs(k - ki) > 1e-6:
        raise AlignmentError(f"shift {tau} is not a multiple of dt={path.dt}")
    if not (path.t_start - 1e-9 <= tau <= path.t_end + 1e-9):
        raise RangeError("shift leaves the recorded window")
    anchor = path.index_of(tau)
    shifted = path.values - path.values[anchor]
    return NoisePath(
        path.grid,
        path.t_start - tau,
        path.t_end - tau,
        path.dt,
        shifted,
        path.spec,
        path.seed,
        path.cholesky_fallback,
    )


# ---------------------------------------------------------------------------
# statistical validators
# ---------------------------------------------------------------------------


@dataclass
class StationarityReport:
    lag: float
    window_count: int
    samples: int
    max_discrepancy: float
    table: dict = dc_field(default_factory=dict)


def _standardized_gap(a: np.ndarray, b: np.ndarray) -> float:
    """|mean(a) - mean(b)| in combined standard errors (0 when identical)."""
    ma, mb = float(np.mean(a)), float(np.mean(b))
    diff = abs(ma - mb)
    if diff <= 1e-12 * max(abs(ma), abs(mb)):  # roundoff, not statistics
        return 0.0
    se = math.sqrt((np.var(a) + np.var(b)) / a.size) + 1e-300
    return diff / se


def check_stationary_increments(
    spec: NoiseSpec,
    grid: SpatialGrid,
    lag: float,
    window_count: int = 4,
    samples: int = 2000,
    seed: int = 0,
) -> StationarityReport:
    """Two-sample moment comparison of increments across disjoint windows.

    The scalar statistic is the mode-1 projection of N_{t+lag} - N_t; its
    first, second and fourth powers are compared window-by-window against
    window 0 in combined-standard-error units.
    """
    if window_count < 2:
        raise ConfigError("need at least two windows")
    horizon = window_count * lag
    e1 = _mode_matrix(grid, 1)[0]
    proj = np.empty((samples, window_count))
    for i in range(samples):
        path = gen_path(spec, grid, 0.0, horizon, lag, seed=seed + i)
        incr = np.diff(path.values, axis=0)
        proj[i] = grid.spacing * incr @ e1
    table = {}
    worst = 0.0
    for j in range(1, window_count):
        for name, power in (("mean", 1), ("var", 2), ("m4", 4)):
            gap = _standardized_gap(proj[:, j] ** power, proj[:, 0] ** power)
            table[f"{name}[{j}]"] = gap
            worst = max(worst, gap)
    return StationarityReport(lag, window_count, samples, worst, table)


@dataclass
class GrowthReport:
    max_quadratic_ratio: float  # max ||N_t||_V / (1 + t^2)
    terminal_linear_ratio: float  # ||N_T||_V / |T| at the far end
    levy_rate_error: float | None = None  # rel. error of N_t/t vs m + rho E[jump] e_k


def check_growth(path: NoisePath, triple: TripleSpec | None = None) -> GrowthReport:
    """Subexponential/sublinear growth diagnostics along one realized path."""
    triple = triple or TripleSpec.rde()
    times = path.times
    if np.max(np.abs(times)) < 100.0:
        raise RangeError("growth check needs |t| >= 100 somewhere in the window")
    vnorms = norm_V_values(path.values, path.grid, triple)
    quad = float(np.max(vnorms / (1.0 + times**2)))
    far = int(np.argmax(np.abs(times)))
    term = float(vnorms[far] / abs(times[far]))
    rate_err = None
    if path.spec.kind == "LEVY":
        rate = np.zeros(path.grid.n_interior)
        if path.spec.levy_drift is not None:
            rate = rate + path.spec.levy_drift.values
        rho = path.spec.jump_rate
        if rho > 0.0:
            rate = rate + rho * path.spec.mean_jump * _mode_matrix(path.grid, path.spec.jump_mode)[-1]
        observed = path.values[far] / times[far]
        denom = float(norm_V_values(rate, path.grid, triple))
        if denom > 0.0:
            rate_err = float(norm_V_values(observed - rate, path.grid, triple)) / denom
    return GrowthReport(quad, term, rate_err)


@dataclass
class MomentScalingFit:
    gamma: float
    lags: tuple
    moments: tuple
    slope: float
    intercept: float


def moment_scaling_fit(
    spec: NoiseSpec,
    grid: SpatialGrid,
    gamma: float,
    lags,
    samples: int = 1000,
    seed: int = 0,
    triple: TripleSpec | None = None,
) -> MomentScalingFit:
    """Least-squares slope of log E||N_{t+l} - N_t||_V^gamma against log l."""
    triple = triple or TripleSpec.rde()
    lags = sorted(float(ell) for ell in lags)
    if len(lags) < 4:
        raise ConfigError("need at least 4 distinct lags")
    if lags[-1] / lags[0] < 10.0 - 1e-9:
        raise ConfigError("lags must span at least a decade")
    dt = lags[0]
    for ell in lags:
        if abs(ell / dt - round(ell / dt)) > 1e-9:
            raise ConfigError("every lag must be a multiple of the smallest one")
    horizon = lags[-1]
    sums = np.zeros(len(lags))
    for i in range(samples):
        path = gen_path(spec, grid, 0.0, horizon, dt, seed=seed + i)
        for j, ell in enumerate(lags):
            incr = path.values[round(ell / dt)] - path.values[0]
            sums[j] += float(norm_V_values(incr, grid, triple)) ** gamma
    moments = sums / samples
    slope, intercept = np.polyfit(np.log(lags), np.log(moments), 1)
    return MomentScalingFit(gamma, tuple(lags), tuple(moments), float(slope), float(intercept))


def holder_seminorm(
    path: NoisePath,
    b: float,
    s0: float,
    t0: float,
    triple: TripleSpec | None = None,
) -> float:
    """max over grid pairs of ||N_u - N_v||_V / |u - v|^b on [s0, t0]."""
    if not 0.0 < b < 1.0:
        raise ConfigError("Hoelder exponent must lie in (0, 1)")
    triple = triple or TripleSpec.rde()
    i0, i1 = path.index_of(s0), path.index_of(t0)
    if i1 <= i0:
        raise RangeError("empty Hoelder window")
    vals = path.values[i0 : i1 + 1]
    best = 0.0
    for gap in range(1, i1 - i0 + 1):
        diffs = vals[gap:] - vals[:-gap]
        norms = norm_V_values(diffs, path.grid, triple)
        best = max(best, float(np.max(norms)) / (gap * path.dt) ** b)
    return best


def regularity_integral(path: NoisePath, alpha: float, triple: TripleSpec | None = None) -> float:
    """sum dt * ||N_t||_V^alpha over the window (the (S2) integrability record)."""
    triple = triple or TripleSpec.rde()
    vnorms = norm_V_values(path.values, path.grid, triple)
    return float(path.dt * np.sum(vnorms**alpha))


# ---------------------------------------------------------------------------
# text persistence (17 significant digits, lossless for float64)
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_noise_path(path: NoisePath, stream) -> None:
    """Write the text format: header lines then `t v_1 ... v_n` rows."""
    close = False
    if isinstance(stream, (str, bytes)):
        stream = open(stream, "w")
        close = True
    try:
        spec = path.spec
        stream.write(
            f"# kind={spec.kind} seed={path.seed} dt={_fmt(path.dt)} "
            f"t0={_fmt(path.t_start)} t1={_fmt(path.t_end)} modes={len(spec.mode_weights)}\n"
        )
        stream.write(
            f"# grid_n={path.grid.n_interior} grid_length={_fmt(path.grid.length)} "
            f"hurst={_fmt(spec.hurst)} fallback={int(path.cholesky_fallback)}\n"
        )
        if spec.mode_weights:
            stream.write("# weights=" + ",".join(_fmt(w) for w in spec.mode_weights) + "\n")
        if spec.kind == "LEVY":
            stream.write(
                f"# jump_rate={_fmt(spec.jump_rate)} jump_mode={spec.jump_mode} "
                f"jump_law={spec.jump_law[0]},"
                + ",".join(_fmt(x) for x in spec.jump_law[1:])
                + "\n"
            )
            if spec.levy_drift is not None:
                stream.write(
                    "# levy_drift=" + ",".join(_fmt(v) for v in spec.levy_drift.values) + "\n"
                )
        for t, row in zip(path.times, path.values):
            stream.write(_fmt(t) + " " + " ".join(_fmt(v) for v in row) + "\n")
    finally:
        if close:
            stream.close()


def load_noise_path(stream) -> NoisePath:
    """Read a path written by :func:`save_noise_path` (lossless round trip)."""
    close = False
    if isinstance(stream, (str, bytes)):
        stream = open(stream, "r")
        close = True
    try:
        header: dict[str, str] = {}
        rows = []
        for line in stream:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        key, val = tok.split("=", 1)
                        header[key] = val
                continue
            rows.append([float(tok) for tok in line.split()])
    finally:
        if close:
            stream.close()
    if not rows:
        raise ConfigError("noise file contains no snapshots")
    table = np.asarray(rows)
    times, values = table[:, 0], table[:, 1:]
    grid = SpatialGrid(int(header["grid_n"]), float(header["grid_length"]))
    kind = header["kind"]
    weights = ()
    if "weights" in header:
        weights = tuple(float(w) for w in header["weights"].split(","))
    drift = None
    if "levy_drift" in header:
        drift = Field(np.array([float(v) for v in header["levy_drift"].split(",")]), grid)
    if kind == "LEVY":
        law_toks = header.get("jump_law", "const,0").split(",")
        spec = NoiseSpec.levy(
            drift if drift is not None else Field(np.zeros(grid.n_interior), grid),
            wiener_weights=weights,
            jump_rate=float(header.get("jump_rate", 0.0)),
            jump_mode=int(header.get("jump_mode", 1)),
            jump_law=(law_toks[0], *map(float, law_toks[1:])),
        )
    elif kind == "FBM":
        spec = NoiseSpec.fbm(float(header["hurst"]), mode_weights=weights)
    elif kind == "QWIENER":
        spec = NoiseSpec.q_wiener(mode_weights=weights)
    else:
        spec = NoiseSpec.zero()
    return NoisePath(
        grid,
        float(header["t0"]),
        float(header["t1"]),
        float(header["dt"]),
        values,
        spec,
        int(header["seed"]),
        bool(int(header.get("fallback", "0"))),
    )


def zero_path(grid: SpatialGrid, t_start: float, t_end: float, dt: float) -> NoisePath:
    return gen_path(NoiseSpec.zero(), grid, t_start, t_end, dt, seed=0)
