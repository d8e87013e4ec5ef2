"""Spatial discretization and Gelfand-triple geometry on an interval.

Everything lives on a uniform grid over (0, L) with homogeneous Dirichlet
boundaries: interior nodes x_i = i*h, i = 1..n, h = L/(n+1), boundary values
implicitly zero.  Integrals use the nodal quadrature h * sum(.), gradients use
forward differences on the n+1 cells, so the discrete Dirichlet form is
exactly the quadratic form of the standard tridiagonal Laplacian and the
discrete sine vectors are its exact eigenvectors.

Four triples are supported, keyed by the drift family they serve:

  RDE        W^{1,2}_0  in  L^2         (alpha = 2)
  PME        L^{r+1}    in  W^{-1,2}_0  (alpha = r+1)
  PLE        W^{1,p}    in  L^2         (alpha = p)
  POINTWISE  L^p        in  L^2         (alpha = p)

The H-norm for PME is the discrete H^{-1} norm sqrt(<v, (-lap)^{-1} v>); the
intermediate S-norm is the Dirichlet seminorm for RDE/PLE (the form norm that
the Yosida quadratic forms increase to) and the L^2 norm for PME/POINTWISE.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import GridMismatchError, InvalidFieldError

_TRIPLE_KINDS = ("RDE", "PME", "PLE", "POINTWISE")


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform Dirichlet grid on (0, length) with n_interior free nodes."""

    n_interior: int
    length: float = 1.0

    def __post_init__(self):
        if self.n_interior < 2:
            raise ValueError("n_interior must be >= 2")
        if not (self.length > 0.0 and np.isfinite(self.length)):
            raise ValueError("length must be positive and finite")

    @property
    def spacing(self) -> float:
        return self.length / (self.n_interior + 1)

    @property
    def nodes(self) -> np.ndarray:
        return _grid_nodes(self)


@lru_cache(maxsize=64)
def _grid_nodes(grid: SpatialGrid) -> np.ndarray:
    x = grid.spacing * np.arange(1, grid.n_interior + 1)
    x.setflags(write=False)
    return x


@dataclass(eq=False)
class Field:
    """Nodal values of a function on a grid, Dirichlet boundary implied."""

    values: np.ndarray
    grid: SpatialGrid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_interior,):
            raise InvalidFieldError(
                f"expected {self.grid.n_interior} nodal values, got shape {v.shape}"
            )
        self.values = v

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.grid)


def zero_field(grid: SpatialGrid) -> Field:
    return Field(np.zeros(grid.n_interior), grid)


def constant_field(c: float, grid: SpatialGrid) -> Field:
    return Field(np.full(grid.n_interior, float(c)), grid)


def field_from_function(f, grid: SpatialGrid) -> Field:
    return Field(np.asarray(f(grid.nodes), dtype=float), grid)


def sine_mode(grid: SpatialGrid, k: int) -> Field:
    """Spatial mode e_k(x) = sqrt(2) sin(k pi x / L), an exact eigenvector
    of the discrete Dirichlet Laplacian."""
    x = grid.nodes
    return Field(np.sqrt(2.0) * np.sin(k * np.pi * x / grid.length), grid)


def discrete_eigenvalue(grid: SpatialGrid, k: int) -> float:
    """Eigenvalue of -lap_h on mode k: 4 sin^2(k pi h / (2L)) / h^2."""
    h = grid.spacing
    return 4.0 * np.sin(k * np.pi * h / (2.0 * grid.length)) ** 2 / h**2


@dataclass(frozen=True)
class TripleSpec:
    """Which Gelfand triple is in play, with its growth exponent."""

    kind: str
    exponent: float = 2.0  # p for RDE/PLE/POINTWISE, r for PME

    def __post_init__(self):
        if self.kind not in _TRIPLE_KINDS:
            raise ValueError(f"unknown triple kind {self.kind!r}")
        if self.kind == "PME":
            if not self.exponent > 1.0:
                raise ValueError("PME exponent r must be > 1")
        elif not self.exponent >= 1.0:
            raise ValueError("exponent must be >= 1")

    @property
    def alpha(self) -> float:
        """Coercivity exponent: RDE 2, PME r+1, PLE p, POINTWISE p."""
        if self.kind == "RDE":
            return 2.0
        if self.kind == "PME":
            return self.exponent + 1.0
        return self.exponent

    @classmethod
    def rde(cls, p: float = 2.0) -> "TripleSpec":
        return cls("RDE", p)

    @classmethod
    def pme(cls, r: float) -> "TripleSpec":
        return cls("PME", r)

    @classmethod
    def ple(cls, p: float) -> "TripleSpec":
        return cls("PLE", p)

    @classmethod
    def pointwise(cls, p: float) -> "TripleSpec":
        return cls("POINTWISE", p)


# ---------------------------------------------------------------------------
# array-level quadrature and difference operators (batch-friendly, last axis
# is the spatial axis)
# ---------------------------------------------------------------------------


def quad_integral(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """h * sum(values) along the spatial axis."""
    return grid.spacing * np.sum(values, axis=-1)


def _max_rescale(values: np.ndarray):
    """(values/scale, scale) with scale = max|values| (1 for a zero field)."""
    scale = np.max(np.abs(values), axis=-1, keepdims=True)
    safe = np.where(scale > 0.0, scale, 1.0)
    factor = np.squeeze(safe, axis=-1) if values.ndim > 1 else float(safe[0])
    return values / safe, factor


def l2_norm_values(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    scaled, factor = _max_rescale(values)
    return factor * np.sqrt(quad_integral(np.square(scaled), grid))


def lp_norm_values(values: np.ndarray, grid: SpatialGrid, p: float) -> np.ndarray:
    # rescale by the max to keep |v|^p away from under/overflow
    scaled, factor = _max_rescale(values)
    return factor * quad_integral(np.abs(scaled) ** p, grid) ** (1.0 / p)


def forward_differences(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Cell gradients (v_{i+1} - v_i)/h on the n+1 cells, zero boundary."""
    padded = np.concatenate(
        [
            np.zeros(values.shape[:-1] + (1,)),
            values,
            np.zeros(values.shape[:-1] + (1,)),
        ],
        axis=-1,
    )
    return np.diff(padded, axis=-1) / grid.spacing


def dirichlet_energy(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """h * sum over cells of the squared forward differences, i.e. <v, -lap v>."""
    g = forward_differences(values, grid)
    return quad_integral(np.square(g), grid)


def grad_lp_integral(values: np.ndarray, grid: SpatialGrid, p: float) -> np.ndarray:
    g = forward_differences(values, grid)
    return quad_integral(np.abs(g) ** p, grid)


def apply_laplacian(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Standard tridiagonal Dirichlet Laplacian (v_{i-1} - 2 v_i + v_{i+1})/h^2."""
    h2 = grid.spacing**2
    out = -2.0 * values.copy()
    out[..., :-1] += values[..., 1:]
    out[..., 1:] += values[..., :-1]
    return out / h2


@lru_cache(maxsize=64)
def _neg_laplacian_cholesky(grid: SpatialGrid) -> np.ndarray:
    """Banded Cholesky factor of -lap_h (symmetric positive definite)."""
    n = grid.n_interior
    h2 = grid.spacing**2
    ab = np.zeros((2, n))
    ab[0, 1:] = -1.0 / h2
    ab[1, :] = 2.0 / h2
    return cholesky_banded(ab, lower=False)


@lru_cache(maxsize=256)
def _resolvent_cholesky(grid: SpatialGrid, n: int) -> np.ndarray:
    """Banded Cholesky factor of (I - lap_h / n)."""
    m = grid.n_interior
    h2 = grid.spacing**2
    ab = np.zeros((2, m))
    ab[0, 1:] = -1.0 / (n * h2)
    ab[1, :] = 1.0 + 2.0 / (n * h2)
    return cholesky_banded(ab, lower=False)


def solve_neg_laplacian(rhs: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Solve (-lap_h) u = rhs by the cached banded Cholesky factorization."""
    cb = _neg_laplacian_cholesky(grid)
    if rhs.ndim == 1:
        return cho_solve_banded((cb, False), rhs)
    return cho_solve_banded((cb, False), rhs.T).T


def solve_resolvent(values: np.ndarray, grid: SpatialGrid, n: int) -> np.ndarray:
    """Solve (I - lap_h / n) w = v."""
    cb = _resolvent_cholesky(grid, n)
    if values.ndim == 1:
        return cho_solve_banded((cb, False), values)
    return cho_solve_banded((cb, False), values.T).T


def hminus1_norm_values(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Discrete H^{-1} norm sqrt(<v, (-lap)^{-1} v>_h)."""
    scaled, factor = _max_rescale(values)
    w = solve_neg_laplacian(scaled, grid)
    quad = quad_integral(scaled * w, grid)
    return factor * np.sqrt(np.maximum(quad, 0.0))


# ---------------------------------------------------------------------------
# norm dispatch per triple
# ---------------------------------------------------------------------------


def norm_H_values(values: np.ndarray, grid: SpatialGrid, triple: TripleSpec) -> np.ndarray:
    if triple.kind == "PME":
        return hminus1_norm_values(values, grid)
    return l2_norm_values(values, grid)


def norm_V_values(values: np.ndarray, grid: SpatialGrid, triple: TripleSpec) -> np.ndarray:
    if triple.kind == "RDE":
        scaled, factor = _max_rescale(values)
        return factor * np.sqrt(
            dirichlet_energy(scaled, grid) + quad_integral(np.square(scaled), grid)
        )
    if triple.kind == "PLE":
        p = triple.exponent
        scaled, factor = _max_rescale(values)
        g = forward_differences(scaled, grid)
        gmax = np.max(np.abs(g), axis=-1, keepdims=True)
        gsafe = np.where(gmax > 0.0, gmax, 1.0)
        gfac = np.squeeze(gsafe, axis=-1) if values.ndim > 1 else float(gsafe[0])
        out = (
            gfac**p * quad_integral(np.abs(g / gsafe) ** p, grid)
            + quad_integral(np.abs(scaled) ** p, grid)
        ) ** (1.0 / p)
        return factor * out
    if triple.kind == "PME":
        return lp_norm_values(values, grid, triple.exponent + 1.0)
    return lp_norm_values(values, grid, triple.exponent)


def norm_S_values(values: np.ndarray, grid: SpatialGrid, triple: TripleSpec) -> np.ndarray:
    if triple.kind in ("RDE", "PLE"):
        # Dirichlet form seminorm: the limit of the Yosida quadratic forms.
        scaled, factor = _max_rescale(values)
        return factor * np.sqrt(dirichlet_energy(scaled, grid))
    return l2_norm_values(values, grid)


def _check_field(v: Field) -> None:
    if not np.all(np.isfinite(v.values)):
        bad = int(np.flatnonzero(~np.isfinite(v.values))[0])
        raise InvalidFieldError(f"non-finite value at node {bad}")


def norm_H(v: Field, triple: TripleSpec) -> float:
    """H-norm of a field (L^2 for RDE/PLE/POINTWISE, H^{-1} for PME)."""
    _check_field(v)
    return float(norm_H_values(v.values, v.grid, triple))


def norm_V(v: Field, triple: TripleSpec) -> float:
    """V-norm: full Sobolev norm for RDE/PLE, L^{r+1}/L^p quadrature norm else."""
    _check_field(v)
    return float(norm_V_values(v.values, v.grid, triple))


def norm_S(v: Field, triple: TripleSpec) -> float:
    """Intermediate compact-embedding norm (Dirichlet seminorm or L^2)."""
    _check_field(v)
    return float(norm_S_values(v.values, v.grid, triple))


def inverse_dirichlet_laplacian(f: Field) -> Field:
    """Solve (-lap_h) u = f exactly (direct banded factorization)."""
    _check_field(f)
    return Field(solve_neg_laplacian(f.values, f.grid), f.grid)


def dual_pairing(fstar: Field, v: Field, triple: TripleSpec | None = None) -> float:
    """Quadrature pairing h * sum(fstar * v).

    On the discrete representation the V*/V dualization reduces to this L^2
    pairing for all four triples; ``triple`` is accepted for interface
    symmetry only.
    """
    if fstar.grid != v.grid:
        raise GridMismatchError("fields live on different grids")
    _check_field(fstar)
    _check_field(v)
    return float(quad_integral(fstar.values * v.values, fstar.grid))
