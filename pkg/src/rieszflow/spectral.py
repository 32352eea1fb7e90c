"""Periodic-grid fields, Fourier transforms, and fractional-Laplacian operators.

All fields live on a uniform periodic grid over [0, L)^d.  Fourier
coefficients are normalized so that the k = 0 coefficient equals the grid
mean; with this convention Parseval reads

    sum_k |f_hat(k)|^2 * L^d  =  h^d * sum_x f(x)^2.

The fractional operator of power s acts as the multiplier |k|^s with the
k = 0 mode mapped to zero (constants are projected out for negative powers).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GridMismatch, NonFinite, NonPositiveDensity

MAX_EXPONENT = 8.0


class Grid:
    """Uniform periodic grid on [0, L)^d with precomputed wavevectors."""

    def __init__(self, d: int, n: int, length: float):
        if d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2, or 3, got {d}")
        if n < 8 or n % 2 != 0:
            raise ValueError(f"points per axis must be even and >= 8, got {n}")
        if not length > 0:
            raise ValueError(f"box length must be positive, got {length}")
        self.d = d
        self.n = n
        self.length = float(length)
        self.h = self.length / n
        self.shape = (n,) * d

        modes_1d = np.fft.fftfreq(n, d=1.0 / n)  # integer modes in [-n/2, n/2)
        k_1d = 2.0 * np.pi * modes_1d / self.length
        self._modes_axes = np.meshgrid(*([modes_1d] * d), indexing="ij", sparse=True)
        self.k_axes = np.meshgrid(*([k_1d] * d), indexing="ij", sparse=True)
        self.k_sq = sum(k * k for k in self.k_axes)
        self.k_mag = np.sqrt(self.k_sq)
        self.mode_mag_inf = np.maximum.reduce(
            np.broadcast_arrays(*(np.abs(m) for m in self._modes_axes))
        ) if d > 1 else np.abs(self._modes_axes[0])
        # 2/3-rule mask: keep modes with |m_i| < n/3 on every axis
        keep = np.ones(self.shape, dtype=bool)
        for m in self._modes_axes:
            keep &= np.abs(m) < n / 3.0
        self.dealias_mask = keep

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    def coords(self):
        """Coordinate arrays (meshgrid, ij indexing), one per axis."""
        x_1d = np.arange(self.n) * self.h
        return np.meshgrid(*([x_1d] * self.d), indexing="ij", sparse=True)

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and (self.d, self.n, self.length) == (other.d, other.n, other.length)
        )

    def __hash__(self):
        return hash((self.d, self.n, self.length))

    def __repr__(self):
        return f"Grid(d={self.d}, n={self.n}, length={self.length})"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Field:
    """Real samples of a scalar field on a grid, row-major."""

    grid: Grid
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise GridMismatch(
                f"values shape {vals.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise NonFinite("field contains non-finite values")
        object.__setattr__(self, "values", _freeze(vals))

    def __add__(self, other):
        if isinstance(other, Field):
            _check_same_grid(self, other)
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            _check_same_grid(self, other)
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)

    def __mul__(self, other):
        if isinstance(other, Field):
            _check_same_grid(self, other)
            return Field(self.grid, self.values * other.values)
        return Field(self.grid, self.values * other)

    __rmul__ = __mul__

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def mean(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a field, indexed by the integer wavevector lattice."""

    grid: Grid
    coeffs: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise GridMismatch(
                f"coeffs shape {c.shape} does not match grid shape {self.grid.shape}"
            )
        object.__setattr__(self, "coeffs", _freeze(c))


def _check_same_grid(*objs):
    g0 = objs[0].grid
    for o in objs[1:]:
        if o.grid != g0:
            raise GridMismatch(f"grids differ: {g0} vs {o.grid}")


def field_from_function(grid: Grid, fn) -> Field:
    """Sample fn(*coords) on the grid."""
    return Field(grid, np.broadcast_to(fn(*grid.coords()), grid.shape))


def forward_transform(f: Field) -> SpectralField:
    """DFT normalized so the k = 0 coefficient is the grid mean."""
    return SpectralField(f.grid, np.fft.fftn(f.values) / f.grid.n ** f.grid.d)


def inverse_transform(sf: SpectralField) -> Field:
    vals = np.fft.ifftn(sf.coeffs * sf.grid.n ** sf.grid.d)
    return Field(sf.grid, vals.real)


def apply_multiplier(sf: SpectralField, mult) -> SpectralField:
    return SpectralField(sf.grid, sf.coeffs * mult)


def riesz_multiplier(grid: Grid, s: float) -> np.ndarray:
    """|k|^s with the zero mode set to 0."""
    if abs(s) > MAX_EXPONENT:
        raise ValueError(f"|s| must be <= {MAX_EXPONENT}, got {s}")
    if s == 0.0:
        mult = np.ones(grid.shape)
    else:
        with np.errstate(divide="ignore"):
            mult = np.where(grid.k_mag > 0, grid.k_mag, 1.0) ** s
    mult = np.array(np.broadcast_to(mult, grid.shape))
    mult[(0,) * grid.d] = 0.0
    return mult


def riesz_power(f: Field, s: float) -> Field:
    """Apply the fractional operator of power s (multiplier |k|^s, mean projected out)."""
    sf = forward_transform(f)
    out = inverse_transform(apply_multiplier(sf, riesz_multiplier(f.grid, s)))
    if not np.all(np.isfinite(out.values)):
        raise NonFinite(f"fractional power s={s} overflowed")
    return out


def gradient(f: Field) -> list[Field]:
    """Spectral gradient, one component per axis."""
    sf = forward_transform(f)
    return [
        inverse_transform(apply_multiplier(sf, 1j * k)) for k in f.grid.k_axes
    ]


def divergence(v: list[Field]) -> Field:
    """Spectral divergence of a vector field."""
    if len(v) != v[0].grid.d:
        raise GridMismatch(f"expected {v[0].grid.d} components, got {len(v)}")
    _check_same_grid(*v)
    grid = v[0].grid
    total = np.zeros(grid.shape, dtype=np.complex128)
    for comp, k in zip(v, grid.k_axes):
        total = total + 1j * k * forward_transform(comp).coeffs
    return inverse_transform(SpectralField(grid, total))


def integrate(f: Field) -> float:
    """Rectangle-rule integral over the box (spectrally accurate for smooth fields)."""
    return float(f.values.sum()) * f.grid.cell_volume


def sobolev_norm(f: Field, s: float) -> float:
    """H^s norm: (sum_k (1+|k|^2)^s |f_hat|^2 L^d)^(1/2)."""
    if abs(s) > MAX_EXPONENT:
        raise ValueError(f"|s| must be <= {MAX_EXPONENT}, got {s}")
    c = forward_transform(f).coeffs
    weight = (1.0 + f.grid.k_sq) ** s
    return float(
        np.sqrt(np.sum(weight * np.abs(c) ** 2) * f.grid.length ** f.grid.d)
    )


def homogeneous_sobolev_norm(f: Field, s: float) -> float:
    """H-dot^s seminorm via the |k|^(2s) multiplier (zero mode dropped)."""
    c = forward_transform(f).coeffs
    weight = riesz_multiplier(f.grid, 2.0 * s) if s != 0 else None
    if weight is None:
        weight = np.ones(f.grid.shape)
        weight[(0,) * f.grid.d] = 0.0
    return float(np.sqrt(np.sum(weight * np.abs(c) ** 2) * f.grid.length ** f.grid.d))


def multi_indices(d: int, order: int):
    """All d-dimensional multi-indices of the given total order."""
    for combo in itertools.combinations_with_replacement(range(d), order):
        beta = [0] * d
        for axis in combo:
            beta[axis] += 1
        yield tuple(beta)


def partial_derivative(f: Field, beta) -> Field:
    """Spectral partial derivative for the multi-index beta."""
    grid = f.grid
    mult = np.ones(grid.shape, dtype=np.complex128)
    for k, b in zip(grid.k_axes, beta):
        if b:
            mult = mult * (1j * k) ** b
    return inverse_transform(apply_multiplier(forward_transform(f), mult))


def modified_sobolev_norm(rho: Field, m: int) -> float:
    """Density-weighted derivative norm: (sum over 1 <= |beta| <= m of
    int (d^beta rho)^2 / rho dx)^(1/2).

    Each multi-index is counted once, with no multinomial weights.
    """
    if not 1 <= m <= 6:
        raise ValueError(f"order m must be in [1, 6], got {m}")
    if rho.min() <= 0:
        raise NonPositiveDensity(f"min(rho) = {rho.min():.3g} <= 0")
    inv_rho = 1.0 / rho.values
    total = 0.0
    for order in range(1, m + 1):
        for beta in multi_indices(rho.grid.d, order):
            df = partial_derivative(rho, beta)
            total += float(np.sum(df.values ** 2 * inv_rho)) * rho.grid.cell_volume
    return float(np.sqrt(total))


def dealias(sf: SpectralField) -> SpectralField:
    """Zero every coefficient with |m_i| >= n/3 on any axis (2/3 rule)."""
    return SpectralField(sf.grid, np.where(sf.grid.dealias_mask, sf.coeffs, 0.0))
