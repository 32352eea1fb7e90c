"""Free-space N-body dynamics under the power-law interaction kernel.

The kernel is K(x) = |x|^(-alpha), softened to K_delta(x) =
(|x|^2 + delta^2)^(-alpha/2); accelerations are

    a_i = (c_K / N) sum_{j != i} grad K_delta(x_i - x_j),
    grad K_delta(z) = -alpha z (|z|^2 + delta^2)^(-(alpha+2)/2).

Direct O(N^2) summation, chunked over rows to bound memory.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParticleCollision
from .spectral import Field, Grid

_CHUNK = 512
_DIST_FLOOR = 1e-300


@dataclass(frozen=True)
class ParticleEnsemble:
    """N point particles in free space."""

    positions: np.ndarray   # (N, d)
    velocities: np.ndarray  # (N, d)
    alpha: float
    c_k: float
    softening: float = 0.0

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.positions, dtype=np.float64))
        v = np.atleast_2d(np.asarray(self.velocities, dtype=np.float64))
        if x.shape != v.shape:
            raise ValueError(f"positions {x.shape} vs velocities {v.shape}")
        if x.shape[0] < 1:
            raise ValueError("need at least one particle")
        if self.softening < 0:
            raise ValueError(f"softening must be >= 0, got {self.softening}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise ValueError("non-finite particle coordinates")
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "velocities", v)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]


def default_softening(e: ParticleEnsemble) -> float:
    """1e-3 times the mean interparticle spacing (per-axis extent / N^(1/d))."""
    span = np.ptp(e.positions, axis=0).max()
    if span == 0:
        span = 1.0
    return 1e-3 * span / e.n ** (1.0 / e.d)


def riesz_force(e: ParticleEnsemble) -> np.ndarray:
    """Pairwise accelerations (N, d); Newton's third law holds pair by pair."""
    x = e.positions
    n, d = x.shape
    acc = np.zeros_like(x)
    if n == 1:
        return acc
    delta_sq = e.softening ** 2
    expo = -(e.alpha + 2.0) / 2.0
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        diff = x[start:stop, None, :] - x[None, :, :]       # (chunk, N, d)
        r_sq = np.einsum("ijk,ijk->ij", diff, diff)
        rows = np.arange(stop - start)
        r_sq[rows, rows + start] = np.inf                   # mask self-pairs
        if delta_sq == 0.0 and r_sq.min() < _DIST_FLOOR:
            raise ParticleCollision("coincident particles with zero softening")
        kern = (r_sq + delta_sq) ** expo                    # inf**neg -> 0
        acc[start:stop] = -e.alpha * np.einsum("ij,ijk->ik", kern, diff)
    return (e.c_k / n) * acc


def verlet_step(e: ParticleEnsemble, dt: float, acc: np.ndarray | None = None):
    """One velocity-Verlet step; returns (new ensemble, new accelerations)."""
    if dt == 0:
        raise ValueError("dt must be nonzero")
    if acc is None:
        acc = riesz_force(e)
    x_new = e.positions + dt * e.velocities + 0.5 * dt ** 2 * acc
    e_half = replace(e, positions=x_new)
    acc_new = riesz_force(e_half)
    v_new = e.velocities + 0.5 * dt * (acc + acc_new)
    return replace(e, positions=x_new, velocities=v_new), acc_new


def pair_potential_sum(e: ParticleEnsemble) -> float:
    """sum over i != j of K_delta(x_i - x_j)."""
    x = e.positions
    n = x.shape[0]
    if n == 1:
        return 0.0
    delta_sq = e.softening ** 2
    total = 0.0
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        diff = x[start:stop, None, :] - x[None, :, :]
        r_sq = np.einsum("ijk,ijk->ij", diff, diff)
        rows = np.arange(stop - start)
        r_sq[rows, rows + start] = np.inf
        total += float(((r_sq + delta_sq) ** (-e.alpha / 2.0)).sum())
    return total


def hamiltonian(e: ParticleEnsemble) -> float:
    """(1/N) sum |v|^2/2 - (c_K / 2N^2) sum_{i != j} K_delta(x_i - x_j)."""
    kinetic = 0.5 * float(np.sum(e.velocities ** 2)) / e.n
    return kinetic - e.c_k / (2.0 * e.n ** 2) * pair_potential_sum(e)


def particle_functionals(e: ParticleEnsemble) -> dict:
    """Empirical-measure analogues of the fluid functionals (unit total mass)."""
    x, v = e.positions, e.velocities
    return {
        "I": 0.5 * float(np.sum(x ** 2)) / e.n,
        "W": float(np.sum(x * v)) / e.n,
        "E_u": 0.5 * float(np.sum(v ** 2)) / e.n,
        "E_K": pair_potential_sum(e) / (2.0 * e.n ** 2),
    }


def empirical_density(e: ParticleEnsemble, grid: Grid, bandwidth: float) -> Field:
    """Periodized Gaussian kernel-density estimate of the unit-mass empirical measure."""
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if grid.d != e.d:
        raise ValueError(f"grid dimension {grid.d} != particle dimension {e.d}")
    L = grid.length
    n_images = int(np.ceil(8.0 * bandwidth / L)) + 1
    shifts = np.arange(-n_images, n_images + 1) * L
    norm = (2.0 * np.pi * bandwidth ** 2) ** (-e.d / 2.0)

    x_axis = np.arange(grid.n) * grid.h
    # separable per-axis kernels: (n_grid, N) each
    axis_kernels = []
    for axis in range(e.d):
        diff = x_axis[:, None] - e.positions[None, :, axis]       # (n, N)
        acc = np.zeros_like(diff)
        for s in shifts:
            acc += np.exp(-((diff + s) ** 2) / (2.0 * bandwidth ** 2))
        axis_kernels.append(acc)
    if e.d == 1:
        dens = axis_kernels[0].sum(axis=1)
    else:
        # outer product over axes, summed over particles
        letters = "abc"[: e.d]
        spec = ",".join(f"{ch}p" for ch in letters) + "->" + letters
        dens = np.einsum(spec, *axis_kernels)
    return Field(grid, norm * dens / e.n)


def spatial_moments(e: ParticleEnsemble) -> tuple[np.ndarray, np.ndarray]:
    """First and second raw moments of the empirical measure, per axis."""
    return e.positions.mean(axis=0), (e.positions ** 2).mean(axis=0)


def sample_monokinetic_iid(rho: Field, u: list[Field], n: int, rng) -> ParticleEnsemble:
    """i.i.d. positions from the normalized density, velocities from u at the samples.

    1D and 2D; inverse-CDF sampling per conditional axis for d = 1, rejection
    sampling for d = 2.
    """
    grid = rho.grid
    vals = np.clip(rho.values, 0.0, None)
    if grid.d == 1:
        cdf = np.cumsum(vals)
        cdf = cdf / cdf[-1]
        uu = rng.random(n)
        idx = np.searchsorted(cdf, uu)
        # jitter within the cell, centered on the grid point carrying the mass
        x = (idx + rng.random(n) - 0.5) * grid.h
        positions = x[:, None] % grid.length
    else:
        flat = vals.ravel()
        prob = flat / flat.sum()
        idx = rng.choice(flat.size, size=n, p=prob)
        multi = np.array(np.unravel_index(idx, grid.shape)).T.astype(float)
        positions = (multi + rng.random((n, grid.d)) - 0.5) * grid.h % grid.length
    velocities = np.stack(
        [_sample_field_at(ui, positions) for ui in u], axis=1
    )
    return ParticleEnsemble(positions, velocities, alpha=0.0, c_k=0.0)


def sample_monokinetic_quadrature(rho: Field, u: list[Field], n: int) -> ParticleEnsemble:
    """Deterministic 1D sampler: positions at the n-quantiles of the density."""
    grid = rho.grid
    if grid.d != 1:
        raise ValueError("quadrature sampler is 1D only")
    vals = np.clip(rho.values, 0.0, None)
    cdf = np.concatenate([[0.0], np.cumsum(vals)])
    cdf = cdf / cdf[-1]
    targets = (np.arange(n) + 0.5) / n
    cells = np.searchsorted(cdf, targets) - 1
    cells = np.clip(cells, 0, grid.n - 1)
    frac = (targets - cdf[cells]) / np.maximum(cdf[cells + 1] - cdf[cells], 1e-300)
    # each cell's mass is centered on its grid point
    positions = (((cells + frac - 0.5) * grid.h) % grid.length)[:, None]
    velocities = np.stack([_sample_field_at(ui, positions) for ui in u], axis=1)
    return ParticleEnsemble(positions, velocities, alpha=0.0, c_k=0.0)


def _sample_field_at(f: Field, positions: np.ndarray) -> np.ndarray:
    """Linear interpolation of a periodic grid field at particle positions."""
    grid = f.grid
    rel = positions / grid.h
    lo = np.floor(rel).astype(int)
    frac = rel - lo
    if grid.d == 1:
        i0 = lo[:, 0] % grid.n
        i1 = (i0 + 1) % grid.n
        return (1 - frac[:, 0]) * f.values[i0] + frac[:, 0] * f.values[i1]
    i0 = lo % grid.n
    i1 = (i0 + 1) % grid.n
    if grid.d == 2:
        fx, fy = frac[:, 0], frac[:, 1]
        v = f.values
        return (
            (1 - fx) * (1 - fy) * v[i0[:, 0], i0[:, 1]]
            + fx * (1 - fy) * v[i1[:, 0], i0[:, 1]]
            + (1 - fx) * fy * v[i0[:, 0], i1[:, 1]]
            + fx * fy * v[i1[:, 0], i1[:, 1]]
        )
    raise ValueError("interpolation implemented for d <= 2")
