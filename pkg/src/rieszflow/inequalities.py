"""Numerical stress tests of the functional inequalities used by the analysis.

Each ratio sample evaluates LHS / RHS of one inequality on a randomized,
strictly positive, band-limited periodic test function; a sweep reports the
empirical maximum as a stand-in for the inequality's implicit constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import NonPositiveFunction, TupleOrderMismatch
from .spectral import (
    Field,
    Grid,
    forward_transform,
    homogeneous_sobolev_norm,
    integrate,
    inverse_transform,
    multi_indices,
    partial_derivative,
    sobolev_norm,
    SpectralField,
)

RHS_FLOOR = 1e-14


@dataclass(frozen=True)
class TestFunctionSpec:
    """Recipe for a random positive trigonometric polynomial g = floor + modes."""

    __test__ = False  # not a test case, despite the name

    d: int = 1
    n: int = 128
    length: float = 2.0 * np.pi
    floor: float = 1.0
    mode_cutoff: int = 8
    amplitude: float = 0.5
    seed: int = 0

    def grid(self) -> Grid:
        return Grid(self.d, self.n, self.length)


@dataclass(frozen=True)
class RatioSample:
    lhs: float
    rhs: float
    ratio: float | None  # None when rhs is below the floor
    spec: dict = dc_field(default_factory=dict)


def _make_sample(lhs: float, rhs: float, spec=None) -> RatioSample:
    ratio = lhs / rhs if rhs >= RHS_FLOOR else None
    return RatioSample(lhs, rhs, ratio, spec or {})


def random_positive_field(spec: TestFunctionSpec, rng) -> Field:
    """floor + random cosine modes, amplitudes rescaled so min g >= floor/2."""
    grid = spec.grid()
    coords = grid.coords()
    bump = np.zeros(grid.shape)
    modes = [
        m for m in _mode_lattice(spec.d, spec.mode_cutoff) if any(m)
    ]
    for m in modes:
        a = spec.amplitude * rng.standard_normal() / len(modes)
        theta = 2.0 * np.pi * rng.random()
        phase = sum(
            2.0 * np.pi * mi * x / grid.length for mi, x in zip(m, coords)
        )
        bump = bump + a * np.cos(np.broadcast_to(phase, grid.shape) + theta)
    low = bump.min()
    if low < -spec.floor / 2.0:
        bump = bump * (spec.floor / 2.0 / (-low))
    return Field(grid, spec.floor + bump)


def random_band_limited_field(spec: TestFunctionSpec, rng) -> Field:
    """Mean-zero random band-limited field (no positivity constraint)."""
    f = random_positive_field(spec, rng)
    return Field(f.grid, f.values - f.values.mean())


def _mode_lattice(d: int, cutoff: int):
    if d == 1:
        return [(m,) for m in range(cutoff + 1)]
    out = []
    for m0 in range(-cutoff, cutoff + 1):
        for m1 in range(cutoff + 1):
            out.append((m0, m1))
    return out


def grad_magnitude_sq(g: Field) -> np.ndarray:
    gs = forward_transform(g)
    out = np.zeros(g.grid.shape)
    for k in g.grid.k_axes:
        out += inverse_transform(SpectralField(g.grid, 1j * k * gs.coeffs)).values ** 2
    return out


def deriv_order_magnitude_sq(g: Field, order: int) -> np.ndarray:
    """sum over multi-indices of the given order of (d^beta g)^2, each counted once."""
    out = np.zeros(g.grid.shape)
    for beta in multi_indices(g.grid.d, order):
        out += partial_derivative(g, beta).values ** 2
    return out


def gns_ratio(g: Field, m: int, tuple_orders) -> RatioSample:
    """Weighted interpolation inequality: product of derivatives vs endpoint terms."""
    orders = [int(t) for t in tuple_orders]
    if sum(orders) != m:
        raise TupleOrderMismatch(f"orders {orders} do not sum to m={m}")
    if m > 5:
        raise ValueError(f"m must be <= 5, got {m}")
    if g.min() <= 0:
        raise NonPositiveFunction("gns_ratio requires g > 0")
    k = len(orders)
    gv = g.values
    prod = np.ones(g.grid.shape)
    for ell in orders:
        prod = prod * deriv_order_magnitude_sq(g, ell)
    lhs = integrate(Field(g.grid, prod / gv ** (2 * k - 1)))
    rhs = integrate(Field(g.grid, deriv_order_magnitude_sq(g, m) / gv)) + integrate(
        Field(g.grid, grad_magnitude_sq(g) ** m / gv ** (2 * m - 1))
    )
    return _make_sample(lhs, rhs, {"m": m, "tuple": orders})


def _padded_product(a: Field, b: Field) -> Field:
    """Pointwise product with 3/2 zero-padding to suppress aliasing."""
    grid = a.grid
    n_pad = int(np.ceil(1.5 * grid.n))
    if n_pad % 2:
        n_pad += 1
    big = Grid(grid.d, n_pad, grid.length)

    def upsample(f):
        c = np.fft.fftn(f.values) / grid.n ** grid.d
        cb = np.zeros(big.shape, dtype=np.complex128)
        half = grid.n // 2
        idx = np.r_[0:half, n_pad - half : n_pad]
        src = np.r_[0:half, grid.n - half : grid.n]
        sl = np.ix_(*([idx] * grid.d)) if grid.d > 1 else (idx,)
        ss = np.ix_(*([src] * grid.d)) if grid.d > 1 else (src,)
        cb[sl] = c[ss]
        return np.fft.ifftn(cb * n_pad ** grid.d).real

    prod = upsample(a) * upsample(b)
    c = np.fft.fftn(prod) / n_pad ** grid.d
    half = grid.n // 2
    idx = np.r_[0:half, n_pad - half : n_pad]
    src = np.r_[0:half, grid.n - half : grid.n]
    sl = np.ix_(*([idx] * grid.d)) if grid.d > 1 else (idx,)
    ss = np.ix_(*([src] * grid.d)) if grid.d > 1 else (src,)
    out = np.zeros(grid.shape, dtype=np.complex128)
    out[ss] = c[sl]
    return inverse_transform(SpectralField(grid, out))


def _riesz_apply(f: Field, s: float) -> Field:
    # s = 0 is the identity here; for s > 0 the multiplier |k|^s vanishes at
    # k = 0 on its own, so the zero-mode convention never bites.
    from .spectral import riesz_power

    return riesz_power(f, s) if s != 0 else f


def commutator_ratio(v: list[Field], f: Field, s: float, eps: float) -> RatioSample:
    """Norm of [Lambda^s, v.grad] f against the product of Sobolev norms."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    grid = f.grid
    grad_f = [partial_derivative(f, beta) for beta in _unit_multis(grid.d)]
    lam_f = _riesz_apply(f, s)
    grad_lam_f = [partial_derivative(lam_f, beta) for beta in _unit_multis(grid.d)]

    adv = _sum_fields([_padded_product(vi, gi) for vi, gi in zip(v, grad_f)])
    term1 = _riesz_apply(adv, s)
    term2 = _sum_fields([_padded_product(vi, gi) for vi, gi in zip(v, grad_lam_f)])
    comm = Field(grid, term1.values - term2.values)
    lhs = sobolev_norm(comm, 0.0)

    v_norm = np.sqrt(
        sum(sobolev_norm(vi, grid.d / 2.0 + 1.0 + s + eps) ** 2 for vi in v)
    )
    rhs = v_norm * sobolev_norm(f, s)
    return _make_sample(lhs, rhs, {"s": s, "eps": eps})


def _unit_multis(d: int):
    return [tuple(1 if j == i else 0 for j in range(d)) for i in range(d)]


def _sum_fields(fs: list[Field]) -> Field:
    total = fs[0].values.copy()
    for f in fs[1:]:
        total += f.values
    return Field(fs[0].grid, total)


def power_sobolev_ratio(g: Field, beta: float, k: int) -> RatioSample:
    """Homogeneous Sobolev norm of g^beta against weighted-derivative terms."""
    if g.min() <= 0:
        raise NonPositiveFunction("power_sobolev_ratio requires g > 0")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    gv = g.values
    g_beta = Field(g.grid, gv ** beta)
    lhs = homogeneous_sobolev_norm(g_beta, float(k)) ** 2

    weighted = integrate(
        Field(g.grid, gv ** (2.0 * (beta - 1.0)) * deriv_order_magnitude_sq(g, k))
    )
    grad_log = np.sqrt(grad_magnitude_sq(g)) / gv
    rhs = weighted + float(grad_log.max()) ** (2 * k) * sobolev_norm(g_beta, 0.0) ** 2
    return _make_sample(lhs, rhs, {"beta": beta, "k": k})


@dataclass(frozen=True)
class SweepSummary:
    which: str
    trials: int
    max_ratio: float
    median_ratio: float
    argmax_seed: int
    skipped: int


def run_trials(
    spec: TestFunctionSpec,
    which: str,
    trials: int,
    *,
    m: int = 2,
    tuple_orders=(1, 1),
    s: float = 0.5,
    eps: float = 0.5,
    beta: float = 2.0,
    k: int = 2,
) -> list[tuple[int, RatioSample]]:
    """Evaluate the chosen ratio on `trials` seeded draws (Philox counter RNG)."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    out = []
    for trial in range(trials):
        seed = spec.seed + trial
        rng = np.random.Generator(np.random.Philox(seed))
        if which == "gns":
            g = random_positive_field(spec, rng)
            sample = gns_ratio(g, m, tuple_orders)
        elif which == "commutator":
            v = [random_band_limited_field(spec, rng) for _ in range(spec.d)]
            f = random_band_limited_field(spec, rng)
            sample = commutator_ratio(v, f, s, eps)
        elif which == "power":
            g = random_positive_field(spec, rng)
            sample = power_sobolev_ratio(g, beta, k)
        else:
            raise ValueError(f"unknown inequality {which!r}")
        out.append((seed, sample))
    return out


def summarize(which: str, samples: list[tuple[int, RatioSample]]) -> SweepSummary:
    kept = [(seed, s.ratio) for seed, s in samples if s.ratio is not None]
    skipped = len(samples) - len(kept)
    if not kept:
        return SweepSummary(which, len(samples), 0.0, 0.0, -1, skipped)
    ratios = [r for _, r in kept]
    arg = int(np.argmax(ratios))
    return SweepSummary(
        which,
        len(samples),
        float(np.max(ratios)),
        float(np.median(ratios)),
        kept[arg][0],
        skipped,
    )


def sweep(spec: TestFunctionSpec, which: str, trials: int, **kwargs) -> SweepSummary:
    """Run `trials` seeded draws of the chosen ratio and summarize."""
    return summarize(which, run_trials(spec, which, trials, **kwargs))
