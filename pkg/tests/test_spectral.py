"""Grid, transform, fractional-operator, and norm tests."""

import numpy as np
import pytest

from rieszflow.errors import GridMismatch, NonPositiveDensity
from rieszflow.spectral import (
    Field,
    Grid,
    SpectralField,
    dealias,
    divergence,
    forward_transform,
    gradient,
    homogeneous_sobolev_norm,
    integrate,
    inverse_transform,
    modified_sobolev_norm,
    multi_indices,
    partial_derivative,
    riesz_multiplier,
    riesz_power,
    sobolev_norm,
)

TWO_PI = 2.0 * np.pi


def grid_1d(n=64, length=TWO_PI):
    return Grid(1, n, length)


def cos_mode(grid, m, amplitude=1.0, phase=0.0):
    x = grid.coords()[0]
    k = TWO_PI * m / grid.length
    return Field(grid, amplitude * np.cos(k * x + phase)), k


def random_field(grid, seed=0):
    rng = np.random.Generator(np.random.Philox(seed))
    return Field(grid, rng.standard_normal(grid.shape))


class TestGrid:
    def test_rejects_odd_or_small_n(self):
        with pytest.raises(ValueError):
            Grid(1, 7, 1.0)
        with pytest.raises(ValueError):
            Grid(1, 6, 1.0)

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError):
            Grid(1, 8, 0.0)

    def test_wavevector_lattice(self):
        g = grid_1d(8, 4.0)
        k = np.sort(np.ravel(g.k_axes[0]))
        expected = np.sort(TWO_PI * np.fft.fftfreq(8, d=1.0 / 8) / 4.0)
        assert np.allclose(k, expected)

    def test_equality_and_hash(self):
        assert grid_1d() == grid_1d()
        assert hash(grid_1d()) == hash(grid_1d())
        assert grid_1d(128) != grid_1d(64)


class TestField:
    def test_shape_mismatch(self):
        with pytest.raises(GridMismatch):
            Field(grid_1d(), np.zeros(32))

    def test_nonfinite_rejected(self):
        vals = np.zeros(64)
        vals[3] = np.nan
        with pytest.raises(Exception):
            Field(grid_1d(), vals)

    def test_values_frozen(self):
        f = random_field(grid_1d())
        with pytest.raises(ValueError):
            f.values[0] = 1.0


class TestTransforms:
    def test_constant_field_only_zero_mode(self):
        g = grid_1d()
        sf = forward_transform(Field(g, np.full(g.shape, 3.5)))
        assert sf.coeffs[0] == pytest.approx(3.5)
        assert np.abs(sf.coeffs[1:]).max() < 1e-14

    def test_single_cosine_coefficients(self):
        g = grid_1d()
        f, _ = cos_mode(g, 1)
        c = forward_transform(f).coeffs
        assert c[1] == pytest.approx(0.5, abs=1e-14)
        assert c[-1] == pytest.approx(0.5, abs=1e-14)
        mask = np.ones(g.n, dtype=bool)
        mask[[1, -1]] = False
        assert np.abs(c[mask]).max() < 1e-14

    def test_round_trip(self):
        f = random_field(grid_1d(), seed=5)
        g = inverse_transform(forward_transform(f))
        assert np.allclose(g.values, f.values, rtol=1e-12, atol=1e-12)

    def test_round_trip_2d(self):
        grid = Grid(2, 16, 3.0)
        f = random_field(grid, seed=7)
        g = inverse_transform(forward_transform(f))
        assert np.allclose(g.values, f.values, rtol=1e-12, atol=1e-12)


class TestRieszPower:
    @pytest.mark.parametrize("s", [-1.0, -0.5, 0.5, 1.0, 2.0])
    def test_cosine_eigenfunction(self, s):
        g = grid_1d()
        m = 3
        f, k = cos_mode(g, m)
        out = riesz_power(f, s)
        assert np.allclose(out.values, k ** s * f.values, atol=1e-10)

    def test_constant_negative_power_is_zero(self):
        g = grid_1d()
        out = riesz_power(Field(g, np.ones(g.shape)), -1.0)
        assert np.abs(out.values).max() < 1e-14

    def test_composition_recovers_mean_zero_part(self):
        f = random_field(grid_1d(), seed=2)
        out = riesz_power(riesz_power(f, -1.0), 1.0)
        assert np.allclose(out.values, f.values - f.mean(), atol=1e-10)

    def test_linearity(self):
        g = grid_1d()
        a, b = random_field(g, 1), random_field(g, 2)
        lhs = riesz_power(Field(g, 2.0 * a.values + 3.0 * b.values), 0.7)
        rhs = 2.0 * riesz_power(a, 0.7) + 3.0 * riesz_power(b, 0.7)
        assert np.allclose(lhs.values, rhs.values, atol=1e-10)

    def test_exponent_cap(self):
        with pytest.raises(ValueError):
            riesz_power(random_field(grid_1d()), 9.0)


class TestDerivatives:
    def test_gradient_of_cosine(self):
        g = grid_1d()
        f, k = cos_mode(g, 2)
        x = g.coords()[0]
        (df,) = gradient(f)
        assert np.allclose(df.values, -k * np.sin(k * x), atol=1e-10)

    def test_divergence_of_constant_vector(self):
        g = Grid(2, 16, 1.0)
        v = [Field(g, np.full(g.shape, 2.0)), Field(g, np.full(g.shape, -1.0))]
        assert np.abs(divergence(v).values).max() < 1e-12

    def test_laplacian_identity(self):
        # band-limited (Nyquist-free) so first-derivative composition is exact
        g = grid_1d()
        x = g.coords()[0]
        rng = np.random.Generator(np.random.Philox(3))
        f = Field(
            g,
            sum(
                rng.standard_normal() * np.cos(m * x + rng.random())
                for m in range(1, g.n // 3)
            ),
        )
        lap = divergence(gradient(f))
        assert np.allclose(lap.values, -riesz_power(f, 2.0).values, atol=1e-10)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            divergence([random_field(grid_1d(64)), random_field(grid_1d(64))])


class TestNorms:
    def test_zero_field(self):
        g = grid_1d()
        assert sobolev_norm(Field(g, np.zeros(g.shape)), 1.0) == 0.0

    def test_single_mode_h1(self):
        g = grid_1d()
        f, k = cos_mode(g, 3)
        expected = np.sqrt((1.0 + k ** 2) * g.length / 2.0)
        assert sobolev_norm(f, 1.0) == pytest.approx(expected, rel=1e-12)

    def test_monotone_in_s_for_mean_zero(self):
        f = random_field(grid_1d(), seed=4)
        f = Field(f.grid, f.values - f.values.mean())
        norms = [sobolev_norm(f, s) for s in (-1.0, 0.0, 0.5, 1.0, 2.0)]
        assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))

    def test_parseval(self):
        f = random_field(grid_1d(), seed=6)
        quad = integrate(Field(f.grid, f.values ** 2))
        assert sobolev_norm(f, 0.0) ** 2 == pytest.approx(quad, rel=1e-10)

    def test_homogeneous_norm_drops_mean(self):
        f = random_field(grid_1d(), seed=8)
        shifted = Field(f.grid, f.values + 10.0)
        assert homogeneous_sobolev_norm(f, 1.0) == pytest.approx(
            homogeneous_sobolev_norm(shifted, 1.0), rel=1e-12
        )


class TestModifiedNorm:
    def test_constant_is_zero(self):
        g = grid_1d()
        assert modified_sobolev_norm(Field(g, np.ones(g.shape)), 3) == 0.0

    def test_scaling_homogeneity(self):
        g = grid_1d()
        rho = Field(g, 2.0 + np.cos(g.coords()[0]))
        lam = 3.7
        scaled = Field(g, lam * rho.values)
        assert modified_sobolev_norm(scaled, 2) == pytest.approx(
            np.sqrt(lam) * modified_sobolev_norm(rho, 2), rel=1e-12
        )

    def test_first_order_against_quadrature(self):
        # rho = 1 + cos(x)/2 on [0, 2 pi): direct trapezoidal quadrature of
        # int (rho')^2 / rho at high resolution as the oracle.
        n = 4096
        x = np.linspace(0.0, TWO_PI, n, endpoint=False)
        rho_v = 1.0 + 0.5 * np.cos(x)
        drho_v = -0.5 * np.sin(x)
        oracle = np.sqrt(np.sum(drho_v ** 2 / rho_v) * (TWO_PI / n))

        g = grid_1d(256)
        rho = Field(g, 1.0 + 0.5 * np.cos(g.coords()[0]))
        assert modified_sobolev_norm(rho, 1) == pytest.approx(oracle, rel=1e-8)

    def test_rejects_nonpositive(self):
        g = grid_1d()
        with pytest.raises(NonPositiveDensity):
            modified_sobolev_norm(Field(g, np.cos(g.coords()[0])), 1)

    def test_dominates_gradient_sobolev_norm(self):
        rng = np.random.Generator(np.random.Philox(11))
        g = grid_1d(128)
        x = g.coords()[0]
        for _ in range(5):
            rho_v = 2.0 + sum(
                0.2 * rng.standard_normal() * np.cos(m * x + rng.random())
                for m in range(1, 6)
            )
            rho = Field(g, rho_v)
            m = 3
            lhs = np.sqrt(
                sum(
                    sobolev_norm(d, float(m - 1)) ** 2 for d in gradient(rho)
                )
            )
            rhs = np.sqrt(rho.max()) * modified_sobolev_norm(rho, m)
            # binomial weights of (1+|k|^2)^(m-1)|k|^2 against the unweighted
            # per-order sums of the density-weighted norm
            slack = np.sqrt(2.0 ** (m - 1))
            assert lhs <= slack * rhs * (1.0 + 1e-10)


class TestMultiIndices:
    def test_count_1d(self):
        assert list(multi_indices(1, 3)) == [(3,)]

    def test_count_2d(self):
        assert sorted(multi_indices(2, 2)) == [(0, 2), (1, 1), (2, 0)]

    def test_partial_derivative_mixed(self):
        g = Grid(2, 32, TWO_PI)
        x, y = g.coords()
        f = Field(g, np.sin(x) * np.cos(2 * y))
        df = partial_derivative(f, (1, 1))
        expected = -2.0 * np.cos(x) * np.sin(2 * y)
        assert np.allclose(df.values, expected, atol=1e-10)


class TestDealias:
    def test_band_limited_unchanged(self):
        g = grid_1d(64)
        f, _ = cos_mode(g, g.n // 4)
        sf = forward_transform(f)
        assert np.allclose(dealias(sf).coeffs, sf.coeffs)

    def test_high_mode_zeroed(self):
        g = grid_1d(64)
        f, _ = cos_mode(g, g.n // 2 - 1)
        out = dealias(forward_transform(f))
        assert np.abs(out.coeffs).max() < 1e-14

    def test_idempotent(self):
        sf = forward_transform(random_field(grid_1d(), seed=9))
        once = dealias(sf)
        twice = dealias(once)
        assert np.array_equal(once.coeffs, twice.coeffs)


class TestRieszMultiplier:
    def test_zero_mode_is_zero(self):
        g = grid_1d()
        for s in (-1.0, 0.0, 1.0):
            assert riesz_multiplier(g, s)[0] == 0.0

    def test_values(self):
        g = grid_1d(8, TWO_PI)
        mult = riesz_multiplier(g, -1.0)
        assert mult[1] == pytest.approx(1.0)
        assert mult[2] == pytest.approx(0.5)
