"""Closed-form analysis of the linearization around the uniform state (rho, u) = (1, 0).

Per Fourier mode k the linearized system is

    d/dt rho_hat = -i k . u_hat,
    d/dt u_hat   = -i k (c_p - c_K |k|^(alpha-d)) rho_hat,

so rho_hat satisfies rho_hat'' = lambda^2(k) rho_hat with

    lambda^2(k) = |k|^2 (c_K |k|^(alpha-d) - c_p).

Negative lambda^2 means oscillation at omega = sqrt(-lambda^2); positive
lambda^2 means exponential growth.  The transverse part of u_hat is frozen.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroWavevector


class Posedness(enum.Enum):
    WELL_POSED = "well-posed"
    ILL_POSED = "ill-posed"


@dataclass(frozen=True)
class LinearParams:
    """Coefficients of the linearized system."""

    c_p: float
    c_k: float
    alpha: float
    d: int

    def __post_init__(self):
        if self.c_p < 0:
            raise ValueError(f"c_p must be >= 0, got {self.c_p}")
        if not self.d - 2 < self.alpha < self.d:
            raise ValueError(
                f"alpha must lie in ({self.d - 2}, {self.d}), got {self.alpha}"
            )


@dataclass(frozen=True)
class ModeState:
    """One Fourier mode of the linearized solution."""

    k: np.ndarray
    rho_hat: complex
    u_hat: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.k, dtype=np.float64))
        u = np.atleast_1d(np.asarray(self.u_hat, dtype=np.complex128))
        if k.shape != u.shape:
            raise ValueError(f"k shape {k.shape} != u_hat shape {u.shape}")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(u))):
            raise ValueError("non-finite mode state")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "u_hat", u)


def growth_rate_squared(k, p: LinearParams) -> float:
    """lambda^2(k) = |k|^2 (c_K |k|^(alpha-d) - c_p)."""
    k_mag = float(np.linalg.norm(np.atleast_1d(k)))
    if k_mag == 0.0:
        raise ZeroWavevector("growth rate undefined at k = 0")
    return k_mag ** 2 * (p.c_k * k_mag ** (p.alpha - p.d) - p.c_p)


def classify(p: LinearParams) -> Posedness:
    """Well-posed iff lambda^2(k) stays bounded above as |k| -> infinity.

    Since alpha - d < 0 the interaction term decays at high k, so the verdict
    is ill-posed exactly when c_K > 0 with no pressure to dominate it.
    """
    if p.c_k > 0 and p.c_p == 0:
        return Posedness.ILL_POSED
    return Posedness.WELL_POSED


def quadratic_invariant(m: ModeState, p: LinearParams) -> float:
    """(c_p - c_K |k|^(alpha-d)) |rho_hat|^2 + |u_hat|^2, conserved by the flow."""
    k_mag = float(np.linalg.norm(m.k))
    if k_mag == 0.0:
        raise ZeroWavevector("invariant undefined at k = 0")
    a = p.c_p - p.c_k * k_mag ** (p.alpha - p.d)
    return a * abs(m.rho_hat) ** 2 + float(np.sum(np.abs(m.u_hat) ** 2))


def evolve_mode(m0: ModeState, p: LinearParams, t: float) -> ModeState:
    """Exact solution of the per-mode linear ODE after time t."""
    k_mag = float(np.linalg.norm(m0.k))
    if k_mag == 0.0:
        raise ZeroWavevector("cannot evolve the k = 0 mode")
    k_hat = m0.k / k_mag
    v0 = complex(np.dot(k_hat, m0.u_hat))         # longitudinal component
    u_perp = m0.u_hat - v0 * k_hat                # transverse part is frozen

    lam_sq = growth_rate_squared(m0.k, p)
    rho0 = complex(m0.rho_hat)
    drho0 = -1j * k_mag * v0
    a = p.c_p - p.c_k * k_mag ** (p.alpha - p.d)  # so lam_sq = -a |k|^2
    dv0 = -1j * k_mag * a * rho0

    if lam_sq < 0.0:
        omega = math.sqrt(-lam_sq)
        c, s = math.cos(omega * t), math.sin(omega * t)
        rho_t = rho0 * c + drho0 * s / omega
        v_t = v0 * c + dv0 * s / omega
    elif lam_sq > 0.0:
        mu = math.sqrt(lam_sq)
        c, s = math.cosh(mu * t), math.sinh(mu * t)
        rho_t = rho0 * c + drho0 * s / mu
        v_t = v0 * c + dv0 * s / mu
    else:
        # degenerate boundary: rho drifts linearly, u is frozen
        rho_t = rho0 + t * drho0
        v_t = v0

    return ModeState(m0.k, rho_t, u_perp + v_t * k_hat, m0.t + t)


def dispersion_table(p: LinearParams, k_max: float, num: int = 256):
    """Rows (|k|, lambda^2, omega-or-rate, class) for |k| in (0, k_max]."""
    verdict = classify(p).value
    rows = []
    for k_mag in np.linspace(k_max / num, k_max, num):
        lam_sq = growth_rate_squared(np.array([k_mag]), p)
        rate = math.sqrt(abs(lam_sq))
        rows.append((float(k_mag), float(lam_sq), rate, verdict))
    return rows
