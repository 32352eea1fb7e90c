"""Nonlinear time evolution of the interacting compressible flow.

Three formulations share one pseudo-spectral right-hand side: the primitive
(rho, u) system, the isentropic sound-variable system in q = rho^gt / gt with
gt = (gamma-1)/2, and the isothermal system in q = ln(rho).  Time stepping is
integrating-factor RK4: the viscous factor exp(-eps |k|^2 dt) is applied
exactly in Fourier space, so eps = 0 reduces to classical RK4.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .errors import CflViolation, GridMismatch, GuardTripped, NonFinite, NonPositiveDensity
from .spectral import Field, Grid, riesz_multiplier

FORMULATIONS = ("primitive", "isentropic_q", "isothermal_q")


@dataclass(frozen=True)
class GuardThresholds:
    """Blow-up guards; max_grad_u=None means 1e3 * (initial value + 1)."""

    max_grad_u: float | None = None
    min_rho: float = 1e-8
    tail_ratio: float = 1e-2


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical parameters of a run."""

    c_p: float
    c_k: float
    alpha: float
    gamma: float
    d: int
    dt: float
    t_end: float
    eps: float = 0.0
    dealias: bool = True
    guards: GuardThresholds = dc_field(default_factory=GuardThresholds)
    allow_extended_alpha: bool = False
    cfl_constant: float = 0.5

    def __post_init__(self):
        if self.c_p < 0:
            raise ValueError(f"c_p must be >= 0, got {self.c_p}")
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not self.allow_extended_alpha and not self.d - 2 < self.alpha < self.d:
            raise ValueError(
                f"alpha must lie in ({self.d - 2}, {self.d}), got {self.alpha}"
            )
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")

    @property
    def gamma_tilde(self) -> float:
        return (self.gamma - 1.0) / 2.0

    @property
    def ck_tilde(self) -> float:
        gt = self.gamma_tilde
        if gt == 0.0:
            return self.c_k
        return self.c_k * gt ** (1.0 / gt)


@dataclass(frozen=True)
class FlowState:
    """State of one formulation at one instant."""

    formulation: str
    scalar: Field
    velocity: tuple[Field, ...]
    t: float = 0.0

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"unknown formulation {self.formulation!r}")
        grid = self.scalar.grid
        if len(self.velocity) != grid.d:
            raise GridMismatch(
                f"expected {grid.d} velocity components, got {len(self.velocity)}"
            )
        for comp in self.velocity:
            if comp.grid != grid:
                raise GridMismatch("velocity component on a different grid")
        object.__setattr__(self, "velocity", tuple(self.velocity))

    @property
    def grid(self) -> Grid:
        return self.scalar.grid


def to_q(rho: Field, gamma: float) -> Field:
    """Sound variable: rho^gt / gt for gamma > 1, ln(rho) for gamma = 1."""
    if rho.min() <= 0:
        raise NonPositiveDensity(f"min(rho) = {rho.min():.3g} <= 0")
    gt = (gamma - 1.0) / 2.0
    if gt == 0.0:
        return Field(rho.grid, np.log(rho.values))
    return Field(rho.grid, rho.values ** gt / gt)


def from_q(q: Field, gamma: float) -> Field:
    """Inverse of to_q."""
    gt = (gamma - 1.0) / 2.0
    if gt == 0.0:
        return Field(q.grid, np.exp(q.values))
    if q.min() <= 0:
        raise NonPositiveDensity(f"min(q) = {q.min():.3g} <= 0")
    return Field(q.grid, (gt * q.values) ** (1.0 / gt))


def density_of(state: FlowState, p: SimParams) -> Field:
    if state.formulation == "primitive":
        return state.scalar
    return from_q(state.scalar, 1.0 if state.formulation == "isothermal_q" else p.gamma)


# -- spectral helpers on raw (unnormalized-FFT) arrays --------------------------

def _fft(a):
    return np.fft.fftn(a)


def _ifft(a):
    return np.fft.ifftn(a).real


def _deriv_hat(grid: Grid, a_hat, axis: int):
    return 1j * grid.k_axes[axis] * a_hat


def _rhs_hat(grid: Grid, p: SimParams, formulation: str, s, u):
    """Spectral tendency (s_hat_dot, [u_hat_dot]) of the chosen formulation.

    Products are formed in physical space; derivatives and the interaction
    multiplier act in Fourier space.  Tendencies are dealiased if enabled.
    """
    d = grid.d
    s_hat = _fft(s)
    u_hat = [_fft(ui) for ui in u]
    ds = [_ifft(_deriv_hat(grid, s_hat, j)) for j in range(d)]

    # advection u . grad(u_i)
    adv = []
    for i in range(d):
        dui = [_ifft(_deriv_hat(grid, u_hat[i], j)) for j in range(d)]
        adv.append(sum(u[j] * dui[j] for j in range(d)))

    interaction = riesz_multiplier(grid, p.alpha - p.d)

    if formulation == "primitive":
        rho = s
        if p.c_p > 0 and p.gamma != 2.0 and rho.min() <= 0:
            raise NonPositiveDensity("primitive pressure term needs rho > 0")
        s_dot = -sum(
            _ifft(_deriv_hat(grid, _fft(rho * u[j]), j)) for j in range(d)
        )
        force_hat = interaction * s_hat
        u_dot = []
        for i in range(d):
            acc = -adv[i] + p.c_k * _ifft(_deriv_hat(grid, force_hat, i))
            if p.c_p > 0:
                acc = acc - p.c_p * p.gamma * rho ** (p.gamma - 2.0) * ds[i]
            u_dot.append(acc)
    elif formulation == "isentropic_q":
        if p.gamma <= 1:
            raise ValueError("isentropic_q requires gamma > 1")
        gt = p.gamma_tilde
        q = s
        if q.min() <= 0:
            raise NonPositiveDensity("isentropic_q requires q > 0")
        div_u = sum(_ifft(_deriv_hat(grid, u_hat[j], j)) for j in range(d))
        s_dot = -sum(u[j] * ds[j] for j in range(d)) - gt * q * div_u
        force_hat = interaction * _fft(q ** (1.0 / gt))
        u_dot = [
            -adv[i]
            - p.c_p * p.gamma * gt * q * ds[i]
            + p.ck_tilde * _ifft(_deriv_hat(grid, force_hat, i))
            for i in range(d)
        ]
    elif formulation == "isothermal_q":
        div_u = sum(_ifft(_deriv_hat(grid, u_hat[j], j)) for j in range(d))
        s_dot = -sum(u[j] * ds[j] for j in range(d)) - div_u
        force_hat = interaction * _fft(np.exp(s))
        u_dot = [
            -adv[i]
            - p.c_p * ds[i]
            + p.c_k * _ifft(_deriv_hat(grid, force_hat, i))
            for i in range(d)
        ]
    else:
        raise ValueError(f"unknown formulation {formulation!r}")

    s_dot_hat = _fft(s_dot)
    u_dot_hat = [_fft(a) for a in u_dot]
    if p.dealias:
        mask = grid.dealias_mask
        s_dot_hat = np.where(mask, s_dot_hat, 0.0)
        u_dot_hat = [np.where(mask, a, 0.0) for a in u_dot_hat]
    return s_dot_hat, u_dot_hat


def rhs(state: FlowState, p: SimParams) -> FlowState:
    """Instantaneous tendency, returned as a FlowState-shaped bundle."""
    grid = state.grid
    s_dot_hat, u_dot_hat = _rhs_hat(
        grid, p, state.formulation, state.scalar.values, [c.values for c in state.velocity]
    )
    s_dot = _ifft(s_dot_hat)
    if not np.all(np.isfinite(s_dot)):
        raise NonFinite("tendency is non-finite")
    return FlowState(
        state.formulation,
        Field(grid, s_dot),
        tuple(Field(grid, _ifft(a)) for a in u_dot_hat),
        state.t,
    )


def wave_speed_bound(grid: Grid, p: SimParams) -> float:
    """max over the lattice of sqrt(max(0, -lambda^2)) / |k|."""
    phase_sq = p.c_p - p.c_k * riesz_multiplier(grid, p.alpha - p.d)
    return float(np.sqrt(np.maximum(phase_sq, 0.0).max()))


def _check_guards(state: FlowState, p: SimParams, grad_u_limit: float):
    grid = state.grid
    u_hat = [_fft(c.values) for c in state.velocity]
    max_grad = 0.0
    for i in range(grid.d):
        for j in range(grid.d):
            max_grad = max(max_grad, float(np.abs(_ifft(_deriv_hat(grid, u_hat[i], j))).max()))
    if max_grad > grad_u_limit:
        raise GuardTripped("max_grad_u", state.t, state)

    if state.formulation == "isentropic_q":
        min_rho = None if state.scalar.min() <= 0 else density_of(state, p).min()
    else:
        min_rho = density_of(state, p).min()
    if min_rho is None or min_rho < p.guards.min_rho:
        raise GuardTripped("density_floor", state.t, state)

    # spectral tail of the scalar: energy in the top 1/6 of retained modes
    s_hat = _fft(state.scalar.values)
    m_max = grid.n / 3.0 if p.dealias else grid.n / 2.0
    tail = np.abs(grid.mode_mag_inf) >= (5.0 / 6.0) * m_max
    power = np.abs(s_hat) ** 2
    power[(0,) * grid.d] = 0.0
    total = float(power.sum())
    if total > 0 and float(power[tail].sum()) / total > p.guards.tail_ratio:
        raise GuardTripped("spectral_tail", state.t, state)
    return max_grad, (min_rho if min_rho is not None else -np.inf)


def max_grad_u(state: FlowState) -> float:
    grid = state.grid
    out = 0.0
    for comp in state.velocity:
        c_hat = _fft(comp.values)
        for j in range(grid.d):
            out = max(out, float(np.abs(_ifft(_deriv_hat(grid, c_hat, j))).max()))
    return out


def step(state: FlowState, p: SimParams, grad_u_limit: float | None = None) -> FlowState:
    """One integrating-factor RK4 step of size p.dt."""
    grid = state.grid
    dt = p.dt

    u_max = max(float(np.abs(c.values).max()) for c in state.velocity)
    dt_cfl = p.cfl_constant * grid.h / (u_max + wave_speed_bound(grid, p) + 1e-300)
    if dt > dt_cfl:
        warnings.warn(
            f"dt={dt:.3g} exceeds CFL estimate {dt_cfl:.3g}", CflViolation, stacklevel=2
        )

    e_half = np.exp(-p.eps * grid.k_sq * dt / 2.0) if p.eps > 0 else 1.0
    e_full = e_half * e_half if p.eps > 0 else 1.0

    def pack_hat(s, u):
        return [_fft(s)] + [_fft(ui) for ui in u]

    def unpack(hats):
        return _ifft(hats[0]), [_ifft(h) for h in hats[1:]]

    def n_of(hats):
        s, u = unpack(hats)
        s_dot_hat, u_dot_hat = _rhs_hat(grid, p, state.formulation, s, u)
        return [s_dot_hat] + u_dot_hat

    y0 = pack_hat(state.scalar.values, [c.values for c in state.velocity])
    k1 = [dt * h for h in n_of(y0)]
    y1 = [e_half * (a + b / 2.0) for a, b in zip(y0, k1)]
    k2 = [dt * h for h in n_of(y1)]
    y2 = [e_half * a + b / 2.0 for a, b in zip(y0, k2)]
    k3 = [dt * h for h in n_of(y2)]
    y3 = [e_full * a + e_half * b for a, b in zip(y0, k3)]
    k4 = [dt * h for h in n_of(y3)]
    y_new = [
        e_full * a + (e_full * b1 + 2.0 * e_half * (b2 + b3) + b4) / 6.0
        for a, b1, b2, b3, b4 in zip(y0, k1, k2, k3, k4)
    ]

    s_new, u_new = unpack(y_new)
    if not all(np.all(np.isfinite(a)) for a in [s_new] + u_new):
        raise NonFinite(f"state became non-finite at t={state.t + dt:.6g}")
    new = FlowState(
        state.formulation,
        Field(grid, s_new),
        tuple(Field(grid, a) for a in u_new),
        state.t + dt,
    )
    if grad_u_limit is None:
        grad_u_limit = p.guards.max_grad_u if p.guards.max_grad_u is not None else np.inf
    _check_guards(new, p, grad_u_limit)
    return new


def mollify_initial(f: Field, eps: float) -> Field:
    """Gaussian mollification realized spectrally: multiplier exp(-eps^2 |k|^2 / 2)."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if eps == 0.0:
        return f
    mult = np.exp(-(eps ** 2) * f.grid.k_sq / 2.0)
    return Field(f.grid, _ifft(mult * _fft(f.values)))


@dataclass
class RunResult:
    """Outcome of a run: diagnostic series plus termination bookkeeping."""

    series: list
    final_state: FlowState
    termination: str                 # "completed" or "guard"
    guard_reason: str | None = None
    guard_time: float | None = None
    snapshots: list = dc_field(default_factory=list)


def run(
    state0: FlowState,
    p: SimParams,
    *,
    report_stride: int = 1,
    snapshot_stride: int = 0,
    rho_inf: float = 0.0,
    center=None,
    snapshot_writer=None,
) -> RunResult:
    """Advance until t_end or a guard trip, collecting energy reports.

    snapshot_writer, if given, is called as snapshot_writer(state, index) every
    snapshot_stride steps (and once more on a guard trip).
    """
    from .diagnostics import energy_report  # local import: diagnostics imports us

    if p.guards.max_grad_u is not None:
        grad_u_limit = p.guards.max_grad_u
    else:
        grad_u_limit = 1e3 * (max_grad_u(state0) + 1.0)

    n_steps = int(round(p.t_end / p.dt))
    series = [energy_report(state0, p, rho_inf=rho_inf, center=center)]
    snapshots = []
    state = state0
    if snapshot_writer is not None:
        snapshots.append(snapshot_writer(state, 0))
    try:
        for i in range(1, n_steps + 1):
            state = step(state, p, grad_u_limit)
            if report_stride and i % report_stride == 0:
                series.append(energy_report(state, p, rho_inf=rho_inf, center=center))
            if snapshot_writer is not None and snapshot_stride and i % snapshot_stride == 0:
                snapshots.append(snapshot_writer(state, i))
    except GuardTripped as trip:
        if snapshot_writer is not None:
            snapshots.append(snapshot_writer(trip.state, -1))
        return RunResult(
            series, trip.state, "guard", trip.reason, trip.time, snapshots
        )
    return RunResult(series, state, "completed", snapshots=snapshots)
