"""Conserved functionals, virial identities, and finite-time blow-up certificates.

All functionals are evaluated on the periodic box as free-space surrogates:
the moment of inertia I and weighted momentum W use the deviation density
rho_c = rho - rho_inf and box-centered coordinates, and are meaningful only
while the support of rho_c stays away from the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from .errors import NonPositiveDensity, WrongRegime
from .dynamics import FlowState, SimParams, density_of, max_grad_u
from .spectral import Field, forward_transform, integrate, riesz_multiplier, riesz_power


@dataclass(frozen=True)
class EnergyReport:
    """All tracked functionals at one instant."""

    t: float
    mass: float
    momentum: tuple[float, ...]
    e_u: float
    e_int: float
    e_k: float
    e_total: float
    i_mom: float
    w_mom: float
    j: float
    max_grad_u: float
    min_rho: float

    CSV_COLUMNS = (
        "t", "mass", "mom", "E_u", "E_int", "E_K", "E_total",
        "I", "W", "J", "max_grad_u", "min_rho",
    )

    def row(self) -> list[float]:
        return (
            [self.t, self.mass]
            + list(self.momentum)
            + [self.e_u, self.e_int, self.e_k, self.e_total,
               self.i_mom, self.w_mom, self.j, self.max_grad_u, self.min_rho]
        )


def internal_energy(rho: Field, gamma: float) -> float:
    """(1/(gamma-1)) int rho^gamma for gamma > 1, int rho ln(rho) for gamma = 1."""
    if gamma > 1:
        return integrate(Field(rho.grid, rho.values ** gamma)) / (gamma - 1.0)
    if rho.min() <= 0:
        raise NonPositiveDensity("isothermal internal energy needs rho > 0")
    return integrate(Field(rho.grid, rho.values * np.log(rho.values)))


def interaction_energy(rho: Field, alpha: float, d: int) -> float:
    """(1/2) sum over k != 0 of |k|^(alpha-d) |rho_hat|^2 L^d (Plancherel form)."""
    grid = rho.grid
    c = forward_transform(rho).coeffs
    mult = riesz_multiplier(grid, alpha - d)
    return 0.5 * float(np.sum(mult * np.abs(c) ** 2)) * grid.length ** grid.d


def interaction_energy_direct(rho: Field, alpha: float, d: int) -> float:
    """(1/2) int rho * (fractional operator applied to rho), by grid quadrature."""
    return 0.5 * integrate(rho * riesz_power(rho, alpha - d))


def energy_report(
    state: FlowState,
    p: SimParams,
    *,
    rho_inf: float = 0.0,
    center=None,
) -> EnergyReport:
    """Evaluate every functional on a (converted-to-primitive) state."""
    rho = density_of(state, p)
    grid = rho.grid
    u = state.velocity
    if center is None:
        center = [grid.length / 2.0] * grid.d
    coords = grid.coords()
    x_c = [x - c0 for x, c0 in zip(coords, center)]

    dv = grid.cell_volume
    mass = integrate(rho)
    momentum = tuple(integrate(rho * ui) for ui in u)
    speed_sq = sum(ui.values ** 2 for ui in u)
    e_u = 0.5 * float(np.sum(rho.values * speed_sq)) * dv
    e_int = internal_energy(rho, p.gamma)
    e_k = interaction_energy(rho, p.alpha, p.d)
    e_total = e_u + p.c_p * e_int - p.c_k * e_k

    rho_c = rho.values - rho_inf
    r_sq = sum(np.broadcast_to(x * x, grid.shape) for x in x_c)
    i_mom = 0.5 * float(np.sum(rho_c * r_sq)) * dv
    u_dot_x = sum(ui.values * x for ui, x in zip(u, x_c))
    w_mom = float(np.sum(rho_c * u_dot_x)) * dv
    j = e_total * (state.t + 1.0) ** 2 - w_mom * (state.t + 1.0) + i_mom

    return EnergyReport(
        t=state.t,
        mass=mass,
        momentum=momentum,
        e_u=e_u,
        e_int=e_int,
        e_k=e_k,
        e_total=e_total,
        i_mom=i_mom,
        w_mom=w_mom,
        j=j,
        max_grad_u=max_grad_u(state),
        min_rho=rho.min(),
    )


def virial_rhs(report: EnergyReport, p: SimParams) -> float:
    """Predicted dW/dt: 2 E_u + c_p d (gamma-1) E_int + c_p d [gamma=1] mass - alpha c_K E_K."""
    kronecker = 1.0 if p.gamma == 1.0 else 0.0
    return (
        2.0 * report.e_u
        + p.c_p * p.d * (p.gamma - 1.0) * report.e_int
        + p.c_p * p.d * kronecker * report.mass
        - p.alpha * p.c_k * report.e_k
    )


def cauchy_schwarz_check(report: EnergyReport, tol: float = 1e-9) -> bool:
    """W^2 <= 4 E_u I up to relative slack tol."""
    return report.w_mom ** 2 <= 4.0 * report.e_u * report.i_mom * (1.0 + tol) + tol


def j_functional(report: EnergyReport) -> float:
    """E_total (t+1)^2 - W (t+1) + I."""
    t1 = report.t + 1.0
    return report.e_total * t1 ** 2 - report.w_mom * t1 + report.i_mom


def j_decay_check(series, p: SimParams, slack: float = 0.05) -> bool:
    """Pointwise decay bound J(t) <= J(0) / (t+1)^(d(gamma-1)-2), with slack."""
    j0 = j_functional(series[0])
    expo = p.d * (p.gamma - 1.0) - 2.0
    for rep in series:
        bound = j0 / (rep.t + 1.0) ** expo
        if j_functional(rep) > bound * (1.0 + slack) + 1e-14:
            return False
    return True


def c_d_gamma(d: int, gamma: float) -> float:
    """max{2, d(gamma-1)}: coefficient of the attractive moment envelope."""
    return max(2.0, d * (gamma - 1.0))


def c_d_gamma_alpha(d: int, gamma: float, alpha: float) -> float:
    """max{2, d(gamma-1), alpha}: coefficient of the repulsive moment envelope."""
    return max(2.0, d * (gamma - 1.0), alpha)


def c0_constant(mass: float, gamma: float, d: int) -> float:
    """Lower-bound constant for the internal energy in terms of I.

    c0 = (pi^(d/2) / Gamma(d/2+1))^(1-gamma)
         * mass^(((d+2)gamma-d)/2) / 2^(((d+2)gamma-d)(gamma-1)/2)
    """
    if mass <= 0:
        raise ValueError(f"mass must be positive, got {mass}")
    if gamma <= 1:
        raise ValueError(f"gamma must be > 1, got {gamma}")
    ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    expo = ((d + 2.0) * gamma - d) / 2.0
    return ball ** (1.0 - gamma) * mass ** expo / 2.0 ** (expo * (gamma - 1.0))


def entropy_splitting_constant(eps: float, d: int) -> float:
    """Tight constant from pointwise maximization of -s ln s - s sigma:
    C_eps = e^(-1) (2 pi eps)^(d/2)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return math.exp(-1.0) * (2.0 * math.pi * eps) ** (d / 2.0)


@dataclass(frozen=True)
class BlowupCertificate:
    """Numerical evaluation of one blow-up theorem's hypotheses on given data."""

    kind: str
    inputs: dict
    hypotheses: dict
    hypotheses_satisfied: bool
    predicted_bound_time: float | None
    constants: dict = dc_field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "inputs": self.inputs,
            "hypotheses": self.hypotheses,
            "hypotheses_satisfied": self.hypotheses_satisfied,
            "predicted_bound_time": self.predicted_bound_time,
            "constants": self.constants,
            "notes": list(self.notes),
        }


def _finite(*vals) -> bool:
    return all(math.isfinite(v) for v in vals)


def check_attractive(report0: EnergyReport, p: SimParams) -> BlowupCertificate:
    """Attractive isentropic criterion: negative total energy forces finite life-span."""
    if p.gamma <= 1 or p.c_k <= 0:
        raise WrongRegime(
            f"attractive isentropic criterion needs gamma > 1 and c_K > 0, "
            f"got gamma={p.gamma}, c_K={p.c_k}"
        )
    c = c_d_gamma(p.d, p.gamma)
    hyp = {
        "alpha_large_enough": p.alpha >= c,
        "negative_total_energy": report0.e_total < 0.0,
        "finite_functionals": _finite(report0.i_mom, report0.w_mom, report0.e_total),
    }
    satisfied = all(hyp.values())
    bound_time = None
    if satisfied:
        # positive root of I0 + W0 t + (c/2) E0 t^2, with E0 < 0
        e0, w0, i0 = report0.e_total, report0.w_mom, report0.i_mom
        disc = w0 ** 2 - 2.0 * c * e0 * i0
        bound_time = (w0 + math.sqrt(disc)) / (c * abs(e0))
    return BlowupCertificate(
        kind="attractive_isentropic",
        inputs={"I0": report0.i_mom, "W0": report0.w_mom, "E0": report0.e_total,
                "alpha": p.alpha, "gamma": p.gamma, "d": p.d},
        hypotheses=hyp,
        hypotheses_satisfied=satisfied,
        predicted_bound_time=bound_time,
        constants={"c_d_gamma": c},
    )


def moment_upper_bound(report0: EnergyReport, p: SimParams, t):
    """I(0) + W(0) t + (c_{d,gamma,alpha}/2) E(0) t^2."""
    c = c_d_gamma_alpha(p.d, p.gamma, p.alpha)
    t = np.asarray(t, dtype=float)
    return report0.i_mom + report0.w_mom * t + 0.5 * c * report0.e_total * t ** 2


def check_repulsive(report0: EnergyReport, p: SimParams) -> BlowupCertificate:
    """Repulsive isentropic criterion via the decaying J functional."""
    notes = []
    if p.gamma <= 1 or p.c_k >= 0:
        raise WrongRegime(
            f"repulsive isentropic criterion needs gamma > 1 and c_K < 0, "
            f"got gamma={p.gamma}, c_K={p.c_k}"
        )
    c = c_d_gamma_alpha(p.d, p.gamma, p.alpha)
    c0 = c0_constant(report0.mass, p.gamma, p.d)
    e0, w0, i0 = report0.e_total, report0.w_mom, report0.i_mom
    j0 = e0 - w0 + i0
    threshold = 2.0 * p.c_p * c0 / (c * e0) if e0 > 0 else math.inf
    if p.c_p != 1.0:
        notes.append(f"threshold scaled by c_p={p.c_p} (theorem normalizes c_p=1)")
    if p.c_k != -1.0:
        notes.append(f"c_K={p.c_k} absorbed into E_K inside the total energy")
    hyp = {
        "gamma_in_range": 1.0 < p.gamma <= 1.0 + 2.0 / p.d,
        "alpha_large_enough": p.alpha >= p.d * (p.gamma - 1.0),
        "j0_below_threshold": j0 < threshold,
        "finite_functionals": _finite(i0, w0, e0, report0.mass),
    }
    satisfied = all(hyp.values())
    bound_time = None
    if satisfied:
        bound_time = _repulsive_bound_time(report0, p, c, c0, j0)
    return BlowupCertificate(
        kind="repulsive_isentropic",
        inputs={"I0": i0, "W0": w0, "E0": e0, "mass": report0.mass,
                "alpha": p.alpha, "gamma": p.gamma, "d": p.d},
        hypotheses=hyp,
        hypotheses_satisfied=satisfied,
        predicted_bound_time=bound_time,
        constants={"c0": c0, "c_d_gamma_alpha": c, "j0": j0, "threshold": threshold},
        notes=tuple(notes),
    )


def _repulsive_bound_time(report0, p, c, c0, j0):
    """First time the decay upper bound on J drops below its coercive lower bound."""
    expo = p.d * (p.gamma - 1.0) / 2.0

    def gap(t):
        upper = j0 / (t + 1.0) ** (p.d * (p.gamma - 1.0) - 2.0)
        i_bound = moment_upper_bound(report0, p, t)
        if i_bound <= 0:
            return -1.0  # moment of inertia already forced negative
        lower = p.c_p * c0 * (t + 1.0) ** 2 / i_bound ** expo
        return upper - lower

    t_lo, t_hi = 0.0, 1.0
    while gap(t_hi) > 0:
        t_hi *= 2.0
        if t_hi > 1e9:
            return None
    if gap(t_lo) <= 0:
        return t_lo
    return float(brentq(gap, t_lo, t_hi, xtol=1e-12, rtol=1e-12))


def isothermal_bound_curve(i0: float, w0: float, c_tilde: float, t):
    """Explicit Gronwall envelope for the moment of inertia."""
    t = np.asarray(t, dtype=float)
    return (
        (i0 + c_tilde) * np.exp(t)
        + 0.5 * (np.exp(t) - np.exp(-t)) * (w0 - i0 - c_tilde)
        - c_tilde
    )


def check_isothermal(
    report0: EnergyReport, p: SimParams, eps: float | None = None
) -> BlowupCertificate:
    """Isothermal (gamma = 1) criterion from the second-order moment inequality."""
    if p.gamma != 1.0:
        raise WrongRegime(f"isothermal criterion needs gamma = 1, got {p.gamma}")
    if p.c_k == 0.0:
        raise WrongRegime("isothermal criterion needs c_K != 0")
    notes = []
    attractive = p.c_k > 0
    if attractive or p.alpha < 0:
        coeff = 2.0
    else:
        coeff = max(2.0, p.alpha)
    if eps is None:
        eps = coeff
    else:
        notes.append(f"entropy-splitting eps overridden to {eps}")
    c_eps = entropy_splitting_constant(eps, p.d)
    e1 = report0.e_total
    c_tilde = coeff * e1 + p.d * report0.mass + c_eps
    i0, w0 = report0.i_mom, report0.w_mom

    hyp = {
        "alpha_large_enough": (p.alpha >= 2.0) if attractive else True,
        "negative_combination": w0 + i0 + c_tilde < 0.0,
        "finite_functionals": _finite(i0, w0, e1, report0.mass),
        "unit_coefficients": p.c_p == 1.0 and abs(p.c_k) == 1.0,
    }
    if not hyp["unit_coefficients"]:
        notes.append("theorem stated at c_p = 1, |c_K| = 1; verdict is advisory")
    satisfied = all(hyp.values())
    bound_time = None
    if satisfied:
        t_hi = 1.0
        while isothermal_bound_curve(i0, w0, c_tilde, t_hi) > 0:
            t_hi *= 2.0
            if t_hi > 1e6:
                break
        else:
            bound_time = float(
                brentq(
                    lambda t: float(isothermal_bound_curve(i0, w0, c_tilde, t)),
                    0.0, t_hi, xtol=1e-12, rtol=1e-12,
                )
            ) if isothermal_bound_curve(i0, w0, c_tilde, 0.0) > 0 else 0.0
    return BlowupCertificate(
        kind="isothermal",
        inputs={"I0": i0, "W0": w0, "E1_0": e1, "mass": report0.mass,
                "alpha": p.alpha, "c_k": p.c_k, "d": p.d},
        hypotheses=hyp,
        hypotheses_satisfied=satisfied,
        predicted_bound_time=bound_time,
        constants={"C_eps": c_eps, "C_tilde": c_tilde, "eps": eps, "coeff": coeff},
        notes=tuple(notes),
    )
