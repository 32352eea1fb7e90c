"""Pseudo-spectral simulation and verification toolkit for compressible flows
with power-law (Riesz) nonlocal interaction.

Subpackages:
    spectral     periodic grids, FFT transforms, fractional operators, norms
    linear       closed-form analysis of the linearized system
    dynamics     nonlinear evolution (primitive and sound-variable forms)
    diagnostics  conserved functionals, virial identities, blow-up certificates
    particles    free-space N-body dynamics under the same kernel
    inequalities randomized stress tests of functional inequalities
    erzf         binary snapshot format
    config       JSON schemas and initial-condition builders
    cli          command-line front end
"""

from .dynamics import (
    FlowState,
    GuardThresholds,
    RunResult,
    SimParams,
    from_q,
    mollify_initial,
    rhs,
    run,
    step,
    to_q,
)
from .errors import (
    CflViolation,
    FormatError,
    GridMismatch,
    GuardTripped,
    NonFinite,
    NonPositiveDensity,
    NonPositiveFunction,
    ParticleCollision,
    RieszflowError,
    SchemaError,
    TupleOrderMismatch,
    WrongRegime,
    ZeroWavevector,
)
from .linear import LinearParams, ModeState, Posedness, classify, evolve_mode
from .spectral import Field, Grid, SpectralField

__version__ = "0.1.0"

__all__ = [
    "CflViolation",
    "Field",
    "FlowState",
    "FormatError",
    "Grid",
    "GridMismatch",
    "GuardThresholds",
    "GuardTripped",
    "LinearParams",
    "ModeState",
    "NonFinite",
    "NonPositiveDensity",
    "NonPositiveFunction",
    "ParticleCollision",
    "Posedness",
    "RieszflowError",
    "RunResult",
    "SchemaError",
    "SimParams",
    "SpectralField",
    "TupleOrderMismatch",
    "WrongRegime",
    "ZeroWavevector",
    "classify",
    "evolve_mode",
    "from_q",
    "mollify_initial",
    "rhs",
    "run",
    "step",
    "to_q",
]
