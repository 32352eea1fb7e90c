"""Command-line front end: parsing, orchestration, and serialization.

Subcommands: dispersion, simulate, particles, blowup, inequalities,
convergence.  All numeric output is formatted with 17 significant digits and
JSON keys are sorted, so identical configs and seeds give byte-identical
artifacts.  Exit codes: 0 success, 1 usage, 2 schema violation, 3 runtime
guard trip, 4 I/O or format error.
"""

from __future__ import annotations

import os

# ERZ_THREADS caps the BLAS/FFT worker pools; it must be set before numpy
# loads its backends, hence before any other package import.
if "ERZ_THREADS" in os.environ:
    _t = str(max(1, int(os.environ["ERZ_THREADS"])))
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _t)

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import diagnostics, dynamics, inequalities, linear, particles
from .erzf import write_fields, write_snapshot
from .errors import FormatError, GuardTripped, SchemaError
from .spectral import Field, sobolev_norm

log = logging.getLogger("rieszflow")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCHEMA = 2
EXIT_GUARD = 3
EXIT_IO = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _apply_overrides(cfg: dict, pairs):
    """--set a.b=value overrides, applied before validation (flags win)."""
    for pair in pairs or []:
        if "=" not in pair:
            raise _UsageError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return cfg


def _series_header(d: int):
    return (
        ["t", "mass"]
        + [f"mom_{i}" for i in range(1, d + 1)]
        + ["E_u", "E_int", "E_K", "E_total", "I", "W", "J", "max_grad_u", "min_rho"]
    )


def _load(args, schema, defaults):
    with open(args.config) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError([f"invalid JSON: {exc}"]) from exc
    _apply_overrides(cfg, getattr(args, "set", None))
    return cfgmod.validate(cfg, schema, defaults)


# -- subcommands ----------------------------------------------------------------

def cmd_dispersion(args) -> int:
    p = linear.LinearParams(c_p=args.cp, c_k=args.ck, alpha=args.alpha, d=args.d)
    rows = linear.dispersion_table(p, args.kmax, args.num)
    out = Path(args.out)
    _write_csv(out, ("k_mag", "lambda_sq", "omega_or_rate", "class"), rows)
    if args.figures:
        from . import plots

        plots.plot_dispersion(rows, out.with_suffix(".png"))
    return EXIT_OK


def _snapshot_writer(snapshot_dir):
    if not snapshot_dir:
        return None
    snap = Path(snapshot_dir)
    snap.mkdir(parents=True, exist_ok=True)

    def writer(state, index):
        name = "snapshot_final.erzf" if index < 0 else f"snapshot_{index:06d}.erzf"
        path = snap / name
        write_snapshot(state, path)
        return path

    return writer


def _run_simulation(cfg):
    p = cfgmod.sim_params_from_config(cfg)
    state0 = cfgmod.initial_state(cfg)
    out = cfg.get("output") or {}
    result = dynamics.run(
        state0,
        p,
        report_stride=out.get("report_stride", 1),
        snapshot_stride=out.get("snapshot_stride", 0),
        rho_inf=cfg.get("rho_inf", 0.0),
        snapshot_writer=_snapshot_writer(out.get("snapshot_dir")),
    )
    return p, result


def _emit_series(cfg, result):
    out = cfg.get("output") or {}
    if "series_csv" in out:
        header = _series_header(cfg["d"])
        rows = [rep.row() for rep in result.series]
        path = _write_csv(out["series_csv"], header, rows)
        if out.get("figures"):
            from . import plots

            plots.plot_series(result.series, Path(path).with_suffix(".png"))


def _emit_certificate(cfg, p, report0, criterion, cert_path=None):
    if criterion == "attractive":
        cert = diagnostics.check_attractive(report0, p)
    elif criterion == "repulsive":
        cert = diagnostics.check_repulsive(report0, p)
    else:
        cert = diagnostics.check_isothermal(report0, p)
    payload = cert.to_dict()
    cfgmod.validate(payload, cfgmod.CERTIFICATE_SCHEMA)
    if cert_path:
        _write_json(cert_path, payload)
    return cert


def cmd_simulate(args) -> int:
    cfg = _load(args, cfgmod.SIMULATE_SCHEMA, cfgmod.SIMULATE_DEFAULTS)
    p, result = _run_simulation(cfg)
    _emit_series(cfg, result)
    if cfg.get("criterion"):
        out = cfg.get("output") or {}
        cert_path = out.get("series_csv")
        cert_path = (
            Path(cert_path).with_name("certificate.json") if cert_path else None
        )
        _emit_certificate(cfg, p, result.series[0], cfg["criterion"], cert_path)
    if result.termination == "guard":
        log.warning(
            "guard %r tripped at t=%.6g", result.guard_reason, result.guard_time
        )
        return EXIT_GUARD
    return EXIT_OK


def _bound_curve(cert, p, report0):
    bt = cert.predicted_bound_time
    t_hi = 2.0 * bt if bt else 1.0
    ts = np.linspace(0.0, t_hi, 201)
    if cert.kind == "isothermal":
        bound = diagnostics.isothermal_bound_curve(
            report0.i_mom, report0.w_mom, cert.constants["C_tilde"], ts
        )
    elif cert.kind == "attractive_isentropic":
        c = cert.constants["c_d_gamma"]
        bound = report0.i_mom + report0.w_mom * ts + 0.5 * c * report0.e_total * ts ** 2
    else:
        bound = diagnostics.moment_upper_bound(report0, p, ts)
    return ts, np.asarray(bound)


def cmd_blowup(args) -> int:
    cfg = _load(args, cfgmod.SIMULATE_SCHEMA, cfgmod.SIMULATE_DEFAULTS)
    p = cfgmod.sim_params_from_config(cfg)
    state0 = cfgmod.initial_state(cfg)
    report0 = diagnostics.energy_report(state0, p, rho_inf=cfg.get("rho_inf", 0.0))
    cert = _emit_certificate(cfg, p, report0, args.criterion, args.out)
    ts, bound = _bound_curve(cert, p, report0)
    curve_path = Path(args.out).with_suffix(".csv")
    _write_csv(curve_path, ("t", "I_bound"), list(zip(ts, bound)))
    if args.figures:
        from . import plots

        plots.plot_bound_curve(
            ts, bound, Path(args.out).with_suffix(".png"), cert.predicted_bound_time
        )
    if args.run:
        result = dynamics.run(
            state0, p, rho_inf=cfg.get("rho_inf", 0.0),
            snapshot_writer=_snapshot_writer((cfg.get("output") or {}).get("snapshot_dir")),
        )
        _emit_series(cfg, result)
        if result.termination == "guard":
            return EXIT_GUARD
    return EXIT_OK


def _gaussian_cloud(cfg):
    init = cfg["init"]
    rng = np.random.Generator(np.random.Philox(cfg.get("seed", 0)))
    n, d = cfg["N"], cfg["d"]
    spread = init.get("spread", 1.0)
    v_spread = init.get("v_spread", 0.0)
    center = np.asarray(init.get("center") or [0.0] * d)
    positions = center + spread * rng.standard_normal((n, d))
    velocities = v_spread * rng.standard_normal((n, d))
    return particles.ParticleEnsemble(
        positions, velocities, alpha=cfg["alpha"], c_k=cfg["ck"],
        softening=cfg.get("delta", 0.0),
    )


def cmd_particles(args) -> int:
    cfg = _load(args, cfgmod.PARTICLES_SCHEMA, cfgmod.PARTICLES_DEFAULTS)
    ens = _gaussian_cloud(cfg)
    out = cfg.get("output") or {}
    report_stride = out.get("report_stride", 1)
    snapshot_stride = out.get("snapshot_stride", 0)
    snap_dir = out.get("snapshot_dir")
    if snap_dir:
        Path(snap_dir).mkdir(parents=True, exist_ok=True)

    def snapshot(e, index):
        fields = {}
        for i in range(e.d):
            fields[f"x_{i + 1}"] = e.positions[:, i]
            fields[f"v_{i + 1}"] = e.velocities[:, i]
        write_fields(
            Path(snap_dir) / f"particles_{index:06d}.erzf", 1, [e.n], 0.0, fields
        )

    def row(t, e):
        f = particles.particle_functionals(e)
        return [t, f["I"], f["W"], f["E_u"], f["E_K"], particles.hamiltonian(e)]

    dt, t_end = cfg["dt"], cfg["t_end"]
    n_steps = int(round(t_end / dt))
    rows = [row(0.0, ens)]
    if snap_dir:
        snapshot(ens, 0)
    acc = None
    for i in range(1, n_steps + 1):
        ens, acc = particles.verlet_step(ens, dt, acc)
        if i % report_stride == 0:
            rows.append(row(i * dt, ens))
        if snap_dir and snapshot_stride and i % snapshot_stride == 0:
            snapshot(ens, i)
    if "series_csv" in out:
        path = _write_csv(out["series_csv"], ("t", "I", "W", "E_u", "E_K", "H"), rows)
        if out.get("figures"):
            from . import plots

            plots.plot_particle_series(
                [[float(v) for v in r] for r in rows], Path(path).with_suffix(".png")
            )
    return EXIT_OK


def cmd_inequalities(args) -> int:
    spec = inequalities.TestFunctionSpec(
        d=args.d, n=args.n, mode_cutoff=args.cutoff, seed=args.seed
    )
    kwargs = dict(
        m=args.m,
        tuple_orders=tuple(int(x) for x in args.tuple.split(",")),
        s=args.s,
        eps=args.eps,
        beta=args.beta,
        k=args.k,
    )
    samples = inequalities.run_trials(spec, args.which, args.trials, **kwargs)
    summary = inequalities.summarize(args.which, samples)
    out = Path(args.out)
    _write_json(
        out,
        {
            "which": summary.which,
            "trials": summary.trials,
            "max_ratio": summary.max_ratio,
            "median_ratio": summary.median_ratio,
            "argmax_seed": summary.argmax_seed,
            "skipped": summary.skipped,
            "params": {k: v for k, v in kwargs.items() if not isinstance(v, tuple)}
            | {"tuple_orders": list(kwargs["tuple_orders"])},
        },
    )
    rows = [
        (seed, s.lhs, s.rhs, "" if s.ratio is None else s.ratio)
        for seed, s in samples
    ]
    _write_csv(out.with_suffix(".csv"), ("seed", "lhs", "rhs", "ratio"), rows)
    if args.figures:
        from . import plots

        ratios = [s.ratio for _, s in samples if s.ratio is not None]
        plots.plot_ratio_histogram(ratios, out.with_suffix(".png"), args.which)
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = _load(args, cfgmod.CONVERGENCE_SCHEMA, None)
    base = cfgmod._merge_defaults(cfg["base"], cfgmod.SIMULATE_DEFAULTS)
    t_compare = cfg["t_compare"]
    p0 = cfgmod.sim_params_from_config({**base, "eps": 0.0, "t_end": t_compare})
    state0 = cfgmod.initial_state(base)

    def final_density(p):
        result = dynamics.run(state0, p, report_stride=0)
        return dynamics.density_of(result.final_state, p)

    rho_ref = final_density(p0)
    viscous_rows = []
    for eps in cfg["eps_values"]:
        p_eps = cfgmod.sim_params_from_config({**base, "eps": eps, "t_end": t_compare})
        rho_eps = final_density(p_eps)
        diff = Field(rho_ref.grid, rho_eps.values - rho_ref.values)
        viscous_rows.append((eps, sobolev_norm(diff, 0.0)))

    rho_init = dynamics.density_of(state0, p0)
    mollify_rows = []
    for eps_m in cfg.get("mollify_values", []):
        smooth = dynamics.mollify_initial(rho_init, eps_m)
        diff = Field(rho_init.grid, smooth.values - rho_init.values)
        mollify_rows.append((eps_m, sobolev_norm(diff, 1.0)))

    out = cfg.get("output") or {}
    if "viscous_csv" in out:
        _write_csv(out["viscous_csv"], ("eps", "l2_diff"), viscous_rows)
    if "mollify_csv" in out:
        _write_csv(out["mollify_csv"], ("eps", "h1_diff"), mollify_rows)
    for eps, l2 in viscous_rows:
        print(f"eps={_fmt(eps)} l2_diff={_fmt(l2)}")
    for eps, h1 in mollify_rows:
        print(f"mollify_eps={_fmt(eps)} h1_diff={_fmt(h1)}")
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="rieszflow", description=__doc__)
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    pd = sub.add_parser("dispersion", help="linear dispersion table")
    pd.add_argument("--cp", type=float, required=True)
    pd.add_argument("--ck", type=float, required=True)
    pd.add_argument("--alpha", type=float, required=True)
    pd.add_argument("--d", type=int, required=True)
    pd.add_argument("--kmax", type=float, required=True)
    pd.add_argument("--num", type=int, default=256)
    pd.add_argument("--out", default="dispersion.csv")
    pd.add_argument("--figures", action="store_true")
    pd.set_defaults(func=cmd_dispersion)

    ps = sub.add_parser("simulate", help="nonlinear evolution run")
    ps.add_argument("--config", required=True)
    ps.add_argument("--set", action="append", metavar="KEY=VALUE")
    ps.set_defaults(func=cmd_simulate)

    pb = sub.add_parser("blowup", help="evaluate a blow-up certificate")
    pb.add_argument("--config", required=True)
    pb.add_argument(
        "--criterion", required=True,
        choices=["attractive", "repulsive", "isothermal"],
    )
    pb.add_argument("--out", default="certificate.json")
    pb.add_argument("--run", action="store_true", help="also run the dynamics")
    pb.add_argument("--figures", action="store_true")
    pb.add_argument("--set", action="append", metavar="KEY=VALUE")
    pb.set_defaults(func=cmd_blowup)

    pp = sub.add_parser("particles", help="N-body run")
    pp.add_argument("--config", required=True)
    pp.add_argument("--set", action="append", metavar="KEY=VALUE")
    pp.set_defaults(func=cmd_particles)

    pi = sub.add_parser("inequalities", help="functional-inequality sweep")
    pi.add_argument("--which", required=True, choices=["gns", "commutator", "power"])
    pi.add_argument("--d", type=int, default=1)
    pi.add_argument("--n", type=int, default=128)
    pi.add_argument("--cutoff", type=int, default=8)
    pi.add_argument("--m", type=int, default=2)
    pi.add_argument("--tuple", default="1,1")
    pi.add_argument("--s", type=float, default=0.5)
    pi.add_argument("--eps", type=float, default=0.5)
    pi.add_argument("--beta", type=float, default=2.0)
    pi.add_argument("--k", type=int, default=2)
    pi.add_argument("--trials", type=int, default=100)
    pi.add_argument("--seed", type=int, default=0)
    pi.add_argument("--out", default="inequalities.json")
    pi.add_argument("--figures", action="store_true")
    pi.set_defaults(func=cmd_inequalities)

    pc = sub.add_parser("convergence", help="viscosity / mollification sweep")
    pc.add_argument("--config", required=True)
    pc.add_argument("--set", action="append", metavar="KEY=VALUE")
    pc.set_defaults(func=cmd_convergence)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=args.log_level.upper())
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        for v in exc.violations:
            print(f"schema: {v}", file=sys.stderr)
        return EXIT_SCHEMA
    except GuardTripped as exc:
        print(f"guard {exc.reason!r} tripped at t={exc.time:.6g}", file=sys.stderr)
        return EXIT_GUARD
    except (FormatError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
