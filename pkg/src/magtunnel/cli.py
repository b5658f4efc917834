"""
Command-line interface.

Subcommands ``rate``, ``fluct``, ``wkb``, ``compare`` and ``vortex`` each
emit flat records, one per parameter point.  Numeric parameters accept
either a number or a range ``start:stop:count[:log]``; several ranges
span a Cartesian grid.  See docs/schema.md for the columns.

Exit codes: 0 success, 2 usage error, 3 domain or regime error,
4 numerical failure.  Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import (
    DomainError,
    IllConditionedError,
    IntegrationError,
    NoCrossingError,
    QuadratureError,
    RegimeError,
)
from .jacobi import (
    analytic_basis,
    determinant_J,
    determinant_J0,
    kernel_residual,
    parity_defect,
    snap_horizon,
)
from .model import Mode, ModelParams, decay_rate_closed_form
from .spectral import (
    assemble_rate,
    extract_zero_eigenvalues,
    faddeev_popov_determinant,
    mode_norms,
    zero_mode_jacobian,
)
from .vortex import (
    QuantumChannel,
    ThermalChannel,
    VortexDot,
    barrier_geometry,
    effective_action,
    expulsion_field,
    quartic_fit,
    radius_sweep,
    thermal_rate,
    tunneling_rate,
)
from .wkb import GROUND_STATE, wkb_decay_rate

EXIT_USAGE = 2
EXIT_REGIME = 3
EXIT_NUMERICAL = 4

JOBS_ENV = "MAGTUNNEL_JOBS"

# tolerances reported by ``compare``
TOL_ASSEMBLED = 0.01
TOL_WKB = 0.06

# SI defaults for the vortex subcommand: a YBCO-like disk
SI = {
    "radius": 50e-9,
    "xi": 2e-9,
    "lambda_l": 150e-9,
    "thickness": 10e-9,
    "phi0": 2.067833848e-15,
    "mass": 1.7e-30,
    "magnus": 0.0,
    "mu0": 4e-7 * math.pi,
    "hbar": 1.054571817e-34,
    "boltzmann": 1.380649e-23,
    "temperature": 4.2,
    "attempt_frequency": 1e11,
}


class UsageError(Exception):
    pass


def parse_range(text: str) -> np.ndarray:
    """Parse ``x`` or ``start:stop:count[:log]`` into an array of values."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) in (3, 4):
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise UsageError(f"range count must be >= 1 in {text!r}")
            if len(parts) == 4:
                if parts[3] not in ("log", "lin"):
                    raise UsageError(f"range scale must be 'log' or 'lin' in {text!r}")
                if parts[3] == "log":
                    if start <= 0 or stop <= 0:
                        raise UsageError(f"log range needs positive ends in {text!r}")
                    return np.geomspace(start, stop, count)
            return np.linspace(start, stop, count)
    except ValueError as exc:
        raise UsageError(f"cannot parse {text!r}: {exc}") from None
    raise UsageError(f"expected a number or start:stop:count[:log], got {text!r}")


def read_config(path: str) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


# -- per-point workers (top level so they pickle for the process pool) --


def _params(omega, omega_c, alpha, mode):
    return ModelParams(omega=omega, alpha=alpha, omega_c=omega_c, mode=Mode(mode))


def _base(p):
    return {
        "omega": p.omega,
        "omega_c": p.omega_c,
        "alpha": p.alpha,
        "mode": p.mode.value,
        "Omega": p.Omega,
        "S_cl": p.action,
    }


def auto_horizon(p: ModelParams, omega_t: float = 8.0) -> float:
    """Shortest snapped horizon with Omega*T >= omega_t."""
    e = p.euclidean_equivalent()
    T = omega_t / e.Omega
    if e.omega_c == 0:
        return T
    period = 4 * math.pi / e.omega_c
    return period * max(1, math.ceil(T / period - 1e-12))


def point_rate(omega, omega_c, alpha, mode, horizon):
    p = _params(omega, omega_c, alpha, mode)
    rec = _base(p)
    rec["semiclassical"] = p.semiclassical
    rec["Gamma_closed"] = decay_rate_closed_form(p)
    if horizon is not None:
        b = assemble_rate(p, horizon)
        rec.update(T=b.T, Gamma_assembled=b.Gamma, relative_deviation=b.relative_deviation)
    return rec


def point_fluct(omega, omega_c, alpha, mode, horizon, n_grid):
    p = _params(omega, omega_c, alpha, mode)
    e = p.euclidean_equivalent()
    T = snap_horizon(e, horizon if horizon is not None else 8.0 / e.Omega)
    J = determinant_J(e, T, snap=False)
    J0 = determinant_J0(e, T, snap=False)
    lam_phi, lam_tau = extract_zero_eigenvalues(e, T, snap=False)
    norms = mode_norms(e)
    basis = analytic_basis(e, T, n_grid)
    rec = _base(p)
    rec.update(
        T_requested=horizon if horizon is not None else math.nan,
        T=T,
        Omega_T=e.Omega * T,
        n_grid=basis.grid.size,
        J=J.value,
        J_analytic=J.analytic,
        J_deviation=J.deviation,
        log_J0=J0.log_abs,
        log_J0_analytic=J0.log_analytic,
        log_J0_deviation=J0.deviation,
        lambda_phi=lam_phi,
        lambda_tau=lam_tau,
        lambda_ratio=lam_tau / lam_phi,
        norm_phi1=norms.norm_phi1,
        norm_phi2=norms.norm_phi2,
        jacobian_phi_tau=zero_mode_jacobian(e, norms),
        faddeev_popov=faddeev_popov_determinant(e),
        parity_defect=parity_defect(basis),
        kernel_residual=float(np.max(kernel_residual(e, basis.grid))),
    )
    return rec


def point_wkb(omega, omega_c, alpha, mode, energy):
    p = _params(omega, omega_c, alpha, mode)
    prof = wkb_decay_rate(p, GROUND_STATE if energy is None else energy)
    rec = _base(p)
    rec.update(
        E=prof.E,
        r1=prof.r1,
        r2=prof.r2,
        W_direct=prof.W,
        W_three_region=prof.W_three_region,
        W0=prof.W0,
        C=prof.C,
        D_direct=prof.D,
        D_three_region=prof.D_three_region,
        D_assembled=prof.D_assembled,
    )
    return rec


def point_compare(omega, omega_c, alpha, mode, horizon):
    p = _params(omega, omega_c, alpha, mode)
    T = horizon if horizon is not None else auto_horizon(p)
    closed = decay_rate_closed_form(p)
    b = assemble_rate(p, T)
    w = wkb_decay_rate(p, GROUND_STATE)
    rec = _base(p)
    dev_a = (b.Gamma - closed) / closed
    dev_w = (w.D - closed) / closed
    rec.update(
        T=b.T,
        Gamma_closed=closed,
        Gamma_assembled=b.Gamma,
        Gamma_wkb=w.D,
        dev_assembled=dev_a,
        dev_wkb=dev_w,
        ok_assembled=abs(dev_a) < TOL_ASSEMBLED,
        ok_wkb=abs(dev_w) < TOL_WKB,
    )
    return rec


def point_vortex(dot, h, channels):
    geo = barrier_geometry(dot, h)
    if not geo.well_exists:
        raise RegimeError(f"no metastable well at h = {h} <= 1")
    q = quartic_fit(dot, h)
    rec = {
        "R": dot.R,
        "h": h,
        "H": dot.field(h),
        "V0": dot.V0,
        "r_barrier": geo.r_barrier,
        "deltaV": geo.deltaV,
        "deltaV_over_V0": geo.deltaV / dot.V0,
        "omega": q.omega,
        "alpha": q.alpha,
        "S_eff": effective_action(dot, h),
        "Gamma_quantum": tunneling_rate(dot, h),
    }
    for ch in channels:
        if isinstance(ch, ThermalChannel):
            rec["Gamma_thermal"] = thermal_rate(
                dot, h, ch.temperature, ch.attempt_frequency, ch.boltzmann
            )
    return rec


# -- output --


def _fmt_csv(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "{:.16e}".format(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(records, fmt, jsonl, meta) -> str:
    if fmt == "json":
        clean = [{k: _json_value(v) for k, v in r.items()} for r in records]
        if jsonl:
            return "".join(json.dumps(r, allow_nan=False) + "\n" for r in clean)
        body = clean[0] if len(clean) == 1 else clean
        return json.dumps(body, indent=2, allow_nan=False) + "\n"
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    if records:
        cols = list(records[0])
        lines.append(",".join(cols))
        for r in records:
            lines.append(",".join(_fmt_csv(r.get(c, "")) for c in cols))
    return "\n".join(lines) + "\n"


# -- parser --


def _common(sp, *, required_physics=True):
    g = sp.add_argument_group("model")
    g.add_argument("--omega", help="well frequency (number or range)")
    g.add_argument("--omega-c", dest="omega_c", help="cyclotron frequency (number or range)")
    g.add_argument("--alpha", help="quartic coefficient (number or range)")
    g.add_argument("--mode", choices=[m.value for m in Mode])
    sp.set_defaults(_required=("omega", "alpha") if required_physics else ())


def _output(sp):
    g = sp.add_argument_group("output")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--jsonl", action="store_true", default=None,
                   help="with --format json: one object per line")
    g.add_argument("--output", "-o", help="write to this file instead of stdout")
    g.add_argument("--config", help="key = value file prefilling any flag")
    g.add_argument("--jobs", type=int, help=f"worker processes (default ${JOBS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magtunnel",
        description="Tunneling decay rate of a 2D inverted double well in a magnetic field.",
    )
    parser.add_argument("--version", action="version", version=f"magtunnel {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    sp = sub.add_parser("rate", help="closed-form rate, optionally the assembled one")
    _common(sp)
    sp.add_argument("--horizon", type=float, help="also assemble the rate at this horizon T")
    _output(sp)

    sp = sub.add_parser("fluct", help="Jacobi determinants, zero eigenvalues and norms")
    _common(sp)
    sp.add_argument("--horizon", type=float, help="horizon T (default Omega*T = 8), snapped")
    sp.add_argument("--grid", type=int, help="samples for the basis checks (>= 2001)")
    _output(sp)

    sp = sub.add_parser("wkb", help="radial WKB rate")
    _common(sp)
    sp.add_argument("--energy", help="energy, range, or 'ground' (E = Omega, default)")
    _output(sp)

    sp = sub.add_parser("compare", help="closed form vs determinants vs WKB")
    _common(sp, required_physics=False)
    sp.add_argument("--horizon", type=float,
                    help="horizon T (default: shortest snapped T with Omega*T >= 8)")
    _output(sp)

    sp = sub.add_parser("vortex", help="vortex expulsion from a superconducting disk (SI)")
    sp.add_argument("--h", help="reduced field h = H pi R^2 / Phi0 (number or range)")
    sp.add_argument("--radius", type=float, help=f"disk radius [m] (default {SI['radius']})")
    sp.add_argument("--xi", type=float, help="coherence length [m]")
    sp.add_argument("--lambda-l", dest="lambda_l", type=float, help="penetration depth [m]")
    sp.add_argument("--thickness", type=float, help="disk thickness [m]")
    sp.add_argument("--phi0", type=float, help="flux quantum [Wb]")
    sp.add_argument("--mass", type=float, help="vortex mass [kg]")
    sp.add_argument("--magnus", type=float, help="Magnus frequency [1/s]")
    sp.add_argument("--mu0", type=float, help="vacuum permeability")
    sp.add_argument("--hbar", type=float, help="reduced Planck constant")
    sp.add_argument("--boltzmann", type=float, help="Boltzmann constant")
    sp.add_argument("--temperature", type=float, help="temperature [K]")
    sp.add_argument("--attempt-frequency", dest="attempt_frequency", type=float,
                    help="thermal attempt frequency [1/s]")
    sp.add_argument("--sweep-radius", dest="sweep_radius",
                    help="radii start:stop:count[:log]; reports the expulsion field")
    sp.add_argument("--threshold", type=float, help="escape-rate threshold [1/s]")
    sp.add_argument("--channels", help="comma list of quantum,thermal (default both)")
    sp.add_argument("--h-max", dest="h_max", type=float, help="upper end of the h search")
    sp.set_defaults(_required=())
    _output(sp)
    return parser


_BOOL_KEYS = {"jsonl"}


def _merge_config(parser, argv):
    """Parse, then re-parse with config-file values as defaults."""
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a command is required")
    if getattr(args, "config", None):
        try:
            cfg = read_config(args.config)
        except UsageError as exc:
            parser.error(str(exc))
        known = set(vars(args))
        unknown = sorted(set(cfg) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        for k in _BOOL_KEYS & set(cfg):
            cfg[k] = cfg[k].lower() in ("1", "true", "yes", "on")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _jobs(args):
    if args.jobs is not None:
        return max(1, int(args.jobs))
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"${JOBS_ENV} must be an integer, got {env!r}") from None
    return 1


def _grid(args, names, defaults):
    axes = []
    for name in names:
        raw = getattr(args, name)
        axes.append(parse_range(str(raw)) if raw is not None else np.array([defaults[name]]))
    return [tuple(float(x) for x in combo) for combo in itertools.product(*axes)]


def _run_points(func, tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, *zip(*tasks)))
    return [func(*t) for t in tasks]


def _physics_tasks(args):
    defaults = {"omega": 1.0, "omega_c": 0.0, "alpha": 0.01}
    mode = args.mode or Mode.PHYSICAL.value
    return [(*pt, mode) for pt in _grid(args, ("omega", "omega_c", "alpha"), defaults)]


def _dot_from_args(args, R=None):
    v = {k: (getattr(args, k) if getattr(args, k) is not None else SI[k]) for k in SI}
    return VortexDot(
        R=v["radius"] if R is None else R,
        xi=v["xi"],
        lambda_L=v["lambda_l"],
        d=v["thickness"],
        Phi0=v["phi0"],
        M=v["mass"],
        magnus=v["magnus"],
        mu0=v["mu0"],
        hbar=v["hbar"],
    ), v


def _channels(args, v):
    names = (args.channels or "quantum,thermal").split(",")
    out = []
    for n in names:
        n = n.strip()
        if n == "quantum":
            out.append(QuantumChannel())
        elif n == "thermal":
            out.append(ThermalChannel(v["temperature"], v["attempt_frequency"], v["boltzmann"]))
        else:
            raise UsageError(f"unknown channel {n!r}")
    return out


def execute(args):
    """Compute the records for parsed arguments; returns (records, meta)."""
    jobs = _jobs(args)
    cmd = args.command
    meta = {"magtunnel": __version__, "command": cmd}
    if cmd in ("rate", "fluct", "wkb", "compare"):
        tasks = _physics_tasks(args)
        meta["mode"] = tasks[0][3]
    if cmd == "rate":
        records = _run_points(point_rate, [t + (args.horizon,) for t in tasks], jobs)
    elif cmd == "fluct":
        n_grid = args.grid if args.grid is not None else 4001
        records = _run_points(point_fluct, [t + (args.horizon, n_grid) for t in tasks], jobs)
    elif cmd == "wkb":
        raw = args.energy
        if raw is None or str(raw).strip().lower() == "ground":
            energies = [None]
        else:
            energies = [float(e) for e in parse_range(str(raw))]
        records = _run_points(point_wkb, [t + (e,) for t in tasks for e in energies], jobs)
    elif cmd == "compare":
        records = _run_points(point_compare, [t + (args.horizon,) for t in tasks], jobs)
        meta["tolerances"] = f"assembled {TOL_ASSEMBLED}, wkb {TOL_WKB}"
    else:
        records = _vortex(args, jobs, meta)
    return records, meta


def _vortex(args, jobs, meta):
    dot, v = _dot_from_args(args)
    channels = _channels(args, v)
    meta["units"] = "SI unless constants overridden"
    if args.sweep_radius is not None:
        if args.threshold is None:
            raise UsageError("--sweep-radius needs --threshold")
        radii = parse_range(args.sweep_radius)
        rows = radius_sweep(dot, radii, args.threshold, channels, jobs=jobs, h_max=args.h_max)
        meta["threshold"] = repr(args.threshold)
        return [
            {"R": r.R, "channel": r.channel, "h_star": r.h_star, "H_star": r.H_star,
             "status": r.status}
            for r in rows
        ]
    if args.h is None:
        raise UsageError("vortex needs --h or --sweep-radius")
    records = []
    for h in parse_range(args.h):
        rec = point_vortex(dot, float(h), channels)
        if args.threshold is not None:
            for ch in channels:
                rec[f"h_star_{ch.name}"] = expulsion_field(
                    dot, args.threshold, ch, h_max=args.h_max
                )
        records.append(rec)
    return records


def _error_record(exc, code):
    rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("tau", "condition_number", "abserr", "threshold", "gamma_min", "gamma_max"):
        if hasattr(exc, attr):
            rec[attr] = _json_value(getattr(exc, attr))
    return json.dumps(rec, allow_nan=False)


def main(argv=None) -> int:
    parser = build_parser()
    args = _merge_config(parser, argv)
    for name in args._required:
        if getattr(args, name) is None:
            parser.error(f"the following argument is required: --{name.replace('_', '-')}")
    try:
        records, meta = execute(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (DomainError, RegimeError, NoCrossingError) as exc:
        print(_error_record(exc, EXIT_REGIME), file=sys.stderr)
        return EXIT_REGIME
    except (IntegrationError, IllConditionedError, QuadratureError, ArithmeticError) as exc:
        print(_error_record(exc, EXIT_NUMERICAL), file=sys.stderr)
        return EXIT_NUMERICAL
    text = render(records, args.format or "csv", bool(args.jsonl), meta)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
