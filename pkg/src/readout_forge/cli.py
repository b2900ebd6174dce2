"""Command-line interface: ``readout-forge <subcommand> [options]``.

Every subcommand writes its data (CSV/JSON), an SVG where a figure applies,
and ``<subcommand>_manifest.json`` into ``--out-dir``. Semiclassical inputs
are in units of kappa unless ``--units mhz`` is given; times are always in
units of ``1/kappa``. Full-model device parameters are in MHz.

Exit status: 0 on success, 1 on a domain error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .core import DriveProfile, SchemeKind, SchemeParams, to_dimensionless, validate
from .errors import ReadoutError
from .metrics import (
    assignment_error,
    snr_al_closed,
    snr_ar_closed,
    snr_asymptote,
    snr_numeric,
)
from .optimizer import default_jobs, gain_map, recommend
from .output import write_csv, write_json, write_manifest
from .semiclassical import (
    alpha_arm_for_al,
    amplitude_al,
    amplitude_ar,
    epsilon_for_peak,
    integrate_eom,
    volterra_residual,
)

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------- arguments


def _add_common(p):
    p.add_argument("--out-dir", default=".", help="directory for outputs (default: cwd)")
    p.add_argument("--config", help="JSON file of option values; explicit flags win")


def _add_model(p, scheme=True):
    if scheme:
        p.add_argument("--scheme", default="al", help="dispersive | ar | al (aliases accepted)")
    p.add_argument("--units", choices=("dimensionless", "mhz"), default="dimensionless")
    p.add_argument("--chi", "--chi-over-kappa", dest="chi", type=float, default=1.0,
                   help="full dispersive shift (units of kappa, or MHz)")
    p.add_argument("--kappa", type=float, default=1.0, help="decay rate (MHz with --units mhz)")
    p.add_argument("--epsilon1", type=float, help="constant drive; default saturates --n-max")
    p.add_argument("--alpha-arm", type=float, help="arming amplitude")
    p.add_argument("--alpha-tilde", type=float, help="arming amplitude / sqrt(n_max)")
    p.add_argument("--detuning", type=float, default=0.0)
    p.add_argument("--n-max", type=float, help="photon budget")


def _add_device(p):
    p.add_argument("--EJ", type=float, default=16930.0, help="MHz")
    p.add_argument("--EC", type=float, default=200.4, help="MHz")
    p.add_argument("--g", type=float, default=159.1, help="MHz")
    p.add_argument("--omega-r", dest="omega_r", type=float, default=7655.0, help="MHz")
    p.add_argument("--kappa", type=float, default=10.1, help="MHz")
    p.add_argument("--levels", dest="n_transmon_levels", type=int, default=6)
    p.add_argument("--fock-cutoff", dest="fock_cutoff", type=int, default=25)
    p.add_argument("--charge-cutoff", dest="charge_cutoff", type=int, default=40)


def _tau_axis(args):
    if args.tau:
        return np.array(sorted(args.tau), dtype=float)
    if args.log:
        return np.geomspace(args.tau_min, args.tau_max, args.points)
    return np.linspace(args.tau_min, args.tau_max, args.points)


def _add_tau(p, lo=0.1, hi=20.0, points=200):
    p.add_argument("--tau", type=float, nargs="+", help="explicit integration times")
    p.add_argument("--tau-min", type=float, default=lo)
    p.add_argument("--tau-max", type=float, default=hi)
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--log", action="store_true", help="log-spaced times")


def build_parser():
    parser = _Parser(prog="readout-forge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("trajectory", help="pointer-state paths in phase space")
    _add_model(p)
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--method", choices=("closed", "numeric"), default="closed")
    _add_common(p)

    p = sub.add_parser("snr", help="SNR versus integration time")
    _add_model(p)
    _add_tau(p)
    p.add_argument("--method", choices=("closed", "numeric", "short", "long"), default="closed")
    _add_common(p)

    p = sub.add_parser("error", help="assignment error versus time for all schemes at a budget")
    _add_model(p, scheme=False)
    _add_tau(p)
    p.add_argument("--ar-alpha-tilde", type=float, nargs="+", default=[0.5],
                   help="normalized arming amplitudes for the A&R curves")
    p.add_argument("--snr", type=float, nargs="+", help="convert these SNR values only")
    _add_common(p)

    p = sub.add_parser("gainmap", help="relative gains on a (chi/kappa, kappa tau) grid")
    p.add_argument("--n-max", type=float, default=2.44)
    p.add_argument("--chi-min", type=float, default=0.1)
    p.add_argument("--chi-max", type=float, default=5.0)
    p.add_argument("--chi-points", type=int, default=60)
    p.add_argument("--tau-min", type=float, default=0.1)
    p.add_argument("--tau-max", type=float, default=30.0)
    p.add_argument("--tau-points", type=int, default=60)
    p.add_argument("--linear", action="store_true", help="linear axes (default log)")
    p.add_argument("--grid-points", type=int, default=64)
    p.add_argument("--jobs", type=int, help="worker processes (default: READOUT_FORGE_JOBS or cores)")
    _add_common(p)

    p = sub.add_parser("recommend", help="pick A&R or A&L for one operating point")
    p.add_argument("--units", choices=("dimensionless", "mhz"), default="dimensionless")
    p.add_argument("--chi", "--chi-over-kappa", dest="chi", type=float, help="required")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--kappa-tau", type=float, help="required")
    p.add_argument("--n-max", type=float, help="required")
    p.add_argument("--grid-points", type=int, default=64)
    _add_common(p)

    p = sub.add_parser("drive-profile", help="drive amplitude versus time")
    _add_model(p)
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--points", type=int, default=401)
    _add_common(p)

    p = sub.add_parser("volterra-check", help="residual of the drive integral equation")
    _add_model(p)
    p.add_argument("--times", type=float, nargs="+", help="sample times (default 10 on [0, t-end])")
    p.add_argument("--t-end", type=float, default=20.0)
    _add_common(p)

    p = sub.add_parser("fullsim", help="transmon Lindblad simulation of a readout")
    _add_device(p)
    p.add_argument("--scheme", default="al", help="al | dispersive")
    p.add_argument("--n-tar", type=int, default=1)
    p.add_argument("--n-max", type=float, default=2.0)
    p.add_argument("--horizon", type=float, default=3.0, help="kappa t at the end")
    p.add_argument("--epsilon1", type=float, help="dispersive drive (MHz)")
    p.add_argument("--omega-1", dest="omega_1", type=float, help="drive frequency (MHz)")
    p.add_argument("--n-out", type=int, default=61)
    p.add_argument("--steps-per-period", type=int, default=40)
    p.add_argument("--displacement", choices=("dressed", "bare"), default="dressed",
                   help="arming: coherent state within the dressed branch, or bare-cavity displacement")
    p.add_argument("--jobs", type=int)
    _add_common(p)

    p = sub.add_parser("chi-table", help="Fock-dependent dispersive shifts of the dressed branches")
    _add_device(p)
    p.add_argument("--rows", type=int, help="number of Fock rows (default: trusted window)")
    _add_common(p)
    return parser


def _flatten(cfg):
    flat = {}
    for k, v in cfg.items():
        if isinstance(v, dict):
            flat.update(_flatten(v))
        else:
            flat[k.replace("-", "_")] = v
    return flat


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = _flatten(json.load(fh))
        except (OSError, ValueError) as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"--config: unknown keys {unknown}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------- helpers


def _model(args):
    """Dimensionless SchemeParams plus the resolved scheme and budget."""
    n_max = math.inf if args.n_max is None else args.n_max
    if args.units == "mhz":
        base = to_dimensionless(chi=args.chi, kappa=args.kappa, epsilon1=args.epsilon1 or 0.0,
                                detuning=args.detuning)
        eps = None if args.epsilon1 is None else base.epsilon1
        chi, detuning = base.chi, base.detuning
    else:
        if not args.kappa > 0:
            raise UsageError("--kappa must be > 0")
        chi, detuning = args.chi / args.kappa, args.detuning / args.kappa
        eps = None if args.epsilon1 is None else args.epsilon1 / args.kappa
    scheme = SchemeKind.parse(getattr(args, "scheme", "ar"))
    alpha = args.alpha_arm
    if args.alpha_tilde is not None:
        if not math.isfinite(n_max):
            raise UsageError("--alpha-tilde needs --n-max")
        alpha = args.alpha_tilde * math.sqrt(n_max)
    if scheme is SchemeKind.DISPERSIVE:
        alpha = 0.0
    elif scheme is SchemeKind.ARM_LONGITUDINAL and alpha is None:
        if not math.isfinite(n_max):
            raise UsageError("arm-and-longitudinal needs --alpha-arm or --n-max")
        alpha = alpha_arm_for_al(chi, 1.0, n_max)
    alpha = alpha or 0.0
    if scheme is not SchemeKind.ARM_LONGITUDINAL and eps is None:
        if not math.isfinite(n_max):
            raise UsageError("give --epsilon1 or a --n-max budget to saturate")
        eps = epsilon_for_peak(alpha, chi, 1.0, n_max)
    params = validate(SchemeParams(chi=chi, kappa=1.0, epsilon1=eps or 0.0, alpha_arm=alpha,
                                   detuning=detuning, n_max=n_max))
    return scheme, params


def _resolved(scheme, params):
    return {"scheme": scheme.value, "chi_over_kappa": params.chi, "epsilon1_over_kappa": params.epsilon1,
            "alpha_arm": params.alpha_arm, "detuning_over_kappa": params.detuning,
            "n_max": params.n_max if math.isfinite(params.n_max) else None}


def _amplitudes(scheme, params, t, method):
    if method == "numeric":
        drive = (DriveProfile.arm_longitudinal(params.alpha_arm, params.chi, 1.0)
                 if scheme is SchemeKind.ARM_LONGITUDINAL else None)
        traj = integrate_eom(params, drive, t_end=float(t[-1]), t_eval=t)
        return traj.alpha_g, traj.alpha_e
    if scheme is SchemeKind.ARM_LONGITUDINAL:
        return amplitude_al(params.alpha_arm, params.chi, 1.0, t)
    return amplitude_ar(params, t)


def _out(args, name):
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


# ---------------------------------------------------------------- commands


def cmd_trajectory(args):
    from .plots import phase_space

    scheme, params = _model(args)
    t = np.linspace(0.0, args.t_end, args.points)
    ag, ae = _amplitudes(scheme, params, t, args.method)
    csv_path = write_csv(_out(args, "trajectory.csv"),
                         ["t", "re_alpha_g", "im_alpha_g", "re_alpha_e", "im_alpha_e", "n_g", "n_e"],
                         zip(t, ag.real, ag.imag, ae.real, ae.imag, abs(ag) ** 2, abs(ae) ** 2))
    svg = phase_space(_out(args, "trajectory.svg"),
                      [("g", ag, "b-"), ("e", ae, "r-")],
                      title=f"{scheme.value}, chi/kappa = {params.chi:g}")
    resolved = _resolved(scheme, params) | {"t_end": args.t_end, "points": args.points, "method": args.method}
    return resolved, [csv_path, svg]


def _snr_curve(scheme, params, taus, method):
    if method in ("short", "long"):
        return [snr_asymptote(scheme, method, params, t).snr for t in taus]
    if method == "numeric":
        t = np.linspace(0.0, float(taus[-1]), max(4001, 200 * int(math.ceil(taus[-1]))) | 1)
        drive = (DriveProfile.arm_longitudinal(params.alpha_arm, params.chi, 1.0)
                 if scheme is SchemeKind.ARM_LONGITUDINAL else None)
        traj = integrate_eom(params, drive, t_end=float(t[-1]), t_eval=t)
        return [snr_numeric(traj, 1.0, tau, scheme).snr for tau in taus]
    if scheme is SchemeKind.ARM_LONGITUDINAL:
        return [snr_al_closed(params.alpha_arm, params.chi, 1.0, tau).snr for tau in taus]
    return [snr_ar_closed(params, tau).snr for tau in taus]


def cmd_snr(args):
    from .plots import lines

    scheme, params = _model(args)
    taus = _tau_axis(args)
    snr = _snr_curve(scheme, params, taus, args.method)
    err = [assignment_error(s) for s in snr]
    csv_path = write_csv(_out(args, "snr.csv"), ["kappa_tau", "snr", "assignment_error"], zip(taus, snr, err))
    svg = lines(_out(args, "snr.svg"), taus, {scheme.value: snr}, "kappa tau", "SNR", logx=args.log)
    resolved = _resolved(scheme, params) | {"method": args.method, "kappa_tau": taus}
    return resolved, [csv_path, svg]


def cmd_error(args):
    from .plots import lines

    if args.snr:
        rows = [(s, assignment_error(s)) for s in args.snr]
        path = write_csv(_out(args, "error.csv"), ["snr", "assignment_error"], rows)
        return {"snr": args.snr}, [path]
    if args.n_max is None:
        raise UsageError("error: give --n-max (or --snr values)")
    args.alpha_tilde, args.alpha_arm, args.epsilon1 = None, None, None
    taus = _tau_axis(args)
    series, resolved = {}, {"kappa_tau": taus, "curves": {}}
    for name, scheme, tilde in (
        [("dispersive", SchemeKind.DISPERSIVE, None), ("al", SchemeKind.ARM_LONGITUDINAL, None)]
        + [(f"ar_{a:g}", SchemeKind.ARM_RELEASE, a) for a in args.ar_alpha_tilde]
    ):
        args.scheme, args.alpha_tilde = scheme.value, tilde
        s, params = _model(args)
        series[name] = [assignment_error(x) for x in _snr_curve(s, params, taus, "closed")]
        resolved["curves"][name] = _resolved(s, params)
    header = ["kappa_tau"] + [f"error_{k}" for k in series]
    path = write_csv(_out(args, "error.csv"), header, zip(taus, *series.values()))
    floor = {k: np.maximum(v, 1e-300) for k, v in series.items()}
    svg = lines(_out(args, "error.svg"), taus, floor, "kappa tau", "assignment error", logy=True)
    return resolved, [path, svg]


def cmd_gainmap(args):
    from .plots import gain_heatmaps

    space = np.linspace if args.linear else np.geomspace
    chi = space(args.chi_min, args.chi_max, args.chi_points)
    tau = space(args.tau_min, args.tau_max, args.tau_points)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    gmap = gain_map(chi, tau, args.n_max, jobs=jobs, grid_points=args.grid_points)
    rows = []
    for i, c in enumerate(chi):
        for j, t in enumerate(tau):
            cell = gmap.cells[i][j]
            rows.append((c, t, cell.gain_ar, cell.gain_al, cell.gain_ratio, cell.alpha_tilde,
                         cell.alpha_tilde_restricted,
                         cell.boundary.value if cell.boundary else "",
                         cell.recommended.value if cell.recommended else "", cell.error or ""))
    header = ["chi_over_kappa", "kappa_tau", "gain_ar", "gain_al", "gain_ratio", "alpha_tilde",
              "alpha_tilde_restricted", "boundary", "recommended", "error"]
    path = write_csv(_out(args, "gainmap.csv"), header, rows)
    svg = gain_heatmaps(_out(args, "gainmap.svg"), gmap, log_axes=not args.linear)
    meta = {k: v for k, v in gmap.metadata.items() if k != "jobs"}
    resolved = {"n_max": args.n_max, "chi_axis": chi, "tau_axis": tau, **meta}
    return resolved, [path, svg]


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) {', '.join(missing)}")


def cmd_recommend(args):
    _require(args, "chi", "kappa_tau", "n_max")
    if args.units == "mhz":
        chi = to_dimensionless(chi=args.chi, kappa=args.kappa).chi
    else:
        chi = args.chi / args.kappa
    rec = recommend(chi, 1.0, args.kappa_tau, args.n_max, grid_points=args.grid_points)
    data = rec.to_dict()
    path = write_json(_out(args, "recommend.json"), data)
    print(json.dumps({"scheme": data["scheme"], "gain_ratio": data["gain_ratio"],
                      "gain_over_dispersive": data["gain_over_dispersive"]}))
    return {"chi_over_kappa": chi, "kappa_tau": args.kappa_tau, "n_max": args.n_max,
            "grid_points": args.grid_points}, [path]


def _drive_for(scheme, params):
    if scheme is SchemeKind.ARM_LONGITUDINAL:
        return DriveProfile.arm_longitudinal(params.alpha_arm, params.chi, 1.0)
    return DriveProfile.constant(params.epsilon1)


def cmd_drive_profile(args):
    from .plots import lines

    scheme, params = _model(args)
    drive = _drive_for(scheme, params)
    t = np.linspace(0.0, args.t_end, args.points)
    eps = drive(t)
    path = write_csv(_out(args, "drive_profile.csv"), ["t", "epsilon1"], zip(t, eps))
    svg = lines(_out(args, "drive_profile.svg"), t, {scheme.value: eps}, "kappa t", "epsilon1 / kappa")
    return _resolved(scheme, params) | {"drive": drive.to_dict()}, [path, svg]


def cmd_volterra_check(args):
    scheme, params = _model(args)
    if params.alpha_arm <= 0:
        raise UsageError("volterra-check needs a positive arming amplitude")
    drive = _drive_for(scheme, params)
    times = args.times or list(np.linspace(0.0, args.t_end, 10))
    res = [volterra_residual(drive, params.alpha_arm, params.chi, 1.0, t) for t in times]
    path = write_csv(_out(args, "volterra_check.csv"), ["t", "residual"], zip(times, res))
    worst = float(max(abs(r) for r in res))
    summary = write_json(_out(args, "volterra_check.json"), {"max_abs_residual": worst, "times": times})
    print(f"max |residual| = {worst:.3e}")
    return _resolved(scheme, params) | {"drive": drive.to_dict()}, [path, summary]


def _device(args):
    from .lindblad import TransmonParams

    return TransmonParams(EJ=args.EJ, EC=args.EC, g=args.g, omega_r=args.omega_r, kappa=args.kappa,
                          n_transmon_levels=args.n_transmon_levels, fock_cutoff=args.fock_cutoff,
                          charge_cutoff=args.charge_cutoff)


def cmd_fullsim(args):
    from .lindblad import FULLSIM_COLUMNS, fullsim_rows, run_readout_fullsim
    from .plots import phase_space

    device = _device(args)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    pair = run_readout_fullsim(args.scheme, device, args.n_tar, args.n_max, args.horizon,
                               epsilon1=args.epsilon1, omega_1=args.omega_1, n_out=args.n_out,
                               steps_per_period=args.steps_per_period, jobs=jobs,
                               displacement=args.displacement)
    path = write_csv(_out(args, "fullsim.csv"), FULLSIM_COLUMNS, fullsim_rows(pair))
    meta = write_json(_out(args, "fullsim_meta.json"), pair.metadata)
    svg = phase_space(_out(args, "fullsim.svg"),
                      [("g", pair.ground.a_demod, "b-"), ("e", pair.excited.a_demod, "r-")],
                      title=f"{pair.metadata['scheme']}, full model")
    resolved = {k: v for k, v in pair.metadata.items() if k != "chi_table_mhz"}
    return resolved, [path, meta, svg]


def cmd_chi_table(args):
    from .lindblad import chi_table, dressed_spectrum

    device = _device(args)
    spec = dressed_spectrum(device)
    rows = chi_table(spec, args.rows)
    table = [(r["n"], r["chi_g"], r["chi_e"], r["chi_n"], r["chi_n"] / device.kappa, r["omega_1"])
             for r in rows]
    path = write_csv(_out(args, "chi_table.csv"),
                     ["n", "chi_g_mhz", "chi_e_mhz", "chi_n_mhz", "chi_n_over_kappa", "omega_1_mhz"], table)
    meta = write_json(_out(args, "chi_table.json"), {
        "device": device.to_dict(), "omega_r_tilde_mhz": spec.omega_r_tilde,
        "eps_tilde_mhz": spec.eps_tilde, "trusted_fock": spec.trusted_fock, "rows": rows,
    })
    return {"device": device.to_dict(), "rows": len(rows)}, [path, meta]


COMMANDS = {
    "trajectory": cmd_trajectory,
    "snr": cmd_snr,
    "error": cmd_error,
    "gainmap": cmd_gainmap,
    "recommend": cmd_recommend,
    "drive-profile": cmd_drive_profile,
    "volterra-check": cmd_volterra_check,
    "fullsim": cmd_fullsim,
    "chi-table": cmd_chi_table,
}


def run(argv=None):
    """Execute one subcommand; returns the process exit status."""
    try:
        args = parse(argv)
        resolved, files = COMMANDS[args.command](args)
        write_manifest(args.out_dir, args.command.replace("-", "_"), resolved, files, __version__)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    except ReadoutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
