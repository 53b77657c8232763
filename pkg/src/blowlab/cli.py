"""Command-line front end.

Each subcommand writes a CSV table (fixed, documented column order) and
a JSON summary (config echo, sha256 of the CSV content, aggregate
metrics) into --out; --format picks which of the two is echoed to
stdout.  Exit codes: 0 success, 2 invalid configuration or arguments,
3 numerical failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .coords import CoordinateFrame, State, gauge_solution
from .errors import BlowlabError, InvalidArgumentError
from .evolution import EvolveConfig, growth_rate, integrate
from .experiments import (ExperimentReport, RandomDataSpec, StabilityConfig,
                          linear_bound_experiment, ordered_map, random_state,
                          stability_experiment)
from .freewave import s0_row
from .generator import assemble, eigenpairs, spurious_filter
from .grid import make_grid
from .hypergeom import zero_scan
from .kernels import KernelSweep
from .resolvent import apply_resolvent, fundamental_pair, resolvent_rhs

import scipy.linalg


def _parse_floats(text):
    return [float(tok) for tok in text.replace(";", ",").split(",") if tok]


def _parse_points(text):
    pts = []
    for block in text.split(";"):
        block = block.strip()
        if not block:
            continue
        r, s = block.split(",")
        pts.append((float(r), float(s)))
    return pts


def _initial_state(g, spec, seed):
    """Initial data from a spec string.

    gauge:T'     closed-form blowup-time offset family at tau = 0
    random:SEED  normalized random smooth state
    file:PATH    CSV with header rho,phi1,phi2 holding node samples
    """
    kind, _, arg = spec.partition(":")
    if kind == "gauge":
        return gauge_solution(float(arg), CoordinateFrame(1.0), 0.0, g)
    if kind == "random":
        member = int(arg) if arg else int(seed)
        return random_state(RandomDataSpec(seed=int(seed), member=member), g)
    if kind == "file":
        try:
            raw = np.genfromtxt(arg, delimiter=",", names=True)
        except OSError as exc:
            raise InvalidArgumentError("cannot read data file %s: %s"
                                       % (arg, exc)) from exc
        for col in ("rho", "phi1", "phi2"):
            if col not in (raw.dtype.names or ()):
                raise InvalidArgumentError(
                    "data file %s is missing column %r" % (arg, col))
        rho = np.atleast_1d(raw["rho"])
        phi1 = np.atleast_1d(raw["phi1"])
        phi2 = np.atleast_1d(raw["phi2"])
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(phi1))
                and np.all(np.isfinite(phi2))):
            raise InvalidArgumentError(
                "data file %s holds non-finite entries" % arg)
        # phrased so NaN comparisons fail the check rather than skip it
        if len(rho) != g.N + 1 or not np.all(np.abs(rho - g.nodes) <= 1e-10):
            raise InvalidArgumentError(
                "data file nodes must match the N=%d collocation grid"
                % g.N)
        return State(g, phi1, phi2)
    raise InvalidArgumentError("unknown data spec %r" % spec)


def _emit(report, args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    base = os.path.join(out, report.kind)
    csv_text = report.to_csv(base + ".csv")
    json_text = report.to_json(base + ".json")
    sys.stdout.write(json_text + "\n" if args.fmt == "json" else csv_text)
    return 0


# ---------------------------------------------------------------------------
# subcommands


def _cmd_spectrum(args):
    g = make_grid(args.N)
    op = assemble(g, args.mode)
    pairs = eigenpairs(op)
    refined = scipy.linalg.eigvals(assemble(make_grid(2 * args.N),
                                            args.mode).matrix)
    rows = []
    accepted = []
    for lam, vec in pairs:
        ok = spurious_filter(op, (lam, vec), refined_values=refined)
        rows.append((float(lam.real), float(lam.imag), ok))
        if ok:
            accepted.append(lam)
    agg = {"n_modes": len(rows), "n_accepted": len(accepted)}
    if args.mode == "full" and accepted:
        agg["eigenvalue_1_error"] = float(
            min(abs(l - 1.0) for l in accepted))
    report = ExperimentReport(kind="spectrum",
                              config=dict(N=args.N, mode=args.mode),
                              columns=["re", "im", "accepted"], rows=rows,
                              aggregates=agg)
    return _emit(report, args)


def _cmd_resolvent(args):
    g = make_grid(args.N)
    lam = complex(args.lam_re, args.lam_im)
    # resolved draw: the identity diagnostic applies the discrete
    # generator, so the data must sit well inside the grid's range
    f = random_state(RandomDataSpec(seed=int(args.seed),
                                    n_modes=max(4, args.N // 3)), g)
    pair = fundamental_pair(lam, args.potential, g)
    rhs = resolvent_rhs(g, f.phi1, f.phi2, lam)
    y = apply_resolvent(lam, rhs, pair)
    A = assemble(g, "full" if args.potential == "linearized" else "free")
    resid = (lam * y.stack() - A.matrix @ y.stack()) - f.stack()
    rel = float(np.linalg.norm(resid) / np.linalg.norm(f.stack()))
    rows = [(float(r), float(a.real), float(a.imag), float(b.real),
             float(b.imag))
            for r, a, b in zip(g.nodes, y.phi1, y.phi2)]
    report = ExperimentReport(
        kind="resolvent",
        config=dict(N=args.N, lam_re=args.lam_re, lam_im=args.lam_im,
                    potential=args.potential, seed=int(args.seed)),
        columns=["rho", "y1_re", "y1_im", "y2_re", "y2_im"], rows=rows,
        aggregates={"w0": [pair.w0.real, pair.w0.imag],
                    "identity_residual": rel})
    return _emit(report, args)


def _cmd_evolve(args):
    g = make_grid(args.N)
    state = _initial_state(g, args.data, args.seed)
    cfg = EvolveConfig(mode=args.mode, dt=args.dt, tau_max=args.tau_max,
                       record_stride=args.record_stride,
                       dealias=args.dealias)
    traj = integrate(state, cfg)
    rows = [(float(t), float(h), float(s), float(a))
            for t, h, s, a in zip(traj.taus, traj.h_norms, traj.sup_phi1,
                                  traj.amplitudes)]
    agg = {"escaped": traj.escaped, "records": len(rows),
           "final_h_norm": rows[-1][1]}
    if not traj.escaped and len(traj.taus) > 3 and np.all(
            np.abs(traj.amplitudes[-3:]) > 0):
        t1 = traj.taus[-1]
        try:
            agg["amplitude_rate"] = growth_rate(
                traj, (max(0.0, t1 - 5.0), t1))
        except BlowlabError:
            pass
    report = ExperimentReport(
        kind="evolve",
        config=dict(N=args.N, mode=args.mode, data=args.data,
                    tau_max=args.tau_max, dt=args.dt,
                    record_stride=args.record_stride, seed=int(args.seed)),
        columns=["tau", "h_norm", "sup_phi1", "a_tau"], rows=rows,
        aggregates=agg)
    return _emit(report, args)


def _cmd_dalembert(args):
    g = make_grid(args.N)
    state = _initial_state(g, args.data, args.seed)
    taus = _parse_floats(args.taus)
    rows = []
    for tau in taus:
        if tau == 0.0:
            vals = state.phi1
        else:
            vals = s0_row(state, tau)
        rows.extend((float(tau), float(r), float(v))
                    for r, v in zip(g.nodes, vals))
    report = ExperimentReport(
        kind="dalembert",
        config=dict(N=args.N, data=args.data, taus=taus,
                    seed=int(args.seed)),
        columns=["tau", "rho", "phi1"], rows=rows,
        aggregates={"n_times": len(taus)})
    return _emit(report, args)


def _cmd_strichartz(args):
    exps = None
    if args.kind == "strichartz":
        exps = (float(args.p), float(args.q))
    report = linear_bound_experiment(
        args.kind, exps=exps, ensemble=args.ensemble, tau_max=args.tau_max,
        N=args.N, seed=int(args.seed), mode=args.mode)
    return _emit(report, args)


def _cmd_kernel(args):
    points = _parse_points(args.points)
    taus = _parse_floats(args.taus)
    sweep = KernelSweep(points, omega_max=args.omega_max,
                        domega=args.domega, potential=args.potential)
    samples = []
    for chunk in ordered_map(
            lambda t: [sweep.sample(r, s, t) for r, s in points],
            taus, threads=args.threads):
        samples.extend(chunk)
    rows = [(s.rho, s.s, s.tau, s.K, s.E, s.ratio, s.err) for s in samples]
    agg = {"max_ratio": max(s.ratio for s in samples),
           "max_err": max(s.err for s in samples),
           "omega_max": args.omega_max}
    report = ExperimentReport(
        kind="kernel",
        config=dict(points=args.points, taus=args.taus,
                    omega_max=args.omega_max, domega=args.domega,
                    potential=args.potential),
        columns=["rho", "s", "tau", "K", "E", "ratio", "err"], rows=rows,
        aggregates=agg)
    return _emit(report, args)


def _cmd_stability(args):
    cfg = StabilityConfig(delta=max(_parse_floats(args.deltas)),
                          M=args.M, delta_T=args.delta_T,
                          seed=int(args.seed), ensemble=args.ensemble,
                          N=args.N, tau_max=args.tau_max)
    report = stability_experiment(cfg, deltas=_parse_floats(args.deltas))
    return _emit(report, args)


def _cmd_scan_w0(args):
    res = zero_scan((args.eps_min, args.eps_max), args.omega_max,
                    eps_step=args.eps_step, omega_step=args.omega_step)
    rows = []
    for i, eps in enumerate(res.eps_grid):
        for j, om in enumerate(res.omega_grid):
            rows.append((float(eps), float(om), float(res.values[i, j])))
    report = ExperimentReport(
        kind="scan-w0",
        config=dict(eps_min=args.eps_min, eps_max=args.eps_max,
                    omega_max=args.omega_max, eps_step=args.eps_step,
                    omega_step=args.omega_step),
        columns=["eps", "omega", "abs_w0"], rows=rows,
        aggregates={"minimum": res.minimum,
                    "argmin": [res.argmin.real, res.argmin.imag]})
    return _emit(report, args)


# ---------------------------------------------------------------------------
# parser


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help="JSON file whose fields mirror the flags")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", default=0, type=int)
    common.add_argument("--threads", default=1, type=int)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"),
                        default="csv", help="what to echo on stdout")

    p = argparse.ArgumentParser(prog="blowlab", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("spectrum", parents=[common],
                       help="generator spectrum with spurious-mode filter")
    q.add_argument("--N", type=int, default=32)
    q.add_argument("--mode", choices=("free", "full"), default="full")
    q.set_defaults(fn=_cmd_spectrum)

    q = sub.add_parser("resolvent", parents=[common],
                       help="apply the resolvent to a random state")
    q.add_argument("--N", type=int, default=32)
    q.add_argument("--lam-re", type=float, default=0.1)
    q.add_argument("--lam-im", type=float, default=5.0)
    q.add_argument("--potential", choices=("linearized", "zero"),
                   default="linearized")
    q.set_defaults(fn=_cmd_resolvent)

    q = sub.add_parser("evolve", parents=[common],
                       help="integrate the similarity-coordinate flow")
    q.add_argument("--N", type=int, default=32)
    q.add_argument("--mode", choices=("free", "linearized", "nonlinear"),
                   default="nonlinear")
    q.add_argument("--data", default="random:0",
                   help="gauge:T' | random:SEED | file:PATH")
    q.add_argument("--tau-max", type=float, default=20.0)
    q.add_argument("--dt", type=float, default=None)
    q.add_argument("--record-stride", type=int, default=64)
    q.add_argument("--dealias", action="store_true")
    q.set_defaults(fn=_cmd_evolve)

    q = sub.add_parser("dalembert", parents=[common],
                       help="free-wave window formula at given times")
    q.add_argument("--N", type=int, default=32)
    q.add_argument("--data", default="random:0")
    q.add_argument("--taus", default="0.5,1,2")
    q.set_defaults(fn=_cmd_dalembert)

    q = sub.add_parser("strichartz", parents=[common],
                       help="ensemble mixed-norm / energy bound sweep")
    q.add_argument("--kind", choices=("strichartz", "energy"),
                   default="strichartz")
    q.add_argument("--p", type=float, default=2.0)
    q.add_argument("--q", type=float, default=float("inf"))
    q.add_argument("--ensemble", type=int, default=100)
    q.add_argument("--tau-max", type=float, default=20.0)
    q.add_argument("--N", type=int, default=32)
    q.add_argument("--mode", choices=("free", "linearized"),
                   default="linearized")
    q.set_defaults(fn=_cmd_strichartz)

    q = sub.add_parser("kernel", parents=[common],
                       help="perturbation-kernel envelope samples")
    q.add_argument("--points", default="0.3,0.6;0.5,0.5;0.7,0.2")
    q.add_argument("--taus", default="0,1,2,4,8")
    q.add_argument("--omega-max", type=float, default=200.0)
    q.add_argument("--domega", type=float, default=0.25)
    q.add_argument("--potential", choices=("linearized", "zero"),
                   default="linearized")
    q.set_defaults(fn=_cmd_kernel)

    q = sub.add_parser("stability", parents=[common],
                       help="blowup-time shooting and quadratic-scaling sweep")
    q.add_argument("--deltas", default="1e-2,1e-3")
    q.add_argument("--ensemble", type=int, default=20)
    q.add_argument("--N", type=int, default=32)
    q.add_argument("--tau-max", type=float, default=20.0)
    q.add_argument("--M", type=float, default=10.0)
    q.add_argument("--delta-T", type=float, default=0.1)
    q.set_defaults(fn=_cmd_stability)

    q = sub.add_parser("scan-w0", parents=[common],
                       help="grid scan of the scaled Wronskian modulus")
    q.add_argument("--eps-min", type=float, default=0.01)
    q.add_argument("--eps-max", type=float, default=1.0 / 3.0)
    q.add_argument("--omega-max", type=float, default=50.0)
    q.add_argument("--eps-step", type=float, default=0.01)
    q.add_argument("--omega-step", type=float, default=0.05)
    q.set_defaults(fn=_cmd_scan_w0)
    return p


def _merge_config(args):
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            overrides = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InvalidArgumentError("cannot read config %s: %s"
                                   % (args.config, exc))
    if not isinstance(overrides, dict):
        raise InvalidArgumentError("config file must hold a JSON object")
    for key, val in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise InvalidArgumentError("config field %r does not mirror a "
                                       "flag of this subcommand" % key)
        if attr in args._explicit:
            continue
        setattr(args, attr, val)
    return args


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    # record which options were given explicitly, so --config fills only
    # the rest (flags win over the file)
    explicit = set()
    for tok in argv:
        if tok.startswith("--"):
            explicit.add(tok[2:].split("=")[0].replace("-", "_"))
    args._explicit = explicit
    try:
        args = _merge_config(args)
        return args.fn(args)
    except InvalidArgumentError as exc:
        sys.stderr.write("invalid configuration: %s\n" % exc)
        return 2
    except BlowlabError as exc:
        sys.stderr.write("numerical failure: %s\n" % exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
