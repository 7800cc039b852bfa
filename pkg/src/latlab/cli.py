"""Command line interface: ``latlab <subcommand> [flags]``.

Every subcommand prints its CSV report to stdout, or writes it to ``--out``.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import experiments as ex
from .counting import RectWindow, count_points, second_moment_over_X, torus_samples
from .errors import LatlabError
from .lattice import construct_lattice, dual_lattice
from .oracles import IntegralRegionSpec, admissible_tail_integral, asymmetric_integral, log_weighted_tail_integral
from .spectral import TruncationSpec, fourier_series_s, fourier_series_s_grid, fourier_series_s_many, g_terms


def _pair(text: str) -> tuple:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return tuple(parts)


def _finish(rep: ex.MomentReport, out):
    if out:
        ex.emit_csv(rep, out)
    else:
        sys.stdout.write(ex.format_csv(rep))


def _window_args(p, t=True):
    p.add_argument("--lattice", default="quad:sqrt:2,-sqrt:2", help="lattice spec, e.g. zsquare or quad:sqrt:2,-sqrt:2")
    p.add_argument("--a", type=float, default=1.0, help="window half-width")
    p.add_argument("--b", type=float, default=1.0, help="window half-height")
    if t:
        p.add_argument("--t", type=float, required=True, help="dilation factor")
    p.add_argument("--x", type=_pair, default=(0.0, 0.0), help="translation x1,x2")
    p.add_argument("--out", help="CSV output path (default: stdout)")


def cmd_count(args):
    L = construct_lattice(args.lattice)
    P = RectWindow(args.a, args.b)
    n = count_points(L, P, args.t, args.x)
    rep = ex.MomentReport(["t", "x1", "x2", "count", "error"])
    rep.rows.append((args.t, args.x[0], args.x[1], n, n - args.t**2 * P.area / L.covol))
    rep.metadata = {"lattice": args.lattice, "a": args.a, "b": args.b}
    _finish(rep, args.out)


def cmd_secondmoment(args):
    if args.mode == "random" and args.seed is None:
        raise LatlabError("--seed is required with --mode random")
    L = construct_lattice(args.lattice)
    P = RectWindow(args.a, args.b)
    est = second_moment_over_X(L, P, args.t, args.samples_x, args.seed or 0, args.mode, args.workers)
    rep = ex.MomentReport(["t", "m2", "stderr", "n"])
    rep.rows.append((args.t, est.m2, est.stderr, est.n))
    rep.metadata = {"lattice": args.lattice, "a": args.a, "b": args.b, "mode": args.mode}
    if args.mode == "random":
        rep.metadata["seed"] = args.seed
    _finish(rep, args.out)


def cmd_spectral(args):
    L = construct_lattice(args.lattice)
    M = dual_lattice(L)
    P = RectWindow(args.a, args.b)
    trunc = TruncationSpec(args.kmax)
    s = g_terms(M, P, args.t, trunc)
    rep = ex.MomentReport(["t", "V", "G", "G1", "G2", "G3", "G4", "kmax", "tail_bound"])
    rep.rows.append((s.t, s.V, s.G, s.G1, s.G2, s.G3, s.G4, args.kmax, s.truncation_error))
    rep.metadata = {"lattice": args.lattice, "a": args.a, "b": args.b}
    S = fourier_series_s(M, P, args.t, args.x, trunc)
    rep.metadata["S_at_x"] = S.value
    if args.grid:
        vals = fourier_series_s_grid(M, P, args.t, args.grid, trunc)
        rep.metadata["grid"] = args.grid
        rep.metadata["mean_S2"] = math.fsum(np.ravel(vals) ** 2) / vals.size
    elif args.samples_x:
        if args.seed is None:
            raise LatlabError("--seed is required with --samples-x")
        Xs = torus_samples(args.samples_x, args.seed) @ L.basis.T
        vals = fourier_series_s_many(M, P, args.t, Xs, trunc)
        rep.metadata["samples_x"] = args.samples_x
        rep.metadata["seed"] = args.seed
        rep.metadata["mean_S2"] = math.fsum(vals**2) / len(vals)
    _finish(rep, args.out)


def cmd_orbit(args):
    cfg = ex.ExperimentConfig(
        "orbitclt", args.seed, lattice=args.lattice, r=args.r, dim=args.dim, theta=args.theta, trials=args.trials, out=args.out
    )
    _finish(ex.run_orbit_experiment(cfg), args.out)


def cmd_zsquare(args):
    cfg = ex.ExperimentConfig(
        "zsquare",
        args.seed,
        x=args.x,
        bigT=args.bigT,
        samples_t=args.samples_t,
        rho=args.rho,
        k_list=args.k_list,
        scheme=args.scheme,
    )
    _finish(ex.run_zsquare_experiment(cfg), args.out)


def cmd_oracle(args):
    spec = IntegralRegionSpec(args.A, args.C, args.t, args.alpha)
    if args.which == "admissible":
        res = admissible_tail_integral(spec)
    elif args.which == "logweighted":
        res = log_weighted_tail_integral(spec)
    else:
        res = asymmetric_integral(args.A, args.C, args.t)
    rep = ex.MomentReport(["which", "A", "C", "alpha", "t", "value", "abserr"])
    rep.rows.append((args.which, args.A, args.C, args.alpha, args.t, res.value, res.abserr))
    _finish(rep, args.out)


def cmd_experiment(args):
    cfg = ex.load_config(args.config)
    if args.out:
        cfg.out = args.out
    if args.workers:
        cfg.workers = args.workers
    rep = ex.run_experiment(cfg)
    if not cfg.out:
        sys.stdout.write(ex.format_csv(rep))
    for k, v in rep.durations.items():
        print(f"{k}: {v:.2f}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latlab", description="Lattice point counting in dilated rectangles.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="count lattice points in tP + X")
    _window_args(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("secondmoment", help="mean of R^2 over translations")
    _window_args(p)
    p.add_argument("--samples-x", type=int, default=1000, help="translations (grid side in grid mode)")
    p.add_argument("--mode", choices=("random", "grid"), default="random")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_secondmoment)

    p = sub.add_parser("spectral", help="V, G and its split on the dual lattice")
    _window_args(p)
    p.add_argument("--kmax", type=int, default=100)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", type=int, help="average S^2 over an n x n torus grid")
    g.add_argument("--samples-x", type=int, help="average S^2 over random translations")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("orbit", help="orbit sums along the diagonal group")
    p.add_argument("--lattice", required=True, help="unimodular lattice spec (use the !unimodular suffix)")
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--r", default="50", help="radius or comma-separated radii")
    p.add_argument("--theta", choices=("rademacher", "uniform"), default="rademacher")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("zsquare", help="Z^2 sawtooth law under random dilation")
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--bigT", type=float, default=1e4)
    p.add_argument("--samples-t", type=int, default=100_000)
    p.add_argument("--rho", default="uniform", help="uniform | window:<alpha> | steps:<w>@<lo>-<hi>;...")
    p.add_argument("--k-list", default="0,1,2,3,4")
    p.add_argument("--scheme", choices=("iid", "stratified"), default="iid")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_zsquare)

    p = sub.add_parser("oracle", help="quadrature oracles for the V region integrals")
    p.add_argument("--which", choices=("admissible", "logweighted", "asymmetric"), required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run an experiment from a key = value config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (LatlabError, ValueError, OSError) as exc:
        print(f"latlab: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
