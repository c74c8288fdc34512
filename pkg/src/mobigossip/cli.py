"""Command-line entry point: ``mobigossip <subcommand> [flags]``.

Machine output (CSV, formula values) goes to stdout or ``--out``; human
summaries go to stderr.  Exit status is 0 on success, 1 on runtime
failure and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import __version__
from .conductance import (VELOCITY_METHODS, one_dim_cross_contact_probability,
                          phi_fully_random, phi_one_dim, phi_partially_random,
                          phi_static_analytic, phi_two_dim, phi_velocity_closed_form,
                          phi_velocity_integral)
from .geometry import DEFAULT_C0, NetworkConfig, transmission_radius
from .gossip import GossipConfig, Mode
from .harness import (ExperimentSpec, Kind, load_config, read_csv, run_experiment, summarize)
from .mobility import MODELS, make_model


class UsageError(Exception):
    pass


def _key_values(items: list[str] | None) -> dict[str, str]:
    out = {}
    for item in items or []:
        for part in item.replace(";", ",").split(","):
            part = part.strip()
            if not part:
                continue
            key, sep, value = part.partition("=")
            if not sep or not key.strip():
                raise UsageError(f"expected key=value, got {part!r}")
            out[key.strip()] = value.strip()
    return out


def _positions(text: str | None):
    if text is None:
        return None
    try:
        pts = tuple(tuple(float(c) for c in p.split(",")) for p in text.split(";") if p.strip())
    except ValueError:
        raise UsageError(f"bad --positions {text!r}; expected 'x,y;x,y;...'") from None
    if any(len(p) != 2 for p in pts):
        raise UsageError("each position needs exactly two coordinates")
    return pts


def _model(args):
    try:
        return make_model(args.model, _key_values(args.model_params))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spec(**kw) -> ExperimentSpec:
    try:
        return ExperimentSpec(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_spread(args) -> int:
    model = _model(args)
    try:
        gossip = GossipConfig(args.mode, args.max_slots, args.epsilon)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    spec = _spec(id="cli-spread", kind=Kind.SPREAD_SCALING, n_grid=(args.n,),
                 model_grid=(model,), rounds=args.rounds, gossip=gossip,
                 master_seed=args.seed, c0=args.c0, positions=_positions(args.positions))
    res = run_experiment(spec, jobs=args.jobs, write=False)
    _emit(res.raw_csv, args.out)
    for row in summarize(read_csv(res.raw_csv), spec.kind, gossip.epsilon):
        print(f"{row.model} n={row.n} {row.statistic}={row.value:.4g} "
              f"(se {row.std_error:.3g}, completed {row.samples}, capped {row.capped})",
              file=sys.stderr)
    return 1 if res.failures else 0


def cmd_conductance(args) -> int:
    model = _model(args)
    spec = _spec(id="cli-conductance", kind=Kind.CONDUCTANCE_VS_N, n_grid=(args.n,),
                 model_grid=(model,), rounds=args.realizations, master_seed=args.seed,
                 c0=args.c0, move_samples=args.samples)
    res = run_experiment(spec, jobs=args.jobs, write=False)
    _emit(res.raw_csv, args.out)
    for row in read_csv(res.summary_csv):
        print(f"{row['model']} n={row['n']} {row['statistic']}={float(row['value']):.6g} "
              f"(se {float(row['std_error']):.3g}, samples {row['samples']})", file=sys.stderr)
    return 1 if res.failures else 0


def cmd_oracle(args) -> int:
    spec = _spec(id="cli-oracle", kind=Kind.ORACLE_CHECK, n_grid=(args.n,),
                 model_grid=(make_model("static"),), rounds=args.instances,
                 master_seed=args.seed, c0=args.c0)
    res = run_experiment(spec, jobs=args.jobs, write=False)
    _emit(res.raw_csv, args.out)
    for row in read_csv(res.summary_csv):
        print(f"n={row['n']} {row['statistic']}={float(row['value']):.4g} "
              f"over {row['samples']} instances", file=sys.stderr)
    return 1 if res.failures else 0


def cmd_experiment(args) -> int:
    try:
        spec = load_config(args.config)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.output:
        spec = dataclasses.replace(spec, output_path=args.output)
    res = run_experiment(spec, jobs=args.jobs, write=True)
    print(f"wrote {res.raw_path} and {res.summary_path}", file=sys.stderr)
    if res.failures:
        print(f"{res.failures} grid point(s) had failed runs", file=sys.stderr)
        return 1
    return 0


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"formula {args.which!r} needs {', '.join(missing)}")


def _radius(args) -> float:
    if args.r is not None:
        return args.r
    _need(args, "n")
    return transmission_radius(args.n, args.c0)


def _phis(args) -> float:
    return args.phis if args.phis is not None else phi_static_analytic(_radius(args))


def _formula(args) -> float:
    which = args.which
    if which == "fully-random":
        return phi_fully_random()
    if which == "static":
        return phi_static_analytic(_radius(args))
    if which == "partially-random":
        _need(args, "n", "k")
        return phi_partially_random(args.n, args.k, _phis(args))
    if which == "one-dim":
        _need(args, "n", "nv")
        nh = args.nh if args.nh is not None else args.n - args.nv
        return phi_one_dim(args.n, args.nv, nh, _phis(args))
    if which == "velocity":
        _need(args, "vmax")
        return phi_velocity_closed_form(_radius(args), args.vmax)
    if which == "velocity-integral":
        _need(args, "vmax")
        return phi_velocity_integral(_radius(args), args.vmax, args.method)
    if which == "two-dim":
        _need(args, "rc")
        return phi_two_dim(_radius(args), args.rc)
    if which == "cross-contact":
        return one_dim_cross_contact_probability(_radius(args))
    if which == "contact-probability":
        _need(args, "n")
        return NetworkConfig(args.n, args.c0, args.r).contact_probability
    raise UsageError(f"unknown formula {which!r}")


FORMULAS = ("fully-random", "static", "partially-random", "one-dim", "velocity",
            "velocity-integral", "two-dim", "cross-contact", "contact-probability")


def cmd_formula(args) -> int:
    try:
        value = _formula(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"{args.which},{value:.9g}")
    return 0


def _jobs(text: str) -> int:
    j = int(text)
    if j < 1:
        raise argparse.ArgumentTypeError("--jobs must be >= 1")
    return j


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mobigossip",
                                description="Gossip spreading and conductance on mobile "
                                            "random geometric graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def common(sp, seed=True):
        sp.add_argument("--c0", type=float, default=DEFAULT_C0,
                        help="connectivity constant in r = sqrt(c0 ln n / n)")
        sp.add_argument("--jobs", type=_jobs, default=os.cpu_count() or 1,
                        help="worker processes (default: logical cores)")
        sp.add_argument("--out", help="write CSV here instead of stdout")
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="master seed")

    def model_flags(sp):
        sp.add_argument("--model", required=True, choices=sorted(MODELS))
        sp.add_argument("--model-params", action="append", metavar="KEY=VALUE",
                        help="model parameters, e.g. vmax=0.1 or k=0.1n (repeatable)")

    sp = sub.add_parser("spread", help="simulate broadcasts and write per-run CSV")
    sp.add_argument("--n", type=_positive_int, required=True)
    model_flags(sp)
    sp.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.PUSH_PULL.value)
    sp.add_argument("--rounds", type=_positive_int, default=200)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--max-slots", type=_positive_int, default=None)
    sp.add_argument("--positions", help="fixed initial placement 'x,y;x,y;...'")
    common(sp)
    sp.set_defaults(func=cmd_spread)

    sp = sub.add_parser("conductance", help="estimate conductance over random realizations")
    sp.add_argument("--n", type=_positive_int, required=True)
    model_flags(sp)
    sp.add_argument("--samples", type=_positive_int, default=200, help="moves per estimate")
    sp.add_argument("--realizations", type=_positive_int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_conductance)

    sp = sub.add_parser("formula", help="evaluate a closed-form expression")
    sp.add_argument("--which", required=True, choices=FORMULAS)
    for flag, typ in (("--r", float), ("--n", int), ("--k", int), ("--nv", int), ("--nh", int),
                      ("--phis", float), ("--vmax", float), ("--rc", float)):
        sp.add_argument(flag, type=typ)
    sp.add_argument("--method", choices=VELOCITY_METHODS, default="circle_quadrature")
    sp.add_argument("--c0", type=float, default=DEFAULT_C0)
    sp.set_defaults(func=cmd_formula)

    sp = sub.add_parser("oracle", help="compare sweep cuts with exhaustive search")
    sp.add_argument("--n", type=_positive_int, default=10)
    sp.add_argument("--instances", type=_positive_int, default=50)
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("experiment", help="run a sweep described by a config file")
    sp.add_argument("config")
    sp.add_argument("--output", help="override the config's output_path")
    sp.add_argument("--jobs", type=_jobs, default=os.cpu_count() or 1)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except Exception as exc:
        print(f"mobigossip: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
