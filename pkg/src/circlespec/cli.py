"""Command-line front end.

Commands: matrix, ly, spectrum, sweep, approx, eigenfunction, map-info.
Structured output (JSON or CSV) goes to stdout, or to --out; when --out or
--figdir is given, figures are rendered next to the report.  Exit codes:
0 pass, 1 verification failure, 2 invalid input, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import bvcalc, circlemap, mollifier, plotting, serialize, spectra, steptransfer
from .bvcalc import JumpPLFunction, KappaError
from .circlemap import LiftError, NotMarkovError
from .mollifier import NewtonError
from .serialize import SchemaError
from .spectra import IdentificationError, InsufficientModesError
from .surd import Surd, format_surd

DEFAULT_SEED = 13


class CLIError(ValueError):
    """Invalid input detected past argparse; maps to exit code 2."""


def load_map(spec: str) -> circlemap.PiecewiseLinearLift:
    if spec == "keller_rugh":
        return circlemap.keller_rugh()
    if spec == "doubling":
        return circlemap.doubling_lift()
    if not os.path.exists(spec):
        raise CLIError("--map must be keller_rugh, doubling, or a JSON file "
                       "path; %r not found" % spec)
    with open(spec) as fh:
        return serialize.lift_from_json(fh.read())


def parse_sweep(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise CLIError("--delta-sweep wants lo:hi:steps, got %r" % text)
    try:
        lo, hi = float(parts[0]), float(parts[1])
        steps = int(parts[2])
    except ValueError:
        raise CLIError("bad --delta-sweep %r" % text)
    if not (0 < lo < 1 and 0 < hi < 1 and steps >= 1):
        raise CLIError("--delta-sweep values must lie in (0,1), steps >= 1")
    ds = np.logspace(math.log10(lo), math.log10(hi), steps)
    return sorted((float(d) for d in ds), reverse=True)


def _emit(args, payload: str, figures) -> None:
    """Write the payload and render figures next to it."""
    figdir = args.figdir
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
        print("wrote %s" % args.out)
        if figdir is None:
            figdir = os.path.dirname(os.path.abspath(args.out))
    else:
        sys.stdout.write(payload)
    if figdir:
        os.makedirs(figdir, exist_ok=True)
        for name, render in figures:
            path = os.path.join(figdir, name)
            render(path)
            print("wrote %s" % path, file=sys.stderr)


def _battery(seed: int, size: int = 10):
    """Deterministic approx/LY test battery: structured heads + random tail."""
    rng = np.random.default_rng(seed)
    fs = [("one", JumpPLFunction.constant(1)),
          ("indicator", JumpPLFunction.indicator(Fraction(1, 6), Fraction(1, 2))),
          ("sawtooth", JumpPLFunction.sawtooth()),
          ("cos", bvcalc.pl_interpolant(lambda x: math.cos(2 * math.pi * x), 256))]
    k = 0
    while len(fs) < size:
        fs.append(("rand%d" % k, bvcalc.random_jump_pl(rng)))
        k += 1
    return fs[:size]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

KR_MATRIX_ROWS = (
    ("2/3", "1/3", "0", "0", "0", "0"),
    ("0", "0", "1/2", "1/2", "0", "0"),
    ("0", "0", "0", "0", "2/3", "1/3"),
    ("1/3", "2/3", "0", "0", "0", "0"),
    ("0", "0", "1/2", "1/2", "0", "0"),
    ("0", "0", "0", "0", "1/3", "2/3"),
)


def _is_canonical(lift) -> bool:
    try:
        return lift == circlemap.keller_rugh()
    except Exception:
        return False


def cmd_matrix(args) -> int:
    lift = load_map(args.map)
    M = steptransfer.transition_matrix(lift, args.q)
    cp = steptransfer.char_poly(M)
    eigs = steptransfer.eigenvalues(M)
    factored = steptransfer.factored_str(cp)
    v2 = None
    lam2 = None
    for e in eigs:
        if isinstance(e.exact, Surd) and e.exact.sign() < 0:
            lam2 = e.exact
            break
    if lam2 is not None:
        try:
            v2 = steptransfer.left_eigenvector(M, lam2)
        except ValueError:
            v2 = None

    ok = True
    if _is_canonical(lift):
        ok &= tuple(tuple(serialize.frac_str(v) for v in row)
                    for row in M.rows) == KR_MATRIX_ROWS
        want = {"1": 1, "2/3": 1, "0": 2,
                "(-1-sqrt(13))/6": 1, "(-1+sqrt(13))/6": 1}
        got = {}
        for e in eigs:
            key = e.exact_str() or repr(e.value)
            got[key] = got.get(key, 0) + e.multiplicity
        ok &= got == want
        ok &= v2 is not None and [format_surd(x) for x in v2] == \
            ["1", "(3+sqrt(13))/2", "(-5-sqrt(13))/2",
             "(-5-sqrt(13))/2", "(3+sqrt(13))/2", "1"]

    if args.format == "csv":
        payload = serialize.matrix_to_csv(M)
    else:
        extra = {
            "q": M.q,
            "M": [[serialize.frac_str(v) for v in row] for row in M.rows],
            "char_poly": {"coeffs": [serialize.frac_str(c) for c in cp.coeffs],
                          "factored": factored},
            "doubly_stochastic": M.is_doubly_stochastic(),
            "canonical_check": ok if _is_canonical(lift) else None,
        }
        if v2 is not None:
            extra["v2"] = [format_surd(x) for x in v2]
        payload = serialize.eigenvalues_to_json(eigs, extra=extra)
    vals = [complex(e.value) for e in eigs for _ in range(e.multiplicity)]
    _emit(args, payload, [("matrix_spectrum.png",
                           lambda p: plotting.plot_eigenvalues(vals, p))])
    return 0 if ok else 1


def cmd_ly(args) -> int:
    lift = load_map(args.map)
    consts = bvcalc.ly_constants(lift, args.kappa)
    all_ok = True
    labeled = []
    worst = None          # (min slack, sequence) for the headline rows
    fs = [("one", JumpPLFunction.constant(1))]
    if _is_canonical(lift):
        M6 = steptransfer.transition_matrix(lift, 6)
        _, v2 = steptransfer.second_eigenpair(M6)
        fs.append(("phi_v2", JumpPLFunction.from_step(
            steptransfer.step_eigenfunction(v2, 6))))
    rng = np.random.default_rng(args.seed)
    for k in range(args.battery):
        fs.append(("rand%d" % k, bvcalc.random_jump_pl(rng)))
    for label, f in fs:
        seq = bvcalc.check_ly_sequence(lift, f, args.n_max, consts)
        for c in seq:
            labeled.append((label, c))
            all_ok &= c.passed
        margin = min(c.slack for c in seq)
        if worst is None or margin < worst[0]:
            worst = (margin, seq)
    checks = worst[1]
    rows = [{"label": lab, "n": c.n, "lhs": c.lhs, "rhs": c.rhs,
             "slack": c.slack, "exact": c.exact} for lab, c in labeled]
    payload = serialize.ly_report_to_json(consts, checks, seed=args.seed,
                                          extra={"rows": rows,
                                                 "all_passed": all_ok})
    _emit(args, payload, [("ly_margins.png",
                           lambda p: plotting.plot_ly(checks, p))])
    return 0 if all_ok else 1


def _chain_ok(converged: bool, ess: float, modulus: float) -> bool:
    return bool(converged and ess < 0.7 and modulus > 0.75)


def cmd_spectrum(args) -> int:
    lift = load_map(args.map)
    if not 0 < args.delta < 1:
        raise CLIError("--delta must lie in (0,1)")
    m = mollifier.mollify(lift, args.delta, K=args.tail_cutoff,
                          newton_tol=args.newton_tol)
    report = spectra.leading_spectrum(m, args.N, k_max=args.k_max)
    rec = next(r for r in report.eigenvalues
               if abs(r.value - report.lambda_delta) < 1e-14)
    payload = serialize.spectrum_report_to_json(report, seed=args.seed)
    figs = [("spectrum.png",
             lambda p: plotting.plot_eigenvalues(
                 [r.value for r in report.eigenvalues], p,
                 highlight=report.lambda_delta))]
    if report.coeffs is not None:
        figs.append(("spectrum_eigenfunction.png",
                     lambda p: plotting.plot_eigenfunction(
                         report.coeffs, p, decay=report.decay)))
    _emit(args, payload, figs)
    if not rec.converged:
        print("lambda_delta not N-converged at N=%d" % args.N,
              file=sys.stderr)
        return 3
    return 0 if _chain_ok(rec.converged, report.ess_bound,
                          abs(report.lambda_delta)) else 1


def cmd_sweep(args) -> int:
    lift = load_map(args.map)
    deltas = parse_sweep(args.delta_sweep)
    rows = spectra.delta_sweep(lift, deltas, N=args.N, max_N=args.max_N,
                               k_max=args.k_max)
    if args.format == "json":
        payload = serialize.sweep_to_json(rows)
    else:
        payload = serialize.sweep_to_csv(rows)
    _emit(args, payload, [("sweep.png",
                           lambda p: plotting.plot_sweep(rows, p))])
    if any(_chain_ok(r.converged, r.ess_bound, r.modulus) for r in rows):
        return 0
    if not any(r.converged for r in rows):
        return 3
    return 1


def cmd_approx(args) -> int:
    lift = load_map(args.map)
    if args.delta_sweep:
        deltas = parse_sweep(args.delta_sweep)
    else:
        if not 0 < args.delta < 1:
            raise CLIError("--delta must lie in (0,1)")
        deltas = [args.delta]
    fs = _battery(args.seed)
    entries = []
    for d in deltas:
        c0 = mollifier.estimate_C0(lift, d)
        for label, f in fs:
            entries.append((label, mollifier.approx_bound_check(lift, d, f,
                                                                c0=c0)))
    all_ok = all(a.passed for _, a in entries)
    if args.format == "csv":
        payload = serialize.approx_to_csv(entries)
    else:
        payload = serialize.approx_to_json(entries, seed=args.seed)
    _emit(args, payload, [("approx_bound.png",
                           lambda p: plotting.plot_approx(entries, p))])
    return 0 if all_ok else 1


def cmd_eigenfunction(args) -> int:
    lift = load_map(args.map)
    if not 0 < args.delta < 1:
        raise CLIError("--delta must lie in (0,1)")
    m = mollifier.mollify(lift, args.delta, K=args.tail_cutoff,
                          newton_tol=args.newton_tol)
    if args.target == "lambda2":
        target = complex(spectra.LAMBDA2_F)
    elif args.target == "one":
        target = 1.0 + 0.0j
    else:
        try:
            target = complex(args.target)
        except ValueError:
            raise CLIError("--target must be lambda2, one, or a complex "
                           "literal, got %r" % args.target)
    coeffs, lam, resid = spectra.eigenfunction(m, args.N, target)
    try:
        decay = spectra.decay_rate(coeffs)
    except InsufficientModesError:
        decay = None
    doc = {"schema": serialize.SCHEMA, "delta": args.delta, "N": args.N,
           "eigenvalue": {"re": lam.real, "im": lam.imag, "abs": abs(lam)},
           "residual": resid, "seed": args.seed}
    if decay is not None:
        doc["decay"] = {"rho_hat": decay.rho_hat, "fit_r2": decay.fit_r2,
                        "n_used": decay.n_used}
    payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.coeffs:
        serialize.coeffs_dump(args.coeffs, args.delta, lam, coeffs)
        print("wrote %s" % args.coeffs, file=sys.stderr)
    _emit(args, payload, [("eigenfunction.png",
                           lambda p: plotting.plot_eigenfunction(
                               coeffs, p, decay=decay))])
    return 0


def cmd_map_info(args) -> int:
    lift = load_map(args.map)
    bs = circlemap.branch_system(lift)
    rep = circlemap.markov_check(lift)
    thetas = []
    for k in (1, 2, 3):
        d = circlemap.derivative_inf(lift, k)
        thetas.append({"k": k, "inf": serialize.frac_str(d.inf),
                       "theta": d.theta})
    doc = {
        "schema": serialize.SCHEMA,
        "p": lift.p,
        "breaks": [serialize.frac_str(b) for b in lift.breaks],
        "slopes": [serialize.frac_str(s) for s in lift.slopes],
        "singular_set": [serialize.frac_str(s) for s in sorted(bs.S)],
        "cells": len(bs.cells),
        "markov": rep.markov,
        "markov_q": rep.q,
        "markov_message": rep.message,
        "theta": thetas,
        "var_g": serialize.frac_str(bvcalc.var_g(lift)),
    }
    payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    _emit(args, payload, [("map.png",
                           lambda p: plotting.plot_map(lift, p))])
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="circlespec",
        description="Expanding circle maps, transfer operators, and the "
                    "spectral verification suite.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--map", default="keller_rugh",
                       help="keller_rugh | doubling | path to lift JSON "
                            "(default: keller_rugh)")
        p.add_argument("--config", default=None,
                       help="JSON config file; explicit flags override it")
        p.add_argument("--out", default=None, help="write report here")
        p.add_argument("--figdir", default=None,
                       help="directory for PNG figures (default: beside --out)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help="seed for randomized batteries (default 13)")

    p = sub.add_parser("matrix", help="exact step-space transition matrix")
    common(p)
    p.add_argument("--q", type=int, default=None,
                   help="grid size (default: natural grid of the map)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("ly", help="Lasota-Yorke constants and margin suite")
    common(p)
    p.add_argument("--kappa", type=float, default=0.7)
    p.add_argument("--n-max", type=int, default=10, dest="n_max")
    p.add_argument("--battery", type=int, default=12,
                   help="number of random test functions")
    p.set_defaults(func=cmd_ly, format="json")

    p = sub.add_parser("spectrum", help="collocation spectrum at one delta")
    common(p)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--N", type=int, default=513)
    p.add_argument("--k-max", type=int, default=10, dest="k_max")
    p.add_argument("--newton-tol", type=float, default=1e-14,
                   dest="newton_tol")
    p.add_argument("--tail-cutoff", type=int, default=None,
                   dest="tail_cutoff", help="periodic-image cutoff K")
    p.set_defaults(func=cmd_spectrum, format="json")

    p = sub.add_parser("sweep", help="track lambda_delta over a delta sweep")
    common(p)
    p.add_argument("--delta-sweep", default="1e-3:1e-1:5",
                   dest="delta_sweep", help="lo:hi:steps, log spaced")
    p.add_argument("--N", type=int, default=None,
                   help="starting ladder size (default: heuristic)")
    p.add_argument("--max-N", type=int, default=8193, dest="max_N")
    p.add_argument("--k-max", type=int, default=10, dest="k_max")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("approx", help="L1 approximation bound battery")
    common(p)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--delta-sweep", default=None, dest="delta_sweep")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("eigenfunction",
                       help="extract one eigenfunction in mode coordinates")
    common(p)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--N", type=int, default=513)
    p.add_argument("--target", default="lambda2",
                   help="lambda2 | one | complex literal (default lambda2)")
    p.add_argument("--coeffs", default=None,
                   help="write binary coefficient dump here")
    p.add_argument("--newton-tol", type=float, default=1e-14,
                   dest="newton_tol")
    p.add_argument("--tail-cutoff", type=int, default=None,
                   dest="tail_cutoff")
    p.set_defaults(func=cmd_eigenfunction, format="json")

    p = sub.add_parser("map-info", help="lift summary and Markov report")
    common(p)
    p.set_defaults(func=cmd_map_info, format="json")
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv):
    """Let --config supply defaults; explicit flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    try:
        with open(known.config) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise CLIError("cannot read config: %s" % e)
    if not isinstance(doc, dict):
        raise CLIError("config must be a JSON object")
    valid = set()
    for action in ap._subparsers._group_actions[0].choices.values():
        for a in action._actions:
            valid.add(a.dest)
    unknown = set(doc) - valid
    if unknown:
        raise CLIError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    for action in ap._subparsers._group_actions[0].choices.values():
        action.set_defaults(**{k: v for k, v in doc.items()
                               if any(a.dest == k for a in action._actions)})
    return argv


def main(argv=None) -> int:
    ap = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        argv = _apply_config(ap, argv)
        args = ap.parse_args(argv)
        return args.func(args)
    except (CLIError, SchemaError, LiftError, NotMarkovError, KappaError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except (IdentificationError, NewtonError, InsufficientModesError) as e:
        print("not converged: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
