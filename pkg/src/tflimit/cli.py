"""Command-line front end.

Subcommands
-----------
solve-painleve   solve the layer profile, dump the columnar field file
corrections      solve correction functions for the requested dimensions
constants        compute all regularized integrals and expansion coefficients
ground-state     solve one radial ground state, dump (r, eta, eta')
verify           residual-order verification of the energy expansion
lemma-check      truncated-weighted-integral order table

Exit codes: 0 success, 1 solver error, 2 verification failure, 64 bad usage.
Every output file starts with '#' header lines carrying the tool version and
a hash of the resolved configuration; identical configurations reproduce
byte-identical files.  Figures (PNG) are rendered next to the delimited
outputs unless --no-plot is given.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .constants import (dps_constant, energy_expansion_coeffs, integral_table,
                        kinetic_expansion_coeffs, physical_kinetic_energy,
                        potential_expansion_coeffs, write_constants_report)
from .corrections import solve_correction, save_correction, correction_tail_fit
from .errors import TFLimitError
from .ground_state import (solve_ground_state, verify_expansion,
                           write_profile, write_verification_report)
from .painleve import solve_hastings_mcleod, save_profile
from .weighted_integrals import order_table, write_order_table

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_VERIFY = 2
EXIT_USAGE = 64

OUTPUT_DIR_ENV = "TFLIMIT_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _config_hash(args) -> str:
    # hash the semantic configuration only: where output lands, figure
    # rendering and solve scheduling do not change the computed numbers
    payload = repr(sorted((k, v) for k, v in vars(args).items()
                          if k not in ("func", "output_dir", "plot",
                                       "parallel"))).encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def _header(args):
    return (f"tflimit {__version__}", f"config_hash {_config_hash(args)}")


def _outdir(args) -> Path:
    out = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _delim(args):
    return "\t" if args.format == "tsv" else ","


def _parse_dims(text):
    if text == "all":
        return (1, 2, 3)
    dims = tuple(int(t) for t in text.split(","))
    if any(d not in (1, 2, 3) for d in dims):
        raise ValueError("dimensions must be from {1,2,3}")
    return dims


def _parse_eps(text):
    eps = tuple(float(t) for t in text.split(","))
    if any(e <= 0 for e in eps):
        raise ValueError("epsilon values must be positive")
    return tuple(sorted(eps, reverse=True))


def _solve_profile(args):
    lm, lp = (float(t) for t in args.window.split(","))
    return solve_hastings_mcleod((lm, lp), n_nodes=args.n_nodes, tol=args.tol)


def cmd_solve_painleve(args):
    hm = _solve_profile(args)
    out = _outdir(args)
    path = out / "painleve_profile.txt"
    save_profile(hm, path, _delim(args), header_lines=_header(args))
    print(f"layer profile solved: residual {hm.residual_norm:.3e} "
          f"({hm.newton_iterations} Newton iterations, "
          f"{hm.solve_seconds:.2f} s) -> {path}")
    if args.plot:
        from .figures import profile_figure
        print(f"figure -> {profile_figure(hm, out / 'painleve_profile.png')}")
    return EXIT_OK


def cmd_corrections(args):
    hm = _solve_profile(args)
    out = _outdir(args)
    cfs = []
    for d in _parse_dims(args.d):
        priors = []
        for n in range(1, args.orders + 1):
            cf = solve_correction(n, d, hm, tuple(priors))
            priors.append(cf)
            cfs.append(cf)
            path = out / f"correction_n{n}_d{d}.txt"
            save_correction(cf, path, _delim(args),
                            header_lines=_header(args))
            expo, coef = correction_tail_fit(cf) if n == 1 else (float("nan"),) * 2
            print(f"n={n} d={d}: residual {cf.residual_norm:.2e}, "
                  f"tail fit ({expo:.3f}, {coef:.4f}) -> {path}")
    if args.plot:
        from .figures import corrections_figure
        print(f"figure -> {corrections_figure(cfs, out / 'corrections.png')}")
    return EXIT_OK


def _coefficient_set(hm, dims):
    nu1 = {d: solve_correction(1, d, hm) for d in dims}
    table = integral_table(hm, nu1)
    coeffs = {}
    for d in dims:
        tot = energy_expansion_coeffs(d, table)
        pot = potential_expansion_coeffs(d, table)
        coeffs[("total", d)] = tot
        coeffs[("potential", d)] = pot
        coeffs[("kinetic", d)] = kinetic_expansion_coeffs(d, tot, pot)
    return nu1, table, coeffs


def cmd_constants(args):
    hm = _solve_profile(args)
    dims = _parse_dims(args.d)
    nu1, table, coeffs = _coefficient_set(hm, dims)
    C, C_err = dps_constant(hm)
    extras = {
        "dps_constant": C,
        "dps_constant_error": C_err,
        "kinetic_bracket_at_unit_radius": physical_kinetic_energy(1.0, hm, dps=C),
    }
    out = _outdir(args)
    path = out / "constants_report.txt"
    write_constants_report(path, hm, table, coeffs, extras,
                           header_lines=_header(args))
    print(f"constants report -> {path}")
    for (kind, d), c in sorted(coeffs.items()):
        print(f"  {kind:9s} d={d}: const={c.c_const:+.9f} log={c.c_log:+.9f} "
              f"eps2={c.c_eps2:+.9f} eps83={c.c_eps83:+.9f}")
    print(f"  dps constant C = {C:.9f} (+/- {C_err:.1e})")
    if args.plot:
        from .figures import corrections_figure
        print(f"figure -> {corrections_figure(list(nu1.values()), out / 'corrections.png')}")
    return EXIT_OK


def cmd_ground_state(args):
    hm = _solve_profile(args)  # cheap, and gives Newton the layer-accurate guess
    dims = _parse_dims(args.d)
    eps_list = _parse_eps(args.eps)
    out = _outdir(args)
    for d in dims:
        for eps in eps_list:
            st = solve_ground_state(eps, d, nu0=hm,
                                    layer_points=args.layer_points)
            path = out / f"ground_state_d{d}_eps{eps:g}.txt"
            write_profile(st, path, _delim(args), header_lines=_header(args))
            print(f"d={d} eps={eps:g}: E={st.E_total:.9f} Ep={st.E_potential:.9f} "
                  f"Ek={st.E_kinetic:.9f} residual {st.residual_norm:.1e} -> {path}")
    return EXIT_OK


def cmd_verify(args):
    hm = _solve_profile(args)
    dims = _parse_dims(args.d)
    eps_list = _parse_eps(args.eps)
    if args.constants_file:
        from .constants import read_constants_report
        coeffs = read_constants_report(args.constants_file)["coefficients"]
        missing = [d for d in dims if (args.kind, d) not in coeffs]
        if missing:
            raise ValueError(f"constants file lacks {args.kind} coefficients "
                             f"for d={missing}")
    else:
        _, _, coeffs = _coefficient_set(hm, dims)
    out = _outdir(args)
    reports = []
    all_pass = True
    for d in dims:
        rep = verify_expansion(d, eps_list, coeffs[(args.kind, d)],
                               slope_threshold=args.slope_threshold, nu0=hm,
                               solver_kwargs={"layer_points": args.layer_points},
                               parallel=args.parallel)
        reports.append(rep)
        path = out / f"verification_{args.kind}_d{d}.txt"
        write_verification_report(rep, path, _delim(args), _header(args))
        status = "PASS" if rep.passed else "FAIL"
        all_pass &= rep.passed
        print(f"d={d} {args.kind}: slope {rep.slope:.3f} "
              f"(threshold {rep.slope_threshold}) {status} -> {path}")
    if args.plot:
        from .figures import verification_figure
        print(f"figure -> {verification_figure(reports, out / 'verification.png')}")
    return EXIT_OK if all_pass else EXIT_VERIFY


def cmd_lemma_check(args):
    if args.eps_max is not None or args.eps_min is not None:
        eps_grid = np.logspace(np.log10(args.eps_max or 1e-2),
                               np.log10(args.eps_min or 1e-4), args.n_eps)
    else:
        eps_grid = None  # per-probe fit ranges
    rows = order_table(eps_grid, n_eps=args.n_eps)
    out = _outdir(args)
    path = out / "lemma_orders.txt"
    write_order_table(rows, path, _delim(args), _header(args))
    ok = all(r.passed for r in rows)
    for r in rows:
        print(f"case {r.case} d={r.dimension_d} {r.label}: slope {r.slope:+.4f} "
              f"expected {r.expected_slope:+.4f} "
              f"{'ok' if r.passed else 'FAIL'}")
    print(f"order table -> {path}")
    if args.plot:
        from .figures import lemma_figure
        print(f"figure -> {lemma_figure(rows, out / 'lemma_orders.png')}")
    return EXIT_OK if ok else EXIT_VERIFY


def _add_common(sub, profile=True):
    sub.add_argument("--output-dir", default=None,
                     help=f"output directory (default: ${OUTPUT_DIR_ENV} or cwd)")
    sub.add_argument("--format", choices=("csv", "tsv"), default="csv")
    plot = sub.add_mutually_exclusive_group()
    plot.add_argument("--plot", dest="plot", action="store_true", default=True)
    plot.add_argument("--no-plot", dest="plot", action="store_false")
    if profile:
        sub.add_argument("--window", default="30,40",
                         help="profile window half-widths L-,L+ (default 30,40)")
        sub.add_argument("--n-nodes", type=int, default=16101)
        sub.add_argument("--tol", type=float, default=1e-10)


def build_parser() -> _Parser:
    p = _Parser(prog="tflimit",
                description="Thomas-Fermi-limit energy expansions of "
                            "Gross-Pitaevskii ground states")
    p.add_argument("--version", action="version", version=f"tflimit {__version__}")
    subs = p.add_subparsers(dest="command", required=True)
    p.subcommands = {}

    s = subs.add_parser("solve-painleve", help="solve the boundary-layer profile")
    _add_common(s)
    s.set_defaults(func=cmd_solve_painleve)
    p.subcommands["solve-painleve"] = s

    s = subs.add_parser("corrections", help="solve correction functions")
    _add_common(s)
    s.add_argument("--d", default="all", help="dimension(s), e.g. 3 or 1,2,3 or all")
    s.add_argument("--orders", type=int, default=1,
                   help="highest correction order to solve (default 1)")
    s.set_defaults(func=cmd_corrections)
    p.subcommands["corrections"] = s

    s = subs.add_parser("constants", help="regularized integrals and coefficients")
    _add_common(s)
    s.add_argument("--d", default="all")
    s.set_defaults(func=cmd_constants)
    p.subcommands["constants"] = s

    s = subs.add_parser("ground-state", help="direct radial ground-state solves")
    _add_common(s)
    s.add_argument("--d", default="3")
    s.add_argument("--eps", default="0.1", help="comma-separated epsilon values")
    s.add_argument("--layer-points", type=int, default=400)
    s.set_defaults(func=cmd_ground_state)
    p.subcommands["ground-state"] = s

    s = subs.add_parser("verify", help="residual-order verification of the expansion")
    _add_common(s)
    s.add_argument("--d", default="all")
    s.add_argument("--eps", default="0.16,0.08,0.04,0.02")
    s.add_argument("--kind", choices=("total", "potential", "kinetic"),
                   default="total")
    s.add_argument("--slope-threshold", type=float, default=2.7)
    s.add_argument("--layer-points", type=int, default=400)
    s.add_argument("--constants-file", default=None,
                   help="reuse coefficients from a constants report instead "
                        "of recomputing them")
    s.add_argument("--parallel", action="store_true",
                   help="run the per-epsilon solves on a thread pool "
                        "(output is identical either way)")
    s.set_defaults(func=cmd_verify)
    p.subcommands["verify"] = s

    s = subs.add_parser("lemma-check", help="weighted-integral order table")
    _add_common(s, profile=False)
    s.add_argument("--eps-max", type=float, default=None,
                   help="override every probe's fit range")
    s.add_argument("--eps-min", type=float, default=None)
    s.add_argument("--n-eps", type=int, default=5)
    s.set_defaults(func=cmd_lemma_check)
    p.subcommands["lemma-check"] = s
    return p


def _apply_config_file(parser, argv):
    """Config-file defaults: flags beat the file, the file beats built-ins.

    The file is JSON ({"n_nodes": 20701, ...}); keys use underscores and are
    applied to every subcommand that defines the option, so an explicit flag
    still wins because set_defaults only changes the fallback value.
    """
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ValueError("--config needs a file path")
    path = argv[i + 1]
    del argv[i:i + 2]
    import json
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    for sub in parser.subcommands.values():
        dests = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"tflimit: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError,) as exc:
        print(f"tflimit: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TFLimitError as exc:
        print(f"tflimit: {args.command}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
