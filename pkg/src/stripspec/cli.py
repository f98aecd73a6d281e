"""Command-line front end.

Subcommands map one-to-one onto the analysis pipelines; every value flag
can also be supplied from an INI-style config file (one section per
command, ``key = value`` lines), with command-line flags taking
precedence.  Output files carry a provenance comment (tool version plus
a hash of the effective configuration) and are byte-identical across
reruns of the same configuration.

Exit codes: 0 success, 1 numerical failure (non-convergence, no trusted
sweep point, unstable count), 2 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import math
import sys
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__, analysis, geometry
from .discretize import build_grid
from .eigensolve import NonConvergenceError, ShiftBreakdownError
from .geometry import Interval, StripProblem, embed, parse_profile, validate


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # route argparse failures into exit code 2 instead of a hard exit
    def error(self, message):
        raise ConfigError(message)


class ConstantMap:
    """Picklable constant coefficient s -> value."""

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, s):
        return np.full_like(np.asarray(s, dtype=float), self.value)

    def __repr__(self):
        return f"ConstantMap({self.value!r})"


def _parse_interval(text: str) -> tuple:
    try:
        a, b = (float(x) for x in text.split(","))
    except Exception:
        raise ConfigError(f"interval must be 'a,b', got {text!r}")
    return a, b


def _parse_eps_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",")]
    except Exception:
        raise ConfigError(f"eps must be a comma list of numbers, got {text!r}")


def _parse_grid2(text: str) -> tuple:
    try:
        ns, nt = text.lower().split("x")
        return int(ns), int(nt)
    except Exception:
        raise ConfigError(f"grid must be 'NSxNT', got {text!r}")


def _parse_alpha(text: Optional[str]) -> Optional[Callable]:
    if text is None:
        return None
    try:
        return ConstantMap(float(text))
    except ValueError:
        raise ConfigError(f"alpha must be a number, got {text!r}")


def _profile_of(args) -> geometry.CurvatureProfile:
    if args.interval is None:
        raise ConfigError("--interval is required")
    a, b = _parse_interval(args.interval)
    interval = Interval(a, b, truncated=bool(getattr(args, "truncated", False)))
    try:
        return parse_profile(args.profile, interval)
    except ValueError as e:
        raise ConfigError(str(e))


def _config_hash(args) -> str:
    # output destinations do not influence the numbers, so identical runs
    # written to different paths keep the same provenance hash
    skip = {"func", "out", "summary", "config"}
    items = sorted((k, repr(v)) for k, v in vars(args).items() if k not in skip)
    blob = "\n".join(f"{k}={v}" for k, v in items).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _provenance(args) -> list:
    return [f"stripspec {__version__} config={_config_hash(args)}",
            f"command={args.command}"]


def _merge_negative_values(argv: Sequence[str]) -> list:
    """Join '--flag -6,6' into '--flag=-6,6' so argparse does not read the
    negative value as an option."""
    out, i = [], 0
    argv = list(argv)
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and len(argv[i + 1]) > 1 and argv[i + 1][0] == "-"
                and (argv[i + 1][1].isdigit() or argv[i + 1][1] == ".")):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _build_parser() -> _Parser:
    p = _Parser(prog="stripspec", allow_abbrev=False,
                description="Spectral laboratory for thin curved strips")
    sub = p.add_subparsers(dest="command", metavar="command")

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text, allow_abbrev=False)
        sp.add_argument("--out", help="CSV output path")
        return sp

    def add_profile_args(sp):
        sp.add_argument("--profile", default="zero",
                        help="preset 'name' or 'name:p1,p2,...'")
        sp.add_argument("--interval", help="'a,b' endpoints of I")
        sp.add_argument("--truncated", action="store_true",
                        help="interval stands in for an unbounded domain "
                             "(enables doubling checks)")

    sp = add("spectrum", "low eigenvalues of one strip problem")
    add_profile_args(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--outer", default="neumann",
                    choices=["neumann", "dirichlet", "robin"])
    sp.add_argument("--alpha", help="Robin coefficient (constant)")
    sp.add_argument("--grid", default="256x16", help="NSxNT")
    sp.add_argument("--m", type=int, default=3, help="number of eigenvalues")
    sp.add_argument("--certify", action="store_true",
                    help="refine + extrapolate, report error estimates")

    sp = add("sweep", "eps-sweep of the scaled gap and 1d remainders")
    add_profile_args(sp)
    sp.add_argument("--eps", required=True, help="decreasing comma list")
    sp.add_argument("--jmax", type=int, default=1)
    sp.add_argument("--grid", default="256x16")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--summary", help="JSON summary path")

    sp = add("transverse", "weighted transverse fiber eigenvalue nu(c)")
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-8)

    sp = add("effective1d", "eigenvalues of the 1d comparison operator")
    add_profile_args(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--variant", default="dn",
                    choices=["dn", "dirichlet", "robin"])
    sp.add_argument("--alpha", help="Robin coefficient (constant)")
    sp.add_argument("--grid", type=int, default=512, help="longitudinal cells")
    sp.add_argument("--m", type=int, default=3)

    sp = add("resolvent", "norm gap between shifted inverse operators")
    add_profile_args(sp)
    sp.add_argument("--eps", required=True, help="decreasing comma list")
    sp.add_argument("--k", type=float, help="spectral shift (default: auto)")
    sp.add_argument("--grid", default="256x16")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--summary", help="JSON summary path")

    sp = add("dirichlet", "both-sides-Dirichlet comparison sweep")
    add_profile_args(sp)
    sp.add_argument("--eps", required=True, help="decreasing comma list")
    sp.add_argument("--jmax", type=int, default=1)
    sp.add_argument("--grid", default="512x32")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--summary", help="JSON summary path")

    sp = add("robin", "Robin outer-edge sweep")
    add_profile_args(sp)
    sp.add_argument("--eps", required=True, help="decreasing comma list")
    sp.add_argument("--alpha", required=True, help="constant coefficient")
    sp.add_argument("--jmax", type=int, default=1)
    sp.add_argument("--grid", default="256x16")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--summary", help="JSON summary path")

    sp = add("count", "certified bound states below the threshold")
    add_profile_args(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--grid", default="256x16")
    sp.add_argument("--margin", type=float,
                    help="cutoff safety margin (default: 10x disc error)")

    sp = add("oracle", "exact annular-sector eigenvalues (constant curvature)")
    sp.add_argument("--R", type=float, default=1.0, help="Dirichlet radius")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--theta", type=float, required=True, help="sector angle")
    sp.add_argument("--side", default="outer", choices=["outer", "inner"],
                    help="which boundary circle is the Dirichlet one")
    sp.add_argument("--mmax", type=int, default=3)
    sp.add_argument("--radial-roots", type=int, default=3)

    sp = add("embed", "reconstruct the strip curves in the plane")
    add_profile_args(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--n", type=int, default=512, help="sample points")

    return p


# ---------------------------------------------------------------------------
# command handlers

def _write_csv(path, columns, rows, header_lines):
    with open(path, "w") as f:
        for line in header_lines:
            f.write(f"# {line}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(repr(float(x)) if isinstance(x, float) else str(x)
                             for x in row) + "\n")


def _cmd_spectrum(args) -> int:
    profile = _profile_of(args)
    alpha = _parse_alpha(args.alpha)
    problem = StripProblem(profile=profile, eps=args.eps, outer=args.outer,
                           alpha=alpha)
    grid = build_grid(profile.interval, *_parse_grid2(args.grid))
    thr = problem.threshold
    if args.certify:
        lam, err = analysis.certified_strip_eigenvalues(problem, grid, args.m)
        rows = [(j + 1, float(lam[j]), float(err[j])) for j in range(args.m)]
        cols = ("j", "lambda", "disc_err")
        for j, v, e in rows:
            print(f"lambda_{j} = {v:.10g}  (disc err ~ {e:.2e}, "
                  f"vs threshold {v - thr:+.6g})")
    else:
        spec = analysis.strip_spectrum(problem, grid, args.m)
        rows = [(j + 1, float(spec.eigenvalues[j])) for j in range(args.m)]
        cols = ("j", "lambda")
        for j, v in rows:
            print(f"lambda_{j} = {v:.10g}  (vs threshold {v - thr:+.6g})")
    if args.out:
        _write_csv(args.out, cols, rows, _provenance(args))
        print(f"wrote {args.out}")
    return 0


def _sweep_outputs(args, records, limits, verdicts, exponents) -> int:
    if args.out:
        analysis.write_sweep_csv(args.out, records, _provenance(args))
        print(f"wrote {args.out}")
    if args.summary:
        analysis.write_summary_json(args.summary, limits, verdicts, exponents)
        print(f"wrote {args.summary}")
    if not any(any(r.trusted_by_j) for r in records):
        print("error: no trusted sweep point "
              "(discretization error dominates everywhere)", file=sys.stderr)
        return 1
    return 0


def _cmd_sweep(args) -> int:
    profile = _profile_of(args)
    eps_list = _parse_eps_list(args.eps)
    grids = _parse_grid2(args.grid)
    result = analysis.sweep_thm1(profile, eps_list, j_max=args.jmax,
                                 grids=grids, workers=args.workers)
    table = analysis.check_thm2(profile, eps_list, j_max=args.jmax,
                                grids=grids, records=result.records)
    for j, fit in result.fits.items():
        print(f"scaled gap limit j={j}: fitted {fit.limit:+.6f} "
              f"(raw last {fit.raw_last:+.6f}); inf kappa = "
              f"{profile.inf_kappa:+.6f}")
    print(f"remainder bounded (<=3x largest-eps value): "
          f"{table.verdict.bounded}")
    limits = {str(j): fit.limit for j, fit in result.fits.items()}
    verdicts = {"thm2_bounded": table.verdict.bounded,
                "all_trusted": all(r.trusted for r in result.records)}
    return _sweep_outputs(args, result.records, limits, verdicts, {})


def _cmd_transverse(args) -> int:
    nu = analysis.transverse_nu(args.c, tol=args.tol)
    print(f"nu = {nu:.10f}")
    if args.out:
        _write_csv(args.out, ("c", "nu"), [(float(args.c), float(nu))],
                   _provenance(args))
        print(f"wrote {args.out}")
    return 0


def _cmd_effective1d(args) -> int:
    profile = _profile_of(args)
    alpha = _parse_alpha(args.alpha)
    from .coefficients import effective_potential
    pot = effective_potential(profile, args.eps, args.variant, alpha=alpha)
    lam, err = analysis.certified_1d_eigenvalues(pot.value, profile.interval,
                                                 args.grid, args.m)
    rows = [(j + 1, float(lam[j]), float(err[j])) for j in range(args.m)]
    for j, v, e in rows:
        print(f"lambda_{j} = {v:.10g}  (disc err ~ {e:.2e})")
    if args.out:
        _write_csv(args.out, ("j", "lambda_1d", "disc_err"), rows,
                   _provenance(args))
        print(f"wrote {args.out}")
    return 0


def _cmd_resolvent(args) -> int:
    profile = _profile_of(args)
    eps_list = _parse_eps_list(args.eps)
    sweep = analysis.resolvent_gap_sweep(profile, k=args.k, eps_list=eps_list,
                                         grids=_parse_grid2(args.grid),
                                         tol=args.tol, workers=args.workers)
    for g in sweep.gaps:
        print(f"eps={g.eps:<8g} gap={g.gap:.6e}  gap/eps^1.5={g.ratio:.6e}")
    print(f"fitted exponent: {sweep.fitted_exponent:.4f}")
    if args.out:
        rows = [(g.eps, g.k, g.gap, g.ratio) for g in sweep.gaps]
        _write_csv(args.out, ("eps", "k", "gap", "ratio"), rows,
                   _provenance(args))
        print(f"wrote {args.out}")
    if args.summary:
        ratios = [g.ratio for g in sweep.gaps]
        verdicts = {"gaps_positive": all(g.gap >= 0 for g in sweep.gaps),
                    "ratio_bounded_4x": (max(ratios) <= 4 * min(ratios)
                                         if min(ratios) > 0 else True)}
        exponent = (None if math.isnan(sweep.fitted_exponent)
                    else sweep.fitted_exponent)
        analysis.write_summary_json(args.summary, {}, verdicts,
                                    {"gap": exponent})
        print(f"wrote {args.summary}")
    return 0


def _cmd_dirichlet(args) -> int:
    profile = _profile_of(args)
    eps_list = _parse_eps_list(args.eps)
    table = analysis.dirichlet_compare(profile, eps_list, j_max=args.jmax,
                                       grids=_parse_grid2(args.grid),
                                       workers=args.workers)
    for r in table.records:
        print(f"eps={r.eps:<8g} remainder={r.remainder_thm2[0]:+.6e} "
              f"(disc err {r.disc_err_by_j[0]:.1e}, trusted {r.trusted_by_j[0]})")
    print(f"remainder magnitudes strictly decreasing: {table.vanishing}")
    verdicts = {"remainder_vanishing": table.vanishing}
    return _sweep_outputs(args, table.records, {}, verdicts, {})


def _cmd_robin(args) -> int:
    profile = _profile_of(args)
    eps_list = _parse_eps_list(args.eps)
    alpha = _parse_alpha(args.alpha)
    result = analysis.robin_sweep(profile, alpha, eps_list, j_max=args.jmax,
                                  grids=_parse_grid2(args.grid),
                                  workers=args.workers)
    for j, fit in result.fits.items():
        print(f"scaled gap limit j={j}: fitted {fit.limit:+.6f} "
              f"(raw last {fit.raw_last:+.6f})")
    limits = {str(j): fit.limit for j, fit in result.fits.items()}
    verdicts = {"all_trusted": all(r.trusted for r in result.records)}
    return _sweep_outputs(args, result.records, limits, verdicts, {})


def _cmd_count(args) -> int:
    profile = _profile_of(args)
    problem = StripProblem(profile=profile, eps=args.eps)
    n = analysis.count_bound_states(problem, _parse_grid2(args.grid),
                                    margin=args.margin,
                                    check_doubling=profile.interval.truncated)
    print(f"count = {n}")
    if args.out:
        _write_csv(args.out, ("eps", "count"), [(float(args.eps), n)],
                   _provenance(args))
        print(f"wrote {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    z = analysis.bessel_first_zero()
    print(f"bessel self-check: first J0 zero = {z:.12f}")
    ev = analysis.annulus_oracle(args.R, args.eps, args.theta, side=args.side,
                                 m_max=args.mmax,
                                 radial_roots=args.radial_roots)
    for i, v in enumerate(ev, start=1):
        print(f"k2_{i} = {v:.10g}")
    if args.out:
        rows = [(i + 1, float(v)) for i, v in enumerate(ev)]
        _write_csv(args.out, ("index", "k_squared"), rows, _provenance(args))
        print(f"wrote {args.out}")
    return 0


def _cmd_embed(args) -> int:
    profile = _profile_of(args)
    report = validate(profile, args.eps)
    if not report.admissible:
        raise ConfigError("; ".join(report.messages) or "inadmissible eps")
    strip = embed(profile, args.eps, n_points=args.n)
    sep = geometry.min_nonadjacent_separation(strip)
    print(f"embedded {args.n} samples; min nonadjacent parallel-curve "
          f"separation = {sep:.4g}")
    if args.out:
        geometry.write_embedding_csv(strip, args.out, _provenance(args))
        print(f"wrote {args.out}")
    return 0


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "sweep": _cmd_sweep,
    "transverse": _cmd_transverse,
    "effective1d": _cmd_effective1d,
    "resolvent": _cmd_resolvent,
    "dirichlet": _cmd_dirichlet,
    "robin": _cmd_robin,
    "count": _cmd_count,
    "oracle": _cmd_oracle,
    "embed": _cmd_embed,
}


def _config_file_args(path: str, command: str) -> list:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    if not cp.has_section(command):
        return []
    out = []
    for key, value in cp.items(command):
        flag = "--" + key.replace("_", "-")
        if value.strip().lower() in ("true", "yes", "on") and key == "truncated":
            out.append(flag)
        else:
            out.append(f"{flag}={value}")
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    pre.add_argument("command", nargs="?")
    try:
        ns, rest = pre.parse_known_args(_merge_negative_values(argv))
        if ns.command is None:
            _build_parser().parse_args(argv)  # let argparse report the problem
            raise ConfigError("missing command")
        effective = [ns.command]
        if ns.config:
            effective += _config_file_args(ns.config, ns.command)
        effective += rest
        args = _build_parser().parse_args(effective)
        if args.command not in _HANDLERS:
            raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:  # --help
        return int(e.code or 0)

    try:
        return _HANDLERS[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (NonConvergenceError, ShiftBreakdownError, RuntimeError,
            ArithmeticError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
