"""Sweep orchestration: certified eigenvalues, asymptotic verdicts, oracles.

Every strip eigenvalue reported here goes through the same pipeline:
solve on a base grid and its refinement, subtract the known transverse
discretization defect at each resolution, Richardson-extrapolate, and
keep the extrapolation step as the discretization error estimate.  A
sweep record is marked trusted only where that estimate is at most a
tenth of the physical remainder it is being compared against, so a
failed asymptotic verdict cannot be blamed on the grid.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv, jvp, yv, yvp

from .coefficients import effective_potential
from .discretize import (TensorGrid, assemble_1d, assemble_flat,
                         assemble_reference, assemble_transverse,
                         assemble_weighted, bc_of, build_grid)
from .eigensolve import (NonConvergenceError, Spectrum, count_below,
                         operator_gap_norm, smallest_eigenpairs)
from .geometry import CurvatureProfile, Interval, StripProblem

_EIG_TOL = 1e-9
_TRUST_FACTOR = 0.1       # disc error must be <= this times the remainder
_TRUNC_TOL = 1e-4         # admissible lambda_1 shift under domain doubling
_DEFAULT_GRID = (256, 16)
_DD_GRID = (512, 32)


# ---------------------------------------------------------------------------
# exact transverse eigenvalues and discrete defects

def threshold(outer: str, eps: float) -> float:
    """Bottom of the transverse spectrum of the straight strip."""
    if outer == "dirichlet":
        return (math.pi / eps) ** 2
    if outer in ("neumann", "robin"):
        return (math.pi / (2.0 * eps)) ** 2
    raise ValueError(f"unknown outer condition {outer!r}")


def robin_transverse_mu(eta: float) -> float:
    """First eigenvalue of -chi'' on (0,1), chi(0)=0, chi'(1)+eta*chi(1)=0.

    The eigenvalue mu solves sqrt(mu) cos sqrt(mu) + eta sin sqrt(mu) = 0;
    for eta > -1 the first root sits in (0, pi).
    """
    if eta <= -1.0:
        raise ValueError(f"eta = {eta} must exceed -1 for a positive eigenvalue")
    if eta == 0.0:
        return (0.5 * math.pi) ** 2
    f = lambda x: x * math.cos(x) + eta * math.sin(x)
    x = brentq(f, 1e-12, math.pi - 1e-12, xtol=1e-14, rtol=8.9e-16)
    return x * x


def _transverse_defect(outer: str, eps: float, Nt: int, eta: float = 0.0) -> float:
    """Discrete-minus-exact first transverse eigenvalue over eps^2.

    Subtracting this from a strip eigenvalue removes the dominant
    eps^{-2}-amplified part of its discretization error.
    """
    if outer == "dirichlet":
        pencil = assemble_1d(lambda s: np.zeros_like(s), Interval(0.0, 1.0), Nt)
        mu_exact = math.pi ** 2
    elif outer == "robin":
        pencil = assemble_transverse(0.0, Nt, edge_weight=eta)
        mu_exact = robin_transverse_mu(eta)
    else:
        pencil = assemble_transverse(0.0, Nt)
        mu_exact = (0.5 * math.pi) ** 2
    spec = smallest_eigenpairs(pencil, 1, tol=1e-12)
    return (spec.eigenvalues[0] - mu_exact) / eps ** 2


# ---------------------------------------------------------------------------
# certified eigenvalue pipelines

def _strip_sigma(problem: StripProblem) -> float:
    """A shift safely below the lowest strip eigenvalue."""
    variant = {"neumann": "dn", "dirichlet": "dirichlet", "robin": "robin"}[problem.outer]
    pot = effective_potential(problem.profile, problem.eps, variant,
                              alpha=problem.alpha)
    iv = problem.profile.interval
    samples = np.linspace(iv.a, iv.b, 513)
    vmin = float(np.min(pot.value(samples)))
    return threshold(problem.outer, problem.eps) + 1.2 * min(0.0, vmin) - 1.0


def _mean_alpha(problem: StripProblem) -> float:
    if problem.alpha is None:
        return 0.0
    iv = problem.profile.interval
    s = np.linspace(iv.a, iv.b, 257)
    return float(np.mean(np.asarray(problem.alpha(s), dtype=float)))


def strip_spectrum(problem: StripProblem, grid: TensorGrid, m: int,
                   tol: float = _EIG_TOL) -> Spectrum:
    """Lowest m eigenvalues of the curved-strip pencil on one grid (raw,
    no defect correction)."""
    pencil = assemble_weighted(problem.profile, problem.eps, bc_of(problem), grid)
    spec = smallest_eigenpairs(pencil, m, sigma=_strip_sigma(problem), tol=tol)
    if not spec.converged.all():
        raise NonConvergenceError(
            f"strip solve not certified at tol {tol} "
            f"(worst residual {spec.residuals.max():.3e})", spec)
    return spec


def certified_strip_eigenvalues(problem: StripProblem, grid: TensorGrid,
                                m: int) -> tuple[np.ndarray, np.ndarray]:
    """Richardson-extrapolated strip eigenvalues with error estimates.

    Solve on ``grid`` and its refinement, subtract the transverse defect
    of each resolution, extrapolate the O(h^2) remainder away, and report
    the extrapolation step / 3 as the discretization error estimate.
    """
    eta = problem.eps * _mean_alpha(problem) if problem.outer == "robin" else 0.0
    lam = []
    for g in (grid, grid.refined()):
        spec = strip_spectrum(problem, g, m)
        defect = _transverse_defect(problem.outer, problem.eps, g.Nt, eta)
        lam.append(spec.eigenvalues - defect)
    coarse, fine = lam
    extrapolated = fine + (fine - coarse) / 3.0
    disc_err = np.abs(fine - coarse) / 3.0
    return extrapolated, disc_err


def certified_1d_eigenvalues(potential: Callable, interval: Interval, Ns: int,
                             m: int) -> tuple[np.ndarray, np.ndarray]:
    """Richardson-extrapolated eigenvalues of -d^2/ds^2 + V with Dirichlet ends."""
    samples = np.linspace(interval.a, interval.b, 513)
    vmin = float(np.min(np.asarray(potential(samples), dtype=float)))
    sigma = vmin - 1.0 - 0.05 * abs(vmin)
    lam = []
    for n in (Ns, 2 * Ns):
        # same roundoff floor as the transverse fiber: machine eps times
        # the squared node density
        solver_tol = max(1e-11, 3e-15 * (n / interval.length) ** 2)
        pencil = assemble_1d(potential, interval, n)
        spec = smallest_eigenpairs(pencil, m, sigma=sigma, tol=solver_tol)
        if not spec.converged.all():
            raise NonConvergenceError("1d comparison solve not certified", spec)
        lam.append(spec.eigenvalues)
    coarse, fine = lam
    return fine + (fine - coarse) / 3.0, np.abs(fine - coarse) / 3.0


def transverse_nu(c: float, tol: float = 1e-8) -> float:
    """First eigenvalue nu(c) of the weighted transverse fiber operator.

    Solves the (1-ct)-weighted pencil at doubling resolutions with
    Richardson extrapolation until two successive extrapolations agree
    within tol.
    """
    if c >= 1.0:
        raise ValueError("need c < 1 so the transverse weight stays positive")

    def fiber(Nt):
        # the factorization roundoff floor grows like machine eps * Nt^2,
        # so the solver tolerance must track the mesh
        solver_tol = max(1e-12, 2e-15 * Nt * Nt)
        return smallest_eigenpairs(assemble_transverse(c, Nt), 1,
                                   tol=solver_tol).eigenvalues[0]

    Nt = 32
    prev_extrap = None
    prev_lam = fiber(Nt)
    while Nt <= 8192:
        Nt *= 2
        lam = fiber(Nt)
        extrap = lam + (lam - prev_lam) / 3.0
        if prev_extrap is not None and abs(extrap - prev_extrap) <= 0.5 * tol:
            return extrap
        prev_extrap, prev_lam = extrap, lam
    raise NonConvergenceError(f"transverse eigenvalue not settled to {tol}")


# ---------------------------------------------------------------------------
# sweep records

@dataclass(frozen=True)
class SweepRecord:
    """Certified spectral data of one (profile, eps) strip problem.

    remainder_thm2[j] = lambda_strip[j] - threshold - lambda_1d[j]
    scaled_thm1[j]    = eps * (lambda_strip[j] - threshold)

    ``trusted_by_j`` flags entries whose discretization error estimate is
    at most a tenth of the remainder magnitude.
    """

    eps: float
    lambda_strip: tuple
    lambda_1d: tuple
    remainder_thm2: tuple
    scaled_thm1: tuple
    grid: str
    discretization_error_estimate: float
    disc_err_by_j: tuple
    trusted_by_j: tuple

    @property
    def trusted(self) -> bool:
        return all(self.trusted_by_j)


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit value(eps) = limit + coeff*sqrt(eps)."""

    limit: float
    coeff: float
    eps_used: tuple
    raw_last: float


@dataclass(frozen=True)
class SweepResult:
    variant: str
    records: tuple
    fits: dict  # j (1-based) -> FitResult for scaled_thm1

    @property
    def limits(self) -> dict:
        return {j: f.limit for j, f in self.fits.items()}


def _validate_eps_list(profile: CurvatureProfile, eps_list: Sequence[float]):
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 2:
        raise ValueError("need at least two sweep points")
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    return eps_list


def _sweep_point(profile: CurvatureProfile, eps: float, j_max: int,
                 grid_shape: tuple, outer: str,
                 alpha: Optional[Callable]) -> SweepRecord:
    problem = StripProblem(profile=profile, eps=eps, outer=outer, alpha=alpha)
    grid = build_grid(profile.interval, *grid_shape)
    thr = threshold(outer, eps)
    variant = {"neumann": "dn", "dirichlet": "dirichlet", "robin": "robin"}[outer]
    pot = effective_potential(profile, eps, variant, alpha=alpha)

    lam_strip, err_strip = certified_strip_eigenvalues(problem, grid, j_max)
    lam_1d, err_1d = certified_1d_eigenvalues(pot.value, profile.interval,
                                              grid_shape[0], j_max)
    remainder = lam_strip - thr - lam_1d
    scaled = eps * (lam_strip - thr)
    disc = err_strip + err_1d
    trusted = tuple(bool(disc[j] <= _TRUST_FACTOR * abs(remainder[j]))
                    for j in range(j_max))
    return SweepRecord(eps=eps,
                       lambda_strip=tuple(map(float, lam_strip)),
                       lambda_1d=tuple(map(float, lam_1d)),
                       remainder_thm2=tuple(map(float, remainder)),
                       scaled_thm1=tuple(map(float, scaled)),
                       grid=grid.tag,
                       discretization_error_estimate=float(disc.max()),
                       disc_err_by_j=tuple(map(float, disc)),
                       trusted_by_j=trusted)


def _sweep_point_star(args):
    return _sweep_point(*args)


def _run_sweep(profile, eps_list, j_max, grid_shape, outer, alpha,
               workers) -> tuple:
    jobs = [(profile, eps, j_max, grid_shape, outer, alpha) for eps in eps_list]
    if workers <= 1:
        records = [_sweep_point_star(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_sweep_point_star, jobs))
    records.sort(key=lambda r: -r.eps)
    return tuple(records)


def truncation_shift(problem: StripProblem, grid_shape: tuple) -> float:
    """Change of the certified lowest eigenvalue when the truncated
    interval is doubled at matched resolution."""
    grid = build_grid(problem.profile.interval, *grid_shape)
    lam, _ = certified_strip_eigenvalues(problem, grid, 1)
    doubled = problem.doubled()
    grid2 = build_grid(doubled.profile.interval, 2 * grid_shape[0], grid_shape[1])
    lam2, _ = certified_strip_eigenvalues(doubled, grid2, 1)
    return abs(float(lam2[0] - lam[0]))


def _check_truncation(profile, eps, grid_shape, outer, alpha):
    if not profile.interval.truncated:
        return
    problem = StripProblem(profile=profile, eps=eps, outer=outer, alpha=alpha)
    shift = truncation_shift(problem, grid_shape)
    if shift > _TRUNC_TOL:
        raise RuntimeError(
            f"truncated interval too short: doubling it moves lambda_1 by "
            f"{shift:.3e} > {_TRUNC_TOL}")


def _fit_sqrt(eps_arr: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    design = np.column_stack([np.ones_like(eps_arr), np.sqrt(eps_arr)])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(coef[0]), float(coef[1])


def _fit_scaled_limits(records, j_max, n_points=3) -> dict:
    fits = {}
    for j in range(j_max):
        usable = [r for r in records if r.trusted_by_j[j]]
        if len(usable) < 2:
            continue
        tail = usable[-min(n_points, len(usable)):]
        eps_arr = np.array([r.eps for r in tail])
        vals = np.array([r.scaled_thm1[j] for r in tail])
        limit, coeff = _fit_sqrt(eps_arr, vals)
        fits[j + 1] = FitResult(limit=limit, coeff=coeff,
                                eps_used=tuple(map(float, eps_arr)),
                                raw_last=float(vals[-1]))
    return fits


def sweep_thm1(profile: CurvatureProfile, eps_list: Sequence[float],
               j_max: int = 1, grids: tuple = _DEFAULT_GRID,
               workers: int = 1) -> SweepResult:
    """Sweep the scaled gap eps*(lambda_j - threshold) toward its limit.

    The limit of the scaled gap is the infimum of the curvature; since no
    remainder rate is guaranteed, the extrapolation model
    L + c*sqrt(eps), fitted over the last three trusted points, is a
    reporting heuristic and both the fit and the raw last value are kept.
    """
    eps_list = _validate_eps_list(profile, eps_list)
    _check_truncation(profile, eps_list[0], grids, "neumann", None)
    records = _run_sweep(profile, eps_list, j_max, grids, "neumann", None, workers)
    return SweepResult(variant="dn", records=records,
                       fits=_fit_scaled_limits(records, j_max))


@dataclass(frozen=True)
class BoundednessVerdict:
    """Remainder boundedness across a halving sweep, judged per mode.

    ``ratio_to_first`` is max |remainder| over the sweep divided by its
    value at the largest eps; the verdict requires it to stay <= 3.
    ``minmax_ratio`` (max/min) is reported for diagnostics only; it blows
    up when a remainder changes sign along the sweep.
    """

    ratio_to_first: dict
    minmax_ratio: dict
    bounded: bool


@dataclass(frozen=True)
class Thm2Table:
    records: tuple
    verdict: BoundednessVerdict


def _boundedness(records, j_max) -> BoundednessVerdict:
    ratio_first, ratio_minmax = {}, {}
    ok = True
    for j in range(j_max):
        usable = [r for r in records if r.trusted_by_j[j]]
        vals = np.array([abs(r.remainder_thm2[j]) for r in usable])
        if len(vals) < 2 or vals[0] == 0.0:
            ok = False
            continue
        ratio_first[j + 1] = float(vals.max() / vals[0])
        ratio_minmax[j + 1] = float(vals.max() / vals.min()) if vals.min() > 0 else math.inf
        ok = ok and ratio_first[j + 1] <= 3.0
    return BoundednessVerdict(ratio_to_first=ratio_first,
                              minmax_ratio=ratio_minmax, bounded=ok)


def check_thm2(profile: CurvatureProfile, eps_list: Sequence[float],
               j_max: int = 2, grids: tuple = _DEFAULT_GRID,
               workers: int = 1,
               records: Optional[tuple] = None) -> Thm2Table:
    """Remainder table lambda_j(strip) - threshold - lambda_j(1d) with a
    boundedness verdict over the sweep.

    Pass ``records`` from a previous sweep over the same inputs to skip
    recomputation.
    """
    eps_list = _validate_eps_list(profile, eps_list)
    if records is None:
        _check_truncation(profile, eps_list[0], grids, "neumann", None)
        records = _run_sweep(profile, eps_list, j_max, grids, "neumann", None,
                             workers)
    if any(len(r.remainder_thm2) < j_max for r in records):
        raise ValueError(f"records carry fewer than {j_max} modes")
    return Thm2Table(records=tuple(records),
                     verdict=_boundedness(records, j_max))


# ---------------------------------------------------------------------------
# resolvent gaps

@dataclass(frozen=True)
class ResolventGap:
    eps: float
    k: float
    gap: float
    ratio: float  # gap / eps^{3/2}


@dataclass(frozen=True)
class ResolventSweep:
    gaps: tuple
    fitted_exponent: float

    @property
    def ratios(self) -> tuple:
        return tuple(g.ratio for g in self.gaps)


def default_resolvent_k(profile: CurvatureProfile) -> float:
    return 1.0 + 2.0 * max(0.0, -profile.inf_kappa)


def resolvent_gap_point(profile: CurvatureProfile, eps: float, k: float,
                        grid_shape: tuple = _DEFAULT_GRID,
                        tol: float = 1e-6) -> ResolventGap:
    """M-norm gap between the inverses of the shifted curved pencil and
    its decoupled comparison pencil at one eps."""
    grid = build_grid(profile.interval, *grid_shape)
    bc = bc_of(StripProblem(profile=profile, eps=eps))
    flat = assemble_flat(profile, eps, bc, grid, shift_k=k)
    ref = assemble_reference(profile, eps, grid, k)
    if not np.array_equal(flat.M, ref.M):
        raise AssertionError("flat and reference mass matrices must coincide")
    gap = operator_gap_norm(flat, ref, flat.M, tol=tol)
    return ResolventGap(eps=eps, k=k, gap=gap, ratio=gap / eps ** 1.5)


def resolvent_gap_sweep(profile: CurvatureProfile,
                        k: Optional[float] = None,
                        eps_list: Sequence[float] = (0.2, 0.1, 0.05, 0.025),
                        grids: tuple = _DEFAULT_GRID, tol: float = 1e-6,
                        workers: int = 1) -> ResolventSweep:
    """Sweep the inverse-operator gap and fit its decay exponent.

    The theory guarantees decay at least as fast as eps^{3/2} up to a
    constant; the fitted exponent is reported without asserting it equals
    3/2, since faster decay is not excluded.
    """
    eps_list = _validate_eps_list(profile, eps_list)
    if k is None:
        k = default_resolvent_k(profile)
    jobs = [(profile, eps, k, grids, tol) for eps in eps_list]
    if workers <= 1:
        gaps = [resolvent_gap_point(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            gaps = list(pool.map(_resolvent_point_star, jobs))
    gaps.sort(key=lambda g: -g.eps)
    positive = all(g.gap > 1e-12 for g in gaps)
    if positive:
        logs = np.log([g.gap for g in gaps])
        le = np.log([g.eps for g in gaps])
        exponent = float(np.polyfit(le, logs, 1)[0])
    else:
        exponent = math.nan  # gap at roundoff, e.g. kappa = 0
    return ResolventSweep(gaps=tuple(gaps), fitted_exponent=exponent)


def _resolvent_point_star(args):
    return resolvent_gap_point(*args)


# ---------------------------------------------------------------------------
# Dirichlet and Robin variants

@dataclass(frozen=True)
class DirichletTable:
    records: tuple
    decreasing_by_j: dict
    vanishing: bool  # every remainder magnitude strictly decreasing


def dirichlet_compare(profile: CurvatureProfile, eps_list: Sequence[float],
                      j_max: int = 1, grids: tuple = _DD_GRID,
                      workers: int = 1) -> DirichletTable:
    """Remainders of the both-sides-Dirichlet strip against the
    curvature-squared comparison operator; the remainder should vanish
    as eps decreases, so the verdict checks strict decrease in magnitude."""
    eps_list = _validate_eps_list(profile, eps_list)
    _check_truncation(profile, eps_list[0], grids, "dirichlet", None)
    records = _run_sweep(profile, eps_list, j_max, grids, "dirichlet", None,
                         workers)
    decreasing = {}
    for j in range(j_max):
        usable = [r for r in records if r.trusted_by_j[j]]
        vals = [abs(r.remainder_thm2[j]) for r in usable]
        decreasing[j + 1] = (len(vals) >= 2
                             and all(b < a for a, b in zip(vals, vals[1:])))
    return DirichletTable(records=records, decreasing_by_j=decreasing,
                          vanishing=all(decreasing.values()))


def robin_sweep(profile: CurvatureProfile, alpha: Callable,
                eps_list: Sequence[float], j_max: int = 1,
                grids: tuple = _DEFAULT_GRID, workers: int = 1) -> SweepResult:
    """Same pipeline as the base sweep with a Robin outer edge and the
    shifted effective potential (kappa + 2 alpha)/eps."""
    eps_list = _validate_eps_list(profile, eps_list)
    _check_truncation(profile, eps_list[0], grids, "robin", alpha)
    records = _run_sweep(profile, eps_list, j_max, grids, "robin", alpha,
                         workers)
    return SweepResult(variant="robin", records=records,
                       fits=_fit_scaled_limits(records, j_max))


# ---------------------------------------------------------------------------
# bound-state counting

def count_bound_states(problem: StripProblem,
                       grid_shape: tuple = _DEFAULT_GRID,
                       margin: Optional[float] = None,
                       check_doubling: bool = True) -> int:
    """Number of certified eigenvalues below the transverse threshold.

    Counts by factorization inertia on the refined grid, with the cutoff
    moved by the transverse defect (so the discrete count matches the
    continuum one) and lowered by ``margin`` (default: 10x the estimated
    discretization error of the lowest eigenvalue).  For truncated
    intervals the count is recomputed on the doubled domain at matched
    resolution; a mismatch raises.
    """
    eta = problem.eps * _mean_alpha(problem) if problem.outer == "robin" else 0.0
    grid = build_grid(problem.profile.interval, *grid_shape)
    if margin is None:
        _, err = certified_strip_eigenvalues(problem, grid, 1)
        margin = 10.0 * float(err[0])

    def _count(prob: StripProblem, shape: tuple) -> int:
        g = build_grid(prob.profile.interval, *shape).refined()
        pencil = assemble_weighted(prob.profile, prob.eps, bc_of(prob), g)
        defect = _transverse_defect(prob.outer, prob.eps, g.Nt, eta)
        cutoff = threshold(prob.outer, prob.eps) + defect - margin
        return count_below(pencil, cutoff)

    n = _count(problem, grid_shape)
    if check_doubling and problem.profile.interval.truncated:
        n2 = _count(problem.doubled(), (2 * grid_shape[0], grid_shape[1]))
        if n2 != n:
            raise RuntimeError(
                f"bound-state count unstable under domain doubling: {n} vs {n2}")
    return n


# ---------------------------------------------------------------------------
# annulus oracle

def bessel_first_zero() -> float:
    """First positive zero of J_0, located independently by bracketed
    root finding; used as a self-check of the Bessel evaluations."""
    return float(brentq(lambda x: jv(0, x), 2.0, 3.0, xtol=1e-13, rtol=8.9e-16))


def annulus_oracle(R: float, eps: float, theta: float, side: str = "outer",
                   m_max: int = 3, radial_roots: int = 3) -> np.ndarray:
    """Exact eigenvalues of an annular sector with one Dirichlet circle.

    The Dirichlet circle has radius R; ``side`` says whether it is the
    outer boundary (Neumann circle at R - eps, the constant-curvature
    +1/R strip) or the inner one (Neumann at R + eps, curvature -1/R).
    The straight sector sides are Dirichlet.  For each angular order
    nu = m*pi/theta the radial wavenumbers k solve

        J_nu(k R) Y_nu'(k r_N) - Y_nu(k R) J_nu'(k r_N) = 0,

    and the returned array holds the sorted k^2 values of the first
    ``radial_roots`` roots per order.
    """
    if not 0.0 < eps < R:
        raise ValueError("need 0 < eps < R")
    if not 0.0 < theta <= 2.0 * math.pi + 1e-12:
        raise ValueError("need 0 < theta <= 2*pi")
    if side == "outer":
        r_n = R - eps
    elif side == "inner":
        r_n = R + eps
    else:
        raise ValueError(f"side must be 'outer' or 'inner', got {side!r}")

    eigenvalues = []
    k_lo = 0.25 * math.pi / eps
    k_hi = (radial_roots + 2.0) * math.pi / eps + 2.0 * m_max * math.pi / theta / R
    ks = np.linspace(k_lo, k_hi, 4001)
    for m in range(1, m_max + 1):
        nu = m * math.pi / theta

        def f(k, nu=nu):
            return jv(nu, k * R) * yvp(nu, k * r_n) - yv(nu, k * R) * jvp(nu, k * r_n)

        vals = f(ks)
        sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        if len(sign_change) < radial_roots:
            raise RuntimeError(
                f"bracketing failed for order nu={nu:.6g} on "
                f"[{k_lo:.6g}, {k_hi:.6g}]: {len(sign_change)} sign changes")
        for i in sign_change[:radial_roots]:
            root = brentq(f, ks[i], ks[i + 1], xtol=1e-13, rtol=8.9e-16)
            eigenvalues.append(root ** 2)
    return np.array(sorted(eigenvalues))


# ---------------------------------------------------------------------------
# artifact writers

CSV_COLUMNS = ("eps", "j", "lambda_strip", "lambda_1d", "remainder_thm2",
               "scaled_thm1", "disc_err", "trusted")


def sweep_csv_rows(records: Sequence[SweepRecord]):
    for r in records:
        for j in range(len(r.lambda_strip)):
            yield (r.eps, j + 1, r.lambda_strip[j], r.lambda_1d[j],
                   r.remainder_thm2[j], r.scaled_thm1[j], r.disc_err_by_j[j],
                   int(r.trusted_by_j[j]))


def write_sweep_csv(path, records: Sequence[SweepRecord],
                    header_lines: Sequence[str] = ()) -> None:
    """Write one row per (eps, mode) with repr-exact floats, deterministic
    given identical records."""
    with open(path, "w") as f:
        for line in header_lines:
            f.write(f"# {line}\n")
        f.write(",".join(CSV_COLUMNS) + "\n")
        for row in sweep_csv_rows(records):
            f.write(",".join(repr(float(x)) if isinstance(x, float) else str(x)
                             for x in row) + "\n")


def write_summary_json(path, limits: dict, verdicts: dict,
                       fitted_exponents: dict) -> None:
    payload = {"limits": limits, "verdicts": verdicts,
               "fitted_exponents": fitted_exponents}
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
