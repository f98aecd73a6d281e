"""Banded symmetric generalized eigensolvers.

Pencils (A, M) from :mod:`stripspec.discretize` are solved for their
lowest eigenpairs with shift-invert Lanczos in the M-inner product, with
full reorthogonalization and an independently recomputed residual
certificate per returned pair.  The same banded LDLT machinery provides
matrix inertia (for counting eigenvalues below a cutoff) and the M-norm
of the difference of two shifted inverses (for resolvent gaps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _banded
from .discretize import GeneralizedPencil

_START_SEED = 20170401


class ShiftBreakdownError(RuntimeError):
    """Factorization hit a vanishing pivot (shift at or near an eigenvalue)."""

    def __init__(self, pivot_index: int, sigma: float):
        super().__init__(f"LDLT breakdown at pivot {pivot_index} for shift {sigma!r}")
        self.pivot_index = pivot_index
        self.sigma = sigma


class NonConvergenceError(RuntimeError):
    """Lanczos failed to certify the requested pairs; carries what it got."""

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


def shifted_bands(pencil: GeneralizedPencil, sigma: float) -> np.ndarray:
    if sigma == 0.0:
        return pencil.A.copy()
    return pencil.A - sigma * pencil.M


@dataclass
class BandedFactorization:
    """LDLT factorization of A - sigma*M in banded storage."""

    n: int
    half_bandwidth: int
    sigma: float
    _fact: np.ndarray
    _orig: np.ndarray

    @property
    def inertia(self) -> int:
        """Number of negative pivots = eigenvalues of the pencil below sigma."""
        return int(np.sum(self._fact[0] < 0.0))

    def solve(self, b: np.ndarray) -> np.ndarray:
        return _banded.ldlt_solve(self._fact, np.asarray(b, dtype=float))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Multiply by the factored matrix, L D L^T x."""
        return _banded.ldlt_apply(self._fact, np.asarray(x, dtype=float))

    def reconstruction_residual(self, n_probes: int = 3, seed: int = 0) -> float:
        """max-norm discrepancy of L D L^T against A - sigma*M on random probes,
        relative to the largest matrix entry."""
        rng = np.random.default_rng(seed)
        scale = float(np.max(np.abs(self._orig))) or 1.0
        worst = 0.0
        for _ in range(n_probes):
            x = rng.standard_normal(self.n)
            lhs = _banded.sym_matvec(self._orig, x)
            rhs = self.apply(x)
            worst = max(worst, float(np.max(np.abs(lhs - rhs)))
                        / (scale * float(np.max(np.abs(x)))))
        return worst


def ldlt_banded(pencil: GeneralizedPencil, sigma: float = 0.0) -> BandedFactorization:
    """Factor A - sigma*M, raising ShiftBreakdownError on a dead pivot."""
    ab = shifted_bands(pencil, sigma)
    orig = ab.copy()
    scale = float(np.max(np.abs(ab)))
    tiny = max(scale, 1.0) * 1e-300 if scale == 0.0 else scale * 1e-20
    bad = _banded.ldlt_factor(ab, tiny)
    if bad >= 0:
        raise ShiftBreakdownError(bad, sigma)
    return BandedFactorization(n=pencil.n, half_bandwidth=pencil.half_bandwidth,
                               sigma=sigma, _fact=ab, _orig=orig)


def count_below(pencil: GeneralizedPencil, cutoff: float,
                max_retries: int = 3) -> int:
    """Number of pencil eigenvalues strictly below ``cutoff`` via LDLT inertia."""
    jitter = max(abs(cutoff) * 1e-11, 1e-12)
    for attempt in range(max_retries + 1):
        try:
            return ldlt_banded(pencil, cutoff + attempt * jitter).inertia
        except ShiftBreakdownError:
            if attempt == max_retries:
                raise
    raise AssertionError("unreachable")


@dataclass
class Spectrum:
    """Ascending eigenvalues with certificates.

    ``residuals`` holds ||A x - lambda M x||_{M^-1} / ||x||_M recomputed
    from the banded matrices after the Lanczos run; each value bounds the
    distance from the reported eigenvalue to the true spectrum of the
    pencil.  ``converged`` flags residuals at or below
    tol * max(1, |lambda|).
    """

    eigenvalues: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    sigma: float
    iterations: int
    vectors: Optional[np.ndarray] = None

    def __post_init__(self):
        order = np.argsort(self.eigenvalues)
        self.eigenvalues = self.eigenvalues[order]
        self.residuals = self.residuals[order]
        self.converged = self.converged[order]
        if self.vectors is not None:
            self.vectors = self.vectors[:, order]


def _m_norm(M: np.ndarray, x: np.ndarray) -> float:
    return math.sqrt(max(float(x @ _banded.sym_matvec(M, x)), 0.0))


def _default_start(pencil: GeneralizedPencil) -> np.ndarray:
    """Deterministic start vector; a smooth tensor bump when the layout is known."""
    meta = pencil.meta
    form = meta.get("form", "")
    if form in ("weighted", "flat", "reference"):
        nt_keep = pencil.half_bandwidth - 1
        ns_keep = pencil.n // nt_keep
        outer_dirichlet = meta.get("outer") == "dirichlet"
        Nt = nt_keep + 1 if outer_dirichlet else nt_keep
        t = np.arange(1, nt_keep + 1) / Nt
        chi = np.sin(math.pi * t) if outer_dirichlet else np.sin(0.5 * math.pi * t)
        s = np.sin(math.pi * np.arange(1, ns_keep + 1) / (ns_keep + 1))
        return np.outer(s, chi).ravel()
    rng = np.random.default_rng(_START_SEED)
    return rng.standard_normal(pencil.n)


def _rayleigh(pencil: GeneralizedPencil, v: np.ndarray) -> float:
    num = float(v @ _banded.sym_matvec(pencil.A, v))
    den = float(v @ _banded.sym_matvec(pencil.M, v))
    return num / den


def _factor_below_spectrum(pencil, sigma, max_tries=8):
    """Factor A - sigma*M, lowering sigma until no eigenvalue sits below it."""
    gap = max(1.0, 0.2 * abs(sigma))
    for _ in range(max_tries):
        try:
            fact = ldlt_banded(pencil, sigma)
        except ShiftBreakdownError:
            sigma -= max(1e-8, 1e-6 * abs(sigma))
            continue
        if fact.inertia == 0:
            return fact, sigma
        sigma -= gap
        gap *= 2.0
    raise NonConvergenceError(
        f"could not place a shift below the spectrum (last tried {sigma!r})")


def _tighten_shift(pencil, fact, lo, hi, max_steps=25):
    """Inertia bisection pushing the zero-inertia shift up toward the
    lowest eigenvalue; tight shifts separate the wanted Ritz values."""
    for _ in range(max_steps):
        if hi - lo <= 2e-3 * max(1.0, abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        try:
            fm = ldlt_banded(pencil, mid)
        except ShiftBreakdownError:
            hi = mid  # breakdown means mid sits on an eigenvalue
            continue
        if fm.inertia == 0:
            lo, fact = mid, fm
        else:
            hi = mid
    return fact, lo


def smallest_eigenpairs(pencil: GeneralizedPencil, m: int,
                        sigma: Optional[float] = None, tol: float = 1e-8,
                        max_subspace: Optional[int] = None,
                        start: Optional[np.ndarray] = None,
                        return_vectors: bool = False) -> Spectrum:
    """Lowest ``m`` eigenpairs of A x = lambda M x.

    Shift-invert Lanczos in the M-inner product with full
    reorthogonalization.  The default shift is the Rayleigh quotient of a
    smooth tensor test vector minus a 10% margin, then lowered until the
    factorization inertia confirms it sits below the whole spectrum.  A
    breakdown at the shift retries with a perturbed value.

    Acceptance of a Ritz pair requires the recomputed residual certificate
    || A x - lambda M x ||_{M^-1} / || x ||_M <= tol * max(1, |lambda|),
    which bounds the distance from lambda to the true spectrum.  After
    convergence an inertia count guards against skipped eigenvalues; on a
    detected skip the solve retries from a lower shift.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    n = pencil.n
    if m >= n:
        raise ValueError(f"m = {m} too large for pencil of dimension {n}")

    if sigma is None:
        # the smooth tensor vector gives a sharp upper bound for the shift,
        # but it must not seed the iteration: it is symmetric and would
        # stay orthogonal to odd modes of symmetric profiles
        rq = _rayleigh(pencil, _default_start(pencil))
        guess = rq - 0.1 * abs(rq) - 1e-12
        fact, sigma = _factor_below_spectrum(pencil, guess)
        fact, sigma = _tighten_shift(pencil, fact, sigma, rq + 1e-10 * abs(rq) + 1e-12)
    else:
        fact, sigma = _factor_below_spectrum(pencil, sigma)
    if start is None:
        v0 = np.random.default_rng(_START_SEED).standard_normal(n)
    else:
        v0 = np.asarray(start, dtype=float).copy()

    if max_subspace is None:
        max_subspace = min(n, max(6 * m + 30, 80))
    max_subspace = min(max_subspace, n)

    mass_fact = _mass_factorization(pencil)

    last_error = f"no usable Ritz values for {m} requested pairs"
    for attempt in range(3):
        result = _lanczos_run(pencil, fact, sigma, m, tol, max_subspace,
                              v0, mass_fact)
        if result is None:
            last_error = (f"Lanczos subspace of {max_subspace} exhausted "
                          f"before isolating {m} pairs")
            max_subspace = min(n, 2 * max_subspace)
            continue
        lam, X, residuals, k_used = result
        converged = residuals <= tol * np.maximum(1.0, np.abs(lam))
        skip_msg = _completeness_defect(pencil, lam, tol)
        if skip_msg:
            # an eigenvalue below the returned ones was missed; move the
            # shift away from the cluster and widen the search space
            last_error = skip_msg
            fact, sigma = _factor_below_spectrum(
                pencil, sigma - max(1.0, 0.1 * abs(sigma)))
            max_subspace = min(n, 2 * max_subspace)
            continue
        if bool(np.all(converged)) or attempt == 2:
            return Spectrum(eigenvalues=lam, residuals=residuals,
                            converged=converged, sigma=sigma,
                            iterations=k_used,
                            vectors=X if return_vectors else None)
        last_error = "residual certificates above tolerance"
        max_subspace = min(n, 2 * max_subspace)
    raise NonConvergenceError(last_error)


def _mass_factorization(pencil: GeneralizedPencil) -> BandedFactorization:
    """Factor the (positive definite) mass matrix for certificate norms."""
    shim = GeneralizedPencil(n=pencil.n, half_bandwidth=pencil.half_bandwidth,
                             A=pencil.M, M=pencil.M, meta=pencil.meta)
    return ldlt_banded(shim, sigma=0.0)


def _certified_pairs(pencil, mass_fact, V, k_used, theta, y, sigma):
    """Ritz vectors with sign convention and inverse-mass residual norms."""
    m = len(theta)
    lam = sigma + 1.0 / theta
    X = V[:, :k_used] @ y
    # deterministic sign: first component of visible magnitude is positive
    for i in range(m):
        col = X[:, i]
        nz = np.nonzero(np.abs(col) > 1e-12 * np.max(np.abs(col)))[0]
        if len(nz) and col[nz[0]] < 0:
            X[:, i] = -col
    residuals = np.empty(m)
    for i in range(m):
        x = X[:, i]
        r = _banded.sym_matvec(pencil.A, x) - lam[i] * _banded.sym_matvec(pencil.M, x)
        num = math.sqrt(max(float(r @ mass_fact.solve(r)), 0.0))
        residuals[i] = num / _m_norm(pencil.M, x)
    order = np.argsort(lam)
    return lam[order], X[:, order], residuals[order]


def _completeness_defect(pencil, lam, tol) -> str:
    """Inertia cross-check that no eigenvalue below max(lam) was skipped."""
    pad = max(10.0 * tol, 1e-9) * max(1.0, abs(lam[-1]))
    cutoff = lam[-1] - pad
    found_below = int(np.sum(lam < cutoff))
    actual_below = count_below(pencil, cutoff)
    if actual_below > found_below:
        return (f"inertia reports {actual_below} eigenvalues below "
                f"{cutoff:.6g} but only {found_below} were returned")
    return ""


def _lanczos_run(pencil, fact, sigma, m, tol, max_subspace, v0, mass_fact):
    """One shift-invert Lanczos sweep; returns (lam, X, residuals, k_used).

    Returns None when the subspace is exhausted without m usable Ritz
    values.  Results are returned as soon as every residual certificate
    passes; on exhaustion the best available pairs are certified as-is.
    """
    n = pencil.n
    A, M = pencil.A, pencil.M
    V = np.empty((n, max_subspace))
    MV = np.empty((n, max_subspace))

    Mv = _banded.sym_matvec(M, v0)
    nrm = math.sqrt(float(v0 @ Mv))
    V[:, 0] = v0 / nrm
    MV[:, 0] = Mv / nrm

    alphas = np.zeros(max_subspace)
    betas = np.zeros(max_subspace)
    rng = np.random.default_rng(_START_SEED + 1)
    k_used = 0
    theta = y = None

    for j in range(max_subspace):
        w = fact.solve(MV[:, j])
        if j > 0:
            w -= betas[j - 1] * V[:, j - 1]
        alphas[j] = float(w @ MV[:, j])
        w -= alphas[j] * V[:, j]
        for _ in range(2):  # full reorthogonalization, repeated once
            w -= V[:, :j + 1] @ (MV[:, :j + 1].T @ w)
        Mw = _banded.sym_matvec(M, w)
        b = math.sqrt(max(float(w @ Mw), 0.0))
        k_used = j + 1

        if k_used >= m:
            theta, Y = eigh_tridiagonal(alphas[:k_used], betas[:k_used - 1])
            sel = np.argsort(theta)[::-1][:m]  # largest theta = closest above sigma
            theta, y = theta[sel], Y[:, sel]
            if np.all(theta > 0):
                lam_err = b * np.abs(y[-1, :]) / theta ** 2
                scale = np.maximum(1.0, np.abs(sigma + 1.0 / theta))
                if bool(np.all(lam_err <= 0.05 * tol * scale)):
                    # cheap bound met: accept only if the certificates agree
                    lam, X, residuals = _certified_pairs(
                        pencil, mass_fact, V, k_used, theta, y, sigma)
                    if bool(np.all(residuals
                                   <= tol * np.maximum(1.0, np.abs(lam)))):
                        return lam, X, residuals, k_used
        op_scale = abs(alphas[j]) + (betas[j - 1] if j > 0 else 0.0) + b
        if b <= 1e-10 * op_scale:
            if k_used >= m and theta is not None and np.all(theta > 0):
                break
            if k_used >= n:
                break
            # invariant subspace hit: restart with a fresh direction and a
            # zero coupling, so the tridiagonal matrix stays faithful
            w = rng.standard_normal(n)
            for _ in range(2):
                w -= V[:, :k_used] @ (MV[:, :k_used].T @ w)
            Mw = _banded.sym_matvec(M, w)
            nw = math.sqrt(max(float(w @ Mw), 0.0))
            if nw <= 1e-13 or j + 1 >= max_subspace:
                break
            betas[j] = 0.0
            V[:, j + 1] = w / nw
            MV[:, j + 1] = Mw / nw
            continue
        if j + 1 < max_subspace:
            betas[j] = b
            V[:, j + 1] = w / b
            MV[:, j + 1] = Mw / b

    if theta is None or len(theta) < m or np.any(theta <= 0):
        return None
    lam, X, residuals = _certified_pairs(pencil, mass_fact, V, k_used,
                                         theta, y, sigma)
    return lam, X, residuals, k_used


def operator_gap_norm(pencil_a: GeneralizedPencil, pencil_b: GeneralizedPencil,
                      mass: np.ndarray, tol: float = 1e-6,
                      max_iter: int = 160) -> float:
    """M-operator norm of D = A_a^{-1} M - A_b^{-1} M.

    Both pencils must be positive definite and share the mass matrix and
    dof layout.  D is self-adjoint in the M-inner product, so its norm is
    its extreme eigenvalue magnitude, estimated by Lanczos at two banded
    solves per iteration.
    """
    if pencil_a.n != pencil_b.n:
        raise ValueError("pencils must share the dof layout")
    fa = ldlt_banded(pencil_a, 0.0)
    fb = ldlt_banded(pencil_b, 0.0)
    for name, f in (("first", fa), ("second", fb)):
        if f.inertia != 0:
            raise ValueError(f"{name} pencil is not positive definite "
                             f"({f.inertia} negative pivots)")

    n = pencil_a.n

    def apply_d(x):
        mx = _banded.sym_matvec(mass, x)
        return fa.solve(mx) - fb.solve(mx)

    rng = np.random.default_rng(_START_SEED + 2)
    v = rng.standard_normal(n)
    mv = _banded.sym_matvec(mass, v)
    v /= math.sqrt(float(v @ mv))

    w0 = apply_d(v)
    lead = _m_norm(mass, w0)
    if lead <= 1e-13:
        return lead  # the two inverses coincide to roundoff

    max_iter = min(max_iter, n)
    V = np.empty((n, max_iter))
    MV = np.empty((n, max_iter))
    V[:, 0] = v
    MV[:, 0] = _banded.sym_matvec(mass, v)
    alphas = np.zeros(max_iter)
    betas = np.zeros(max_iter)
    gap_prev = None
    theta_max = lead
    k_used = 1

    for j in range(max_iter):
        w = apply_d(V[:, j])
        if j > 0:
            w -= betas[j - 1] * V[:, j - 1]
        alphas[j] = float(w @ MV[:, j])
        w -= alphas[j] * V[:, j]
        for _ in range(2):
            w -= V[:, :j + 1] @ (MV[:, :j + 1].T @ w)
        Mw = _banded.sym_matvec(mass, w)
        b = math.sqrt(max(float(w @ Mw), 0.0))
        k_used = j + 1

        theta, Y = eigh_tridiagonal(alphas[:k_used], betas[:k_used - 1])
        i_max = int(np.argmax(np.abs(theta)))
        theta_max = abs(float(theta[i_max]))
        resid_bound = b * abs(Y[-1, i_max])
        if gap_prev is not None and theta_max > 0:
            if (resid_bound <= tol * theta_max
                    and abs(theta_max - gap_prev) <= 0.1 * tol * theta_max):
                break
        gap_prev = theta_max
        if b <= 1e-15 * max(theta_max, 1e-300):
            break
        if j + 1 < max_iter:
            betas[j] = b
            V[:, j + 1] = w / b
            MV[:, j + 1] = Mw / b

    return theta_max
