"""Shift-invert Lanczos and the operator gap norm against dense references."""

import math

import numpy as np
import pytest
from scipy.linalg import eigh

from stripspec import (BoundaryConditionSet, Interval, Spectrum, assemble_1d,
                       assemble_flat, assemble_weighted, build_grid,
                       make_profile, operator_gap_norm, smallest_eigenpairs)
from stripspec._banded import sym_matvec, to_dense

I66 = Interval(-6.0, 6.0, truncated=True)
DN = BoundaryConditionSet("neumann", None)


@pytest.fixture(scope="module")
def curved_pencil():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    return assemble_weighted(dip, 0.2, DN, build_grid(I66, 48, 6))


@pytest.fixture(scope="module")
def dense_eigs(curved_pencil):
    a, m = to_dense(curved_pencil.A), to_dense(curved_pencil.M)
    return eigh(a, m, eigvals_only=True)


def test_matches_dense_solver(curved_pencil, dense_eigs):
    spec = smallest_eigenpairs(curved_pencil, 6, tol=1e-10)
    np.testing.assert_allclose(spec.eigenvalues, dense_eigs[:6], rtol=1e-9)
    assert all(spec.converged)
    assert np.all(np.diff(spec.eigenvalues) >= 0)


def test_residual_certificates_independent(curved_pencil):
    tol = 1e-9
    spec = smallest_eigenpairs(curved_pencil, 4, tol=tol, return_vectors=True)
    a, m = curved_pencil.A, curved_pencil.M
    m_dense = to_dense(m)
    for i, lam in enumerate(spec.eigenvalues):
        x = spec.vectors[:, i]
        r = sym_matvec(a, x) - lam * sym_matvec(m, x)
        num = math.sqrt(float(r @ np.linalg.solve(m_dense, r)))
        den = math.sqrt(float(x @ sym_matvec(m, x)))
        resid = num / den
        # the stored certificate measures the same inverse-mass norm
        assert spec.residuals[i] <= tol * max(1.0, abs(lam))
        assert resid <= 1.01 * tol * max(1.0, abs(lam))
        assert resid == pytest.approx(spec.residuals[i], rel=1e-6, abs=1e-14)


def test_eigenvectors_m_orthonormal(curved_pencil):
    spec = smallest_eigenpairs(curved_pencil, 4, tol=1e-10, return_vectors=True)
    gram = spec.vectors.T @ np.column_stack(
        [sym_matvec(curved_pencil.M, spec.vectors[:, i]) for i in range(4)])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-8)


def test_shift_choice_does_not_change_eigenvalues(curved_pencil, dense_eigs):
    lam1 = dense_eigs[0]
    below = smallest_eigenpairs(curved_pencil, 3, sigma=lam1 - 50.0, tol=1e-10)
    interior = smallest_eigenpairs(curved_pencil, 3, sigma=lam1 + 8.0, tol=1e-10)
    default = smallest_eigenpairs(curved_pencil, 3, tol=1e-10)
    np.testing.assert_allclose(below.eigenvalues, default.eigenvalues,
                               rtol=1e-8)
    np.testing.assert_allclose(interior.eigenvalues, default.eigenvalues,
                               rtol=1e-8)


def test_shift_at_exact_eigenvalue_recovers(curved_pencil, dense_eigs):
    # factorization breakdown at the shift must retry, not fail
    spec = smallest_eigenpairs(curved_pencil, 2, sigma=float(dense_eigs[0]),
                               tol=1e-9)
    np.testing.assert_allclose(spec.eigenvalues, dense_eigs[:2], rtol=1e-8)


def test_requested_count_validation(curved_pencil):
    with pytest.raises(ValueError):
        smallest_eigenpairs(curved_pencil, 0)
    small = assemble_1d(lambda s: 0.0 * np.asarray(s), Interval(0.0, 1.0), 4)
    with pytest.raises(ValueError):
        smallest_eigenpairs(small, small.n)


def test_fully_degenerate_pencil():
    # identity pencil: every Krylov step breaks down, restarts must fill in
    from stripspec import GeneralizedPencil

    n = 12
    eye = np.zeros((1, n))
    eye[0] = 1.0
    pencil = GeneralizedPencil(n=n, half_bandwidth=0, A=eye.copy(),
                               M=eye.copy(), meta={"form": "test"})
    spec = smallest_eigenpairs(pencil, 3, tol=1e-10)
    np.testing.assert_allclose(spec.eigenvalues, np.ones(3), rtol=1e-10)


def test_spectrum_sorts_on_construction():
    spec = Spectrum(eigenvalues=np.array([3.0, 1.0, 2.0]),
                    residuals=np.array([3e-12, 1e-12, 2e-12]),
                    converged=np.array([True, True, True]),
                    sigma=0.0, iterations=5)
    np.testing.assert_array_equal(spec.eigenvalues, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(spec.residuals, [1e-12, 2e-12, 3e-12])


def test_gap_norm_zero_for_identical_pencils():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    grid = build_grid(I66, 32, 6)
    pencil = assemble_flat(dip, 0.2, DN, grid, shift_k=3.0)
    gap = operator_gap_norm(pencil, pencil, pencil.M, tol=1e-8)
    assert gap <= 1e-10


def test_gap_norm_matches_dense_computation():
    # || A_a^{-1} - A_b^{-1} || in the M-weighted operator norm equals the
    # largest |eigenvalue| of M^{1/2} (A_a^{-1} - A_b^{-1}) M^{1/2}
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    grid = build_grid(I66, 24, 4)
    pa = assemble_flat(dip, 0.2, DN, grid, shift_k=3.0)
    pb = assemble_flat(dip, 0.1, DN, grid, shift_k=3.0)
    pb = type(pb)(n=pa.n, half_bandwidth=pa.half_bandwidth,
                  A=0.5 * (to_bands := pa.A) + 0.5 * pb.A, M=pa.M,
                  meta=pa.meta)

    gap = operator_gap_norm(pa, pb, pa.M, tol=1e-9)

    a_a, a_b = to_dense(pa.A), to_dense(pb.A)
    m = to_dense(pa.M)
    sqrt_m = np.linalg.cholesky(m)
    d = sqrt_m.T @ (np.linalg.inv(a_a) - np.linalg.inv(a_b)) @ sqrt_m
    ref = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (d + d.T)))))
    assert gap == pytest.approx(ref, rel=1e-6)


def test_gap_norm_symmetric_in_arguments():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    grid = build_grid(I66, 24, 4)
    pa = assemble_flat(dip, 0.2, DN, grid, shift_k=3.0)
    pb = assemble_flat(dip, 0.2, DN, grid, shift_k=4.0)
    g1 = operator_gap_norm(pa, pb, pa.M, tol=1e-9)
    g2 = operator_gap_norm(pb, pa, pa.M, tol=1e-9)
    assert g1 == pytest.approx(g2, rel=1e-6)


def test_gap_norm_requires_positive_definite_inputs():
    from stripspec import GeneralizedPencil
    from stripspec.eigensolve import shifted_bands

    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    grid = build_grid(I66, 24, 4)
    positive = assemble_flat(dip, 0.2, DN, grid, shift_k=3.0)
    lam1 = smallest_eigenpairs(positive, 1, tol=1e-8).eigenvalues[0]
    indefinite = GeneralizedPencil(
        n=positive.n, half_bandwidth=positive.half_bandwidth,
        A=shifted_bands(positive, 2.0 * lam1), M=positive.M,
        meta=positive.meta)
    with pytest.raises(ValueError):
        operator_gap_norm(indefinite, positive, positive.M)


def test_inverse_norm_scales_with_thinness():
    # the shifted flattened operator has || inverse || = O(eps): its bottom
    # eigenvalue grows like (k - 1)/eps for this profile
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    k = 3.0
    scaled = []
    for eps in (0.2, 0.1, 0.05):
        pencil = assemble_flat(dip, eps, DN, build_grid(I66, 96, 10), shift_k=k)
        lam1 = smallest_eigenpairs(pencil, 1, tol=1e-8).eigenvalues[0]
        assert lam1 > 0
        scaled.append(eps * lam1)
    assert min(scaled) > 0.5 * (k - 1.0)
    assert max(scaled) / min(scaled) < 1.5
