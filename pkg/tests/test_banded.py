"""Lower-banded LDLT kernels checked against dense linear algebra."""

import numpy as np
import pytest

from stripspec import BandedFactorization, GeneralizedPencil, ShiftBreakdownError
from stripspec import count_below, ldlt_banded
from stripspec.eigensolve import shifted_bands
from stripspec._banded import from_dense, sym_matvec, to_dense


def random_banded_symmetric(n, hb, seed, spd_shift=0.0):
    rng = np.random.default_rng(seed)
    dense = np.zeros((n, n))
    for k in range(hb + 1):
        vals = rng.standard_normal(n - k)
        dense += np.diag(vals, -k)
        if k:
            dense += np.diag(vals, k)
    if spd_shift:
        dense += spd_shift * np.eye(n)
    return dense


def banded_pencil(a_dense, m_dense, hb):
    n = a_dense.shape[0]
    return GeneralizedPencil(n=n, half_bandwidth=hb,
                             A=from_dense(a_dense, hb),
                             M=from_dense(m_dense, hb),
                             meta={"form": "test"})


def test_dense_roundtrip():
    dense = random_banded_symmetric(17, 3, seed=0)
    assert np.array_equal(to_dense(from_dense(dense, 3)), dense)


def test_sym_matvec_matches_dense(rng):
    dense = random_banded_symmetric(40, 5, seed=1)
    ab = from_dense(dense, 5)
    x = rng.standard_normal(40)
    np.testing.assert_allclose(sym_matvec(ab, x), dense @ x, rtol=1e-13)


def test_solve_manufactured_solution(rng):
    # A x = b with known x; banded solve must reproduce it to 1e-10
    n, hb = 120, 4
    a_dense = random_banded_symmetric(n, hb, seed=2, spd_shift=12.0)
    m_dense = np.eye(n)
    fact = ldlt_banded(banded_pencil(a_dense, m_dense, hb), sigma=0.0)
    x_true = rng.standard_normal(n)
    x = fact.solve(a_dense @ x_true)
    assert np.linalg.norm(x - x_true) / np.linalg.norm(x_true) < 1e-10


def test_apply_is_shifted_matvec(rng):
    n, hb = 30, 2
    a_dense = random_banded_symmetric(n, hb, seed=3, spd_shift=8.0)
    m_dense = random_banded_symmetric(n, hb, seed=4, spd_shift=6.0)
    pencil = banded_pencil(a_dense, m_dense, hb)
    sigma = 0.7
    fact = ldlt_banded(pencil, sigma=sigma)
    x = rng.standard_normal(n)
    np.testing.assert_allclose(fact.apply(x), (a_dense - sigma * m_dense) @ x,
                               rtol=1e-12, atol=1e-12)


def test_inertia_counts_eigenvalues_below_shift():
    n, hb = 60, 3
    a_dense = random_banded_symmetric(n, hb, seed=5)
    m_dense = np.eye(n)
    pencil = banded_pencil(a_dense, m_dense, hb)
    eigs = np.linalg.eigvalsh(a_dense)
    for sigma in (-4.0, -1.0, 0.0, 1.5, 4.0):
        fact = ldlt_banded(pencil, sigma=sigma)
        assert fact.inertia == int(np.sum(eigs < sigma))
        assert count_below(pencil, sigma) == int(np.sum(eigs < sigma))


def test_reconstruction_residual_small():
    n, hb = 80, 4
    a_dense = random_banded_symmetric(n, hb, seed=6, spd_shift=10.0)
    pencil = banded_pencil(a_dense, np.eye(n), hb)
    fact = ldlt_banded(pencil, sigma=-2.0)
    assert isinstance(fact, BandedFactorization)
    assert fact.reconstruction_residual() < 1e-12


def test_breakdown_at_exact_eigenvalue():
    # shifting by an eigenvalue makes a pivot vanish; must be reported
    a = np.diag([1.0, 2.0, 3.0])
    pencil = banded_pencil(a, np.eye(3), hb=0)
    with pytest.raises(ShiftBreakdownError) as info:
        ldlt_banded(pencil, sigma=2.0)
    assert info.value.sigma == 2.0
    assert 0 <= info.value.pivot_index < 3


def test_shifted_bands_subtracts_mass():
    n, hb = 12, 2
    a_dense = random_banded_symmetric(n, hb, seed=7)
    m_dense = random_banded_symmetric(n, hb, seed=8, spd_shift=5.0)
    pencil = banded_pencil(a_dense, m_dense, hb)
    shifted = shifted_bands(pencil, 1.25)
    np.testing.assert_allclose(to_dense(shifted), a_dense - 1.25 * m_dense,
                               rtol=1e-14, atol=1e-14)


def test_count_below_handles_near_eigenvalue_cutoff():
    # cutoff collides with an eigenvalue; jittered retry must still count
    a = np.diag(np.arange(1.0, 9.0))
    pencil = banded_pencil(a, np.eye(8), hb=0)
    assert count_below(pencil, 4.0) in (3, 4)
