"""Shared fixtures: JIT warmup and a couple of reusable model problems."""

import numpy as np
import pytest

from stripspec import Interval, StripProblem, build_grid, make_profile
from stripspec._banded import warmup


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    # compile the banded kernels once so individual tests time only numerics
    warmup()


@pytest.fixture(scope="session")
def dip_profile():
    return make_profile("gaussian_dip", (1.0, 0.0, 1.0),
                        Interval(-6.0, 6.0, truncated=True))


@pytest.fixture(scope="session")
def straight_problem():
    profile = make_profile("zero", (), Interval(0.0, 1.0))
    return StripProblem(profile, eps=0.1)


@pytest.fixture(scope="session")
def coarse_grid():
    return build_grid(Interval(0.0, 1.0), 64, 8)


def dense_pair(pencil):
    """Expand a banded pencil to dense symmetric matrices for oracle checks."""
    from stripspec._banded import to_dense

    return to_dense(pencil.A), to_dense(pencil.M)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20170401)
