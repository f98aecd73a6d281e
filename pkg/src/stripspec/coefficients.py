"""Closed-form coefficient fields of the curvilinear strip problem.

Everything here is a pointwise formula in the curvature ``kappa(s)``, its
derivative, the width scale ``eps``, and the transverse coordinate
``t in [0, 1]``: the coordinate Jacobian ``h``, the ground transverse mode
``chi1``, the potentials that appear after flattening the metric, the
boundary weight on the outer edge, the overlap integral ``a(s)``, and the
effective one-dimensional potentials for each outer boundary condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import CurvatureProfile, require_admissible

SQRT2 = math.sqrt(2.0)
HALF_PI = 0.5 * math.pi

# 32-point Gauss-Legendre rule on [0,1]; the overlap integrand is smooth,
# so this is deliberately far more accurate than anything downstream needs.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def transverse_mode(t):
    """Normalized ground mode of the transverse interval: sqrt(2) sin(pi t/2).

    Vanishes at t=0, has vanishing slope at t=1, and has unit L2 norm
    on (0, 1).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("t must lie in [0, 1]")
    return SQRT2 * np.sin(HALF_PI * t)


def transverse_mode_prime(t):
    t = np.asarray(t, dtype=float)
    return SQRT2 * HALF_PI * np.cos(HALF_PI * t)


def jacobian_h(profile: CurvatureProfile, eps: float, s, t):
    """Jacobian of the strip map, h = 1 - kappa(s) * eps * t.

    Broadcasts over array-valued ``s`` and ``t``.  Positive for all
    admissible (profile, eps).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("t must lie in [0, 1]")
    require_admissible(profile, eps)
    return 1.0 - np.asarray(profile.kappa(s), dtype=float) * eps * t


@dataclass(frozen=True)
class CoefficientPoint:
    """All flattened-form coefficients evaluated at one or more (s, t)."""

    h: np.ndarray
    v1: np.ndarray          # 0.25 * kappa'^2 eps^2 t^2 / h^4
    v2: np.ndarray          # kappa' eps t / h^3 (cross-term weight)
    v3: np.ndarray          # 0.25 * kappa^2 / h^2
    v4: np.ndarray          # kappa / (eps h)
    v_boundary: np.ndarray  # 0.5 * kappa / (eps (1 - eps kappa)), at t=1


def _potential_fields(kappa_s, kprime_s, eps, t):
    """Core formulas shared by the public evaluator and the assembler."""
    h = 1.0 - kappa_s * eps * t
    v1 = 0.25 * (kprime_s * eps * t) ** 2 / h ** 4
    v2 = kprime_s * eps * t / h ** 3
    v3 = 0.25 * kappa_s ** 2 / h ** 2
    v4 = kappa_s / (eps * h)
    v_boundary = 0.5 * kappa_s / (eps * (1.0 - eps * kappa_s))
    return h, v1, v2, v3, v4, v_boundary


def potentials(profile: CurvatureProfile, eps: float, s, t) -> CoefficientPoint:
    """Evaluate the flattening potentials and boundary weight at (s, t)."""
    require_admissible(profile, eps)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("t must lie in [0, 1]")
    ks = np.asarray(profile.kappa(s), dtype=float)
    kps = np.asarray(profile.kappa_prime(s), dtype=float)
    h, v1, v2, v3, v4, vb = _potential_fields(ks, kps, eps, t)
    return CoefficientPoint(h=h, v1=v1, v2=v2, v3=v3, v4=v4, v_boundary=vb)


@dataclass(frozen=True)
class EffectivePotential:
    """A one-dimensional comparison potential on the profile's interval."""

    variant: str  # 'dn' | 'dirichlet' | 'robin'
    value: Callable[[np.ndarray], np.ndarray]


def effective_potential(profile: CurvatureProfile, eps: float, variant: str,
                        alpha: Optional[Callable] = None) -> EffectivePotential:
    """Effective potential of the 1D comparison operator for each outer condition.

    dn:        kappa(s)/eps
    dirichlet: -kappa(s)^2/4      (eps-independent)
    robin:     (kappa(s) + 2 alpha(s))/eps
    """
    variant = variant.lower()
    if variant == "dn":
        def value(s, k=profile.kappa, e=eps):
            return np.asarray(k(s), dtype=float) / e
    elif variant == "dirichlet":
        def value(s, k=profile.kappa):
            return -0.25 * np.asarray(k(s), dtype=float) ** 2
    elif variant == "robin":
        if alpha is None:
            raise ValueError("robin variant requires alpha")

        def value(s, k=profile.kappa, a=alpha, e=eps):
            return (np.asarray(k(s), dtype=float)
                    + 2.0 * np.asarray(a(s), dtype=float)) / e
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return EffectivePotential(variant=variant, value=value)


def overlap_a(profile: CurvatureProfile, eps: float, s):
    """Transverse overlap integral a(s) = int_0^1 chi1(t)^2 / h(s,t) dt.

    Computed with the fixed 32-point Gauss-Legendre rule.  For kappa = 0
    this returns exactly 1 up to quadrature roundoff; in general it lies
    between 1/(1 - eps*inf kappa) and 1/(1 - eps*sup kappa).
    """
    require_admissible(profile, eps)
    ks = np.atleast_1d(np.asarray(profile.kappa(s), dtype=float))
    chi2 = transverse_mode(_GL_X) ** 2
    # integrand shape (n_s, 32)
    h = 1.0 - ks[:, None] * eps * _GL_X[None, :]
    vals = (chi2[None, :] / h) @ _GL_W
    return vals if np.ndim(s) else float(vals[0])


def coefficient_csv_rows(profile: CurvatureProfile, eps: float, s_values, t_values):
    """Yield debugging rows (s, t, h, v1..v4, v_boundary) over a grid."""
    for s in np.atleast_1d(s_values):
        pt = potentials(profile, eps, np.full_like(np.atleast_1d(t_values), s,
                                                   dtype=float),
                        np.atleast_1d(t_values))
        for i, t in enumerate(np.atleast_1d(t_values)):
            yield (float(s), float(t), float(pt.h[i]), float(pt.v1[i]),
                   float(pt.v2[i]), float(pt.v3[i]), float(pt.v4[i]),
                   float(pt.v_boundary[i]))
