"""Curvature profiles, admissibility checks, and strip embedding.

A planar strip of half-width scale ``eps`` is described entirely by the
curvature ``kappa(s)`` of its base curve on an interval ``(a, b)``.  The
spectrum never sees the embedded curve itself, only ``kappa``; the
embedding is reconstructed here for visualization and cross-checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

# Admissibility uses the sufficient condition eps*sup|kappa| < 1 tightened
# by this factor; beyond it the coordinate map may fold.
SAFETY = 0.5

_N_SAMPLES = 2001

PRESETS = ("zero", "constant", "gaussian_dip", "negcos")


@dataclass(frozen=True)
class Interval:
    """Open interval (a, b); ``truncated`` marks a finite stand-in for an
    unbounded domain (Dirichlet conditions are imposed at the cut ends)."""

    a: float
    b: float
    truncated: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got ({self.a}, {self.b})")

    @property
    def length(self) -> float:
        return self.b - self.a

    def doubled(self) -> "Interval":
        """Same center, twice the length.  Used by truncation stability checks."""
        c = 0.5 * (self.a + self.b)
        h = self.length
        return Interval(c - h, c + h, truncated=self.truncated)


@dataclass(frozen=True)
class CurvatureProfile:
    """Curvature of the base curve with analytic or finite-difference slope.

    ``kappa`` and ``kappa_prime`` accept numpy arrays.  ``inf_kappa`` and
    ``sup_abs_kappa`` are exact for presets and sampled otherwise.
    ``fd_fallback`` records that ``kappa_prime`` was synthesized by a
    centered difference rather than supplied analytically.
    """

    interval: Interval
    kappa: Callable[[np.ndarray], np.ndarray]
    kappa_prime: Callable[[np.ndarray], np.ndarray]
    inf_kappa: float
    sup_abs_kappa: float
    name: str = "custom"
    params: tuple = ()
    fd_fallback: bool = False

    def with_interval(self, interval: Interval) -> "CurvatureProfile":
        """Re-hang the same curvature law on another interval.

        Preset bounds are recomputed exactly; custom profiles are resampled.
        """
        if self.name in PRESETS:
            return make_profile(self.name, list(self.params), interval)
        return custom_profile(self.kappa, interval, kappa_prime=self.kappa_prime)

    def serializable(self) -> bool:
        return self.name in PRESETS

    def to_record(self) -> dict:
        if not self.serializable():
            raise ValueError("only preset profiles serialize; custom callables do not")
        return {
            "name": self.name,
            "params": list(self.params),
            "interval": {"a": self.interval.a, "b": self.interval.b,
                         "truncated": self.interval.truncated},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    def __reduce__(self):
        # preset profiles cross process boundaries via their record
        if self.serializable():
            return (_profile_from_record_tuple,
                    (self.name, tuple(self.params), self.interval.a,
                     self.interval.b, self.interval.truncated))
        raise TypeError("custom profiles cannot be pickled")


def _profile_from_record_tuple(name, params, a, b, truncated):
    return make_profile(name, list(params), Interval(a, b, truncated=truncated))


def from_record(record: dict) -> CurvatureProfile:
    iv = record["interval"]
    return make_profile(record["name"], list(record["params"]),
                        Interval(iv["a"], iv["b"], truncated=iv.get("truncated", False)))


def from_json(text: str) -> CurvatureProfile:
    return from_record(json.loads(text))


def _sampled_bounds(kappa, interval):
    s = np.linspace(interval.a, interval.b, _N_SAMPLES)
    k = np.asarray(kappa(s), dtype=float)
    return float(k.min()), float(np.abs(k).max())


def custom_profile(kappa, interval: Interval, kappa_prime=None,
                   name: str = "custom") -> CurvatureProfile:
    """Wrap a user-supplied curvature callable.

    When no analytic derivative is given, a centered finite difference
    with step 1e-6*(b-a) substitutes for it and the profile is flagged.
    """
    fd = kappa_prime is None
    if fd:
        h = 1e-6 * interval.length

        def kappa_prime(s, _k=kappa, _h=h):
            s = np.asarray(s, dtype=float)
            return (_k(s + _h) - _k(s - _h)) / (2.0 * _h)

    lo, sup = _sampled_bounds(kappa, interval)
    return CurvatureProfile(interval, kappa, kappa_prime, lo, sup,
                            name=name, fd_fallback=fd)


def make_profile(preset: str, params: Sequence[float],
                 interval: Interval) -> CurvatureProfile:
    """Construct a named curvature preset on the given interval.

    Presets:
      zero                  kappa = 0
      constant (c,)         kappa = c
      gaussian_dip (a,s0,w) kappa = -a*exp(-((s-s0)/w)^2)
      negcos ()             kappa = -cos(s)
    """
    params = tuple(float(p) for p in params)
    if any(not math.isfinite(p) for p in params):
        raise ValueError("profile parameters must be finite")

    if preset == "zero":
        if params:
            raise ValueError("zero takes no parameters")
        k = lambda s: np.zeros_like(np.asarray(s, dtype=float))
        kp = k
        lo, sup = 0.0, 0.0
    elif preset == "constant":
        if len(params) != 1:
            raise ValueError("constant takes one parameter (c)")
        c = params[0]
        k = lambda s: np.full_like(np.asarray(s, dtype=float), c)
        kp = lambda s: np.zeros_like(np.asarray(s, dtype=float))
        lo, sup = c, abs(c)
    elif preset == "gaussian_dip":
        if len(params) != 3:
            raise ValueError("gaussian_dip takes (depth, center, width)")
        amp, s0, w = params
        if w <= 0:
            raise ValueError("gaussian_dip width must be positive")

        def k(s, amp=amp, s0=s0, w=w):
            s = np.asarray(s, dtype=float)
            return -amp * np.exp(-((s - s0) / w) ** 2)

        def kp(s, amp=amp, s0=s0, w=w):
            s = np.asarray(s, dtype=float)
            return 2.0 * amp * (s - s0) / w ** 2 * np.exp(-((s - s0) / w) ** 2)

        # extremum at s0 if inside, endpoints otherwise; exact for the preset
        cand = [interval.a, interval.b] + ([s0] if interval.a <= s0 <= interval.b else [])
        vals = [float(k(np.array(c))) for c in cand]
        lo, sup = min(vals), max(abs(v) for v in vals)
    elif preset == "negcos":
        if params:
            raise ValueError("negcos takes no parameters")
        k = lambda s: -np.cos(np.asarray(s, dtype=float))
        kp = lambda s: np.sin(np.asarray(s, dtype=float))
        lo, sup = _exact_negcos_bounds(interval)
    else:
        raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")

    return CurvatureProfile(interval, k, kp, lo, sup, name=preset, params=params)


def _exact_negcos_bounds(interval):
    # extrema of -cos at multiples of pi plus the endpoints
    cand = [interval.a, interval.b]
    n0 = math.ceil(interval.a / math.pi)
    n1 = math.floor(interval.b / math.pi)
    cand += [n * math.pi for n in range(n0, n1 + 1)]
    vals = [-math.cos(c) for c in cand]
    return min(vals), max(abs(v) for v in vals)


def parse_profile(text: str, interval: Interval) -> CurvatureProfile:
    """Parse 'name' or 'name:p1,p2,...' into a preset profile."""
    name, _, rest = text.partition(":")
    params = [float(p) for p in rest.split(",")] if rest else []
    return make_profile(name.strip(), params, interval)


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of the geometric admissibility check for one (profile, eps)."""

    eps: float
    eps_sup_kappa: float
    admissible: bool
    h_lower: float   # min over the strip of the Jacobian 1 - kappa*eps*t
    h_upper: float   # max over the strip of the same
    messages: tuple = ()


def validate(profile: CurvatureProfile, eps: float) -> ValidityReport:
    """Check eps*sup|kappa| against the safety threshold.

    The Jacobian of the strip map stays inside [h_lower, h_upper]; the map
    is locally injective whenever eps*sup|kappa| < 1, and we demand the
    tighter bound SAFETY to keep the discrete problem well conditioned.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    esk = eps * profile.sup_abs_kappa
    msgs = []
    admissible = esk <= SAFETY
    if not admissible:
        msgs.append(f"eps*sup|kappa| = {esk:.4g} exceeds safety bound {SAFETY}")
    # signed sup of kappa, sampled; fixes the lower Jacobian bracket
    s = np.linspace(profile.interval.a, profile.interval.b, _N_SAMPLES)
    sup_signed = float(np.max(profile.kappa(s)))
    return ValidityReport(
        eps=eps,
        eps_sup_kappa=esk,
        admissible=admissible,
        h_lower=min(1.0, 1.0 - eps * sup_signed),
        h_upper=max(1.0, 1.0 - eps * profile.inf_kappa),
        messages=tuple(msgs),
    )


def require_admissible(profile: CurvatureProfile, eps: float) -> ValidityReport:
    report = validate(profile, eps)
    if not report.admissible:
        raise ValueError("; ".join(report.messages))
    return report


@dataclass(frozen=True)
class EmbeddedStrip:
    """Polylines of the base curve, its parallel curve, and the end segments."""

    s: np.ndarray
    base: np.ndarray      # shape (n, 2)
    parallel: np.ndarray  # shape (n, 2), offset by eps along the normal
    end_a: np.ndarray     # shape (2, 2)
    end_b: np.ndarray     # shape (2, 2)
    eps: float


def embed(profile: CurvatureProfile, eps: float, n_points: int = 512) -> EmbeddedStrip:
    """Reconstruct the embedded strip from its curvature.

    Integrates the Frenet system (unit tangent rotating at rate kappa)
    with classical fourth-order Runge-Kutta from the origin with a
    horizontal initial tangent, then offsets along the left normal
    (-sin phi, cos phi) by eps.
    """
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    require_admissible(profile, eps)
    a, b = profile.interval.a, profile.interval.b
    # integrate on a fine grid whose nodes contain the output samples
    per = max(1, math.ceil(max(1024, n_points) / (n_points - 1)))
    n_steps = per * (n_points - 1)
    h = (b - a) / n_steps

    kap = profile.kappa
    phi = 0.0
    x = 0.0
    y = 0.0
    out = np.empty((n_points, 3))
    out[0] = (x, y, phi)
    keep = 1
    for i in range(n_steps):
        s0 = a + i * h
        k1 = _frenet_rhs(s0, phi, kap)
        k2 = _frenet_rhs(s0 + 0.5 * h, phi + 0.5 * h * k1[2], kap)
        k3 = _frenet_rhs(s0 + 0.5 * h, phi + 0.5 * h * k2[2], kap)
        k4 = _frenet_rhs(s0 + h, phi + h * k3[2], kap)
        x += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        phi += h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if (i + 1) % per == 0:
            out[keep] = (x, y, phi)
            keep += 1

    s = np.linspace(a, b, n_points)
    base = out[:, :2].copy()
    phis = out[:, 2]
    normal = np.column_stack([-np.sin(phis), np.cos(phis)])
    parallel = base + eps * normal
    end_a = np.vstack([base[0], parallel[0]])
    end_b = np.vstack([base[-1], parallel[-1]])
    return EmbeddedStrip(s=s, base=base, parallel=parallel,
                         end_a=end_a, end_b=end_b, eps=eps)


def _frenet_rhs(s, phi, kap):
    k = float(kap(np.array(s)))
    return (math.cos(phi), math.sin(phi), k)


def min_nonadjacent_separation(strip: EmbeddedStrip, skip: int = 4) -> float:
    """Sampled self-intersection screen for the embedded strip.

    Returns the smallest distance between non-neighbouring sample points
    of the parallel curve (the one that folds first).  A positive value
    comparable to the sample spacing suggests, but does not prove, global
    injectivity of the strip map.
    """
    pts = strip.parallel
    n = len(pts)
    best = math.inf
    for i in range(n):
        j0 = i + skip + 1
        if j0 >= n:
            break
        d = np.min(np.hypot(*(pts[j0:] - pts[i]).T))
        best = min(best, float(d))
    return best


def write_embedding_csv(strip: EmbeddedStrip, path, header_lines: Sequence[str] = ()):
    """Write s,x_base,y_base,x_parallel,y_parallel rows."""
    with open(path, "w") as f:
        for line in header_lines:
            f.write(f"# {line}\n")
        f.write("s,x_base,y_base,x_parallel,y_parallel\n")
        for i in range(len(strip.s)):
            f.write(f"{strip.s[i]!r},{strip.base[i,0]!r},{strip.base[i,1]!r},"
                    f"{strip.parallel[i,0]!r},{strip.parallel[i,1]!r}\n")


@dataclass(frozen=True)
class StripProblem:
    """One spectral experiment: a profile, a width scale, and boundary data.

    ``outer`` selects the condition on the parallel boundary curve:
    'neumann' (the base configuration), 'dirichlet', or 'robin' with a
    bounded coefficient ``alpha(s)``.  The base curve and the two strip
    ends always carry Dirichlet conditions.
    """

    profile: CurvatureProfile
    eps: float
    outer: str = "neumann"
    alpha: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.outer not in ("neumann", "dirichlet", "robin"):
            raise ValueError(f"unknown outer condition {self.outer!r}")
        if self.outer == "robin" and self.alpha is None:
            raise ValueError("robin condition requires alpha")
        require_admissible(self.profile, self.eps)

    @property
    def threshold(self) -> float:
        """Bottom of the transverse spectrum for the straight reference strip."""
        if self.outer == "dirichlet":
            return (math.pi / self.eps) ** 2
        return (math.pi / (2.0 * self.eps)) ** 2

    def doubled(self) -> "StripProblem":
        return StripProblem(self.profile.with_interval(self.profile.interval.doubled()),
                            self.eps, outer=self.outer, alpha=self.alpha)
