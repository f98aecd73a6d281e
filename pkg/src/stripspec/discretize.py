"""Tensor grids and Galerkin assembly of every quadratic form in the model.

Bilinear elements on uniform tensor grids of I x (0,1), 2x2 Gauss
quadrature per cell, 2-point Gauss on the outer edge.  Degrees of freedom
are ordered transverse-fastest so every pencil is banded with half
bandwidth at most Nt+1; matrices are built directly in the lower banded
storage of :mod:`stripspec._banded`.

Assembled forms:

* weighted   the strip form with metric weight h in both the energy and
             the mass integrals (Neumann, Robin, or Dirichlet outer edge)
* flat       the unitarily equivalent form on the unweighted space, with
             bulk potentials, a symmetrized first-order term and an outer
             edge weight (Dirichlet-Neumann only)
* reference  the decoupled comparison form used for resolvent gaps
* 1d         Schrodinger pencils −d²/ds² + V with Dirichlet ends
* transverse the weighted fiber pencil on (0,1) whose bottom eigenvalue
             is nu(c)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .coefficients import _potential_fields
from .geometry import CurvatureProfile, Interval, StripProblem, require_admissible

_G2 = (0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0))


@dataclass(frozen=True)
class TensorGrid:
    """Uniform tensor grid with Ns cells along the curve and Nt across."""

    interval: Interval
    Ns: int
    Nt: int

    def __post_init__(self):
        if self.Ns < 2 or self.Nt < 2:
            raise ValueError("need at least 2 cells in each direction")

    @property
    def hs(self) -> float:
        return self.interval.length / self.Ns

    @property
    def ht(self) -> float:
        return 1.0 / self.Nt

    @property
    def s_nodes(self) -> np.ndarray:
        return np.linspace(self.interval.a, self.interval.b, self.Ns + 1)

    @property
    def t_nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.Nt + 1)

    @property
    def retained(self) -> int:
        """Dof count after eliminating the Dirichlet boundary (outer edge kept)."""
        return (self.Ns - 1) * self.Nt

    @property
    def half_bandwidth(self) -> int:
        return self.Nt + 1

    @property
    def tag(self) -> str:
        return f"{self.Ns}x{self.Nt}"

    def refined(self) -> "TensorGrid":
        return TensorGrid(self.interval, 2 * self.Ns, 2 * self.Nt)


def build_grid(interval: Interval, Ns: int, Nt: int) -> TensorGrid:
    return TensorGrid(interval, Ns, Nt)


@dataclass(frozen=True)
class BoundaryConditionSet:
    """Outer-edge condition; the base curve and both ends are always Dirichlet."""

    outer: str = "neumann"  # 'neumann' | 'robin' | 'dirichlet'
    alpha: Optional[Callable] = None

    def __post_init__(self):
        if self.outer not in ("neumann", "robin", "dirichlet"):
            raise ValueError(f"unknown outer condition {self.outer!r}")
        if self.outer == "robin" and self.alpha is None:
            raise ValueError("robin condition requires alpha")


def bc_of(problem: StripProblem) -> BoundaryConditionSet:
    return BoundaryConditionSet(outer=problem.outer, alpha=problem.alpha)


@dataclass(frozen=True)
class GeneralizedPencil:
    """Symmetric banded stiffness A and positive definite mass M."""

    n: int
    half_bandwidth: int
    A: np.ndarray  # lower banded, shape (half_bandwidth+1, n)
    M: np.ndarray
    meta: dict = field(default_factory=dict)


def _dof_table(Ns: int, Nt: int, keep_outer: bool) -> np.ndarray:
    """Node (i, j) -> dof index, -1 for eliminated Dirichlet nodes."""
    nt_keep = Nt if keep_outer else Nt - 1
    table = -np.ones((Ns + 1, Nt + 1), dtype=np.int64)
    i = np.arange(1, Ns)[:, None]
    j = np.arange(1, nt_keep + 1)[None, :]
    table[1:Ns, 1:nt_keep + 1] = (i - 1) * nt_keep + (j - 1)
    return table


def _assemble_cells(grid: TensorGrid, keep_outer: bool, coeffs) -> tuple:
    """Assemble banded (A, M) from per-Gauss-point coefficient fields.

    ``coeffs(s_row, t_row)`` returns a dict with keys among
    {'c_ss', 'c_tt', 'c_00', 'c_v2', 'c_mass'}; each value is an array
    broadcastable to (Ns, Nt) or a scalar, or None to skip the term.
    """
    Ns, Nt = grid.Ns, grid.Nt
    hs, ht = grid.hs, grid.ht
    sa = grid.interval.a
    nt_keep = Nt if keep_outer else Nt - 1
    n = (Ns - 1) * nt_keep
    p = nt_keep + 1

    locA = np.zeros((Ns, Nt, 4, 4))
    locM = np.zeros((Ns, Nt, 4, 4))
    ci = np.arange(Ns)
    cj = np.arange(Nt)
    w = 0.25 * hs * ht

    for gx in _G2:
        s_row = sa + (ci + gx) * hs
        for gy in _G2:
            t_row = (cj + gy) * ht
            # corner order (s, t): 00, 10, 01, 11
            N = np.array([(1 - gx) * (1 - gy), gx * (1 - gy),
                          (1 - gx) * gy, gx * gy])
            dNs = np.array([-(1 - gy), (1 - gy), -gy, gy]) / hs
            dNt = np.array([-(1 - gx), -gx, (1 - gx), gx]) / ht
            c = coeffs(s_row, t_row)

            def acc(target, fld, mat):
                if fld is None:
                    return
                fld = np.asarray(fld, dtype=float)
                if fld.ndim == 0:
                    if fld == 0.0:
                        return
                    fld = np.broadcast_to(fld, (Ns, Nt))
                target += (w * fld)[:, :, None, None] * mat[None, None, :, :]

            acc(locA, c.get("c_ss"), np.outer(dNs, dNs))
            acc(locA, c.get("c_tt"), np.outer(dNt, dNt))
            acc(locA, c.get("c_00"), np.outer(N, N))
            acc(locA, c.get("c_v2"),
                0.5 * (np.outer(N, dNs) + np.outer(dNs, N)))
            acc(locM, c.get("c_mass"), np.outer(N, N))

    table = _dof_table(Ns, Nt, keep_outer)
    corners = (table[:-1, :-1], table[1:, :-1], table[:-1, 1:], table[1:, 1:])
    A = np.zeros((p + 1, n))
    M = np.zeros((p + 1, n))
    for a in range(4):
        for b in range(4):
            rows, cols = corners[a], corners[b]
            mask = (rows >= 0) & (cols >= 0) & (rows >= cols)
            off = rows[mask] - cols[mask]
            np.add.at(A, (off, cols[mask]), locA[:, :, a, b][mask])
            np.add.at(M, (off, cols[mask]), locM[:, :, a, b][mask])
    return A, M, n, p, nt_keep, table


def _assemble_outer_edge(A, grid, nt_keep, table, weight_fn):
    """Add int weight(s) u(s,1) v(s,1) ds along the kept outer edge."""
    Ns, hs = grid.Ns, grid.hs
    sa = grid.interval.a
    ci = np.arange(Ns)
    loc = np.zeros((Ns, 2, 2))
    for gx in _G2:
        s_row = sa + (ci + gx) * hs
        vals = np.asarray(weight_fn(s_row), dtype=float)
        Ne = np.array([1 - gx, gx])
        loc += (0.5 * hs * vals)[:, None, None] * np.outer(Ne, Ne)[None, :, :]
    edge = table[:, -1]  # node (i, Nt)
    for a in range(2):
        for b in range(2):
            rows = edge[ci + a]
            cols = edge[ci + b]
            mask = (rows >= 0) & (cols >= 0) & (rows >= cols)
            np.add.at(A, (rows[mask] - cols[mask], cols[mask]),
                      loc[:, a, b][mask])


def assemble_weighted(profile: CurvatureProfile, eps: float,
                      bc: BoundaryConditionSet, grid: TensorGrid) -> GeneralizedPencil:
    """Galerkin pencil of the metric-weighted strip form.

    A discretizes int(|d_s u|^2 / h + h |d_t u|^2 / eps^2) plus, for a
    Robin outer edge, eps^{-1} int alpha(s) h(s,1) |u(s,1)|^2 ds; M
    discretizes int h |u|^2.  A Neumann outer edge is natural (no term);
    a Dirichlet outer edge is eliminated.
    """
    require_admissible(profile, eps)
    kap = profile.kappa
    inv_eps2 = 1.0 / eps ** 2

    def coeffs(s_row, t_row):
        h = 1.0 - np.asarray(kap(s_row), dtype=float)[:, None] * eps * t_row[None, :]
        return {"c_ss": 1.0 / h, "c_tt": h * inv_eps2, "c_mass": h}

    keep_outer = bc.outer != "dirichlet"
    A, M, n, p, nt_keep, table = _assemble_cells(grid, keep_outer, coeffs)

    if bc.outer == "robin":
        def edge_weight(s_row):
            al = np.asarray(bc.alpha(s_row), dtype=float)
            h1 = 1.0 - np.asarray(kap(s_row), dtype=float) * eps
            return al * h1 / eps

        # an identically zero alpha contributes nothing; skipping it keeps
        # the pencil bit-identical to the Neumann path
        probe_pts = np.concatenate(
            [grid.s_nodes] + [grid.s_nodes[:-1] + g * grid.hs for g in _G2])
        if np.any(np.asarray(bc.alpha(probe_pts), dtype=float) != 0.0):
            _assemble_outer_edge(A, grid, nt_keep, table, edge_weight)

    meta = {"form": "weighted", "eps": eps, "outer": bc.outer, "grid": grid.tag}
    return GeneralizedPencil(n=n, half_bandwidth=p, A=A, M=M, meta=meta)


def assemble_flat(profile: CurvatureProfile, eps: float,
                  bc: BoundaryConditionSet, grid: TensorGrid,
                  shift_k: Optional[float] = None) -> GeneralizedPencil:
    """Galerkin pencil of the flattened form on the unweighted space.

    A discretizes int(|d_s u|^2 / h^2 + |d_t u|^2 / eps^2 + (V1 - V3)|u|^2
    + V2 Re(u d_s u)) plus the outer edge weight v_b; M is the plain mass.
    The first-order term is assembled as the symmetric part of its
    one-sided Galerkin matrix, so A is symmetric by construction.

    With ``shift_k`` the bulk potential is shifted by k/eps minus the
    transverse threshold, which makes the pencil positive definite for
    admissible k and small eps.
    """
    require_admissible(profile, eps)
    if bc.outer != "neumann":
        raise ValueError("flat form is only defined for the Neumann outer edge")
    if profile.kappa_prime is None:
        raise ValueError("flat form requires kappa_prime")
    kap, kapp = profile.kappa, profile.kappa_prime
    inv_eps2 = 1.0 / eps ** 2
    shift = None
    if shift_k is not None:
        if shift_k <= -profile.inf_kappa:
            raise ValueError(
                f"shift k = {shift_k} must exceed -inf kappa = {-profile.inf_kappa}")
        shift = shift_k / eps - (math.pi / (2.0 * eps)) ** 2

    flat_zero = profile.sup_abs_kappa == 0.0

    def coeffs(s_row, t_row):
        ks = np.asarray(kap(s_row), dtype=float)[:, None]
        kps = np.asarray(kapp(s_row), dtype=float)[:, None]
        h, v1, v2, v3, _, _ = _potential_fields(ks, kps, eps, t_row[None, :])
        c00 = None if flat_zero else v1 - v3
        if shift is not None:
            c00 = shift if c00 is None else c00 + shift
        return {"c_ss": 1.0 / h ** 2, "c_tt": inv_eps2,
                "c_00": c00, "c_v2": None if flat_zero else v2, "c_mass": 1.0}

    A, M, n, p, nt_keep, table = _assemble_cells(grid, True, coeffs)

    if not flat_zero:
        def edge_weight(s_row):
            ks = np.asarray(kap(s_row), dtype=float)
            return 0.5 * ks / (eps * (1.0 - eps * ks))

        _assemble_outer_edge(A, grid, nt_keep, table, edge_weight)

    meta = {"form": "flat", "eps": eps, "outer": "neumann", "grid": grid.tag,
            "shift_k": shift_k}
    return GeneralizedPencil(n=n, half_bandwidth=p, A=A, M=M, meta=meta)


def assemble_reference(profile: CurvatureProfile, eps: float,
                       grid: TensorGrid, k: float) -> GeneralizedPencil:
    """Galerkin pencil of the decoupled comparison form.

    A discretizes int(|d_s u|^2 + eps^{-2}[|d_t u|^2 - (pi/2)^2 |u|^2]
    + eps^{-1}(k + kappa)|u|^2) with the plain mass M and the same
    Dirichlet elimination as the Neumann-outer strip.
    """
    require_admissible(profile, eps)
    if k <= -profile.inf_kappa:
        raise ValueError(f"k = {k} must exceed -inf kappa = {-profile.inf_kappa}")
    kap = profile.kappa
    inv_eps2 = 1.0 / eps ** 2
    base = -((0.5 * math.pi) ** 2) * inv_eps2

    def coeffs(s_row, t_row):
        ks = np.asarray(kap(s_row), dtype=float)[:, None]
        c00 = base + (k + ks) / eps + 0.0 * t_row[None, :]
        return {"c_ss": 1.0, "c_tt": inv_eps2, "c_00": c00, "c_mass": 1.0}

    A, M, n, p, _, _ = _assemble_cells(grid, True, coeffs)
    meta = {"form": "reference", "eps": eps, "k": k, "grid": grid.tag}
    return GeneralizedPencil(n=n, half_bandwidth=p, A=A, M=M, meta=meta)


def assemble_1d(potential: Callable, interval: Interval, Ns: int) -> GeneralizedPencil:
    """Pencil of -d^2/ds^2 + V on the interval with Dirichlet ends.

    Stiffness and mass use exact hat-function integrals; the potential
    term uses 2-point Gauss per cell.
    """
    if Ns < 2:
        raise ValueError("need at least 2 cells")
    h = interval.length / Ns
    n = Ns - 1
    nodes = np.linspace(interval.a, interval.b, Ns + 1)

    A = np.zeros((2, n))
    M = np.zeros((2, n))
    A[0, :] = 2.0 / h
    A[1, :n - 1] = -1.0 / h
    M[0, :] = 4.0 * h / 6.0
    M[1, :n - 1] = h / 6.0

    ci = np.arange(Ns)
    loc = np.zeros((Ns, 2, 2))
    for gx in _G2:
        s_row = nodes[:-1] + gx * h
        vals = np.asarray(potential(s_row), dtype=float)
        Ne = np.array([1 - gx, gx])
        loc += (0.5 * h * vals)[:, None, None] * np.outer(Ne, Ne)[None, :, :]
    dof = np.concatenate([[-1], np.arange(n), [-1]])
    for a in range(2):
        for b in range(2):
            rows, cols = dof[ci + a], dof[ci + b]
            mask = (rows >= 0) & (cols >= 0) & (rows >= cols)
            np.add.at(A, (rows[mask] - cols[mask], cols[mask]), loc[:, a, b][mask])

    meta = {"form": "1d", "interval": (interval.a, interval.b), "Ns": Ns}
    return GeneralizedPencil(n=n, half_bandwidth=1, A=A, M=M, meta=meta)


def assemble_transverse(c: float, Nt: int,
                        edge_weight: float = 0.0) -> GeneralizedPencil:
    """Fiber pencil on (0,1) with weight (1 - c t), Dirichlet at 0.

    A discretizes int (1-ct)|u'|^2 (+ edge_weight * |u(1)|^2), M
    discretizes int (1-ct)|u|^2; the condition at t=1 is natural.  The
    smallest eigenvalue approximates nu(c), which equals (pi/2)^2 at
    c = 0 and grows linearly in c for small c.
    """
    if c >= 1.0:
        raise ValueError("need c < 1 so the weight stays positive")
    if Nt < 2:
        raise ValueError("need at least 2 cells")
    h = 1.0 / Nt
    n = Nt
    A = np.zeros((2, n))
    M = np.zeros((2, n))
    ci = np.arange(Nt)
    locA = np.zeros((Nt, 2, 2))
    locM = np.zeros((Nt, 2, 2))
    for gx in _G2:
        t_row = (ci + gx) * h
        wgt = 0.5 * h * (1.0 - c * t_row)
        Ne = np.array([1 - gx, gx])
        dNe = np.array([-1.0, 1.0]) / h
        locA += wgt[:, None, None] * np.outer(dNe, dNe)[None, :, :]
        locM += wgt[:, None, None] * np.outer(Ne, Ne)[None, :, :]
    dof = np.concatenate([[-1], np.arange(n)])  # Dirichlet at t=0 only
    for a in range(2):
        for b in range(2):
            rows, cols = dof[ci + a], dof[ci + b]
            mask = (rows >= 0) & (cols >= 0) & (rows >= cols)
            np.add.at(A, (rows[mask] - cols[mask], cols[mask]), locA[:, a, b][mask])
            np.add.at(M, (rows[mask] - cols[mask], cols[mask]), locM[:, a, b][mask])
    if edge_weight != 0.0:
        A[0, -1] += edge_weight
    meta = {"form": "transverse", "c": c, "Nt": Nt, "edge_weight": edge_weight}
    return GeneralizedPencil(n=n, half_bandwidth=1, A=A, M=M, meta=meta)


def write_matrix_market(ab: np.ndarray, path, comment: str = "") -> None:
    """Write a lower banded symmetric matrix as matrix-market coordinate text."""
    p, n = ab.shape[0] - 1, ab.shape[1]
    entries = []
    for i in range(p + 1):
        for j in range(n - i):
            v = float(ab[i, j])
            if v != 0.0:
                entries.append((j + i + 1, j + 1, v))
    with open(path, "w") as f:
        f.write("%%MatrixMarket matrix coordinate real symmetric\n")
        if comment:
            f.write(f"% {comment}\n")
        f.write(f"{n} {n} {len(entries)}\n")
        for r, c, v in entries:
            f.write(f"{r} {c} {v!r}\n")


def read_matrix_market(path) -> np.ndarray:
    """Read a symmetric coordinate file back into a dense matrix (testing aid)."""
    with open(path) as f:
        header = f.readline()
        if "symmetric" not in header:
            raise ValueError("expected a symmetric coordinate file")
        line = f.readline()
        while line.startswith("%"):
            line = f.readline()
        nr, nc, nnz = (int(x) for x in line.split())
        out = np.zeros((nr, nc))
        for _ in range(nnz):
            r, c, v = f.readline().split()
            r, c, v = int(r) - 1, int(c) - 1, float(v)
            out[r, c] = v
            out[c, r] = v
    return out


def export_pencil(pencil: GeneralizedPencil, basepath: str) -> tuple:
    """Write A and M next to each other; returns the two paths."""
    pa = f"{basepath}.A.mtx"
    pm = f"{basepath}.M.mtx"
    tagged = ", ".join(f"{k}={v}" for k, v in sorted(pencil.meta.items(),
                                                     key=lambda kv: kv[0]))
    write_matrix_market(pencil.A, pa, comment=tagged)
    write_matrix_market(pencil.M, pm, comment=tagged)
    return pa, pm
