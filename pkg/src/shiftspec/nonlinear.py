"""Fixed-point solver for u'' + a*u(x-h) + int G(x-y) F(u(y), y) dy = 0.

One step of the map sends v to the solution u of the linear problem with
right-hand side G * F(v, .).  When 2*sqrt(pi)*N*l < 1 (N the kernel's
stability constant, l the Lipschitz constant of F) the map contracts in
the H2 norm and the iteration converges to the unique solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractionHypothesisFailed, MaxIterExceeded, NotFinite
from .kernels import KernelReport, contraction_margin, stability_constant
from .linear import apply_operator, solve_linear
from .spectral import (
    SQRT_2PI,
    Grid,
    GridFunction,
    SpectralFunction,
    _require_same_grid,
    forward_transform,
    h2_norm,
    inverse_transform,
    l2_norm,
)
from .symbols import FredholmClass, ShiftParams, classify


@dataclass(frozen=True)
class Nonlinearity:
    """Pointwise nonlinearity F(u, x) with declared growth and Lipschitz
    constants and an envelope function.

    eval must be vectorized: it receives equal-shape arrays (u, x).  At
    construction the declared constants are spot-checked on a
    deterministic random sample:

        |F(u, x)|          <= k*|u| + envelope(x) + 1e-9
        |F(u1,x) - F(u2,x)| <= l*|u1 - u2| + 1e-9
    """

    eval: Callable[[np.ndarray, np.ndarray], np.ndarray]
    k: float
    envelope: GridFunction
    l: float

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise ValueError("growth and Lipschitz constants must be nonnegative")
        if not self.envelope.is_real or np.any(self.envelope.values < 0):
            raise ValueError("envelope must be real and nonnegative")
        self._spot_check()

    def _spot_check(self, n_u: int = 48, n_x: int = 96):
        rng = np.random.default_rng(20240817)
        x = self.envelope.grid.x
        idx = rng.choice(len(x), size=min(n_x, len(x)), replace=False)
        xs = x[idx]
        env = self.envelope.values[idx]
        us = np.concatenate([[0.0], rng.uniform(-8.0, 8.0, n_u)])
        U, X = np.meshgrid(us, xs, indexing="ij")
        F = np.asarray(self.eval(U, X), dtype=np.float64)
        bound = self.k * np.abs(U) + env[None, :] + 1e-9
        if np.any(np.abs(F) > bound):
            i, j = np.unravel_index(np.argmax(np.abs(F) - bound), F.shape)
            raise ValueError(
                f"growth check failed: |F({U[i,j]:.3g}, {X[i,j]:.3g})| = {abs(F[i,j]):.6g} "
                f"> k|u| + envelope = {bound[i,j]:.6g}"
            )
        u1 = rng.uniform(-8.0, 8.0, n_u)
        u2 = rng.uniform(-8.0, 8.0, n_u)
        U1, X = np.meshgrid(u1, xs, indexing="ij")
        U2, _ = np.meshgrid(u2, xs, indexing="ij")
        d = np.abs(np.asarray(self.eval(U1, X)) - np.asarray(self.eval(U2, X)))
        lip = self.l * np.abs(U1 - U2) + 1e-9
        if np.any(d > lip):
            i, j = np.unravel_index(np.argmax(d - lip), d.shape)
            raise ValueError(
                f"Lipschitz check failed: |F({U1[i,j]:.3g},x) - F({U2[i,j]:.3g},x)| "
                f"= {d[i,j]:.6g} > l*|u1-u2| = {lip[i,j]:.6g} at x = {X[i,j]:.3g}"
            )


@dataclass(frozen=True)
class FixedPointResult:
    u: GridFunction
    iterations: int
    step_norms: list[float]
    observed_ratio: float
    q_bound: float
    residual_l2: float
    nontrivial: bool
    stability: KernelReport
    iteration_bound: int


def convolve(G: GridFunction, w: GridFunction) -> GridFunction:
    """Periodic convolution int G(x-y) w(y) dy, spectral form
    sqrt(2*pi) * G_hat * w_hat."""
    _require_same_grid(G, w)
    gh = forward_transform(G)
    wh = forward_transform(w)
    conv = inverse_transform(SpectralFunction(G.grid, SQRT_2PI * gh.values * wh.values))
    if G.is_real and w.is_real:
        return GridFunction(G.grid, conv.values.real)
    return conv


def convolve_direct(G: GridFunction, w: GridFunction) -> GridFunction:
    """Same convolution by direct O(N^2) summation with periodic wrap;
    the cross-check path, independent of the transform machinery."""
    _require_same_grid(G, w)
    N = G.grid.N
    full = np.convolve(G.values, w.values)  # direct sliding sum, not FFT
    circ = full[:N].copy()
    circ[: N - 1] += full[N:]
    vals = G.grid.dx * np.roll(circ, -(N // 2))
    if G.is_real and w.is_real:
        vals = vals.real
    return GridFunction(G.grid, vals)


def apply_nonlinearity(F: Nonlinearity, v: GridFunction) -> GridFunction:
    """Pointwise w(x) = F(v(x), x) on v's grid."""
    if not v.is_real:
        raise ValueError("nonlinearity arguments must be real-valued")
    vals = np.asarray(F.eval(v.values, v.grid.x), dtype=np.float64)
    return GridFunction(v.grid, vals)


def apply_T(
    v: GridFunction,
    G: GridFunction,
    F: Nonlinearity,
    params: ShiftParams,
    classification: FredholmClass | None = None,
    kernel_report: KernelReport | None = None,
    tol_orth: float = 1e-8,
) -> GridFunction:
    """One step of the fixed-point map: solve the linear problem with
    right-hand side G * F(v, .).

    Resonant parameters require the kernel orthogonality to hold (the
    report must be finite); the per-step right-hand side then inherits
    orthogonality from the kernel and is not re-gated.
    """
    cls = classification if classification is not None else classify(params)
    if cls.is_resonant:
        report = (
            kernel_report
            if kernel_report is not None
            else stability_constant(G, params, tol_orth, classification=cls)
        )
        if not report.finite:
            raise NotFinite(
                "kernel transform does not vanish at +-sqrt(a); the auxiliary "
                f"problem has no H2 solution (|G_hat(+sqrt a)| = {abs(report.Ghat_plus):.3e}, "
                f"|G_hat(-sqrt a)| = {abs(report.Ghat_minus):.3e})",
                report=report,
            )
    rhs = convolve(G, apply_nonlinearity(F, v))
    result = solve_linear(
        rhs, params, tol_orth=tol_orth, classification=cls, enforce_orthogonality=False
    )
    return result.u


def nontriviality_check(
    G: GridFunction,
    F: Nonlinearity,
    grid: Grid,
    threshold: float | None = None,
) -> bool:
    """Whether the transforms of G and of x -> F(0, x) overlap on a set
    of bins of positive measure.

    With no overlap the zero function is the fixed point.  threshold is
    absolute for both transforms; by default each uses 1e-12 times its
    own maximum magnitude.
    """
    gh = np.abs(forward_transform(GridFunction(grid, np.asarray(G.values))).values)
    f0 = GridFunction(grid, np.asarray(F.eval(np.zeros(grid.N), grid.x), dtype=np.float64))
    fh = np.abs(forward_transform(f0).values)
    thr_g = threshold if threshold is not None else 1e-12 * gh.max()
    thr_f = threshold if threshold is not None else 1e-12 * fh.max()
    overlap_bins = int(np.count_nonzero((gh > thr_g) & (fh > thr_f)))
    return overlap_bins * grid.dp > 0.0


def _a_priori_iterations(q: float, first_step: float, tol: float) -> int:
    """Iteration cap from the contraction factor: distance to the fixed
    point after k steps is at most q^k * ||v1 - v0|| / (1 - q)."""
    if first_step <= tol:
        return 1
    if q <= 0.0:
        return 2
    k = math.log(tol * (1.0 - q) / first_step) / math.log(q)
    return max(2, int(math.ceil(k)))


def fixed_point_solve(
    G: GridFunction,
    F: Nonlinearity,
    params: ShiftParams,
    v0: GridFunction | None = None,
    tol_h2: float = 1e-10,
    max_iter: int | None = None,
    tol_orth: float = 1e-8,
) -> FixedPointResult:
    """Iterate the map from v0 (default zero) until the H2 step norm
    drops to tol_h2.

    Requires a positive contraction margin 1 - 2*sqrt(pi)*N*l (raises
    ContractionHypothesisFailed otherwise, including the boundary).  The
    residual of the full nonlocal equation is recomputed independently:
    operator application on one side, direct-sum convolution on the
    other.
    """
    grid = G.grid
    cls = classify(params)
    report = stability_constant(G, params, tol_orth, classification=cls)
    if not report.finite:
        raise NotFinite(
            "stability constant is infinite: kernel orthogonality fails at +-sqrt(a)",
            report=report,
        )
    q = 2.0 * np.sqrt(np.pi) * report.N * F.l
    if contraction_margin(report.N, F.l) <= 0.0:
        raise ContractionHypothesisFailed(
            f"2*sqrt(pi)*N*l = {q:.6g} >= 1; the fixed-point map does not contract"
        )
    v = v0 if v0 is not None else GridFunction(grid, np.zeros(grid.N))
    step_norms: list[float] = []
    cap = None
    bound = None
    while True:
        u = apply_T(v, G, F, params, classification=cls, kernel_report=report, tol_orth=tol_orth)
        step = h2_norm(u - v)
        step_norms.append(step)
        if bound is None:
            bound = _a_priori_iterations(q, step, tol_h2)
            cap = bound + 2 if max_iter is None else min(max_iter, bound + 2)
        if step <= tol_h2:
            break
        if len(step_norms) >= cap:
            raise MaxIterExceeded(
                f"no convergence within {cap} iterations "
                f"(a priori bound {bound}, last step {step:.3e})"
            )
        v = u
    ratios = [
        step_norms[i + 1] / step_norms[i]
        for i in range(1, len(step_norms) - 1)
        if step_norms[i] > 0.0
    ]
    residual = l2_norm(apply_operator(u, params) - convolve_direct(G, apply_nonlinearity(F, u)))
    return FixedPointResult(
        u=u,
        iterations=len(step_norms),
        step_norms=step_norms,
        observed_ratio=max(ratios) if ratios else 0.0,
        q_bound=q,
        residual_l2=residual,
        nontrivial=nontriviality_check(G, F, grid),
        stability=report,
        iteration_bound=bound,
    )
