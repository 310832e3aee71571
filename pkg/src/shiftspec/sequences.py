"""Convergence experiments for perturbed right-hand sides and kernels.

A sequence run solves the limit problem and every member problem on one
grid and tabulates the input gaps against the solution gaps, together
with the inequalities the solution theory predicts between them
(stability bounds, multiplier-gap bounds, uniform contraction margins).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractionHypothesisFailed, NotFinite, ResonantNotSolvable
from .kernels import stability_constant
from .linear import check_solvability, project_solvable, solve_linear
from .nonlinear import Nonlinearity, fixed_point_solve
from .spectral import (
    SQRT_2PI,
    GridFunction,
    forward_transform,
    h2_norm,
    l1_norm,
    l2_norm,
    second_derivative,
    sup_abs_spectral,
    weighted_l1_norm,
)
from .symbols import ShiftParams, classify


class SequenceKind(enum.Enum):
    RHS = "RhsSequence"
    KERNEL = "KernelSequence"


@dataclass(frozen=True)
class SequenceSpec:
    """A family of inputs indexed by m = 1..M together with its limit.

    epsilon is the uniform contraction slack required of kernel
    sequences (2*sqrt(pi)*N_m*l <= 1 - epsilon for every member).
    """

    kind: SequenceKind
    generator: Callable[[int], GridFunction]
    limit: GridFunction
    M: int
    epsilon: float | None = None

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.kind is SequenceKind.KERNEL:
            if self.epsilon is None or not 0.0 < self.epsilon < 1.0:
                raise ValueError("kernel sequences require epsilon in (0, 1)")


@dataclass(frozen=True)
class ConvergenceRow:
    m: int
    input_gap: float
    weighted_gap: float
    solution_gap_h2: float
    solution_gap_l2: float
    d2_gap: float
    multiplier_gap: float | None = None
    multiplier_gap_p2: float | None = None
    N_m: float | None = None


@dataclass(frozen=True)
class ConvergenceTable:
    kind: SequenceKind
    rows: list[ConvergenceRow]
    checks: dict[str, bool]
    alpha: float | None
    N_limit: float | None = None
    q_limit: float | None = None
    epsilon: float | None = None

    def column(self, name):
        return [getattr(r, name) for r in self.rows]


def _trend_checks(rows):
    first, last = rows[0], rows[-1]
    net = last.solution_gap_h2 <= first.solution_gap_h2 + 1e-15
    if first.input_gap == 0.0 and first.solution_gap_h2 == 0.0:
        ratio_ok = True
    elif first.input_gap == 0.0 or first.solution_gap_h2 == 0.0:
        ratio_ok = last.solution_gap_h2 <= 1e-12
    else:
        ratio_ok = (last.solution_gap_h2 / first.solution_gap_h2) <= (
            10.0 * last.input_gap / first.input_gap + 1e-15
        )
    return net, ratio_ok


def run_linear_sequence(
    spec: SequenceSpec,
    params: ShiftParams,
    tol_orth: float = 1e-8,
) -> ConvergenceTable:
    """Solve the family -u_m'' - a u_m(x-h) = f_m and its limit problem.

    Resonant runs verify the orthogonality conditions for the limit and
    every member before solving; a violation aborts naming the member.
    Non-resonant rows are checked against the stability bound
    ||u_m - u||_L2 <= ||f_m - f||_L2 / sqrt(alpha) and every row against
    the second-derivative bound
    ||u_m'' - u''|| <= a ||u_m - u|| + ||f_m - f||.
    """
    if spec.kind is not SequenceKind.RHS:
        raise ValueError("run_linear_sequence expects a right-hand-side sequence")
    cls = classify(params)
    f_limit = spec.limit
    members = [spec.generator(m) for m in range(1, spec.M + 1)]
    if cls.is_resonant:
        rep = check_solvability(f_limit, params, tol_orth, classification=cls)
        if not rep.solvable:
            raise ResonantNotSolvable("limit right-hand side violates orthogonality", rep)
        for m, fm in enumerate(members, start=1):
            rep = check_solvability(fm, params, tol_orth, classification=cls)
            if not rep.solvable:
                raise ResonantNotSolvable(
                    f"member m={m} violates the orthogonality conditions", rep
                )
    u_limit = solve_linear(f_limit, params, tol_orth, classification=cls).u
    rows = []
    for m, fm in enumerate(members, start=1):
        um = solve_linear(fm, params, tol_orth, classification=cls).u
        diff_f = fm - f_limit
        diff_u = um - u_limit
        rows.append(
            ConvergenceRow(
                m=m,
                input_gap=l2_norm(diff_f),
                weighted_gap=weighted_l1_norm(diff_f),
                solution_gap_h2=h2_norm(diff_u),
                solution_gap_l2=l2_norm(diff_u),
                d2_gap=l2_norm(second_derivative(diff_u)),
            )
        )
    checks = {}
    if not cls.is_resonant:
        checks["stability_bound"] = all(
            r.solution_gap_l2 <= r.input_gap / np.sqrt(cls.alpha) * 1.1 + 1e-15 for r in rows
        )
    checks["second_derivative_bound"] = all(
        r.d2_gap <= params.a * r.solution_gap_l2 + r.input_gap + 1e-9 for r in rows
    )
    checks["net_decrease"], checks["gap_ratio"] = _trend_checks(rows)
    return ConvergenceTable(
        kind=spec.kind,
        rows=rows,
        checks=checks,
        alpha=cls.alpha,
    )


def run_kernel_sequence(
    spec: SequenceSpec,
    F: Nonlinearity,
    params: ShiftParams,
    tol_orth: float = 1e-8,
    tol_h2: float = 1e-10,
) -> ConvergenceTable:
    """Solve the nonlocal problem for every kernel G_m and the limit G.

    Every member must satisfy the uniform margin
    2*sqrt(pi)*N_m*l <= 1 - epsilon (abort naming the member otherwise);
    the run records whether the limit inherits it, the sup-norm gaps of
    both symbol quotients, and the bounds tying them to ||G_m - G||_L1.
    """
    if spec.kind is not SequenceKind.KERNEL:
        raise ValueError("run_kernel_sequence expects a kernel sequence")
    eps = spec.epsilon
    cls = classify(params)
    G = spec.limit
    members = [spec.generator(m) for m in range(1, spec.M + 1)]
    two_sqrt_pi_l = 2.0 * np.sqrt(np.pi) * F.l

    report_limit = stability_constant(G, params, tol_orth, classification=cls)
    if not report_limit.finite:
        raise NotFinite("limit kernel violates the orthogonality conditions", report_limit)
    member_reports = []
    for m, Gm in enumerate(members, start=1):
        rep = stability_constant(Gm, params, tol_orth, classification=cls)
        if not rep.finite:
            raise NotFinite(f"member m={m} violates the orthogonality conditions", rep)
        if two_sqrt_pi_l * rep.N > 1.0 - eps:
            raise ContractionHypothesisFailed(
                f"member m={m}: 2*sqrt(pi)*N_m*l = {two_sqrt_pi_l * rep.N:.6g} "
                f"> 1 - epsilon = {1.0 - eps:.6g}"
            )
        member_reports.append(rep)

    u_limit = fixed_point_solve(G, F, params, tol_h2=tol_h2, tol_orth=tol_orth).u
    rows = []
    tri_ok = True
    orth_emerges = True
    for m, (Gm, rep) in enumerate(zip(members, member_reports), start=1):
        um = fixed_point_solve(Gm, F, params, tol_h2=tol_h2, tol_orth=tol_orth).u
        diff = Gm - G
        # the sup-norm gaps of both quotients are the stability components
        # of the difference kernel (same singular-bin handling)
        diff_rep = stability_constant(
            diff, params, tol_orth=2.0 * tol_orth + 1e-15, classification=cls
        )
        gap1, gap2 = diff_rep.sup1, diff_rep.sup2
        sup_dGh = sup_abs_spectral(forward_transform(diff))
        input_gap = l1_norm(diff)
        tri_ok &= gap2 <= params.a * gap1 + sup_dGh + 1e-9
        if cls.is_resonant:
            orth_emerges &= (
                max(abs(report_limit.Ghat_plus), abs(report_limit.Ghat_minus))
                <= input_gap / SQRT_2PI + tol_orth
            )
        rows.append(
            ConvergenceRow(
                m=m,
                input_gap=input_gap,
                weighted_gap=weighted_l1_norm(diff),
                solution_gap_h2=h2_norm(um - u_limit),
                solution_gap_l2=l2_norm(um - u_limit),
                d2_gap=l2_norm(second_derivative(um - u_limit)),
                multiplier_gap=gap1,
                multiplier_gap_p2=gap2,
                N_m=rep.N,
            )
        )
    checks = {
        "uniform_margin": True,  # gated above
        "limit_margin": bool(two_sqrt_pi_l * report_limit.N <= 1.0 - eps),
        "triangle_consistency": bool(tri_ok),
    }
    if not cls.is_resonant:
        bound = 1.1 / np.sqrt(2.0 * np.pi * cls.alpha)
        checks["multiplier_bound"] = all(
            r.multiplier_gap <= bound * r.input_gap + 1e-15 for r in rows
        )
        checks["N_gap_bound"] = all(
            abs(r.N_m - report_limit.N) <= bound * r.input_gap + 1e-15 for r in rows
        )
    else:
        checks["limit_orthogonality"] = bool(orth_emerges)
    checks["net_decrease"], checks["gap_ratio"] = _trend_checks(rows)
    return ConvergenceTable(
        kind=spec.kind,
        rows=rows,
        checks=checks,
        alpha=cls.alpha,
        N_limit=report_limit.N,
        q_limit=float(two_sqrt_pi_l * report_limit.N),
        epsilon=eps,
    )


# --- builtin generators -------------------------------------------------


def _mollified_cutoff(x, m):
    # 1 on |x| <= m, gaussian ramp outside; 1 - chi vanishes inside, so
    # the perturbation is supported on |x| > m and dominated by the tail
    # of the base function there
    t = np.maximum(np.abs(x) - m, 0.0)
    return np.exp(-(t**2))


def builtin_sequences(
    name: str,
    kind: SequenceKind,
    base: GridFunction,
    M: int = 12,
    perturbation: GridFunction | None = None,
    shift_params: ShiftParams | None = None,
    epsilon: float | None = None,
) -> SequenceSpec:
    """Catalog of reproducible sequences converging to a known limit.

    scale     members base*(1 - 1/m); gap norms scale exactly as 1/m of
              the base norm (homogeneity).
    add       members base + perturbation/m; gaps are 1/m times the
              perturbation norms.  In resonant runs the perturbation
              must itself satisfy the orthogonality conditions for the
              hypotheses to hold at every m.
    truncate  members are the base cut off smoothly beyond |x| = m, so
              the gap is bounded by the base's tail beyond m (L2 tail
              for right-hand sides, L1 tail for kernels); with resonant
              shift_params each member and the limit are re-projected
              onto the orthogonal complement.
    """
    if name == "scale":
        limit = base
        gen = lambda m: base * (1.0 - 1.0 / m)
    elif name == "add":
        if perturbation is None:
            raise ValueError("'add' requires a perturbation function")
        limit = base
        gen = lambda m: base + perturbation * (1.0 / m)
    elif name == "truncate":
        reproject = (
            shift_params is not None and classify(shift_params).is_resonant
        )
        def _member(m):
            cut = GridFunction(base.grid, base.values * _mollified_cutoff(base.grid.x, m))
            return project_solvable(cut, shift_params) if reproject else cut
        limit = project_solvable(base, shift_params) if reproject else base
        gen = _member
    else:
        raise KeyError(f"unknown sequence builtin {name!r}; available: add, scale, truncate")
    return SequenceSpec(kind=kind, generator=gen, limit=limit, M=M, epsilon=epsilon)


_CSV_COLUMNS = ["m", "input_gap", "weighted_gap", "solution_gap_h2", "multiplier_gap", "N_m"]


def write_table_csv(table: ConvergenceTable, path) -> None:
    """Emit the table as m,input_gap,weighted_gap,solution_gap_h2,
    multiplier_gap,N_m (kernel-only columns empty for rhs runs)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for r in table.rows:
            writer.writerow(
                [
                    r.m,
                    f"{r.input_gap:.17g}",
                    f"{r.weighted_gap:.17g}",
                    f"{r.solution_gap_h2:.17g}",
                    "" if r.multiplier_gap is None else f"{r.multiplier_gap:.17g}",
                    "" if r.N_m is None else f"{r.N_m:.17g}",
                ]
            )
