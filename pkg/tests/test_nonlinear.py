import numpy as np
import pytest

from shiftspec.errors import ContractionHypothesisFailed, MaxIterExceeded, NotFinite
from shiftspec.kernels import stability_constant
from shiftspec.linear import resonant_aligned_half_length, solve_linear
from shiftspec.nonlinear import (
    Nonlinearity,
    apply_T,
    apply_nonlinearity,
    convolve,
    convolve_direct,
    fixed_point_solve,
    nontriviality_check,
)
from shiftspec.spectral import (
    GridFunction,
    SpectralFunction,
    h2_norm,
    inverse_transform,
    l2_norm,
    make_grid,
)
from shiftspec.symbols import ShiftParams

NONRESONANT = ShiftParams(1.0, 1.0)
RESONANT = ShiftParams(1.0, 2 * np.pi)


@pytest.fixture(scope="module")
def grid():
    return make_grid(40.0, 1024)


def tanh_nonlinearity(grid, slope=0.1):
    return Nonlinearity(
        eval=lambda u, x: slope * np.tanh(u) + np.exp(-(x**2)),
        k=slope,
        envelope=GridFunction(grid, np.exp(-grid.x**2)),
        l=slope,
    )


def zero_nonlinearity(grid):
    return Nonlinearity(
        eval=lambda u, x: np.zeros_like(u),
        k=0.0,
        envelope=GridFunction(grid, np.zeros(grid.N)),
        l=0.0,
    )


def test_nonlinearity_growth_check_fires(grid):
    with pytest.raises(ValueError, match="growth"):
        Nonlinearity(
            eval=lambda u, x: 2.0 * u,
            k=0.5,  # declared too small
            envelope=GridFunction(grid, np.zeros(grid.N)),
            l=2.0,
        )


def test_nonlinearity_lipschitz_check_fires(grid):
    with pytest.raises(ValueError, match="Lipschitz"):
        Nonlinearity(
            eval=lambda u, x: np.tanh(3.0 * u),
            k=3.0,
            envelope=GridFunction(grid, np.zeros(grid.N)),
            l=0.5,  # declared too small
        )


def test_nonlinearity_envelope_must_be_nonnegative(grid):
    with pytest.raises(ValueError):
        Nonlinearity(
            eval=lambda u, x: np.zeros_like(u),
            k=0.0,
            envelope=GridFunction(grid, -np.ones(grid.N)),
            l=0.0,
        )


def test_convolve_zero(grid):
    G = GridFunction(grid, 0.3 * np.exp(-grid.x**2 / 2))
    z = GridFunction(grid, np.zeros(grid.N))
    assert l2_norm(convolve(G, z)) == 0


def test_convolve_gaussians_closed_form(grid):
    # oracle: e^{-x^2/(2 s1^2)} * e^{-x^2/(2 s2^2)}
    #       = sqrt(2 pi) s1 s2 / sqrt(s1^2+s2^2) e^{-x^2/(2(s1^2+s2^2))}
    s1, s2 = 1.0, 1.5
    G = GridFunction(grid, np.exp(-grid.x**2 / (2 * s1**2)))
    w = GridFunction(grid, np.exp(-grid.x**2 / (2 * s2**2)))
    out = convolve(G, w)
    exact = (
        np.sqrt(2 * np.pi)
        * s1
        * s2
        / np.sqrt(s1**2 + s2**2)
        * np.exp(-grid.x**2 / (2 * (s1**2 + s2**2)))
    )
    assert np.max(np.abs(out.values - exact)) <= 1e-10


def test_convolve_spectral_vs_direct(grid):
    rng = np.random.default_rng(31)
    for _ in range(5):
        G = GridFunction(grid, rng.standard_normal(grid.N) * np.exp(-grid.x**2 / 6))
        w = GridFunction(grid, rng.standard_normal(grid.N) * np.exp(-grid.x**2 / 5))
        a = convolve(G, w)
        b = convolve_direct(G, w)
        assert np.max(np.abs(a.values - b.values)) <= 1e-10 * max(1.0, np.max(np.abs(a.values)))


def test_convolve_direct_matches_brute_force():
    g = make_grid(3.0, 16)
    rng = np.random.default_rng(4)
    G = GridFunction(g, rng.standard_normal(16))
    w = GridFunction(g, rng.standard_normal(16))
    brute = np.zeros(16)
    for j in range(16):
        for k in range(16):
            brute[j] += G.values[(j - k + 8) % 16] * w.values[k]
    brute *= g.dx
    assert np.max(np.abs(convolve_direct(G, w).values - brute)) <= 1e-13


def test_convolve_grid_mismatch(grid):
    other = make_grid(20.0, 1024)
    with pytest.raises(ValueError):
        convolve(
            GridFunction(grid, np.zeros(grid.N)), GridFunction(other, np.zeros(other.N))
        )


def test_apply_T_zero_nonlinearity(grid):
    G = GridFunction(grid, 0.3 * np.exp(-grid.x**2 / 2))
    F = zero_nonlinearity(grid)
    rng = np.random.default_rng(9)
    v = GridFunction(grid, rng.standard_normal(grid.N) * np.exp(-grid.x**2 / 8))
    assert l2_norm(apply_T(v, G, F, NONRESONANT)) == 0


def test_apply_T_constant_nonlinearity(grid):
    # F(u, x) = r(x): one application equals the linear solve of G * r
    r_vals = np.exp(-grid.x**2)
    F = Nonlinearity(
        eval=lambda u, x: np.broadcast_to(np.exp(-(x**2)), np.shape(u)).copy(),
        k=0.0,
        envelope=GridFunction(grid, r_vals),
        l=0.0,
    )
    G = GridFunction(grid, 0.3 * np.exp(-grid.x**2 / 2))
    v0 = GridFunction(grid, np.sin(grid.x) * np.exp(-grid.x**2 / 9))
    out = apply_T(v0, G, F, NONRESONANT)
    expected = solve_linear(convolve(G, GridFunction(grid, r_vals)), NONRESONANT).u
    assert np.max(np.abs(out.values - expected.values)) <= 1e-12


def test_contraction_bound_random_pairs(grid):
    G = GridFunction(grid, 0.3 * np.exp(-grid.x**2 / 2))
    F = tanh_nonlinearity(grid)
    rep = stability_constant(G, NONRESONANT)
    q = 2 * np.sqrt(np.pi) * rep.N * F.l
    rng = np.random.default_rng(12)
    for _ in range(20):
        v1 = GridFunction(grid, rng.standard_normal(grid.N) * np.exp(-grid.x**2 / 8))
        v2 = GridFunction(grid, rng.standard_normal(grid.N) * np.exp(-grid.x**2 / 8))
        t1 = apply_T(v1, G, F, NONRESONANT, kernel_report=rep)
        t2 = apply_T(v2, G, F, NONRESONANT, kernel_report=rep)
        assert h2_norm(t1 - t2) <= q * h2_norm(v1 - v2) * 1.05


def test_fixed_point_zero_nonlinearity(grid):
    G = GridFunction(grid, 0.3 * np.exp(-grid.x**2 / 2))
    result = fixed_point_solve(G, zero_nonlinearity(grid), NONRESONANT)
    assert result.iterations == 1
    assert l2_norm(result.u) == 0
    assert not result.nontrivial


def test_fixed_point_constant_nonlinearity(grid):
    F = Nonlinearity(
        eval=lambda u, x: np.broadcast_to(np.exp(-(x**2)), np.shape(u)).copy(),
        k=0.0,
        envelope=GridFunction(grid, np.exp(-grid.x**2)),
        l=0.0,
    )
    G = GridFunction(grid, 0.3 * np.exp(-grid.x**2 / 2))
    result = fixed_point_solve(G, F, NONRESONANT)
    assert result.iterations <= 2
    assert result.residual_l2 <= 1e-8


def test_fixed_point_builtin_problem(grid):
    G = GridFunction(grid, 0.3 * np.exp(-grid.x**2 / 2))
    F = tanh_nonlinearity(grid)
    result = fixed_point_solve(G, F, NONRESONANT, tol_h2=1e-10)
    assert result.q_bound < 1
    assert result.observed_ratio <= result.q_bound * 1.1
    assert result.residual_l2 <= 10 * 1e-10  # direct-sum convolution residual
    assert result.nontrivial
    assert result.iterations <= result.iteration_bound + 2
    assert all(s > 0 for s in result.step_norms[:-1])
    # uniqueness: a second start lands on the same fixed point
    rng = np.random.default_rng(2)
    v0 = GridFunction(grid, rng.standard_normal(grid.N) * np.exp(-grid.x**2 / 10))
    result2 = fixed_point_solve(G, F, NONRESONANT, v0=v0, tol_h2=1e-10)
    assert h2_norm(result.u - result2.u) <= 2e-10


def test_fixed_point_resonant_orthogonal_kernel():
    g = make_grid(resonant_aligned_half_length(1.0, 40.0), 1024)
    G = GridFunction(g, 0.05 * g.x**2 * np.exp(-g.x**2 / 2))
    F = tanh_nonlinearity(g)
    result = fixed_point_solve(G, F, RESONANT, tol_h2=1e-10)
    assert result.residual_l2 <= 1e-8
    assert result.stability.finite


def test_fixed_point_resonant_gaussian_kernel_raises():
    g = make_grid(resonant_aligned_half_length(1.0, 40.0), 1024)
    G = GridFunction(g, 0.3 * np.exp(-g.x**2 / 2))
    with pytest.raises(NotFinite):
        fixed_point_solve(G, tanh_nonlinearity(g), RESONANT)


def test_fixed_point_contraction_hypothesis(grid):
    G = GridFunction(grid, 0.3 * np.exp(-grid.x**2 / 2))
    F = tanh_nonlinearity(grid, slope=20.0)  # q far above 1
    with pytest.raises(ContractionHypothesisFailed):
        fixed_point_solve(G, F, NONRESONANT)


def test_fixed_point_max_iter(grid):
    G = GridFunction(grid, 0.3 * np.exp(-grid.x**2 / 2))
    F = tanh_nonlinearity(grid)
    with pytest.raises(MaxIterExceeded):
        fixed_point_solve(G, F, NONRESONANT, tol_h2=1e-10, max_iter=2)


def test_nontriviality_gaussians(grid):
    G = GridFunction(grid, np.exp(-grid.x**2 / 2))
    F = tanh_nonlinearity(grid)
    assert nontriviality_check(G, F, grid)


def test_nontriviality_zero_source(grid):
    G = GridFunction(grid, np.exp(-grid.x**2 / 2))
    F = Nonlinearity(
        eval=lambda u, x: 0.1 * np.tanh(u),
        k=0.1,
        envelope=GridFunction(grid, np.zeros(grid.N)),
        l=0.1,
    )
    assert not nontriviality_check(G, F, grid)
    result = fixed_point_solve(G, F, NONRESONANT)
    assert h2_norm(result.u) <= 1e-10


def test_nontriviality_disjoint_bands(grid):
    # build G and F(0, .) by inverse transform of disjoint frequency bumps
    bump_lo = np.where(np.abs(grid.p) <= 1.0, np.exp(-grid.p**2), 0.0)
    bump_hi = np.where(
        (np.abs(grid.p) >= 3.0) & (np.abs(grid.p) <= 5.0),
        np.exp(-((np.abs(grid.p) - 4.0) ** 2) * 20),
        0.0,
    )
    G = GridFunction(grid, inverse_transform(SpectralFunction(grid, bump_lo)).values.real)
    src = inverse_transform(SpectralFunction(grid, bump_hi)).values.real
    F = Nonlinearity(
        eval=lambda u, x: np.broadcast_to(
            src[np.rint((np.asarray(x) + grid.L) / grid.dx).astype(int) % grid.N],
            np.shape(u),
        ).copy(),
        k=0.0,
        envelope=GridFunction(grid, np.abs(src)),
        l=0.0,
    )
    assert not nontriviality_check(G, F, grid, threshold=1e-9)


def test_apply_nonlinearity_requires_real(grid):
    F = tanh_nonlinearity(grid)
    v = GridFunction(grid, np.exp(1j * grid.x))
    with pytest.raises(ValueError):
        apply_nonlinearity(F, v)
