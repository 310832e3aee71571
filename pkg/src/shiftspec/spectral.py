"""Uniform-grid functions on a symmetric periodic box and their Fourier
transforms in the symmetric 1/sqrt(2*pi) convention.

The box is [-L, L) sampled at N equispaced points x_j = -L + j*dx,
dx = 2L/N.  The dual grid carries the frequencies p_j = pi*j/L for
j = -N/2 .. N/2-1, stored in increasing order.  Forward and inverse
transforms are the trapezoidal discretizations of

    u_hat(p) = (1/sqrt(2*pi)) int u(x) e^{-ipx} dx,
    u(x)     = (1/sqrt(2*pi)) int u_hat(p) e^{+ipx} dp,

which on this grid are exact inverses of each other and exactly unitary
(Parseval with the dx / dp quadrature weights).  Functions are expected
to decay below ~1e-14 at +-L; the periodic surrogate is not claimed to
approximate non-decaying data.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np

SQRT_2PI = float(np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class Grid:
    """Symmetric uniform grid over [-L, L) with its dual frequency grid.

    Attributes
    ----------
    L : float
        Half-length of the box.
    N : int
        Number of samples; even, at least 8.
    dx : float
        Spacing 2L/N.
    x : ndarray
        Sample points -L + j*dx, j = 0..N-1.
    p : ndarray
        Frequencies pi*j/L, j = -N/2..N/2-1, strictly increasing.  The
        single unpaired endpoint is -N*pi/(2L).
    """

    L: float
    N: int

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"half-length L must be positive, got {self.L}")
        if self.N != int(self.N) or self.N < 8:
            raise ValueError(f"N must be an integer >= 8, got {self.N}")
        if self.N % 2 != 0:
            raise ValueError(f"N must be even, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        dx = 2.0 * self.L / self.N
        x = -self.L + dx * np.arange(self.N)
        p = (np.pi / self.L) * np.arange(-self.N // 2, self.N // 2)
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def dp(self) -> float:
        """Frequency spacing pi/L."""
        return np.pi / self.L

    @property
    def p_max(self) -> float:
        """Resolvable band edge pi/dx = N*pi/(2L)."""
        return np.pi / self.dx

    def __eq__(self, other):
        return isinstance(other, Grid) and self.L == other.L and self.N == other.N

    def __hash__(self):
        return hash((self.L, self.N))

    def to_json(self) -> str:
        return json.dumps({"L": self.L, "N": self.N})

    @staticmethod
    def from_json(text: str) -> "Grid":
        meta = json.loads(text)
        return make_grid(float(meta["L"]), int(meta["N"]))


def make_grid(L: float, N: int) -> Grid:
    """Build the grid for the box [-L, L) with N samples (even, >= 8)."""
    return Grid(L=float(L), N=int(N))


def _canonical_values(values, N):
    arr = np.asarray(values)
    if arr.shape != (N,):
        raise ValueError(f"values must have shape ({N},), got {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128)
    else:
        arr = arr.astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("values contain NaN or Inf")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on a Grid.  Immutable once constructed."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _canonical_values(self.values, self.grid.N))

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def __add__(self, other):
        _require_same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _require_same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)


@dataclass(frozen=True)
class SpectralFunction:
    """Samples of a transform on the dual grid, in increasing-p order."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        object.__setattr__(self, "values", _canonical_values(vals, self.grid.N))


def _require_same_grid(f, g):
    if f.grid != g.grid:
        raise ValueError("grid mismatch between operands")


def _alternating_sign(N):
    # (-1)^j for j = -N/2..N/2-1; pairs the fftshift reordering with the
    # phase e^{i*pi*j} coming from the box offset x_0 = -L.
    k = np.arange(-N // 2, N // 2)
    return np.where(k % 2 == 0, 1.0, -1.0)


def forward_transform(u: GridFunction) -> SpectralFunction:
    """Transform to the dual grid: (dx/sqrt(2*pi)) * sum u(x_j) e^{-i p x_j}.

    Exact inverse of :func:`inverse_transform`; unitary in the discrete
    L2 norms (Parseval), and identical to :func:`evaluate_transform_at`
    at every on-grid frequency.
    """
    grid = u.grid
    sign = _alternating_sign(grid.N)
    vals = (grid.dx / SQRT_2PI) * sign * np.fft.fftshift(np.fft.fft(u.values))
    return SpectralFunction(grid, vals)


def inverse_transform(uh: SpectralFunction) -> GridFunction:
    """Inverse of :func:`forward_transform`; returns complex samples."""
    grid = uh.grid
    sign = _alternating_sign(grid.N)
    vals = (grid.dp * grid.N / SQRT_2PI) * np.fft.ifft(np.fft.ifftshift(sign * uh.values))
    return GridFunction(grid, vals)


def _real_like(reference: GridFunction, values: np.ndarray) -> GridFunction:
    """Drop the round-off imaginary part when the source data was real."""
    if reference.is_real:
        return GridFunction(reference.grid, values.real)
    return GridFunction(reference.grid, values)


def evaluate_transform_at(u: GridFunction, p):
    """Transform evaluated at arbitrary (generally off-grid) frequencies.

    Trapezoidal quadrature of (1/sqrt(2*pi)) int_{-L}^{L} u(x) e^{-ipx} dx;
    for the periodic box with decaying samples this coincides with the
    plain dx-weighted sum.  Warns when |p| exceeds the resolvable band.
    Accepts a scalar or an array of frequencies.
    """
    p_arr = np.atleast_1d(np.asarray(p, dtype=np.float64))
    band = u.grid.p_max
    if np.any(np.abs(p_arr) > band * (1.0 + 1e-12)):
        warnings.warn(
            f"frequency beyond the resolvable band |p| <= {band:.6g}; "
            "quadrature values there alias",
            RuntimeWarning,
            stacklevel=2,
        )
    phases = np.exp(-1j * np.outer(p_arr, u.grid.x))
    out = (u.grid.dx / SQRT_2PI) * (phases @ u.values)
    if np.isscalar(p) or np.asarray(p).ndim == 0:
        return complex(out[0])
    return out


def shift(u: GridFunction, h: float) -> GridFunction:
    """Periodic translate u(x - h), computed as the inverse transform of
    u_hat(p) e^{-iph}.  Unitary in L2; exact for band-limited data."""
    uh = forward_transform(u)
    shifted = SpectralFunction(u.grid, uh.values * np.exp(-1j * u.grid.p * h))
    return _real_like(u, inverse_transform(shifted).values)


def second_derivative(u: GridFunction) -> GridFunction:
    """Spectral second derivative: inverse transform of -p^2 u_hat(p)."""
    uh = forward_transform(u)
    d2 = SpectralFunction(u.grid, -(u.grid.p**2) * uh.values)
    return _real_like(u, inverse_transform(d2).values)


def l2_norm(u: GridFunction) -> float:
    return float(np.sqrt(u.grid.dx * np.sum(np.abs(u.values) ** 2)))


def l1_norm(u: GridFunction) -> float:
    return float(u.grid.dx * np.sum(np.abs(u.values)))


def weighted_l1_norm(u: GridFunction) -> float:
    """The norm ||x * u(x)||_L1 on the box."""
    return float(u.grid.dx * np.sum(np.abs(u.grid.x * u.values)))


def h2_norm(u: GridFunction) -> float:
    """Sobolev norm sqrt(||u||_L2^2 + ||u''||_L2^2), u'' spectral."""
    return float(np.sqrt(l2_norm(u) ** 2 + l2_norm(second_derivative(u)) ** 2))


def l2_norm_spectral(uh: SpectralFunction) -> float:
    return float(np.sqrt(uh.grid.dp * np.sum(np.abs(uh.values) ** 2)))


def sup_abs_spectral(uh: SpectralFunction) -> float:
    return float(np.max(np.abs(uh.values)))


# --- serialization -----------------------------------------------------

_CSV_HEADER = ["x", "re", "im"]


def write_gridfunction_csv(u: GridFunction, path) -> None:
    """CSV with header x,re,im, one row per sample, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        vals = u.values.astype(np.complex128)
        for xj, vj in zip(u.grid.x, vals):
            writer.writerow([f"{xj:.17g}", f"{vj.real:.17g}", f"{vj.imag:.17g}"])


def read_gridfunction_csv(path, grid: Grid | None = None) -> GridFunction:
    """Read the x,re,im format; reconstructs the grid from the x column
    unless one is supplied (then the x column must match it)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header] != _CSV_HEADER:
            raise ValueError(f"expected header {_CSV_HEADER}, got {header}")
        rows = [(float(r[0]), float(r[1]), float(r[2])) for r in reader]
    if not rows:
        raise ValueError("empty CSV")
    x = np.array([r[0] for r in rows])
    vals = np.array([complex(r[1], r[2]) for r in rows])
    if grid is None:
        N = len(x)
        dx = (x[-1] - x[0]) / (N - 1) if N > 1 else 0.0
        L = -x[0]
        grid = make_grid(L, N)
    if len(x) != grid.N or not np.allclose(x, grid.x, rtol=0, atol=1e-9 * max(1.0, grid.L)):
        raise ValueError("x column does not match the expected uniform grid")
    if np.all(vals.imag == 0.0):
        return GridFunction(grid, vals.real)
    return GridFunction(grid, vals)
