"""Periodic sampling grids and complex signals on them.

The model is the n-torus prod_j R/L_j Z, sampled uniformly with M_j points
per axis.  Sample points sit at x_k = k * dx (k_j in 0..M_j-1); frequency
points sit at xi_m = m / L_j with m_j running over the symmetric range
[-M_j/2, M_j/2).  All integrals are Riemann sums with measure prod_j dx_j,
so the discrete Fourier transform below is unitary in the L^2 pairing and
grid refinement converges to continuum values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

MAX_DIM = 4

# Working-set guard: grids whose signals would exceed this budget are refused.
_memory_budget_mb = 2048.0


def set_memory_budget(mb: float) -> None:
    """Set the memory budget (MB) used to refuse infeasibly large grids."""
    global _memory_budget_mb
    if mb <= 0:
        raise ValueError("memory budget must be positive")
    _memory_budget_mb = float(mb)


def memory_budget_mb() -> float:
    return _memory_budget_mb


class GridError(ValueError):
    pass


class AlignmentError(ValueError):
    """A point does not lie on the sample (or frequency) grid."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on prod_j R/L_j Z.

    L: per-axis period lengths (positive); M: per-axis sample counts
    (positive even integers).  Immutable and shareable.
    """

    L: tuple[float, ...]
    M: tuple[int, ...]

    def __post_init__(self):
        L = tuple(float(v) for v in self.L)
        M = tuple(int(v) for v in self.M)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "M", M)
        if not 1 <= len(L) <= 2 * MAX_DIM or len(L) != len(M):
            raise GridError(f"need 1..{2 * MAX_DIM} axes, got L={L}, M={M}")
        if any(v <= 0 for v in L):
            raise GridError(f"period lengths must be positive, got {L}")
        if any(m <= 0 or m % 2 for m in M):
            raise GridError(f"sample counts must be positive and even, got {M}")
        # rough working set: a handful of complex copies of one signal
        need_mb = self.size * 16 * 6 / 2**20
        if need_mb > _memory_budget_mb:
            raise GridError(
                f"grid with {self.size} samples needs ~{need_mb:.0f} MB, "
                f"over the {_memory_budget_mb:.0f} MB budget"
            )

    @property
    def n(self) -> int:
        return len(self.L)

    @cached_property
    def dx(self) -> tuple[float, ...]:
        return tuple(l / m for l, m in zip(self.L, self.M))

    @cached_property
    def size(self) -> int:
        return int(np.prod(self.M))

    @cached_property
    def cell(self) -> float:
        """Riemann measure of one sample cell, prod_j dx_j."""
        return float(np.prod(self.dx))

    @property
    def volume(self) -> float:
        """Total measure of one period box, prod_j L_j."""
        return float(np.prod(self.L))

    def axis_coords(self, j: int) -> np.ndarray:
        """Canonical sample coordinates on axis j, in [0, L_j)."""
        return np.arange(self.M[j]) * self.dx[j]

    def axis_coords_centered(self, j: int) -> np.ndarray:
        """Torus-minimal sample coordinates on axis j, in [-L_j/2, L_j/2)."""
        c = self.axis_coords(j)
        return (c + self.L[j] / 2) % self.L[j] - self.L[j] / 2

    def coords(self, centered: bool = False) -> list[np.ndarray]:
        """Per-axis coordinate arrays broadcast to the full grid shape."""
        axes = [
            self.axis_coords_centered(j) if centered else self.axis_coords(j)
            for j in range(self.n)
        ]
        return list(np.meshgrid(*axes, indexing="ij", sparse=True))

    def torus_distance(self) -> np.ndarray:
        """Euclidean distance to the origin on the torus, per grid point."""
        sq = sum(c**2 for c in self.coords(centered=True))
        return np.sqrt(sq)

    def frequency_grid(self) -> Grid:
        """The grid carrying Fourier transforms: periods M_j/L_j, spacing 1/L_j."""
        return Grid(tuple(m / l for m, l in zip(self.M, self.L)), self.M)

    def sample_index(self, x: Sequence[float], rtol: float = 1e-9) -> tuple[int, ...]:
        """Grid index of the sample point x; AlignmentError if off-grid."""
        idx = []
        for j, v in enumerate(x):
            q = v / self.dx[j]
            k = round(q)
            if abs(q - k) > rtol * max(1.0, abs(q)):
                raise AlignmentError(
                    f"coordinate {v} on axis {j} is not a multiple of the "
                    f"grid spacing {self.dx[j]}"
                )
            idx.append(int(k) % self.M[j])
        return tuple(idx)

    def frequency_index(self, xi: Sequence[float], rtol: float = 1e-9) -> tuple[int, ...]:
        """Grid index of the frequency point xi; AlignmentError if off-grid."""
        idx = []
        for j, v in enumerate(xi):
            q = v * self.L[j]
            k = round(q)
            if abs(q - k) > rtol * max(1.0, abs(q)):
                raise AlignmentError(
                    f"frequency {v} on axis {j} is not a multiple of 1/L = "
                    f"{1 / self.L[j]}"
                )
            idx.append(int(k) % self.M[j])
        return tuple(idx)


def phase_space_grid(grid: Grid) -> Grid:
    """Time grid x frequency grid, the 2n-dimensional carrier of STFTs."""
    fg = grid.frequency_grid()
    return Grid(grid.L + fg.L, grid.M + fg.M)


def is_phase_space_grid(grid: Grid) -> bool:
    """True when the last n axes are exactly the frequency grid of the first n."""
    if grid.n % 2:
        return False
    n = grid.n // 2
    for j in range(n):
        if grid.M[n + j] != grid.M[j]:
            return False
        if abs(grid.L[n + j] - grid.M[j] / grid.L[j]) > 1e-9 * grid.L[n + j]:
            return False
    return True


@dataclass
class SampledSignal:
    """Complex-valued function sampled on a Grid (values shaped like grid.M)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != tuple(self.grid.M):
            if v.size == self.grid.size:
                v = v.reshape(self.grid.M)
            else:
                raise GridError(
                    f"values of shape {v.shape} do not fit grid {self.grid.M}"
                )
        if not np.all(np.isfinite(v.view(np.float64))):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise GridError(f"non-finite value at grid index {tuple(int(i) for i in bad)}")
        self.values = v

    def copy(self) -> SampledSignal:
        return SampledSignal(self.grid, self.values.copy())

    def _check_same_grid(self, other: SampledSignal) -> None:
        if self.grid != other.grid:
            raise GridError("signals live on different grids")

    def __add__(self, other: SampledSignal) -> SampledSignal:
        self._check_same_grid(other)
        return SampledSignal(self.grid, self.values + other.values)

    def __sub__(self, other: SampledSignal) -> SampledSignal:
        self._check_same_grid(other)
        return SampledSignal(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, SampledSignal):
            self._check_same_grid(other)
            return SampledSignal(self.grid, self.values * other.values)
        return SampledSignal(self.grid, self.values * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> SampledSignal:
        return SampledSignal(self.grid, self.values / scalar)

    def conj(self) -> SampledSignal:
        return SampledSignal(self.grid, self.values.conj())


def sample_function(grid: Grid, fn: Callable[..., np.ndarray],
                    centered: bool = False) -> SampledSignal:
    """Sample a pointwise rule fn(x_1, ..., x_n) on the grid.

    With centered=True the rule receives torus-minimal coordinates in
    [-L/2, L/2) instead of canonical ones in [0, L).
    """
    vals = np.asarray(fn(*grid.coords(centered=centered)), dtype=np.complex128)
    vals = np.broadcast_to(vals, grid.M).copy()
    if not np.all(np.isfinite(vals.view(np.float64))):
        bad = np.argwhere(~np.isfinite(vals))[0]
        pt = tuple(float(grid.axis_coords(j)[i]) for j, i in enumerate(bad))
        raise GridError(f"rule evaluated to a non-finite value at x = {pt}")
    return SampledSignal(grid, vals)


# ---------------------------------------------------------------------------
# Built-in signal rules


def gaussian(grid: Grid) -> SampledSignal:
    """The L^2-normalised Gaussian 2^{n/4} exp(-pi x.x), centered on the torus."""
    n = grid.n
    return sample_function(
        grid, lambda *xs: 2 ** (n / 4) * np.exp(-np.pi * sum(x**2 for x in xs)),
        centered=True,
    )


def bump(grid: Grid, radius, center: Sequence[float] | None = None) -> SampledSignal:
    """Smooth bump exp(1 - 1/(1-u^2)) with u = |x-center|_box/radius, support
    strictly inside the per-axis box of the given radii."""
    r = np.broadcast_to(np.asarray(radius, dtype=float), (grid.n,))
    c = np.zeros(grid.n) if center is None else np.asarray(center, dtype=float)

    def rule(*xs):
        out = np.ones(np.broadcast_shapes(*(x.shape for x in xs)))
        for j, x in enumerate(xs):
            u = (x - c[j] + grid.L[j] / 2) % grid.L[j] - grid.L[j] / 2
            u = u / r[j]
            with np.errstate(divide="ignore", over="ignore"):
                f = np.where(np.abs(u) < 1, np.exp(1 - 1 / np.maximum(1e-300, 1 - u**2)), 0.0)
            out = out * f
        return out

    return sample_function(grid, rule)


def hat(grid: Grid, radius, center: Sequence[float] | None = None) -> SampledSignal:
    """Tensor triangular (order-1 B-spline) window max(0, 1-|x|/r) per axis."""
    r = np.broadcast_to(np.asarray(radius, dtype=float), (grid.n,))
    c = np.zeros(grid.n) if center is None else np.asarray(center, dtype=float)

    def rule(*xs):
        out = np.ones(np.broadcast_shapes(*(x.shape for x in xs)))
        for j, x in enumerate(xs):
            u = (x - c[j] + grid.L[j] / 2) % grid.L[j] - grid.L[j] / 2
            out = out * np.maximum(0.0, 1.0 - np.abs(u) / r[j])
        return out

    return sample_function(grid, rule)


def noise(grid: Grid, seed: int) -> SampledSignal:
    """Complex white Gaussian noise, unit variance per sample, seeded."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.M) + 1j * rng.standard_normal(grid.M)
    return SampledSignal(grid, v / np.sqrt(2.0))


def constant(grid: Grid, value: complex = 1.0) -> SampledSignal:
    return SampledSignal(grid, np.full(grid.M, value, dtype=np.complex128))


def delta(grid: Grid) -> SampledSignal:
    """Discrete delta: 1/cell at the origin sample, the unit for convolution."""
    v = np.zeros(grid.M, dtype=np.complex128)
    v[(0,) * grid.n] = 1.0 / grid.cell
    return SampledSignal(grid, v)


# ---------------------------------------------------------------------------
# Inner product and Fourier transform


def inner_product(f: SampledSignal, g: SampledSignal) -> complex:
    """Riemann-sum L^2 pairing (f, g) = cell * sum f conj(g)."""
    f._check_same_grid(g)
    return complex(np.vdot(g.values, f.values) * f.grid.cell)


def l2_norm(f: SampledSignal) -> float:
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.cell))


def fourier(f: SampledSignal) -> SampledSignal:
    """Forward transform fhat(xi_m) = cell * sum_k f(x_k) e^{-2pi i x_k.xi_m}.

    The result lives on the frequency grid in standard FFT index order
    (index k on axis j carries frequency k/L_j wrapped to the symmetric range).
    """
    vals = np.fft.fftn(f.values) * f.grid.cell
    return SampledSignal(f.grid.frequency_grid(), vals)


def inverse_fourier(f: SampledSignal) -> SampledSignal:
    """Inverse transform; composes with fourier() to the identity."""
    vals = np.fft.ifftn(f.values) * f.grid.volume
    return SampledSignal(f.grid.frequency_grid(), vals)


def partial_inverse_fourier(f: SampledSignal, axes: Iterable[int]) -> SampledSignal:
    """Inverse transform along a subset of axes (others untouched).

    Used to realise norms of the form ||F^{-1}_x f(., xi)|| on phase space.
    """
    axes = tuple(axes)
    vals = np.fft.ifftn(f.values, axes=axes)
    L = list(f.grid.L)
    M = list(f.grid.M)
    for j in axes:
        vals = vals * f.grid.L[j]
        L[j] = f.grid.M[j] / f.grid.L[j]
    return SampledSignal(Grid(tuple(L), tuple(M)), vals)


# ---------------------------------------------------------------------------
# Serialization: binary container and CSV

_MAGIC_FMT = "<I"  # axis count; then L as f8[n], M as u4[n], re/im pairs f8


def save_signal(f: SampledSignal, path) -> None:
    """Write the little-endian binary container: n, L[], M[], re/im doubles."""
    with open(path, "wb") as fh:
        fh.write(struct.pack(_MAGIC_FMT, f.grid.n))
        fh.write(np.asarray(f.grid.L, dtype="<f8").tobytes())
        fh.write(np.asarray(f.grid.M, dtype="<u4").tobytes())
        flat = f.values.reshape(-1)
        inter = np.empty(2 * flat.size, dtype="<f8")
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def load_signal(path) -> SampledSignal:
    with open(path, "rb") as fh:
        (n,) = struct.unpack(_MAGIC_FMT, fh.read(4))
        L = np.frombuffer(fh.read(8 * n), dtype="<f8")
        M = np.frombuffer(fh.read(4 * n), dtype="<u4")
        size = int(np.prod(M))
        inter = np.frombuffer(fh.read(16 * size), dtype="<f8")
        vals = inter[0::2] + 1j * inter[1::2]
    return SampledSignal(Grid(tuple(L), tuple(int(m) for m in M)), vals.reshape(tuple(M)))


def signal_to_csv(f: SampledSignal, path) -> None:
    """Inspection CSV: one row per sample with indices, coordinates, re, im."""
    g = f.grid
    with open(path, "w") as fh:
        idx_hdr = ",".join(f"k{j}" for j in range(g.n))
        x_hdr = ",".join(f"x{j}" for j in range(g.n))
        fh.write(f"{idx_hdr},{x_hdr},re,im\n")
        for k in np.ndindex(*g.M):
            x = [g.axis_coords(j)[k[j]] for j in range(g.n)]
            v = f.values[k]
            row = ",".join(str(i) for i in k)
            row += "," + ",".join(format(c, ".17g") for c in x)
            fh.write(f"{row},{format(v.real, '.17g')},{format(v.imag, '.17g')}\n")
