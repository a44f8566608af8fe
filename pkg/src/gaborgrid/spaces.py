"""Weights and norm recipes for concrete function spaces on a grid.

A SpaceSpec is one of:

- ``Lp(p, weight)``: weighted Lebesgue norm ||f w||_p (Riemann sum).
- ``MixedLpq(p_inner, p_outer, weight, split)``: mixed norm with the inner
  exponent over the first block of axes and the outer one over the second,
  as used for joint time-frequency representations.
- ``FourierLp(p)``: ||F^{-1} f||_p, the image of the Lebesgue norm under the
  Fourier transform.  Unlike the solid norms above it is phase-sensitive.
- ``C0w(weight)``: weighted sup norm.  On a finite grid this coincides with
  weighted L^inf; the vanishing-at-infinity tail condition is vacuous here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, SampledSignal, inverse_fourier


@dataclass(frozen=True)
class Weight:
    """Positive weight function, evaluable on grids and at arbitrary points.

    kinds: "one" (constant 1), "poly" with w(x) = (1+|x|)^s where |x| is the
    torus-minimal Euclidean distance to 0, and "table" (values on a fixed
    grid).
    """

    kind: str = "one"
    exponent: float = 0.0
    table: SampledSignal | None = None

    def __post_init__(self):
        if self.kind not in ("one", "poly", "table"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "table":
            if self.table is None:
                raise ValueError("table weight needs values")
            v = self.table.values
            if np.any(np.abs(v.imag) > 0) or np.any(v.real <= 0):
                raise ValueError("tabulated weight must be strictly positive and real")

    @staticmethod
    def one() -> "Weight":
        return Weight("one")

    @staticmethod
    def poly(s: float) -> "Weight":
        return Weight("poly", exponent=float(s))

    @staticmethod
    def tabulated(values: SampledSignal) -> "Weight":
        return Weight("table", table=values)

    def on_grid(self, grid: Grid) -> np.ndarray:
        if self.kind == "one":
            return np.ones(grid.M)
        if self.kind == "poly":
            return (1.0 + grid.torus_distance()) ** self.exponent
        if self.table.grid != grid:
            raise ValueError("tabulated weight lives on a different grid")
        return self.table.values.real

    def at_points(self, points: np.ndarray, periods: tuple[float, ...] | None = None) -> np.ndarray:
        """Evaluate at an array of points of shape (..., n).

        Polynomial weights reduce coordinates torus-minimally when periods
        are given; tabulated weights are grid-bound and not supported here.
        """
        pts = np.asarray(points, dtype=float)
        if self.kind == "one":
            return np.ones(pts.shape[:-1])
        if self.kind == "table":
            raise ValueError("tabulated weights can only be evaluated on their grid")
        if periods is not None:
            per = np.asarray(periods, dtype=float)
            pts = (pts + per / 2) % per - per / 2
        return (1.0 + np.sqrt(np.sum(pts**2, axis=-1))) ** self.exponent

    def product(self, other: "Weight") -> "Weight":
        if self.kind == "one":
            return other
        if other.kind == "one":
            return self
        if self.kind == "poly" and other.kind == "poly":
            return Weight.poly(self.exponent + other.exponent)
        raise ValueError("cannot form the product of these weight kinds")


@dataclass(frozen=True)
class Lp:
    p: float
    weight: Weight = Weight.one()

    def __post_init__(self):
        _check_exponent(self.p)


@dataclass(frozen=True)
class MixedLpq:
    """Inner exponent p_inner over the first `split[0]` axes, outer p_outer
    (with the weight applied pointwise before either norm) over the rest."""

    p_inner: float
    p_outer: float
    weight: Weight = Weight.one()
    split: tuple[int, int] | None = None

    def __post_init__(self):
        _check_exponent(self.p_inner)
        _check_exponent(self.p_outer)


@dataclass(frozen=True)
class FourierLp:
    p: float

    def __post_init__(self):
        _check_exponent(self.p)


@dataclass(frozen=True)
class C0w:
    weight: Weight = Weight.one()


SpaceSpec = Lp | MixedLpq | FourierLp | C0w


def _check_exponent(p: float) -> None:
    if not (1 <= p):
        raise ValueError(f"Lebesgue exponent must satisfy 1 <= p <= inf, got {p}")


def _lp_reduce(a: np.ndarray, p: float, cell: float, axes: tuple[int, ...]) -> np.ndarray:
    if np.isinf(p):
        return np.max(a, axis=axes)
    return (np.sum(a**p, axis=axes) * cell) ** (1.0 / p)


def space_norm(f: SampledSignal, spec: SpaceSpec) -> float:
    """Evaluate the norm recipe on a sampled signal."""
    g = f.grid
    if isinstance(spec, Lp):
        a = np.abs(f.values) * spec.weight.on_grid(g)
        return float(_lp_reduce(a, spec.p, g.cell, tuple(range(g.n))))
    if isinstance(spec, C0w):
        a = np.abs(f.values) * spec.weight.on_grid(g)
        return float(np.max(a))
    if isinstance(spec, FourierLp):
        return space_norm(inverse_fourier(f), Lp(spec.p))
    if isinstance(spec, MixedLpq):
        n1, n2 = spec.split if spec.split is not None else (g.n // 2, g.n - g.n // 2)
        if n1 + n2 != g.n or n1 < 1 or n2 < 1:
            raise ValueError(f"split {(n1, n2)} does not partition {g.n} axes")
        a = np.abs(f.values) * spec.weight.on_grid(g)
        cell1 = float(np.prod(g.dx[:n1]))
        cell2 = float(np.prod(g.dx[n1:]))
        inner = _lp_reduce(a, spec.p_inner, cell1, tuple(range(n1)))
        return float(_lp_reduce(inner, spec.p_outer, cell2, tuple(range(inner.ndim))))
    raise TypeError(f"not a SpaceSpec: {spec!r}")


def lift_weight(w: Weight, grid: Grid, block: tuple[int, int]) -> Weight:
    """Tabulate on `grid` a weight that depends only on the axes in `block`.

    block = (start, stop) names the axis range the weight sees; on the other
    axes the lifted weight is constant.  Used to put a frequency-only weight
    on a phase-space grid.
    """
    start, stop = block
    sub = Grid(grid.L[start:stop], grid.M[start:stop])
    vals = w.on_grid(sub)
    shape = [1] * grid.n
    for j in range(start, stop):
        shape[j] = grid.M[j]
    table = np.broadcast_to(vals.reshape(shape), grid.M).astype(np.complex128)
    return Weight.tabulated(SampledSignal(grid, table.copy()))
