"""Lattices Lambda = A Z^n, dual lattices, and their alignment with grids.

A lattice is grid-aligned when every generator lands on sample points and
the lattice wraps to a subgroup of the discrete torus whose size matches
prod L_j / |det A|.  Enumeration returns one representative per torus
period together with integer lattice coordinates m (the vector with
lambda = A m), chosen torus-minimally; summation weights are indexed by
these coordinates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import Grid

DET_EPS = 1e-12
ALIGN_RTOL = 1e-9


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice generated by the columns of A."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise LatticeError(f"generator matrix must be square, got shape {A.shape}")
        if abs(np.linalg.det(A)) < DET_EPS:
            raise LatticeError("generator matrix is singular")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @staticmethod
    def diagonal(*steps: float) -> "Lattice":
        return Lattice(np.diag(np.asarray(steps, dtype=float)))

    @staticmethod
    def from_string(text: str) -> "Lattice":
        """Parse "diag:2,4" or "mat:2,1;0,2" (rows separated by ';')."""
        kind, _, body = text.partition(":")
        if kind == "diag":
            return Lattice.diagonal(*(float(v) for v in body.split(",")))
        if kind == "mat":
            rows = [[float(v) for v in row.split(",")] for row in body.split(";")]
            return Lattice(np.array(rows))
        raise LatticeError(f"cannot parse lattice spec {text!r}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @cached_property
    def is_diagonal(self) -> bool:
        off = self.A - np.diag(np.diag(self.A))
        return bool(np.all(off == 0))

    def volume(self) -> float:
        return float(abs(np.linalg.det(self.A)))

    def dual(self) -> "Lattice":
        return Lattice(np.linalg.inv(self.A).T)

    def point(self, m) -> np.ndarray:
        return self.A @ np.asarray(m, dtype=float)


def shortest_vector_inf(lat: Lattice) -> float:
    """Min sup-norm over nonzero lattice vectors, by bounded enumeration."""
    A = lat.A
    # |A m|_inf >= |m|_inf / |A^{-1}|_inf, so vectors longer than the best
    # candidate column cannot beat it once |m|_inf exceeds the bound below.
    best = float(np.min(np.max(np.abs(A), axis=0)))
    R = int(np.ceil(np.linalg.norm(np.linalg.inv(A), np.inf) * best)) + 1
    rng = range(-R, R + 1)
    grids = np.meshgrid(*([list(rng)] * lat.n), indexing="ij")
    ms = np.stack([g.reshape(-1) for g in grids], axis=1)
    ms = ms[np.any(ms != 0, axis=1)]
    norms = np.max(np.abs(ms @ A.T), axis=1)
    return float(np.min(norms))


@dataclass(frozen=True)
class Box:
    """Open symmetric box prod_j (-h_j, h_j)."""

    halfwidths: tuple[float, ...]

    def contains_only_origin(self, lat: Lattice) -> bool:
        """Whether 2*Box meets the lattice only at 0 (disjoint translates)."""
        s = shortest_vector_inf(lat)
        return all(2 * h <= s + 1e-12 for h in self.halfwidths)


def separation_box(lat: Lattice) -> Box:
    """An open box U around 0 with {lambda + U} pairwise disjoint.

    Diagonal lattices get the full cell box prod (-a_j/2, a_j/2); general
    ones get the cube inscribed via the shortest lattice vector.  Any valid
    U induces the same discrete norms up to equivalence, so the particular
    choice is free.
    """
    if lat.is_diagonal:
        return Box(tuple(abs(a) / 2 for a in np.diag(lat.A)))
    s = shortest_vector_inf(lat)
    return Box((s / 2,) * lat.n)


@dataclass
class LatticePoints:
    """Enumeration of Lambda inside one torus period of a grid."""

    lattice: Lattice
    grid: Grid
    indices: np.ndarray  # (P, n) integer grid indices
    coords: np.ndarray   # (P, n) canonical coordinates in [0, L)
    lat_coords: np.ndarray  # (P, n) integer lattice coordinates m, torus-minimal

    @property
    def count(self) -> int:
        return self.indices.shape[0]

    def flat_indices(self) -> np.ndarray:
        return np.ravel_multi_index(self.indices.T, self.grid.M)

    def centered_coords(self) -> np.ndarray:
        L = np.asarray(self.grid.L)
        return (self.coords + L / 2) % L - L / 2


def enumerate_lattice(lat: Lattice, grid: Grid) -> LatticePoints:
    """All lattice points in one period, with grid indices and coordinates.

    Raises LatticeError when the lattice is not aligned with the grid or the
    wrapped subgroup size does not match prod L_j / vol(Lambda).
    """
    if lat.n != grid.n:
        raise LatticeError(f"lattice dimension {lat.n} != grid dimension {grid.n}")
    dx = np.asarray(grid.dx)
    M = np.asarray(grid.M)
    # generators must sit on sample points
    steps = np.empty((lat.n, lat.n), dtype=np.int64)
    for col in range(lat.n):
        q = lat.A[:, col] / dx
        k = np.round(q)
        bad = np.abs(q - k) > ALIGN_RTOL * np.maximum(1.0, np.abs(q))
        if np.any(bad):
            axis = int(np.argmax(bad))
            raise LatticeError(
                f"generator {col} is off-grid on axis {axis}: "
                f"{lat.A[axis, col]} is not a multiple of spacing {dx[axis]}"
            )
        steps[:, col] = k.astype(np.int64)

    expected = grid.volume / lat.volume()
    count = round(expected)
    if abs(expected - count) > 1e-9 * max(1.0, expected) or count < 1:
        if lat.is_diagonal:
            ratios = np.asarray(grid.L) / np.diag(lat.A)
            axis = int(np.argmax(np.abs(ratios - np.round(ratios))))
            raise LatticeError(
                f"lattice does not tile the torus: L/a = {ratios[axis]} "
                f"is not an integer on axis {axis}"
            )
        raise LatticeError(
            f"lattice does not tile the torus: prod L / vol = {expected} is not integral"
        )

    if lat.is_diagonal:
        per_axis = [int(round(grid.L[j] / lat.A[j, j])) for j in range(lat.n)]
        ranges = [np.arange(p) - p // 2 for p in per_axis]
        mesh = np.meshgrid(*ranges, indexing="ij")
        ms = np.stack([g.reshape(-1) for g in mesh], axis=1)
        idx = (ms * np.diag(steps)) % M
    else:
        # close the subgroup generated by the columns; BFS order keeps the
        # recorded lattice coordinate of each point torus-minimal in |m|_1
        seen = {(0,) * lat.n: np.zeros(lat.n, dtype=np.int64)}
        queue = deque([(0,) * lat.n])
        gens = [(tuple(steps[:, c] % M), np.eye(lat.n, dtype=np.int64)[c]) for c in range(lat.n)]
        gens += [(tuple((-steps[:, c]) % M), -np.eye(lat.n, dtype=np.int64)[c]) for c in range(lat.n)]
        while queue:
            cur = queue.popleft()
            mcur = seen[cur]
            for gstep, gm in gens:
                nxt = tuple((np.asarray(cur) + gstep) % M)
                if nxt not in seen:
                    seen[nxt] = mcur + gm
                    queue.append(nxt)
        if len(seen) != count:
            raise LatticeError(
                f"lattice wraps to {len(seen)} torus points, expected {count}; "
                "generators are incommensurable with the period"
            )
        items = sorted(seen.items())
        idx = np.array([k for k, _ in items], dtype=np.int64)
        ms = np.array([m for _, m in items], dtype=np.int64)

    count_actual = idx.shape[0]
    if count_actual != count or len({tuple(r) for r in idx}) != count:
        raise LatticeError(
            f"enumerated {count_actual} lattice points, expected {count}"
        )
    coords = idx * dx
    return LatticePoints(lat, grid, idx.astype(np.int64), coords, ms.astype(np.int64))


# ---------------------------------------------------------------------------
# Coupling matrices for twisted translations


@dataclass(frozen=True)
class Coupling:
    """Real matrix defining the quadratic phase of twisted translations."""

    B: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise LatticeError(f"coupling matrix must be square, got {B.shape}")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)

    @staticmethod
    def zero(n: int) -> "Coupling":
        return Coupling(np.zeros((n, n)))

    @staticmethod
    def stft(n: int) -> "Coupling":
        """The 2n x 2n block matrix [[0,0],[I,0]] on phase space (x, xi).

        Twisted shifts with this coupling are exactly the phase-space shifts
        under which the STFT is covariant.
        """
        B = np.zeros((2 * n, 2 * n))
        B[n:, :n] = np.eye(n)
        return Coupling(B)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def T(self) -> "Coupling":
        return Coupling(self.B.T.copy())

    def __neg__(self) -> "Coupling":
        return Coupling(-self.B)

    @cached_property
    def is_zero(self) -> bool:
        return bool(np.all(self.B == 0))

    def is_stft(self) -> bool:
        if self.n % 2:
            return False
        return bool(np.array_equal(self.B, Coupling.stft(self.n // 2).B))
