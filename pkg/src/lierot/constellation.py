"""Finite signal constellations in R^n: uniform QAM, non-uniform QAM and products."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Constellation:
    """An ordered set of ``M`` distinct points in ``R^n`` stored as an ``(M, n)`` array."""

    points: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be a non-empty (M, n) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("constellation points must be distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def mean_energy(self) -> float:
        return float(np.mean(np.sum(self.points**2, axis=1)))

    def __len__(self) -> int:
        return self.M

    def __eq__(self, other):
        if not isinstance(other, Constellation):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))

    __hash__ = None


@dataclass(frozen=True)
class NuqamParams:
    """Shaping levels of a ``2**q``-point NUQAM: per-axis amplitudes ``{1, *alpha}``."""

    q: int
    alpha: tuple[float, ...]

    def __post_init__(self):
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        object.__setattr__(self, "alpha", alpha)
        if self.q < 4 or self.q % 2:
            raise ValueError(f"q must be an even integer >= 4, got {self.q}")
        if len(alpha) != self.q - 3:
            raise ValueError(f"q={self.q} needs {self.q - 3} alpha values, got {len(alpha)}")
        if 2 ** (self.q // 2 - 1) != self.q - 2:
            raise ValueError(
                f"q={self.q}: the per-axis set {{±1, ±α_1..±α_{self.q - 3}}} has {2 * (self.q - 2)} levels, "
                f"but a square {2**self.q}-point grid needs {2 ** (self.q // 2)}; only q=4 and q=6 are consistent"
            )
        if alpha[0] <= 1 or any(b <= a for a, b in zip(alpha, alpha[1:])):
            raise ValueError(f"alpha must satisfy 1 < α_1 < α_2 < ...; got {alpha}")

    @classmethod
    def uniform(cls, q: int) -> "NuqamParams":
        """Levels ``3, 5, 7, ...`` which recover uniform QAM."""
        return cls(q, tuple(float(2 * i + 3) for i in range(q - 3)))


def _grid(levels: np.ndarray, label: str) -> Constellation:
    pts = np.array(list(itertools.product(levels, repeat=2)), dtype=float)
    return Constellation(pts, label)


def qam_levels(M: int) -> np.ndarray:
    if isinstance(M, bool) or int(M) != M or M < 4:
        raise ValueError(f"M must be a power of four >= 4, got {M}")
    M = int(M)
    side = math.isqrt(M)
    if side * side != M or side & (side - 1):
        raise ValueError(f"M={M} is not a power of two with even exponent (4, 16, 64, ...)")
    return np.arange(-(side - 1), side, 2, dtype=float)


def make_qam(M: int) -> Constellation:
    """Uniform square ``M``-QAM on the odd-integer grid, ordered by level index."""
    return _grid(qam_levels(M), f"{M}-QAM")


def nuqam_levels(alpha) -> np.ndarray:
    pos = np.concatenate([[1.0], np.asarray(alpha, dtype=float)])
    return np.concatenate([-pos[::-1], pos])


def make_nuqam(params: NuqamParams) -> Constellation:
    alpha = ", ".join(f"{a:g}" for a in params.alpha)
    return _grid(nuqam_levels(params.alpha), f"{2**params.q}-NUQAM(alpha=({alpha}))")


def direct_product(X1: Constellation, X2: Constellation) -> Constellation:
    """Cartesian product; point ``(i, j)`` sits at index ``i * M2 + j``."""
    a = np.repeat(X1.points, X2.M, axis=0)
    b = np.tile(X2.points, (X1.M, 1))
    return Constellation(np.hstack([a, b]), f"{X1.label} x {X2.label}")


def normalize_unit_energy(X: Constellation) -> Constellation:
    energy = X.mean_energy
    if energy == 0:
        raise ValueError("cannot normalize an all-zero constellation")
    return Constellation(X.points / math.sqrt(energy), X.label)


def rotate(X: Constellation, Q: np.ndarray) -> Constellation:
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (X.n, X.n):
        raise ValueError(f"rotation of shape {Q.shape} does not match dimension {X.n}")
    return Constellation(X.points @ Q.T, X.label)
