"""Hadamard matrices, skew-symmetric generators and one-parameter rotation families.

The generator ``A`` of order ``n = 2**k`` is built from the Sylvester Hadamard
recursion and scaled so that ``A @ A == -I``.  That makes the rotation family
``exp(A t)`` collapse to ``cos(t) I + sin(t) A``, which is what
:func:`family_rotation` evaluates.  :func:`exp_skew` is a generic matrix
exponential kept as an independent cross-check and for user generators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MAX_K = 12
ROTATION_TOL = 1e-10
SKEW_TOL = 1e-12


class SizeGuardError(ValueError):
    """Requested matrix order is beyond the supported size."""


def _check_k(k: int, lowest: int) -> int:
    if isinstance(k, bool) or int(k) != k:
        raise TypeError(f"k must be an integer, got {k!r}")
    k = int(k)
    if k < lowest:
        raise ValueError(f"k must be >= {lowest}, got {k}")
    if k > MAX_K:
        raise SizeGuardError(f"k={k} exceeds size guard k <= {MAX_K} ({2**MAX_K}x{2**MAX_K})")
    return k


def build_hadamard(k: int) -> np.ndarray:
    """Sylvester Hadamard matrix of order ``2**k`` as an int64 array."""
    k = _check_k(k, 0)
    H = np.ones((1, 1), dtype=np.int64)
    for _ in range(k):
        H = np.block([[H, H], [H, -H]])
    return H


def _unnormalized_skew(k: int) -> np.ndarray:
    # A'_1 = [0];  A'_{2m} = [[A'_m, H_m], [-H_m, A'_m]]
    A = np.zeros((1, 1), dtype=np.int64)
    H = np.ones((1, 1), dtype=np.int64)
    for _ in range(k):
        A = np.block([[A, H], [-H, A]])
        H = np.block([[H, H], [H, -H]])
    return A


@dataclass(frozen=True)
class SkewGenerator:
    """Normalized skew generator ``A = scale * A'`` of order ``2**k``."""

    k: int
    unnormalized: np.ndarray = field(repr=False)
    scale: float

    @property
    def n(self) -> int:
        return 2**self.k

    @property
    def matrix(self) -> np.ndarray:
        return self.scale * self.unnormalized


def build_skew_generator(k: int) -> SkewGenerator:
    k = _check_k(k, 1)
    Ap = _unnormalized_skew(k)
    Ap.setflags(write=False)
    return SkewGenerator(k=k, unnormalized=Ap, scale=(2**k - 1) ** -0.5)


def family_rotation(gen: SkewGenerator, t: float) -> np.ndarray:
    """Return ``exp(A t) = cos(t) I + sin(t) A`` for the generator ``gen``."""
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    return math.cos(t) * np.eye(gen.n) + math.sin(t) * gen.matrix


def is_skew(A: np.ndarray, tol: float = SKEW_TOL) -> bool:
    A = np.asarray(A, dtype=float)
    return A.ndim == 2 and A.shape[0] == A.shape[1] and np.linalg.norm(A + A.T) < tol


def exp_skew(A: np.ndarray) -> np.ndarray:
    """Matrix exponential of a skew-symmetric matrix.

    Scaling and squaring: ``A`` is divided by ``2**s`` until its 1-norm is at
    most 0.5, the Taylor series is summed until a term drops below 1e-18 in
    max-norm, and the result is squared ``s`` times.

    Raises:
        ValueError: if ``A`` is not square or not skew-symmetric.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not is_skew(A):
        raise ValueError("matrix is not skew-symmetric")
    n = A.shape[0]
    norm1 = np.abs(A).sum(axis=0).max() if n else 0.0
    s = 0
    while norm1 > 0.5:
        norm1 /= 2
        s += 1
    B = A / 2**s
    result = np.eye(n)
    term = np.eye(n)
    j = 1
    while True:
        term = term @ B / j
        result = result + term
        if np.abs(term).max() < 1e-18:
            break
        j += 1
    for _ in range(s):
        result = result @ result
    return check_rotation(result)


def rotation_residuals(Q: np.ndarray) -> tuple[float, float]:
    """Return ``(||Q Q^T - I||_F, |det Q - 1|)``."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    return float(np.linalg.norm(Q @ Q.T - np.eye(n))), float(abs(np.linalg.det(Q) - 1.0))


def is_rotation(Q: np.ndarray, tol: float = ROTATION_TOL) -> bool:
    Q = np.asarray(Q)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] == 0:
        return False
    orth, det = rotation_residuals(Q)
    return orth < tol and det < tol


def check_rotation(Q: np.ndarray, tol: float = ROTATION_TOL) -> np.ndarray:
    """Return ``Q`` as a float array, raising ``ValueError`` unless it lies in SO(n)."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] == 0:
        raise ValueError(f"rotation must be a non-empty square matrix, got shape {Q.shape}")
    orth, det = rotation_residuals(Q)
    if orth >= tol:
        raise ValueError(f"matrix is not orthogonal: ||QQ^T - I||_F = {orth:.3g}")
    if det >= tol:
        raise ValueError(f"determinant differs from 1 by {det:.3g}")
    return Q


def realify(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    """Replace every complex entry ``a + bi`` by the real block ``[[a, -b], [b, a]]``."""
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    if re.shape != im.shape or re.ndim != 2:
        raise ValueError(f"real and imaginary parts must be matching 2-D arrays, got {re.shape} and {im.shape}")
    rows, cols = re.shape
    out = np.empty((2 * rows, 2 * cols))
    out[0::2, 0::2] = re
    out[0::2, 1::2] = -im
    out[1::2, 0::2] = im
    out[1::2, 1::2] = re
    return out


@dataclass(frozen=True)
class OneParamFamily:
    """The curve ``t -> exp(A t)`` in SO(n).

    Uses the closed form whenever ``A @ A == -I``; any other skew generator
    falls back to :func:`exp_skew`.
    """

    generator: np.ndarray = field(repr=False)
    period: float | None = None
    _closed_form: bool = field(default=False, repr=False)

    @classmethod
    def power_of_two(cls, k: int) -> "OneParamFamily":
        A = build_skew_generator(k).matrix
        A.setflags(write=False)
        return cls(generator=A, period=2 * math.pi, _closed_form=True)

    @classmethod
    def from_generator(cls, A: np.ndarray) -> "OneParamFamily":
        A = np.array(A, dtype=float)
        if not is_skew(A):
            raise ValueError("generator is not skew-symmetric")
        closed = bool(np.abs(A @ A + np.eye(A.shape[0])).max() < SKEW_TOL)
        A.setflags(write=False)
        return cls(generator=A, period=2 * math.pi if closed else None, _closed_form=closed)

    @property
    def n(self) -> int:
        return self.generator.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        if self._closed_form:
            if not math.isfinite(t):
                raise ValueError(f"t must be finite, got {t}")
            return math.cos(t) * np.eye(self.n) + math.sin(t) * self.generator
        return exp_skew(self.generator * t)


def family_for_dimension(n: int) -> OneParamFamily:
    """Built-in family for ``n = 2**k``; raises ``ValueError`` otherwise."""
    if n < 2 or n & (n - 1):
        raise ValueError(f"dimension {n} is not a power of two >= 2; supply a generator")
    return OneParamFamily.power_of_two(n.bit_length() - 1)


RotationFamily = Callable[[float], np.ndarray]
