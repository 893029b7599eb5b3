"""Capacity measures of a finite constellation over the Rayleigh fast-fading channel.

Channel model: ``y = H x + z`` with ``H = diag(h_1..h_n)``, ``h_i`` Rayleigh with
``E[h_i^2] = 1`` and ``z_i ~ N(0, N0/2)``.

Deterministic measures (:func:`jensen_rate`, :func:`conditional_cutoff_rate`)
are evaluated in closed form.  Mutual information and CM capacity are Monte
Carlo estimates returned as :class:`Estimate` objects carrying a standard error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation

CONVENTIONS = {
    "per-nd": "Es=1 over all n real dims; Eb=Es/log2(M); N0=Eb*10^(-EbN0dB/10)",
    "per-2d": "Es=1 over all n real dims; Eb=Es/(2*log2(M)/n); N0=Eb*10^(-EbN0dB/10)",
}
DEFAULT_CONVENTION = "per-nd"

# Rows of the pair matrix processed per block; bounds memory at ~ROW_BLOCK * M * n floats.
ROW_BLOCK = 256


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level ``N0``, optionally with the E_b/N0 it was derived from."""

    n0: float
    ebn0_db: float | None = None
    bits_per_symbol: float | None = None
    convention: str | None = None

    def __post_init__(self):
        if not (self.n0 > 0 and math.isfinite(self.n0)):
            raise ValueError(f"N0 must be positive and finite, got {self.n0}")

    @classmethod
    def from_ebn0(
        cls,
        ebn0_db: float,
        M: int,
        n: int = 2,
        symbol_energy: float = 1.0,
        convention: str = DEFAULT_CONVENTION,
    ) -> "NoiseSpec":
        """Resolve E_b/N0 in dB for an ``M``-point constellation in ``R^n``.

        ``per-nd`` charges all ``log2(M)`` bits against the n-dimensional symbol
        energy.  ``per-2d`` charges the n-D symbol energy against the bits
        carried by one 2-D component, ``2 log2(M) / n``.  Both coincide for n=2.
        """
        if M < 2:
            raise ValueError("E_b/N0 is undefined for a constellation with fewer than 2 points")
        bits = math.log2(M)
        if convention == "per-nd":
            eb = symbol_energy / bits
        elif convention == "per-2d":
            eb = symbol_energy / (2 * bits / n)
        else:
            raise ValueError(f"unknown convention {convention!r}; choose from {sorted(CONVENTIONS)}")
        return cls(n0=eb * 10 ** (-ebn0_db / 10), ebn0_db=float(ebn0_db), bits_per_symbol=bits, convention=convention)

    @property
    def convention_text(self) -> str:
        if self.convention is None:
            return "N0 given directly"
        return CONVENTIONS[self.convention]


@dataclass(frozen=True)
class FadingRealization:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size < 1 or np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ValueError("fading coefficients must be finite and non-negative")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True)
class McConfig:
    seed: int = 0
    noise_samples: int = 1000
    fading_samples: int = 1000

    def __post_init__(self):
        if self.noise_samples < 1 or self.fading_samples < 1:
            raise ValueError("sample counts must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Estimate:
    value: float
    std_err: float

    def __iter__(self):
        return iter((self.value, self.std_err))


def _points(X) -> np.ndarray:
    return X.points if isinstance(X, Constellation) else np.atleast_2d(np.asarray(X, dtype=float))


def _pair_sum(pts: np.ndarray, kernel) -> float:
    """Sum ``kernel(x_j - x_k)`` over ordered pairs ``j != k`` in fixed block order.

    ``kernel`` must be even in its argument, so each unordered pair is
    evaluated once and counted twice.
    """
    M = len(pts)
    total = 0.0
    for start in range(0, M - 1, ROW_BLOCK):
        block = pts[start : start + ROW_BLOCK]
        vals = kernel(block[:, None, :] - pts[None, start:, :])
        total += float(np.triu(vals, 1).sum())
    return 2.0 * total


def _jensen_kernel(c: float):
    def k(d):
        d *= d
        d *= c
        d += 1.0
        return 1.0 / np.prod(d, axis=-1)

    return k


def jensen_rate(X, noise: NoiseSpec) -> float:
    """Fading-averaged cutoff-rate lower bound, in bits per symbol.

    ``log2 M - log2(1 + (1/M) sum_{x != y} prod_i 1 / (1 + (x_i - y_i)^2 / (4 N0)))``
    """
    pts = _points(X)
    M = len(pts)
    c = 1.0 / (4.0 * noise.n0)
    s = _pair_sum(pts, _jensen_kernel(c))
    return math.log2(M) - math.log2(1.0 + s / M)


def conditional_cutoff_rate(X, H: FadingRealization, noise: NoiseSpec) -> float:
    """Cutoff rate of the faded constellation ``H X`` for a fixed fading realization."""
    pts = _points(X)
    coeffs = H.coeffs if isinstance(H, FadingRealization) else np.asarray(H, dtype=float)
    if coeffs.shape != (pts.shape[1],):
        raise ValueError(f"fading of dimension {coeffs.size} does not match constellation dimension {pts.shape[1]}")
    M = len(pts)
    c = 1.0 / (4.0 * noise.n0)
    s = _pair_sum(pts * coeffs, lambda d: np.exp(-c * np.sum(d * d, axis=-1)))
    return math.log2(M) - math.log2(1.0 + s / M)


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for the named stream ``(seed, *stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=stream)))


FADING_STREAM = 0
NOISE_STREAM = 1


def sample_fading_coeffs(rng: np.random.Generator, size) -> np.ndarray:
    # density 2a exp(-a^2): a = sqrt(E) with E ~ Exp(1)
    return np.sqrt(rng.standard_exponential(size))


def sample_fading(n: int, rng: np.random.Generator) -> FadingRealization:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return FadingRealization(sample_fading_coeffs(rng, n))


def _mi_terms(pts: np.ndarray, i: int, z: np.ndarray, n0: float) -> np.ndarray:
    """Per-sample ``log2 sum_k exp((|z|^2 - |x_i - x_k + z|^2) / N0)`` for y = x_i + z.

    ``pts`` is ``(..., M, n)`` and ``z`` is ``(..., S, n)``; returns ``(..., S)``.
    """
    diff = pts[..., i : i + 1, :] - pts  # (..., M, n)
    e = (np.sum(z * z, axis=-1)[..., :, None] - np.sum((diff[..., None, :, :] + z[..., :, None, :]) ** 2, axis=-1)) / n0
    m = e.max(axis=-1, keepdims=True)
    lse = m[..., 0] + np.log(np.exp(e - m).sum(axis=-1))
    return lse / math.log(2)


def _noise(seed: int, i: int, shape, n0: float) -> np.ndarray:
    return make_rng(seed, NOISE_STREAM, i).standard_normal(shape) * math.sqrt(n0 / 2)


def awgn_mutual_information(X, noise: NoiseSpec, mc: McConfig = McConfig()) -> Estimate:
    """Monte Carlo estimate of the AWGN mutual information in bits per symbol.

    Every symbol is transmitted ``mc.noise_samples`` times with its own noise
    stream, so the estimate is stratified by symbol and the standard error is
    combined across strata.
    """
    pts = _points(X)
    M, n = pts.shape
    if M == 1:
        return Estimate(0.0, 0.0)
    S = mc.noise_samples
    means = np.empty(M)
    variances = np.empty(M)
    block = max(1, 2**22 // (M * n))
    for i in range(M):
        z = _noise(mc.seed, i, (S, n), noise.n0)
        terms = np.concatenate([_mi_terms(pts, i, z[s : s + block], noise.n0) for s in range(0, S, block)])
        means[i] = terms.mean()
        variances[i] = terms.var(ddof=1) if S > 1 else 0.0
    value = math.log2(M) - means.mean()
    return Estimate(float(value), float(math.sqrt(variances.sum() / S) / M))


def cm_capacity(X, noise: NoiseSpec, mc: McConfig = McConfig()) -> Estimate:
    """Monte Carlo CM capacity ``E_H I(Y; X | H)`` over Rayleigh fast fading.

    Draws ``mc.fading_samples`` fading realizations and, for each, estimates the
    AWGN mutual information of the faded constellation with ``mc.noise_samples``
    noise draws per symbol.  The standard error is that of the outer average.
    """
    pts = _points(X)
    M, n = pts.shape
    if M == 1:
        return Estimate(0.0, 0.0)
    F, S = mc.fading_samples, mc.noise_samples
    h = sample_fading_coeffs(make_rng(mc.seed, FADING_STREAM), (F, n))
    faded = pts[None, :, :] * h[:, None, :]  # (F, M, n)
    per_fade = np.zeros(F)
    block = max(1, 2**22 // (S * M * n))
    for i in range(M):
        z = _noise(mc.seed, i, (F, S, n), noise.n0)
        for start in range(0, F, block):
            sl = slice(start, start + block)
            per_fade[sl] += _mi_terms(faded[sl], i, z[sl], noise.n0).mean(axis=-1)
    per_fade = math.log2(M) - per_fade / M
    if F == 1:
        inner = awgn_mutual_information(faded[0], noise, mc)
        return Estimate(float(per_fade[0]), inner.std_err)
    return Estimate(float(per_fade.mean()), float(per_fade.std(ddof=1) / math.sqrt(F)))


def mean_cutoff_rate(X, noise: NoiseSpec, mc: McConfig = McConfig()) -> Estimate:
    """Monte Carlo average of the conditional cutoff rate over ``mc.fading_samples`` fadings."""
    pts = _points(X)
    M, n = pts.shape
    if M == 1:
        return Estimate(0.0, 0.0)
    F = mc.fading_samples
    h = sample_fading_coeffs(make_rng(mc.seed, FADING_STREAM), (F, n))
    vals = np.array([conditional_cutoff_rate(pts, h[f], noise) for f in range(F)])
    se = float(vals.std(ddof=1) / math.sqrt(F)) if F > 1 else 0.0
    return Estimate(float(vals.mean()), se)
