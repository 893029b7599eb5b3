"""Per-SNR optimization of rotation angle and NUQAM shaping levels.

The rotation search is exhaustive on a coarse grid over ``[t_min, t_max)``
followed by golden-section refinement around the best grid point.  Shaping
levels are tuned by projected gradient ascent with central finite differences
and an Armijo backtracking line search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel_objective import NoiseSpec, jensen_rate
from .constellation import Constellation, NuqamParams, nuqam_levels
from .lie_rotations import check_rotation, family_for_dimension

TIE_TOL = 1e-12
# refined peaks agreeing this closely are treated as symmetric copies of one optimum
PEAK_TIE_TOL = 1e-9
MAX_PEAKS = 8
INV_PHI = (math.sqrt(5) - 1) / 2


class LineSearchError(RuntimeError):
    """Backtracking failed to find an ascent step while the gradient was not small."""

    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class GridSpec:
    t_min: float = 0.0
    t_max: float = 2 * math.pi
    coarse_points: int = 2048
    refine_tol: float = 1e-6

    def __post_init__(self):
        if self.coarse_points < 1:
            raise ValueError("coarse_points must be >= 1")
        if self.coarse_points > 1 and not self.t_min < self.t_max:
            raise ValueError(f"need t_min < t_max, got [{self.t_min}, {self.t_max}]")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")

    @classmethod
    def single(cls, t: float = 0.0) -> "GridSpec":
        """Degenerate grid containing only ``t``; no refinement."""
        return cls(t_min=t, t_max=t, coarse_points=1)

    @classmethod
    def quarter_turn(cls, coarse_points: int = 512, refine_tol: float = 1e-6) -> "GridSpec":
        """Search ``[0, pi/2)``; valid when the constellation is invariant under a quarter turn."""
        return cls(0.0, math.pi / 2, coarse_points, refine_tol)

    def points(self) -> np.ndarray:
        if self.coarse_points == 1:
            return np.array([self.t_min])
        return np.linspace(self.t_min, self.t_max, self.coarse_points, endpoint=False)


@dataclass(frozen=True)
class DescentSettings:
    fd_step: float = 1e-4
    armijo: float = 1e-4
    grad_tol: float = 1e-6
    max_iter: int = 500
    initial_step: float = 1.0
    min_step: float = 1e-16
    margin: float = 1e-6


@dataclass
class OptimizationResult:
    objective_at_best: float
    objective_baseline: float
    best_t: float | None = None
    best_alpha: tuple[float, ...] | None = None
    trace: list = field(default_factory=list)
    converged: bool = True
    iterations: int = 0

    @property
    def improvement(self) -> float:
        return self.objective_at_best - self.objective_baseline


def rotation_objective(pts: np.ndarray, family, noise: NoiseSpec):
    """Return ``t -> R(Q(t) X)`` for an energy-normalized point array."""
    return lambda t: jensen_rate(pts @ family(t).T, noise)


def _golden_max(f, a: float, b: float, tol: float):
    """Golden-section search for a maximum of ``f`` on ``[a, b]``; returns ``(t, f(t), trace)``."""
    trace = []
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    trace += [(c, fc), (d, fd)]
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            trace.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            trace.append((d, fd))
    return (c, fc, trace) if fc >= fd else (d, fd, trace)


def _candidate_peaks(values: np.ndarray) -> list[int]:
    """Indices of grid local maxima that tie the best grid value or lie close to it."""
    v = values
    left = np.concatenate([[-np.inf], v[:-1]])
    right = np.concatenate([v[1:], [-np.inf]])
    idx = np.flatnonzero((v >= left) & (v >= right))
    top = v.max()
    # a coarse grid can rank symmetric copies of one peak in either order
    idx = idx[v[idx] >= top - max(1e-6, 1e-3 * abs(top))]
    order = sorted(idx.tolist(), key=lambda i: (-v[i], i))
    return order[:MAX_PEAKS]


def _normalized(X) -> np.ndarray:
    pts = X.points if isinstance(X, Constellation) else np.asarray(X, dtype=float)
    return pts / math.sqrt(np.mean(np.sum(pts**2, axis=1)))


def best_rotation_t(
    X,
    noise: NoiseSpec,
    grid: GridSpec = GridSpec(),
    family=None,
    extra_candidates=(),
    normalize: bool = True,
) -> OptimizationResult:
    """Maximize ``R(Q(t) X)`` over ``t`` for a one-parameter rotation family.

    ``family`` defaults to the built-in generator family for ``n = 2**k``.  The
    baseline ``t = 0`` and any ``extra_candidates`` are always evaluated, so the
    reported improvement is never negative.  Every near-best grid peak is
    refined; refined peaks within 1e-9 of the best are ties and the smallest
    ``t`` wins.
    """
    pts = _normalized(X) if normalize else (X.points if isinstance(X, Constellation) else np.asarray(X, float))
    if family is None:
        family = family_for_dimension(pts.shape[1])
    f = rotation_objective(pts, family, noise)

    grid_t = grid.points()
    grid_v = np.array([f(t) for t in grid_t])
    evaluated = dict(zip(grid_t.tolist(), grid_v.tolist()))
    baseline = evaluated[0.0] if 0.0 in evaluated else f(0.0)
    evaluated[0.0] = baseline
    for t in extra_candidates:
        evaluated.setdefault(float(t), f(float(t)))

    peaks = [(0.0, baseline)] + [(float(t), evaluated[float(t)]) for t in extra_candidates]
    if grid.coarse_points > 1:
        h = (grid.t_max - grid.t_min) / grid.coarse_points
        for i in _candidate_peaks(grid_v):
            lo, hi = max(grid_t[i] - h, grid.t_min), grid_t[i] + h
            t_star, v_star, refine = _golden_max(f, lo, hi, grid.refine_tol)
            for t, v in refine:
                evaluated.setdefault(t, v)
            peaks.append((t_star, v_star) if v_star > grid_v[i] else (float(grid_t[i]), float(grid_v[i])))
    else:
        peaks.append((float(grid_t[0]), float(grid_v[0])))

    trace = sorted(evaluated.items())
    top = max(v for _, v in peaks)
    best_t, best_v = min((p for p in peaks if p[1] >= top - PEAK_TIE_TOL), key=lambda p: p[0])
    return OptimizationResult(
        objective_at_best=best_v,
        objective_baseline=baseline,
        best_t=best_t,
        trace=trace,
    )


def _rot2(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [-s, c]])


def nuqam_points(alpha) -> np.ndarray:
    levels = nuqam_levels(alpha)
    return np.array(np.meshgrid(levels, levels, indexing="ij")).reshape(2, -1).T


def nuqam_objective(q: int, noise: NoiseSpec, t: float = 0.0):
    """Return ``alpha -> R(Q2(t) X(alpha))`` with energy normalization per evaluation."""
    Q = _rot2(t)

    def f(alpha) -> float:
        return jensen_rate(_normalized(nuqam_points(alpha)) @ Q.T, noise)

    return f


def _project(alpha: np.ndarray, margin: float) -> np.ndarray:
    out = np.array(alpha, dtype=float)
    floor = 1.0
    for j in range(len(out)):
        floor = out[j] = max(out[j], floor + margin)
    return out


def optimize_alpha(
    q: int,
    noise: NoiseSpec,
    init: NuqamParams | None = None,
    gd: DescentSettings = DescentSettings(),
    t: float = 0.0,
) -> OptimizationResult:
    """Gradient ascent of the Jensen rate over NUQAM levels (optionally rotated by ``Q2(t)``).

    Raises:
        LineSearchError: if no ascent step is found while the projected
            gradient is still above ``gd.grad_tol``.
    """
    init = init or NuqamParams.uniform(q)
    if init.q != q:
        raise ValueError(f"init is for q={init.q}, expected q={q}")
    f = nuqam_objective(q, noise, t)
    x = np.array(init.alpha)
    fx = f(x)
    baseline = fx
    trace = [(tuple(x), fx)]
    step = gd.initial_step
    converged = False
    it = 0
    for it in range(gd.max_iter + 1):
        h = gd.fd_step * np.abs(x)
        g = np.empty_like(x)
        for j in range(len(x)):
            e = np.zeros_like(x)
            e[j] = h[j]
            g[j] = (f(x + e) - f(x - e)) / (2 * h[j])
        pg = _project(x + g, gd.margin) - x
        if np.max(np.abs(pg)) < gd.grad_tol:
            converged = True
            break
        if it == gd.max_iter:
            break
        s = min(2 * step, 1e6)
        while True:
            xn = _project(x + s * g, gd.margin)
            fn = f(xn)
            if fn >= fx + gd.armijo * float(g @ (xn - x)) and fn >= fx:
                break
            s /= 2
            if s < gd.min_step:
                raise LineSearchError(
                    f"line search failed at iteration {it} with projected gradient {np.max(np.abs(pg)):.3g}", trace
                )
        x, fx, step = xn, fn, s
        trace.append((tuple(x), fx))
    return OptimizationResult(
        objective_at_best=fx,
        objective_baseline=baseline,
        best_alpha=tuple(float(a) for a in x),
        best_t=t,
        trace=trace,
        converged=converged,
        iterations=it,
    )


def joint_optimize(
    q: int,
    noise: NoiseSpec,
    grid: GridSpec = GridSpec(),
    gd: DescentSettings = DescentSettings(),
    init: NuqamParams | None = None,
    max_rounds: int = 20,
    tol: float = 1e-9,
) -> OptimizationResult:
    """Coordinate ascent over shaping levels and rotation angle of a 2-D NUQAM.

    Each round tunes ``alpha`` at the current angle, then re-searches ``t`` at
    the new levels (keeping the current angle as a candidate).  Stops when a
    round improves the objective by less than ``tol``.
    """
    init = init or NuqamParams.uniform(q)
    family = family_for_dimension(2)
    alpha, t = init.alpha, 0.0
    current = nuqam_objective(q, noise, t)(np.array(alpha))
    baseline = current
    trace = [(0, t, alpha, current)]
    converged = False
    for rnd in range(1, max_rounds + 1):
        shaped = optimize_alpha(q, noise, NuqamParams(q, alpha), gd, t)
        rot = best_rotation_t(nuqam_points(shaped.best_alpha), noise, grid, family, extra_candidates=(t,))
        gain = rot.objective_at_best - current
        alpha, t, current = shaped.best_alpha, rot.best_t, rot.objective_at_best
        trace.append((rnd, t, alpha, current))
        if gain < tol:
            converged = True
            break
    return OptimizationResult(
        objective_at_best=current,
        objective_baseline=baseline,
        best_t=t,
        best_alpha=tuple(alpha),
        trace=trace,
        converged=converged,
        iterations=len(trace) - 1,
    )


def snr_sweep(
    constellations: dict,
    rotations: list,
    ebn0_db,
    grid: GridSpec = GridSpec(),
    baselines: dict | None = None,
    convention: str = "per-nd",
) -> list[dict]:
    """Rate of each (constellation, rotation) pair across an E_b/N0 range.

    ``rotations`` holds ``(name, source)`` pairs where ``source`` is
    ``"identity"``, ``"family"`` (angle re-optimized at every dB value) or an
    explicit rotation matrix, which is skipped for constellations of another
    dimension.  ``delta_R_bits`` is measured against
    the unrotated constellation named in ``baselines`` (default: itself).
    """
    baselines = baselines or {}
    rows = []
    for db in ebn0_db:
        for cname, X in constellations.items():
            noise = NoiseSpec.from_ebn0(db, X.M, X.n, convention=convention)
            pts = _normalized(X)
            base = constellations[baselines[cname]] if cname in baselines else X
            base_r = jensen_rate(_normalized(base), NoiseSpec.from_ebn0(db, base.M, base.n, convention=convention))
            for rname, source in rotations:
                param = ""
                if isinstance(source, str) and source == "identity":
                    r = jensen_rate(pts, noise)
                    param = 0.0
                elif isinstance(source, str) and source == "family":
                    res = best_rotation_t(pts, noise, grid, normalize=False)
                    r, param = res.objective_at_best, res.best_t
                elif isinstance(source, str):
                    raise ValueError(f"unknown rotation source {source!r}")
                else:
                    Q = check_rotation(source)
                    if Q.shape[0] != X.n:
                        continue
                    r = jensen_rate(pts @ Q.T, noise)
                rows.append(
                    {
                        "ebn0_db": float(db),
                        "constellation": cname,
                        "rotation_name": rname,
                        "t_or_alpha": param,
                        "R_bits": r,
                        "delta_R_bits": r - base_r,
                    }
                )
    return rows
