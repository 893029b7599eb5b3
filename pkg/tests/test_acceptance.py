"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py``; the lines are collected into the
"acceptance criteria" section of the terminal summary.
"""
import math
import time
from contextlib import contextmanager

import conftest
import numpy as np
import pytest
from oracles import naive_jensen_rate

from lierot.channel_objective import (
    McConfig,
    NoiseSpec,
    cm_capacity,
    jensen_rate,
    mean_cutoff_rate,
)
from lierot.constellation import (
    Constellation,
    NuqamParams,
    direct_product,
    make_nuqam,
    make_qam,
    normalize_unit_energy,
    rotate,
)
from lierot.lie_rotations import build_skew_generator, exp_skew, family_rotation
from lierot.optimizer import GridSpec, best_rotation_t, optimize_alpha, snr_sweep

pytestmark = pytest.mark.acceptance

T_STAR_4D = 0.8485
ALPHA_Q4 = (3.1903,)
ALPHA_Q6 = (2.8727, 4.9280, 7.3827)


@contextmanager
def criterion(name, budget_s):
    """Time a block, record a PASS/FAIL line and fail on error or overrun."""
    state = {"detail": ""}
    start = time.perf_counter()
    error = None
    try:
        yield state
    except AssertionError as exc:
        error = exc
    elapsed = time.perf_counter() - start
    over = elapsed > budget_s
    ok = error is None and not over
    parts = [f"{'PASS' if ok else 'FAIL'} {name}", f"{elapsed:.1f}s/{budget_s:g}s"]
    if state["detail"]:
        parts.append(state["detail"])
    if error is not None:
        parts.append(f"error: {error}")
    conftest.ACCEPTANCE_LINES.append(" | ".join(parts))
    if error is not None:
        raise error
    assert not over, f"{name} took {elapsed:.1f}s, budget {budget_s}s"


def rotated(X, t):
    k = int(math.log2(X.n))
    return rotate(normalize_unit_energy(X), family_rotation(build_skew_generator(k), t))


def test_c1_generator_algebra():
    with criterion("C1 generator algebra k=1..6", 5):
        rng = np.random.default_rng(1)
        worst_sq, worst_exp = 0.0, 0.0
        for k in range(1, 7):
            gen = build_skew_generator(k)
            A = gen.matrix
            assert np.array_equal(A.T, -A), f"k={k} not exactly skew"
            worst_sq = max(worst_sq, np.abs(A @ A + np.eye(2**k)).max())
            for t in rng.uniform(-2 * math.pi, 2 * math.pi, 100):
                worst_exp = max(worst_exp, np.abs(family_rotation(gen, t) - exp_skew(t * A)).max())
        assert worst_sq <= 1e-12, f"max |A^2+I| = {worst_sq:.3e}"
        assert worst_exp <= 1e-10, f"max |Q(t) - exp(tA)| = {worst_exp:.3e}"


def _closed_form(n, t):
    k = int(math.log2(n))
    pattern = build_skew_generator(k).unnormalized
    return math.cos(t) * np.eye(n) + math.sin(t) / math.sqrt(n - 1) * pattern


def test_c2_closed_form_matrices():
    with criterion("C2 Q4/Q8 closed forms", 1) as st:
        worst = 0.0
        for n in (4, 8):
            for t in (0.3, 1.0, 2.5):
                Q = family_rotation(build_skew_generator(int(math.log2(n))), t)
                worst = max(worst, np.abs(Q - _closed_form(n, t)).max())
        st["detail"] = f"max entry error {worst:.2e}"
        assert worst <= 1e-14


def test_c3_objective_oracle():
    with criterion("C3 jensen_rate vs naive oracle", 5) as st:
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(50):
            M, n = int(rng.integers(2, 17)), int(rng.integers(1, 5))
            X = Constellation(rng.normal(size=(M, n)))
            n0 = 10 ** rng.uniform(-2, 1)
            worst = max(worst, abs(jensen_rate(X, NoiseSpec(n0)) - naive_jensen_rate(X.points, n0)))
        hand = jensen_rate(Constellation([[0.0, 0.0], [2.0, 0.0]]), NoiseSpec(1.0))
        st["detail"] = f"max diff {worst:.2e}, hand value {hand:.6f}"
        assert worst <= 1e-12
        assert abs(hand - 0.415037) <= 1e-6


def test_c4_bound_chain():
    with criterion("C4 R <= mean R0 <= C_CM", 120) as st:
        rng = np.random.default_rng(4)
        for i in range(10):
            M, n = int(rng.integers(2, 9)), int(rng.integers(1, 5))
            X = normalize_unit_energy(Constellation(rng.normal(size=(M, n))))
            noise = NoiseSpec(10 ** rng.uniform(-1.5, 0.5))
            r = jensen_rate(X, noise)
            r0 = mean_cutoff_rate(X, noise, McConfig(seed=i, fading_samples=10_000))
            assert r <= r0.value + 3 * r0.std_err, f"constellation {i}: R={r} > R0={r0.value}+3*{r0.std_err}"
        X = normalize_unit_energy(make_qam(4))
        noise = NoiseSpec.from_ebn0(4, 4, 2)
        mc = McConfig(seed=44, noise_samples=1000, fading_samples=1000)
        r0 = mean_cutoff_rate(X, noise, mc)
        cm = cm_capacity(X, noise, mc)
        st["detail"] = f"4-QAM 4 dB: R0={r0.value:.4f} CM={cm.value:.4f}+-{cm.std_err:.1e}"
        assert r0.value <= cm.value + 3 * cm.std_err


def test_c5_rotation_optimum():
    with criterion("C5 4D 4-QAM t* at 6 dB", 30) as st:
        X = direct_product(make_qam(4), make_qam(4))
        found = {}
        for conv in ("per-nd", "per-2d"):
            res = best_rotation_t(X, NoiseSpec.from_ebn0(6, X.M, X.n, convention=conv))
            found[conv] = res.best_t
            if abs(res.best_t - T_STAR_4D) <= 0.03:
                break
        hits = [c for c, t in found.items() if abs(t - T_STAR_4D) <= 0.03]
        st["detail"] = ", ".join(f"{c}: t*={t:.5f}" for c, t in found.items())
        if hits:
            st["detail"] += f"; matched under {hits[0]}"
        assert hits, f"no convention within 0.03 of {T_STAR_4D}"


def _alpha_scan(q, ebn0_db, target):
    found = {}
    for conv in ("per-nd", "per-2d"):
        res = optimize_alpha(q, NoiseSpec.from_ebn0(ebn0_db, 2**q, 2, convention=conv))
        found[conv] = res
        if all(abs(a - b) <= 0.05 * b for a, b in zip(res.best_alpha, target)):
            return conv, found
    return None, found


def _fmt(alpha):
    return "(" + ", ".join(f"{a:.4f}" for a in alpha) + ")"


@pytest.mark.parametrize("q,ebn0_db,target", [(4, 8, ALPHA_Q4), (6, 12, ALPHA_Q6)], ids=["q4", "q6"])
def test_c6_shaping_optimum(q, ebn0_db, target):
    with criterion(f"C6 {2**q}-NUQAM alpha* at {ebn0_db} dB", 60) as st:
        hit, found = _alpha_scan(q, ebn0_db, target)
        st["detail"] = ", ".join(f"{c}: {_fmt(r.best_alpha)}" for c, r in found.items())
        st["detail"] += f"; target {_fmt(target)}"
        assert hit is not None, "no convention within 5% per component"


@pytest.mark.parametrize("q,ebn0_db", [(4, 8), (6, 12)], ids=["q4", "q6"])
def test_c6_shaping_beats_uniform(q, ebn0_db):
    with criterion(f"C6 {2**q}-NUQAM beats uniform at {ebn0_db} dB", 60) as st:
        noise = NoiseSpec.from_ebn0(ebn0_db, 2**q, 2)
        res = optimize_alpha(q, noise)
        uniform = jensen_rate(normalize_unit_energy(make_qam(2**q)), noise)
        st["detail"] = f"R(alpha*)={res.objective_at_best:.6f} R(uniform)={uniform:.6f}"
        assert res.objective_at_best > uniform


def _delta_rows(X, dbs):
    rows = snr_sweep({"x": X}, [("id", "identity"), ("opt", "family")], dbs)
    return {r["ebn0_db"]: r["delta_R_bits"] for r in rows if r["rotation_name"] == "opt"}


def test_c7_sweeps():
    with criterion("C7 sweep gains", 300) as st:
        nu16 = make_nuqam(NuqamParams(4, ALPHA_Q4))
        nu64 = make_nuqam(NuqamParams(6, ALPHA_Q6))
        d16 = _delta_rows(nu16, list(range(0, 11)))
        d64 = _delta_rows(nu64, list(range(0, 18)))
        st["detail"] = f"max dR 16-NUQAM {max(d16.values()):.4f}, 64-NUQAM {max(d64.values()):.4f}"
        assert min(d16.values()) >= 0 and min(d64.values()) >= 0
        assert max(d16.values()) > 1e-4
        assert max(d64.values()) > 1e-4


@pytest.mark.parametrize("M", [4, 16, 64])
def test_c7_high_snr_gain_vanishes(M):
    with criterion(f"C7 {M}-QAM dR at 40 dB", 60) as st:
        d40 = _delta_rows(make_qam(M), [40])[40]
        st["detail"] = f"dR={d40:.2e}, want <= 1e-3"
        assert abs(d40) <= 1e-3


@pytest.mark.parametrize("ebn0_db,target,tol", [(-40, 0.0, 1e-6), (60, 2.0, 1e-3)], ids=["low", "high"])
def test_c8_limits(ebn0_db, target, tol):
    with criterion(f"C8 rotated 4-QAM at {ebn0_db} dB", 10) as st:
        noise = NoiseSpec.from_ebn0(ebn0_db, 4, 2)
        res = best_rotation_t(make_qam(4), noise, GridSpec(coarse_points=512))
        st["detail"] = f"R={res.objective_at_best:.3e} at t={res.best_t:.4f}, want {target} +- {tol:g}"
        value = res.objective_at_best
        assert abs(value - target) <= tol


def test_c9_quarter_period():
    with criterion("C9 quarter-turn period of square QAM", 5) as st:
        worst = 0.0
        for M in (4, 16, 64):
            noise = NoiseSpec.from_ebn0(6, M, 2)
            X = make_qam(M)
            for t in np.linspace(0, 2 * math.pi, 100):
                worst = max(worst, abs(jensen_rate(rotated(X, t), noise) - jensen_rate(rotated(X, t + math.pi / 2), noise)))
        st["detail"] = f"max diff {worst:.2e}"
        assert worst <= 1e-12
