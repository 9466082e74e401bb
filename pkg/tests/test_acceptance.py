"""Acceptance suite: one test per criterion, each with its runtime budget.

The terminal summary (see conftest.py) prints one PASS/FAIL line per
criterion.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from carleman_lab import advantage as adv
from carleman_lab import reports
from carleman_lab.block_encoding import (
    apply_postselect,
    dilate,
    direction_error,
    log10_cumulative,
    multi_step_success,
    pad_state,
    pad_to_power_of_two,
    spectral_norm,
)
from carleman_lab.carleman import LogisticParams, blowup_time, min_truncation_order
from carleman_lab.lbm import D1Q3, build_clb2, clb2_evolve, sine_initial_state
from carleman_lab.multiscale import (
    METHODS,
    CoarseGrainPair,
    LBMSolver,
    coarse_grain_error,
    hybrid_march,
)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def logistic_oracle(x0, R, a, t):
    """Independent form of the logistic solution: 1 / x = R + (1/x0 - R) e^{a t}."""
    return 1.0 / (R + (1.0 / x0 - R) * np.exp(a * np.asarray(t)))


def test_criterion_1_logistic_reproduction():
    """logistic closed form, blow-up time, decreasing truncation errors"""
    with Timer() as clock:
        header1, rows1 = reports.fig1()
        header2, rows2 = reports.fig2()
        t_blow = blowup_time(LogisticParams(2.0, 1.0, 1.5))
    t1 = np.array([r[0] for r in rows1])
    stable = np.array([r[1] for r in rows1])
    assert np.max(np.abs(stable - logistic_oracle(0.5, 1.5, 1.0, t1))) <= 1e-9

    t_star = math.log(1.5)
    assert abs(t_blow - t_star) <= 1e-3
    first_masked = next(r[0] for r in rows1 if r[2] is None)
    assert abs(first_masked - t_star) <= 1e-3
    unstable = [r[2] for r in rows1 if r[2] is not None]
    assert unstable[-1] > 1e2  # diverging ahead of t*

    t2 = np.array([r[0] for r in rows2])
    np.testing.assert_allclose(
        [r[1] for r in rows2], logistic_oracle(0.5, 1.5, 1.0, t2), atol=1e-9
    )
    i = int(np.argmin(np.abs(t2 - 2.0)))
    assert t2[i] == pytest.approx(2.0, abs=1e-12)
    eps = [abs(rows2[i][1] - rows2[i][2 + j]) for j in range(4)]
    assert all(a > b for a, b in zip(eps, eps[1:]))
    assert eps[0] == pytest.approx(0.12484, abs=1e-4)
    assert clock.elapsed < 1.0


def test_criterion_2_truncation_order_map():
    """k_min monotone in R toward R -> 2 at each tolerance, k_min = 1 as R -> 0+"""
    with Timer() as clock:
        header, rows = reports.fig4()
    assert clock.elapsed < 60.0
    Rs = sorted({r[0] for r in rows})
    eps = sorted({r[1] for r in rows})
    assert (len(Rs), len(eps)) == (100, 50)
    table = {(r[0], r[1]): (r[2] if r[2] is not None else math.inf) for r in rows}
    for le in eps:
        column = [table[(R, le)] for R in Rs]
        assert all(a <= b for a, b in zip(column, column[1:]))
        assert column[-1] > column[0]
    for le in eps:
        assert min_truncation_order(LogisticParams(0.5, 1.0, 1e-8), 10**le, 2.0) == 1


def test_criterion_3_clb2_vs_classical():
    """CLB2 error <= 1e-3 at Mach 0.05 and halving Mach cuts it by >= 3"""
    with Timer() as clock:
        err = {
            m: clb2_evolve(build_clb2(D1Q3, 16, 1.0, m), None, 100).max_error
            for m in (0.05, 0.025)
        }
    assert err[0.05] <= 1e-3
    assert err[0.05] / err[0.025] >= 3.0
    assert clock.elapsed < 60.0


def _encoding_targets():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 17))
        yield f"random-{seed}", rng.standard_normal((dim, dim)), rng.standard_normal(dim)
    sys_ = build_clb2(D1Q3, 4, 1.0)
    yield "clb2-G4", sys_.step, sys_.lift(sys_.initial_state())


def test_criterion_4_block_encoding_exactness():
    """unitarity/block residuals, post-selection probability, 10-step direction"""
    with Timer() as clock:
        for name, A, v0 in _encoding_targets():
            Ap = pad_to_power_of_two(A)
            be = dilate(Ap, q_a=1)
            assert be.unitarity_residual() <= 1e-10, name
            assert be.block_residual(Ap) <= 1e-10, name
            psi = pad_state(v0, Ap.shape[0])
            psi = psi / np.linalg.norm(psi)
            _, p = apply_postselect(be, psi)
            dense = (Ap / spectral_norm(Ap)) @ psi
            assert abs(p - float(dense @ dense)) <= 1e-12, name
            res = multi_step_success(be, psi, 10)
            v = psi.copy()
            for t in range(1, 11):
                v = Ap @ v  # classical Euler march
                assert direction_error(res.states[t], v) <= 1e-8, (name, t)
    assert clock.elapsed < 60.0


def test_criterion_5_advantage_golden_values():
    """msp, qubit and flop golden values, 10^-4000 cumulative success"""
    with Timer() as clock:
        p = adv.msp(1e27, 1e9, 2)
        assert p == pytest.approx(0.99999994, abs=1e-8)
        assert 1.0 - p == pytest.approx(5.7e-8, abs=1e-8)
        assert adv.msp(1e9, 10, 2) == pytest.approx(0.18, abs=0.01)
        assert adv.qubit_count(1e9, 2) == 60
        assert adv.FlowScenario("r", Re=1e4).flops == pytest.approx(1e15, rel=1e-12)
        assert log10_cumulative([1e-4] * 1000) == -4000.0
    assert clock.elapsed < 1.0


def test_criterion_6_fig6_structure():
    """monotone in T, strictly ordered by G, one crossing per bar, max_steps"""
    with Timer() as clock:
        header, rows = reports.fig6()
        n_s = len(adv.DEFAULT_SCENARIOS)
        curves = np.array([r[1 : 1 + n_s] for r in rows]).T
        bars = np.array(rows[0][1 + n_s :])
        for c in curves:
            assert np.all(np.diff(c) > 0)
        # curves at fixed T are strictly ordered by grid size
        # (msp decreases with G; see the notes for the direction)
        Gs = [s.G for s in adv.DEFAULT_SCENARIOS]
        order = np.argsort(Gs)
        for j in range(1, curves.shape[1]):
            assert np.all(np.diff(curves[order, j]) < 0)
        for c, s in zip(curves, adv.DEFAULT_SCENARIOS):
            for q, bar in zip(range(1, len(bars) + 1), bars):
                above = c > bar
                assert np.count_nonzero(np.diff(above.astype(int))) == 1
                crossing_T = int(np.argmax(above)) + 1
                assert crossing_T == adv.max_steps(s.G, s.k, q) + 1
        for s in adv.DEFAULT_SCENARIOS:
            for q in range(1, 11):
                T = adv.max_steps(s.G, s.k, q)
                bound = 2.0 ** (-2 * q)
                assert T == 0 or adv.msp(s.G, T, s.k) <= bound
                assert adv.msp(s.G, T + 1, s.k) > bound
    assert clock.elapsed < 1.0


def test_criterion_7_multiscale():
    """B=1 exact, P R = I, hybrid <= all-coarse, linear beats injection"""
    with Timer() as clock:
        psi0 = sine_initial_state(D1Q3, 64, 0.05)
        fine = LBMSolver(1.0)
        assert coarse_grain_error(fine, fine.coarsened(1), CoarseGrainPair(64, 1), psi0, 40) == 0.0
        for method in METHODS:
            for B in (2, 4, 8):
                pair = CoarseGrainPair(64, B, method)
                assert np.abs(pair.P @ pair.R - np.eye(64 // B)).max() <= 1e-12
        schedule = reports.alternating_schedule(8, 2, 40)
        hybrid = {}
        for method in ("inject", "linear"):
            pair = CoarseGrainPair(64, 2, method)
            rep = hybrid_march(fine, fine.coarsened(2), pair, psi0, schedule)
            assert rep.err_hybrid <= rep.err_coarse
            hybrid[method] = rep
        assert hybrid["linear"].err_hybrid < hybrid["inject"].err_hybrid
        assert hybrid["linear"].err_coarse < hybrid["inject"].err_coarse
    assert clock.elapsed < 60.0


ACCEPTANCE_COMMANDS = [
    ["fig1"],
    ["fig2"],
    ["fig3"],
    ["fig4"],
    ["fig6"],
    ["lbm-error"],
    ["lbm-error", "--mach", "0.025"],
    ["block-encode"],
    ["block-encode", "--target", "random", "--seed", "11"],
    ["advantage-report"],
    ["multiscale"],
    ["multiscale", "--method", "inject"],
]


def test_criterion_8_determinism(tmp_path):
    """repeated runs of every acceptance command are byte-identical"""
    procs = []
    for i, args in enumerate(ACCEPTANCE_COMMANDS):
        for rep in range(2):
            out = tmp_path / f"{i}-{rep}.csv"
            cmd = [sys.executable, "-m", "carleman_lab.cli", *args, "--out", str(out)]
            procs.append((args, out, subprocess.Popen(cmd, stderr=subprocess.PIPE)))
    for args, _, proc in procs:
        _, err = proc.communicate(timeout=300)
        assert proc.returncode == 0, (args, err.decode())
    for i, args in enumerate(ACCEPTANCE_COMMANDS):
        a = (tmp_path / f"{i}-0.csv").read_bytes()
        b = (tmp_path / f"{i}-1.csv").read_bytes()
        assert a and a == b, args
