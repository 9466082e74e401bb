"""Tables behind each CLI command, as ``(header, rows)`` pairs."""
from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from . import advantage as adv
from .block_encoding import (
    SparseMatrixDesc,
    dilate,
    euler_step_matrix,
    multi_step_success,
    pad_state,
    pad_to_power_of_two,
)
from .carleman import (
    DEFAULT_DT,
    LogisticParams,
    build_carleman,
    integrate_truncations,
    lift,
    logistic_exact,
    singularity_time,
    truncation_errors,
    truncation_order_map,
)
from .errors import ConfigError
from .lbm import D1Q3, build_clb2, clb2_evolve, sine_initial_state
from .multiscale import CoarseGrainPair, LBMSolver, hybrid_march
from .pauli import pauli_decompose

Table = tuple[list[str], list[tuple]]


def open_unit_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` evenly spaced interior points of ``(lo, hi)``."""
    return np.linspace(lo, hi, n + 2)[1:-1]


def fig1(
    x0_stable: float = 0.5,
    x0_unstable: float = 2.0,
    R: float = 1.5,
    a: float = 1.0,
    t_end: float = 3.0,
    n_points: int = 3001,
) -> Table:
    """Stable and unstable logistic branches; the unstable column is masked
    at and beyond its singularity time."""
    ps = LogisticParams(x0_stable, a, R)
    pu = LogisticParams(x0_unstable, a, R)
    t_star = singularity_time(pu) if pu.r > 1 else math.inf
    ts = np.linspace(0.0, t_end, n_points)
    stable = logistic_exact(ps, ts)
    rows = []
    for t, xs in zip(ts.tolist(), np.atleast_1d(stable).tolist()):
        xu = logistic_exact(pu, t) if t < t_star else None
        rows.append((t, xs, xu))
    return ["t", "x_stable", "x_unstable"], rows


def fig2(
    x0: float = 0.5,
    R: float = 1.5,
    a: float = 1.0,
    t_end: float = 4.0,
    k_list: Sequence[int] = (1, 2, 3, 4),
    dt: float = DEFAULT_DT,
    sample_every: int = 10,
) -> Table:
    p = LogisticParams(x0, a, R)
    traj = integrate_truncations(p, k_list, t_end, dt, sample_every)
    exact = np.atleast_1d(logistic_exact(p, traj.t))
    header = ["t", "exact"] + [f"x_k{k}" for k in k_list]
    rows = [
        (t, e, *xs)
        for t, e, xs in zip(traj.t.tolist(), exact.tolist(), traj.x.tolist())
    ]
    return header, rows


def fig3(
    x0: float = 0.5,
    a: float = 1.0,
    t: float = 2.0,
    n_R: int = 100,
    k_list: Sequence[int] = (1, 2, 3),
    dt: float = DEFAULT_DT,
) -> Table:
    R_max = 1.0 / x0
    Rs = open_unit_grid(0.0, R_max, n_R)
    params = [LogisticParams(x0, a, float(R)) for R in Rs for _ in k_list]
    ks = [int(k) for _ in Rs for k in k_list]
    errs = truncation_errors(params, ks, t, dt).reshape(len(Rs), len(k_list))
    header = ["R"] + [f"eps_k{k}" for k in k_list]
    rows = [(float(R), *map(float, e)) for R, e in zip(Rs, errs)]
    return header, rows


def fig4(
    x0: float = 0.5,
    a: float = 1.0,
    t: float = 2.0,
    n_R: int = 100,
    n_eps: int = 50,
    log10_eps_min: float = -6.0,
    log10_eps_max: float = -1.0,
    k_cap: int = 128,
    dt: float = DEFAULT_DT,
) -> Table:
    Rs = open_unit_grid(0.0, 1.0 / x0, n_R)
    log_eps = np.linspace(log10_eps_min, log10_eps_max, n_eps)
    kmap = truncation_order_map(Rs, 10.0**log_eps, x0, a, t, k_cap, dt)
    rows = []
    for i, R in enumerate(Rs.tolist()):
        for j, le in enumerate(log_eps.tolist()):
            k = int(kmap[i, j])
            rows.append((R, le, k if k else None))
    return ["R", "log10_eps", "k_min"], rows


def _g_label(s: adv.FlowScenario) -> str:
    return f"p_min_G1e{s.log10_G:.6g}"


def fig6(
    T_max: int = 100,
    q_a: Sequence[int] = (1, 2, 3, 4, 5, 6, 7),
    scenarios: Optional[Sequence[adv.FlowScenario]] = None,
    k: int = 2,
    log_base: str = "e",
) -> Table:
    scenarios = list(scenarios or adv.DEFAULT_SCENARIOS)
    header = ["T"] + [_g_label(s) for s in scenarios] + [f"bound_qa{q}" for q in q_a]
    bounds = [2.0 ** (-2 * q) for q in q_a]
    rows = []
    for T in range(1, T_max + 1):
        vals = [adv.msp(s.G, T, k, log_base) for s in scenarios]
        rows.append((T, *vals, *bounds))
    return header, rows


def advantage_report(
    scenarios: Optional[Sequence[adv.FlowScenario]] = None,
    log_base: str = "e",
) -> Table:
    """One row per (scenario, ancilla count)."""
    scenarios = list(scenarios or adv.DEFAULT_SCENARIOS)
    header = [
        "name", "Re", "G", "T_classical", "N_dof", "flops", "k", "qubits",
        "q_a", "ancilla_bound", "max_steps", "p_min_T1", "p_min_T1_log2",
        "qubit_ratio_T1", "p_min_T10", "p_min_Tclassical",
    ]
    rows = []
    for s in scenarios:
        d = adv.scenario_derive(s)
        ratio, _ = adv.one_step_threshold(s.G, s.k)
        common = (
            s.name, d["Re"], d["G"], d["T_classical"], d["N_dof"], d["flops"],
            s.k, adv.qubit_count(s.G, s.k),
        )
        for q in s.q_a:
            T_max = adv.max_steps(s.G, s.k, q, log_base)
            rows.append(
                common
                + (
                    q,
                    2.0 ** (-2 * q),
                    T_max,
                    adv.msp(s.G, 1, s.k, log_base),
                    adv.msp(s.G, 1, s.k, "2"),
                    ratio,
                    adv.msp(s.G, 10, s.k, log_base),
                    adv.msp(s.G, d["T_classical"], s.k, log_base),
                )
            )
    return header, rows


def lbm_error(
    G: int = 16, omega: float = 1.0, mach: float = 0.05, steps: int = 100
) -> Table:
    run = clb2_evolve(build_clb2(D1Q3, G, omega, mach), None, steps)
    return ["step", "linf_error", "mass_drift", "momentum_drift"], list(run.rows())


def step_target(
    target: str = "clb2",
    G: int = 4,
    omega: float = 1.0,
    mach: float = 0.05,
    x0: float = 0.5,
    a: float = 1.0,
    R: float = 1.5,
    k_max: int = 2,
    dt: float = 0.1,
    matrix: Optional[SparseMatrixDesc] = None,
    seed: int = 0,
    dim: int = 8,
):
    """Step matrix and unnormalized initial vector for ``block-encode``."""
    if target == "clb2":
        sys = build_clb2(D1Q3, G, omega, mach)
        return sys.step, sys.lift(sys.initial_state())
    if target == "logistic":
        p = LogisticParams(x0, a, R)
        C = build_carleman(p.system(), k_max)
        return euler_step_matrix(C, dt), lift(x0, k_max)
    if target == "random":
        rng = np.random.default_rng(seed)
        return rng.standard_normal((dim, dim)), rng.standard_normal(dim)
    if target == "file":
        if matrix is None:
            raise ConfigError("target 'file' needs matrix_in")
        return matrix.to_csr(), np.ones(matrix.dim)
    raise ConfigError(f"unknown target {target!r}; choose clb2, logistic, random or file")


def block_encode(A, v0: np.ndarray, steps: int = 10, q_a: int = 1):
    """Dilate ``A`` and march ``steps`` post-selected steps from ``v0``.

    Returns the step table, the Pauli decay table and the multi-step result.
    """
    Ap = pad_to_power_of_two(A)
    be = dilate(Ap, q_a=q_a)
    psi = pad_state(v0, Ap.shape[0])
    psi = psi / np.linalg.norm(psi)
    result = multi_step_success(be, psi, steps)
    step_table = (["step", "p_step", "log10_cumulative"], result.rows())
    decay = pauli_decompose(Ap).decay()
    pauli_table = (["rank", "abs_c"], [(l, float(c)) for l, c in enumerate(decay, start=1)])
    return step_table, pauli_table, result


def multiscale(
    G_f: int = 64,
    B: int = 2,
    method: str = "linear",
    omega: float = 1.0,
    mach: float = 0.05,
    coarse_len: int = 8,
    fine_len: int = 2,
    total: int = 40,
) -> Table:
    pair = CoarseGrainPair(G_f, B, method)
    fine = LBMSolver(omega)
    schedule = alternating_schedule(coarse_len, fine_len, total)
    rep = hybrid_march(fine, fine.coarsened(B), pair, sine_initial_state(D1Q3, G_f, mach), schedule)
    return ["step", "err_hybrid", "err_coarse", "saving_factor"], rep.history


def alternating_schedule(coarse_len: int, fine_len: int, total: int) -> list[tuple[str, int]]:
    """Coarse/fine segments of the given lengths until ``total`` fine steps."""
    if coarse_len <= 0 or fine_len <= 0 or total <= 0:
        raise ConfigError("segment lengths and total must be positive")
    out, done = [], 0
    while done < total:
        for scale, n in (("coarse", coarse_len), ("fine", fine_len)):
            n = min(n, total - done)
            if n > 0:
                out.append((scale, n))
                done += n
    return out
