"""Coarse-graining of lattice Boltzmann states: projection, reconstruction,
coarse-propagator error and hybrid fine/coarse marching.

Projection takes per-velocity block means over ``B`` consecutive sites.
Reconstruction methods:

* ``inject``: piecewise-constant copy of each block mean.
* ``linear``: periodic piecewise-linear interpolant whose block means equal
  the coarse values, ``R = R_lin (P R_lin)^-1`` with ``R_lin`` plain linear
  interpolation between block centres.
* ``least-squares``: the pseudo-inverse of ``P``.  For block means this is
  the minimal-norm right inverse and coincides with injection.

All three satisfy ``P R = I`` on the coarse space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .lbm import D1Q3, FlowState, LatticeModel, classical_lbm_run

METHODS = ("inject", "linear", "least-squares")


def _check_blocking(G_f: int, B: int) -> None:
    if B < 1 or G_f % B:
        raise DomainError(f"blocking factor {B} does not divide {G_f} sites")


def projection_matrix(G_f: int, B: int) -> np.ndarray:
    _check_blocking(G_f, B)
    G_c = G_f // B
    P = np.zeros((G_c, G_f))
    for k in range(G_c):
        P[k, k * B : (k + 1) * B] = 1.0 / B
    return P


def _plain_linear(G_f: int, B: int) -> np.ndarray:
    G_c = G_f // B
    R = np.zeros((G_f, G_c))
    for x in range(G_f):
        pos = (x + 0.5) / B - 0.5  # fine-site centre in coarse-index units
        k0 = int(np.floor(pos))
        t = pos - k0
        R[x, k0 % G_c] += 1.0 - t
        R[x, (k0 + 1) % G_c] += t
    return R


def reconstruction_matrix(G_f: int, B: int, method: str) -> np.ndarray:
    _check_blocking(G_f, B)
    if method not in METHODS:
        raise DomainError(f"unsupported reconstruction method {method!r}; choose from {METHODS}")
    P = projection_matrix(G_f, B)
    if B == 1:
        return np.eye(G_f)
    if method == "inject":
        return B * P.T
    if method == "linear":
        R = _plain_linear(G_f, B)
        return R @ np.linalg.inv(P @ R)
    return np.linalg.pinv(P)


@dataclass
class CoarseGrainPair:
    G_f: int
    B: int
    method: str = "linear"
    P: np.ndarray = field(init=False, repr=False)
    R: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.P = projection_matrix(self.G_f, self.B)
        self.R = reconstruction_matrix(self.G_f, self.B, self.method)

    @property
    def G_c(self) -> int:
        return self.G_f // self.B

    def project(self, state: FlowState) -> FlowState:
        if state.G != self.G_f:
            raise DomainError(f"state has {state.G} sites, pair expects {self.G_f}")
        return FlowState(state.f @ self.P.T)

    def reconstruct(self, state: FlowState) -> FlowState:
        if state.G != self.G_c:
            raise DomainError(f"state has {state.G} sites, pair expects {self.G_c}")
        return FlowState(state.f @ self.R.T)

    def saving_factor(self, d: int = 1) -> float:
        """Resource saving ``B^(d+1)`` from blocking ``d`` space dimensions and time."""
        return float(self.B ** (d + 1))


def project(state: FlowState, B: int) -> FlowState:
    return FlowState(state.f @ projection_matrix(state.G, B).T)


def reconstruct(state: FlowState, B: int, method: str = "linear") -> FlowState:
    return FlowState(state.f @ reconstruction_matrix(state.G * B, B, method).T)


def coarse_omega(omega: float, B: int) -> float:
    """Relaxation rate giving the same physical viscosity on a lattice with
    spacing and time step both scaled by ``B``:
    ``1/omega' - 1/2 = (1/omega - 1/2) / B``."""
    if B == 1:
        return omega
    return 1.0 / (0.5 + (1.0 / omega - 0.5) / B)


Solver = Callable[[FlowState, int], FlowState]


@dataclass(frozen=True)
class LBMSolver:
    """Classical BGK propagator ``(state, steps) -> state``."""

    omega: float
    model: LatticeModel = D1Q3

    def __call__(self, state: FlowState, steps: int) -> FlowState:
        return classical_lbm_run(state, self.omega, steps, self.model)

    def coarsened(self, B: int) -> "LBMSolver":
        return LBMSolver(coarse_omega(self.omega, B), self.model)


def _coarse_steps(steps: int, B: int) -> int:
    if steps % B:
        raise DomainError(f"{steps} fine steps is not a multiple of B = {B}")
    return steps // B


def coarse_stretch(
    coarse_solver: Solver, pair: CoarseGrainPair, state: FlowState, steps: int
) -> FlowState:
    """Reconstruct-evolve-project over ``steps`` fine steps (``steps / B`` coarse)."""
    return pair.reconstruct(
        coarse_solver(pair.project(state), _coarse_steps(steps, pair.B))
    )


def state_distance(a: FlowState, b: FlowState) -> float:
    return float(np.linalg.norm(a.f - b.f))


def coarse_grain_error(
    fine_solver: Solver,
    coarse_solver: Solver,
    pair: CoarseGrainPair,
    psi0: FlowState,
    t: int,
) -> float:
    """``|| tau_t psi0 - R T_t P psi0 ||`` with ``t`` counted in fine steps."""
    fine = fine_solver(psi0, t)
    return state_distance(fine, coarse_stretch(coarse_solver, pair, psi0, t))


@dataclass
class HybridReport:
    final: FlowState
    reference: FlowState
    all_coarse: FlowState
    err_hybrid: float
    err_coarse: float
    saving_factor: float
    # (step, err_hybrid, err_coarse, saving_factor) at each segment end
    history: list = field(default_factory=list)

    @property
    def healed(self) -> bool:
        return self.err_hybrid <= self.err_coarse


def hybrid_march(
    fine_solver: Solver,
    coarse_solver: Solver,
    pair: CoarseGrainPair,
    psi0: FlowState,
    schedule: Sequence[tuple[str, int]],
) -> HybridReport:
    """March through ``schedule`` segments ``("fine" | "coarse", steps)`` and
    compare the endpoint with the all-fine reference and the all-coarse
    baseline.  Durations count fine steps."""
    if not schedule:
        raise DomainError("empty schedule")
    for scale, duration in schedule:
        if scale not in ("fine", "coarse"):
            raise DomainError(f"unknown segment scale {scale!r}")
        if duration <= 0:
            raise DomainError(f"segment duration must be positive, got {duration}")
        if scale == "coarse":
            _coarse_steps(duration, pair.B)
    total = 0
    state = ref = psi0
    history = []
    fine_steps = 0
    for scale, duration in schedule:
        if scale == "fine":
            state = fine_solver(state, duration)
            fine_steps += duration
        else:
            state = coarse_stretch(coarse_solver, pair, state, duration)
        ref = fine_solver(ref, duration)
        total += duration
        baseline = coarse_stretch(coarse_solver, pair, psi0, total) if total % pair.B == 0 else None
        history.append(
            (
                total,
                state_distance(state, ref),
                state_distance(baseline, ref) if baseline is not None else float("nan"),
                _effective_saving(pair, total, fine_steps),
            )
        )
    all_coarse = coarse_stretch(coarse_solver, pair, psi0, total)
    return HybridReport(
        final=state,
        reference=ref,
        all_coarse=all_coarse,
        err_hybrid=state_distance(state, ref),
        err_coarse=state_distance(all_coarse, ref),
        saving_factor=_effective_saving(pair, total, fine_steps),
        history=history,
    )


def _effective_saving(pair: CoarseGrainPair, total: int, fine_steps: int) -> float:
    """All-fine cost over hybrid cost, with coarse work cheaper by ``B^2``."""
    coarse_steps = total - fine_steps
    cost = fine_steps + coarse_steps / pair.saving_factor()
    return total / cost if cost else pair.saving_factor()
