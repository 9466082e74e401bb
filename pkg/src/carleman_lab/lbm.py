"""D1Q3 lattice Boltzmann (BGK) solver and its second-order Carleman embedding.

Populations are stored as arrays of shape ``(Q, G)``; flattened vectors use
index ``i * G + x`` (velocity-major, row-major).  Boundaries are periodic.

The equilibrium keeps ``rho ~ 1`` in its quadratic term,

    f_eq_i = w_i (rho + c_i j / cs2 + (c_i^2 - cs2) j^2 / (2 cs2^2)),

so the collision is exactly quadratic in ``f`` and the Carleman hierarchy
closes on ``{f, f ⊗ f}`` up to the dropped third-order variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .carleman import DEFAULT_MAX_DIM, CarlemanMatrix, PolynomialSystem, build_carleman
from .errors import DomainError, InstabilityError, ResourceError

OVERFLOW_THRESHOLD = 1e12


@dataclass(frozen=True)
class LatticeModel:
    c: np.ndarray
    w: np.ndarray
    cs2: float

    @property
    def Q(self) -> int:
        return len(self.c)

    @classmethod
    def d1q3(cls) -> "LatticeModel":
        return cls(np.array([-1, 0, 1]), np.array([1 / 6, 2 / 3, 1 / 6]), 1 / 3)

    @property
    def cs(self) -> float:
        return float(np.sqrt(self.cs2))


D1Q3 = LatticeModel.d1q3()


@dataclass
class FlowState:
    f: np.ndarray  # (Q, G)

    @property
    def G(self) -> int:
        return self.f.shape[1]

    @property
    def rho(self) -> np.ndarray:
        return self.f.sum(axis=0)

    def momentum(self, model: LatticeModel = D1Q3) -> np.ndarray:
        return model.c @ self.f

    @property
    def mass(self) -> float:
        return float(self.f.sum())

    def total_momentum(self, model: LatticeModel = D1Q3) -> float:
        return float(self.momentum(model).sum())

    def vector(self) -> np.ndarray:
        return self.f.reshape(-1)

    def copy(self) -> "FlowState":
        return FlowState(self.f.copy())


def equilibrium(model: LatticeModel, rho, j) -> np.ndarray:
    """Equilibrium populations; scalar inputs give shape ``(Q,)``, arrays of
    shape ``(G,)`` give ``(Q, G)``."""
    rho = np.asarray(rho, dtype=float)
    j = np.asarray(j, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("density must be positive")
    c = model.c.reshape((-1,) + (1,) * rho.ndim).astype(float)
    w = model.w.reshape(c.shape)
    cs2 = model.cs2
    return w * (rho + c * j / cs2 + (c * c - cs2) * j * j / (2 * cs2 * cs2))


def _check_omega(omega: float) -> None:
    if not 0 <= omega < 2:
        raise DomainError(f"relaxation rate must satisfy 0 <= omega < 2, got {omega}")


def collide(state: FlowState, omega: float, model: LatticeModel = D1Q3) -> FlowState:
    f = state.f
    feq = equilibrium(model, f.sum(axis=0), model.c @ f)
    return FlowState(f + omega * (feq - f))


def stream(state: FlowState, model: LatticeModel = D1Q3) -> FlowState:
    """``f_i(x) <- f_i(x - c_i)`` with periodic wrap."""
    return FlowState(
        np.stack([np.roll(state.f[i], int(c)) for i, c in enumerate(model.c)])
    )


def classical_lbm_step(
    state: FlowState, omega: float, model: LatticeModel = D1Q3
) -> FlowState:
    _check_omega(omega)
    out = stream(collide(state, omega, model), model)
    if not np.all(np.abs(out.f) <= OVERFLOW_THRESHOLD):
        raise InstabilityError("population exceeded overflow threshold")
    return out


def classical_lbm_run(
    state: FlowState, omega: float, steps: int, model: LatticeModel = D1Q3
) -> FlowState:
    for _ in range(steps):
        state = classical_lbm_step(state, omega, model)
    return state


def sine_initial_state(
    model: LatticeModel, G: int, mach: float, density_amplitude: float = 1e-2
) -> FlowState:
    """Equilibrium state with ``rho = 1 + A sin(2 pi x / G)`` and
    ``j = Mach cs sin(2 pi x / G)``."""
    s = np.sin(2 * np.pi * np.arange(G) / G)
    rho = 1.0 + density_amplitude * s
    j = mach * model.cs * s
    return FlowState(equilibrium(model, rho, j))


def rest_state(model: LatticeModel, G: int) -> FlowState:
    return FlowState(equilibrium(model, np.ones(G), np.zeros(G)))


# -- operator assembly -------------------------------------------------------


def streaming_matrix(model: LatticeModel, G: int) -> sp.csr_matrix:
    """Permutation matrix of the streaming step on flattened populations."""
    rows, cols = [], []
    for i, c in enumerate(model.c):
        for x in range(G):
            rows.append(i * G + (x + int(c)) % G)
            cols.append(i * G + x)
    N1 = model.Q * G
    return sp.csr_matrix((np.ones(N1), (rows, cols)), shape=(N1, N1))


def collision_system(model: LatticeModel, G: int, omega: float) -> PolynomialSystem:
    """Collision increment ``omega (f_eq(f) - f)`` as ``F1 f + F2 (f ⊗ f)``."""
    Q, N1 = model.Q, model.Q * G
    c = model.c.astype(float)
    cs2 = model.cs2
    local_eq = model.w[:, None] * (1.0 + np.outer(c, c) / cs2)
    F1_local = omega * (local_eq - np.eye(Q))
    F1 = np.kron(F1_local, np.eye(G))
    F2 = sp.lil_matrix((N1, N1 * N1))
    quad = omega * model.w * (c * c - cs2) / (2 * cs2 * cs2)
    for x in range(G):
        for i in range(Q):
            for a in range(Q):
                for b in range(Q):
                    v = quad[i] * c[a] * c[b]
                    if v:
                        F2[i * G + x, (a * G + x) * N1 + b * G + x] = v
    return PolynomialSystem(F1, F2.tocsr())


@dataclass(frozen=True)
class CLB2System:
    """Second-order Carleman embedding of the lattice Boltzmann step.

    One lattice step acts on ``v = [f, f ⊗ f]`` as
    ``step = diag(S, S ⊗ S) @ (I + generator)``, with ``S`` the streaming
    permutation and ``generator`` the order-2 Carleman matrix of the
    collision increment.
    """

    model: LatticeModel
    G: int
    omega: float
    mach: float
    generator: CarlemanMatrix = field(repr=False)
    streaming: sp.csr_matrix = field(repr=False)
    step: sp.csr_matrix = field(repr=False)

    @property
    def N1(self) -> int:
        return self.model.Q * self.G

    @property
    def total_dim(self) -> int:
        return self.N1 + self.N1**2

    def lift(self, state: FlowState) -> np.ndarray:
        f = state.vector()
        return np.concatenate([f, np.kron(f, f)])

    def initial_state(self) -> FlowState:
        return sine_initial_state(self.model, self.G, self.mach)


def build_clb2(
    model: LatticeModel,
    G: int,
    omega: float,
    mach: float = 0.05,
    max_dim: int = DEFAULT_MAX_DIM,
) -> CLB2System:
    if G < 2:
        raise DomainError(f"G must be >= 2, got {G}")
    _check_omega(omega)
    N1 = model.Q * G
    if N1 + N1 * N1 > max_dim:
        raise ResourceError(f"CLB2 dimension {N1 + N1 * N1} exceeds cap {max_dim}")
    gen = build_carleman(collision_system(model, G, omega), 2, max_dim=max_dim)
    S = streaming_matrix(model, G)
    S_hat = sp.block_diag([S, sp.kron(S, S)], format="csr")
    step = (S_hat @ (sp.identity(gen.total_dim, format="csr") + gen.matrix)).tocsr()
    step.eliminate_zeros()
    return CLB2System(model, G, omega, mach, gen, S, step)


@dataclass
class CLB2Run:
    steps: np.ndarray
    linf_error: np.ndarray
    mass_drift: np.ndarray
    momentum_drift: np.ndarray
    final: FlowState
    reference: FlowState

    @property
    def max_error(self) -> float:
        return float(self.linf_error.max()) if self.linf_error.size else 0.0

    def rows(self):
        return zip(
            self.steps.tolist(),
            self.linf_error.tolist(),
            self.mass_drift.tolist(),
            self.momentum_drift.tolist(),
        )


def clb2_evolve(
    system: CLB2System, initial: Optional[FlowState], steps: int
) -> CLB2Run:
    """March the CLB2 vector alongside the classical solver and record the
    L-infinity deviation of the first block after every step.  Drifts are
    measured on the CLB2 first block relative to the initial sums."""
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    if initial is None:
        initial = system.initial_state()
    if initial.G != system.G:
        raise DomainError(f"state has G={initial.G}, system has G={system.G}")
    model = system.model
    v = system.lift(initial)
    ref = initial.copy()
    m0, p0 = initial.mass, initial.total_momentum(model)
    N1 = system.N1
    err = np.empty(steps)
    dm = np.empty(steps)
    dp = np.empty(steps)
    for n in range(steps):
        v = system.step @ v
        if not np.all(np.abs(v) <= OVERFLOW_THRESHOLD):
            raise InstabilityError(f"CLB2 state exceeded overflow threshold at step {n + 1}")
        ref = classical_lbm_step(ref, system.omega, model)
        f = v[:N1].reshape(model.Q, system.G)
        err[n] = np.abs(f - ref.f).max()
        dm[n] = f.sum() - m0
        dp[n] = (model.c @ f).sum() - p0
    final = FlowState(v[:N1].reshape(model.Q, system.G).copy())
    return CLB2Run(np.arange(1, steps + 1), err, dm, dp, final, ref)
