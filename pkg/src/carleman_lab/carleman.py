"""Carleman linearization of quadratic ODE systems.

A system ``dx/dt = F1 x + F2 (x ⊗ x)`` is lifted to the linear hierarchy over
the tensor powers ``x_k = x^{⊗k}``, truncated at ``k_max`` by dropping
``x_{k_max+1}``.  The logistic equation ``dx/dt = -a x + b x^2`` is provided as
an exactly solvable test case.

Tensor powers use row-major lexicographic ordering (the ``np.kron``
convention) and are not symmetrized, so block ``k`` has ``n**k`` entries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, InstabilityError, ResourceError

DEFAULT_DT = 1e-3
OVERFLOW_THRESHOLD = 1e12
DEFAULT_MAX_DIM = 1 << 22
DENSE_MATVEC_DIM = 64
# real-axis stability limit of classical RK4
RK4_STABILITY = 2.785


@dataclass(frozen=True)
class PolynomialSystem:
    """``dx/dt = F1 @ x + F2 @ kron(x, x)``."""

    F1: np.ndarray
    F2: np.ndarray

    def __post_init__(self):
        F1, F2 = (
            F.tocsr().astype(float) if sp.issparse(F) else np.atleast_2d(np.asarray(F, float))
            for F in (self.F1, self.F2)
        )
        n = F1.shape[0]
        if n < 1 or F1.shape != (n, n):
            raise DomainError(f"F1 must be square with n >= 1, got shape {F1.shape}")
        if F2.shape != (n, n * n):
            raise DomainError(f"F2 must have shape ({n}, {n * n}), got {F2.shape}")
        for F in (F1, F2):
            if not np.all(np.isfinite(F.data if sp.issparse(F) else F)):
                raise DomainError("coefficient maps must have finite entries")
        object.__setattr__(self, "F1", F1)
        object.__setattr__(self, "F2", F2)

    @property
    def n(self) -> int:
        return self.F1.shape[0]

    @classmethod
    def linear(cls, F1) -> "PolynomialSystem":
        F1 = np.atleast_2d(np.asarray(F1, dtype=float))
        n = F1.shape[0]
        return cls(F1, np.zeros((n, n * n)))

    def rhs(self, x: np.ndarray) -> np.ndarray:
        return self.F1 @ x + self.F2 @ np.kron(x, x)


@dataclass(frozen=True)
class LogisticParams:
    """Logistic equation ``dx/dt = -a x + b x^2`` with ``b = R a``."""

    x0: float
    a: float
    R: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"dissipation rate a must be positive, got {self.a}")
        if not self.R > 0:
            raise DomainError(f"nonlinearity ratio R must be positive, got {self.R}")

    @property
    def b(self) -> float:
        return self.R * self.a

    @property
    def r(self) -> float:
        return self.R * self.x0

    def system(self) -> PolynomialSystem:
        return PolynomialSystem([[-self.a]], [[self.b]])


def singularity_time(p: LogisticParams) -> float:
    """Blow-up time ``a^-1 ln(r / (r - 1))`` of the unstable branch."""
    r = p.r
    if r <= 1:
        raise DomainError(f"no finite-time singularity for r = {r} <= 1")
    return math.log(r / (r - 1.0)) / p.a


def logistic_exact(p: LogisticParams, t):
    """Closed-form logistic solution; ``t`` may be a scalar or an array."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("t must be nonnegative")
    decay = np.exp(-p.a * t_arr)
    denom = 1.0 - p.r + p.r * decay
    if np.any(denom <= 0):
        raise DomainError(
            f"t beyond the singularity time t* = {singularity_time(p)!r}"
        )
    out = p.x0 * decay / denom
    return float(out) if out.ndim == 0 else out


def blowup_time(
    p: LogisticParams,
    dt: float = 1e-4,
    threshold: float = OVERFLOW_THRESHOLD,
    t_max: float = 100.0,
) -> Optional[float]:
    """Integrate the nonlinear logistic ODE with RK4 and return the first time
    ``|x|`` exceeds ``threshold``, or None if it never does before ``t_max``."""
    a, b = p.a, p.b

    def f(x):
        return -a * x + b * x * x

    x, t = float(p.x0), 0.0
    while t < t_max:
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
        if not math.isfinite(x) or abs(x) > threshold:
            return t
    return None


def _leibniz_lifts(F: sp.csr_matrix, n: int, k_max: int) -> list[sp.csr_matrix]:
    """Lifts ``L_k = sum_i I^{⊗i} ⊗ F ⊗ I^{⊗(k-1-i)}`` for k = 1..k_max,
    via ``L_k = L_{k-1} ⊗ I_n + I_{n^(k-1)} ⊗ F``."""
    if n == 1:
        return [(k * F).tocsr() for k in range(1, k_max + 1)]
    eye_n = sp.identity(n, format="csr")
    lifts = [F.tocsr()]
    for k in range(2, k_max + 1):
        prev = lifts[-1]
        nxt = sp.kron(prev, eye_n, format="csr") + sp.kron(
            sp.identity(n ** (k - 1), format="csr"), F, format="csr"
        )
        lifts.append(nxt.tocsr())
    return lifts


@dataclass(frozen=True)
class CarlemanMatrix:
    """Truncated Carleman generator over ``[x_1, ..., x_{k_max}]``."""

    n: int
    k_max: int
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def block_dims(self) -> list[int]:
        return [self.n**k for k in range(1, self.k_max + 1)]

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims)

    @property
    def offsets(self) -> list[int]:
        return [0, *np.cumsum(self.block_dims).tolist()]

    @property
    def entries(self) -> list[tuple[int, int, float]]:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [
            (int(coo.row[i]), int(coo.col[i]), float(coo.data[i])) for i in order
        ]

    def block(self, k: int, l: int) -> sp.csr_matrix:
        """Block coupling ``x_k`` to ``x_l`` (1-based orders)."""
        off = self.offsets
        return self.matrix[off[k - 1] : off[k], off[l - 1] : off[l]]

    def first_block_slice(self) -> slice:
        return slice(0, self.n)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def build_carleman(
    system: PolynomialSystem, k_max: int, max_dim: int = DEFAULT_MAX_DIM
) -> CarlemanMatrix:
    """Truncated Carleman generator of order ``k_max``.

    Block ``(k, k)`` is the k-fold Leibniz lift of F1 and block ``(k, k+1)``
    the lift of F2; the coupling to ``x_{k_max+1}`` is dropped.
    """
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    n = system.n
    total = sum(n**k for k in range(1, k_max + 1))
    if total > max_dim:
        raise ResourceError(
            f"Carleman dimension {total} exceeds cap {max_dim} (n={n}, k_max={k_max})"
        )
    F1 = sp.csr_matrix(system.F1)
    F2 = sp.csr_matrix(system.F2)
    if n == 1:
        # scalar case: diagonal k*F1, superdiagonal k*F2
        ks = np.arange(1, k_max + 1, dtype=float)
        f1 = F1.toarray()[0, 0]
        f2 = F2.toarray()[0, 0]
        M = sp.diags([f1 * ks, f2 * ks[:-1]], [0, 1], shape=(total, total), format="csr")
        M.eliminate_zeros()
        return CarlemanMatrix(n=n, k_max=k_max, matrix=M)
    diag = _leibniz_lifts(F1, n, k_max)
    upper = _leibniz_lifts(F2, n, k_max - 1) if k_max > 1 else []
    # assemble from COO triplets at block offsets (bmat needs a k_max^2 grid)
    offsets = np.concatenate([[0], np.cumsum([n**k for k in range(1, k_max + 1)])])
    rows, cols, vals = [], [], []
    for k in range(k_max):
        parts = [(diag[k].tocoo(), offsets[k])]
        if k < k_max - 1:
            parts.append((upper[k].tocoo(), offsets[k + 1]))
        for blk, col0 in parts:
            rows.append(blk.row + offsets[k])
            cols.append(blk.col + col0)
            vals.append(blk.data)
    M = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(total, total),
    )
    M.sum_duplicates()
    M.eliminate_zeros()
    return CarlemanMatrix(n=n, k_max=k_max, matrix=M)


def lift(x0, k_max: int) -> np.ndarray:
    """Carleman initial vector ``[x0, x0⊗x0, ..., x0^{⊗k_max}]``."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size == 1:
        return x0[0] ** np.arange(1, k_max + 1)
    parts = [x0]
    for _ in range(1, k_max):
        parts.append(np.kron(parts[-1], x0))
    return np.concatenate(parts)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray  # shape (len(t), dim)


def rk4_linear(
    M,
    y0: np.ndarray,
    t_end: float,
    dt: float = DEFAULT_DT,
    sample_every: Optional[int] = 1,
    overflow: float = OVERFLOW_THRESHOLD,
    keep: Optional[int] = None,
) -> Trajectory:
    """Fixed-step classical RK4 for ``dy/dt = M y``.

    The step is adjusted to ``t_end / round(t_end / dt)`` so that the last
    step lands on ``t_end``.  ``sample_every=None`` keeps only the endpoints;
    ``keep`` stores only the leading ``keep`` components of each sample.
    """
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if t_end < 0:
        raise DomainError(f"t_end must be nonnegative, got {t_end}")
    n_steps = max(int(round(t_end / dt)), 1) if t_end > 0 else 0
    h = t_end / n_steps if n_steps else 0.0
    diag = np.abs(M.diagonal()) if hasattr(M, "diagonal") else np.zeros(1)
    if diag.size and h * diag.max() > RK4_STABILITY:
        raise DomainError(
            f"dt = {h} exceeds the RK4 stability bound for |lambda| >= {diag.max()}"
        )
    if sp.issparse(M) and M.shape[0] <= DENSE_MATVEC_DIM:
        M = M.toarray()  # sparse matvec overhead dominates for tiny systems
    y = np.array(y0, dtype=float)
    sl = slice(None) if keep is None else slice(0, keep)
    ts, ys = [0.0], [y[sl].copy()]
    for step in range(1, n_steps + 1):
        k1 = M @ y
        k2 = M @ (y + 0.5 * h * k1)
        k3 = M @ (y + 0.5 * h * k2)
        k4 = M @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.abs(y) <= overflow):
            raise InstabilityError(
                f"state exceeded overflow threshold {overflow:g} at t = {step * h:g}"
            )
        if step == n_steps or (sample_every and step % sample_every == 0):
            ts.append(step * h)
            ys.append(y[sl].copy())
    return Trajectory(np.asarray(ts), np.asarray(ys))


def integrate_carleman(
    C: CarlemanMatrix,
    x0_vec,
    t_end: float,
    dt: float = DEFAULT_DT,
    sample_every: Optional[int] = 1,
) -> Trajectory:
    """Integrate the truncated hierarchy from the tensor-power lift of
    ``x0_vec``; returns the first-block trajectory ``x_1(t)``."""
    y0 = lift(x0_vec, C.k_max)
    if y0.size != C.total_dim:
        raise DomainError(f"initial state has dimension {np.size(x0_vec)}, expected {C.n}")
    traj = rk4_linear(C.matrix, y0, t_end, dt, sample_every, keep=C.n)
    return Trajectory(traj.t, traj.x)


def integrate_truncations(
    p: LogisticParams,
    k_values: Sequence[int],
    t_end: float,
    dt: float = DEFAULT_DT,
    sample_every: Optional[int] = 1,
) -> Trajectory:
    """First-component trajectories of several logistic truncations, marched
    together; column ``j`` of the result belongs to ``k_values[j]``."""
    ks = [int(k) for k in k_values]
    if not ks:
        raise DomainError("k_values must not be empty")
    C = build_carleman(p.system(), max(ks))
    M = sp.block_diag([C.matrix[:k, :k] for k in ks], format="csr")
    heads = np.concatenate([[0], np.cumsum(ks)[:-1]])
    y0 = np.concatenate([lift(p.x0, k) for k in ks])
    traj = rk4_linear(M, y0, t_end, dt, sample_every)
    return Trajectory(traj.t, traj.x[:, heads])


def truncation_errors(
    params: Sequence[LogisticParams],
    k_values: Sequence[int],
    t: float,
    dt: float = DEFAULT_DT,
) -> np.ndarray:
    """``|x(t) - x_k(t)|`` for every pair ``(params[i], k_values[i])``.

    All truncations are integrated together as one block-diagonal linear
    system, which is equivalent to integrating them one by one.
    """
    if len(params) != len(k_values):
        raise ValueError("params and k_values must have equal length")
    if not params:
        return np.zeros(0)
    for p in params:
        if p.r >= 1:
            raise DomainError(f"truncation error requires r < 1, got r = {p.r}")
    # order-k truncation is the leading principal submatrix of any higher order
    k_top: dict[LogisticParams, int] = {}
    for p, k in zip(params, k_values):
        k_top[p] = max(k_top.get(p, 0), int(k))
    full = {p: build_carleman(p.system(), k) for p, k in k_top.items()}
    mats, y0s, heads = [], [], []
    offset = 0
    for p, k in zip(params, k_values):
        C = full[p]
        dim = C.offsets[int(k)]
        mats.append(C.matrix[:dim, :dim])
        y0s.append(lift(p.x0, int(k)))
        heads.append(offset)
        offset += dim
    M = sp.block_diag(mats, format="csr")
    traj = rk4_linear(M, np.concatenate(y0s), t, dt, sample_every=None)
    approx = traj.x[-1][heads]
    exact = np.array([logistic_exact(p, t) for p in params])
    return np.abs(exact - approx)


def truncation_error(
    p: LogisticParams, k_max: int, t: float, dt: float = DEFAULT_DT
) -> float:
    return float(truncation_errors([p], [k_max], t, dt)[0])


def min_truncation_order(
    p: LogisticParams,
    eps: float,
    t: float,
    k_cap: int = 128,
    dt: float = DEFAULT_DT,
) -> Optional[int]:
    """Smallest ``k_max <= k_cap`` with truncation error ``<= eps``, else None."""
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    lo = 1
    width = 8
    while lo <= k_cap:
        ks = list(range(lo, min(lo + width, k_cap + 1)))
        errs = truncation_errors([p] * len(ks), ks, t, dt)
        hits = np.nonzero(errs <= eps)[0]
        if hits.size:
            return ks[int(hits[0])]
        lo = ks[-1] + 1
        width *= 2
    return None


def truncation_order_map(
    R_values: Iterable[float],
    eps_values: Iterable[float],
    x0: float = 0.5,
    a: float = 1.0,
    t: float = 2.0,
    k_cap: int = 128,
    dt: float = DEFAULT_DT,
) -> np.ndarray:
    """Minimum truncation order on an ``(R, eps)`` grid.

    Returns an integer array of shape ``(len(R_values), len(eps_values))``;
    0 marks grid points with no order ``<= k_cap`` reaching the tolerance.
    Orders are evaluated in growing windows, and only for R values whose
    smallest tolerance is not yet met.
    """
    R_values = [float(R) for R in R_values]
    eps_arr = np.asarray(list(eps_values), dtype=float)
    eps_min = eps_arr.min()
    errs: list[list[float]] = [[] for _ in R_values]
    pending = list(range(len(R_values)))
    lo, hi = 1, min(8, k_cap)
    while pending and lo <= k_cap:
        pairs = [(i, k) for i in pending for k in range(lo, hi + 1)]
        vals = truncation_errors(
            [LogisticParams(x0, a, R_values[i]) for i, _ in pairs],
            [k for _, k in pairs],
            t,
            dt,
        )
        for (i, _), e in zip(pairs, vals):
            errs[i].append(float(e))
        pending = [i for i in pending if min(errs[i]) > eps_min]
        lo, hi = hi + 1, min(2 * hi, k_cap)
    out = np.zeros((len(R_values), eps_arr.size), dtype=int)
    for i, row in enumerate(errs):
        row_arr = np.asarray(row)
        for j, eps in enumerate(eps_arr):
            hits = np.nonzero(row_arr <= eps)[0]
            if hits.size:
                out[i, j] = int(hits[0]) + 1
    return out
