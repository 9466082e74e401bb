"""Unitary block encodings of non-unitary step matrices and ancilla post-selection.

The dilation places ``A / alpha`` in the top-left block of a unitary acting on
``q_a`` ancilla qubits (most significant) and ``q_s`` system qubits.  Basis
states are indexed ``a * 2**q_s + s``, so the ancilla-all-zero sector is the
leading ``2**q_s`` coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO, Union

import numpy as np
import scipy.sparse as sp

from .carleman import CarlemanMatrix
from .errors import DegenerateOutputError, DomainError, NormError
from .pauli import num_qubits

NORM_SLACK = 1e-12
NORMALIZATION_TOL = 1e-10
MIN_PROBABILITY = 1e-300


def _dense(A) -> np.ndarray:
    if isinstance(A, CarlemanMatrix):
        A = A.matrix
    return A.toarray() if sp.issparse(A) else np.asarray(A)


def spectral_norm(A) -> float:
    A = _dense(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def pad_to_power_of_two(A) -> np.ndarray:
    """Embed ``A`` in the next power-of-two dimension, acting as the
    identity on the padding coordinates."""
    A = _dense(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    dim = 1 << max(n - 1, 0).bit_length()
    if dim == n:
        return A.copy()
    out = np.eye(dim, dtype=np.result_type(A, float))
    out[:n, :n] = A
    return out


def pad_state(psi, dim: int) -> np.ndarray:
    psi = np.asarray(psi)
    out = np.zeros(dim, dtype=np.result_type(psi, float))
    out[: psi.size] = psi
    return out


def euler_step_matrix(C, dt: float) -> sp.csr_matrix:
    """Explicit-Euler step ``I + dt C`` for ``df/dt = C f``."""
    if dt < 0:
        raise DomainError(f"dt must be nonnegative, got {dt}")
    M = C.matrix if isinstance(C, CarlemanMatrix) else sp.csr_matrix(C)
    return (sp.identity(M.shape[0], format="csr") + dt * M).tocsr()


@dataclass
class BlockEncoding:
    q_s: int
    q_a: int
    alpha: float
    U: np.ndarray = field(repr=False)

    @property
    def system_dim(self) -> int:
        return 1 << self.q_s

    @property
    def block(self) -> np.ndarray:
        d = self.system_dim
        return self.U[:d, :d]

    def unitarity_residual(self) -> float:
        eye = np.eye(self.U.shape[0])
        return float(np.abs(self.U.conj().T @ self.U - eye).max())

    def block_residual(self, A) -> float:
        """Entrywise residual of the top-left block against ``A / alpha``
        (``A`` is padded to the system dimension if needed)."""
        A = pad_to_power_of_two(A)
        return float(np.abs(self.block - A / self.alpha).max())


def dilate(A, alpha: Optional[float] = None, q_a: int = 1) -> BlockEncoding:
    """Singular-value dilation of ``A / alpha``.

    With ``A / alpha = W S V^†`` the one-ancilla unitary is

        [[ A/alpha,           W sqrt(1 - S^2) W^† ],
         [ V sqrt(1 - S^2) V^†,    -(A/alpha)^†    ]]

    extended by the identity on the remaining ancilla sectors.  ``alpha``
    defaults to the spectral norm of the padded matrix.
    """
    if q_a < 1:
        raise DomainError(f"q_a must be >= 1, got {q_a}")
    A = pad_to_power_of_two(A)
    q_s = num_qubits(A.shape[0])
    norm = spectral_norm(A)
    if alpha is None:
        alpha = norm if norm > 0 else 1.0
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if norm / alpha > 1 + NORM_SLACK:
        raise NormError(f"||A|| / alpha = {norm / alpha!r} exceeds 1")
    At = A / alpha
    W, s, Vh = np.linalg.svd(At)
    root = np.sqrt(np.clip(1.0 - s * s, 0.0, None))
    V = Vh.conj().T
    top_right = (W * root) @ W.conj().T
    bottom_left = (V * root) @ V.conj().T
    d = A.shape[0]
    dtype = np.result_type(At, float)
    U = np.eye(d << q_a, dtype=dtype)
    U[:d, :d] = At
    U[:d, d : 2 * d] = top_right
    U[d : 2 * d, :d] = bottom_left
    U[d : 2 * d, d : 2 * d] = -At.conj().T
    return BlockEncoding(q_s=q_s, q_a=q_a, alpha=float(alpha), U=U)


def apply_postselect(be: BlockEncoding, psi) -> tuple[np.ndarray, float]:
    """Run ``U`` on ``|0...0>_a |psi>`` and post-select the ancillas on zero.

    Returns the renormalized system state and the success probability.
    """
    psi = np.asarray(psi)
    d = be.system_dim
    if psi.shape != (d,):
        raise DomainError(f"state has shape {psi.shape}, expected ({d},)")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > NORMALIZATION_TOL:
        raise DomainError(f"input state not normalized (norm = {nrm!r})")
    full = np.zeros(be.U.shape[0], dtype=np.result_type(psi, be.U))
    full[:d] = psi
    out = be.U @ full
    kept = out[:d]
    p = float(np.vdot(kept, kept).real)
    if p < MIN_PROBABILITY:
        raise DegenerateOutputError(f"post-selection probability {p!r} below 1e-300")
    return kept / math.sqrt(p), p


def log10_cumulative(p_steps: Iterable[float]) -> float:
    """``log10`` of the product of per-step probabilities, summed in log space."""
    return math.fsum(math.log10(p) for p in p_steps)


def direction_error(u, v) -> float:
    """Distance between unit vectors ``u / |u|`` and ``v / |v|`` after
    aligning their global phase."""
    u = np.asarray(u) / np.linalg.norm(u)
    v = np.asarray(v) / np.linalg.norm(v)
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


@dataclass
class MultiStepResult:
    states: np.ndarray  # (T+1, dim), normalized
    p_steps: np.ndarray
    log10_cumulative: float
    direction_error: float  # max over steps vs. the classical linear march

    def rows(self):
        cum = 0.0
        out = []
        for t, p in enumerate(self.p_steps.tolist(), start=1):
            cum += math.log10(p)
            out.append((t, p, cum))
        return out


def multi_step_success(be: BlockEncoding, psi0, T: int) -> MultiStepResult:
    """Repeat post-selected steps ``T`` times, tracking probabilities in log
    space and comparing the state direction with ``(A / alpha)^t psi0``."""
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    psi = np.asarray(psi0)
    states = [psi]
    probs = []
    classical = psi.astype(np.result_type(psi, be.U))
    target = be.block
    worst = 0.0
    for _ in range(T):
        psi, p = apply_postselect(be, psi)
        classical = target @ classical
        classical = classical / np.linalg.norm(classical)
        worst = max(worst, direction_error(psi, classical))
        states.append(psi)
        probs.append(p)
    return MultiStepResult(
        np.asarray(states), np.asarray(probs), log10_cumulative(probs), worst
    )


def ancilla_bound(q_a: int) -> float:
    """Reference single-step success ceiling ``2^(-2 q_a)``."""
    if q_a < 0:
        raise DomainError(f"q_a must be >= 0, got {q_a}")
    return 2.0 ** (-2 * q_a)


# -- sparse descriptions -----------------------------------------------------


@dataclass
class SparseMatrixDesc:
    dim: int
    entries: list[tuple[int, int, float]]
    s: int

    def __post_init__(self):
        seen = set()
        for r, c, _ in self.entries:
            if not (0 <= r < self.dim and 0 <= c < self.dim):
                raise DomainError(f"entry ({r}, {c}) outside dimension {self.dim}")
            if (r, c) in seen:
                raise DomainError(f"duplicate entry ({r}, {c})")
            seen.add((r, c))
        if self.s < self.row_occupancy():
            raise DomainError(
                f"sparsity s = {self.s} below max row occupancy {self.row_occupancy()}"
            )

    def row_occupancy(self) -> int:
        counts: dict[int, int] = {}
        for r, _, _ in self.entries:
            counts[r] = counts.get(r, 0) + 1
        return max(counts.values(), default=0)

    @classmethod
    def from_matrix(cls, M, tol: float = 0.0) -> "SparseMatrixDesc":
        if isinstance(M, CarlemanMatrix):
            M = M.matrix
        coo = sp.coo_matrix(M)
        coo.sum_duplicates()
        keep = np.abs(coo.data) > tol
        rows, cols, vals = coo.row[keep], coo.col[keep], coo.data[keep]
        order = np.lexsort((cols, rows))
        entries = [(int(rows[i]), int(cols[i]), float(vals[i])) for i in order]
        desc = cls(coo.shape[0], entries, s=max(1, _max_row_count(rows, coo.shape[0])))
        return desc

    def to_csr(self) -> sp.csr_matrix:
        if not self.entries:
            return sp.csr_matrix((self.dim, self.dim))
        r, c, v = zip(*self.entries)
        return sp.csr_matrix((v, (r, c)), shape=(self.dim, self.dim))


def _max_row_count(rows: np.ndarray, dim: int) -> int:
    return int(np.bincount(rows, minlength=dim).max()) if rows.size else 0


def sparse_scale(desc: SparseMatrixDesc) -> tuple[float, int]:
    """Sparse-oracle scale ``alpha = s max|a_ij|`` and ancilla count
    ``ceil(log2 s) + 1``."""
    if desc.s < 1:
        raise DomainError(f"sparsity must be >= 1, got {desc.s}")
    max_entry = max((abs(v) for _, _, v in desc.entries), default=0.0)
    q_a = math.ceil(math.log2(desc.s)) + 1
    return desc.s * max_entry, q_a


def write_sparse_triples(desc: SparseMatrixDesc, out: TextIO) -> None:
    """Header ``dim nnz`` followed by ``row col value`` lines (zero-indexed)."""
    out.write(f"{desc.dim} {len(desc.entries)}\n")
    for r, c, v in desc.entries:
        out.write(f"{r} {c} {v!r}\n")


def read_sparse_triples(src: Union[TextIO, str]) -> SparseMatrixDesc:
    text = src if isinstance(src, str) else src.read()
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise DomainError("missing 'dim nnz' header")
    dim, nnz = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != nnz:
        raise DomainError(f"header declares {nnz} entries, found {len(body)}")
    entries = []
    for parts in body:
        if len(parts) != 3:
            raise DomainError(f"malformed triple line: {' '.join(parts)!r}")
        entries.append((int(parts[0]), int(parts[1]), float(parts[2])))
    rows = np.array([r for r, _, _ in entries], dtype=int)
    return SparseMatrixDesc(dim, entries, s=max(1, _max_row_count(rows, dim)))
