"""Expansion of ``2^q x 2^q`` matrices over the tensor Pauli basis.

Words are indexed in base 4 with qubit 0 as the most significant digit and
``I, X, Y, Z -> 0, 1, 2, 3``; qubit 0 is also the leftmost Kronecker factor.
The transform works one qubit at a time, which costs ``O(q 4^q)`` instead of
the ``O(8^q)`` per-word trace.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DomainError

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
LETTERS = "IXYZ"

# [a00, a01, a10, a11] -> [cI, cX, cY, cZ]
_FORWARD = 0.5 * np.array(
    [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1j, -1j, 0], [1, 0, 0, -1]], dtype=complex
)
_INVERSE = np.array(
    [[1, 0, 0, 1], [0, 1, -1j, 0], [0, 1, 1j, 0], [1, 0, 0, -1]], dtype=complex
)


def num_qubits(dim: int) -> int:
    q = int(dim).bit_length() - 1
    if dim < 1 or 1 << q != dim:
        raise DomainError(f"dimension {dim} is not a power of two")
    return q


def _apply_per_qubit(tensor: np.ndarray, T: np.ndarray, q: int) -> np.ndarray:
    for axis in range(q):
        tensor = np.moveaxis(np.tensordot(T, tensor, axes=([1], [axis])), 0, axis)
    return tensor


def word_label(index: int, q: int) -> str:
    digits = []
    for _ in range(q):
        index, d = divmod(index, 4)
        digits.append(LETTERS[d])
    return "".join(reversed(digits))


def word_index(label: str) -> int:
    idx = 0
    for ch in label:
        idx = 4 * idx + LETTERS.index(ch)
    return idx


def word_matrix(label: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, PAULI[ch])
    return out


@dataclass
class PauliDecomposition:
    q: int
    coeffs: np.ndarray  # complex, length 4**q

    def label(self, index: int) -> str:
        return word_label(index, self.q)

    def terms(self, tol: float = 0.0):
        """``(label, coefficient)`` pairs with ``|c| > tol`` in index order."""
        return [
            (self.label(i), complex(c))
            for i, c in enumerate(self.coeffs)
            if abs(c) > tol
        ]

    def count_nonnegligible(self, tol: float = 1e-12) -> int:
        return int(np.count_nonzero(np.abs(self.coeffs) > tol))

    def decay(self, tol: float = 1e-12) -> np.ndarray:
        """Magnitudes above ``tol`` sorted in descending order (rank l = 1, 2, ...)."""
        mags = np.abs(self.coeffs)
        return np.sort(mags[mags > tol])[::-1]

    def reconstruct(self) -> np.ndarray:
        q = self.q
        t = _apply_per_qubit(self.coeffs.reshape((4,) * q), _INVERSE, q)
        t = t.reshape((2, 2) * q)
        order = [2 * i for i in range(q)] + [2 * i + 1 for i in range(q)]
        return t.transpose(order).reshape(2**q, 2**q)


def pauli_decompose(A) -> PauliDecomposition:
    """Coefficients ``c_P = tr(P A) / 2^q`` for every Pauli word ``P``."""
    A = np.asarray(A.toarray() if hasattr(A, "toarray") else A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    q = num_qubits(A.shape[0])
    if q == 0:
        return PauliDecomposition(0, A.reshape(1).copy())
    t = A.reshape((2,) * (2 * q))
    # interleave (row bit k, column bit k) pairs
    order = [ax for k in range(q) for ax in (k, q + k)]
    t = t.transpose(order).reshape((4,) * q)
    c = _apply_per_qubit(t, _FORWARD, q)
    return PauliDecomposition(q, c.reshape(-1))


def pauli_decompose_bruteforce(A) -> PauliDecomposition:
    """Per-word trace formula; exponential cost, meant for small checks."""
    A = np.asarray(A, dtype=complex)
    q = num_qubits(A.shape[0])
    coeffs = np.array(
        [
            np.trace(word_matrix("".join(w)) @ A) / 2**q
            for w in product(LETTERS, repeat=q)
        ]
    )
    return PauliDecomposition(q, coeffs)
