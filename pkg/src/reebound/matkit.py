"""Dense complex-matrix kernel.

Small Hermitian eigenproblems, spectral matrix functions and the bipartite
tensor utilities (partial trace, partial transpose, Hadamard product) used
throughout the package. Every routine is a pure function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, InputError, NotPSDError, SingularityError

HERMITIAN_TOL = 1e-10
SUPPORT_CUTOFF = 1e-14
PSD_TOL = 1e-10

_PARTY_AXES = {"A": 0, "B": 1}


@dataclass(frozen=True)
class EigDecomposition:
    """Eigenvalues sorted descending and the matching orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues come back in descending order. Each eigenvector is rephased
    so that its largest-magnitude component (first one on ties) is real and
    positive, which makes the output reproducible bit for bit.

    Raises
    ------
    DimensionError
        If `m` is not square.
    InputError
        If ``max|m - m^dagger| > tol``.
    """
    m = _as_square(m)
    skew = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if skew > tol:
        raise InputError(f"matrix is not Hermitian (max |M - M^dagger| = {skew:.3g})")
    values, vectors = np.linalg.eigh(0.5 * (m + m.conj().T))
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].copy()
    mags = np.abs(vectors)
    for k in range(vectors.shape[1]):
        col = mags[:, k]
        pivot = int(np.flatnonzero(col >= col.max() * (1 - 1e-9))[0])
        phase = vectors[pivot, k] / mags[pivot, k]
        vectors[:, k] /= phase
        vectors[pivot, k] = vectors[pivot, k].real
    return EigDecomposition(values, vectors)


_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "log": np.log,
    "sqrt": np.sqrt,
    "exp": np.exp,
}


def matrix_function(m, f: str = "log", support_only: bool = False) -> np.ndarray:
    """Apply ``f`` to the spectrum of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Hermitian matrix. For ``log`` and ``sqrt`` it must be PSD.
    f : {"log", "sqrt", "exp"}
        Scalar function applied to the eigenvalues (natural log).
    support_only : bool
        Skip eigenvalues below ``SUPPORT_CUTOFF``, so the result acts as 0 on
        the null space.

    Returns
    -------
    numpy.ndarray
        ``V f(Lambda) V^dagger``.
    """
    if f not in _FUNCTIONS:
        raise InputError(f"unknown matrix function {f!r}")
    eig = hermitian_eig(m)
    lam, vec = eig.values, eig.vectors
    if f == "exp":
        return (vec * np.exp(lam)) @ vec.conj().T
    if lam.size and lam[-1] < -PSD_TOL:
        raise NotPSDError(f"matrix has eigenvalue {lam[-1]:.3g} < 0")
    keep = lam >= SUPPORT_CUTOFF
    if f == "log" and not support_only and not keep.all():
        raise SingularityError("log of a singular matrix; pass support_only=True")
    vals = np.zeros_like(lam)
    if f == "sqrt" and not support_only:
        vals = np.sqrt(np.clip(lam, 0.0, None))
    else:
        vals[keep] = _FUNCTIONS[f](lam[keep])
    return (vec * vals) @ vec.conj().T


def kron(a, b) -> np.ndarray:
    """Tensor product ``a (x) b``."""
    return np.kron(np.asarray(a), np.asarray(b))


def _check_bipartite(m, dims) -> tuple[np.ndarray, int, int]:
    m = _as_square(m)
    da, db = (int(d) for d in dims)
    if m.shape[0] != da * db:
        raise DimensionError(f"matrix of size {m.shape[0]} does not match dims {da}x{db}")
    return m, da, db


def partial_trace(m, dims, over: str = "A") -> np.ndarray:
    """Trace out party ``over`` (``"A"`` or ``"B"``) of a bipartite operator."""
    m, da, db = _check_bipartite(m, dims)
    t = m.reshape(da, db, da, db)
    if over == "A":
        return np.einsum("ijik->jk", t)
    if over == "B":
        return np.einsum("ijkj->ik", t)
    raise InputError(f"party must be 'A' or 'B', got {over!r}")


def reduce_to(m, dims, party: str) -> np.ndarray:
    """Reduced operator on ``party`` (traces out the other one)."""
    if party not in _PARTY_AXES:
        raise InputError(f"party must be 'A' or 'B', got {party!r}")
    return partial_trace(m, dims, over="B" if party == "A" else "A")


def partial_transpose(m, dims, on: str = "B") -> np.ndarray:
    """Transpose the indices of party ``on``."""
    m, da, db = _check_bipartite(m, dims)
    t = m.reshape(da, db, da, db)
    if on == "B":
        t = t.transpose(0, 3, 2, 1)
    elif on == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise InputError(f"party must be 'A' or 'B', got {on!r}")
    return t.reshape(da * db, da * db)


def embed(op, dims, party: str) -> np.ndarray:
    """Lift a local operator to the bipartite space (``op (x) I`` or ``I (x) op``)."""
    da, db = (int(d) for d in dims)
    if party == "A":
        return np.kron(op, np.eye(db))
    if party == "B":
        return np.kron(np.eye(da), op)
    raise InputError(f"party must be 'A' or 'B', got {party!r}")


def hadamard_product(a, b) -> np.ndarray:
    """Entrywise product ``[a o b]_ij = a_ij b_ij``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return a * b


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a
