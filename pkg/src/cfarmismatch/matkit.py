"""Complex Hermitian linear-algebra kernels with explicit accuracy contracts.

Everything here is a thin, contract-checked wrapper over LAPACK
(via numpy/scipy); no inverse is ever formed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

HERMITIAN_TOL = 1e-12


class NotPositiveDefiniteError(ValueError):
    """Cholesky pivot failure; ``pivot`` is the 1-based index that broke."""

    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite (pivot {pivot} <= 0)")


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def check_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL, what: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    scale = np.linalg.norm(a)
    if scale > 0 and np.linalg.norm(a - a.conj().T) > tol * scale:
        raise ValueError(f"{what} is not Hermitian to relative tolerance {tol:g}")
    return a


def chol(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor L with L L^H = a, positive real diagonal."""
    a = check_hermitian(a)
    c, info = lapack.zpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefiniteError(info)
    if info < 0:
        raise ValueError(f"illegal Cholesky input (argument {-info})")
    return c


@dataclass(frozen=True)
class EigPair:
    """Hermitian eigendecomposition, eigenvalues sorted descending."""

    values: np.ndarray
    vectors: np.ndarray


def heig(a: np.ndarray) -> EigPair:
    """Eigendecomposition of a Hermitian matrix, descending eigenvalues."""
    a = check_hermitian(a)
    vals, vecs = np.linalg.eigh(a)
    return EigPair(values=vals[::-1].copy(), vectors=vecs[:, ::-1].copy())


def hermitian_sqrt(a: np.ndarray) -> np.ndarray:
    """The unique Hermitian PSD square root U diag(sqrt(eig)) U^H."""
    e = heig(a)
    if np.any(e.values < 0):
        raise NotPositiveDefiniteError(int(np.argmin(e.values)) + 1)
    return hermitian_part(e.vectors @ (np.sqrt(e.values)[:, None] * e.vectors.conj().T))


def ortho_complement(v: np.ndarray) -> np.ndarray:
    """Semi-unitary basis of the orthogonal complement of a unit vector.

    Deterministic: the Householder reflector sending v to (a multiple of)
    the last canonical basis vector, first n-1 columns. For v = e_n this is
    exactly the first n-1 canonical columns.
    """
    v = np.asarray(v, dtype=np.complex128)
    n = v.shape[0]
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError("v must be unit-norm to 1e-10")
    a = v[n - 1]
    phase = a / abs(a) if abs(a) > 0 else 1.0
    w = v.copy()
    w[n - 1] += phase  # reflector axis v + phase*e_n, no cancellation
    p = np.eye(n, dtype=np.complex128) - (2.0 / np.vdot(w, w).real) * np.outer(w, w.conj())
    return p[:, : n - 1]


def solve_hpd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a @ x = b for Hermitian positive-definite a via Cholesky."""
    c = chol(a)
    return linalg.cho_solve((c, True), np.asarray(b, dtype=np.complex128))


def solve_lower(l: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve l @ x = b for lower-triangular l."""
    return linalg.solve_triangular(l, np.asarray(b, dtype=np.complex128), lower=True)


def chol_stack(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factors of a stack (..., n, n) of HPD matrices."""
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(0) from exc


def solve_lower_stack(l: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Forward substitution on a stack: l (m, n, n) lower, b (m, n, k)."""
    n = l.shape[-1]
    y = np.empty_like(b)
    for i in range(n):
        acc = b[:, i, :]
        if i:
            acc = acc - np.einsum("mj,mjk->mk", l[:, i, :i], y[:, :i, :])
        y[:, i, :] = acc / l[:, i, i][:, None]
    return y
