"""Truncated SVD helpers with a deterministic sign convention."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import svds

from .errors import DimensionError, NumericError

# Smaller side up to DENSE_SVD_LIMIT: full LAPACK SVD.  Up to GRAM_SVD_LIMIT:
# top eigenvectors of the Gram matrix followed by an exact SVD of the projected
# matrix.  Beyond that: ARPACK.
DENSE_SVD_LIMIT = 200
GRAM_SVD_LIMIT = 4000
GRAM_OVERSAMPLE = 8
ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class TruncatedSvd:
    U: np.ndarray
    D: np.ndarray
    V: np.ndarray

    @property
    def k(self) -> int:
        return self.D.size

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.D) @ self.V.T


def _fix_signs(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flip column pairs so the largest-magnitude entry of each U column is >= 0."""
    if U.size == 0:
        return U, V
    idx = np.argmax(np.abs(U), axis=0)
    s = np.where(U[idx, np.arange(U.shape[1])] < 0, -1.0, 1.0)
    return U * s, V * s


def _check_finite(M) -> None:
    data = M.data if sp.issparse(M) else M
    if not np.all(np.isfinite(data)):
        raise NumericError("matrix has non-finite entries")


def _gram_svd(M: np.ndarray, k: int):
    """Rayleigh-Ritz on the leading eigenspace of the smaller Gram matrix."""
    flip = M.shape[0] > M.shape[1]
    if flip:
        M = M.T
    r = M.shape[0]
    width = min(r, k + GRAM_OVERSAMPLE)
    _, Q = scipy.linalg.eigh(M @ M.T, subset_by_index=[r - width, r - 1], check_finite=False)
    Us, s, Vt = np.linalg.svd(Q.T @ M, full_matrices=False)
    U, s, V = Q @ Us[:, :k], s[:k], Vt[:k].T
    return (V, s, U) if flip else (U, s, V)


def rank_k_svd(M, k: int) -> TruncatedSvd:
    """Top-k singular triplets of ``M`` (dense or sparse).

    Singular values come back nonincreasing; each column of ``U`` has a
    nonnegative entry of largest magnitude and ``V`` is flipped to match.
    """
    rows, cols = M.shape
    if not 1 <= k <= min(rows, cols):
        raise DimensionError(f"k={k} must lie in [1, {min(rows, cols)}]")
    _check_finite(M)
    short = min(rows, cols)
    if short <= DENSE_SVD_LIMIT or k >= short - 1:
        dense = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=np.float64)
        U, s, Vt = np.linalg.svd(dense, full_matrices=False)
        U, s, V = U[:, :k], s[:k], Vt[:k].T
    elif short <= GRAM_SVD_LIMIT:
        U, s, V = _gram_svd(M.toarray() if sp.issparse(M) else np.asarray(M, dtype=np.float64), k)
    else:
        U, s, Vt = svds(sp.csr_matrix(M, dtype=np.float64), k=k, random_state=0)
        order = np.argsort(s)[::-1]
        U, s, V = U[:, order], s[order], Vt[order].T
    U, V = _fix_signs(np.ascontiguousarray(U), np.ascontiguousarray(V))
    return TruncatedSvd(U, np.maximum(s, 0.0), V)


def leading_singular_triplet(M: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Leading left singular vector of a small square matrix plus the two
    largest singular values (``sigma2`` is 0 for a 1x1 input).  The sign of
    the vector is left to the caller."""
    M = np.asarray(M, dtype=np.float64)
    _check_finite(M)
    U, s, _ = np.linalg.svd(M)
    sigma2 = float(s[1]) if s.size > 1 else 0.0
    return U[:, 0].copy(), float(s[0]), sigma2
