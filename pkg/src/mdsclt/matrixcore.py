"""Dense symmetric matrix algebra: double centering, spectral decomposition,
small SVD, and the matrix norms used throughout the library.

All operations are pure and deterministic; eigenvector signs are fixed so
repeated calls on the same matrix return bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

# Dense full decomposition below this size; iterative solver above.
DENSE_EIG_CUTOFF = 256
MAX_SUPPORTED_N = 5000
DEGENERATE_GAP_RTOL = 1e-10


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed to converge within its iteration cap."""


@dataclass(frozen=True)
class SymmetricMatrix:
    """Dense symmetric n x n real matrix.

    The stored array is exactly symmetric: construction mirrors the upper
    triangle onto the lower one. ``hollow`` additionally asserts a zero
    diagonal.
    """

    data: np.ndarray
    hollow: bool = False

    def __post_init__(self):
        a = np.asarray(self.data, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] > MAX_SUPPORTED_N:
            raise ValueError(f"n={a.shape[0]} exceeds supported envelope {MAX_SUPPORTED_N}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        a = np.triu(a) + np.triu(a, 1).T  # mirror upper triangle, bit-exact symmetry
        if self.hollow:
            if np.any(np.diag(a) != 0.0):
                raise ValueError("hollow matrix must have an exactly zero diagonal")
        object.__setattr__(self, "data", a)
        self.data.setflags(write=False)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_array(cls, a, hollow: bool = False, rtol: float = 1e-9) -> "SymmetricMatrix":
        """Build from a nearly-symmetric array, verifying symmetry to ``rtol``
        relative and symmetrizing by averaging."""
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
        if np.abs(a - a.T).max(initial=0.0) > rtol * scale:
            raise ValueError("matrix is not symmetric within tolerance")
        return cls((a + a.T) / 2.0, hollow=hollow)


@dataclass(frozen=True)
class SpectralPair:
    """Top-k eigenvalues (descending) with orthonormal eigenvectors.

    Sign convention: in each eigenvector the entry of largest absolute value
    is non-negative. ``degenerate`` flags a near-tie among adjacent returned
    eigenvalues, so downstream alignment can widen tolerances.
    """

    values: np.ndarray
    vectors: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "vectors", np.asarray(self.vectors, dtype=float))


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    v = vectors.copy()
    for j in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0:
            v[:, j] = -v[:, j]
    return v


def double_center(sq: SymmetricMatrix) -> SymmetricMatrix:
    """Return B = -1/2 P A P with P = I - 11^T/n, for A = ``sq``.

    Every row of B sums to zero; output is exactly symmetric.
    """
    a = sq.data
    n = sq.n
    if n < 2:
        raise ValueError("double centering requires n >= 2")
    row = a.mean(axis=1, keepdims=True)
    col = row.T  # symmetric input
    grand = a.mean()
    b = -0.5 * (a - row - col + grand)
    return SymmetricMatrix.from_array(b, rtol=1e-9)


def top_eigs(m: SymmetricMatrix, k: int) -> SpectralPair:
    """Return the k algebraically largest eigenpairs of ``m``.

    Uses a full dense decomposition for small matrices and an iterative
    solver (iteration cap 10n) for large ones requesting few pairs.
    """
    n = m.n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    if n <= DENSE_EIG_CUTOFF or k >= n - 1:
        w, v = np.linalg.eigh(m.data)
        order = np.argsort(w)[::-1][:k]
        values, vectors = w[order], v[:, order]
    else:
        try:
            w, v = spla.eigsh(m.data, k=k, which="LA", maxiter=10 * n)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"eigensolver did not converge within {10 * n} iterations"
            ) from exc
        order = np.argsort(w)[::-1]
        values, vectors = w[order], v[:, order]
    vectors = _fix_signs(np.ascontiguousarray(vectors))
    scale = float(np.abs(values).max(initial=0.0))
    gaps = -np.diff(values)
    degenerate = bool(k > 1 and np.any(gaps < DEGENERATE_GAP_RTOL * max(scale, 1e-300)))
    return SpectralPair(values=values, vectors=vectors, degenerate=degenerate)


def svd_small(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD of a small d x d matrix: returns (W1, s, W2) with m = W1 diag(s) W2^T."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > 32:
        raise ValueError("svd_small is restricted to d <= 32 alignment problems")
    w1, s, w2t = np.linalg.svd(m)
    return w1, s, w2t.T


def norms(m) -> dict[str, float]:
    """Spectral, Frobenius and 2->infinity (max row) norms of ``m``."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return {
        "spectral": float(np.linalg.norm(m, 2)),
        "frobenius": float(np.linalg.norm(m, "fro")),
        "two_to_inf": float(np.sqrt((m**2).sum(axis=1).max())),
    }


def read_matrix_csv(path, hollow: bool = False) -> SymmetricMatrix:
    """Read a full square matrix from headerless comma-separated rows."""
    a = np.loadtxt(path, delimiter=",", ndmin=2)
    return SymmetricMatrix.from_array(a, hollow=hollow)


def write_matrix_csv(path, m) -> None:
    a = m.data if isinstance(m, SymmetricMatrix) else np.asarray(m, dtype=float)
    np.savetxt(path, np.atleast_2d(a), delimiter=",", fmt="%.17g")
