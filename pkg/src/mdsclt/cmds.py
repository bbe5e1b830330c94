"""Classical multidimensional scaling: double centering, truncated spectral
decomposition, dimension selection, and sub-embedding."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .matrixcore import (DEGENERATE_GAP_RTOL, SpectralPair, SymmetricMatrix,
                         double_center, top_eigs)

SCREE_EXTRA = 4  # eigenvalues retained beyond d for scree inspection


class DeficientEmbeddingError(ValueError):
    """Requested dimension reaches a non-positive eigenvalue of the centered
    matrix; the embedding dimension is likely mis-chosen."""


@dataclass(frozen=True)
class Embedding:
    """n x d configuration with its (descending) eigenvalues.

    Columns of ``config`` are orthogonal with squared norms equal to the
    eigenvalues, and column means are zero.
    """

    config: np.ndarray
    eigenvalues: np.ndarray
    all_top_eigenvalues: np.ndarray
    deficient: bool = False
    degenerate: bool = False

    @property
    def n(self) -> int:
        return self.config.shape[0]

    @property
    def d(self) -> int:
        return self.config.shape[1]

    def save(self, csv_path, sidecar_path=None) -> None:
        np.savetxt(csv_path, self.config, delimiter=",", fmt="%.17g")
        if sidecar_path is not None:
            meta = {"eigenvalues": self.eigenvalues.tolist(),
                    "all_top_eigenvalues": self.all_top_eigenvalues.tolist(),
                    "flags": {"deficient": self.deficient,
                              "degenerate": self.degenerate}}
            with open(sidecar_path, "w") as fh:
                json.dump(meta, fh, indent=2)


def embed(delta_sq: SymmetricMatrix, d: int, allow_deficient: bool = False) -> Embedding:
    """Embed a squared-dissimilarity matrix into R^d.

    The configuration is U S^{1/2} from the top-d eigenpairs of the double
    centering of ``delta_sq``. Non-positive eigenvalues among the top d are
    an error unless ``allow_deficient``, in which case those columns are
    zero-filled and the embedding flagged.
    """
    n = delta_sq.n
    if not 1 <= d <= n - 1:
        raise ValueError(f"embedding dimension d={d} must satisfy 1 <= d <= n-1")
    b = double_center(delta_sq)
    k = min(d + SCREE_EXTRA, n)
    pair = top_eigs(b, k)
    vals = pair.values[:d]
    deficient = bool(vals[-1] <= 0)
    if deficient and not allow_deficient:
        raise DeficientEmbeddingError(
            f"eigenvalue {d} of the centered matrix is {vals[-1]:.3e} <= 0"
        )
    config = pair.vectors[:, :d] * np.sqrt(np.maximum(vals, 0.0))
    return Embedding(config=config, eigenvalues=vals,
                     all_top_eigenvalues=pair.values,
                     deficient=deficient, degenerate=pair.degenerate)


def select_dim(delta_sq: SymmetricMatrix, max_d: int) -> dict:
    """Pick the largest k <= max_d whose k-th eigenvalue is >= n^{2/3}.

    Returns {"d_hat", "threshold", "eigenvalues"}; d_hat = 0 when every
    inspected eigenvalue falls below the threshold.
    """
    n = delta_sq.n
    if not 1 <= max_d <= n - 1:
        raise ValueError(f"max_d={max_d} must satisfy 1 <= max_d <= n-1")
    b = double_center(delta_sq)
    vals = top_eigs(b, max_d).values
    threshold = float(n) ** (2.0 / 3.0)
    d_hat = int(np.sum(vals >= threshold))
    return {"d_hat": d_hat, "threshold": threshold, "eigenvalues": vals}


def sub_embed(e: Embedding, d_prime: int) -> Embedding:
    """First d' columns of an embedding; equals a direct d'-dimensional
    embedding when the eigenvalue at the cut is simple."""
    if not 1 <= d_prime <= e.d:
        raise ValueError(f"d_prime={d_prime} must satisfy 1 <= d_prime <= d={e.d}")
    degenerate = e.degenerate
    if d_prime < len(e.all_top_eigenvalues):
        gap = e.all_top_eigenvalues[d_prime - 1] - e.all_top_eigenvalues[d_prime]
        scale = max(float(np.abs(e.all_top_eigenvalues).max()), 1e-300)
        degenerate = degenerate or bool(gap < DEGENERATE_GAP_RTOL * scale)
    return Embedding(config=e.config[:, :d_prime],
                     eigenvalues=e.eigenvalues[:d_prime],
                     all_top_eigenvalues=e.all_top_eigenvalues,
                     deficient=bool(e.eigenvalues[:d_prime][-1] <= 0),
                     degenerate=degenerate)
