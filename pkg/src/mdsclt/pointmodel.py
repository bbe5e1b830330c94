"""Latent point clouds and their population moments.

Supports three generating distributions (finite point-mass mixture, Gaussian,
uniform box), exact or Monte Carlo first/second moments, and the weighted
second-moment matrix that the limiting-covariance formulas consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .noise import NoiseSpec


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # n x d
    labels: Optional[np.ndarray] = None  # class index per point, mixtures only

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2:
            raise ValueError("points must be an n x d array")
        if not np.all(np.isfinite(p)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", p)
        if self.labels is not None:
            object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))
            if self.labels.shape != (p.shape[0],):
                raise ValueError("labels must be a length-n vector")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def distance_matrix(self) -> np.ndarray:
        """Hollow symmetric matrix of pairwise Euclidean distances."""
        g = self.points @ self.points.T
        sq = np.diag(g)[:, None] + np.diag(g)[None, :] - 2.0 * g
        np.fill_diagonal(sq, 0.0)
        d = np.sqrt(np.maximum(sq, 0.0))
        return (d + d.T) / 2.0


@dataclass(frozen=True)
class DistributionSpec:
    """One of: point_mass_mixture(locations, weights), gaussian(mean, covariance),
    uniform_box(lo, hi)."""

    variant: str
    locations: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    mean: Optional[np.ndarray] = None
    covariance: Optional[np.ndarray] = None
    lo: Optional[np.ndarray] = None
    hi: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.variant == "point_mass_mixture":
            loc = np.atleast_2d(np.asarray(self.locations, dtype=float))
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or w.shape[0] != loc.shape[0]:
                raise ValueError("weights must be one per mixture location")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("weights must lie on the simplex (sum 1 within 1e-12)")
            object.__setattr__(self, "locations", loc)
            object.__setattr__(self, "weights", w)
        elif self.variant == "gaussian":
            m = np.asarray(self.mean, dtype=float)
            c = np.asarray(self.covariance, dtype=float)
            if c.shape != (m.shape[0], m.shape[0]):
                raise ValueError("covariance shape must match mean dimension")
            if np.abs(c - c.T).max(initial=0.0) > 1e-12:
                raise ValueError("covariance must be symmetric")
            if np.linalg.eigvalsh(c).min() <= 0:
                raise ValueError("covariance must be positive definite")
            object.__setattr__(self, "mean", m)
            object.__setattr__(self, "covariance", c)
        elif self.variant == "uniform_box":
            lo = np.asarray(self.lo, dtype=float)
            hi = np.asarray(self.hi, dtype=float)
            if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
                raise ValueError("uniform_box requires lo < hi componentwise")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        else:
            raise ValueError(f"unknown distribution variant {self.variant!r}")

    @property
    def d(self) -> int:
        if self.variant == "point_mass_mixture":
            return self.locations.shape[1]
        if self.variant == "gaussian":
            return self.mean.shape[0]
        return self.lo.shape[0]

    def to_json(self) -> dict:
        if self.variant == "point_mass_mixture":
            return {"point_mass_mixture": {"locations": self.locations.tolist(),
                                           "weights": self.weights.tolist()}}
        if self.variant == "gaussian":
            return {"gaussian": {"mean": self.mean.tolist(),
                                 "covariance": self.covariance.tolist()}}
        return {"uniform_box": {"lo": self.lo.tolist(), "hi": self.hi.tolist()}}

    @classmethod
    def from_json(cls, obj: dict) -> "DistributionSpec":
        (variant, body), = obj.items()
        return cls(variant=variant, **body)


@dataclass(frozen=True)
class PopulationMoments:
    mu: np.ndarray
    xi: np.ndarray  # covariance of the generating distribution
    exact: bool

    @property
    def xi_min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.xi).min())


def triangle_345(center: bool = True) -> DistributionSpec:
    """Canonical three point masses with inter-point distances 3, 4, 5 and
    mixing weights (0.2, 0.3, 0.5); translated to zero mean when ``center``."""
    locs = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
    w = np.array([0.2, 0.3, 0.5])
    if center:
        locs = locs - w @ locs
    return DistributionSpec("point_mass_mixture", locations=locs, weights=w)


def _mixture_counts(weights: np.ndarray, n: int) -> np.ndarray:
    """Round(pi_k * n) with largest-remainder correction so counts sum to n."""
    raw = weights * n
    counts = np.floor(raw + 0.5).astype(int)
    shortfall = n - counts.sum()
    if shortfall != 0:
        remainders = raw - np.floor(raw)
        order = np.argsort(-remainders if shortfall > 0 else remainders, kind="stable")
        for idx in order[: abs(shortfall)]:
            counts[idx] += 1 if shortfall > 0 else -1
    return counts


def sample(spec: DistributionSpec, n: int, seed: int) -> PointCloud:
    """Draw n points; deterministic given (spec, n, seed). Mixture draws are
    emitted grouped by class with labels set."""
    if n < spec.d + 2:
        raise ValueError(f"n={n} too small for dimension d={spec.d}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    if spec.variant == "point_mass_mixture":
        counts = _mixture_counts(spec.weights, n)
        points = np.repeat(spec.locations, counts, axis=0)
        labels = np.repeat(np.arange(len(counts)), counts)
        return PointCloud(points=points, labels=labels)
    if spec.variant == "gaussian":
        pts = rng.multivariate_normal(spec.mean, spec.covariance, size=n,
                                      method="cholesky")
        return PointCloud(points=pts)
    pts = rng.uniform(spec.lo, spec.hi, size=(n, spec.d))
    return PointCloud(points=pts)


def moments(spec: DistributionSpec) -> PopulationMoments:
    """Closed-form mean and covariance of the generating distribution."""
    if spec.variant == "point_mass_mixture":
        mu = spec.weights @ spec.locations
        dev = spec.locations - mu
        xi = (spec.weights[:, None] * dev).T @ dev
        xi = (xi + xi.T) / 2.0
    elif spec.variant == "gaussian":
        mu, xi = spec.mean, spec.covariance
    else:
        mu = (spec.lo + spec.hi) / 2.0
        xi = np.diag((spec.hi - spec.lo) ** 2 / 12.0)
    m = PopulationMoments(mu=np.asarray(mu, float), xi=np.asarray(xi, float), exact=True)
    if m.xi_min_eig <= 1e-12 * max(1.0, float(np.abs(m.xi).max())):
        raise ValueError(
            f"singular point covariance (min eigenvalue {m.xi_min_eig:.3e}); "
            "limiting covariances are undefined"
        )
    return m


def _weight_fn(noise: NoiseSpec):
    if noise.variant == "model2_additive":
        s2, g, x4 = noise.moments.sigma2, noise.moments.gamma, noise.moments.xi4
        return lambda r: s2 * r**2 + g * r + x4 / 4.0 - s2**2 / 4.0
    if noise.variant == "model3_mask":
        q = noise.q
        return lambda r: (1.0 - q) / 4.0 * r**4
    raise ValueError(
        f"weighted second moment is defined for models 2 and 3, not {noise.variant!r}"
    )


def sigma_tilde(spec: DistributionSpec, z, noise: NoiseSpec,
                mc_draws: int = 200_000, seed: int = 0) -> dict:
    """Distance-weighted centered second moment at location ``z``.

    The scalar weight is sigma^2 r^2 + gamma r + xi/4 - sigma^4/4 (model 2,
    with r the distance from z) or (1-q)/4 r^4 (model 3). Exact finite sum
    for point-mass mixtures; Monte Carlo otherwise, with the standard error
    of the matrix entries reported.
    """
    z = np.asarray(z, dtype=float)
    w_of = _weight_fn(noise)
    mom = moments(spec)
    if spec.variant == "point_mass_mixture":
        dev = spec.locations - mom.mu
        r = np.linalg.norm(spec.locations - z, axis=1)
        coeff = spec.weights * w_of(r)
        s = (coeff[:, None] * dev).T @ dev
        return {"matrix": (s + s.T) / 2.0, "exact": True, "std_error": 0.0,
                "psd_projection_distance": 0.0}
    draws = sample(spec, mc_draws, seed).points
    dev = draws - mom.mu
    coeff = w_of(np.linalg.norm(draws - z, axis=1))
    terms = coeff[:, None, None] * dev[:, :, None] * dev[:, None, :]
    s = terms.mean(axis=0)
    s = (s + s.T) / 2.0
    se = float(np.sqrt(terms.var(axis=0).max() / mc_draws))
    w, v = np.linalg.eigh(s)
    proj_dist = 0.0
    if w.min() < 0:
        proj_dist = float(np.sqrt((np.minimum(w, 0.0) ** 2).sum()))
        s = (v * np.maximum(w, 0.0)) @ v.T
    return {"matrix": s, "exact": False, "std_error": se,
            "psd_projection_distance": proj_dist}
