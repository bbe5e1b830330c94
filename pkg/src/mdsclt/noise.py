"""Perturbed dissimilarity matrices under three noise mechanisms.

Model 1 adds noise to the squared distances, model 2 to the distances,
model 3 masks entries Bernoulli(q). Two heteroscedastic variants support
the bias experiments. Every variant produces an exactly hollow, exactly
symmetric noise matrix with independent upper-triangle entries mirrored
below, and is deterministic given its seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .matrixcore import SymmetricMatrix

MODEL_ALIASES = {
    "model1": "model1_sq_additive",
    "model2": "model2_additive",
    "model3": "model3_mask",
    "model2_hetero": "model2_hetero_uniform_scaled",
}
_VARIANTS = {
    "model1_sq_additive", "model2_additive", "model3_mask",
    "model1_hetero", "model2_hetero_uniform_scaled",
}


@dataclass(frozen=True)
class Moments:
    """Closed-form entry moments: variance, third and fourth moment."""

    sigma2: float
    gamma: float
    xi4: float


@dataclass(frozen=True)
class NoiseLaw:
    """Mean-zero scalar noise law with closed-form moments.

    kinds: uniform(a) on (-a, a); gaussian(sigma); two_point(a, p) taking
    value a with probability p and -pa/(1-p) otherwise.
    """

    kind: str
    a: float = 0.0
    sigma: float = 0.0
    p: float = 0.5

    def __post_init__(self):
        if self.kind not in ("uniform", "gaussian", "two_point"):
            raise ValueError(f"unknown noise law {self.kind!r}")
        if self.kind == "uniform" and self.a < 0:
            raise ValueError("uniform law requires a >= 0")
        if self.kind == "gaussian" and self.sigma < 0:
            raise ValueError("gaussian law requires sigma >= 0")
        if self.kind == "two_point" and not 0 < self.p < 1:
            raise ValueError("two_point law requires 0 < p < 1")

    def moments(self) -> Moments:
        if self.kind == "uniform":
            return Moments(self.a**2 / 3.0, 0.0, self.a**4 / 5.0)
        if self.kind == "gaussian":
            return Moments(self.sigma**2, 0.0, 3.0 * self.sigma**4)
        b = -self.p * self.a / (1.0 - self.p)
        mk = lambda k: self.p * self.a**k + (1.0 - self.p) * b**k
        return Moments(mk(2), mk(3), mk(4))

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(-self.a, self.a, size)
        if self.kind == "gaussian":
            return self.sigma * rng.standard_normal(size)
        b = -self.p * self.a / (1.0 - self.p)
        return np.where(rng.random(size) < self.p, self.a, b)

    def to_json(self) -> dict:
        if self.kind == "uniform":
            return {"uniform": {"a": self.a}}
        if self.kind == "gaussian":
            return {"gaussian": {"sigma": self.sigma}}
        return {"two_point": {"a": self.a, "p": self.p}}

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseLaw":
        (kind, body), = obj.items()
        return cls(kind=kind, **body)


@dataclass(frozen=True)
class NoiseSpec:
    """Tagged noise mechanism with the moment parameters it exposes."""

    variant: str
    law: Optional[NoiseLaw] = None
    q: float = 1.0
    sigma_fn: Optional[Callable] = None  # per-pair std-dev rule, model1_hetero

    def __post_init__(self):
        variant = MODEL_ALIASES.get(self.variant, self.variant)
        if variant not in _VARIANTS:
            raise ValueError(f"unknown noise variant {self.variant!r}")
        object.__setattr__(self, "variant", variant)
        if variant in ("model1_sq_additive", "model2_additive") and self.law is None:
            raise ValueError(f"{variant} requires a scalar noise law")
        if variant == "model3_mask" and not 0.0 <= self.q <= 1.0:
            raise ValueError("q must be a probability")
        if variant == "model1_hetero" and self.sigma_fn is None:
            raise ValueError("model1_hetero requires sigma_fn")

    @property
    def moments(self) -> Moments:
        if self.law is None:
            raise ValueError(f"{self.variant} has no constant entry moments")
        return self.law.moments()

    @property
    def center_scale(self) -> float:
        """Shrinkage of the limiting centered positions: sqrt(q) under masking."""
        return float(np.sqrt(self.q)) if self.variant == "model3_mask" else 1.0

    def to_json(self) -> dict:
        short = {v: k for k, v in MODEL_ALIASES.items()}
        out = {"model": short.get(self.variant, self.variant)}
        if self.law is not None:
            out["law"] = self.law.to_json()
        if self.variant == "model3_mask":
            out["q"] = self.q
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseSpec":
        law = NoiseLaw.from_json(obj["law"]) if "law" in obj else None
        return cls(variant=obj["model"], law=law, q=obj.get("q", 1.0))


def _check_hollow_nonneg(D: SymmetricMatrix) -> None:
    if np.any(np.diag(D.data) != 0.0):
        raise ValueError("distance matrix must be hollow")
    if np.any(D.data < 0):
        raise ValueError("distance matrix must be non-negative")


def _sym_from_upper(n: int, upper: np.ndarray) -> np.ndarray:
    m = np.zeros((n, n))
    m[np.triu_indices(n, 1)] = upper
    return m + m.T


def _rng(seed: int, n: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, n]))


def perturb(D: SymmetricMatrix, spec: NoiseSpec, seed: int) -> dict:
    """Apply the noise mechanism to distance matrix D.

    Returns {"delta_sq", "delta", "E"}; ``delta`` is None for model 1, whose
    noise lives on the squared scale (a square root need not exist).
    Negative entries of delta or delta_sq are passed through unchanged.
    """
    _check_hollow_nonneg(D)
    n = D.n
    nupper = n * (n - 1) // 2
    rng = _rng(seed, n)

    if spec.variant == "model1_sq_additive":
        e = _sym_from_upper(n, spec.law.draw(rng, nupper))
        delta_sq = D.data**2 + e
        return {"delta_sq": SymmetricMatrix(delta_sq, hollow=True), "delta": None,
                "E": SymmetricMatrix(e, hollow=True)}
    if spec.variant == "model1_hetero":
        return _perturb_hetero_model1(D, spec.sigma_fn, rng)
    if spec.variant == "model2_additive":
        e = _sym_from_upper(n, spec.law.draw(rng, nupper))
        delta = D.data + e
        return {"delta_sq": SymmetricMatrix(delta**2, hollow=True),
                "delta": SymmetricMatrix(delta, hollow=True),
                "E": SymmetricMatrix(e, hollow=True)}
    if spec.variant == "model2_hetero_uniform_scaled":
        delta = hetero_uniform_scaled(D, seed, rng=rng)
        e = delta.data - D.data
        return {"delta_sq": SymmetricMatrix(delta.data**2, hollow=True),
                "delta": delta, "E": SymmetricMatrix(e, hollow=True)}
    # model3_mask
    keep = (rng.random(nupper) < spec.q).astype(float)
    mask = _sym_from_upper(n, keep)
    delta = D.data * mask
    e = delta - D.data
    return {"delta_sq": SymmetricMatrix(delta**2, hollow=True),
            "delta": SymmetricMatrix(delta, hollow=True),
            "E": SymmetricMatrix(e, hollow=True)}


def hetero_uniform_scaled(D: SymmetricMatrix, seed: int, rng=None) -> SymmetricMatrix:
    """Delta = D + E~ with E~_ij ~ Uniform(-D_ij, D_ij); entries stay >= 0."""
    _check_hollow_nonneg(D)
    n = D.n
    if rng is None:
        rng = _rng(seed, n)
    u = rng.uniform(-1.0, 1.0, n * (n - 1) // 2)
    iu = np.triu_indices(n, 1)
    e = _sym_from_upper(n, u * D.data[iu])
    return SymmetricMatrix(D.data + e, hollow=True)


def _perturb_hetero_model1(D: SymmetricMatrix, sigma_fn, rng) -> dict:
    n = D.n
    iu, ju = np.triu_indices(n, 1)
    sig = np.array([sigma_fn(int(i), int(j)) for i, j in zip(iu, ju)], dtype=float)
    sig_t = np.array([sigma_fn(int(j), int(i)) for i, j in zip(iu, ju)], dtype=float)
    if np.any(sig != sig_t):
        raise ValueError("sigma_fn must be symmetric in (i, j)")
    e = _sym_from_upper(n, sig * rng.standard_normal(len(sig)))
    return {"delta_sq": SymmetricMatrix(D.data**2 + e, hollow=True), "delta": None,
            "E": SymmetricMatrix(e, hollow=True)}


def hetero_model1(D: SymmetricMatrix, sigma_fn, seed: int) -> SymmetricMatrix:
    """Delta^2 = D^2 + E with per-pair gaussian noise of std sigma_fn(i, j)."""
    _check_hollow_nonneg(D)
    return _perturb_hetero_model1(D, sigma_fn, _rng(seed, D.n))["delta_sq"]
