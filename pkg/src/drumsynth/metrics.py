"""Distribution metrics over classifier outputs and embeddings.

inception_score works on class-probability rows; frechet_distance / fad
compare Gaussian fits of embedding sets; kid is the unbiased squared MMD
with an inverse multiquadric kernel.  All functions are pure numpy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

log = logging.getLogger(__name__)

# kernel bandwidth: 2 * gamma^2 with gamma^2 = 8
IMQ_SCALE = 16.0
_PSD_TOL = 1e-8


def inception_score(probs: np.ndarray) -> float:
    """exp of the mean KL divergence between rows and their marginal."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] < 1:
        raise ValueError(f"probs must be a non-empty [N, C] matrix, got {probs.shape}")
    if np.any(probs < -1e-12):
        raise ValueError("probabilities must be non-negative")
    sums = probs.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        worst = np.abs(sums - 1.0).max()
        raise ValueError(f"rows must sum to 1 within 1e-6, worst deviation {worst:.3g}")
    marginal = probs.mean(axis=0)
    # 0 * log 0 = 0; the marginal is positive wherever any row is
    kl_terms = np.zeros_like(probs)
    mask = probs > 0
    scaled = probs / marginal[None, :].clip(min=1e-300)
    kl_terms[mask] = probs[mask] * np.log(scaled[mask])
    return float(np.exp(kl_terms.sum(axis=1).mean()))


@dataclass(frozen=True)
class GaussianStats:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        if mu.ndim != 1 or sigma.shape != (mu.size, mu.size):
            raise ValueError(f"need mu (d,) and sigma (d, d), got {mu.shape} and {sigma.shape}")
        if not (np.isfinite(mu).all() and np.isfinite(sigma).all()):
            raise ValueError("statistics contain non-finite values")
        asym = np.abs(sigma - sigma.T).max() if sigma.size else 0.0
        if asym > 1e-9:
            raise ValueError(f"sigma must be symmetric within 1e-9, asymmetry {asym:.3g}")
        floor = -_PSD_TOL * max(1.0, float(np.trace(sigma)))
        low = float(np.linalg.eigvalsh(sigma).min())
        if low < floor:
            raise ValueError(f"sigma is not positive semidefinite (min eigenvalue {low:.3g})")

    @property
    def dim(self) -> int:
        return self.mu.size

    @staticmethod
    def fit(x: np.ndarray) -> "GaussianStats":
        """Sample mean and unbiased covariance of rows."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 2:
            raise ValueError(f"need at least 2 rows of shape [N, d], got {x.shape}")
        if x.shape[0] <= x.shape[1]:
            log.warning(
                "covariance fit from %d rows in %d dims is rank-deficient", *x.shape
            )
        mu = x.mean(axis=0)
        sigma = np.cov(x, rowvar=False, ddof=1).reshape(x.shape[1], x.shape[1])
        return GaussianStats(mu, (sigma + sigma.T) / 2.0)


def sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, eigenvalues clamped at 0."""
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"need a square matrix, got {mat.shape}")
    sym = (mat + mat.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    root = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * root[None, :]) @ vecs.T


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """||mu_a - mu_b||^2 + tr(sigma_a + sigma_b - 2 (sigma_a sigma_b)^(1/2))."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = float(np.sum((a.mu - b.mu) ** 2))
    prod = a.sigma @ b.sigma
    sym = (prod + prod.T) / 2.0
    vals = np.linalg.eigvalsh(sym)
    cross = float(np.sqrt(np.clip(vals, 0.0, None)).sum())
    value = diff + float(np.trace(a.sigma) + np.trace(b.sigma)) - 2.0 * cross
    return max(value, 0.0)


def fad(real_emb: np.ndarray, gen_emb: np.ndarray) -> float:
    """Fréchet distance between Gaussian fits of two embedding sets."""
    return frechet_distance(GaussianStats.fit(real_emb), GaussianStats.fit(gen_emb))


def imq_kernel(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"need matching vectors, got {x.shape} and {y.shape}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("kernel inputs must be finite")
    return float(1.0 / (1.0 + np.sum((x - y) ** 2) / IMQ_SCALE))


def _imq_gram(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + cdist(x, y, "sqeuclidean") / IMQ_SCALE)


def kid(x: np.ndarray, y: np.ndarray) -> float:
    """Unbiased squared MMD with the IMQ kernel (can be slightly negative)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[1]:
        raise ValueError(f"need [m, d] and [n, d] embeddings, got {x.shape} and {y.shape}")
    m, n = x.shape[0], y.shape[0]
    if m < 2 or n < 2:
        raise ValueError(f"need at least 2 rows per side, got {m} and {n}")
    k_xx = _imq_gram(x, x)
    k_yy = _imq_gram(y, y)
    k_xy = _imq_gram(x, y)
    term_x = (k_xx.sum() - np.trace(k_xx)) / (m * (m - 1))
    term_y = (k_yy.sum() - np.trace(k_yy)) / (n * (n - 1))
    cross = 2.0 * k_xy.sum() / (m * n)
    return float(term_x + term_y - cross)
