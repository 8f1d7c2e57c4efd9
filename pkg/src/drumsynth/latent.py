"""Latent-space sampling and interpolation paths."""

from __future__ import annotations

import numpy as np

LATENT_DIM = 128


def sample_latent(n: int, rng: np.random.Generator, dim: int = LATENT_DIM) -> np.ndarray:
    """[n, dim] i.i.d. standard normal latents."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return rng.standard_normal((n, dim))


def _require_nonzero(z: np.ndarray, name: str) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError(f"{name} contains non-finite values")
    if np.linalg.norm(z) == 0:
        raise ValueError(f"{name} must be nonzero")
    return z


def slerp(z1: np.ndarray, z2: np.ndarray, t: float) -> np.ndarray:
    """Spherical interpolation at constant angular rate from z1 to z2."""
    z1 = _require_nonzero(z1, "z1")
    z2 = _require_nonzero(z2, "z2")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    cos = np.dot(z1, z2) / (np.linalg.norm(z1) * np.linalg.norm(z2))
    omega = np.arccos(np.clip(cos, -1.0, 1.0))
    if np.pi - omega < 1e-6:
        raise ValueError("slerp is undefined for antiparallel endpoints")
    if omega < 1e-6:
        return (1.0 - t) * z1 + t * z2   # parallel: angle is degenerate
    return (np.sin((1.0 - t) * omega) * z1 + np.sin(t * omega) * z2) / np.sin(omega)


def radial(z: np.ndarray, r: float) -> np.ndarray:
    """Rescale z to norm r, keeping its direction."""
    z = _require_nonzero(z, "z")
    if r < 0:
        raise ValueError(f"target norm must be >= 0, got {r}")
    return z * (r / np.linalg.norm(z))
