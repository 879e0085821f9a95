"""Small shared numerics: RNG plumbing, complex noise, error metrics."""

from __future__ import annotations

import numpy as np


def as_generator(seed) -> np.random.Generator:
    """Accept an int seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("a seed (or numpy Generator) is required for stochastic operations")
    return np.random.default_rng(seed)


def complex_normal(rng: np.random.Generator, scale, size) -> np.ndarray:
    """Circularly symmetric complex Gaussian with E|w|^2 = scale^2.

    `scale` may be a scalar or an array broadcastable to `size`.
    """
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return (re + 1j * im) * (np.asarray(scale) / np.sqrt(2.0))


def nmse(truth: np.ndarray, estimate: np.ndarray) -> float:
    """Normalized mean squared error ||T - E||_F^2 / ||T||_F^2."""
    truth = np.asarray(truth)
    estimate = np.asarray(estimate)
    denom = np.linalg.norm(truth) ** 2
    if denom == 0.0:
        return float(np.linalg.norm(estimate) ** 2)
    return float(np.linalg.norm(truth - estimate) ** 2 / denom)


def relative_noise_std(values: np.ndarray, relative_level: float) -> float:
    """Noise std giving (#entries) * sigma^2 / ||V||_F^2 = relative_level."""
    values = np.asarray(values)
    mean_energy = np.mean(np.abs(values) ** 2)
    return float(np.sqrt(relative_level * mean_energy))
