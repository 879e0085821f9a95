"""Input validation helpers used at public API boundaries."""

from __future__ import annotations

import numpy as np


def check_complex_array(x, name="array", ndim=None, shape=None) -> np.ndarray:
    arr = np.asarray(x, dtype=complex)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name}: expected {ndim}-d array, got {arr.ndim}-d")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"{name}: expected shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name}: contains non-finite entries")
    return arr


def check_vector(x, n, name="vector") -> np.ndarray:
    return check_complex_array(x, name=name, ndim=1, shape=(n,))


def check_real_vector(x, n, name="vector") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name}: expected shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains non-finite entries")
    return arr


def check_square(x, name="matrix") -> np.ndarray:
    arr = check_complex_array(x, name=name, ndim=2)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name}: expected square matrix, got {arr.shape}")
    return arr


def check_index_set(indices, n, name="index set", allow_empty=False) -> np.ndarray:
    idx = np.asarray(list(indices), dtype=int)
    if idx.ndim != 1:
        raise ValueError(f"{name}: expected a 1-d sequence of indices")
    if idx.size == 0 and not allow_empty:
        raise ValueError(f"{name}: must be nonempty")
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError(f"{name}: indices out of range [0, {n})")
    if len(np.unique(idx)) != len(idx):
        raise ValueError(f"{name}: duplicate indices")
    return idx


def check_positive(value, name="value") -> float:
    v = float(value)
    if not np.isfinite(v) or v <= 0:
        raise ValueError(f"{name}: must be positive and finite, got {value}")
    return v


def check_nonnegative(value, name="value") -> float:
    v = float(value)
    if not np.isfinite(v) or v < 0:
        raise ValueError(f"{name}: must be nonnegative and finite, got {value}")
    return v
