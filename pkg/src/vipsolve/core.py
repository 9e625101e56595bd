"""Ambient space helpers: vectors in R^d, inner product, norm and errors.

Vectors are plain 1-D ``float64`` numpy arrays. Most functions in the package
also accept stacked points of shape ``(m, d)`` and act on the last axis.
"""
import numbers

import numpy as np


class VIPError(Exception):
    """Base class for all errors raised by :mod:`vipsolve`."""


class DimensionError(VIPError, ValueError):
    """Operands live in spaces of different dimension."""


class DomainError(VIPError, ValueError):
    """A scalar parameter is outside its admissible range."""


class ConvergenceError(VIPError, RuntimeError):
    """An inner iteration ran out of budget.

    The last iterate is kept on ``last_iterate`` so callers can inspect it.
    """

    def __init__(self, message, last_iterate=None, n_iter=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.n_iter = n_iter


def as_vector(x, dim=None, name="x"):
    """Return ``x`` as a finite 1-D float array, checking its dimension."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite coordinates")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    return arr


def as_points(x, dim, name="x"):
    """Like :func:`as_vector` but also accepts a stack of points ``(m, dim)``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != dim:
        raise DimensionError(f"{name} has trailing dimension {arr.shape[-1:]} , expected {dim}")
    return arr


def check_scalar(value, name, low=None, high=None, low_open=False, high_open=False):
    """Validate a finite real scalar against an interval and return it as float."""
    if isinstance(value, bool) or not isinstance(value, (numbers.Real, np.floating, np.integer)):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    if low is not None and (value < low or (low_open and value == low)):
        raise DomainError(f"{name}={value} out of range")
    if high is not None and (value > high or (high_open and value == high)):
        raise DomainError(f"{name}={value} out of range")
    return value


def inner(x, y):
    """Standard dot product along the last axis.

    Raises :class:`DimensionError` if the trailing dimensions differ.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1:] != y.shape[-1:]:
        raise DimensionError(f"dimension mismatch: {x.shape[-1:]} vs {y.shape[-1:]}")
    return np.sum(x * y, axis=-1)


def norm(x):
    """Euclidean norm along the last axis."""
    return np.linalg.norm(np.asarray(x, dtype=float), axis=-1)


def dist(x, y):
    return norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
