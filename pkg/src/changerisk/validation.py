"""Small input-validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError


def check_mode(name: str, value, allowed: Sequence[str]) -> str:
    if value not in allowed:
        raise ConfigError(
            f"{name} must be one of {', '.join(allowed)}; got {value!r}")
    return value


def check_int_at_least(name: str, value, minimum: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def check_positive_real(name: str, value) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
        raise ConfigError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def check_fraction(name: str, value) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) \
            or not 0.0 < float(value) < 1.0:
        raise ConfigError(f"{name} must be strictly between 0 and 1, got {value!r}")
    return float(value)


def check_change_requests(crs: Iterable) -> list:
    out = list(crs)
    seen: set[str] = set()
    for cr in out:
        if not cr.id:
            raise DataError("change request with empty id", stage="ingest")
        if cr.id in seen:
            raise DataError(f"duplicate change-request id {cr.id!r}",
                            stage="ingest")
        seen.add(cr.id)
    return out


def check_dissimilarity(dist) -> np.ndarray:
    """Validate a square symmetric zero-diagonal dissimilarity matrix."""
    arr = np.asarray(dist, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DataError(f"dissimilarity matrix must be square, got {arr.shape}",
                        stage="correlation")
    if arr.shape[0] == 0:
        raise DataError("dissimilarity matrix is empty", stage="correlation")
    if not np.allclose(arr, arr.T, atol=1e-12):
        raise DataError("dissimilarity matrix is not symmetric",
                        stage="correlation")
    if not np.allclose(np.diag(arr), 0.0, atol=1e-12):
        raise DataError("dissimilarity matrix diagonal must be zero",
                        stage="correlation")
    if np.any(arr < 0):
        raise DataError("dissimilarity values must be non-negative",
                        stage="correlation")
    return arr
