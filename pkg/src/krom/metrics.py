"""Reconstruction-quality metrics: chord error, geodesic distance, residence times."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MetricError(ValueError):
    pass


@dataclass
class MetricReport:
    per_coordinate_error: np.ndarray
    residence_fraction: np.ndarray
    eigenvalue_discrepancy: float
    modes_used: int


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise MetricError(f"trace length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise MetricError("empty traces")
    return a, b


def geodesic_error(theta, phi, period: float = 2 * np.pi) -> float:
    """Chord-length trajectory distance, normalized by ``T+1`` outside the square root."""
    theta, phi = _pair(theta, phi)
    w = 2 * np.pi / period
    chord = np.abs(np.exp(1j * w * theta) - np.exp(1j * w * phi))
    return float(np.sqrt(np.sum(chord**2)) / theta.size)


def euclidean_error(x, x_rom) -> float:
    """Same normalization as :func:`geodesic_error` for non-angular coordinates."""
    x, x_rom = _pair(x, x_rom)
    return float(np.sqrt(np.sum((x - x_rom) ** 2)) / x.size)


def true_geodesic(a, b, period: float = 2 * np.pi):
    """Arc distance on the circle of circumference ``period``."""
    d = np.mod(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)), period)
    out = np.minimum(d, period - d)
    return float(out) if np.ndim(out) == 0 else out


def residence_time(theta, phi, sigma: float, period: float = 2 * np.pi) -> float:
    """Fraction of times with geodesic distance in ``[0, 2*sigma)``."""
    theta, phi = _pair(theta, phi)
    if sigma < 0:
        raise MetricError("sigma must be non-negative")
    return float(np.mean(true_geodesic(theta, phi, period) < 2 * sigma))


def residence_time_linear(x, x_rom, sigma: float) -> float:
    """Fraction of times with ``|x - x_rom| < 2*sigma``."""
    x, x_rom = _pair(x, x_rom)
    if sigma < 0:
        raise MetricError("sigma must be non-negative")
    return float(np.mean(np.abs(x - x_rom) < 2 * sigma))


def eigenvalue_discrepancy(truth, computed) -> float:
    """Mean distance from each computed eigenvalue to its nearest true eigenvalue."""
    truth = np.asarray(truth, dtype=complex).reshape(-1)
    computed = np.asarray(computed, dtype=complex).reshape(-1)
    if truth.size == 0 or computed.size == 0:
        raise MetricError("eigenvalue sets must be non-empty")
    return float(np.abs(computed[:, None] - truth[None, :]).min(axis=1).mean())
