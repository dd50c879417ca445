"""Deterministic reduced order model: reconstruction coefficients, evaluation, forecasts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kmd import KoopmanDecomposition, modal_lstsq
from .snapshots import SnapshotMatrix


class ModelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ReducedOrderModel:
    """Truncated decomposition plus reconstruction coefficients.

    Time index 0 is the first column of the data the model was fitted to;
    ``train_window`` is the half-open column range used for the fit.
    """

    decomposition: KoopmanDecomposition
    coefficients: np.ndarray
    train_window: tuple[int, int]
    dt: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex).reshape(-1)
        if c.size != self.decomposition.n_modes:
            raise ModelError(f"{c.size} coefficients for {self.decomposition.n_modes} modes")
        start, stop = self.train_window
        if not 0 <= start < stop:
            raise ModelError(f"invalid training window {self.train_window}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "train_window", (int(start), int(stop)))

    @property
    def n_modes(self) -> int:
        return self.decomposition.n_modes

    def evaluate(self, t) -> np.ndarray:
        """Deterministic trajectory ``sum_j c_j lam_j**t m_j`` as an ``(n_obs, len(t))`` array."""
        V = self.decomposition.vandermonde(t)
        return self.decomposition.modes @ (self.coefficients[:, None] * V.T)


def _check_window(window, n_t) -> tuple[int, int]:
    start, stop = (int(w) for w in window)
    if not 0 <= start < stop <= n_t:
        raise ModelError(f"window {window} empty or outside [0, {n_t}]")
    return start, stop


def fit_coefficients(
    D: KoopmanDecomposition, X: SnapshotMatrix, window=None
) -> ReducedOrderModel:
    """Least-squares reconstruction coefficients over ``window`` (default: all columns)."""
    if X.n_obs != D.n_obs:
        raise ModelError(f"data has {X.n_obs} rows, modes have {D.n_obs}")
    start, stop = _check_window(window or (0, X.n_t), X.n_t)
    t = np.arange(start, stop)
    c = modal_lstsq(D.modes, D.eigenvalues, X.values[:, start:stop], t)
    return ReducedOrderModel(D, c, (start, stop), X.dt)


def reconstruct(R: ReducedOrderModel, t_indices, like: SnapshotMatrix | None = None) -> SnapshotMatrix:
    """Evaluate the model at integer times, carrying the metadata of ``like``."""
    t = np.asarray(t_indices)
    if t.ndim != 1 or t.size < 2 or not np.issubdtype(t.dtype, np.integer):
        raise ModelError("t_indices must be a 1-D integer range of length >= 2")
    values = R.evaluate(t)
    if like is None:
        return SnapshotMatrix(values, dt=R.dt, t0=R.dt * int(t[0]))
    return like.with_values(values, t0=like.t0 + like.dt * int(t[0]))


def forecast_stats(R: ReducedOrderModel, N, t: int):
    """Mean and variance of the in-plane prediction at time ``t``.

    The mean is the deterministic prediction offset by the modal noise mean; the
    variance is that of the modal noise, ``E|rho - E rho|^2`` per coordinate
    (real-part plus imaginary-part variance).
    """
    if N.n_modes != R.n_modes or N.train_window != R.train_window:
        raise ModelError("noise decomposition was not computed from this model")
    fits = N.gaussian_fits
    offset = fits.mean_re + 1j * fits.mean_im
    mean = R.evaluate(np.array([t]))[:, 0] + offset
    variance = fits.std_re**2 + fits.std_im**2
    return mean, variance
