"""Residual, modal and innovation noise; Gaussian fits and confidence bands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kmd import SVD_CUTOFF, KoopmanDecomposition
from .rom import ReducedOrderModel, _check_window
from .snapshots import COMPLEXIFIED, SnapshotMatrix, angles_from_complex, base_block


class NoiseError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GaussianFits:
    """Per-coordinate sample mean and (n-1) standard deviation of real and imaginary parts."""

    mean_re: np.ndarray
    std_re: np.ndarray
    mean_im: np.ndarray
    std_im: np.ndarray

    @property
    def pooled_std(self) -> np.ndarray:
        """``sqrt(E|z - Ez|^2 / 2)``: one scale for complex coordinates."""
        return np.sqrt((self.std_re**2 + self.std_im**2) / 2)

    def rows(self, stop: int) -> "GaussianFits":
        return GaussianFits(
            self.mean_re[:stop], self.std_re[:stop], self.mean_im[:stop], self.std_im[:stop]
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("mean_re", "std_re", "mean_im", "std_im")}

    @classmethod
    def from_dict(cls, d) -> "GaussianFits":
        return cls(*(np.asarray(d[k], dtype=float) for k in ("mean_re", "std_re", "mean_im", "std_im")))


@dataclass(frozen=True, eq=False)
class NoiseDecomposition:
    residual: np.ndarray
    modal: np.ndarray
    innovation: np.ndarray
    eval_window: tuple[int, int]
    gaussian_fits: GaussianFits
    n_modes: int
    train_window: tuple[int, int]


@dataclass(frozen=True, eq=False)
class ConfidenceBand:
    center: np.ndarray
    half_width: np.ndarray
    k: float = 2.0

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.half_width[:, None]

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.half_width[:, None]


def compute_residual(R: ReducedOrderModel, X: SnapshotMatrix, window=None) -> np.ndarray:
    """``r(t) = x(t) - D^t x`` for every column index in ``window``."""
    if X.n_obs != R.decomposition.n_obs:
        raise NoiseError(f"data has {X.n_obs} rows, model has {R.decomposition.n_obs}")
    start, stop = _check_window(window or (0, X.n_t), X.n_t)
    return X.values[:, start:stop] - R.evaluate(np.arange(start, stop))


def mode_basis(D: KoopmanDecomposition) -> np.ndarray:
    """Orthonormal basis of the mode span (left singular vectors above the cutoff)."""
    if D.n_modes == 0:
        raise NoiseError("empty mode matrix")
    U, s, _ = np.linalg.svd(D.modes, full_matrices=False)
    return U[:, s > SVD_CUTOFF * s[0]]


def project_modal(D: KoopmanDecomposition, r) -> np.ndarray:
    """Orthogonal projection ``M M^+ r`` onto the span of the modes."""
    r = np.asarray(r, dtype=complex)
    if r.shape[0] != D.n_obs:
        raise NoiseError(f"residual has {r.shape[0]} rows, modes have {D.n_obs}")
    # M M^+ = U_r U_r^* for the truncated SVD M = U_r S_r V_r^*
    Ur = mode_basis(D)
    return Ur @ (Ur.conj().T @ r)


def compute_innovation(r, rho) -> np.ndarray:
    r = np.asarray(r, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if r.shape != rho.shape:
        raise NoiseError(f"shape mismatch {r.shape} vs {rho.shape}")
    return r - rho


def fit_gaussian(seq) -> GaussianFits:
    """Fit independent Gaussians to real and imaginary parts along each row."""
    seq = np.asarray(seq, dtype=complex)
    if seq.ndim == 1:
        seq = seq[None, :]
    if seq.shape[1] < 2:
        raise NoiseError("need at least 2 samples per coordinate")
    return GaussianFits(
        seq.real.mean(axis=1),
        seq.real.std(axis=1, ddof=1),
        seq.imag.mean(axis=1),
        seq.imag.std(axis=1, ddof=1),
    )


def decompose_noise(R: ReducedOrderModel, X: SnapshotMatrix, window=None) -> NoiseDecomposition:
    """Residual, modal and innovation sequences over ``window`` plus modal Gaussian fits."""
    window = _check_window(window or (0, X.n_t), X.n_t)
    r = compute_residual(R, X, window)
    rho = project_modal(R.decomposition, r)
    eta = compute_innovation(r, rho)
    return NoiseDecomposition(
        residual=r,
        modal=rho,
        innovation=eta,
        eval_window=window,
        gaussian_fits=fit_gaussian(rho),
        n_modes=R.n_modes,
        train_window=R.train_window,
    )


def band_sigma(fits: GaussianFits, like: SnapshotMatrix) -> np.ndarray:
    """Per base coordinate noise scale in display units.

    Real coordinates use the real-part std. Complexified angles use the pooled
    complex std, a chord length on the unit circle, converted to angle units.
    """
    base = base_block(like)
    fits = fits.rows(base.n_obs)
    if like.representation.angle_kind == COMPLEXIFIED:
        return fits.pooled_std * like.period / (2 * np.pi)
    return fits.std_re


def confidence_band(
    R: ReducedOrderModel,
    fits: GaussianFits,
    t_indices,
    like: SnapshotMatrix,
    k: float = 2.0,
    offset: bool = False,
) -> ConfidenceBand:
    """``center +- k*sigma`` around the reconstruction of the undelayed coordinates.

    With ``offset`` the modal noise mean is added to the centre first.
    """
    if not k > 0:
        raise NoiseError(f"band multiplier must be positive, got {k}")
    base = base_block(like)
    values = R.evaluate(np.asarray(t_indices))[: base.n_obs]
    if offset:
        f = fits.rows(base.n_obs)
        values = values + (f.mean_re + 1j * f.mean_im)[:, None]
    if like.representation.angle_kind == COMPLEXIFIED:
        center = angles_from_complex(values, like.period)
    else:
        center = values.real
    return ConfidenceBand(center=center, half_width=k * band_sigma(fits, like), k=float(k))
