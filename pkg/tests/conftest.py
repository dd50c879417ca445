import numpy as np
import pytest

from krom.snapshots import SnapshotMatrix


def modal_data(lam, modes, coeffs=None, n_t=50):
    """Noise-free ``sum_j c_j lam_j**t m_j`` as a SnapshotMatrix."""
    lam = np.asarray(lam, dtype=complex)
    modes = np.asarray(modes, dtype=complex)
    c = np.ones(lam.size) if coeffs is None else np.asarray(coeffs, dtype=complex)
    t = np.arange(n_t)
    return SnapshotMatrix(modes @ (c[:, None] * lam[:, None] ** t[None, :]))


def orthonormal(n, k, seed=0):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k)))
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
