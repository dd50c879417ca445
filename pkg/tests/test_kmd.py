import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from krom.kmd import (
    DecompositionError,
    compute_dmd,
    evolve,
    modal_lstsq,
    optimal_amplitudes,
    truncate,
)
from krom.snapshots import SnapshotMatrix

from conftest import modal_data, orthonormal


def test_scalar_geometric_sequence():
    S = SnapshotMatrix(0.5 ** np.arange(6)[None, :])
    D = compute_dmd(S)
    assert D.n_modes == 1
    assert abs(D.eigenvalues[0] - 0.5) < 1e-12
    assert abs(D.modes[0, 0] - 1) < 1e-12


@pytest.mark.parametrize("kind", ["exact", "projected"])
def test_two_mode_recovery(kind):
    lam = np.array([0.9, np.exp(1j * np.pi / 4)])
    S = modal_data(lam, orthonormal(6, 2), n_t=30)
    D = compute_dmd(S, modes=kind)
    assert D.n_modes == 2
    for z in lam:
        assert np.min(np.abs(D.eigenvalues - z)) < 1e-10


def test_modes_unit_norm_and_phase_fixed(rng):
    S = SnapshotMatrix(rng.normal(size=(8, 40)) + 1j * rng.normal(size=(8, 40)))
    D = compute_dmd(S)
    assert np.allclose(np.linalg.norm(D.modes, axis=0), 1, atol=1e-12)
    lead = D.modes[np.argmax(np.abs(D.modes), axis=0), np.arange(D.n_modes)]
    assert np.all(np.abs(lead.imag) < 1e-12) and np.all(lead.real > 0)


def test_ordering_by_norm_descending(rng):
    S = SnapshotMatrix(rng.normal(size=(8, 40)))
    for order in ("amplitude", "mode"):
        D = compute_dmd(S, order_by=order)
        assert np.all(np.diff(D.raw_mode_norms) <= 1e-12)


def test_amplitude_ordering_ranks_strong_modes_first():
    lam = np.exp(1j * np.array([0.3, 0.7, 1.1]))
    S = modal_data(lam, orthonormal(5, 3), coeffs=[0.01, 5.0, 1.0], n_t=40)
    D = compute_dmd(S)
    assert abs(D.eigenvalues[0] - lam[1]) < 1e-10
    assert abs(D.eigenvalues[1] - lam[2]) < 1e-10


def test_rank_errors(rng):
    S = SnapshotMatrix(rng.normal(size=(3, 10)))
    with pytest.raises(DecompositionError):
        compute_dmd(S, rank=4)
    with pytest.raises(DecompositionError):
        compute_dmd(SnapshotMatrix(np.zeros((3, 10))))
    low = modal_data([0.9], orthonormal(4, 1), n_t=10)
    with pytest.raises(DecompositionError):
        compute_dmd(low, rank=2)


def test_truncation_identity_and_nesting(rng):
    D = compute_dmd(SnapshotMatrix(rng.normal(size=(10, 30))))
    assert np.array_equal(truncate(D, D.n_modes).eigenvalues, D.eigenvalues)
    for J1, J2 in [(2, 5), (5, 9)]:
        small, big = truncate(D, J1).eigenvalues, truncate(D, J2).eigenvalues
        assert all(z in big for z in small)
    with pytest.raises(DecompositionError):
        truncate(D, 0)


def test_optimal_amplitudes_match_lstsq(rng):
    D = compute_dmd(SnapshotMatrix(rng.normal(size=(6, 25))))
    X = rng.normal(size=(6, 25))
    b1 = optimal_amplitudes(D.modes, D.eigenvalues, X)
    b2 = modal_lstsq(D.modes, D.eigenvalues, X, np.arange(25))
    assert np.allclose(b1, b2, atol=1e-9)


def test_evolve_advances_one_step():
    lam = np.array([0.8, np.exp(0.5j)])
    S = modal_data(lam, orthonormal(4, 2), n_t=20)
    D = compute_dmd(S)
    assert np.allclose(evolve(D, S.values[:, :-1]), S.values[:, 1:], atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_recovers_random_spectra(k, seed):
    r = np.random.default_rng(seed)
    lam = r.uniform(0.6, 1.0, k) * np.exp(1j * r.uniform(-np.pi, np.pi, k))
    # well separated spectra only
    if k > 1 and np.min(np.abs(lam[:, None] - lam[None, :]) + np.eye(k) * 9) < 0.05:
        return
    S = modal_data(lam, orthonormal(6, k, seed), n_t=30)
    D = compute_dmd(S, rank=k)
    for z in lam:
        assert np.min(np.abs(D.eigenvalues - z)) < 1e-8
