"""Koopman mode decomposition of snapshot data by DMD."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .snapshots import SnapshotMatrix

SVD_CUTOFF = 1e-12
ZERO_EIG = 1e-12


class DecompositionError(ValueError):
    """Raised when data cannot be decomposed as requested."""


@dataclass(frozen=True, eq=False)
class KoopmanDecomposition:
    """Eigenvalues and unit-norm modes, ordered by Koopman mode norm (descending).

    ``raw_mode_norms`` are the norms of the modes before normalization, scaled by
    their amplitude in the decomposed data (see :func:`compute_dmd`).
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    raw_mode_norms: np.ndarray
    rank_used: int
    source_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=complex).reshape(-1)
        modes = np.asarray(self.modes, dtype=complex)
        norms = np.asarray(self.raw_mode_norms, dtype=float).reshape(-1)
        if modes.ndim != 2 or not (lam.size == modes.shape[1] == norms.size):
            raise DecompositionError("eigenvalue, mode and norm counts disagree")
        for a in (lam, modes, norms):
            a.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "raw_mode_norms", norms)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.size

    @property
    def n_obs(self) -> int:
        return self.modes.shape[0]

    def vandermonde(self, t) -> np.ndarray:
        """``lambda_j ** t`` as an array of shape ``(len(t), n_modes)``."""
        t = np.asarray(t)
        return self.eigenvalues[None, :] ** t[:, None]


def truncate(D: KoopmanDecomposition, J: int) -> KoopmanDecomposition:
    """Keep the ``J`` leading modes."""
    if not 1 <= J <= D.n_modes:
        raise DecompositionError(f"truncation {J} outside [1, {D.n_modes}]")
    return replace(
        D,
        eigenvalues=D.eigenvalues[:J],
        modes=D.modes[:, :J],
        raw_mode_norms=D.raw_mode_norms[:J],
    )


def modal_lstsq(modes, eigenvalues, X, t) -> np.ndarray:
    """Coefficients ``c`` minimizing ``sum_t ||X[:, k] - sum_j c_j lam_j**t_k m_j||^2``.

    The stacked Vandermonde-times-mode design is never formed in the data space:
    after a thin QR of the mode matrix the problem reduces to ``J*len(t)`` rows,
    which is equivalent because Q is an isometry. Solved by SVD (minimum norm
    when rank deficient).
    """
    modes = np.asarray(modes, dtype=complex)
    X = np.asarray(X, dtype=complex)
    t = np.asarray(t)
    if X.shape != (modes.shape[0], t.size):
        raise DecompositionError(
            f"data shape {X.shape} does not match {modes.shape[0]} rows x {t.size} times"
        )
    Q, R = np.linalg.qr(modes)
    Y = Q.conj().T @ X
    V = np.asarray(eigenvalues, dtype=complex)[None, :] ** t[:, None]
    # column j of the design is vec(R[:, j] * V[:, j]^T) in time-major order
    A = (V[:, None, :] * R[None, :, :]).reshape(t.size * R.shape[0], R.shape[1])
    c, *_ = np.linalg.lstsq(A, Y.T.reshape(-1), rcond=SVD_CUTOFF)
    return c


def optimal_amplitudes(modes, eigenvalues, X) -> np.ndarray:
    """Amplitudes ``b`` minimizing ``||X - modes diag(b) Vandermonde||_F`` over all columns.

    Solved through the ``M x M`` Hermitian system of the optimal-amplitude
    formulation, which is cheap for many modes; only used to rank modes.
    """
    V = np.asarray(eigenvalues)[:, None] ** np.arange(X.shape[1])[None, :]
    G = modes.conj().T @ modes
    P = G * (V @ V.conj().T).conj()
    q = np.einsum("jt,tj->j", V, (X.conj().T @ modes)).conj()
    return np.linalg.lstsq(P, q, rcond=None)[0]


def compute_dmd(
    X: SnapshotMatrix,
    rank: int | None = None,
    order_by: str = "amplitude",
    modes: str = "projected",
) -> KoopmanDecomposition:
    """Exact DMD of ``X`` with modes normalized and sorted by mode norm.

    ``rank`` truncates the SVD of the shifted snapshot matrix; by default every
    singular value above ``1e-12 * sigma_max`` is kept.

    ``order_by="amplitude"`` ranks modes by ``|b_j| * ||m_j||`` where ``b`` are
    the least-squares amplitudes of the modes over all columns of ``X``, i.e.
    the norms of the Koopman modes in ``x(t) = sum_j lam_j**t v_j``.
    ``order_by="mode"`` ranks by the norm of the unscaled exact DMD modes.
    """
    if order_by not in ("amplitude", "mode"):
        raise ValueError(f"unknown ordering {order_by!r}")
    if modes not in ("exact", "projected"):
        raise ValueError(f"unknown mode kind {modes!r}")
    data = X.values
    if X.n_t < 3:
        raise DecompositionError("need at least 3 snapshots")
    if not np.any(data):
        raise DecompositionError("cannot decompose an all-zero matrix")
    X0, X1 = data[:, :-1], data[:, 1:]
    U, s, Vh = np.linalg.svd(X0, full_matrices=False)
    numerical_rank = int(np.sum(s > SVD_CUTOFF * s[0]))
    if numerical_rank == 0:
        raise DecompositionError("shifted data matrix has rank zero")
    if rank is None:
        rank = numerical_rank
    elif not 1 <= rank <= min(X.n_obs, X.n_t - 1):
        raise DecompositionError(f"rank {rank} outside [1, {min(X.n_obs, X.n_t - 1)}]")
    elif rank > numerical_rank:
        raise DecompositionError(f"rank {rank} exceeds numerical rank {numerical_rank}")
    U, s, V = U[:, :rank], s[:rank], Vh[:rank].conj().T

    B = X1 @ (V / s)
    A_tilde = U.conj().T @ B
    lam, W = np.linalg.eig(A_tilde)

    kind = modes
    modes = U @ W
    if kind == "exact":
        for j in range(rank):
            if abs(lam[j]) >= ZERO_EIG:
                modes[:, j] = B @ W[:, j] / lam[j]
    mode_norms = np.linalg.norm(modes, axis=0)
    if np.any(mode_norms == 0):
        raise DecompositionError("degenerate zero mode")
    modes = modes / mode_norms
    # fix the global phase: largest-magnitude entry real and positive
    lead = modes[np.argmax(np.abs(modes), axis=0), np.arange(rank)]
    modes = modes * (np.abs(lead) / lead)

    if order_by == "amplitude":
        norms = np.abs(optimal_amplitudes(modes, lam, data))
    else:
        norms = mode_norms
    # lexsort: last key is primary
    order = np.lexsort((np.arange(rank), np.angle(lam), -np.abs(lam), -norms))
    return KoopmanDecomposition(
        eigenvalues=lam[order],
        modes=modes[:, order],
        raw_mode_norms=norms[order],
        rank_used=rank,
        source_meta=X.metadata(),
    )


def evolve(D: KoopmanDecomposition, X0) -> np.ndarray:
    """Advance columns of ``X0`` one step through the identified linear operator."""
    coords = np.linalg.lstsq(D.modes, np.asarray(X0, dtype=complex), rcond=SVD_CUTOFF)[0]
    return D.modes @ (D.eigenvalues[:, None] * coords)
