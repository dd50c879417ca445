"""Seeded simulators for the benchmark systems.

Every simulator is a pure function of its config. Each noise source draws from
its own PCG64 stream, derived from the config seed with a fixed spawn key so that
changing one source (say the noise level) never shifts the others.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .snapshots import SnapshotMatrix

# sub-stream ids
STREAM_MODES = 0
STREAM_EIGS = 1
STREAM_XI = 2
STREAM_ZETA = 3
STREAM_PERM = 4
STREAM_INIT = 5
STREAM_OMEGA = 6
STREAM_ACTION_NOISE = 7


class ConfigError(ValueError):
    pass


def stream(seed: int, stream_id: int) -> np.random.Generator:
    """Independent generator for one noise source of a run."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(stream_id,))
    return np.random.Generator(np.random.PCG64(ss))


def _n_samples(t_final: float, dt: float) -> int:
    n = t_final / dt
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ConfigError(f"t_final={t_final} is not a multiple of dt={dt}")
    return int(round(n)) + 1


@dataclass(frozen=True)
class LinearModalConfig:
    J_true: int = 10
    n: int = 20
    noise_std: float = 0.25
    n_steps: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.J_true < 1 or self.n < self.J_true:
            raise ConfigError("need 1 <= J_true <= n")
        if self.noise_std < 0 or self.n_steps < 2:
            raise ConfigError("need noise_std >= 0 and n_steps >= 2")


@dataclass(frozen=True)
class AnharmonicConfig:
    n_osc: int = 10
    dt: float = 0.05
    t_final: float = 20.0
    coupling_c: float = 0.5
    lambda_exp: float = 1.0
    noise_std: float = 0.05
    seed: int = 0
    f: str = "linear"

    def __post_init__(self):
        if not 0 < self.coupling_c < 1:
            raise ConfigError("coupling_c must lie in (0, 1)")
        if self.dt <= 0 or self.lambda_exp <= 0 or self.noise_std < 0 or self.n_osc < 1:
            raise ConfigError("invalid anharmonic parameters")
        if self.f not in FREQUENCY_MAPS:
            raise ConfigError(f"unknown frequency map {self.f!r}")
        _n_samples(self.t_final, self.dt)


@dataclass(frozen=True)
class KuramotoConfig:
    n_osc: int = 10
    dt: float = 0.05
    t_final: float = 20.0
    K: float = 5.0
    zeta_std: float = 1.0
    # variance of the frequency noise: N(0, 0.25) read as N(mean, variance)
    xi_var_param: float = 0.25
    omega_range: tuple[float, float] = (0.25, 0.75)
    seed: int = 0

    def __post_init__(self):
        if self.n_osc < 2 or self.dt <= 0 or self.zeta_std < 0 or self.xi_var_param < 0:
            raise ConfigError("invalid Kuramoto parameters")
        object.__setattr__(self, "omega_range", tuple(float(w) for w in self.omega_range))
        _n_samples(self.t_final, self.dt)


def config_to_dict(cfg) -> dict:
    d = asdict(cfg)
    if "omega_range" in d:
        d["omega_range"] = list(d["omega_range"])
    return d


# nondecreasing with f(0) = 0
FREQUENCY_MAPS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "linear": lambda I: I,
    "cubic": lambda I: I**3,
}


def simulate_linear_modal(cfg: LinearModalConfig):
    """Sum of fixed modes rotating with unit-modulus eigenvalues plus Gaussian noise.

    Returns the snapshot matrix and the generating ``(modes, eigenvalues)``.
    """
    modes = stream(cfg.seed, STREAM_MODES).uniform(-1.0, 1.0, size=(cfg.n, cfg.J_true))
    modes /= np.linalg.norm(modes, axis=0)
    box = stream(cfg.seed, STREAM_EIGS).uniform(-1.0, 1.0, size=(cfg.J_true, 2))
    lam = box[:, 0] + 1j * box[:, 1]
    lam /= np.abs(lam)

    t = np.arange(cfg.n_steps)
    signal = modes @ (lam[:, None] ** t[None, :])
    xi = stream(cfg.seed, STREAM_XI).normal(0.0, 1.0, size=(cfg.n, cfg.n_steps))
    X = signal + cfg.noise_std * xi
    S = SnapshotMatrix(X, dt=1.0, coord_names=tuple(f"x{i}" for i in range(cfg.n)))
    return S, (modes, lam)


@dataclass(frozen=True, eq=False)
class PermutationState:
    """Initial permutations ``p, q`` and the fixed permutation matrices ``P, Q``."""

    p: np.ndarray
    q: np.ndarray
    P: np.ndarray
    Q: np.ndarray

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "PermutationState":
        eye = np.eye(n, dtype=np.int64)
        p, q = rng.permutation(n), rng.permutation(n)
        P, Q = eye[rng.permutation(n)], eye[rng.permutation(n)]
        return cls(p, q, P, Q)


def step_permutation(state: PermutationState, t: float):
    """``p(t) = P^floor(t) p``, ``q(t) = Q^floor(t) q`` and the single edge ``(p_0, q_0)``."""
    k = math.floor(t)
    if k < 0:
        raise ValueError("t must be non-negative")
    p = np.linalg.matrix_power(state.P, k) @ state.p
    q = np.linalg.matrix_power(state.Q, k) @ state.q
    return p, q, {(int(p[0]), int(q[0]))}


def action_jump(I: np.ndarray, edges, c: float, noise=None) -> np.ndarray:
    """Apply one coupling jump: each edge exchanges ``c`` times the action difference."""
    new = I.copy()
    for a, b in edges:
        if a == b:
            continue
        new[a] += c * (I[b] - I[a])
        new[b] += c * (I[a] - I[b])
    if noise is not None:
        new += noise
    return new


def simulate_anharmonic(cfg: AnharmonicConfig, return_edges: bool = False):
    """Switched anharmonic oscillators; observable is ``(I_0..I_{n-1}, theta_0..theta_{n-1})``.

    Actions are piecewise constant and jump just after each integer time ``k``;
    angles (mod 1) advance at rate ``f(I)`` and are integrated exactly.
    """
    n = cfg.n_osc
    f = FREQUENCY_MAPS[cfg.f]
    n_t = _n_samples(cfg.t_final, cfg.dt)
    times = cfg.dt * np.arange(n_t)

    init = stream(cfg.seed, STREAM_INIT)
    I0 = init.exponential(1.0 / cfg.lambda_exp, size=n)
    theta0 = init.uniform(0.0, 1.0, size=n)
    perms = PermutationState.random(n, stream(cfg.seed, STREAM_PERM))
    noise_rng = stream(cfg.seed, STREAM_ACTION_NOISE)

    # actions after jump k hold on (k, k+1]
    n_jumps = max(1, math.ceil(times[-1] - 1e-9))
    after = np.empty((n_jumps, n))
    edges = []
    I = I0
    for k in range(n_jumps):
        E = step_permutation(perms, k)[2]
        eta = noise_rng.normal(0.0, cfg.noise_std, size=n) if cfg.noise_std > 0 else None
        I = action_jump(I, E, cfg.coupling_c, eta)
        after[k] = I
        edges.append(E)

    def action(s):
        return I0 if s <= 0 else after[min(math.floor(s - 1e-12), n_jumps - 1)]

    actions = np.empty((n, n_t))
    angles = np.empty((n, n_t))
    actions[:, 0] = I0
    theta = theta0.copy()
    angles[:, 0] = theta
    for i in range(1, n_t):
        a, b = times[i - 1], times[i]
        cuts = [a] + [m for m in range(math.floor(a) + 1, math.ceil(b)) if a + 1e-12 < m < b - 1e-12] + [b]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            theta = theta + f(action(0.5 * (lo + hi))) * (hi - lo)
        theta = np.mod(theta, 1.0)
        angles[:, i] = theta
        actions[:, i] = action(b)

    names = tuple(f"I{j}" for j in range(n)) + tuple(f"theta{j}" for j in range(n))
    S = SnapshotMatrix(np.vstack([actions, angles]), dt=cfg.dt, coord_names=names)
    return (S, edges) if return_edges else S


def simulate_kuramoto(cfg: KuramotoConfig) -> SnapshotMatrix:
    """Forward-Euler Kuramoto network with static symmetric random coupling.

    Frequency noise is a fresh draw each step, added to the drift (scaled by dt).
    Angles are reported in ``[0, 2*pi)``.
    """
    N = cfg.n_osc
    n_t = _n_samples(cfg.t_final, cfg.dt)
    Z = stream(cfg.seed, STREAM_ZETA).normal(0.0, cfg.zeta_std, size=(N, N)) if cfg.zeta_std > 0 else np.zeros((N, N))
    Z = np.triu(Z) + np.triu(Z, 1).T
    coupling = (cfg.K + Z) / N
    omega = stream(cfg.seed, STREAM_OMEGA).uniform(*cfg.omega_range, size=N)
    theta = stream(cfg.seed, STREAM_INIT).uniform(0.0, 2 * np.pi, size=N)
    xi_rng = stream(cfg.seed, STREAM_XI)
    xi_std = math.sqrt(cfg.xi_var_param)

    out = np.empty((N, n_t))
    out[:, 0] = theta
    for i in range(1, n_t):
        xi = xi_rng.normal(0.0, xi_std, size=N) if xi_std > 0 else 0.0
        drive = np.sum(coupling * np.sin(theta[None, :] - theta[:, None]), axis=1)
        theta = np.mod(theta + cfg.dt * (omega + xi + drive), 2 * np.pi)
        theta[theta >= 2 * np.pi] = 0.0
        out[:, i] = theta
    S = SnapshotMatrix(out, dt=cfg.dt, coord_names=tuple(f"theta{j}" for j in range(N)))
    return S
