"""End-to-end experiment: simulate, embed, decompose, sweep ROM sizes, score, report."""

from __future__ import annotations

import json
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, io
from .kmd import KoopmanDecomposition, compute_dmd, truncate
from .metrics import (
    MetricReport,
    eigenvalue_discrepancy,
    euclidean_error,
    geodesic_error,
    residence_time,
    residence_time_linear,
)
from .modeselect import NormalityReport, qq_pairs, select_min_modes
from .noise import ConfidenceBand, NoiseDecomposition, band_sigma, confidence_band, decompose_noise
from .rom import ReducedOrderModel, fit_coefficients
from .snapshots import (
    SnapshotMatrix,
    base_block,
    complexify_angles,
    hankel_embed,
    load_snapshots,
    save_snapshots,
)
from .systems import (
    AnharmonicConfig,
    ConfigError,
    KuramotoConfig,
    LinearModalConfig,
    config_to_dict,
    simulate_anharmonic,
    simulate_kuramoto,
    simulate_linear_modal,
)

SYSTEMS = {
    "linear_modal": LinearModalConfig,
    "anharmonic": AnharmonicConfig,
    "kuramoto": KuramotoConfig,
}


@dataclass
class ExperimentConfig:
    """One experiment run.

    Windows are half-open column ranges of the (delay-embedded) data matrix.
    ``dmd_window`` defaults to every column; ``train_window`` to all but the last
    column (coefficients fit over t = 0..T-1 of data t = 0..T); ``eval_window``,
    used for the noise sequences and the metrics, defaults to ``train_window``.
    """

    system: str
    system_params: dict = field(default_factory=dict)
    delay: int = 1
    mode_sweep: list[int] = field(default_factory=lambda: list(range(10, 101, 10)))
    dmd_window: list[int] | None = None
    train_window: list[int] | None = None
    eval_window: list[int] | None = None
    band_k: float = 2.0
    angle_handling: str = "raw"
    seed: int = 0
    rank: int | None = None
    dmd_modes: str = "projected"
    threshold: float = 0.05
    name: str | None = None
    output_dir: str = "out"
    workers: int = 1

    def __post_init__(self):
        if self.system not in (*SYSTEMS, "external_csv"):
            raise ConfigError(f"unknown system {self.system!r}")
        if self.angle_handling not in ("raw", "complexify"):
            raise ConfigError(f"angle_handling must be raw or complexify, got {self.angle_handling!r}")
        if not self.mode_sweep or list(self.mode_sweep) != sorted(self.mode_sweep):
            raise ConfigError("mode_sweep must be a non-empty ascending list")
        if self.delay < 1:
            raise ConfigError("delay must be >= 1")
        if not self.band_k > 0:
            raise ConfigError("band_k must be positive")
        self.mode_sweep = [int(J) for J in self.mode_sweep]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def system_config(self):
        """Typed simulator config; the experiment seed wins over any seed in the params."""
        params = dict(self.system_params)
        if self.system == "external_csv":
            return params
        params["seed"] = self.seed
        try:
            return SYSTEMS[self.system](**params)
        except TypeError as exc:
            raise ConfigError(f"bad {self.system} parameters: {exc}") from exc

    @property
    def run_id(self) -> str:
        return self.name or f"{self.system}-seed{self.seed}"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AngleInfo:
    """Which base coordinates are angles, and their period."""

    rows: tuple[int, ...] = ()
    period: float | None = None


@dataclass
class ModelResult:
    J: int
    rom: ReducedOrderModel
    noise: NoiseDecomposition
    band: ConfidenceBand
    sigma: np.ndarray
    metrics: MetricReport


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    data: SnapshotMatrix
    embedded: SnapshotMatrix
    decomposition: KoopmanDecomposition
    models: list[ModelResult]
    normality: NormalityReport
    angles: AngleInfo
    truth: tuple | None = None

    def model(self, J: int) -> ModelResult:
        for m in self.models:
            if m.J == J:
                return m
        raise KeyError(J)


def generate_data(cfg: ExperimentConfig):
    """Raw snapshot data, angle layout and (for the linear system) ground truth."""
    sys_cfg = cfg.system_config()
    if cfg.system == "linear_modal":
        S, truth = simulate_linear_modal(sys_cfg)
        return S, AngleInfo(), truth
    if cfg.system == "anharmonic":
        n = sys_cfg.n_osc
        return simulate_anharmonic(sys_cfg), AngleInfo(tuple(range(n, 2 * n)), 1.0), None
    if cfg.system == "kuramoto":
        S = simulate_kuramoto(sys_cfg)
        return S, AngleInfo(tuple(range(S.n_obs)), 2 * np.pi), None
    if "path" not in sys_cfg:
        raise ConfigError("external_csv needs system_params.path")
    S = load_snapshots(sys_cfg["path"])
    rows = sys_cfg.get("angle_rows", [])
    rows = tuple(range(S.n_obs)) if rows == "all" else tuple(int(r) for r in rows)
    return S, AngleInfo(rows, sys_cfg.get("angle_period")), None


def prepare(cfg: ExperimentConfig, S: SnapshotMatrix, angles: AngleInfo) -> SnapshotMatrix:
    X = S
    if cfg.angle_handling == "complexify":
        if angles.period is None or len(angles.rows) != S.n_obs:
            raise ConfigError("complexify needs every coordinate to be an angle")
        X = complexify_angles(S, angles.period)
    return hankel_embed(X, cfg.delay)


def _window(w, default):
    return tuple(int(v) for v in w) if w is not None else default


def score(
    true: np.ndarray, band: ConfidenceBand, sigma: np.ndarray, angles: AngleInfo
) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate reconstruction error and residence fraction."""
    n = true.shape[0]
    err, res = np.empty(n), np.empty(n)
    for i in range(n):
        if i in angles.rows:
            err[i] = geodesic_error(true[i], band.center[i], angles.period)
            res[i] = residence_time(true[i], band.center[i], sigma[i], angles.period)
        else:
            err[i] = euclidean_error(true[i], band.center[i])
            res[i] = residence_time_linear(true[i], band.center[i], sigma[i])
    return err, res


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    S, angles, truth = generate_data(cfg)
    H = prepare(cfg, S, angles)
    dmd_window = _window(cfg.dmd_window, (0, H.n_t))
    train = _window(cfg.train_window, (0, H.n_t - 1))
    evalw = _window(cfg.eval_window, train)

    D = compute_dmd(H.columns(*dmd_window), rank=cfg.rank, modes=cfg.dmd_modes)
    if cfg.mode_sweep[-1] > D.n_modes:
        raise ConfigError(f"mode sweep reaches {cfg.mode_sweep[-1]} but only {D.n_modes} modes exist")

    base_n = base_block(H).n_obs
    t_eval = np.arange(*evalw)
    true = S.values.real[:, evalw[0] : evalw[1]]

    def build(J: int) -> ModelResult:
        R = fit_coefficients(truncate(D, J), H, train)
        N = decompose_noise(R, H, evalw)
        band = confidence_band(R, N.gaussian_fits, t_eval, H, k=cfg.band_k)
        sigma = band_sigma(N.gaussian_fits, H)
        err, res = score(true, band, sigma, angles)
        disc = eigenvalue_discrepancy(truth[1], R.decomposition.eigenvalues) if truth else float("nan")
        return ModelResult(J, R, N, band, sigma, MetricReport(err, res, disc, J))

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            models = list(pool.map(build, cfg.mode_sweep))
    else:
        models = [build(J) for J in cfg.mode_sweep]

    normality = select_min_modes(
        [(m.J, m.noise.modal[:base_n]) for m in models], threshold=cfg.threshold
    )
    return ExperimentResult(cfg, S, H, D, models, normality, angles, truth)


def run_dir(cfg: ExperimentConfig, out_dir=None) -> Path:
    root = Path(out_dir or cfg.output_dir) / cfg.run_id
    root.mkdir(parents=True, exist_ok=True)
    return root


def write_snapshots(root: Path, S: SnapshotMatrix, embedded: SnapshotMatrix | None = None) -> None:
    (root / "snapshots").mkdir(exist_ok=True)
    save_snapshots(S, root / "snapshots" / "data.csv")
    if embedded is not None:
        save_snapshots(embedded, root / "snapshots" / "embedded.csv")


def write_decomposition(root: Path, D: KoopmanDecomposition) -> None:
    (root / "kmd").mkdir(exist_ok=True)
    io.save_decomposition(D, root / "kmd" / "decomposition.kmd.json")


def _times(S: SnapshotMatrix, window) -> np.ndarray:
    return S.t0 + S.dt * np.arange(*window)


def write_model(root: Path, result: ExperimentResult, m: ModelResult, noise: bool = True) -> Path:
    """Per-J files: model, eigenvalues, reconstruction and (with ``noise``) noise, band and QQ data."""
    S, H = result.data, result.embedded
    names = base_block(H).coord_names
    d = root / "roms" / f"J{m.J}"
    d.mkdir(parents=True, exist_ok=True)
    io.save_rom(m.rom, d / "rom.json", decomposition_ref="../../kmd/decomposition.kmd.json")
    lam = m.rom.decomposition.eigenvalues
    io.write_rows(
        d / "eigenvalues.csv",
        ["index", "re", "im", "abs", "norm"],
        [[j, z.real, z.imag, abs(z), nrm] for j, (z, nrm) in enumerate(zip(lam, m.rom.decomposition.raw_mode_norms))],
    )
    evalw = m.noise.eval_window
    times = _times(S, evalw)
    true = S.values.real[: len(names), evalw[0] : evalw[1]]
    lo, hi, c = m.band.lower, m.band.upper, m.band.center
    io.write_rows(
        d / "reconstruction.csv",
        ["t"] + [f"{n}_{s}" for n in names for s in ("true", "rom", "band_lo", "band_hi")],
        [[t] + [v for i in range(len(names)) for v in (true[i, k], c[i, k], lo[i, k], hi[i, k])] for k, t in enumerate(times)],
    )
    if noise:
        io.save_noise(m.noise, d / "noise.json", names, rows=len(names), t0=S.t0, dt=S.dt)
        io.write_rows(
            d / "band.csv",
            ["t"] + [f"{n}_{s}" for n in names for s in ("center", "lo", "hi")],
            [[t] + [v for i in range(len(names)) for v in (c[i, k], lo[i, k], hi[i, k])] for k, t in enumerate(times)],
        )
        io.write_rows(d / "qq.csv", ["theoretical", "sample"], qq_pairs(m.noise.modal[0].real).tolist())
    return d


def write_metrics(root: Path, result: ExperimentResult) -> None:
    names = base_block(result.embedded).coord_names
    io.write_rows(
        root / "metrics.csv",
        ["modes_used", "coordinate", "error", "residence", "sigma"],
        [
            [m.J, n, m.metrics.per_coordinate_error[i], m.metrics.residence_fraction[i], m.sigma[i]]
            for m in result.models
            for i, n in enumerate(names)
        ],
    )
    if result.truth is not None:
        io.write_rows(
            root / "eigenvalue_discrepancy.csv",
            ["modes_used", "discrepancy"],
            [[m.J, m.metrics.eigenvalue_discrepancy] for m in result.models],
        )
        io.write_rows(
            root / "true_eigenvalues.csv",
            ["index", "re", "im"],
            [[j, z.real, z.imag] for j, z in enumerate(result.truth[1])],
        )


def write_normality(root: Path, result: ExperimentResult) -> None:
    rep = result.normality
    names = base_block(result.embedded).coord_names
    io.save_normality(rep, root / "normality.json")
    io.write_rows(
        root / "normality.csv",
        ["modes_used", "coordinate", "W", "p_value"],
        [
            [J, names[i], w, p]
            for J, W, P in zip(rep.model_sizes, rep.statistics, rep.p_values)
            for i, (w, p) in enumerate(zip(W, P))
        ],
    )
    io.write_rows(
        root / "normality_summary.csv",
        ["modes_used", "mean_p", "median_p"],
        list(zip(rep.model_sizes, rep.means, rep.medians)),
    )


def write_manifest(root: Path, cfg: ExperimentConfig, extra: dict | None = None) -> None:
    sys_cfg = cfg.system_config()
    io.dump_json(
        {
            "run_id": cfg.run_id,
            "seed": cfg.seed,
            "config": cfg.to_dict(),
            "system_config": sys_cfg if cfg.system == "external_csv" else config_to_dict(sys_cfg),
            "versions": {
                "krom": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            **(extra or {}),
        },
        root / "manifest.json",
    )


def write_report(result: ExperimentResult, out_dir, figures: bool = False) -> Path:
    """Write the full run directory; returns its path."""
    cfg = result.config
    root = run_dir(cfg, out_dir)
    write_snapshots(root, result.data)
    write_decomposition(root, result.decomposition)
    for m in result.models:
        write_model(root, result, m)
    write_metrics(root, result)
    write_normality(root, result)
    write_manifest(
        root,
        cfg,
        {"rank_used": result.decomposition.rank_used, "selected_J": result.normality.selected_J},
    )
    if figures:
        from .plotting import render_figures

        render_figures(result, root / "figures")
    return root


def run_pipeline(cfg: ExperimentConfig, out_dir=None, figures: bool = False) -> Path:
    return write_report(run_experiment(cfg), out_dir or cfg.output_dir, figures=figures)
