"""Command-line driver.

Every subcommand reads the same experiment config and runs the pipeline up to its
stage, writing that stage's files under ``<out>/<run-id>/``. ``pipeline`` runs
everything. Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import functools
import sys

import click
import numpy as np

from . import io
from .kmd import DecompositionError, compute_dmd
from .metrics import MetricError
from .modeselect import NormalityError, qq_pairs
from .noise import NoiseError
from .pipeline import (
    ExperimentConfig,
    _window,
    generate_data,
    prepare,
    run_dir,
    run_experiment,
    write_decomposition,
    write_manifest,
    write_metrics,
    write_model,
    write_normality,
    write_report,
    write_snapshots,
)
from .rom import ModelError
from .snapshots import SnapshotError, read_complex_csv
from .systems import ConfigError

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
NUMERICAL_ERRORS = (DecompositionError, ModelError, NoiseError, NormalityError, MetricError, np.linalg.LinAlgError)


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, SnapshotError) as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except NUMERICAL_ERRORS as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)

    return wrapper


def _parse_modes(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--modes expects comma-separated integers, got {text!r}") from exc


def resolve_config(config, seed=None, modes=None, delay=None, out=None) -> ExperimentConfig:
    """Load a config file and apply command-line overrides."""
    cfg = ExperimentConfig.load(config)
    d = cfg.to_dict()
    if seed is not None:
        d["seed"] = seed
    if modes is not None:
        d["mode_sweep"] = _parse_modes(modes)
    if delay is not None:
        d["delay"] = delay
    if out is not None:
        d["output_dir"] = out
    return ExperimentConfig.from_dict(d)


def common_options(fn):
    for opt in reversed(
        [
            click.option("--config", "config", required=True, type=click.Path(dir_okay=False), help="Experiment JSON."),
            click.option("--seed", type=int, default=None, help="Overrides the config seed."),
            click.option("--modes", default=None, help="Comma-separated mode counts, e.g. 10,20,30."),
            click.option("--delay", type=int, default=None, help="Hankel delay d."),
            click.option("--out", default=None, help="Output root directory."),
        ]
    ):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Koopman reduced order models with confidence bounds."""


@main.command()
@common_options
@_guard
def simulate(config, seed, modes, delay, out):
    """Generate (or load) the raw snapshot data."""
    cfg = resolve_config(config, seed, modes, delay, out)
    S, _, _ = generate_data(cfg)
    root = run_dir(cfg)
    write_snapshots(root, S)
    write_manifest(root, cfg)
    click.echo(root / "snapshots" / "data.csv")


@main.command()
@common_options
@_guard
def embed(config, seed, modes, delay, out):
    """Complexify angles if requested and delay-embed."""
    cfg = resolve_config(config, seed, modes, delay, out)
    S, angles, _ = generate_data(cfg)
    H = prepare(cfg, S, angles)
    root = run_dir(cfg)
    write_snapshots(root, S, H)
    write_manifest(root, cfg)
    click.echo(root / "snapshots" / "embedded.csv")


@main.command()
@common_options
@_guard
def decompose(config, seed, modes, delay, out):
    """Compute and save the full mode decomposition."""
    cfg = resolve_config(config, seed, modes, delay, out)
    S, angles, _ = generate_data(cfg)
    H = prepare(cfg, S, angles)
    D = compute_dmd(H.columns(*_window(cfg.dmd_window, (0, H.n_t))), rank=cfg.rank, modes=cfg.dmd_modes)
    root = run_dir(cfg)
    write_snapshots(root, S)
    write_decomposition(root, D)
    write_manifest(root, cfg, {"rank_used": D.rank_used})
    click.echo(f"{D.n_modes} modes, rank {D.rank_used}")


def _staged(cfg, noise: bool):
    result = run_experiment(cfg)
    root = run_dir(cfg)
    write_snapshots(root, result.data)
    write_decomposition(root, result.decomposition)
    for m in result.models:
        write_model(root, result, m, noise=noise)
    return result, root


@main.command()
@common_options
@_guard
def rom(config, seed, modes, delay, out):
    """Fit the truncated models of the mode sweep."""
    cfg = resolve_config(config, seed, modes, delay, out)
    result, root = _staged(cfg, noise=False)
    write_manifest(root, cfg, {"rank_used": result.decomposition.rank_used})
    click.echo(root / "roms")


@main.command()
@common_options
@_guard
def noise(config, seed, modes, delay, out):
    """Split residuals into modal and innovation noise; write bands."""
    cfg = resolve_config(config, seed, modes, delay, out)
    result, root = _staged(cfg, noise=True)
    write_manifest(root, cfg, {"rank_used": result.decomposition.rank_used})
    click.echo(root / "roms")


@main.command()
@common_options
@_guard
def heuristic(config, seed, modes, delay, out):
    """Shapiro-Wilk sweep over the modal noise; reports the minimum mode count."""
    cfg = resolve_config(config, seed, modes, delay, out)
    result, root = _staged(cfg, noise=True)
    write_normality(root, result)
    write_manifest(root, cfg, {"selected_J": result.normality.selected_J})
    click.echo(f"selected_J: {result.normality.selected_J}")


@main.command()
@common_options
@_guard
def metrics(config, seed, modes, delay, out):
    """Reconstruction error and residence fraction per coordinate."""
    cfg = resolve_config(config, seed, modes, delay, out)
    result, root = _staged(cfg, noise=True)
    write_metrics(root, result)
    write_manifest(root, cfg)
    click.echo(root / "metrics.csv")


@main.command()
@common_options
@click.option("--svg", is_flag=True, help="Also render SVG figures.")
@_guard
def pipeline(config, seed, modes, delay, out, svg):
    """Run every stage and write the full report."""
    cfg = resolve_config(config, seed, modes, delay, out)
    result = run_experiment(cfg)
    root = write_report(result, cfg.output_dir, figures=svg)
    click.echo(f"{root}  selected_J: {result.normality.selected_J}")


def emit_qq_data(sample, path=None) -> np.ndarray:
    """``(theoretical, sample)`` QQ rows; written as CSV when ``path`` is given."""
    rows = qq_pairs(sample)
    if path is not None:
        io.write_rows(path, ["theoretical", "sample"], rows.tolist())
    return rows


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--column", required=True, help="Coordinate name in the complex CSV.")
@click.option("--part", type=click.Choice(["re", "im"]), default="re")
@click.option("--out", required=True, help="Output CSV path.")
@_guard
def qq(csv_path, column, part, out):
    """QQ plot data for one column of a snapshot or noise CSV."""
    _, values, names = read_complex_csv(csv_path)
    if column not in names:
        raise ConfigError(f"no column {column!r} in {csv_path}")
    row = values[names.index(column)]
    emit_qq_data(row.real if part == "re" else row.imag, out)
    click.echo(out)


if __name__ == "__main__":
    main()
