"""JSON/CSV persistence for decompositions, models, noise and normality reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .kmd import KoopmanDecomposition, truncate
from .modeselect import NormalityReport
from .noise import GaussianFits
from .rom import ReducedOrderModel
from .snapshots import write_complex_csv


def _c2list(z) -> list:
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1).tolist()


def _list2c(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def dump_json(obj, path) -> None:
    # repr-precision floats; sorted keys keep output byte-stable
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def decomposition_to_dict(D: KoopmanDecomposition) -> dict:
    return {
        "eigenvalues": _c2list(D.eigenvalues),
        "modes": _c2list(D.modes),
        "raw_mode_norms": D.raw_mode_norms.tolist(),
        "rank_used": D.rank_used,
        "source_meta": D.source_meta,
    }


def decomposition_from_dict(d) -> KoopmanDecomposition:
    lam = _list2c(d["eigenvalues"]).reshape(-1)
    modes = _list2c(d["modes"]).reshape(-1, lam.size)
    return KoopmanDecomposition(
        eigenvalues=lam,
        modes=modes,
        raw_mode_norms=np.asarray(d["raw_mode_norms"], dtype=float),
        rank_used=int(d["rank_used"]),
        source_meta=d.get("source_meta", {}),
    )


def save_decomposition(D: KoopmanDecomposition, path) -> None:
    dump_json(decomposition_to_dict(D), path)


def load_decomposition(path) -> KoopmanDecomposition:
    return decomposition_from_dict(json.loads(Path(path).read_text()))


def save_rom(R: ReducedOrderModel, path, decomposition_ref: str | None = None) -> None:
    """Write a model; with ``decomposition_ref`` the modes are referenced, not copied.

    The reference is a path relative to ``path``'s directory pointing at the
    untruncated decomposition; the model keeps its leading ``n_modes`` modes.
    """
    d = {
        "coefficients": _c2list(R.coefficients),
        "eigenvalues": _c2list(R.decomposition.eigenvalues),
        "train_window": list(R.train_window),
        "dt": R.dt,
        "n_modes": R.n_modes,
    }
    if decomposition_ref is None:
        d["decomposition"] = decomposition_to_dict(R.decomposition)
    else:
        d["decomposition_ref"] = decomposition_ref
    dump_json(d, path)


def load_rom(path) -> ReducedOrderModel:
    path = Path(path)
    d = json.loads(path.read_text())
    if "decomposition" in d:
        D = decomposition_from_dict(d["decomposition"])
    else:
        D = truncate(load_decomposition(path.parent / d["decomposition_ref"]), d["n_modes"])
    return ReducedOrderModel(D, _list2c(d["coefficients"]), tuple(d["train_window"]), d["dt"])


def save_noise(N, path, coord_names=None, rows: int | None = None, t0=0.0, dt=1.0) -> None:
    """Write ``<name>.noise.json`` plus residual/modal/innovation CSV traces.

    ``rows`` limits the CSV traces to the leading coordinates (the undelayed
    block of Hankel data); the Gaussian fits always cover every row.
    """
    path = Path(path)
    stem = path.name[: -len(".noise.json")] if path.name.endswith(".noise.json") else path.stem
    rows = rows or N.residual.shape[0]
    names = list(coord_names or [f"x{i}" for i in range(N.residual.shape[0])])[:rows]
    start, stop = N.eval_window
    times = t0 + dt * np.arange(start, stop)
    traces = {}
    for label in ("residual", "modal", "innovation"):
        csv_path = path.with_name(f"{stem}.{label}.csv")
        write_complex_csv(csv_path, times, getattr(N, label)[:rows], names)
        traces[label] = csv_path.name
    dump_json(
        {
            "eval_window": list(N.eval_window),
            "train_window": list(N.train_window),
            "n_modes": N.n_modes,
            "gaussian_fits": N.gaussian_fits.to_dict(),
            "traces": traces,
            "trace_rows": rows,
        },
        path,
    )


def load_noise_fits(path) -> tuple[GaussianFits, dict]:
    d = json.loads(Path(path).read_text())
    return GaussianFits.from_dict(d["gaussian_fits"]), d


def save_normality(report: NormalityReport, path) -> None:
    dump_json(report.to_dict(), path)


def load_normality(path) -> NormalityReport:
    return NormalityReport.from_dict(json.loads(Path(path).read_text()))


def write_rows(path, header, rows) -> None:
    """Plain CSV writer; floats at 17 significant digits."""

    def fmt(v):
        if isinstance(v, (float, np.floating)):
            return format(float(v), ".17g")
        return v

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
