"""Snapshot matrices: file I/O, Hankel delay embedding and angle complexification."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

RAW = "raw"
COMPLEXIFIED = "complexified-angle"
HANKEL = "hankel"

_FLOAT_FMT = ".17g"


class SnapshotError(ValueError):
    """Raised for malformed snapshot data or files."""


@dataclass(frozen=True)
class Representation:
    """How the rows of a snapshot matrix relate to the underlying observable.

    ``kind`` is one of ``raw``, ``complexified-angle`` or ``hankel``. For Hankel
    data ``delays`` and ``base_n_obs`` give the embedding and ``base_kind`` the
    representation of the embedded rows.
    """

    kind: str = RAW
    delays: int | None = None
    base_n_obs: int | None = None
    base_kind: str | None = None

    def __post_init__(self):
        if self.kind not in (RAW, COMPLEXIFIED, HANKEL):
            raise SnapshotError(f"unknown representation {self.kind!r}")
        if self.kind == HANKEL:
            if self.delays is None or self.base_n_obs is None:
                raise SnapshotError("hankel representation needs delays and base_n_obs")
            if self.base_kind not in (RAW, COMPLEXIFIED):
                raise SnapshotError(f"invalid hankel base kind {self.base_kind!r}")

    @property
    def angle_kind(self) -> str:
        """Representation of the underlying (non-delayed) coordinates."""
        return self.base_kind if self.kind == HANKEL else self.kind

    def to_dict(self) -> dict:
        if self.kind != HANKEL:
            return {"kind": self.kind}
        return {
            "kind": self.kind,
            "delays": self.delays,
            "base_n_obs": self.base_n_obs,
            "base_kind": self.base_kind,
        }

    @classmethod
    def from_dict(cls, d) -> "Representation":
        if isinstance(d, str):
            return cls(kind=d)
        return cls(
            kind=d["kind"],
            delays=d.get("delays"),
            base_n_obs=d.get("base_n_obs"),
            base_kind=d.get("base_kind"),
        )


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """Complex observable trajectory, one column per time step."""

    values: np.ndarray
    dt: float = 1.0
    t0: float = 0.0
    coord_names: tuple[str, ...] = ()
    representation: Representation = field(default_factory=Representation)
    period: float | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim != 2:
            raise SnapshotError(f"snapshot values must be 2-D, got shape {values.shape}")
        n_obs, n_t = values.shape
        if n_obs < 1 or n_t < 2:
            raise SnapshotError(f"need n_obs >= 1 and n_t >= 2, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise SnapshotError("snapshot values contain NaN or Inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        names = tuple(self.coord_names) or tuple(f"x{i}" for i in range(n_obs))
        if len(names) != n_obs:
            raise SnapshotError(f"{len(names)} coordinate names for {n_obs} observables")
        object.__setattr__(self, "coord_names", names)

        rep = self.representation
        if rep.kind == HANKEL and rep.delays * rep.base_n_obs != n_obs:
            raise SnapshotError(
                f"hankel({rep.delays}, {rep.base_n_obs}) inconsistent with {n_obs} rows"
            )
        if rep.angle_kind == COMPLEXIFIED and self.period is None:
            raise SnapshotError("complexified angles need a period")

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_t(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_t)

    def with_values(self, values, t0=None) -> "SnapshotMatrix":
        """Copy of the metadata around new values (same row layout)."""
        return replace(self, values=values, t0=self.t0 if t0 is None else t0)

    def columns(self, start: int, stop: int) -> "SnapshotMatrix":
        return self.with_values(self.values[:, start:stop], t0=self.t0 + start * self.dt)

    def __eq__(self, other):
        if not isinstance(other, SnapshotMatrix):
            return NotImplemented
        return (
            np.array_equal(self.values, other.values)
            and self.dt == other.dt
            and self.t0 == other.t0
            and self.coord_names == other.coord_names
            and self.representation == other.representation
            and self.period == other.period
        )

    def metadata(self) -> dict:
        meta = {
            "dt": self.dt,
            "t0": self.t0,
            "n_obs": self.n_obs,
            "n_t": self.n_t,
            "representation": self.representation.to_dict(),
            "coord_names": list(self.coord_names),
        }
        if self.period is not None:
            meta["period"] = self.period
        return meta


def manifest_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".manifest.json")


def write_complex_csv(path, times, values, names) -> None:
    """Write a complex matrix (one row per column of ``values``) as re/im column pairs."""
    header = ["t"]
    for name in names:
        header += [f"{name}_re", f"{name}_im"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k, t in enumerate(times):
            row = [format(float(t), _FLOAT_FMT)]
            for z in values[:, k]:
                row += [format(z.real, _FLOAT_FMT), format(z.imag, _FLOAT_FMT)]
            writer.writerow(row)


def read_complex_csv(path):
    """Inverse of :func:`write_complex_csv`; returns ``(times, values, names)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SnapshotError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    if header[0] != "t" or len(header) < 2:
        raise SnapshotError(f"{path}: header must be t followed by value columns")
    cols = header[1:]
    # plain real data: no re/im suffixes at all
    real = not any(c.endswith(("_re", "_im")) for c in cols)
    if real:
        names = list(cols)
    else:
        if len(cols) % 2:
            raise SnapshotError(f"{path}: header must be t followed by re/im pairs")
        names = []
        for re_col, im_col in zip(cols[0::2], cols[1::2]):
            if not (re_col.endswith("_re") and im_col.endswith("_im")) or re_col[:-3] != im_col[:-3]:
                raise SnapshotError(f"{path}: bad column pair {re_col!r}, {im_col!r}")
            names.append(re_col[:-3])
    try:
        data = np.array([[float(v) for v in row] for row in body], dtype=float)
    except ValueError as exc:
        raise SnapshotError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise SnapshotError(f"{path}: ragged rows")
    if real:
        return data[:, 0], data[:, 1:].T.astype(complex), names
    values = (data[:, 1::2] + 1j * data[:, 2::2]).T
    return data[:, 0], values, names


def save_snapshots(S: SnapshotMatrix, path) -> None:
    """Write ``S`` as ``<name>.csv`` plus ``<name>.manifest.json``."""
    if S.values.size == 0:
        raise SnapshotError("refusing to save an empty matrix")
    path = Path(path)
    try:
        write_complex_csv(path, S.times, S.values, S.coord_names)
        manifest_path(path).write_text(json.dumps(S.metadata(), indent=2) + "\n")
    except OSError as exc:
        raise SnapshotError(f"cannot write {path}: {exc}") from exc


def load_snapshots(path) -> SnapshotMatrix:
    """Read a snapshot CSV and its manifest."""
    path = Path(path)
    try:
        meta = json.loads(manifest_path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"cannot read manifest for {path}: {exc}") from exc
    _, values, names = read_complex_csv(path)
    if values.shape != (meta["n_obs"], meta["n_t"]):
        raise SnapshotError(
            f"{path}: manifest declares {meta['n_obs']}x{meta['n_t']}, body is "
            f"{values.shape[0]}x{values.shape[1]}"
        )
    if list(meta.get("coord_names", names)) != names:
        raise SnapshotError(f"{path}: column names disagree with manifest")
    return SnapshotMatrix(
        values,
        dt=float(meta["dt"]),
        t0=float(meta["t0"]),
        coord_names=tuple(names),
        representation=Representation.from_dict(meta["representation"]),
        period=meta.get("period"),
    )


def hankel_embed(S: SnapshotMatrix, d: int) -> SnapshotMatrix:
    """Stack ``d`` consecutive snapshots per column, oldest on top."""
    if S.representation.kind == HANKEL:
        raise SnapshotError("data is already delay embedded")
    if not 1 <= d <= S.n_t - 1:
        raise SnapshotError(f"delay count {d} outside [1, {S.n_t - 1}]")
    n_cols = S.n_t - d + 1
    X = S.values
    H = np.vstack([X[:, k : k + n_cols] for k in range(d)])
    names = tuple(f"{name}@{k}" for k in range(d) for name in S.coord_names)
    return SnapshotMatrix(
        H,
        dt=S.dt,
        t0=S.t0,
        coord_names=names,
        representation=Representation(HANKEL, d, S.n_obs, S.representation.kind),
        period=S.period,
    )


def base_block(S: SnapshotMatrix) -> SnapshotMatrix:
    """The undelayed coordinates of ``S``: the top block of a Hankel matrix, else ``S``."""
    rep = S.representation
    if rep.kind != HANKEL:
        return S
    b = rep.base_n_obs
    names = tuple(name.rsplit("@", 1)[0] for name in S.coord_names[:b])
    return SnapshotMatrix(
        S.values[:b],
        dt=S.dt,
        t0=S.t0,
        coord_names=names,
        representation=Representation(rep.base_kind),
        period=S.period,
    )


def complexify_angles(S: SnapshotMatrix, period: float) -> SnapshotMatrix:
    """Map angles to the unit circle, ``theta -> exp(2*pi*i*theta/period)``."""
    if S.representation.kind != RAW:
        raise SnapshotError("complexify_angles expects raw angle data")
    if np.any(S.values.imag != 0):
        raise SnapshotError("angle data must be real")
    if not period > 0:
        raise SnapshotError("period must be positive")
    z = np.exp(1j * (2 * np.pi / period) * S.values.real)
    return replace(S, values=z, representation=Representation(COMPLEXIFIED), period=float(period))


def angles_from_complex(z, period: float) -> np.ndarray:
    """Argument of ``z`` scaled to ``[0, period)``; zero maps to 0."""
    z = np.asarray(z, dtype=complex)
    theta = np.mod(np.angle(z), 2 * np.pi) * (period / (2 * np.pi))
    # mod can round up to exactly `period` for tiny negative arguments
    theta = np.where(theta >= period, 0.0, theta)
    return np.where(z == 0, 0.0, theta)


def decomplexify_angles(S: SnapshotMatrix) -> SnapshotMatrix:
    """Inverse of :func:`complexify_angles`; the modulus is ignored."""
    if S.representation.kind != COMPLEXIFIED or S.period is None:
        raise SnapshotError("decomplexify_angles needs complexified-angle data")
    theta = angles_from_complex(S.values, S.period)
    return replace(S, values=theta.astype(complex), representation=Representation(RAW), period=None)
