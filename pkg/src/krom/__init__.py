"""Koopman reduced order models with confidence bounds."""

__version__ = "0.1.0"

from .kmd import KoopmanDecomposition, compute_dmd, truncate
from .metrics import geodesic_error, residence_time
from .modeselect import select_min_modes, shapiro_wilk
from .noise import confidence_band, decompose_noise
from .rom import ReducedOrderModel, fit_coefficients, reconstruct
from .snapshots import SnapshotMatrix, complexify_angles, hankel_embed

__all__ = [
    "KoopmanDecomposition",
    "ReducedOrderModel",
    "SnapshotMatrix",
    "complexify_angles",
    "compute_dmd",
    "confidence_band",
    "decompose_noise",
    "fit_coefficients",
    "geodesic_error",
    "hankel_embed",
    "reconstruct",
    "residence_time",
    "select_min_modes",
    "shapiro_wilk",
    "truncate",
]
