"""Conformal-map and Fourier tools for single-measurement inclusion identification in 2D EIT."""

__version__ = "0.1.0"

from .dtn import Conductivities, concentric_dtn, dtn_error_norm, dtn_perturbed_disk
from .fourier import CircleMap, FourierSeries
from .geometry import DiskSpec, PerturbedDiskSpec, ShiftedInclusion
from .moebius import MoebiusMap

__all__ = [
    "CircleMap",
    "Conductivities",
    "DiskSpec",
    "FourierSeries",
    "MoebiusMap",
    "PerturbedDiskSpec",
    "ShiftedInclusion",
    "concentric_dtn",
    "dtn_error_norm",
    "dtn_perturbed_disk",
]
