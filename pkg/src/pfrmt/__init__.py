"""Pfaffian evaluation of characteristic-polynomial ratio averages for beta=1 and beta=4 ensembles."""

__version__ = "0.1.0"

from .ensembles import ENSEMBLE_IDS, get_ensemble
from .errors import PfrmtError
from .kernels import KernelSet, ZResult, z_gse, z_goe, z_pfaffian
from .skew_linalg import SkewMatrix, SpectralParams, pfaffian, skew_inverse

__all__ = [
    "ENSEMBLE_IDS",
    "KernelSet",
    "PfrmtError",
    "SkewMatrix",
    "SpectralParams",
    "ZResult",
    "get_ensemble",
    "pfaffian",
    "skew_inverse",
    "z_goe",
    "z_gse",
    "z_pfaffian",
]
