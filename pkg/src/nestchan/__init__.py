"""Gridless joint AoA / Doppler channel estimation with switch-network receivers.

Submodules
----------
geometry   selection sets (nested, MRA, coprime, ULA prefix) and coarrays
signal     steering / Doppler vectors and snapshot synthesis
tbt        Hermitian Toeplitz-block-Toeplitz algebra
sdp        covariance-fitting SDP (primal and dual routes) and the ANM baseline
recovery   multiple Vandermonde decomposition, noise floor, model order, gains
pipeline   end-to-end estimation, metrics and the Monte-Carlo harness
"""

from . import geometry, kernels, recovery, sdp, signal, tbt
from .geometry import SelectionSet, coprime_array, difference_coarray, mra, nested_array, ula_prefix
from .signal import NoiseSpec, PathSet, SnapshotBlock, synthesize_snapshots, vectorize
from .tbt import TbtDecomposition, TbtParams

__version__ = "0.1.0"

__all__ = [
    "geometry", "kernels", "recovery", "sdp", "signal", "tbt",
    "SelectionSet", "nested_array", "mra", "coprime_array", "ula_prefix", "difference_coarray",
    "PathSet", "NoiseSpec", "SnapshotBlock", "synthesize_snapshots", "vectorize",
    "TbtParams", "TbtDecomposition",
]
