"""latentcloud: a point-cloud autoencoder with a latent-space design studio.

Train a permutation-invariant autoencoder on point clouds, explore its
latent space through feature edits and interpolation, and serve the model
behind a JSON HTTP API for interactive use.
"""

from .autoencoder import AEConfig, AEModel, TrainConfig, build_model, decode, encode, train
from .emd import Assignment, emd_approx, emd_exact
from .errors import (
    CapacityError,
    ConfigError,
    ConvergenceError,
    DimensionError,
    DivergenceError,
    FormatError,
    LatentCloudError,
)
from .estimator import PointCloudAutoencoder
from .latent import LatentStats, feature_edit, interpolate, latent_stats, slider_to_t
from .metrics import chamfer, chamfer_grad, nearest_neighbors
from .model_io import load_model, save_model
from .spatial import KdTree, build_index, nearest

__version__ = "0.1.0"

__all__ = [
    "AEConfig",
    "AEModel",
    "Assignment",
    "CapacityError",
    "ConfigError",
    "ConvergenceError",
    "DimensionError",
    "DivergenceError",
    "FormatError",
    "KdTree",
    "LatentCloudError",
    "LatentStats",
    "PointCloudAutoencoder",
    "TrainConfig",
    "build_index",
    "build_model",
    "chamfer",
    "chamfer_grad",
    "decode",
    "emd_approx",
    "emd_exact",
    "encode",
    "feature_edit",
    "interpolate",
    "latent_stats",
    "load_model",
    "nearest",
    "nearest_neighbors",
    "save_model",
    "slider_to_t",
    "train",
]
