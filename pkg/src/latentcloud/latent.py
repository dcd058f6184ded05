"""Latent-space modeling operations: feature edits, interpolation, stats.

Feature editing adds a transformation vector to a base latent. Interpolation
forms a convex combination of several models' latents (weights are
L1-normalized, so a one-hot weight vector reproduces its source exactly).
Per-dimension dataset min/max define the slider ranges of the studio UI.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .validation import as_latent

SLIDER_COUNT = 8
KNOB_LIMIT = 0.1


@dataclass(frozen=True)
class LatentStats:
    """Componentwise min/max over a set of latents, plus the sample count."""

    min: np.ndarray
    max: np.ndarray
    count: int

    def __post_init__(self):
        object.__setattr__(self, "min", np.asarray(self.min, dtype=np.float64))
        object.__setattr__(self, "max", np.asarray(self.max, dtype=np.float64))
        if self.min.shape != self.max.shape or self.min.ndim != 1:
            raise DimensionError("stats min/max must be 1-d vectors of equal length")
        if np.any(self.min > self.max):
            raise DimensionError("stats min must be <= max componentwise")
        if self.count < 1:
            raise DimensionError("stats must cover at least one latent")

    @property
    def size(self):
        return self.min.shape[0]


def feature_edit(f, t):
    """Apply a transformation vector: x = f + t."""
    f = as_latent(f, name="base latent")
    t = as_latent(t, name="transformation", size=f.shape[0])
    return f + t


def interpolate(latent_matrix, weights):
    """Convex combination of the rows of an (n, k) latent matrix.

    Weights must be nonnegative with a positive sum; they are normalized
    to sum to 1, so the result lies in the convex hull of the rows and a
    one-hot weight vector returns its row exactly.
    """
    v = np.asarray(latent_matrix, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 2:
        raise DimensionError(f"latent matrix must be (n>=2, k), got shape {v.shape}")
    if w.shape != (v.shape[0],):
        raise DimensionError(
            f"weights shape {w.shape} does not match {v.shape[0]} latents"
        )
    if not np.isfinite(v).all() or not np.isfinite(w).all():
        raise DimensionError("latents and weights must be finite")
    if np.any(w < 0):
        raise ConfigError("negative weights are not allowed")
    total = w.sum()
    if total <= 0:
        raise ConfigError("weights must not all be zero")
    norm = w / total
    # exact endpoint identity: a one-hot weight returns its row bitwise
    nonzero = np.flatnonzero(norm)
    if nonzero.size == 1:
        return v[nonzero[0]].copy()
    return norm @ v


def latent_stats(latents):
    """Componentwise min/max over a non-empty list of equal-length latents."""
    latents = list(latents)
    if not latents:
        raise DimensionError("cannot compute stats over an empty latent list")
    arr = np.stack([as_latent(z, name=f"latents[{i}]") for i, z in enumerate(latents)])
    if arr.ndim != 2:
        raise DimensionError("latents must share one length")
    return LatentStats(min=arr.min(axis=0), max=arr.max(axis=0), count=arr.shape[0])


def slider_to_t(stats, sliders, knobs, offset=0):
    """Map the 8 sliders + 8 fine-tune knobs onto a transformation vector.

    Full slider deflection equals half the dataset interval of the
    controlled dimension; knobs add a +/-10%-scale adjustment. Dimensions
    outside the controlled block stay zero, so centered controls yield the
    zero vector exactly.
    """
    sliders = np.asarray(sliders, dtype=np.float64)
    knobs = np.asarray(knobs, dtype=np.float64)
    if sliders.shape != (SLIDER_COUNT,) or knobs.shape != (SLIDER_COUNT,):
        raise DimensionError(
            f"expected {SLIDER_COUNT} sliders and {SLIDER_COUNT} knobs, "
            f"got {sliders.shape} and {knobs.shape}"
        )
    offset = int(offset)
    if offset < 0 or offset + SLIDER_COUNT > stats.size:
        raise DimensionError(
            f"offset {offset} puts the controlled block outside the "
            f"{stats.size}-dimensional latent space"
        )
    if np.any(np.abs(sliders) > 1.0):
        raise ConfigError("slider values must lie in [-1, 1]")
    if np.any(np.abs(knobs) > KNOB_LIMIT):
        raise ConfigError(f"knob values must lie in [-{KNOB_LIMIT}, {KNOB_LIMIT}]")
    t = np.zeros(stats.size)
    block = slice(offset, offset + SLIDER_COUNT)
    half_interval = (stats.max[block] - stats.min[block]) / 2.0
    t[block] = (sliders + knobs) * half_interval
    return t
