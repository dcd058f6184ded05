"""Input validation helpers.

All public entry points funnel array-likes through these so that shape and
finiteness violations surface as :class:`DimensionError` with a useful
message instead of a numpy broadcast error three frames deeper.
"""

import numpy as np

from .errors import DimensionError


def as_point_cloud(obj, name="cloud", n_points=None):
    """Coerce to a float64 (N, 3) array and validate it.

    Raises DimensionError on wrong shape, empty input, non-finite entries,
    or (when ``n_points`` is given) a point-count mismatch.
    """
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DimensionError(f"{name} must have shape (N, 3), got {arr.shape}")
    if arr.shape[0] < 1:
        raise DimensionError(f"{name} must contain at least one point")
    if not np.isfinite(arr).all():
        raise DimensionError(f"{name} contains non-finite coordinates")
    if n_points is not None and arr.shape[0] != n_points:
        raise DimensionError(
            f"{name} has {arr.shape[0]} points, expected {n_points}"
        )
    return arr


def as_latent(obj, name="latent", size=None):
    """Coerce to a float64 1-d vector, optionally of fixed length."""
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty 1-d vector, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DimensionError(f"{name} contains non-finite values")
    if size is not None and arr.shape[0] != size:
        raise DimensionError(f"{name} has length {arr.shape[0]}, expected {size}")
    return arr


def as_feature_matrix(obj, name="x"):
    """Coerce to a float64 (N, F) matrix with N, F >= 1 and finite entries."""
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-d, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be at least 1x1, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def as_cloud_batch(obj, name="X", n_points=None):
    """Coerce a batch of clouds to a list of validated (N, 3) arrays.

    Accepts a (B, N, 3) array or any iterable of cloud-likes. All clouds
    must share one point count; pass ``n_points`` to pin it.
    """
    if isinstance(obj, np.ndarray) and obj.ndim == 3:
        clouds = [obj[i] for i in range(obj.shape[0])]
    else:
        clouds = list(obj)
    if not clouds:
        raise DimensionError(f"{name} must contain at least one cloud")
    out = [as_point_cloud(c, name=f"{name}[{i}]", n_points=n_points) for i, c in enumerate(clouds)]
    first = out[0].shape[0]
    for i, c in enumerate(out):
        if c.shape[0] != first:
            raise DimensionError(
                f"{name}[{i}] has {c.shape[0]} points but {name}[0] has {first}; "
                "all clouds in a batch must match"
            )
    return out
