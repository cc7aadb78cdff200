"""Input validation helpers shared by the pipeline and the estimators."""

import numpy as np

from .errors import DimensionMismatch


def check_image(image, clip=False) -> np.ndarray:
    """Coerce to a float64 (H, W, C) array with intensities in [0, 1].

    2-D input is treated as single-channel.  With ``clip=True`` values are
    clamped into [0, 1] instead of rejected; clipping already-valid data is
    the identity.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, np.newaxis]
    if img.ndim != 3:
        raise ValueError(f"expected (H, W, C) image, got shape {img.shape}")
    if img.shape[2] not in (1, 3):
        raise ValueError(f"expected 1 or 3 channels, got {img.shape[2]}")
    if not np.isfinite(img).all():
        raise ValueError("image contains non-finite values")
    if clip:
        return np.clip(img, 0.0, 1.0)
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image intensities must lie in [0, 1]")
    return img


def check_points(X) -> np.ndarray:
    """Coerce to a finite, C-contiguous float64 (n, D) matrix."""
    pts = np.ascontiguousarray(X, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"expected (n, D) points, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise ValueError("points contain non-finite values")
    return pts


def check_same_shape(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise DimensionMismatch(f"{names[0]} has shape {a.shape} but {names[1]} has {b.shape}")
