"""Synthetic test images: a deterministic low-variance background plus
patch injection at known ground-truth locations, so detection and
neutralization can be verified hermetically."""

from dataclasses import dataclass

import numpy as np

from .config import RngStream
from .errors import PatchOutOfBounds
from .neutralization import MaskRegion
from .validation import check_image

# Patch side lengths exercised by the evaluation grid.
PATCH_SIZES = (38, 41, 44, 47, 50)

PATCH_KINDS = ("noise", "checker", "matched")


@dataclass(frozen=True)
class PatchSpec:
    """Where and what to inject; ``seed`` is the injector's stream index."""

    kind: str
    x0: int
    y0: int
    size: int
    seed: int = 0


@dataclass(frozen=True)
class GroundTruth:
    region: MaskRegion


def gradient_background(height: int, width: int, channels: int) -> np.ndarray:
    """Deterministic smooth background; image values span [0.2, 0.8].

    Each channel is a bilinear saddle u + v - 2uv over normalized pixel
    coordinates, so all four corners are value extremes.  With several
    channels the saddles sit in staggered sub-bands ([0.2, 0.5] up to
    [0.5, 0.8] for RGB) like the differing per-channel amplitudes of
    natural photographs; a single channel spans the full range.
    """
    if height < 1 or width < 1:
        raise ValueError(f"image dims must be positive, got ({height}, {width})")
    if channels < 1:
        raise ValueError(f"channel count must be positive, got {channels}")
    u = (np.arange(height) / (height - 1) if height > 1 else np.zeros(height))[:, None]
    v = (np.arange(width) / (width - 1) if width > 1 else np.zeros(width))[None, :]
    saddle = u + v - 2.0 * u * v
    img = np.empty((height, width, channels), dtype=np.float64)
    for ch in range(channels):
        if channels == 1:
            lo, hi = 0.2, 0.8
        else:
            lo = 0.2 + 0.3 * ch / (channels - 1)
            hi = lo + 0.3
        img[:, :, ch] = lo + (hi - lo) * saddle
    return img


def inject(image, spec: PatchSpec, stream: RngStream):
    """Write a synthetic patch into a copy of the image.

    noise    i.i.d. uniform [0, 1) pixels
    checker  alternating 0/1 blocks of 2 px
    matched  pixels resampled from the host image's own empirical pixel
             distribution (the adaptive-attack premise: patch statistics
             drawn from the clean image itself)

    Pixels outside the patch are untouched.  Randomness comes from
    ``stream.child(spec.seed)``, so equal (stream, spec) pairs reproduce the
    identical image.
    """
    img = check_image(image)
    h, w, c = img.shape
    if spec.kind not in PATCH_KINDS:
        raise ValueError(f"kind must be one of {PATCH_KINDS}, got {spec.kind!r}")
    if spec.size < 1:
        raise PatchOutOfBounds(f"patch size must be >= 1, got {spec.size}")
    if spec.x0 < 0 or spec.y0 < 0 or spec.y0 + spec.size > h or spec.x0 + spec.size > w:
        raise PatchOutOfBounds(
            f"patch {spec.size}x{spec.size} at (x0={spec.x0}, y0={spec.y0}) "
            f"does not fit a {h}x{w} image"
        )
    out = img.copy()
    size = spec.size
    if spec.kind == "noise":
        g = stream.child(spec.seed).generator()
        block = g.random((size, size, c))
    elif spec.kind == "checker":
        dr = np.arange(size)[:, None] // 2
        dc = np.arange(size)[None, :] // 2
        block = np.repeat(((dr + dc) % 2).astype(np.float64)[:, :, None], c, axis=2)
    else:  # matched
        g = stream.child(spec.seed).generator()
        flat = img.reshape(-1, c)
        picks = g.integers(0, flat.shape[0], size=size * size)
        block = flat[picks].reshape(size, size, c)
    out[spec.y0 : spec.y0 + size, spec.x0 : spec.x0 + size, :] = block
    truth = GroundTruth(region=MaskRegion(row0=spec.y0, col0=spec.x0, size=size))
    return out, truth
