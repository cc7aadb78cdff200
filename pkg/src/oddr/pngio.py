"""PNG input/output and ground-truth sidecar files.

Intensities map 8-bit to real as v = p / 255 on load and p = round(255 * v)
clamped to [0, 255] on save, so a load/save round trip is exact.  Writes go
to a temporary file in the target directory followed by an atomic rename,
so a failed run never leaves a partial file behind.
"""

import os
import tempfile
import warnings

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import PatchOutOfBounds, UnreadableImage
from .neutralization import MaskRegion
from .synth import GroundTruth
from .validation import check_image

SIDECAR_SUFFIX = ".truth.txt"


def load_image(path) -> np.ndarray:
    """Read an 8-bit grayscale or RGB PNG as a float (H, W, C) array."""
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("RGBA", "LA", "PA"):
                warnings.warn(f"{path}: alpha channel stripped", stacklevel=2)
                im = im.convert("RGB" if mode != "LA" else "L")
            elif mode == "P":
                im = im.convert("RGB")
            elif mode == "1":
                im = im.convert("L")
            if im.mode not in ("L", "RGB"):
                raise UnreadableImage(f"{path}: unsupported mode {mode}; need 8-bit grayscale or RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise UnreadableImage(f"{path}: {exc}") from exc
    img = arr.astype(np.float64) / 255.0
    if img.ndim == 2:
        img = img[:, :, np.newaxis]
    return img


def quantize(image) -> np.ndarray:
    """Map [0, 1] intensities to uint8 via round(255 * v), clamped."""
    img = np.asarray(image, dtype=np.float64)
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)


def _atomic_write(path, write_fn):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".oddr-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_image(path, image) -> None:
    """Quantize and write a PNG via write-then-rename."""
    img = check_image(image, clip=True)
    data = quantize(img)
    if data.shape[2] == 1:
        pil = Image.fromarray(data[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(data, mode="RGB")
    _atomic_write(path, lambda fh: pil.save(fh, format="PNG"))


def save_text(path, text: str) -> None:
    _atomic_write(path, lambda fh: fh.write(text.encode("utf-8")))


def sidecar_path(image_path) -> str:
    """Ground-truth sidecar next to an image: <stem>.truth.txt."""
    stem, _ = os.path.splitext(str(image_path))
    return stem + SIDECAR_SUFFIX


def write_sidecar(path, truth: GroundTruth) -> None:
    """Record the injected rectangle as a single ``x0 y0 size`` line."""
    region = truth.region
    save_text(path, f"{region.col0} {region.row0} {region.size}\n")


def read_sidecar(path) -> GroundTruth:
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if len(tokens) != 3:
        raise PatchOutOfBounds(f"{path}: expected 'x0 y0 size'")
    x0, y0, size = (int(t) for t in tokens)
    return GroundTruth(region=MaskRegion(row0=y0, col0=x0, size=size))
