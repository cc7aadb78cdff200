"""Evaluation metrics over data artifacts: masked depth errors, recovery
rate over outcome records, and rectangle localization overlap.

File formats: depth maps and focus masks are text files with a header line
``H W`` followed by H*W whitespace-separated values (booleans as 0/1);
outcome records are CSV with header
``clean_correct,adv_correct,defended_correct`` and 0/1 cells.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyMask
from .neutralization import MaskRegion
from .synth import GroundTruth
from .validation import check_same_shape


@dataclass(frozen=True)
class OutcomeRecord:
    clean_correct: bool
    adv_correct: bool
    defended_correct: bool


def _as_map(values, name):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def depth_error(depth, depth_adv, focus) -> float:
    """Masked mean absolute depth difference: sum(|d - d_adv| * M) / sum(M)."""
    d = _as_map(depth, "depth")
    d_adv = _as_map(depth_adv, "depth_adv")
    mask = _as_map(focus, "focus") != 0.0
    check_same_shape(d, d_adv, ("depth", "depth_adv"))
    check_same_shape(d, mask, ("depth", "focus"))
    total = mask.sum()
    if total == 0:
        raise EmptyMask("focus mask selects no pixels")
    return float((np.abs(d - d_adv) * mask).sum() / total)


def affected_ratio(depth, depth_adv, focus) -> float:
    """Masked fraction of pixels with |d - d_adv| strictly above 0.1."""
    d = _as_map(depth, "depth")
    d_adv = _as_map(depth_adv, "depth_adv")
    mask = _as_map(focus, "focus") != 0.0
    check_same_shape(d, d_adv, ("depth", "depth_adv"))
    check_same_shape(d, mask, ("depth", "focus"))
    total = mask.sum()
    if total == 0:
        raise EmptyMask("focus mask selects no pixels")
    return float(((np.abs(d - d_adv) * mask) > 0.1).sum() / total)


def depth_mse(depth, depth_adv) -> float:
    """Unmasked mean squared depth difference over all pixels."""
    d = _as_map(depth, "depth")
    d_adv = _as_map(depth_adv, "depth_adv")
    check_same_shape(d, d_adv, ("depth", "depth_adv"))
    diff = d_adv - d
    return float(np.mean(diff * diff))


def recovery_rate(records) -> float:
    """Fraction of successful attacks whose outputs the defense restored.

    An attack counts as successful only when it flipped a previously correct
    output; with no successful attacks the rate is 0 by convention.
    """
    successful = recovered = 0
    for rec in records:
        if rec.clean_correct and not rec.adv_correct:
            successful += 1
            if rec.defended_correct:
                recovered += 1
    if successful == 0:
        return 0.0
    return recovered / successful


def _as_region(region) -> MaskRegion:
    if isinstance(region, GroundTruth):
        return region.region
    return region


def localization_overlap(detected, truth) -> float:
    """Intersection-over-union of two square regions, in [0, 1]."""
    a = _as_region(detected)
    b = _as_region(truth)
    inter_h = max(0, min(a.row0 + a.size, b.row0 + b.size) - max(a.row0, b.row0))
    inter_w = max(0, min(a.col0 + a.size, b.col0 + b.size) - max(a.col0, b.col0))
    inter = inter_h * inter_w
    union = a.size * a.size + b.size * b.size - inter
    return inter / union if union else 0.0


def read_map(path) -> np.ndarray:
    """Read the ``H W`` + values text format into a 2-D float array."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'H W' header")
    h, w = int(tokens[0]), int(tokens[1])
    values = np.array([float(t) for t in tokens[2:]], dtype=np.float64)
    if values.size != h * w:
        raise ValueError(f"{path}: expected {h * w} values, found {values.size}")
    return values.reshape(h, w)


def write_map(path, values) -> None:
    arr = _as_map(values, "map")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{arr.shape[0]} {arr.shape[1]}\n")
        for row in arr:
            fh.write(" ".join(f"{v:.9g}" for v in row) + "\n")


def read_outcomes(path) -> list:
    """Read the outcome-record CSV into OutcomeRecord objects."""
    records = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = ["clean_correct", "adv_correct", "defended_correct"]
        if reader.fieldnames != expected:
            raise ValueError(f"{path}: expected header {','.join(expected)}")
        for row in reader:
            records.append(
                OutcomeRecord(
                    clean_correct=row["clean_correct"].strip() == "1",
                    adv_correct=row["adv_correct"].strip() == "1",
                    defended_correct=row["defended_correct"].strip() == "1",
                )
            )
    return records


def write_outcomes(path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["clean_correct", "adv_correct", "defended_correct"])
        for rec in records:
            writer.writerow([int(rec.clean_correct), int(rec.adv_correct), int(rec.defended_correct)])
