"""Defense configuration, validation, and seeded random-stream derivation."""

from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError, OutOfRange

# Config-file keys (external vocabulary) mapped to dataclass field names.
CONFIG_KEYS = {
    "k": "kernel_size",
    "str": "stride",
    "c": "confidence",
    "d": "mask_size",
    "inf": "info_fraction",
    "trees": "trees",
    "subsample_frac": "subsample_frac",
    "min_pts": "min_pts",
    "seed": "seed",
}
_FIELD_TO_KEY = {v: k for k, v in CONFIG_KEYS.items()}
_INT_KEYS = {"k", "str", "d", "trees", "min_pts", "seed"}


@dataclass(frozen=True)
class DefenseConfig:
    """All pipeline hyper-parameters.

    Defaults are the mid-range operating point: 20x20 kernels at stride 10,
    anomaly confidence 0.8, 50-pixel masks preserving 80% of singular-value
    mass, 100 trees trained on 30% subsamples, and clusters of at least 20
    fragments.
    """

    kernel_size: int = 20
    stride: int = 10
    confidence: float = 0.8
    mask_size: int = 50
    info_fraction: float = 0.8
    trees: int = 100
    subsample_frac: float = 0.3
    min_pts: int = 20
    seed: int = 0


def validate_config(cfg: DefenseConfig) -> DefenseConfig:
    """Check every bound and raise ``ConfigError`` listing all violations.

    Returns the config unchanged when valid, so validation is idempotent.
    The constraint that the kernel fits inside the image can only be
    checked once an image is seen; ``fragment`` enforces it.
    """
    bad = []

    def check(ok, field, value, allowed):
        if not ok:
            bad.append(OutOfRange(_FIELD_TO_KEY[field], value, allowed))

    check(cfg.kernel_size >= 1, "kernel_size", cfg.kernel_size, "k >= 1")
    check(1 <= cfg.stride <= cfg.kernel_size, "stride", cfg.stride, "1 <= str <= k")
    check(0.0 < cfg.confidence < 1.0, "confidence", cfg.confidence, "0 < c < 1")
    check(cfg.mask_size >= 1, "mask_size", cfg.mask_size, "d >= 1")
    check(0.0 < cfg.info_fraction <= 1.0, "info_fraction", cfg.info_fraction, "0 < inf <= 1")
    check(cfg.trees >= 1, "trees", cfg.trees, "trees >= 1")
    check(
        0.0 < cfg.subsample_frac <= 1.0,
        "subsample_frac",
        cfg.subsample_frac,
        "0 < subsample_frac <= 1",
    )
    check(cfg.min_pts >= 1, "min_pts", cfg.min_pts, "min_pts >= 1")
    if bad:
        raise ConfigError(bad)
    return cfg


def parse_config_text(text: str) -> DefenseConfig:
    """Parse flat ``key = value`` lines; ``#`` starts a comment.

    Unknown keys and unparsable values are ConfigErrors.  Absent keys take
    their defaults.  The result is validated before being returned.
    """
    values = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            problems.append(OutOfRange(f"line {lineno}", raw.strip(), "key = value"))
            continue
        if key not in CONFIG_KEYS:
            problems.append(OutOfRange(key, value, "one of: " + ", ".join(CONFIG_KEYS)))
            continue
        try:
            parsed = int(value) if key in _INT_KEYS else float(value)
        except ValueError:
            kind = "an integer" if key in _INT_KEYS else "a number"
            problems.append(OutOfRange(key, value, kind))
            continue
        values[CONFIG_KEYS[key]] = parsed
    if problems:
        raise ConfigError(problems)
    return validate_config(DefenseConfig(**values))


def parse_config_file(path) -> DefenseConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def config_as_dict(cfg: DefenseConfig) -> dict:
    """Config echoed with the external key names, in canonical key order."""
    return {key: getattr(cfg, field) for key, field in CONFIG_KEYS.items()}


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    Streams are identified by a 64-bit seed plus a path of child indices.
    Mixing is delegated to ``numpy.random.SeedSequence(seed, spawn_key=path)``
    feeding a PCG64 generator, so equal (seed, path) pairs always replay the
    identical sequence and distinct paths are statistically independent.
    """

    seed: int
    path: tuple = ()

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.seed & 0xFFFFFFFFFFFFFFFF, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        """The index-th sub-stream of this stream."""
        return RngStream(self.seed, self.path + (int(index),))


def derive_stream(seed: int, index: int) -> RngStream:
    """Stream for the index-th consumer of the given seed."""
    return RngStream(seed, (int(index),))
