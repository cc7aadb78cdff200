"""Exception types raised across the package."""

from dataclasses import dataclass


class OddrError(Exception):
    """Base class for all package-specific errors."""


@dataclass(frozen=True)
class OutOfRange:
    """One violated configuration bound."""

    field: str
    value: object
    allowed: str

    def __str__(self):
        return f"{self.field}={self.value!r} (allowed: {self.allowed})"


class ConfigError(OddrError, ValueError):
    """Invalid configuration; carries every violated bound, not just the first."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class KernelTooLarge(OddrError, ValueError):
    """Fragmentation kernel exceeds an image dimension."""


class MaskTooLarge(OddrError, ValueError):
    """Neutralization mask exceeds an image dimension."""


class EmptyDataset(OddrError, ValueError):
    """Tree construction invoked on zero points."""


class SubsampleTooSmall(OddrError, ValueError):
    """Forest subsample size below the minimum of 2."""


class SubsampleTooLarge(OddrError, ValueError):
    """Forest subsample size exceeds the dataset size."""


class NonFiniteError(OddrError, ArithmeticError):
    """A matrix handed to the SVD stage contains NaN or infinity."""


class DimensionMismatch(OddrError, ValueError):
    """Operands have incompatible shapes."""


class EmptyMask(OddrError, ValueError):
    """A focus mask with no selected pixels was used as a denominator."""


class ZeroReferenceStd(OddrError, ValueError):
    """Reference fragment statistics have zero standard deviation."""


class PatchOutOfBounds(OddrError, ValueError):
    """Synthetic patch does not fit inside the host image."""


class UnreadableImage(OddrError, ValueError):
    """Input file is not an 8-bit grayscale or RGB image."""
