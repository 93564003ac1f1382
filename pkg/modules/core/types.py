"""
types.py - Core domain types for mtppower

This module holds the small value types shared by every layer: degrees of
freedom (with a distinguished INFINITE value for z-tests), the tail type of a
test, and the TestSpec describing one hypothesis test of a study.

Changes:
- Initial implementation of DegreesOfFreedom, TailType and TestSpec
- DegreesOfFreedom.parse accepts the "inf" literal used by study files
- Added optional sample_size to TestSpec for sample-size reporting
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

from modules.core.errors import DomainError


@dataclass(frozen=True)
class DegreesOfFreedom:
    """
    Degrees of freedom of a Student-t null, or INFINITE for a normal (z) null.

    Attributes:
        value (float): A positive real, or math.inf for INFINITE
    """

    value: float

    def __post_init__(self):
        value = float(self.value)
        if math.isnan(value) or value <= 0:
            raise DomainError(f"Degrees of freedom must be positive or INFINITE, got {self.value}")
        object.__setattr__(self, "value", value)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @classmethod
    def parse(cls, raw: Union["DegreesOfFreedom", float, int, str]) -> "DegreesOfFreedom":
        """
        Build degrees of freedom from a number or the "inf" literal.

        Args:
            raw: A DegreesOfFreedom, a positive number, or "inf"/"infinite"

        Returns:
            DegreesOfFreedom: The parsed value
        """
        if isinstance(raw, DegreesOfFreedom):
            return raw
        if isinstance(raw, str):
            text = raw.strip().lower()
            if text in ("inf", "infinite", "infinity", "+inf"):
                return INFINITE
            try:
                raw = float(text)
            except ValueError:
                raise DomainError(f"Invalid degrees of freedom: '{raw}'")
        return cls(float(raw))

    def scaled(self, factor: float) -> "DegreesOfFreedom":
        """Multiply a finite value by factor; INFINITE stays INFINITE."""
        if self.is_infinite:
            return self
        return DegreesOfFreedom(self.value * factor)

    def __float__(self):
        return self.value

    def __str__(self):
        if self.is_infinite:
            return "inf"
        if self.value.is_integer():
            return str(int(self.value))
        return repr(self.value)


INFINITE = DegreesOfFreedom(math.inf)


def as_dof(raw) -> DegreesOfFreedom:
    """Coerce a number, string or DegreesOfFreedom into DegreesOfFreedom."""
    return DegreesOfFreedom.parse(raw)


class TailType(Enum):
    """Direction of a test: which tail of the null distribution rejects."""

    LOWER = "lower"
    UPPER = "upper"
    TWO_SIDED = "two-sided"

    @classmethod
    def parse(cls, raw: Union["TailType", str]) -> "TailType":
        if isinstance(raw, TailType):
            return raw
        text = str(raw).strip().lower().replace("_", "-")
        aliases = {
            "lower": cls.LOWER,
            "less": cls.LOWER,
            "upper": cls.UPPER,
            "greater": cls.UPPER,
            "two-sided": cls.TWO_SIDED,
            "two-tailed": cls.TWO_SIDED,
            "two": cls.TWO_SIDED,
            "both": cls.TWO_SIDED,
        }
        if text not in aliases:
            raise DomainError(f"Unknown tail type '{raw}' (expected lower, upper or two-sided)")
        return aliases[text]


@dataclass(frozen=True)
class TestSpec:
    """
    One hypothesis test of a study.

    Attributes:
        id (int): Identifier, unique within a study
        label (str): Human-readable name
        tail (TailType): Rejection direction
        dof (DegreesOfFreedom): Null degrees of freedom (INFINITE for z-tests)
        effect_ratio (float): Anticipated effect size over its standard error
        weight (float, optional): Nonnegative p-value weight; None means equal weights
        observed_p (float, optional): Observed p-value, when the test was already run
        sample_size (int, optional): Sample size behind effect_ratio
    """

    __test__ = False  # not a pytest class

    id: int
    label: str
    tail: TailType
    dof: DegreesOfFreedom
    effect_ratio: float
    weight: Optional[float] = None
    observed_p: Optional[float] = None
    sample_size: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "tail", TailType.parse(self.tail))
        object.__setattr__(self, "dof", as_dof(self.dof))
        if not math.isfinite(self.effect_ratio):
            raise DomainError(f"Test {self.id}: effect ratio must be finite")
        if self.weight is not None and (self.weight < 0 or not math.isfinite(self.weight)):
            raise DomainError(f"Test {self.id}: weight must be nonnegative, got {self.weight}")
        if self.observed_p is not None and not (0.0 <= self.observed_p <= 1.0):
            raise DomainError(f"Test {self.id}: observed p-value must lie in [0,1], got {self.observed_p}")
        if self.sample_size is not None and self.sample_size < 1:
            raise DomainError(f"Test {self.id}: sample size must be positive")

    def with_changes(self, **changes) -> "TestSpec":
        """Return a copy with some fields replaced."""
        return replace(self, **changes)
