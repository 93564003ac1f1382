"""
samplesize.py - Sample-size search on predictive marginal power

Finds the smallest sample-size multiplier kappa at which one test reaches a
target predictive marginal power. Under kappa the test's effect ratio grows by
sqrt(kappa) and its degrees of freedom follow a growth rule (dof * kappa by
default; INFINITE stays INFINITE). Every evaluation reruns the power loop with the
same seed, so evaluations share random numbers.

Changes:
- Initial implementation of bisection over kappa
- Added GrowthModel with a replaceable degrees-of-freedom rule
- Evaluations are recorded for the power_vs_kappa series
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from modules.core.errors import ConfigError, DomainError, Unreachable
from modules.core.types import DegreesOfFreedom
from modules.engine.power import PowerStudyConfig, run_power_analysis
from modules.procedures.mtp import MethodSpec

logger = logging.getLogger("mtppower.engine")

DEFAULT_KAPPA_MIN = 1.0
DEFAULT_KAPPA_MAX = 4.0
DEFAULT_TOLERANCE = 0.01


def _linear_dof(dof: DegreesOfFreedom, kappa) -> DegreesOfFreedom:
    return dof.scaled(kappa)


@dataclass(frozen=True)
class GrowthModel:
    """
    How a test's inputs change under sample-size multiplier kappa.

    Attributes:
        dof_rule (callable): (DegreesOfFreedom, kappa) -> DegreesOfFreedom
    """

    dof_rule: Callable[[DegreesOfFreedom, float], DegreesOfFreedom] = _linear_dof

    def effect_ratio(self, ratio, kappa):
        return ratio * math.sqrt(kappa)

    def dof(self, dof, kappa):
        return self.dof_rule(dof, kappa)


@dataclass
class SampleSizeResult:
    """
    Outcome of a sample-size search for one test.

    Attributes:
        test_id: Identifier of the searched test
        target (float): Target marginal power
        kappa (float): Smallest multiplier found
        power (float): Estimated marginal power at kappa
        implied_n (int, optional): ceil(kappa * n) when the test has a sample size
        evaluations (list): (kappa, power) pairs in evaluation order
    """

    test_id: object
    target: float
    kappa: float
    power: float
    implied_n: Optional[int] = None
    evaluations: List[Tuple[float, float]] = field(default_factory=list)

    def series(self):
        """power_vs_kappa rows sorted by kappa."""
        return [
            {"test_id": self.test_id, "kappa": k, "power": p}
            for k, p in sorted(self.evaluations)
        ]


def _scaled_config(config: PowerStudyConfig, index, kappa, growth: GrowthModel, method):
    tests = list(config.tests)
    spec = tests[index]
    tests[index] = spec.with_changes(
        effect_ratio=growth.effect_ratio(spec.effect_ratio, kappa),
        dof=growth.dof(spec.dof, kappa),
    )
    return config.with_changes(tests=tuple(tests), methods=(method,), two_pass=False)


def sample_size_search(
    config: PowerStudyConfig,
    test_id,
    target,
    method="b",
    kappa_min=DEFAULT_KAPPA_MIN,
    kappa_max=DEFAULT_KAPPA_MAX,
    tolerance=DEFAULT_TOLERANCE,
    growth: Optional[GrowthModel] = None,
    threads=1,
) -> SampleSizeResult:
    """
    Bisect on kappa for the smallest multiplier reaching the target marginal power.

    Args:
        config (PowerStudyConfig): Study context; only test_id is scaled
        test_id: Identifier of the test to size
        target (float): Target marginal power in (0, 1)
        method (MethodSpec or str): Procedure whose marginal power is targeted
        kappa_min (float): Lower end of the bracket
        kappa_max (float): Upper end of the bracket
        tolerance (float): Final bracket width on kappa
        growth (GrowthModel, optional): Defaults to sqrt(kappa) ratios and dof * kappa
        threads (int): Worker threads for each evaluation

    Returns:
        SampleSizeResult: The multiplier, its power and the evaluations

    Raises:
        Unreachable: If the power at kappa_max is below target
    """
    if not 0.0 < target < 1.0:
        raise DomainError(f"Target power must lie strictly between 0 and 1, got {target}")
    if not 0.0 < kappa_min < kappa_max:
        raise DomainError(f"Need 0 < kappa_min < kappa_max, got [{kappa_min}, {kappa_max}]")
    if not tolerance > 0:
        raise DomainError(f"Tolerance must be positive, got {tolerance}")
    ids = config.ids
    if test_id not in ids:
        raise ConfigError(f"Unknown test id {test_id}")
    index = ids.index(test_id)
    method = MethodSpec.parse(method)
    growth = growth or GrowthModel()
    evaluations = []

    def power_at(kappa):
        report = run_power_analysis(_scaled_config(config, index, kappa, growth, method),
                                    threads=threads, observed=False)
        power = float(report[method].pmp[index])
        evaluations.append((float(kappa), power))
        logger.debug(f"Test {test_id}: kappa={kappa:.4f} power={power:.4f}")
        return power

    def finish(kappa, power):
        n = config.tests[index].sample_size
        implied = None if n is None else int(math.ceil(kappa * n - 1e-9))
        return SampleSizeResult(test_id, float(target), float(kappa), power, implied, evaluations)

    low_power = power_at(kappa_min)
    if low_power >= target:
        return finish(kappa_min, low_power)
    high_power = power_at(kappa_max)
    if high_power < target:
        logger.warning(f"Test {test_id}: power {high_power:.3f} at kappa_max={kappa_max} is below {target}")
        raise Unreachable(
            f"Test {test_id}: target power {target} not reached at kappa={kappa_max} "
            f"(power {high_power:.3f})",
            best_kappa=kappa_max,
            best_power=high_power,
        )

    low, high = kappa_min, kappa_max
    while high - low > tolerance:
        mid = (low + high) / 2.0
        mid_power = power_at(mid)
        if mid_power >= target:
            high, high_power = mid, mid_power
        else:
            low = mid
    return finish(high, high_power)
