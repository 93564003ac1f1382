"""
power.py - Predictive power analysis for multiple testing procedures

Runs the predictive power loop over S iterations. Iteration s:

1. draws mu ~ N(shrunk effect ratios, I)
2. draws a correlation matrix (uniform by default) as its Cholesky factor
3. draws statistics t = (mu + A z) / sqrt(V / nu) element-wise
4. converts t to p-values under the null distribution and tail types
5. applies every requested procedure and records a per-test decision value
   (0/1 for B, H and BY, the share of rejecting DP draws for DP)

Decision values are stored per iteration and per test identity, then reduced
in a fixed order, so results do not depend on the thread schedule. Every
iteration owns its random stream (seed, s), and its sub-steps draw from fixed
child streams, so shrinkage sweeps and sample-size evaluations share random numbers.

Changes:
- Initial implementation of PowerStudyConfig and run_power_analysis
- Threaded iteration chunks with schedule-independent reduction
- Added two-pass weighting and the shared DP draws mode
- Added shrinkage_sweep with common random numbers
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from modules.core.correlation import CorrelationSampler, FixedCorrelationSampler, UniformCorrelationSampler
from modules.core.errors import AllZeroPower, ConfigError, DomainError
from modules.core.mvdist import TAIL_CODES, NullDistribution, StudentTNull, noncentral_t_draw
from modules.core.rng import RngStream
from modules.core.types import TestSpec
from modules.engine.report import (
    MethodResult,
    PowerReport,
    hellinger,
    mc_variance,
    observed_decisions,
    observed_family,
    pvalue_weights,
)
from modules.procedures.dpmtp import (
    DEFAULT_HYPER_RATE,
    dp_baseline,
    dp_rejection_fractions,
    sample_dp_masses,
)
from modules.procedures.mtp import MethodSpec, MtpKind, classical_rejections, normalize_weights, parse_methods
from modules.utils.provenance import build_provenance

logger = logging.getLogger("mtppower.engine")

DEFAULT_ALPHA = 0.05
DEFAULT_S = 5000
DEFAULT_N = 1000
DEFAULT_SEED = 20260101
DEFAULT_METHODS = ("dp", "b", "h", "by")
DEFAULT_SWEEP = (0.0, 0.25, 0.5, 0.75)

# Stream layout under the root seed.
_ITERATION_PATH = 0
_OBSERVED_PATH = 1
_SHARED_DP_PATH = 2
_MU, _CORR, _STAT, _DP = 0, 1, 2, 3

_DISJUNCTIVE_TOL = 1e-9


def apply_shrinkage(effect_ratios, shrinkage):
    """
    Deflate effect ratios: ratio_j <- (1 - s_j) * ratio_j.

    Args:
        effect_ratios (array-like): Length-m ratios
        shrinkage (float or array-like): Common or per-test factors in [0, 1]

    Returns:
        numpy.ndarray: Shrunk ratios

    Raises:
        DomainError: If a factor is outside [0, 1]
    """
    ratios = np.asarray(effect_ratios, dtype=float)
    s = np.broadcast_to(np.asarray(shrinkage, dtype=float), ratios.shape)
    if np.any(~((s >= 0.0) & (s <= 1.0))):
        raise DomainError(f"Shrinkage factors must lie in [0, 1], got {shrinkage}")
    return (1.0 - s) * ratios


@dataclass(frozen=True)
class PowerStudyConfig:
    """
    Inputs of a predictive power analysis.

    Attributes:
        tests (tuple): TestSpec per hypothesis
        alpha (float): Level in (0, 1)
        s_iters (int): Outer iterations S
        n_draws (int): DP draws N per iteration
        hyper_rate (float): Rate of the exponential prior on the DP mass
        methods (tuple): MethodSpec list
        shrinkage (tuple): Per-test shrinkage in [0, 1]
        seed (int): Root seed
        shared_dp_draws (bool): Draw one batch of N DP measures for all iterations
        per_rank_dp (bool): Per-rank DP comparison instead of step-up
        literal_sigchase (bool): Unrooted significance-chasing form
        two_pass (bool): Derive weighted-method weights from an unweighted first pass
        correlation (CorrelationSampler, optional): Defaults to the uniform sampler
        null (NullDistribution, optional): Defaults to StudentTNull of the test dofs
    """

    tests: Tuple[TestSpec, ...]
    alpha: float = DEFAULT_ALPHA
    s_iters: int = DEFAULT_S
    n_draws: int = DEFAULT_N
    hyper_rate: float = DEFAULT_HYPER_RATE
    methods: Tuple[MethodSpec, ...] = field(default_factory=lambda: tuple(parse_methods(DEFAULT_METHODS)))
    shrinkage: Tuple[float, ...] = 0.0
    seed: int = DEFAULT_SEED
    shared_dp_draws: bool = False
    per_rank_dp: bool = False
    literal_sigchase: bool = False
    two_pass: bool = False
    correlation: Optional[CorrelationSampler] = None
    null: Optional[NullDistribution] = None

    def __post_init__(self):
        tests = tuple(self.tests)
        if not tests:
            raise ConfigError("A power study needs at least one test")
        ids = [t.id for t in tests]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"Test ids must be unique, got {ids}")
        object.__setattr__(self, "tests", tests)
        m = len(tests)

        if not 0.0 < float(self.alpha) < 1.0:
            raise ConfigError(f"alpha must lie strictly between 0 and 1, got {self.alpha}")
        if int(self.s_iters) < 1:
            raise ConfigError(f"S must be at least 1, got {self.s_iters}")
        if int(self.n_draws) < 1:
            raise ConfigError(f"N must be at least 1, got {self.n_draws}")
        if not float(self.hyper_rate) > 0:
            raise ConfigError(f"Hyperprior rate must be positive, got {self.hyper_rate}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")

        try:
            methods = tuple(parse_methods(self.methods))
        except DomainError as e:
            raise ConfigError(str(e))
        if not methods:
            raise ConfigError("At least one method is required")
        object.__setattr__(self, "methods", methods)

        shrinkage = np.broadcast_to(np.asarray(self.shrinkage, dtype=float), (m,)) \
            if np.ndim(self.shrinkage) == 0 else np.asarray(self.shrinkage, dtype=float)
        if shrinkage.shape != (m,):
            raise ConfigError(f"Expected {m} shrinkage factors, got {shrinkage.size}")
        if np.any(~((shrinkage >= 0.0) & (shrinkage <= 1.0))):
            raise ConfigError("Shrinkage factors must lie in [0, 1]")
        object.__setattr__(self, "shrinkage", tuple(float(s) for s in shrinkage))

        given = [t.weight is not None for t in tests]
        if any(given) and not all(given):
            raise ConfigError("Weights must be given for all tests or for none")
        if all(given) and sum(t.weight for t in tests) <= 0:
            raise ConfigError("Test weights must not all be zero")

        if self.correlation is not None and self.correlation.dim != m:
            raise ConfigError(f"Correlation sampler has dimension {self.correlation.dim}, study has {m} tests")

    @property
    def m(self):
        return len(self.tests)

    @property
    def ids(self):
        return [t.id for t in self.tests]

    def effect_ratios(self):
        return np.array([t.effect_ratio for t in self.tests], dtype=float)

    def prior_mean(self):
        """Shrunk effect ratios, the mean of mu."""
        return apply_shrinkage(self.effect_ratios(), self.shrinkage)

    def dof_values(self):
        return np.array([t.dof.value for t in self.tests], dtype=float)

    def tail_codes(self):
        return np.array([TAIL_CODES[t.tail] for t in self.tests], dtype=int)

    def base_weights(self):
        """Normalized TestSpec weights, or equal weights when none are given."""
        if self.tests[0].weight is None:
            return np.full(self.m, 1.0 / self.m)
        return normalize_weights([t.weight for t in self.tests])

    def correlation_sampler(self) -> CorrelationSampler:
        return self.correlation if self.correlation is not None else UniformCorrelationSampler(self.m)

    def null_distribution(self) -> NullDistribution:
        return self.null if self.null is not None else StudentTNull([t.dof for t in self.tests])

    def has_observed(self):
        return all(t.observed_p is not None for t in self.tests)

    def with_changes(self, **changes) -> "PowerStudyConfig":
        return replace(self, **changes)

    def echo(self):
        """Canonical, JSON-serializable description of the inputs."""
        sampler = self.correlation_sampler()
        correlation = {"kind": sampler.describe()}
        if isinstance(sampler, FixedCorrelationSampler):
            correlation["matrix"] = sampler.matrix.entries.tolist()
        return {
            "tests": [
                {
                    "id": t.id,
                    "label": t.label,
                    "tail": t.tail.value,
                    "dof": str(t.dof),
                    "effect_ratio": t.effect_ratio,
                    "weight": t.weight,
                    "observed_p": t.observed_p,
                    "sample_size": t.sample_size,
                }
                for t in self.tests
            ],
            "alpha": float(self.alpha),
            "s_iters": int(self.s_iters),
            "n_draws": int(self.n_draws),
            "hyper_rate": float(self.hyper_rate),
            "methods": [mth.key for mth in self.methods],
            "shrinkage": list(self.shrinkage),
            "seed": int(self.seed),
            "shared_dp_draws": bool(self.shared_dp_draws),
            "per_rank_dp": bool(self.per_rank_dp),
            "literal_sigchase": bool(self.literal_sigchase),
            "two_pass": bool(self.two_pass),
            "correlation": correlation,
            "null": type(self.null_distribution()).__name__,
        }


class _LoopContext:
    """Precomputed, read-only inputs shared by all iterations of one simulation."""

    def __init__(self, config: PowerStudyConfig, methods, weights):
        self.config = config
        self.m = config.m
        self.alpha = float(config.alpha)
        self.methods = list(methods)
        self.weights = weights
        self.mean = config.prior_mean()
        self.dofs = config.dof_values()
        self.tail_codes = config.tail_codes()
        self.sampler = config.correlation_sampler()
        self.null = config.null_distribution()
        self.root = RngStream(int(config.seed), 0, (_ITERATION_PATH,))
        self.has_dp = any(mth.kind is MtpKind.DP for mth in self.methods)
        self.baseline = dp_baseline(self.m) if self.has_dp else None
        self.shared_masses = None
        if self.has_dp and config.shared_dp_draws:
            gen = RngStream(int(config.seed), 0, (_SHARED_DP_PATH,)).generator()
            _, self.shared_masses = sample_dp_masses(self.baseline, config.hyper_rate, config.n_draws, gen)

    def iteration(self, s):
        """
        Run iteration s.

        Returns:
            tuple: (decision values per method, shape (len(methods), m) in
            original test order; clamping flag per method)
        """
        stream = self.root.for_iteration(s)
        mu = self.mean + stream.child(_MU).generator().standard_normal(self.m)
        lower = self.sampler.sample_lower(stream.child(_CORR).generator())
        t = noncentral_t_draw(mu, lower, self.dofs, stream.child(_STAT).generator())
        p = self.null.pvalues(t, self.tail_codes)

        perm = np.argsort(p, kind="stable")
        sorted_p = p[perm]
        masses = None
        if self.has_dp:
            masses = self.shared_masses
            if masses is None:
                gen = stream.child(_DP).generator()
                _, masses = sample_dp_masses(self.baseline, self.config.hyper_rate, self.config.n_draws, gen)

        out = np.zeros((len(self.methods), self.m))
        clamped = np.zeros(len(self.methods), dtype=bool)
        for k, method in enumerate(self.methods):
            weights_sorted = self.weights[method.label][perm]
            if method.kind is MtpKind.DP:
                fractions, clamped[k] = dp_rejection_fractions(
                    sorted_p, weights_sorted, self.alpha, masses, self.config.per_rank_dp
                )
                out[k, perm] = fractions
            else:
                out[k, perm] = classical_rejections(sorted_p, weights_sorted, self.alpha, method)
        return out, clamped


def _chunks(total, parts):
    parts = max(1, min(int(parts), total))
    bounds = np.linspace(0, total, parts + 1).astype(int)
    return [range(bounds[i], bounds[i + 1]) for i in range(parts)]


def _simulate(config: PowerStudyConfig, methods, weights, threads=1):
    """
    Run the iteration loop for a set of methods.

    Returns:
        tuple: (decision array of shape (S, len(methods), m), clamped-iteration counts)
    """
    ctx = _LoopContext(config, methods, weights)
    s_total = int(config.s_iters)
    decisions = np.zeros((s_total, len(ctx.methods), ctx.m))
    clamped = np.zeros((s_total, len(ctx.methods)), dtype=bool)

    def run_chunk(iterations):
        for s in iterations:
            decisions[s], clamped[s] = ctx.iteration(s)
        logger.debug(f"Finished iterations {iterations.start}..{iterations.stop - 1}")

    chunks = _chunks(s_total, max(1, int(threads)) * 4)
    if int(threads) <= 1:
        for chunk in chunks:
            run_chunk(chunk)
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as executor:
            list(executor.map(run_chunk, chunks))
    return decisions, clamped.sum(axis=0)


def _summarize(method, decisions, weights_used, clamped_count):
    s_total, m = decisions.shape
    pmp = decisions.mean(axis=0)
    per_iteration_average = decisions.mean(axis=1)
    disjunctive = (decisions.sum(axis=1) >= 1.0 - _DISJUNCTIVE_TOL).astype(float)
    conjunctive = np.all(decisions >= 1.0, axis=1).astype(float)

    v_pmp, bound = mc_variance(decisions)
    variances = {
        "pmp": v_pmp,
        "pap": float(mc_variance(per_iteration_average)[0]),
        "pdp": float(mc_variance(disjunctive)[0]),
        "pcp": float(mc_variance(conjunctive)[0]),
    }
    try:
        weights = pvalue_weights(pmp)
    except AllZeroPower:
        logger.warning(f"{method.label}: every predictive marginal power is zero; no p-value weights")
        weights = None
    if clamped_count:
        logger.warning(f"{method.label}: weighted thresholds clamped in {int(clamped_count)} of {s_total} iterations")
    return MethodResult(
        method=method,
        pmp=pmp,
        pap=float(pmp.mean()),
        pdp=float(disjunctive.mean()),
        pcp=float(conjunctive.mean()),
        pvalue_weights=weights,
        mc_variance=variances,
        mc_bound=float(bound),
        weights_used=np.asarray(weights_used, dtype=float),
        clamped_iterations=int(clamped_count),
    )


def _attach_observed(config: PowerStudyConfig, results: Dict[str, MethodResult]):
    if not config.has_observed():
        logger.debug("Observed p-values incomplete; skipping significance chasing")
        return
    for result in results.values():
        family = observed_family(config.tests, result.weights_used)
        rng = RngStream(int(config.seed), 0, (_OBSERVED_PATH,))
        result.observed = observed_decisions(
            family, config.alpha, result.method, config.n_draws, config.hyper_rate, rng, config.per_rank_dp
        )
        result.sig_chase = hellinger(result.observed, result.pmp, config.literal_sigchase)


def run_power_analysis(config: PowerStudyConfig, threads=1, weight_overrides=None, observed=True) -> PowerReport:
    """
    Estimate predictive marginal, average, disjunctive and conjunctive powers.

    Args:
        config (PowerStudyConfig): Study inputs
        threads (int): Worker threads; results do not depend on it
        weight_overrides (dict, optional): Weights per weighted-method label
        observed (bool): Compute observed decisions and significance chasing
            when every test has an observed p-value

    Returns:
        PowerReport: Results per method in request order
    """
    weight_overrides = dict(weight_overrides or {})
    base = config.base_weights()
    equal = np.full(config.m, 1.0 / config.m)
    logger.info(
        f"Power analysis: m={config.m}, S={config.s_iters}, N={config.n_draws}, "
        f"alpha={config.alpha}, methods={[mth.label for mth in config.methods]}"
    )

    weighted = [mth for mth in config.methods if mth.weighted and mth.label not in weight_overrides]
    if config.two_pass and weighted:
        first = parse_methods([mth.unweighted() for mth in config.methods])
        logger.info(f"Two-pass weighting: first pass with {[mth.label for mth in first]}")
        decisions, clamped = _simulate(config, first, {mth.label: equal for mth in first}, threads)
        first_results = {
            mth.label: _summarize(mth, decisions[:, k, :], equal, clamped[k]) for k, mth in enumerate(first)
        }
        for mth in weighted:
            source = first_results[mth.unweighted().label]
            if source.pvalue_weights is None:
                raise AllZeroPower(f"Cannot derive weights for {mth.label}: all {source.label} powers are zero")
            weight_overrides[mth.label] = source.pvalue_weights
        remaining = [mth for mth in config.methods if mth.weighted]
        weights = {mth.label: weight_overrides[mth.label] for mth in remaining}
        decisions, clamped = _simulate(config, remaining, weights, threads)
        second = {
            mth.label: _summarize(mth, decisions[:, k, :], weights[mth.label], clamped[k])
            for k, mth in enumerate(remaining)
        }
        results = {mth.label: first_results.get(mth.label) or second[mth.label] for mth in config.methods}
    else:
        weights = {}
        for mth in config.methods:
            if mth.weighted:
                weights[mth.label] = np.asarray(weight_overrides.get(mth.label, base), dtype=float)
            else:
                weights[mth.label] = equal
        decisions, clamped = _simulate(config, config.methods, weights, threads)
        results = {
            mth.label: _summarize(mth, decisions[:, k, :], weights[mth.label], clamped[k])
            for k, mth in enumerate(config.methods)
        }

    if observed:
        _attach_observed(config, results)
    for result in results.values():
        logger.info(
            f"{result.label}: pap={result.pap:.4f} pdp={result.pdp:.4f} pcp={result.pcp:.4f}"
        )
    return PowerReport(config, results, build_provenance(config.echo(), config.seed))


@dataclass
class ShrinkageSweep:
    """Power reports over a grid of common shrinkage levels."""

    levels: List[float]
    reports: List[PowerReport]

    def series(self):
        """Plot-data rows: one per (shrinkage level, method)."""
        rows = []
        for level, report in zip(self.levels, self.reports):
            for result in report.results.values():
                rows.append({
                    "shrinkage": float(level),
                    "method": result.label,
                    "pap": result.pap,
                    "pdp": result.pdp,
                    "pcp": result.pcp,
                })
        return rows


def shrinkage_sweep(config: PowerStudyConfig, levels: Sequence[float] = DEFAULT_SWEEP, threads=1) -> ShrinkageSweep:
    """
    Run the power analysis at each common shrinkage level with common random numbers.

    Args:
        config (PowerStudyConfig): Base study; its own shrinkage is replaced
        levels (sequence): Shrinkage levels in [0, 1]
        threads (int): Worker threads

    Returns:
        ShrinkageSweep: One report per level
    """
    levels = [float(level) for level in levels]
    if not levels:
        raise ConfigError("Shrinkage sweep needs at least one level")
    reports = []
    for level in levels:
        logger.info(f"Shrinkage sweep: s={level}")
        reports.append(run_power_analysis(config.with_changes(shrinkage=level), threads=threads))
    return ShrinkageSweep(levels, reports)
