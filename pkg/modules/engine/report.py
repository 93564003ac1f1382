"""
report.py - Power reports and their diagnostics

Result containers for the power loop (MethodResult, PowerReport), the
diagnostics computed from them (p-value weights, significance-chasing
Hellinger indices, Monte Carlo variance) and the machine-readable report model.

Changes:
- Initial implementation of MethodResult and PowerReport
- p-value weights computed in log-sum-exp form
- Significance chasing uses the square-rooted Hellinger distance by default
- Added the pydantic ReportFile model with deterministic JSON output
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import logsumexp

from modules.core.errors import AllZeroPower, DomainError, MissingObservedP
from modules.core.types import TestSpec
from modules.procedures.dpmtp import DEFAULT_HYPER_RATE, dp_prsig
from modules.procedures.mtp import MethodSpec, MtpKind, PValueFamily, run_mtp

logger = logging.getLogger("mtppower.engine")

REPORT_SCHEMA_VERSION = 1
FLOAT_DIGITS = 10


def mc_variance(values):
    """
    Monte Carlo variance of a sample mean.

    v = (1/S^2) * sum_s (h_s - mean(h))^2, with the bound 1/(4S) that holds for
    any h taking values in [0, 1].

    Args:
        values (array-like): Per-iteration values h_1..h_S

    Returns:
        tuple: (estimate, bound)
    """
    h = np.asarray(values, dtype=float)
    s = h.shape[0] if h.ndim else 0
    if s < 1:
        raise DomainError("Monte Carlo variance needs at least one iteration")
    centered = h - h.mean(axis=0)
    return np.sum(centered * centered, axis=0) / (s * s), 1.0 / (4.0 * s)


def pvalue_weights(pmp):
    """
    Normalized p-value weights from marginal powers.

    Computed as exp(log d_r - a) / sum_k exp(log d_k - a) with a = max_k log d_k,
    which equals pmp / sum(pmp). Zero powers get zero weight.

    Raises:
        AllZeroPower: If every marginal power is zero
    """
    pmp = np.asarray(pmp, dtype=float)
    if np.any((pmp < 0) | (pmp > 1)):
        raise DomainError("Marginal powers must lie in [0, 1]")
    if not np.any(pmp > 0):
        raise AllZeroPower("All predictive marginal powers are zero; p-value weights are undefined")
    with np.errstate(divide="ignore"):
        logs = np.log(pmp)
    shifted = logs - logs.max()
    return np.exp(shifted - logsumexp(shifted))


def hellinger(d, dbar, literal=False):
    """
    Hellinger distance between Bernoulli(d) and Bernoulli(dbar), element-wise.

    Args:
        d: Observed decision values in [0, 1]
        dbar: Predictive marginal powers in [0, 1]
        literal (bool): Return (1/sqrt 2) * [bracket] instead of sqrt(bracket / 2)
    """
    d = np.clip(np.asarray(d, dtype=float), 0.0, 1.0)
    dbar = np.clip(np.asarray(dbar, dtype=float), 0.0, 1.0)
    bracket = (np.sqrt(d) - np.sqrt(dbar)) ** 2 + (np.sqrt(1.0 - d) - np.sqrt(1.0 - dbar)) ** 2
    if literal:
        return bracket / np.sqrt(2.0)
    return np.sqrt(bracket / 2.0)


def observed_family(tests: Sequence[TestSpec], weights=None) -> PValueFamily:
    """
    Build the family of observed p-values.

    Raises:
        MissingObservedP: If a test has no observed p-value
    """
    missing = [t.id for t in tests if t.observed_p is None]
    if missing:
        raise MissingObservedP(f"Observed p-values missing for tests {missing}")
    return PValueFamily([t.observed_p for t in tests], weights, [t.id for t in tests])


def observed_decisions(
    family: PValueFamily,
    alpha,
    method,
    n_draws=1000,
    hyper_rate=DEFAULT_HYPER_RATE,
    rng=None,
    per_rank=False,
):
    """
    Decision value d(x) per test on the observed family, in original order.

    Binary rejection flags for B, H and BY; PrSig for DP.
    """
    method = MethodSpec.parse(method)
    if method.kind is MtpKind.DP:
        prsig = dp_prsig(
            family, alpha, n_draws, hyper_rate, rng,
            weighted=method.weighted, per_rank=per_rank,
        )
        return prsig.by_test()
    return run_mtp(family, alpha, method).rejected_mask().astype(float)


def sig_chase(observed, alpha, method, pmp, n_draws=1000, rng=None,
              hyper_rate=DEFAULT_HYPER_RATE, literal=False, per_rank=False):
    """
    Significance-chasing index per test.

    Args:
        observed: PValueFamily of observed p-values, or a sequence of TestSpec
        alpha (float): Level
        method (MethodSpec or str): Procedure whose decisions are compared
        pmp (array-like): Predictive marginal powers for the same method
        n_draws (int): DP draws for the observed PrSig
        rng: Stream for the DP draws
        literal (bool): Use the unrooted form

    Returns:
        numpy.ndarray: Hellinger distances in original test order

    Raises:
        MissingObservedP: If a TestSpec lacks an observed p-value
    """
    family = observed if isinstance(observed, PValueFamily) else observed_family(observed)
    d = observed_decisions(family, alpha, method, n_draws, hyper_rate, rng, per_rank)
    return hellinger(d, pmp, literal)


@dataclass
class MethodResult:
    """
    Power-loop output for one procedure.

    Attributes:
        method (MethodSpec): The procedure
        pmp (numpy.ndarray): Predictive marginal powers, original test order
        pap (float): Predictive average power
        pdp (float): Predictive disjunctive power
        pcp (float): Predictive conjunctive power
        pvalue_weights (numpy.ndarray or None): Weights from pmp; None if all pmp are 0
        mc_variance (dict): Variance estimates for pmp, pap, pdp, pcp
        mc_bound (float): 1/(4S)
        weights_used (numpy.ndarray): Hypothesis weights the procedure ran with
        observed (numpy.ndarray or None): d(x) on observed p-values
        sig_chase (numpy.ndarray or None): Hellinger index per test
        clamped_iterations (int): Iterations where weighted thresholds were clamped
    """

    method: MethodSpec
    pmp: np.ndarray
    pap: float
    pdp: float
    pcp: float
    pvalue_weights: Optional[np.ndarray]
    mc_variance: Dict[str, Any]
    mc_bound: float
    weights_used: np.ndarray
    observed: Optional[np.ndarray] = None
    sig_chase: Optional[np.ndarray] = None
    clamped_iterations: int = 0

    @property
    def label(self):
        return self.method.label


@dataclass
class PowerReport:
    """
    Full output of one power analysis.

    Attributes:
        config: The PowerStudyConfig that produced the report
        results (dict): MethodResult per method label, in request order
        provenance (dict): Config echo, hash, seed and tool version
        series (dict): Optional plot-data series
    """

    config: Any
    results: Dict[str, MethodResult]
    provenance: Dict[str, Any] = field(default_factory=dict)
    series: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)

    def __getitem__(self, label) -> MethodResult:
        if isinstance(label, MethodSpec):
            label = label.label
        return self.results[label]

    @property
    def test_ids(self):
        return [t.id for t in self.config.tests]


def _round(value):
    if value is None:
        return None
    if isinstance(value, np.ndarray):
        return [_round(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    if isinstance(value, dict):
        return {k: _round(v) for k, v in value.items()}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return str(value)
        return round(value, FLOAT_DIGITS)
    if isinstance(value, np.integer):
        return int(value)
    return value


class TestResultModel(BaseModel):
    """Per-test columns of a method result."""

    id: int
    label: str
    pmp: float
    pvalue_weight: Optional[float] = None
    weight_used: float
    observed: Optional[float] = None
    sig_chase: Optional[float] = None
    mc_variance: float


class MethodResultModel(BaseModel):
    """Machine-readable MethodResult."""

    method: str
    pap: float
    pdp: float
    pcp: float
    mc_variance: Dict[str, float]
    mc_bound: float
    clamped_iterations: int = 0
    tests: List[TestResultModel]


class ReportFile(BaseModel):
    """Machine-readable power report with run provenance."""

    schema_version: int = REPORT_SCHEMA_VERSION
    provenance: Dict[str, Any]
    methods: List[MethodResultModel]
    series: Dict[str, List[Dict[str, Any]]] = Field(default_factory=dict)

    def to_json(self):
        """Deterministic JSON text (sorted keys, rounded floats)."""
        return json.dumps(_round(self.model_dump()), sort_keys=True, indent=2) + "\n"


def method_result_model(result: MethodResult, tests: Sequence[TestSpec]) -> MethodResultModel:
    rows = []
    for j, test in enumerate(tests):
        rows.append(TestResultModel(
            id=test.id,
            label=test.label,
            pmp=float(result.pmp[j]),
            pvalue_weight=None if result.pvalue_weights is None else float(result.pvalue_weights[j]),
            weight_used=float(result.weights_used[j]),
            observed=None if result.observed is None else float(result.observed[j]),
            sig_chase=None if result.sig_chase is None else float(result.sig_chase[j]),
            mc_variance=float(result.mc_variance["pmp"][j]),
        ))
    return MethodResultModel(
        method=result.label,
        pap=result.pap,
        pdp=result.pdp,
        pcp=result.pcp,
        mc_variance={k: float(v) for k, v in result.mc_variance.items() if k != "pmp"},
        mc_bound=result.mc_bound,
        clamped_iterations=result.clamped_iterations,
        tests=rows,
    )


def report_file(report: PowerReport, extra_provenance=None) -> ReportFile:
    """
    Convert a PowerReport into its machine-readable model.

    Args:
        report (PowerReport): The report
        extra_provenance (dict, optional): Additional provenance entries (e.g. wall time)

    Returns:
        ReportFile: The serializable model
    """
    provenance = dict(report.provenance)
    if extra_provenance:
        provenance.update(extra_provenance)
    return ReportFile(
        provenance=provenance,
        methods=[method_result_model(r, report.config.tests) for r in report.results.values()],
        series=report.series,
    )
