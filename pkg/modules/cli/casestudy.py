"""
casestudy.py - Bundled lead-exposure case study

Forty-one two-sided tests from a study of childhood lead exposure (n = 158):
eleven classroom behaviour ratings analysed as z-tests and thirty IQ,
auditory, token, sentence and reaction-time outcomes analysed as t-tests with
151 degrees of freedom. Each row carries the observed p-value and statistic and
the published reference columns (marginal power, p-value weight, PrSig, weighted
PrSig and the significance-chasing index) that reruns are compared against.

Changes:
- Initial implementation with the embedded table and reference columns
- Added the weighted PrSig column and the discovery marks of B, H and BY
- Added the shrinkage sweep comparison
- Weighted discovery marks compared with the published ones
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from modules.core.mvdist import stat_from_pvalue
from modules.core.rng import RngStream
from modules.core.types import INFINITE, DegreesOfFreedom, TailType, TestSpec
from modules.engine.power import (
    DEFAULT_N,
    DEFAULT_S,
    DEFAULT_SEED,
    DEFAULT_SWEEP,
    PowerStudyConfig,
    run_power_analysis,
    shrinkage_sweep,
)
from modules.engine.report import PowerReport
from modules.procedures.dpmtp import dp_prsig
from modules.procedures.mtp import MethodSpec, PValueFamily, run_mtp

logger = logging.getLogger("mtppower.cli")

SAMPLE_SIZE = 158
T_TEST_DOF = DegreesOfFreedom(151)
Z_TESTS = 11
CASE_STUDY_ALPHA = 0.05
CASE_STUDY_METHODS = ("dp", "b", "h", "by")

# (id, label, p, t, MargPwr, p-weight, PrSig, PrSig.w, sigChase)
NEEDLEMAN_ROWS = (
    (1, "Behavior 1", 0.003, 2.97, 0.46, 0.05, 0.28, 0.53, 0.13),
    (2, "Behavior 2", 0.05, 1.96, 0.23, 0.02, 0.00, 0.00, 0.35),
    (3, "Behavior 3", 0.05, 1.96, 0.23, 0.02, 0.00, 0.00, 0.35),
    (4, "Behavior 4", 0.14, 1.48, 0.15, 0.01, 0.00, 0.00, 0.28),
    (5, "Behavior 5", 0.08, 1.75, 0.18, 0.02, 0.00, 0.00, 0.31),
    (6, "Behavior 6", 0.01, 2.58, 0.37, 0.04, 0.02, 0.08, 0.35),
    (7, "Behavior 7", 0.04, 2.05, 0.25, 0.03, 0.00, 0.00, 0.37),
    (8, "Behavior 8", 0.01, 2.58, 0.38, 0.04, 0.02, 0.08, 0.36),
    (9, "Behavior 9", 0.05, 1.96, 0.23, 0.02, 0.00, 0.00, 0.35),
    (10, "Behavior 10", 0.003, 2.97, 0.47, 0.05, 0.28, 0.53, 0.14),
    (11, "Behavior 11", 0.003, 2.97, 0.47, 0.05, 0.28, 0.53, 0.14),
    (12, "Sum Behavior", 0.02, 2.35, 0.30, 0.03, 0.00, 0.00, 0.40),
    (13, "Verbal IQ 1", 0.04, 2.07, 0.25, 0.03, 0.00, 0.00, 0.37),
    (14, "Verbal IQ 2", 0.05, 1.98, 0.23, 0.02, 0.00, 0.00, 0.35),
    (15, "Verbal IQ 3", 0.02, 2.35, 0.31, 0.03, 0.00, 0.00, 0.41),
    (16, "Verbal IQ 4", 0.49, 0.69, 0.06, 0.01, 0.00, 0.00, 0.18),
    (17, "Verbal IQ 5", 0.08, 1.76, 0.18, 0.02, 0.00, 0.00, 0.30),
    (18, "Verbal IQ 6", 0.36, 0.92, 0.08, 0.01, 0.00, 0.00, 0.20),
    (19, "Performance IQ 1", 0.03, 2.19, 0.28, 0.03, 0.00, 0.00, 0.39),
    (20, "Performance IQ 2", 0.38, 0.88, 0.07, 0.01, 0.00, 0.00, 0.19),
    (21, "Performance IQ 3", 0.15, 1.45, 0.14, 0.01, 0.00, 0.00, 0.27),
    (22, "Performance IQ 4", 0.54, 0.61, 0.05, 0.01, 0.00, 0.00, 0.17),
    (23, "Performance IQ 5", 0.90, 0.13, 0.03, 0.00, 0.00, 0.00, 0.13),
    (24, "Performance IQ 6", 0.37, 0.90, 0.08, 0.01, 0.00, 0.00, 0.20),
    (25, "Full Verbal IQ", 0.03, 2.19, 0.27, 0.03, 0.00, 0.00, 0.38),
    (26, "Full Perf. IQ", 0.03, 2.19, 0.28, 0.03, 0.00, 0.00, 0.39),
    (27, "Full VerbalPerf.IQ", 0.08, 1.76, 0.20, 0.02, 0.00, 0.00, 0.32),
    (28, "Seashore 1", 0.002, 3.15, 0.50, 0.05, 0.38, 0.70, 0.09),
    (29, "Seashore 2", 0.03, 2.19, 0.26, 0.03, 0.00, 0.00, 0.37),
    (30, "Seashore 3", 0.07, 1.82, 0.19, 0.02, 0.00, 0.00, 0.32),
    (31, "Total Seashore", 0.002, 3.15, 0.51, 0.05, 0.38, 0.70, 0.09),
    (32, "Token 1", 0.37, 0.90, 0.07, 0.01, 0.00, 0.00, 0.19),
    (33, "Token 2", 0.90, 0.13, 0.04, 0.00, 0.00, 0.00, 0.14),
    (34, "Token 3", 0.42, 0.81, 0.07, 0.01, 0.00, 0.00, 0.19),
    (35, "Token 4", 0.05, 1.98, 0.21, 0.02, 0.00, 0.00, 0.34),
    (36, "Total Token", 0.09, 1.71, 0.18, 0.02, 0.00, 0.00, 0.30),
    (37, "Sentence", 0.04, 2.07, 0.24, 0.02, 0.00, 0.00, 0.36),
    (38, "Reaction Time 1", 0.32, 1.00, 0.08, 0.01, 0.00, 0.00, 0.20),
    (39, "Reaction Time 2", 0.001, 3.36, 0.56, 0.06, 0.57, 0.76, 0.01),
    (40, "Reaction Time 3", 0.001, 3.36, 0.55, 0.05, 0.57, 0.76, 0.02),
    (41, "Reaction Time 4", 0.01, 2.61, 0.37, 0.04, 0.02, 0.08, 0.35),
)

# Procedures rejecting each test on the observed p-values: unweighted, and
# weighted with the DP p-value weights.
PUBLISHED_MARKS = {39: ("B", "H"), 40: ("B", "H")}
PUBLISHED_WEIGHTED_MARKS = {
    1: ("BY",), 6: ("BY",), 8: ("BY",), 10: ("BY",), 11: ("BY",), 41: ("BY",),
    28: ("B", "BY"), 31: ("B", "BY"),
    39: ("B", "H", "BY"), 40: ("B", "H", "BY"),
}

PUBLISHED_AVERAGE_POWER = {"DP": 0.25, "B": 0.21, "H": 0.22, "BY": 0.26}
PUBLISHED_DISJUNCTIVE_POWER = {"DP": 1.00, "B": 1.00, "H": 1.00, "BY": 1.00}
PUBLISHED_CONJUNCTIVE_POWER = {"DP": 0.0, "B": 0.0, "H": 0.0, "BY": 0.0}
# shrinkage -> (DP average power, DP disjunctive power)
PUBLISHED_SWEEP = {0.0: (0.25, 1.00), 0.25: (0.13, 0.98), 0.5: (0.05, 0.69), 0.75: (0.02, 0.29)}

COMPARED_COLUMNS = ("MargPwr", "p-weight", "PrSig", "PrSig.w", "sigChase")

_CASE_STUDY_PATH = 3


def row_dof(test_id) -> DegreesOfFreedom:
    """Degrees of freedom of a case-study row: z-tests first, then t-tests."""
    return INFINITE if test_id <= Z_TESTS else T_TEST_DOF


def needleman_tests() -> List[TestSpec]:
    """
    The 41 case-study tests with effect ratios derived from the observed p-values.

    Returns:
        list: TestSpec per row, two-sided, ratio = |t| implied by p
    """
    tests = []
    for test_id, label, p, *_ in NEEDLEMAN_ROWS:
        dof = row_dof(test_id)
        tests.append(TestSpec(
            id=test_id,
            label=label,
            tail=TailType.TWO_SIDED,
            dof=dof,
            effect_ratio=float(stat_from_pvalue(p, dof, TailType.TWO_SIDED)),
            observed_p=p,
            sample_size=SAMPLE_SIZE,
        ))
    return tests


def needleman_config(**overrides) -> PowerStudyConfig:
    """Case-study PowerStudyConfig; keyword overrides replace defaults (None ignored)."""
    fields = dict(
        tests=tuple(needleman_tests()),
        alpha=CASE_STUDY_ALPHA,
        s_iters=DEFAULT_S,
        n_draws=DEFAULT_N,
        methods=CASE_STUDY_METHODS,
        seed=DEFAULT_SEED,
    )
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return PowerStudyConfig(**fields)


def observed_pvalues():
    return np.array([row[2] for row in NEEDLEMAN_ROWS], dtype=float)


def published_column(name):
    """Published reference column by name, in test order."""
    index = {"t": 3, "MargPwr": 4, "p-weight": 5, "PrSig": 6, "PrSig.w": 7, "sigChase": 8}[name]
    return np.array([row[index] for row in NEEDLEMAN_ROWS], dtype=float)


def discovery_marks(family: PValueFamily, alpha, weighted=False) -> Dict[int, tuple]:
    """Which of B, H and BY reject each test on the observed family."""
    marks = {}
    for kind in ("b", "h", "by"):
        method = MethodSpec.parse(f"{kind}:weighted" if weighted else kind)
        for test_id in sorted(run_mtp(family, alpha, method).rejected_ids):
            marks.setdefault(test_id, ())
            marks[test_id] += (method.kind.short,)
    return marks


def mark_mismatches(marks, reference) -> List[tuple]:
    """(test id, procedure) pairs marked in exactly one of marks and reference."""
    def pairs(table):
        return {(test_id, label) for test_id, labels in table.items() for label in labels}

    return sorted(pairs(marks) ^ pairs(reference))


@dataclass
class CaseStudyResult:
    """
    Reproduced case-study columns next to the published ones.

    Attributes:
        report (PowerReport): The power analysis
        reproduced (dict): Column name -> reproduced values (test order)
        published (dict): Column name -> published values
        marks (dict): Unweighted discovery marks per test id
        weighted_marks (dict): Weighted discovery marks per test id
    """

    report: PowerReport
    reproduced: Dict[str, np.ndarray]
    published: Dict[str, np.ndarray]
    marks: Dict[int, tuple] = field(default_factory=dict)
    weighted_marks: Dict[int, tuple] = field(default_factory=dict)

    def deviations(self):
        """Absolute deviations per column."""
        return {name: np.abs(self.reproduced[name] - self.published[name]) for name in COMPARED_COLUMNS}

    def max_deviations(self):
        return {name: float(dev.max()) for name, dev in self.deviations().items()}

    def weighted_mark_mismatches(self):
        return mark_mismatches(self.weighted_marks, PUBLISHED_WEIGHTED_MARKS)

    def rows(self):
        """One row per test: id, label, then reproduced/published/deviation per column."""
        deviations = self.deviations()
        out = []
        for j, row in enumerate(NEEDLEMAN_ROWS):
            cells = [row[0], row[1]]
            for name in COMPARED_COLUMNS:
                cells += [float(self.reproduced[name][j]), float(self.published[name][j]), float(deviations[name][j])]
            out.append(cells)
        return out

    @staticmethod
    def columns():
        names = ["id", "label"]
        for name in COMPARED_COLUMNS:
            names += [name, f"{name} ref", "dev"]
        return names


def run_case_study(config: Optional[PowerStudyConfig] = None, threads=1) -> CaseStudyResult:
    """
    Reproduce the case-study table.

    Runs the power analysis for DP, B, H and BY, derives the DP p-value weights,
    then computes the weighted PrSig and the weighted discovery marks with them.

    Args:
        config (PowerStudyConfig, optional): Defaults to needleman_config()
        threads (int): Worker threads

    Returns:
        CaseStudyResult: Reproduced and published columns
    """
    config = config or needleman_config()
    if not any(mth.label == "DP" for mth in config.methods):
        config = config.with_changes(methods=tuple(config.methods) + (MethodSpec.parse("dp"),))
    report = run_power_analysis(config, threads=threads)
    dp = report["DP"]

    ids = [t.id for t in config.tests]
    p = np.array([t.observed_p for t in config.tests], dtype=float)
    unweighted = PValueFamily(p, None, ids)
    weights = dp.pvalue_weights if dp.pvalue_weights is not None else np.full(len(ids), 1.0 / len(ids))
    weighted = PValueFamily(p, weights, ids)
    rng = RngStream(int(config.seed), 0, (_CASE_STUDY_PATH,))
    prsig_w = dp_prsig(weighted, config.alpha, config.n_draws, config.hyper_rate, rng,
                       weighted=True, per_rank=config.per_rank_dp).by_test()

    reproduced = {
        "MargPwr": dp.pmp,
        "p-weight": weights,
        "PrSig": dp.observed,
        "PrSig.w": prsig_w,
        "sigChase": dp.sig_chase,
    }
    published = {name: published_column(name) for name in COMPARED_COLUMNS}
    result = CaseStudyResult(
        report=report,
        reproduced=reproduced,
        published=published,
        marks=discovery_marks(unweighted, config.alpha),
        weighted_marks=discovery_marks(weighted, config.alpha, weighted=True),
    )
    logger.info(f"Case study max deviations: {result.max_deviations()}")
    return result


def run_case_study_sweep(config: Optional[PowerStudyConfig] = None, levels=DEFAULT_SWEEP, threads=1):
    """
    Shrinkage sweep of the case study with the published DP curve alongside.

    Returns:
        tuple: (ShrinkageSweep, rows of [s, pap, pap ref, pdp, pdp ref, pcp])
    """
    config = config or needleman_config(methods=("dp",))
    sweep = shrinkage_sweep(config, levels, threads=threads)
    rows = []
    for level, report in zip(sweep.levels, sweep.reports):
        if "DP" not in report.results:
            continue
        dp = report["DP"]
        ref = PUBLISHED_SWEEP.get(level, (math.nan, math.nan))
        rows.append([level, dp.pap, ref[0], dp.pdp, ref[1], dp.pcp])
    return sweep, rows
