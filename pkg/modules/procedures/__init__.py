"""
mtppower.procedures - Multiple testing procedures

This package provides the classical procedures (Bonferroni, Holm,
Benjamini-Yekutieli, each optionally weighted) and the Dirichlet-process MTP.

Changes:
- Initial implementation of the procedures package
"""

from modules.procedures.mtp import (
    MtpKind,
    MethodSpec,
    PValueFamily,
    SortedFamily,
    ThresholdVector,
    MtpDecision,
    sort_family,
    thresholds_bonferroni,
    thresholds_holm,
    thresholds_by,
    apply_step_up,
    apply_step_down,
    apply_single_step,
    run_mtp,
    harmonic_number,
    normalize_weights,
    parse_methods,
)
from modules.procedures.dpmtp import (
    DpBaseline,
    DpPriorDraw,
    PrSigVector,
    dp_baseline,
    sample_dp_draw,
    dp_shape,
    dp_thresholds,
    dp_prsig,
)

__all__ = [
    'MtpKind',
    'MethodSpec',
    'PValueFamily',
    'SortedFamily',
    'ThresholdVector',
    'MtpDecision',
    'sort_family',
    'thresholds_bonferroni',
    'thresholds_holm',
    'thresholds_by',
    'apply_step_up',
    'apply_step_down',
    'apply_single_step',
    'run_mtp',
    'harmonic_number',
    'normalize_weights',
    'parse_methods',
    'DpBaseline',
    'DpPriorDraw',
    'PrSigVector',
    'dp_baseline',
    'sample_dp_draw',
    'dp_shape',
    'dp_thresholds',
    'dp_prsig',
]
