"""
cli.py - Command Line Interface for mtppower

This module implements the mtppower command surface: classical MTP decisions
(mtp), DP-MTP significance probabilities (dpmtp), predictive power analysis of
a study file (power), the bundled lead-exposure case study (case-study) and the
sample-size search (sample-size). Tables are printed with box characters and
colors; reports can be written as JSON.

Changes:
- Replaced the interactive shell with argparse subcommands
- Kept colored box-character tables with alternating row colors
- Added JSON reports with provenance and plot-data series
- Exit codes: 0 success, 2 configuration or schema error, 3 unreachable target
- Added --record-timing; reports are byte-identical without it
- case-study lists weighted marks that differ from the published table
"""

import argparse
import json
import logging
import os
import sys
import time
import traceback

# Import colorama for cross-platform colored terminal text
try:
    from colorama import init, Fore, Back, Style
    has_colors = True
    init()
except ImportError:
    # Create dummy color objects if colorama is not available
    has_colors = False

    class DummyColor:
        def __getattr__(self, name):
            return ''
    Fore = DummyColor()
    Back = DummyColor()
    Style = DummyColor()

from modules.cli.casestudy import (
    CaseStudyResult,
    PUBLISHED_AVERAGE_POWER,
    needleman_config,
    run_case_study,
    run_case_study_sweep,
)
from modules.core.errors import ConfigError, MtpPowerError, Unreachable
from modules.core.rng import RngStream
from modules.engine.power import DEFAULT_N, DEFAULT_SEED, DEFAULT_SWEEP, run_power_analysis, shrinkage_sweep
from modules.engine.report import PowerReport, report_file
from modules.engine.samplesize import DEFAULT_KAPPA_MAX, DEFAULT_TOLERANCE, sample_size_search
from modules.parser.family import read_correlation_matrix, read_family_table
from modules.parser.study import load_study
from modules.procedures.dpmtp import DEFAULT_HYPER_RATE, dp_prsig
from modules.procedures.mtp import MtpKind, parse_methods, run_mtp
from modules.utils import TOOL_VERSION, format_error, format_table

logger = logging.getLogger("mtppower.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNREACHABLE = 3

DEFAULT_MTP_METHODS = ("b", "h", "by")


class _Plain:
    def __getattr__(self, name):
        return ''


class Palette:
    """Color codes for one invocation; empty strings when color is off."""

    def __init__(self, enabled=True):
        if enabled and has_colors:
            self.fore, self.back, self.style = Fore, Back, Style
        else:
            self.fore = self.back = self.style = _Plain()


def colorize_table(formatted, palette):
    """
    Turn a +---+ table into box characters with a highlighted header.

    Args:
        formatted (str): Output of format_table
        palette (Palette): Colors to use

    Returns:
        str: Colorized table
    """
    fore, back, style = palette.fore, palette.back, palette.style
    lines = formatted.split('\n')
    start = 1 if lines and not lines[0].startswith('+') else 0
    if len(lines) - start <= 2:
        return formatted

    def rule(line, left, mid, right):
        line = line.replace('-', '─')
        line = left + line[1:-1].replace('+', mid) + right
        return f"{fore.BLUE}{line}{style.RESET_ALL}"

    if start:
        lines[0] = f"{style.BRIGHT}{lines[0]}{style.RESET_ALL}"
    lines[start] = rule(lines[start], '┌', '┬', '┐')
    lines[start + 1] = f"{fore.WHITE}{back.BLUE}{lines[start + 1].replace('|', '│')}{style.RESET_ALL}"
    lines[start + 2] = rule(lines[start + 2], '├', '┼', '┤')
    last = max(i for i, line in enumerate(lines) if line.startswith('+'))
    for i in range(start + 3, last):
        color = fore.WHITE if (i - start) % 2 == 1 else fore.CYAN
        lines[i] = f"{color}{lines[i].replace('|', '│')}{style.RESET_ALL}"
    lines[last] = rule(lines[last], '└', '┴', '┘')
    return '\n'.join(lines)


class Output:
    """Collects the text of one command and writes it to stdout or --out."""

    def __init__(self, args):
        self.path = args.out
        self.palette = Palette(enabled=not args.no_color and self.path is None)
        self.chunks = []

    def table(self, columns, rows, title=None, digits=3):
        self.chunks.append(colorize_table(format_table(columns, rows, digits=digits, title=title), self.palette))

    def line(self, text=""):
        self.chunks.append(text)

    def json(self, text):
        self.chunks.append(text.rstrip("\n"))

    def flush(self):
        text = "\n".join(self.chunks) + "\n"
        if self.path is None:
            sys.stdout.write(text)
            return
        with open(self.path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"Wrote {self.path}")


def _json_text(data):
    def clean(value):
        if isinstance(value, float):
            return round(value, 10)
        if isinstance(value, dict):
            return {k: clean(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [clean(v) for v in value]
        return value
    return json.dumps(clean(data), sort_keys=True, indent=2)


def _methods(args, default):
    return parse_methods(args.method or default)


def _overrides(args):
    """PowerStudyConfig overrides from the shared simulation flags (None = keep)."""
    overrides = dict(
        alpha=args.alpha,
        s_iters=args.s_iters,
        n_draws=args.n_draws,
        seed=args.seed,
        shrinkage=args.shrinkage,
        hyper_rate=args.hyper_rate,
        methods=tuple(args.method) if args.method else None,
    )
    for flag in ("shared_dp_draws", "per_rank_dp", "literal_sigchase", "two_pass"):
        if getattr(args, flag):
            overrides[flag] = True
    return overrides


def _timing(args, started):
    if not args.record_timing:
        return None
    return {"wall_time_seconds": round(time.perf_counter() - started, 3)}


def cmd_mtp(args, out):
    """Apply B, H and BY (optionally weighted) once to the observed p-values."""
    table = read_family_table(args.family)
    alpha = args.alpha if args.alpha is not None else 0.05
    methods = _methods(args, DEFAULT_MTP_METHODS)
    if any(m.kind is MtpKind.DP for m in methods):
        raise ConfigError("The DP-MTP has no single decision; use the dpmtp command")

    results = {}
    for method in methods:
        decision = run_mtp(table.family(weighted=method.weighted), alpha, method)
        results[method.label] = decision
        logger.info(f"{method.label}: rejected {sorted(decision.rejected_ids)}")

    if args.format == "json":
        payload = {"alpha": alpha, "methods": {}}
        for label, decision in results.items():
            ranks, thresholds, mask = decision.ranks_by_test(), decision.thresholds_by_test(), decision.rejected_mask()
            payload["methods"][label] = [
                {"id": table.ids[j], "label": table.labels[j], "p": float(table.values[j]), "rank": int(ranks[j]),
                 "threshold": None if thresholds[j] != thresholds[j] else float(thresholds[j]),
                 "rejected": bool(mask[j])}
                for j in range(len(table))
            ]
        out.json(_json_text(payload))
        return EXIT_OK

    for label, decision in results.items():
        ranks, thresholds, mask = decision.ranks_by_test(), decision.thresholds_by_test(), decision.rejected_mask()
        rows = [
            [table.ids[j], table.labels[j], float(table.values[j]), int(ranks[j]), float(thresholds[j]), bool(mask[j])]
            for j in range(len(table))
        ]
        out.table(["id", "label", "p", "rank", "threshold", "rejected"], rows, digits=5,
                  title=f"{label} at alpha={alpha}: {decision.rejection_count} rejected")
        out.line()
    return EXIT_OK


def cmd_dpmtp(args, out):
    """PrSig per test from N draws of the DP prior."""
    table = read_family_table(args.family)
    alpha = args.alpha if args.alpha is not None else 0.05
    n_draws = args.n_draws if args.n_draws is not None else DEFAULT_N
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    hyper_rate = args.hyper_rate if args.hyper_rate is not None else DEFAULT_HYPER_RATE
    family = table.family(weighted=args.weighted)
    prsig = dp_prsig(family, alpha, n_draws, hyper_rate, RngStream(seed), weighted=args.weighted,
                     per_rank=args.per_rank_dp)
    values = prsig.by_test()

    if args.format == "json":
        out.json(_json_text({
            "alpha": alpha, "n_draws": n_draws, "seed": seed, "weighted": bool(args.weighted),
            "clamped": bool(prsig.clamped),
            "tests": [{"id": table.ids[j], "label": table.labels[j], "p": float(table.values[j]),
                       "weight": float(family.weights[j]), "prsig": float(values[j])} for j in range(len(table))],
        }))
        return EXIT_OK

    rows = [[table.ids[j], table.labels[j], float(table.values[j]), float(family.weights[j]), float(values[j])]
            for j in range(len(table))]
    name = "PrSig.w" if args.weighted else "PrSig"
    out.table(["id", "label", "p", "weight", name], rows,
              title=f"DP-MTP at alpha={alpha}, N={n_draws}, seed={seed}")
    return EXIT_OK


def _summary_rows(report: PowerReport):
    return [[r.label, r.pap, r.pdp, r.pcp, r.mc_bound, r.clamped_iterations] for r in report.results.values()]


def _per_test_table(out, report: PowerReport, title):
    results = list(report.results.values())
    columns = ["id", "label"] + [f"pmp {r.label}" for r in results]
    with_chase = [r for r in results if r.sig_chase is not None]
    columns += [f"sigChase {r.label}" for r in with_chase]
    rows = []
    for j, test in enumerate(report.config.tests):
        row = [test.id, test.label] + [float(r.pmp[j]) for r in results]
        row += [float(r.sig_chase[j]) for r in with_chase]
        rows.append(row)
    out.table(columns, rows, title=title)


def _sweep_series(sweep):
    return {"power_vs_shrinkage": sweep.series()}


def cmd_power(args, out):
    """Predictive power analysis of a study file."""
    started = time.perf_counter()
    study = load_study(args.study)
    correlation = read_correlation_matrix(args.fixed_correlation) if args.fixed_correlation else None
    config = study.to_config(correlation=correlation, **_overrides(args))

    report = run_power_analysis(config, threads=args.threads)
    if args.sweep is not None:
        sweep = shrinkage_sweep(config, args.sweep or DEFAULT_SWEEP, threads=args.threads)
        report.series.update(_sweep_series(sweep))

    if args.format == "json":
        out.json(report_file(report, _timing(args, started)).to_json())
        return EXIT_OK

    out.table(["method", "pap", "pdp", "pcp", "mc bound", "clamped"], _summary_rows(report),
              title=f"Predictive powers: m={config.m}, S={config.s_iters}, N={config.n_draws}, seed={config.seed}")
    out.line()
    _per_test_table(out, report, "Marginal powers")
    if report.series.get("power_vs_shrinkage"):
        out.line()
        rows = [[r["shrinkage"], r["method"], r["pap"], r["pdp"], r["pcp"]] for r in report.series["power_vs_shrinkage"]]
        out.table(["shrinkage", "method", "pap", "pdp", "pcp"], rows, title="Shrinkage sweep")
    out.line(f"config hash {report.provenance['config_hash']}")
    return EXIT_OK


def _marks_text(marks):
    return ",".join(marks) if marks else ""


def cmd_case_study(args, out):
    """Reproduce the bundled case study and compare it with the published table."""
    started = time.perf_counter()
    overrides = _overrides(args)
    overrides.pop("two_pass", None)
    config = needleman_config(**overrides)
    result: CaseStudyResult = run_case_study(config, threads=args.threads)
    report = result.report
    sweep_rows = []
    if args.sweep is not None:
        sweep, sweep_rows = run_case_study_sweep(
            config.with_changes(methods=tuple(parse_methods(["dp"]))), args.sweep or DEFAULT_SWEEP, args.threads
        )
        report.series.update(_sweep_series(sweep))

    if args.format == "json":
        extra = {"max_deviation": result.max_deviations(),
                 "weighted_mark_mismatches": [list(pair) for pair in result.weighted_mark_mismatches()]}
        extra.update(_timing(args, started) or {})
        out.json(report_file(report, extra).to_json())
        return EXIT_OK

    rows = []
    for cells in result.rows():
        test_id = cells[0]
        rows.append(cells + [_marks_text(result.marks.get(test_id)), _marks_text(result.weighted_marks.get(test_id))])
    out.table(CaseStudyResult.columns() + ["rejected by", "rejected by (w)"], rows,
              title=f"Case study: reproduced vs published (S={config.s_iters}, N={config.n_draws}, seed={config.seed})",
              digits=2)
    out.line()
    out.table(["column", "max deviation"], [[k, v] for k, v in result.max_deviations().items()], digits=3)
    mismatches = result.weighted_mark_mismatches()
    out.line(f"Weighted marks differing from the published table: "
             f"{', '.join(f'{tid}:{label}' for tid, label in mismatches) if mismatches else 'none'}")
    out.line()
    summary = [[r.label, r.pap, PUBLISHED_AVERAGE_POWER.get(r.label), r.pdp, r.pcp] for r in report.results.values()]
    out.table(["method", "pap", "pap ref", "pdp", "pcp"], summary, title="Average, disjunctive and conjunctive power")
    if sweep_rows:
        out.line()
        out.table(["shrinkage", "pap", "pap ref", "pdp", "pdp ref", "pcp"], sweep_rows, title="DP shrinkage sweep")
    return EXIT_OK


def cmd_sample_size(args, out):
    """Smallest sample-size multiplier reaching a target marginal power per test."""
    started = time.perf_counter()
    study = load_study(args.study)
    correlation = read_correlation_matrix(args.fixed_correlation) if args.fixed_correlation else None
    overrides = _overrides(args)
    overrides.pop("methods", None)
    config = study.to_config(correlation=correlation, **overrides)
    method = (args.method or ["b"])[0]
    test_ids = args.test or config.ids

    found, unreachable, series = [], [], []
    for test_id in test_ids:
        try:
            result = sample_size_search(config, test_id, args.target, method=method,
                                        kappa_max=args.kappa_max, tolerance=args.tolerance, threads=args.threads)
        except Unreachable as e:
            logger.warning(str(e))
            unreachable.append([test_id, f">{e.best_kappa:g}", e.best_power, None])
            continue
        found.append([test_id, result.kappa, result.power, result.implied_n])
        series += result.series()

    if args.format == "json":
        out.json(_json_text({
            "target": args.target,
            "method": parse_methods([method])[0].label,
            "tool_version": TOOL_VERSION,
            "results": [{"test_id": r[0], "kappa": r[1], "power": r[2], "implied_n": r[3]} for r in found],
            "unreachable": [{"test_id": r[0], "power_at_kappa_max": r[2]} for r in unreachable],
            "series": {"power_vs_kappa": series},
            **(_timing(args, started) or {}),
        }))
    else:
        out.table(["test", "kappa", "power", "implied n"], found + unreachable,
                  title=f"Sample size for target power {args.target}")
    return EXIT_UNREACHABLE if unreachable else EXIT_OK


def _test_id(text):
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"test id must be an integer, got '{text}'")


def _levels(text):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated shrinkage levels, got '{text}'")


def build_parser():
    """
    Build the argument parser with one subcommand per operation.

    Returns:
        argparse.ArgumentParser: The parser
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--alpha', type=float, help='Significance level')
    common.add_argument('--method', action='append', help='b|h|by|dp, optionally with :weighted (repeatable)')
    common.add_argument('--n-draws', type=int, help='DP draws N')
    common.add_argument('--seed', type=int, help='Root seed')
    common.add_argument('--hyper-rate', type=float, help='Rate of the exponential prior on the DP mass')
    common.add_argument('--per-rank-dp', action='store_true', help='Per-rank DP comparison instead of step-up')
    common.add_argument('--out', help='Write output to this path')
    common.add_argument('--format', choices=['table', 'json'], default='table', help='Output format')
    common.add_argument('--no-color', action='store_true', help='Disable colored output')
    common.add_argument('--verbose', '-v', action='store_true', help='Debug logging')
    common.add_argument('--debug', '-d', action='store_true', help='Show tracebacks on errors')

    simulation = argparse.ArgumentParser(add_help=False)
    simulation.add_argument('--s-iters', type=int, help='Outer iterations S')
    simulation.add_argument('--threads', type=int, default=1, help="Worker threads, 0 for all cores (results do not depend on it)")
    simulation.add_argument('--shrinkage', type=float, help='Common shrinkage in [0, 1]')
    simulation.add_argument('--shared-dp-draws', action='store_true', help='One batch of DP draws for all iterations')
    simulation.add_argument('--literal-sigchase', action='store_true', help='Unrooted significance-chasing index')
    simulation.add_argument('--two-pass', action='store_true', help='Derive weighted-method weights from a first pass')
    simulation.add_argument('--fixed-correlation', help='Correlation matrix file used on every iteration')
    simulation.add_argument('--record-timing', action='store_true', help='Record wall time in the report')

    parser = argparse.ArgumentParser(prog='mtppower', description='Bayesian predictive power for multiple testing')
    parser.add_argument('--version', action='version', version=f'%(prog)s {TOOL_VERSION}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('mtp', parents=[common], help='Apply B, H or BY to observed p-values')
    p.add_argument('family', help='p-value table or study file')
    p.set_defaults(handler=cmd_mtp)

    p = sub.add_parser('dpmtp', parents=[common], help='DP-MTP significance probabilities')
    p.add_argument('family', help='p-value table or study file')
    p.add_argument('--weighted', action='store_true', help='Use the table weights')
    p.set_defaults(handler=cmd_dpmtp)

    p = sub.add_parser('power', parents=[common, simulation], help='Predictive power analysis of a study file')
    p.add_argument('study', help='Study file (YAML)')
    p.add_argument('--sweep', type=_levels, nargs='?', const=[], help='Also run a shrinkage sweep (e.g. 0,0.25,0.5)')
    p.set_defaults(handler=cmd_power)

    p = sub.add_parser('case-study', parents=[common, simulation], help='Reproduce the bundled case study')
    p.add_argument('--sweep', type=_levels, nargs='?', const=[], help='Also run the shrinkage sweep')
    p.set_defaults(handler=cmd_case_study)

    p = sub.add_parser('sample-size', parents=[common, simulation], help='Sample-size multiplier search')
    p.add_argument('study', help='Study file (YAML)')
    p.add_argument('--target', type=float, required=True, help='Target marginal power')
    p.add_argument('--test', type=_test_id, action='append', help='Test id to size (repeatable; default all)')
    p.add_argument('--kappa-max', type=float, default=DEFAULT_KAPPA_MAX, help='Upper end of the kappa bracket')
    p.add_argument('--tolerance', type=float, default=DEFAULT_TOLERANCE, help='Final kappa bracket width')
    p.set_defaults(handler=cmd_sample_size)
    return parser


def _handle_error(error, args, palette):
    fore, style = palette.fore, palette.style
    print(f"{fore.RED}{format_error(error)}{style.RESET_ALL}", file=sys.stderr)
    if getattr(args, 'debug', False):
        print(f"\n{fore.RED}Traceback:{style.RESET_ALL}", file=sys.stderr)
        traceback.print_exc()


def run_cli(argv=None):
    """
    Parse arguments, run one command and return its exit code.

    Args:
        argv (list, optional): Arguments without the program name

    Returns:
        int: 0 on success, 2 on configuration errors, 3 if a target is unreachable
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    if getattr(args, 'threads', 1) < 1:
        args.threads = os.cpu_count() or 1

    palette = Palette(enabled=not args.no_color)
    out = Output(args)
    try:
        code = args.handler(args, out)
        out.flush()
        return code
    except Unreachable as e:
        _handle_error(e, args, palette)
        return EXIT_UNREACHABLE
    except (MtpPowerError, OSError) as e:
        _handle_error(e, args, palette)
        return EXIT_CONFIG
