"""
cli package - Command Line Interface for mtppower

This package contains the argparse command surface and the bundled case study.

Changes:
- Replaced the interactive shell with subcommands
- Added the case-study reproduction
"""

from modules.cli.cli import build_parser, run_cli
from modules.cli.casestudy import CaseStudyResult, needleman_config, needleman_tests, run_case_study

__all__ = ['build_parser', 'run_cli', 'CaseStudyResult', 'needleman_config', 'needleman_tests', 'run_case_study']
