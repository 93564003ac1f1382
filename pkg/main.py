"""
main.py - Main entry point for mtppower

This module serves as the main entry point for the mtppower package and the
`mtppower` console script.

Changes:
- Restructured project to use a modules-based structure
- main() delegates to the argparse command surface and exits with its code
"""

import sys

from modules.cli.cli import run_cli


def main(argv=None):
    """
    Main entry point for the mtppower package.

    Args:
        argv (list, optional): Arguments without the program name
    """
    sys.exit(run_cli(argv))


if __name__ == '__main__':
    main()
