"""
utils package - Utility functions for mtppower

This package contains table formatting and run provenance helpers.

Changes:
- Initial implementation of the utils package
- Added format_utils module with table formatting utilities
- Added provenance module with config hashing
"""

from modules.utils.format_utils import format_table, format_value, format_error
from modules.utils.provenance import TOOL_VERSION, build_provenance, config_hash

__all__ = ['format_table', 'format_value', 'format_error', 'TOOL_VERSION', 'build_provenance', 'config_hash']
