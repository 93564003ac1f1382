"""
mtppower.parser - Input file readers for mtppower

This package reads study files (YAML), p-value tables (delimited text) and
correlation-matrix files, reporting schema problems with line numbers.

Changes:
- Initial implementation of the parser package
- Expose study-file round trips and correlation-matrix reading
"""

from modules.parser.study import (
    StudyFile,
    TestEntry,
    parse_study,
    load_study,
    dump_study,
)
from modules.parser.family import (
    FamilyTable,
    parse_family_frame,
    read_family_table,
    family_from_study,
    read_correlation_matrix,
)

__all__ = [
    'StudyFile',
    'TestEntry',
    'parse_study',
    'load_study',
    'dump_study',
    'FamilyTable',
    'parse_family_frame',
    'read_family_table',
    'family_from_study',
    'read_correlation_matrix',
]
