"""
mtppower.tests - Test suite for mtppower

Unit tests for the core samplers, the procedures, the power engine, the parsers,
the command line and the bundled case study.

Changes:
- Added as part of restructuring to organize test files
- Full-scale case-study runs gated behind MTPPOWER_SLOW=1
"""

# No exports needed for test package
