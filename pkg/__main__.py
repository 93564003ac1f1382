"""
__main__.py - Entry point for mtppower

This file allows running mtppower directly using:
python -m

Changes:
- Created __main__.py to support the module-based structure
"""

from main import main

if __name__ == '__main__':
    main()
