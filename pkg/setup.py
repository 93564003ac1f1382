#!/usr/bin/env python3
"""
setup.py - Installation script for mtppower

This file enables installation of the mtppower package using pip.

Changes:
- Renamed the distribution and console script
- Added the procedures package
- Numerical dependencies come from requirements.txt
"""

from setuptools import setup
import os
import sys

# Add the current directory to the Python path
sys.path.insert(0, os.path.abspath('.'))

# Read requirements from requirements.txt
with open('requirements.txt') as f:
    requirements = [line.split('#')[0].strip() for line in f if line.split('#')[0].strip()]

# Read the version from __init__.py
with open('__init__.py') as f:
    for line in f:
        if line.startswith('__version__'):
            version = line.split('=')[1].strip().strip("'").strip('"')
            break

# Read the long description from README.md
with open('README.md', encoding='utf-8') as f:
    long_description = f.read()

setup(
    name="mtp_power",
    version=version,
    description="Bayesian predictive power analysis for multiple testing procedures",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=[
        'modules',
        'modules.cli',
        'modules.core',
        'modules.engine',
        'modules.parser',
        'modules.procedures',
        'modules.utils',
        'modules.tests',
    ],
    package_dir={'modules': 'modules'},
    py_modules=["main", "__main__", "__init__"],
    include_package_data=True,
    install_requires=requirements,
    python_requires=">=3.9",
    entry_points={
        "console_scripts": [
            "mtppower=main:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    keywords="multiple testing, power analysis, bonferroni, holm, benjamini-yekutieli, dirichlet process",
)
